"""Channel matrices: LoS kernels, Fourier plane-wave NLoS synthesis and
their correlation structure.

The NLoS channel is built as

    H = A_r diag(sigma_r) diag(e^{j gamma_r r_z}) W diag(e^{-j gamma_s s_z}) diag(sigma_s) A_s^H

with ``sigma = sqrt(N * sigma2)`` and ``W`` standard complex Gaussian.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import ConfigError, SystemGeometry, WavenumberGrid, sample_points, wavenumber_grid
from .numerics import bessel_j0, hankel1_0
from .scattering import ScatteringProfile, SpectralStats, spectral_stats

__all__ = [
    "ETA",
    "ChannelMatrix",
    "FourierDictionary",
    "CorrelationSet",
    "EnsembleSpec",
    "los_raytracing",
    "los_em",
    "fourier_dictionary",
    "trial_rng",
    "complex_gaussian",
    "angular_core",
    "nlos_realization",
    "correlation_matrices",
    "compose",
    "mean_gram",
    "jakes_correlation",
    "psd_sqrt",
    "write_complex_csv",
    "read_complex_csv",
]

ETA = 120.0 * math.pi  # free-space impedance, ohms

MODELS = ("nlos", "composite", "los", "iid", "jakes")


@dataclass(frozen=True, eq=False)
class ChannelMatrix:
    """Complex ``N_r x N_s`` channel with its construction tag."""

    entries: np.ndarray
    model: str
    seed: int | None = None

    @property
    def shape(self):
        return self.entries.shape

    def gram(self) -> np.ndarray:
        return self.entries @ self.entries.conj().T


@dataclass(frozen=True, eq=False)
class FourierDictionary:
    A_s: np.ndarray
    A_r: np.ndarray


@dataclass(frozen=True, eq=False)
class CorrelationSet:
    R_s: np.ndarray
    R_r: np.ndarray


def _distances(geom: SystemGeometry) -> np.ndarray:
    xs, xr = sample_points(geom)
    return np.hypot(geom.d, xr[:, None] - xs[None, :])


def los_raytracing(geom: SystemGeometry) -> ChannelMatrix:
    """Free-space ray-tracing LoS channel ``lambda/(4 pi r) e^{j k r}``."""
    r = _distances(geom)
    h = geom.wavelength / (4.0 * math.pi * r) * np.exp(1j * geom.k * r)
    return ChannelMatrix(h, "raytrace")


def los_em(geom: SystemGeometry) -> ChannelMatrix:
    """LoS channel from the 2-D scalar Green's function ``(k eta / 4) H0(k r)``."""
    r = _distances(geom)
    h = (geom.k * ETA / 4.0) * hankel1_0(geom.k * r)
    return ChannelMatrix(h, "em_los")


def _harmonics(x: np.ndarray, indices: np.ndarray, L: float) -> np.ndarray:
    return np.exp(1j * (2.0 * math.pi / L) * np.outer(x, indices)) / math.sqrt(len(x))


def fourier_dictionary(geom: SystemGeometry, grid: WavenumberGrid | None = None) -> FourierDictionary:
    """Sampled plane-wave harmonics, one column per wavenumber index."""
    grid = wavenumber_grid(geom) if grid is None else grid
    if geom.N_s < grid.n_s or geom.N_r < grid.n_r:
        raise ConfigError(
            f"spatial sampling too coarse: need N_s >= {grid.n_s} and N_r >= {grid.n_r}, "
            f"got {geom.N_s} and {geom.N_r}; reduce the element spacing"
        )
    xs, xr = sample_points(geom)
    return FourierDictionary(_harmonics(xs, grid.E_s, grid.L_s), _harmonics(xr, grid.E_r, grid.L_r))


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    """Independent generator for realization ``trial`` of an ensemble.

    Streams come from ``SeedSequence(master_seed, spawn_key=(trial,))``, the
    same rule ``SeedSequence.spawn`` uses, so any subset of trials can be
    regenerated in any order.
    """
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(trial,)))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian samples: unit total variance, circular."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * math.sqrt(0.5)


def _sigma(geom: SystemGeometry, stats: SpectralStats):
    return np.sqrt(geom.N_s * stats.sigma2_s), np.sqrt(geom.N_r * stats.sigma2_r)


def angular_core(geom: SystemGeometry, stats: SpectralStats, W: np.ndarray) -> np.ndarray:
    """Angular-domain coupling ``diag(sigma_r) W diag(sigma_s)``."""
    sig_s, sig_r = _sigma(geom, stats)
    assert W.shape == (len(sig_r), len(sig_s))
    return sig_r[:, None] * W * sig_s[None, :]


def _nlos_factors(geom, grid, stats, dictionary):
    sig_s, sig_r = _sigma(geom, stats)
    assert len(sig_s) == grid.n_s and len(sig_r) == grid.n_r
    left = dictionary.A_r * (sig_r * np.exp(1j * grid.gamma_r * geom.r_z))[None, :]
    right = (sig_s * np.exp(-1j * grid.gamma_s * geom.s_z))[:, None] * dictionary.A_s.conj().T
    return left, right


def nlos_realization(
    geom: SystemGeometry,
    grid: WavenumberGrid,
    stats: SpectralStats,
    seed,
    dictionary: FourierDictionary | None = None,
) -> ChannelMatrix:
    """One NLoS realization.

    ``seed`` is an integer or a ``numpy.random.Generator``.  The coupling
    matrix is the first draw from that stream, so :func:`angular_core` with a
    matching draw reproduces the angular-domain channel exactly.
    """
    dictionary = fourier_dictionary(geom, grid) if dictionary is None else dictionary
    W = complex_gaussian(_as_rng(seed), (grid.n_r, grid.n_s))
    left, right = _nlos_factors(geom, grid, stats, dictionary)
    return ChannelMatrix(left @ W @ right, "nlos", seed if isinstance(seed, int) else None)


def correlation_matrices(
    geom: SystemGeometry,
    grid: WavenumberGrid,
    stats: SpectralStats,
    dictionary: FourierDictionary | None = None,
) -> CorrelationSet:
    """``R = A diag(N sigma2) A^H`` for each side."""
    dictionary = fourier_dictionary(geom, grid) if dictionary is None else dictionary
    A_s, A_r = dictionary.A_s, dictionary.A_r
    R_s = (A_s * (geom.N_s * stats.sigma2_s)) @ A_s.conj().T
    R_r = (A_r * (geom.N_r * stats.sigma2_r)) @ A_r.conj().T
    return CorrelationSet(R_s, R_r)


def compose(H_los: ChannelMatrix, H_nlos: ChannelMatrix, nlos_gain: float = 1.0) -> ChannelMatrix:
    """``H_los + nlos_gain * H_nlos``."""
    if H_los.shape != H_nlos.shape:
        raise ValueError(f"shape mismatch: {H_los.shape} vs {H_nlos.shape}")
    nl = H_nlos.entries if nlos_gain == 1.0 else nlos_gain * H_nlos.entries
    return ChannelMatrix(H_los.entries + nl, "composite", H_nlos.seed)


def mean_gram(H_los: ChannelMatrix | np.ndarray, corr: CorrelationSet, nlos_gain: float = 1.0) -> np.ndarray:
    """``E[H H^H] = H_los H_los^H + g^2 tr(R_s) R_r``."""
    h = H_los.entries if isinstance(H_los, ChannelMatrix) else np.asarray(H_los)
    if h.shape != (corr.R_r.shape[0], corr.R_s.shape[0]):
        raise ValueError("LoS matrix and correlation matrices disagree in size")
    G = h @ h.conj().T + (nlos_gain**2) * np.trace(corr.R_s).real * corr.R_r
    return 0.5 * (G + G.conj().T)


def jakes_correlation(x: np.ndarray, k: float) -> np.ndarray:
    """Sampled isotropic correlation ``J0(k (x_u - x_u'))``."""
    return bessel_j0(k * (x[:, None] - x[None, :]))


def psd_sqrt(R: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix (negative round-off clipped)."""
    w, V = np.linalg.eigh(R)
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    """Recipe for one random channel ensemble.

    Parameters
    ----------
    geometry : SystemGeometry
    model : str
        ``"nlos"`` (plane-wave NLoS), ``"composite"`` (LoS + NLoS),
        ``"los"`` (deterministic), ``"iid"`` (i.i.d. Rayleigh) or
        ``"jakes"`` (Kronecker model with sampled J0 correlations).
    source, receive : ScatteringProfile, optional
        Required by ``nlos`` and ``composite``; ``receive`` defaults to
        ``source``.
    los : str
        ``"em"`` or ``"raytrace"``.
    nlos_gain : float
        Amplitude applied to the NLoS term of composite channels.
    """

    geometry: SystemGeometry
    model: str = "nlos"
    source: ScatteringProfile | None = None
    receive: ScatteringProfile | None = None
    los: str = "em"
    nlos_gain: float = 1.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown channel model {self.model!r}; expected one of {MODELS}")
        if self.los not in ("em", "raytrace"):
            raise ConfigError(f"unknown LoS model {self.los!r}")
        if self.model in ("nlos", "composite") and self.source is None:
            raise ConfigError(f"model {self.model!r} needs a scattering profile")
        if self.receive is None:
            object.__setattr__(self, "receive", self.source)

    @cached_property
    def grid(self) -> WavenumberGrid:
        return wavenumber_grid(self.geometry)

    @cached_property
    def stats(self) -> SpectralStats:
        return spectral_stats(self.grid, self.source, self.receive)

    @cached_property
    def dictionary(self) -> FourierDictionary:
        return fourier_dictionary(self.geometry, self.grid)

    @cached_property
    def h_los(self) -> np.ndarray:
        build = los_em if self.los == "em" else los_raytracing
        return build(self.geometry).entries

    @cached_property
    def _factors(self):
        return _nlos_factors(self.geometry, self.grid, self.stats, self.dictionary)

    @cached_property
    def _jakes_roots(self):
        xs, xr = sample_points(self.geometry)
        k = self.geometry.k
        return psd_sqrt(jakes_correlation(xr, k)), psd_sqrt(jakes_correlation(xs, k))

    def realize(self, rng: np.random.Generator) -> np.ndarray:
        """Draw one channel matrix from ``rng``."""
        g = self.geometry
        if self.model == "los":
            return self.h_los
        if self.model == "iid":
            return complex_gaussian(rng, (g.N_r, g.N_s))
        if self.model == "jakes":
            root_r, root_s = self._jakes_roots
            return root_r @ complex_gaussian(rng, (g.N_r, g.N_s)) @ root_s
        left, right = self._factors
        h = left @ complex_gaussian(rng, (self.grid.n_r, self.grid.n_s)) @ right
        if self.model == "composite":
            h = self.h_los + self.nlos_gain * h
        return h

    def gram_eigenvalues(self, rng: np.random.Generator) -> np.ndarray:
        """Eigenvalues of ``H H^H`` for one draw.

        For pure NLoS the dictionaries are semi-unitary, so the nonzero
        eigenvalues equal those of the much smaller angular core
        ``diag(sigma_r) W diag(sigma_s)``; the draw sequence is the same as
        :meth:`realize`.
        """
        if self.model == "nlos":
            core = angular_core(self.geometry, self.stats,
                                complex_gaussian(rng, (self.grid.n_r, self.grid.n_s)))
            return _gram_eigvals(core)
        return _gram_eigvals(self.realize(rng))


def _gram_eigvals(h: np.ndarray) -> np.ndarray:
    # Use the smaller of H H^H and H^H H; their nonzero spectra coincide.
    g = h @ h.conj().T if h.shape[0] <= h.shape[1] else h.conj().T @ h
    return np.linalg.eigvalsh(g)


def write_complex_csv(path, M: np.ndarray) -> None:
    """Write a complex matrix, one row per matrix row, re/im in adjacent columns."""
    M = np.atleast_2d(M)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{p}_{j}" for j in range(M.shape[1]) for p in ("re", "im")])
        for row in M:
            w.writerow([repr(float(v)) for z in row for v in (z.real, z.imag)])


def read_complex_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    a = np.array(rows, dtype=float)
    return a[:, 0::2] + 1j * a[:, 1::2]
