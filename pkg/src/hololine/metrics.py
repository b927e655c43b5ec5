"""Eigen-spectra, degrees of freedom, water-filling and ergodic capacity."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import EnsembleSpec, trial_rng
from .geometry import SystemGeometry
from .numerics import DomainError
from .scattering import SpectralStats

__all__ = [
    "DofReport",
    "CapacityReport",
    "eigen_spectrum_normalized",
    "dof_los",
    "dof_spectrum",
    "dof_nlos",
    "dof_composite",
    "knee_index",
    "waterfill",
    "ergodic_capacity",
    "capacity_sweep",
    "dbw_to_watts",
    "THREADS_ENV",
]

THREADS_ENV = "HOLOLINE_THREADS"
RANK_TOL = 1e-14
MAX_FAILURE_FRACTION = 0.01


@dataclass(frozen=True)
class DofReport:
    kind: str
    value: int
    epsilon: float | None = None


@dataclass(frozen=True, eq=False)
class CapacityReport:
    """Monte Carlo ergodic capacity at one power level.

    ``per_trial`` holds the capacity of each successful trial in trial order.
    """

    mean_bits: float
    trials: int
    std_error: float
    power_w: float
    noise_var: float
    seed: int
    failures: int = 0
    per_trial: np.ndarray = field(default=None, repr=False)


def dbw_to_watts(dbw):
    return 10.0 ** (np.asarray(dbw, dtype=float) / 10.0)


def eigen_spectrum_normalized(M: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of a Hermitian PSD matrix, descending, divided by the trace."""
    M = np.asarray(M)
    scale = max(float(np.max(np.abs(M))), np.finfo(float).tiny)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("expected a square matrix")
    if np.max(np.abs(M - M.conj().T)) > rtol * scale:
        raise ValueError("matrix is not Hermitian within tolerance")
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))[::-1]
    return w / np.sum(w)


def dof_los(geom: SystemGeometry) -> int:
    """``floor(L_s L_r / (lambda d))``."""
    ratio = geom.L_s * geom.L_r / (geom.wavelength * geom.d)
    r = round(ratio)
    if abs(ratio - r) <= 1e-9 * max(1.0, ratio):
        ratio = r
    return int(math.floor(ratio))


def dof_spectrum(weights, epsilon: float) -> int:
    """Fewest strongest modes carrying at least ``1 - epsilon`` of the power."""
    w = np.asarray(weights, dtype=float).ravel()
    if w.size == 0:
        raise DomainError("dof_spectrum needs at least one weight")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must lie in (0, 1)")
    if np.any(w < 0):
        raise DomainError("weights must be nonnegative")
    total = w.sum()
    if total <= 0:
        raise DomainError("weights sum to zero")
    c = np.cumsum(np.sort(w)[::-1] / total)
    # Small slack absorbs round-off in the cumulative sum.
    return int(np.searchsorted(c, 1.0 - epsilon - 1e-12) + 1)


def dof_nlos(stats: SpectralStats, epsilon: float, isotropic: bool = False) -> DofReport:
    """NLoS DoF as the smaller of the two per-side counts.

    For isotropic scattering every propagating index carries equal weight,
    so the count is ``min(n_s, n_r)``.
    """
    if isotropic:
        n = min(len(stats.sigma2_s), len(stats.sigma2_r))
        return DofReport("iso", n, epsilon)
    value = min(dof_spectrum(stats.sigma2_s, epsilon), dof_spectrum(stats.sigma2_r, epsilon))
    return DofReport("non_iso", value, epsilon)


def dof_composite(gram: np.ndarray, epsilon: float) -> int:
    return dof_spectrum(np.clip(eigen_spectrum_normalized(gram), 0.0, None), epsilon)


def knee_index(normalized_eigs, drop_db: float = 3.0) -> int:
    """Number of leading modes within ``drop_db`` of the strongest one."""
    e = np.asarray(normalized_eigs, dtype=float)
    thresh = e[0] * 10.0 ** (-drop_db / 10.0)
    return int(np.argmax(e < thresh)) if np.any(e < thresh) else len(e)


def waterfill(rho, P: float, noise_var: float):
    """Capacity-optimal power allocation over parallel channels.

    Parameters
    ----------
    rho : array_like
        Channel gains; nonpositive entries get no power.
    P : float
        Total power (W), ``> 0``.
    noise_var : float
        Noise power (W), ``> 0``.

    Returns
    -------
    allocation : ndarray
        Power per entry of ``rho`` (original order).
    capacity : float
        ``sum log2(1 + P_i rho_i / noise_var)`` in bits.
    """
    if not (P > 0 and noise_var > 0):
        raise DomainError("power and noise variance must be positive")
    rho = np.asarray(rho, dtype=float).ravel()
    alloc = np.zeros_like(rho)
    pos = np.flatnonzero(rho > 0)
    if pos.size == 0:
        return alloc, 0.0
    order = pos[np.argsort(rho[pos])[::-1]]
    inv = noise_var / rho[order]  # ascending floor levels
    csum = np.cumsum(inv)
    m = np.arange(1, len(order) + 1)
    mu = (P + csum) / m
    # Largest active set whose weakest member still sits below the water level.
    active = int(np.flatnonzero(mu > inv)[-1]) + 1
    level = mu[active - 1]
    alloc[order[:active]] = level - inv[:active]
    cap = float(np.sum(np.log2(1.0 + alloc[order[:active]] * rho[order[:active]] / noise_var)))
    return alloc, cap


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _trial_eigs(spec: EnsembleSpec, master_seed: int, t: int):
    try:
        w = spec.gram_eigenvalues(trial_rng(master_seed, t))
        if not np.all(np.isfinite(w)):
            return None
        return w
    except np.linalg.LinAlgError:
        return None


def capacity_sweep(
    spec: EnsembleSpec,
    powers_w,
    noise_var: float,
    trials: int,
    master_seed: int,
) -> list[CapacityReport]:
    """Ergodic capacity at several power levels over one set of realizations.

    Each realization is drawn once from its own substream and water-filled at
    every power.  Trials whose eigen-decomposition fails are excluded and
    counted; more than 1% failures raise ``RuntimeError``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    powers = np.atleast_1d(np.asarray(powers_w, dtype=float))
    caps = np.full((trials, powers.size), np.nan)

    def run(t):
        w = _trial_eigs(spec, master_seed, t)
        if w is None:
            return
        w = w[w > RANK_TOL * np.sum(np.abs(w))]
        for j, p in enumerate(powers):
            caps[t, j] = waterfill(w, p, noise_var)[1]

    n_threads = _threads()
    if n_threads > 1:
        with ThreadPoolExecutor(n_threads) as ex:
            list(ex.map(run, range(trials)))
    else:
        for t in range(trials):
            run(t)

    ok = ~np.isnan(caps[:, 0])
    failures = int(trials - ok.sum())
    if failures > MAX_FAILURE_FRACTION * trials:
        raise RuntimeError(f"{failures} of {trials} trials failed numerically")
    good = caps[ok]
    out = []
    for j, p in enumerate(powers):
        c = good[:, j]
        se = float(np.std(c, ddof=1) / math.sqrt(len(c))) if len(c) > 1 else 0.0
        out.append(CapacityReport(float(np.mean(c)), int(len(c)), se, float(p),
                                  float(noise_var), int(master_seed), failures, c.copy()))
    return out


def ergodic_capacity(
    spec: EnsembleSpec,
    P: float,
    noise_var: float,
    trials: int,
    master_seed: int,
) -> CapacityReport:
    """Mean water-filled capacity (bits/s/Hz) over ``trials`` realizations."""
    return capacity_sweep(spec, [P], noise_var, trials, master_seed)[0]
