"""Angular scattering models, per-index variance spectra, ACF and PSD.

A profile is either isotropic (uniform power ``1/pi`` over the forward
half-plane) or a mixture of von Mises-Fisher clusters, each with density

    p(theta) = exp(alpha * cos(theta - mean)) / (2 pi I0(alpha)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import WavenumberGrid, cell_bounds
from .numerics import (
    DomainError,
    QuadratureSpec,
    QuadratureResult,
    bessel_i_scaled,
    bessel_j0,
    integrate_panels,
    log_bessel_i0_complex,
    panel_rule,
)

__all__ = [
    "Cluster",
    "ScatteringProfile",
    "SpectralStats",
    "isotropic",
    "non_isotropic_1",
    "non_isotropic_2",
    "PRESETS",
    "circular_variance",
    "concentration_from_variance",
    "psf_value",
    "variance_spectrum",
    "spectral_stats",
    "acf_closed_form",
    "acf_closed_form_profile",
    "acf_quadrature",
    "psd_closed_form",
    "psd_closed_form_profile",
    "psd_from_psf",
]

ALPHA_MAX = 1e6


def circular_variance(alpha):
    """``1 - (I1(alpha) / I0(alpha))**2``."""
    alpha = np.asarray(alpha, dtype=float)
    ratio = bessel_i_scaled(1, alpha) / bessel_i_scaled(0, alpha)
    return (1.0 - ratio * ratio)[()]


def concentration_from_variance(nu2: float) -> float:
    """Solve ``1 - (I1(a)/I0(a))**2 = nu2`` for the concentration ``a``.

    Bisection on ``[0, 1e6]``; the circular variance is strictly decreasing
    in ``a``, so the root is unique.
    """
    if not (math.isfinite(nu2) and 0.0 < nu2 <= 1.0):
        raise DomainError(f"circular variance must lie in (0, 1], got {nu2!r}")
    if nu2 == 1.0:
        return 0.0
    lo, hi = 0.0, ALPHA_MAX
    if circular_variance(hi) > nu2:
        raise DomainError(f"circular variance {nu2!r} too small to resolve")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if circular_variance(mid) > nu2:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class Cluster:
    """One vMF scattering cluster.

    Attributes
    ----------
    weight : float
        Mixture weight in (0, 1].
    mean_angle : float
        Mean angle in radians, ``[0, pi)``.
    alpha : float
        Concentration, ``>= 0``.
    """

    weight: float
    mean_angle: float
    alpha: float

    def __post_init__(self):
        if not (0.0 < self.weight <= 1.0):
            raise DomainError(f"cluster weight must lie in (0, 1], got {self.weight!r}")
        if not (0.0 <= self.mean_angle < math.pi):
            raise DomainError(f"mean angle must lie in [0, pi), got {self.mean_angle!r}")
        if not (math.isfinite(self.alpha) and self.alpha >= 0.0):
            raise DomainError(f"concentration must be >= 0, got {self.alpha!r}")

    @classmethod
    def from_variance(cls, weight: float, mean_angle: float, nu2: float) -> "Cluster":
        return cls(weight, mean_angle, concentration_from_variance(nu2))

    @classmethod
    def from_degrees(cls, weight: float, mean_deg: float, nu2: float) -> "Cluster":
        return cls.from_variance(weight, math.radians(mean_deg), nu2)

    @property
    def circ_variance(self) -> float:
        return float(circular_variance(self.alpha))


@dataclass(frozen=True)
class ScatteringProfile:
    """Angular power profile of one side.

    ``kind`` is ``"isotropic"`` (no clusters) or ``"clusters"``.  An
    isotropic profile behaves like a single cluster with zero concentration
    renormalised onto the forward half-plane.
    """

    kind: str = "isotropic"
    clusters: tuple[Cluster, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        if self.kind == "isotropic":
            if self.clusters:
                raise DomainError("isotropic profile takes no clusters")
        elif self.kind == "clusters":
            if not self.clusters:
                raise DomainError("cluster profile needs at least one cluster")
            total = math.fsum(c.weight for c in self.clusters)
            if abs(total - 1.0) > 1e-12:
                raise DomainError(f"cluster weights sum to {total!r}, expected 1")
        else:
            raise DomainError(f"unknown profile kind {self.kind!r}")

    @property
    def is_isotropic(self) -> bool:
        return self.kind == "isotropic"

    @property
    def max_alpha(self) -> float:
        return max((c.alpha for c in self.clusters), default=0.0)


def isotropic() -> ScatteringProfile:
    return ScatteringProfile("isotropic")


def non_isotropic_1() -> ScatteringProfile:
    """Two equal-weight clusters at 30 and 60 degrees."""
    return ScatteringProfile("clusters", (
        Cluster.from_degrees(0.5, 30.0, 0.01),
        Cluster.from_degrees(0.5, 60.0, 0.005),
    ))


def non_isotropic_2() -> ScatteringProfile:
    """Single cluster at 120 degrees."""
    return ScatteringProfile("clusters", (Cluster.from_degrees(1.0, 120.0, 0.025),))


PRESETS = {
    "isotropic": isotropic,
    "non_isotropic_1": non_isotropic_1,
    "non_isotropic_2": non_isotropic_2,
}


def _log_norm(alpha: float) -> float:
    # log(2 pi I0(alpha)) via the scaled Bessel function
    return math.log(2.0 * math.pi) + alpha + math.log(float(bessel_i_scaled(0, alpha)))


def psf_value(profile: ScatteringProfile, theta):
    """Angular power density ``A~^2(theta)``.

    Isotropic profiles return ``1/pi`` on ``[0, pi)`` and zero elsewhere.
    """
    theta = np.asarray(theta, dtype=float)
    if profile.is_isotropic:
        inside = (theta >= 0.0) & (theta < math.pi)
        return np.where(inside, 1.0 / math.pi, 0.0)[()]
    out = np.zeros_like(theta)
    for c in profile.clusters:
        out = out + c.weight * np.exp(c.alpha * (np.cos(theta - c.mean_angle) - 1.0)
                                      + c.alpha - _log_norm(c.alpha))
    return out[()]


@dataclass(frozen=True, eq=False)
class SpectralStats:
    """Per-index variances of both sides over the wavenumber index sets."""

    sigma2_s: np.ndarray
    sigma2_r: np.ndarray

    def __post_init__(self):
        for name in ("sigma2_s", "sigma2_r"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise DomainError(f"{name} must be finite and nonnegative")
            object.__setattr__(self, name, v)


def _cell_panels(profile: ScatteringProfile) -> int:
    return 4 * max(1, math.ceil(profile.max_alpha / 50.0))


def variance_spectrum(profile: ScatteringProfile, grid: WavenumberGrid, side: str) -> np.ndarray:
    """Angular power captured by each wavenumber cell of one side.

    Returns an array aligned with ``grid.E_s`` or ``grid.E_r``.
    """
    if side == "s":
        indices, L = grid.E_s, grid.L_s
    elif side == "r":
        indices, L = grid.E_r, grid.L_r
    else:
        raise ValueError("side must be 's' or 'r'")
    lo, hi = cell_bounds(indices, L, grid.wavelength)
    assert np.all(hi >= lo)
    if profile.is_isotropic:
        return (hi - lo) / math.pi
    panels = _cell_panels(profile)
    t, w = panel_rule(0.0, 1.0, panels, 16)
    # Map the reference rule onto every cell at once.
    nodes = lo[:, None] + (hi - lo)[:, None] * t
    weights = (hi - lo)[:, None] * w
    return np.sum(psf_value(profile, nodes) * weights, axis=1)


def spectral_stats(
    grid: WavenumberGrid,
    source: ScatteringProfile,
    receive: ScatteringProfile | None = None,
) -> SpectralStats:
    """Variance spectra for both sides; ``receive`` defaults to ``source``."""
    receive = source if receive is None else receive
    return SpectralStats(variance_spectrum(source, grid, "s"),
                         variance_spectrum(receive, grid, "r"))


def acf_closed_form(alpha: float, mean_angle: float, k: float, r_x):
    """Spatial autocorrelation of a single vMF cluster.

    ``I0(sqrt(a^2 - (k r)^2 + 2j a k r cos(mean))) / I0(a)``, evaluated as a
    difference of logarithms.  ``alpha == 0`` returns ``J0(k r)``.
    """
    if not alpha >= 0:
        raise DomainError("concentration must be >= 0")
    kr = k * np.asarray(r_x, dtype=float)
    if alpha == 0:
        return np.asarray(bessel_j0(kr), dtype=complex)[()]
    arg = np.sqrt(alpha * alpha - kr * kr + 2j * alpha * kr * math.cos(mean_angle) + 0j)
    log_den = alpha + math.log(float(bessel_i_scaled(0, alpha)))
    return np.exp(log_bessel_i0_complex(arg) - log_den)[()]


def acf_closed_form_profile(profile: ScatteringProfile, k: float, r_x):
    """Closed-form ACF of a profile (weighted sum over clusters)."""
    if profile.is_isotropic:
        return acf_closed_form(0.0, 0.0, k, r_x)
    out = 0.0
    for c in profile.clusters:
        out = out + c.weight * acf_closed_form(c.alpha, c.mean_angle, k, r_x)
    return out


def acf_quadrature(
    profile: ScatteringProfile,
    k: float,
    r_x,
    abs_tol: float = 1e-10,
) -> QuadratureResult:
    """Reference ACF ``int_0^pi A~^2(theta) exp(j k r cos theta) dtheta``.

    ``r_x`` may be an array; the panel count covers the largest phase swing
    and is further scaled for narrow clusters.
    """
    r = np.atleast_1d(np.asarray(r_x, dtype=float))
    panels = (4 + math.ceil(k * float(np.max(np.abs(r))) / math.pi)) * max(
        1, math.ceil(math.sqrt(profile.max_alpha) / 4.0))

    def f(theta):
        return psf_value(profile, theta)[None, :] * np.exp(
            1j * k * r[:, None] * np.cos(theta)[None, :])

    res = integrate_panels(f, 0.0, math.pi, QuadratureSpec(panels, 16, abs_tol))
    value = res.value if np.ndim(r_x) else res.value[0]
    return res._replace(value=value)


def psd_closed_form(alpha: float, mean_angle: float, k: float, k_x):
    """Closed-form wavenumber PSD of a single vMF cluster.

    ``2 / sqrt(k^2 - k_x^2) * exp(a cos(mean) k_x/k + a sin(mean)
    sqrt(1 - (k_x/k)^2)) / I0(a)`` on ``|k_x| < k``.
    """
    kx = np.asarray(k_x, dtype=float)
    if np.any(np.abs(kx) >= k):
        raise DomainError("PSD is defined only on the propagating band |k_x| < k")
    u = kx / k
    log_val = (math.log(2.0) - 0.5 * np.log(k * k - kx * kx)
               + alpha * math.cos(mean_angle) * u
               + alpha * math.sin(mean_angle) * np.sqrt(1.0 - u * u))
    if alpha > 0:
        log_val = log_val - (alpha + math.log(float(bessel_i_scaled(0, alpha))))
    return np.exp(log_val)[()]


def psd_closed_form_profile(profile: ScatteringProfile, k: float, k_x):
    if profile.is_isotropic:
        return psd_closed_form(0.0, 0.0, k, k_x)
    out = 0.0
    for c in profile.clusters:
        out = out + c.weight * psd_closed_form(c.alpha, c.mean_angle, k, k_x)
    return out


def psd_from_psf(profile: ScatteringProfile, k: float, k_x):
    """PSD by change of variables ``k_x = k cos(theta)``: ``2 pi A~^2 / (k sin theta)``."""
    kx = np.asarray(k_x, dtype=float)
    if np.any(np.abs(kx) >= k):
        raise DomainError("PSD is defined only on the propagating band |k_x| < k")
    theta = np.arccos(kx / k)
    return (2.0 * math.pi * psf_value(profile, theta) / (k * np.sin(theta)))[()]
