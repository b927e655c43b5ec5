"""Wavenumber-division multiplexing: the channel seen through Fourier basis
functions on both segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ETA, _as_rng, complex_gaussian
from .geometry import ConfigError, SystemGeometry, WavenumberGrid, wavenumber_grid
from .numerics import QuadratureSpec, panel_rule
from .scattering import SpectralStats

__all__ = [
    "WdmConfig",
    "WdmLosMatrix",
    "default_panel_budget",
    "wdm_los",
    "wdm_nlos",
    "wdm_correlations",
]


@dataclass(frozen=True)
class WdmConfig:
    """Number of basis functions per side and an optional quadrature override.

    With ``quad=None`` the panel count follows :func:`default_panel_budget`.
    """

    N: int = 25
    quad: QuadratureSpec | None = None

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"WDM basis size must be a positive integer, got {self.N!r}")


@dataclass(frozen=True, eq=False)
class WdmLosMatrix:
    """LoS WDM matrix plus the accuracy record of its quadrature.

    ``rel_change`` is the largest entry change, relative to the largest
    entry, between ``panel_count`` and ``2 * panel_count`` panels; the
    returned entries use the finer rule.
    """

    entries: np.ndarray
    panel_count: int
    rel_change: float
    converged: bool


def default_panel_budget(geom: SystemGeometry, N: int) -> int:
    """Panels on ``(0, pi)`` for the LoS integral.

    The phase ``k d sin(theta)`` sweeps ``k d`` radians twice over the
    interval, which is ``k d / pi`` cycles; the sinc factors add about ``N``
    more.  One panel per cycle keeps 16-node panels well resolved.
    """
    d = geom.r_z - geom.s_z
    return math.ceil(geom.k * d / math.pi) + N + 8


def _basis_sinc(kx: np.ndarray, L: float, N: int) -> np.ndarray:
    shift = np.arange(N) - 0.5 * (N - 1)
    return np.sinc(kx[None, :] * L / (2.0 * math.pi) - shift[:, None])


def _los_rule(geom: SystemGeometry, N: int, panels: int, order: int) -> np.ndarray:
    theta, w = panel_rule(0.0, math.pi, panels, order)
    k = geom.k
    kx = k * np.cos(theta)
    S_r = _basis_sinc(kx, geom.L_r, N)
    S_s = _basis_sinc(kx, geom.L_s, N)
    phase = np.exp(1j * k * (geom.r_z - geom.s_z) * np.sin(theta))
    pref = k * ETA * math.sqrt(geom.L_s * geom.L_r) / (4.0 * math.pi)
    return pref * (S_r * (w * phase)[None, :]) @ S_s.T


def wdm_los(geom: SystemGeometry, cfg: WdmConfig = WdmConfig(), grid: WavenumberGrid | None = None) -> WdmLosMatrix:
    """LoS channel between ``N`` Fourier basis functions on each segment.

    Integrates over propagating plane waves written in angle,
    ``k_x = k cos(theta)``, which cancels the ``1/gamma`` singularity:

        H[n, m] = C int_0^pi sinc(k_x L_r / 2pi - n') sinc(k_x L_s / 2pi - m')
                  e^{j k d sin(theta)} dtheta

    with ``C = k eta sqrt(L_s L_r) / (4 pi)`` and centred indices
    ``n' = n - (N-1)/2``.
    """
    grid = wavenumber_grid(geom) if grid is None else grid
    if cfg.N > min(grid.n_s, grid.n_r):
        raise ConfigError(f"WDM basis size {cfg.N} exceeds min(n_s, n_r) = {min(grid.n_s, grid.n_r)}")
    if cfg.quad is None:
        panels, order, tol = default_panel_budget(geom, cfg.N), 16, 1e-4
    else:
        panels, order, tol = cfg.quad.panel_count, cfg.quad.nodes_per_panel, cfg.quad.abs_tol
    coarse = _los_rule(geom, cfg.N, panels, order)
    fine = _los_rule(geom, cfg.N, 2 * panels, order)
    if not np.all(np.isfinite(fine)):
        raise ArithmeticError("non-finite WDM LoS entry")
    scale = float(np.max(np.abs(fine))) or 1.0
    change = float(np.max(np.abs(fine - coarse))) / scale
    return WdmLosMatrix(fine, 2 * panels, change, change <= tol)


def wdm_nlos(geom: SystemGeometry, grid: WavenumberGrid, stats: SpectralStats, seed) -> np.ndarray:
    """NLoS channel in the wavenumber domain, ``n_r x n_s``.

    ``sqrt(L_r L_s) diag(sqrt(N_r) sigma_r) W diag(sqrt(N_s) sigma_s)``
    with ``W`` drawn exactly as in :func:`hololine.channel.nlos_realization`.
    """
    W = complex_gaussian(_as_rng(seed), (grid.n_r, grid.n_s))
    sig_s = np.sqrt(geom.N_s * stats.sigma2_s)
    sig_r = np.sqrt(geom.N_r * stats.sigma2_r)
    return math.sqrt(grid.L_r * grid.L_s) * (sig_r[:, None] * W * sig_s[None, :])


def wdm_correlations(grid: WavenumberGrid, stats: SpectralStats) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal wavenumber-domain correlations ``diag(L sigma2)`` per side."""
    return np.diag(grid.L_s * stats.sigma2_s), np.diag(grid.L_r * stats.sigma2_r)
