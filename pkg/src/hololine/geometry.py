"""Array geometry, sampling grids and the wavenumber index sets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ConfigError",
    "SystemGeometry",
    "WavenumberGrid",
    "derive",
    "sample_points",
    "index_set",
    "wavenumber_grid",
    "cell_bounds",
]


class ConfigError(ValueError):
    """Invalid geometry or experiment configuration."""


def _snap(x: float) -> float:
    # Remove float noise such as 1.28 / 0.01 = 128.00000000000003.
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else x


@dataclass(frozen=True)
class SystemGeometry:
    """Two parallel line segments facing each other along z.

    Parameters
    ----------
    L_s, L_r : float
        Source and receive segment lengths (m).
    d : float
        Separation along z (m).
    wavelength : float
        Carrier wavelength (m).
    delta_s, delta_r : float
        Element spacings; ``L / delta`` is rounded to the element count.
    s_z, r_z : float
        z-positions of the two segments.  ``r_z`` defaults to ``s_z + d``.
    """

    L_s: float
    L_r: float
    d: float
    wavelength: float
    delta_s: float
    delta_r: float
    s_z: float = 0.0
    r_z: float | None = field(default=None)

    def __post_init__(self):
        for name in ("L_s", "L_r", "d", "wavelength", "delta_s", "delta_r"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
        if self.delta_s > self.L_s or self.delta_r > self.L_r:
            raise ConfigError("element spacing larger than the segment")
        if self.r_z is None:
            object.__setattr__(self, "r_z", self.s_z + self.d)
        elif not math.isclose(self.r_z - self.s_z, self.d, rel_tol=1e-12, abs_tol=1e-12):
            raise ConfigError("r_z - s_z must equal d")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def N_s(self) -> int:
        return max(1, round(self.L_s / self.delta_s))

    @property
    def N_r(self) -> int:
        return max(1, round(self.L_r / self.delta_r))

    @classmethod
    def reference(cls, spacing: float = 0.5) -> "SystemGeometry":
        """Symmetric 128-wavelength segments 10 m apart at 1 cm wavelength.

        ``spacing`` is the element spacing in wavelengths.
        """
        lam = 0.01
        L = 128 * lam
        return cls(L, L, 10.0, lam, spacing * lam, spacing * lam)

    def with_spacing(self, delta_s: float, delta_r: float | None = None) -> "SystemGeometry":
        return SystemGeometry(
            self.L_s, self.L_r, self.d, self.wavelength, delta_s,
            delta_s if delta_r is None else delta_r, self.s_z, self.r_z,
        )


def derive(geom: SystemGeometry) -> tuple[float, int, int]:
    """Return ``(k, N_s, N_r)``."""
    return geom.k, geom.N_s, geom.N_r


def sample_points(geom: SystemGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Element x-coordinates, centred on each segment."""
    xs = (np.arange(geom.N_s) - 0.5 * (geom.N_s - 1)) * geom.delta_s
    xr = (np.arange(geom.N_r) - 0.5 * (geom.N_r - 1)) * geom.delta_r
    return xs, xr


def index_set(L: float, wavelength: float) -> np.ndarray:
    """Integer wavenumber indices of the propagating band for a segment.

    The set is ``{q : -L/lambda <= q <= L/lambda}`` trimmed from the top so
    that it has ``floor(2L/lambda)`` members.
    """
    half = _snap(L / wavelength)
    count = math.floor(_snap(2.0 * L / wavelength))
    if count < 1:
        raise ConfigError("segment shorter than half a wavelength: no propagating index")
    lo = math.ceil(-half)
    return np.arange(lo, lo + count)


def cell_bounds(indices: np.ndarray, L: float, wavelength: float) -> tuple[np.ndarray, np.ndarray]:
    """Angular cell ``[theta_lo, theta_hi]`` of each wavenumber index.

    Cell ``q`` maps ``cos(theta)`` onto ``[lambda q / L, lambda (q+1) / L]``.
    The outermost cells are stretched to ``cos = +-1`` so the cells always
    tile ``[0, pi]``; when ``L/lambda`` is an integer this changes nothing.
    """
    indices = np.asarray(indices)
    c_lo = wavelength * indices / L
    c_hi = wavelength * (indices + 1) / L
    order = np.argsort(indices)
    c_lo[order[0]] = -1.0
    c_hi[order[-1]] = 1.0
    c_lo = np.clip(c_lo, -1.0, 1.0)
    c_hi = np.clip(c_hi, -1.0, 1.0)
    return np.arccos(c_hi), np.arccos(c_lo)


@dataclass(frozen=True, eq=False)
class WavenumberGrid:
    """Index sets and z-wavenumbers of both segments."""

    E_s: np.ndarray
    E_r: np.ndarray
    gamma_s: np.ndarray
    gamma_r: np.ndarray
    L_s: float
    L_r: float
    wavelength: float

    @property
    def n_s(self) -> int:
        return len(self.E_s)

    @property
    def n_r(self) -> int:
        return len(self.E_r)


def _gamma(indices, L, k):
    kx = 2.0 * np.pi * indices / L
    return np.sqrt(np.maximum(k * k - kx * kx, 0.0))


def wavenumber_grid(geom: SystemGeometry) -> WavenumberGrid:
    E_s = index_set(geom.L_s, geom.wavelength)
    E_r = index_set(geom.L_r, geom.wavelength)
    return WavenumberGrid(
        E_s, E_r, _gamma(E_s, geom.L_s, geom.k), _gamma(E_r, geom.L_r, geom.k),
        geom.L_s, geom.L_r, geom.wavelength,
    )
