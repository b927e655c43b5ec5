"""Vector, scalar and paraxial free-space Green's functions along a line."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .numerics import DomainError

__all__ = ["GreensTriple", "greens_amplitudes", "amplitude_db", "paraxial_phase_error"]


class GreensTriple(NamedTuple):
    g_vec: complex | np.ndarray
    g_sca: complex | np.ndarray
    g_par: complex | np.ndarray


def greens_amplitudes(s_x, d: float, k: float) -> GreensTriple:
    """Green's functions at lateral offset ``s_x`` and normal distance ``d``.

    vector:    d^2 e^{jk rho} / (4 pi rho^3)
    scalar:    e^{jk rho} / (4 pi rho)
    paraxial:  e^{jk (d + s_x^2 / 2d)} / (4 pi d)

    with ``rho = sqrt(s_x^2 + d^2)``.
    """
    if not d > 0:
        raise DomainError("normal distance must be positive")
    s = np.asarray(s_x, dtype=float)
    rho = np.hypot(s, d)
    g_vec = d * d * np.exp(1j * k * rho) / (4.0 * math.pi * rho**3)
    g_sca = np.exp(1j * k * rho) / (4.0 * math.pi * rho)
    g_par = np.exp(1j * k * (d + s * s / (2.0 * d))) / (4.0 * math.pi * d)
    return GreensTriple(g_vec[()], g_sca[()], g_par[()])


def amplitude_db(g) -> np.ndarray:
    """``10 log10 |g|``."""
    return 10.0 * np.log10(np.abs(g))


def paraxial_phase_error(s_x, d: float, k: float):
    """Phase gap ``k (rho - d - s_x^2/2d)`` between exact and paraxial forms.

    Written as ``-k s^4 / (2d (rho + d)^2)`` which avoids cancellation.
    """
    s = np.asarray(s_x, dtype=float)
    rho = np.hypot(s, d)
    return (-k * s**4 / (2.0 * d * (rho + d) ** 2))[()]
