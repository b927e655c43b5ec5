"""Special functions and panel quadrature.

Bessel kernels are evaluated with power series below a switch point and with
the Hankel-type asymptotic expansions above it.  All functions accept scalars
or arrays and broadcast like numpy ufuncs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable, NamedTuple

import numpy as np

__all__ = [
    "DomainError",
    "QuadratureError",
    "QuadratureSpec",
    "QuadratureResult",
    "bessel_j0",
    "bessel_y0",
    "hankel1_0",
    "bessel_i_scaled",
    "log_bessel_i0_complex",
    "bessel_i0_complex",
    "panel_rule",
    "integrate_panels",
]

EULER_GAMMA = 0.57721566490153286061

# J0/Y0/H0: series for x <= 12, asymptotic above (24 terms reach the
# smallest term of the divergent series at x = 12, ~6e-12 relative).
HANKEL_SWITCH = 12.0
_HANKEL_TERMS = 24
_SERIES_TERMS = 40

# I0/I1 (real and complex): the asymptotic expansion is used for |z| > 17.5
# where its smallest term is below 1e-16.
I_SWITCH = 17.5
_I_TERMS = 35
_I_SERIES_TERMS = 64


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class QuadratureError(ArithmeticError):
    """Integrand produced a non-finite value."""


def _asymptotic_coefficients(order: int, count: int) -> np.ndarray:
    # a_k(nu) = prod_{i=1..k} (4 nu^2 - (2i-1)^2) / (k! 8^k)
    mu = 4.0 * order * order
    out = np.empty(count)
    for k in range(count):
        num = 1.0
        for i in range(1, k + 1):
            num *= mu - (2 * i - 1) ** 2
        out[k] = num / (factorial(k) * 8.0**k)
    return out


_A0_HANKEL = _asymptotic_coefficients(0, _HANKEL_TERMS)
_A0_I = _asymptotic_coefficients(0, _I_TERMS)
_A1_I = _asymptotic_coefficients(1, _I_TERMS)


def _check_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name}: non-finite argument")


def _j0_y0_series(x: np.ndarray, want_y: bool):
    q = 0.25 * x * x
    term = np.ones_like(x)
    j = np.ones_like(x)
    ysum = np.zeros_like(x)
    harmonic = 0.0
    for m in range(1, _SERIES_TERMS):
        term = term * (-q) / (m * m)
        j = j + term
        if want_y:
            harmonic += 1.0 / m
            ysum = ysum - harmonic * term
    if not want_y:
        return j, None
    with np.errstate(divide="ignore"):
        y = (2.0 / np.pi) * ((np.log(0.5 * x) + EULER_GAMMA) * j + ysum)
    return j, y


def _h0_asymptotic(x: np.ndarray) -> np.ndarray:
    inv = 1.0 / x
    s = np.zeros(x.shape, dtype=complex)
    power = np.ones_like(x)
    jk = 1.0 + 0j
    for a in _A0_HANKEL:
        s = s + jk * a * power
        power = power * inv
        jk *= 1j
    phase = np.exp(1j * x) * np.exp(-0.25j * np.pi)
    return np.sqrt(2.0 / (np.pi * x)) * phase * s


def bessel_j0(x):
    """Bessel function of the first kind, order zero."""
    x = np.abs(np.asarray(x, dtype=float))
    _check_finite(x, "bessel_j0")
    out = np.empty_like(x)
    small = x <= HANKEL_SWITCH
    if np.any(small):
        out[small] = _j0_y0_series(x[small], want_y=False)[0]
    if np.any(~small):
        out[~small] = _h0_asymptotic(x[~small]).real
    return out[()]


def bessel_y0(x):
    """Bessel function of the second kind, order zero, for x > 0."""
    x = np.asarray(x, dtype=float)
    _check_finite(x, "bessel_y0")
    if np.any(x <= 0):
        raise DomainError("bessel_y0: argument must be positive")
    out = np.empty_like(x)
    small = x <= HANKEL_SWITCH
    if np.any(small):
        out[small] = _j0_y0_series(x[small], want_y=True)[1]
    if np.any(~small):
        out[~small] = _h0_asymptotic(x[~small]).imag
    return out[()]


def hankel1_0(x):
    """Hankel function of the first kind, order zero: J0(x) + j Y0(x).

    Parameters
    ----------
    x : float or array_like
        Strictly positive real argument.

    Raises
    ------
    DomainError
        If any argument is non-positive or non-finite.
    """
    x = np.asarray(x, dtype=float)
    _check_finite(x, "hankel1_0")
    if np.any(x <= 0):
        raise DomainError("hankel1_0: argument must be positive (Y0 is singular at 0)")
    out = np.empty(x.shape, dtype=complex)
    small = x <= HANKEL_SWITCH
    if np.any(small):
        j, y = _j0_y0_series(x[small], want_y=True)
        out[small] = j + 1j * y
    if np.any(~small):
        out[~small] = _h0_asymptotic(x[~small])
    return out[()]


def _i_series(x: np.ndarray, order: int) -> np.ndarray:
    q = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    for m in range(1, _I_SERIES_TERMS):
        term = term * q / (m * (m + order))
        total = total + term
    return total


def bessel_i_scaled(order: int, x):
    """Exponentially scaled modified Bessel function ``exp(-x) * I_order(x)``.

    Only orders 0 and 1 are supported.  The scaling keeps the result finite
    for arguments far beyond the overflow point of ``I_order`` itself.
    """
    if order not in (0, 1):
        raise DomainError("bessel_i_scaled: order must be 0 or 1")
    x = np.asarray(x, dtype=float)
    _check_finite(x, "bessel_i_scaled")
    if np.any(x < 0):
        raise DomainError("bessel_i_scaled: argument must be non-negative")
    out = np.empty_like(x)
    small = x <= I_SWITCH
    if np.any(small):
        xs = x[small]
        out[small] = np.exp(-xs) * _i_series(xs, order)
    if np.any(~small):
        xl = x[~small]
        coeffs = _A0_I if order == 0 else _A1_I
        inv = -1.0 / xl
        s = np.zeros_like(xl)
        power = np.ones_like(xl)
        for a in coeffs:
            s = s + a * power
            power = power * inv
        out[~small] = s / np.sqrt(2.0 * np.pi * xl)
    return out[()]


def log_bessel_i0_complex(z):
    """Complex logarithm of ``I0(z)``.

    The real part is ``log|I0(z)|`` and the imaginary part is the phase, so
    ratios of large values can be formed by subtracting logarithms without
    overflow.  ``I0`` is even, so the argument is reflected into the right
    half-plane first.
    """
    z = np.asarray(z, dtype=complex)
    _check_finite(z, "bessel_i0_complex")
    z = np.where(z.real < 0, -z, z)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) <= I_SWITCH
    if np.any(small):
        zs = z[small]
        q = 0.25 * zs * zs
        term = np.ones_like(zs)
        total = term.copy()
        for m in range(1, _I_SERIES_TERMS):
            term = term * q / (m * m)
            total = total + term
        with np.errstate(divide="ignore"):
            out[small] = np.log(total)
    if np.any(~small):
        zl = z[~small]
        inv = 1.0 / zl
        s_growing = np.zeros_like(zl)
        s_decaying = np.zeros_like(zl)
        power = np.ones_like(zl)
        sign = 1.0
        for a in _A0_I:
            s_growing = s_growing + sign * a * power
            s_decaying = s_decaying + a * power
            power = power * inv
            sign = -sign
        # Stokes multiplier: +j above the real axis, -j below.
        stokes = np.where(zl.imag >= 0, 1j, -1j)
        bracket = s_growing + stokes * np.exp(-2.0 * zl) * s_decaying
        out[~small] = zl - 0.5 * np.log(2.0 * np.pi * zl) + np.log(bracket)
    return out[()]


def bessel_i0_complex(z):
    """Modified Bessel function ``I0(z)`` for complex ``z``.

    Overflows for ``Re z`` beyond ~700; use :func:`log_bessel_i0_complex`
    there.
    """
    return np.exp(log_bessel_i0_complex(z))


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre settings.

    Attributes
    ----------
    panel_count : int
        Number of equal-width panels on the interval.
    nodes_per_panel : int
        Gauss-Legendre order inside each panel.
    abs_tol : float
        Largest accepted change when the panel count is doubled.
    """

    panel_count: int = 8
    nodes_per_panel: int = 16
    abs_tol: float = 1e-10

    def __post_init__(self):
        if int(self.panel_count) != self.panel_count or self.panel_count < 1:
            raise ValueError("panel_count must be a positive integer")
        if int(self.nodes_per_panel) != self.nodes_per_panel or self.nodes_per_panel < 2:
            raise ValueError("nodes_per_panel must be an integer >= 2")
        if not self.abs_tol >= 0:
            raise ValueError("abs_tol must be >= 0")

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.panel_count, self.nodes_per_panel, self.abs_tol)


class QuadratureResult(NamedTuple):
    value: complex | np.ndarray
    error: float
    converged: bool
    panel_count: int


@lru_cache(maxsize=32)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(a: float, b: float, panel_count: int, nodes_per_panel: int = 16):
    """Nodes and weights of the composite Gauss-Legendre rule on [a, b]."""
    x, w = _legendre(nodes_per_panel)
    edges = np.linspace(a, b, panel_count + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def _apply_rule(f, a, b, panels, order):
    nodes, weights = panel_rule(a, b, panels, order)
    values = np.asarray(f(nodes))
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        node = float(nodes[idx[-1]])
        raise QuadratureError(
            f"integrand returned {complex(values[tuple(idx)])} at node x={node!r}"
        )
    return values @ weights


def integrate_panels(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadratureSpec = QuadratureSpec(),
) -> QuadratureResult:
    """Composite Gauss-Legendre integral of ``f`` over ``[a, b]``.

    ``f`` is called once per rule with the 1-D array of nodes and must return
    an array whose last axis runs over those nodes; leading axes are kept, so
    a batch of integrands can be evaluated in one call.

    The integral is computed with ``spec.panel_count`` and with twice as many
    panels.  The finer value is returned; ``error`` is the largest absolute
    change between the two and ``converged`` is ``error <= spec.abs_tol``.
    """
    if not a < b:
        raise ValueError("integrate_panels requires a < b")
    coarse = _apply_rule(f, a, b, spec.panel_count, spec.nodes_per_panel)
    fine = _apply_rule(f, a, b, 2 * spec.panel_count, spec.nodes_per_panel)
    error = float(np.max(np.abs(fine - coarse)))
    return QuadratureResult(fine[()], error, error <= spec.abs_tol, 2 * spec.panel_count)
