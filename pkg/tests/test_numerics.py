import math

import mpmath as mp
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from hololine import numerics as nm
from hololine.numerics import (
    DomainError,
    QuadratureError,
    QuadratureSpec,
    bessel_i0_complex,
    bessel_i_scaled,
    bessel_j0,
    bessel_y0,
    hankel1_0,
    integrate_panels,
    log_bessel_i0_complex,
)


def series_j0(x):
    # Independent oracle: the defining power series at 50 digits.
    with mp.workdps(50):
        x = mp.mpf(x)
        return float(mp.nsum(lambda m: (-1) ** m * (x / 2) ** (2 * m) / mp.factorial(m) ** 2, [0, mp.inf]))


class TestJ0:
    def test_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_one(self):
        assert abs(bessel_j0(1.0) - 0.7651976866) < 1e-10
        assert abs(bessel_j0(1.0) - series_j0(1.0)) < 1e-15

    def test_first_zero(self):
        # Bisection on the series oracle.
        lo, hi = 2.0, 3.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if series_j0(mid) > 0:
                lo = mid
            else:
                hi = mid
        assert abs(lo - 2.404825558) < 1e-9
        assert abs(bessel_j0(2.404825558)) < 1e-8

    def test_even(self):
        x = np.linspace(0, 40, 101)
        assert np.array_equal(bessel_j0(-x), bessel_j0(x))

    @pytest.mark.parametrize("lo,hi", [(0, 12), (12, 200), (200, 1e5)])
    def test_against_scipy(self, lo, hi):
        x = np.linspace(lo, hi, 20001)
        assert np.max(np.abs(bessel_j0(x) - sp.j0(x))) <= 1e-10

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            bessel_j0(np.nan)
        with pytest.raises(DomainError):
            bessel_j0([1.0, np.inf])


class TestHankel:
    def test_one(self):
        h = hankel1_0(1.0)
        assert abs(h - (0.7651976866 + 0.0882569642j)) < 1e-10

    def test_large_argument_magnitude(self):
        x = 6283.185
        assert abs(abs(hankel1_0(x)) / math.sqrt(2 / (math.pi * x)) - 1) < 1e-6

    def test_zero_and_negative(self):
        for bad in (0.0, -1.0, [1.0, 0.0]):
            with pytest.raises(DomainError):
                hankel1_0(bad)
        with pytest.raises(DomainError):
            bessel_y0(0.0)

    def test_relative_accuracy(self):
        x = np.concatenate([np.geomspace(1e-4, 12, 3000), np.linspace(12, 1e5, 30001)])
        ref = sp.hankel1(0, x)
        assert np.max(np.abs(hankel1_0(x) - ref) / np.abs(ref)) <= 1e-8

    def test_y0_mpmath(self):
        for x in (0.01, 0.5, 3.0, 11.9, 12.1, 50.0, 777.7):
            assert abs(bessel_y0(x) - float(mp.bessely(0, x))) <= 1e-10 * max(1, abs(float(mp.bessely(0, x))))

    def test_branch_continuity(self):
        x = np.linspace(11.0, 13.0, 401)
        j, y = nm._j0_y0_series(x, want_y=True)
        series = j + 1j * y
        asym = nm._h0_asymptotic(x)
        assert np.max(np.abs(series - asym) / np.abs(asym)) < 1e-7

    def test_asymptotic_phase(self):
        x = np.array([1e3, 5e3, 6e4])
        phase = np.angle(hankel1_0(x) * np.exp(-1j * x))
        # First correction shifts the phase by 1/(8x).
        assert np.all(np.abs(phase + math.pi / 4) <= 1.01 / (8 * x))

    @pytest.mark.parametrize("x", [0.5, 1.0, 5.0, 50.0, 500.0])
    def test_wronskian(self, x):
        # Five-point central differences for the derivatives.
        h = 1e-3

        def d(f):
            return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h)

        w = bessel_j0(x) * d(bessel_y0) - d(bessel_j0) * bessel_y0(x)
        assert abs(w / (2 / (math.pi * x)) - 1) < 1e-8


class TestModifiedBessel:
    def test_trivial(self):
        assert bessel_i_scaled(0, 0.0) == 1.0
        assert bessel_i_scaled(1, 0.0) == 0.0

    def test_200(self):
        x = 200.0
        # Leading terms of the asymptotic series as an oracle.
        approx = (1 + 1 / (8 * x) + 9 / (128 * x * x)) / math.sqrt(2 * math.pi * x)
        assert abs(bessel_i_scaled(0, x) / approx - 1) < 1e-6
        ref = float(mp.besseli(0, 200) * mp.exp(-200))
        assert abs(bessel_i_scaled(0, x) / ref - 1) < 1e-12

    @pytest.mark.parametrize("order,ref", [(0, sp.i0e), (1, sp.i1e)])
    def test_against_scipy(self, order, ref):
        x = np.concatenate([np.linspace(1e-6, 40, 4001), np.geomspace(40, 1e6, 2001)])
        assert np.max(np.abs(bessel_i_scaled(order, x) / ref(x) - 1)) <= 1e-9

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i_scaled(0, -1.0)
        with pytest.raises(DomainError):
            bessel_i_scaled(2, 1.0)
        with pytest.raises(DomainError):
            bessel_i_scaled(0, np.nan)


class TestComplexI0:
    def test_trivial(self):
        assert bessel_i0_complex(0) == 1.0

    def test_imaginary_axis(self):
        assert abs(bessel_i0_complex(2j) - 0.2238907791) < 1e-10
        assert abs(bessel_i0_complex(2j) - bessel_j0(2.0)) < 1e-14

    def test_series_oracle(self):
        z = mp.mpc(3, 4)
        with mp.workdps(40):
            ref = mp.fsum((z * z / 4) ** m / mp.factorial(m) ** 2 for m in range(200))
        got = bessel_i0_complex(3 + 4j)
        assert abs(got - complex(ref)) / abs(complex(ref)) < 1e-12

    def test_regimes(self):
        rng = np.random.default_rng(5)
        for lo, hi, tol in ((1e-3, 50.0, 1e-8), (50.0, 1e4, 1e-6)):
            r = rng.uniform(lo, hi, 200)
            ph = rng.uniform(-math.pi, math.pi, 200)
            z = r * np.exp(1j * ph)
            got = log_bessel_i0_complex(z)
            for zi, gi in zip(z, got):
                ref = mp.log(mp.besseli(0, mp.mpc(zi.real, zi.imag)))
                assert abs(complex(mp.exp(gi - complex(ref))) - 1) < tol

    def test_real_matches_scaled(self):
        x = np.linspace(0, 700, 2801)
        full = bessel_i0_complex(x)
        ref = np.exp(x) * bessel_i_scaled(0, x)
        assert np.max(np.abs(full / ref - 1)) < 1e-8

    def test_no_overflow(self):
        v = log_bessel_i0_complex(np.array([1e4, 1e4j, 7e3 + 7e3j]))
        assert np.all(np.isfinite(v))

    def test_even(self):
        z = np.array([3 + 4j, 20 - 7j, 0.5j])
        assert np.allclose(bessel_i0_complex(-z), bessel_i0_complex(z), rtol=1e-13)

    def test_nonfinite(self):
        with pytest.raises(DomainError):
            bessel_i0_complex(complex(np.nan, 0))


class TestQuadrature:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(0)
        with pytest.raises(ValueError):
            QuadratureSpec(4, 1)
        with pytest.raises(ValueError):
            QuadratureSpec(4, 16, -1.0)

    def test_constant(self):
        res = integrate_panels(lambda t: np.ones_like(t), 0.0, 1.0)
        assert abs(res.value - 1.0) < 1e-15 and res.converged

    def test_bessel_identity(self):
        res = integrate_panels(lambda t: np.cos(100 * np.sin(t)), 0.0, math.pi, QuadratureSpec(32))
        assert abs(res.value - math.pi * series_j0(100.0)) < 1e-12
        assert res.converged

    def test_complex_integrand(self):
        res = integrate_panels(lambda t: np.exp(5j * np.sin(t)), 0.0, math.pi)
        assert abs(res.value.real - math.pi * series_j0(5.0)) < 1e-13

    def test_under_resolved_is_flagged(self):
        res = integrate_panels(lambda t: np.cos(2000 * np.sin(t)), 0.0, math.pi, QuadratureSpec(2))
        assert not res.converged
        assert res.error > 1e-3

    def test_batched(self):
        ks = np.array([1.0, 2.0, 3.0])
        res = integrate_panels(lambda t: np.sin(ks[:, None] * t[None, :]), 0.0, math.pi)
        assert np.allclose(res.value, (1 - np.cos(ks * math.pi)) / ks, atol=1e-13)

    def test_nan_names_node(self):
        def f(t):
            out = np.ones_like(t)
            out[t > 0.5] = np.nan
            return out

        with pytest.raises(QuadratureError, match=r"node x=0\.5"):
            integrate_panels(f, 0.0, 1.0)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            integrate_panels(np.cos, 1.0, 1.0)

    @settings(max_examples=50, deadline=None)
    @given(a=st.floats(-5, 5), c=st.floats(-3, 3), split=st.floats(0.05, 0.95))
    def test_linear_and_additive(self, a, c, split):
        b = a + 2.0
        f = lambda t: np.sin(3 * t) + t**2
        g = lambda t: np.exp(-t)
        lin = integrate_panels(lambda t: f(t) + c * g(t), a, b).value
        sep = integrate_panels(f, a, b).value + c * integrate_panels(g, a, b).value
        assert abs(lin - sep) <= 1e-12 * (1 + abs(lin))
        m = a + split * (b - a)
        whole = integrate_panels(f, a, b).value
        parts = integrate_panels(f, a, m).value + integrate_panels(f, m, b).value
        assert abs(whole - parts) <= 1e-12 * (1 + abs(whole))
