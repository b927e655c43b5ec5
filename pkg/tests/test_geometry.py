import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hololine.geometry import (
    ConfigError,
    SystemGeometry,
    cell_bounds,
    derive,
    index_set,
    sample_points,
    wavenumber_grid,
)


@pytest.fixture(scope="module")
def ref():
    return SystemGeometry.reference()


def test_derive(ref):
    k, Ns, Nr = derive(ref)
    assert abs(k - 628.3185307) < 1e-7
    assert Ns == Nr == 256
    assert ref.with_spacing(0.0025).N_s == 512


def test_defaults(ref):
    assert ref.s_z == 0.0 and ref.r_z == ref.d == 10.0


@pytest.mark.parametrize("field", ["L_s", "L_r", "d", "wavelength", "delta_s", "delta_r"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_invalid_values(ref, field, bad):
    kw = dict(L_s=1.28, L_r=1.28, d=10.0, wavelength=0.01, delta_s=0.005, delta_r=0.005)
    kw[field] = bad
    with pytest.raises(ConfigError):
        SystemGeometry(**kw)


def test_spacing_larger_than_segment():
    with pytest.raises(ConfigError):
        SystemGeometry(1.0, 1.0, 10.0, 0.01, 2.0, 0.5)


def test_inconsistent_planes():
    with pytest.raises(ConfigError):
        SystemGeometry(1.0, 1.0, 10.0, 0.01, 0.5, 0.5, s_z=1.0, r_z=5.0)


def test_sample_points_two():
    g = SystemGeometry(1.0, 1.0, 10.0, 0.01, 0.5, 0.5)
    xs, _ = sample_points(g)
    assert np.allclose(xs, [-0.25, 0.25])


def test_sample_points_reference(ref):
    xs, xr = sample_points(ref)
    assert len(xs) == 256
    assert math.isclose(xs.min(), -0.6375) and math.isclose(xs.max(), 0.6375)
    assert np.allclose(np.diff(xs), 0.005, rtol=0, atol=1e-15)
    assert np.array_equal(xs, xr)
    # Aligned elements sit exactly d apart.
    assert np.hypot(ref.d, xr[100] - xs[100]) == ref.d


def test_grid_reference(ref):
    grid = wavenumber_grid(ref)
    assert grid.n_s == grid.n_r == 256
    assert grid.E_r[0] == -128 and grid.E_r[-1] == 127
    zero = np.flatnonzero(grid.E_s == 0)[0]
    assert grid.gamma_s[zero] == ref.k
    assert grid.gamma_s[0] == 0.0
    assert np.all((grid.gamma_s >= 0) & (grid.gamma_s <= ref.k))
    kx = 2 * math.pi * grid.E_s / ref.L_s
    assert np.all(np.abs(kx) <= ref.k * (1 + 1e-12))


def test_grid_symmetry(ref):
    grid = wavenumber_grid(ref)
    # Reflection q -> -q maps gamma onto itself apart from the lower edge index.
    inner = grid.gamma_s[1:]
    assert np.allclose(inner, inner[::-1], rtol=0, atol=1e-9)


@pytest.mark.parametrize("frac", [0.5, 0.25, 0.125])
def test_index_count_independent_of_spacing(frac):
    g = SystemGeometry.reference(frac)
    assert wavenumber_grid(g).n_s == 256


@settings(max_examples=100, deadline=None)
@given(L_over_lambda=st.floats(0.5, 300.0))
def test_index_set_count(L_over_lambda):
    lam = 0.01
    E = index_set(L_over_lambda * lam, lam)
    assert len(E) == math.floor(2 * L_over_lambda + 1e-9)
    assert np.all(np.abs(E) <= L_over_lambda + 1e-9)
    assert np.all(np.diff(E) == 1)


@settings(max_examples=100, deadline=None)
@given(L_over_lambda=st.floats(0.5, 300.0))
def test_cells_tile_half_plane(L_over_lambda):
    lam = 0.01
    L = L_over_lambda * lam
    E = index_set(L, lam)
    lo, hi = cell_bounds(E, L, lam)
    order = np.argsort(lo)
    assert lo[order][0] == 0.0
    assert hi[order][-1] == math.pi
    assert np.allclose(hi[order][:-1], lo[order][1:], rtol=0, atol=1e-12)
    assert math.isclose(np.sum(hi - lo), math.pi, rel_tol=1e-12)


def test_too_short_segment():
    with pytest.raises(ConfigError):
        index_set(0.004, 0.01)
