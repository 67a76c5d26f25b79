from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pfvism.grid import Grid
from pfvism.spectral import (
    SpectralWorkspace, axis_wavenumbers, laplacian_spectrum, linear_spectrum, rfft_weights,
)


def test_grid_requires_even_sizes():
    with pytest.raises(ValueError):
        Grid((1.0, 1.0, 1.0), (8, 9, 8))


def test_laplacian_spectrum_entries():
    g = Grid.cube(18.0, 16)
    lam = laplacian_spectrum(g)
    assert lam[0, 0, 0] == 0.0
    assert lam[1, 0, 0] == pytest.approx(-(np.pi / 18) ** 2, rel=1e-14)
    assert lam[1, 0, 0] == pytest.approx(-0.030462, abs=5e-7)
    assert lam[15, 0, 0] == lam[1, 0, 0]
    assert np.all(lam[lam != 0] < 0) and np.count_nonzero(lam == 0) == 1


def test_axis_wavenumbers_mirror():
    k = axis_wavenumbers(3.0, 10)
    for i in range(1, 10):
        assert k[i] == k[10 - i] or i == 5


def test_linear_spectrum(p):
    g = Grid.cube(18.0, 16)
    l = linear_spectrum(g, p, 0.5, 18.0, 4.0, 0.0)
    assert l[0, 0, 0] == pytest.approx(-0.175 * 36, rel=1e-14)
    assert np.all(l < 0)
    l2 = linear_spectrum(g, p, 0.5, 18.0, 4.0, 1.5)
    assert np.all(l2 < l)
    with pytest.raises(ValueError):
        linear_spectrum(g, p, 0.0, 18.0, 4.0, 0.0)
    with pytest.raises(ValueError):
        linear_spectrum(g, SimpleNamespace(gamma0=0.0), 0.5, 18.0, 4.0, 0.0)


def test_rfft_weights():
    assert list(rfft_weights(8, 5)) == [1, 2, 2, 2, 1]


def test_constant_field_single_mode(small_grid):
    ws = SpectralWorkspace(small_grid)
    c = ws.forward(np.full(small_grid.shape, 2.5))
    assert c[0, 0, 0] == pytest.approx(2.5 * small_grid.size)
    c[0, 0, 0] = 0
    assert np.max(np.abs(c)) < 1e-9


def test_round_trip_and_linearity(small_grid, rng):
    ws = SpectralWorkspace(small_grid)
    a = rng.normal(size=small_grid.shape)
    b = rng.normal(size=small_grid.shape)
    assert np.max(np.abs(ws.inverse(ws.forward(a)) - a)) < 1e-12 * np.max(np.abs(a))
    lin = ws.forward(2.0 * a - 3.0 * b) - (2.0 * ws.forward(a) - 3.0 * ws.forward(b))
    assert np.max(np.abs(lin)) < 1e-10


def test_size_mismatch(small_grid):
    ws = SpectralWorkspace(small_grid)
    with pytest.raises(ValueError):
        ws.forward(np.zeros((4, 4, 4)))
    with pytest.raises(ValueError):
        ws.inverse(np.zeros((4, 4, 3), complex))


def test_spectral_laplacian_of_sine():
    g = Grid((18.0, 7.0, 5.0), (32, 8, 8))
    ws = SpectralWorkspace(g)
    X, Y, Z = g.mesh()
    f = np.sin(np.pi * X / 18.0)
    assert np.max(np.abs(ws.laplacian(f) + (np.pi / 18.0) ** 2 * f)) < 1e-13


def test_parseval(small_grid, rng):
    ws = SpectralWorkspace(small_grid)
    a = rng.normal(size=small_grid.shape)
    direct = small_grid.cell_volume * np.sum(a * a)
    assert ws.norm2(ws.forward(a)) == pytest.approx(direct, rel=1e-10)


def test_gradient_integral_matches_product_rule(small_grid, rng):
    from conftest import smooth_random_field

    ws = SpectralWorkspace(small_grid)
    f = smooth_random_field(small_grid, rng)
    # int |grad f|^2 = -int f Lap f on a periodic domain
    expect = -small_grid.cell_volume * np.sum(f * ws.laplacian(f))
    assert ws.gradient_sq_integral(ws.forward(f)) == pytest.approx(expect, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.sampled_from([8, 10, 16]))
def test_round_trip_property(seed, n):
    g = Grid((3.0, 4.0, 5.0), (n, n + 2, n))
    ws = SpectralWorkspace(g)
    a = np.random.default_rng(seed).normal(size=g.shape)
    assert np.max(np.abs(ws.inverse(ws.forward(a)) - a)) < 1e-12 * max(1.0, np.max(np.abs(a)))
    # Laplacian output is real by construction of the Hermitian transform
    assert np.isrealobj(ws.laplacian(a))
