from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwbridge.covariance import (
    CovCurve,
    adjacent_increment_moments,
    covariance_curve,
    covariance_matrix,
    covariance_variation,
    grid_covariance,
    increment_second_moment,
    shift_orbit,
    ww_covariance,
)
from wwbridge.experiments import tvdw
from wwbridge.fractal import BaseFunction, DeterministicFractal, convolve_paths, eval_deterministic
from wwbridge.gaussian import KappaSpec, SamplerConfig, bridge_covariance, sample_bridge
from wwbridge.grid import BadicGrid, WWParams

STD = KappaSpec.standard()
P_HALF = WWParams(0.5, 2, 0.5)


def test_ww_covariance_examples():
    for params in (P_HALF, WWParams(0.3, 3, 0.7)):
        assert ww_covariance(params, STD, 0, Fraction(3, 8)) == 0.0
    assert ww_covariance(P_HALF, STD, Fraction(1, 2), Fraction(1, 2)) == 0.25
    assert ww_covariance(P_HALF, STD, Fraction(1, 2), Fraction(1, 4)) == 0.25
    assert 2 * ww_covariance(P_HALF, STD, Fraction(1, 2), Fraction(1, 4)) == eval_deterministic(
        DeterministicFractal(BaseFunction.tent(), 0.5, 2), Fraction(1, 4)
    )


def test_shift_orbit_weights():
    pts, w = shift_orbit(Fraction(3, 8), 2, 0.5)
    assert pts.tolist() == [0.375, 0.75, 0.5] and w.tolist() == [1.0, 0.5, 0.25]
    # 1/2 is a fixed point of x -> {3x}
    pts, w = shift_orbit(Fraction(1, 2), 3, 0.4)
    assert pts.tolist() == [0.5] and w[0] == pytest.approx(1 / 0.6)
    # 1/3 under doubling: 1/3 -> 2/3 -> 1/3
    pts, w = shift_orbit(Fraction(1, 3), 2, 0.5)
    assert w == pytest.approx([1 / 0.75, 0.5 / 0.75])


def test_rational_covariance_matches_long_truncation():
    params = WWParams(0.6, 2, 0.35)
    s, t = Fraction(1, 3), Fraction(2, 7)
    exact = ww_covariance(params, STD, s, t)
    xs = [s * 2**m % 1 for m in range(200)]
    xt = [t * 2**n % 1 for n in range(200)]
    a = params.alpha ** np.arange(200)
    beta = bridge_covariance(0.35, STD, np.array(xs, float)[:, None], np.array(xt, float)[None, :])
    assert exact == pytest.approx(a @ beta @ a, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    b=st.integers(2, 4),
    ks=st.tuples(st.integers(0, 81), st.integers(0, 81)),
    H=st.sampled_from([0.25, 0.5, 0.8]),
)
def test_symmetry_bitwise(b, ks, H):
    grid = BadicGrid(b, 4 if b < 4 else 3)
    i, j = (k % grid.point_count for k in ks)
    params = WWParams(0.55, b, H)
    s, t = grid.point(i), grid.point(j)
    assert ww_covariance(params, STD, s, t) == ww_covariance(params, STD, t, s)
    a = grid_covariance(params, STD, grid, [i], [j])[0]
    assert a == grid_covariance(params, STD, grid, [j], [i])[0]
    assert a == pytest.approx(ww_covariance(params, STD, s, t), rel=1e-12, abs=1e-15)


def test_curve_cauchy_schwarz_and_endpoints():
    params = WWParams(2**-0.8, 2, 0.5)
    grid = BadicGrid(2, 8)
    s = Fraction(3, 16)
    curve = covariance_curve(params, STD, s, grid)
    assert curve.values[0] == 0 and curve.values[-1] == 0
    var = grid_covariance(params, STD, grid, np.arange(grid.point_count), np.arange(grid.point_count))
    css = ww_covariance(params, STD, s, s)
    assert np.all(np.abs(curve.values) <= np.sqrt(css * var) + 1e-14)
    ref = grid_covariance(params, STD, grid, np.full(grid.point_count, grid.index_of(s)), np.arange(grid.point_count))
    assert np.allclose(curve.values, ref, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("H,kappa", [(0.5, STD), (0.3, STD), (0.7, KappaSpec.linear())])
def test_covariance_matrix_psd(H, kappa):
    grid = BadicGrid(2, 5)
    C = covariance_matrix(WWParams(0.6, 2, H), kappa, grid)
    assert np.array_equal(C, C.T)
    np.linalg.cholesky(C[1:-1, 1:-1] + 1e-10 * np.eye(grid.point_count - 2))


def test_mc_consistency_depth6():
    params = WWParams(0.6, 2, 0.4)
    grid = BadicGrid(2, 6)
    cfg = SamplerConfig(seed=77)
    B = np.array([sample_bridge(0.4, grid, cfg.replicate(r)).values for r in range(5000)])
    X = convolve_paths(B, params.alpha, grid)
    n = X.shape[0]
    C = X.T @ X / n
    se = np.sqrt(np.maximum((X**2).T @ (X**2) / n - C**2, 0) / n)
    exact = covariance_matrix(params, STD, grid)
    assert np.all(np.abs(C - exact) <= 5 * se + 1e-14)


@pytest.mark.parametrize("b,alpha,N", [(2, 0.5, 12), (2, 0.8, 10), (4, 0.4, 6), (6, 0.3, 4)])
def test_tvdw_identity_even_base(b, alpha, N):
    grid = BadicGrid(b, N)
    curve = covariance_curve(WWParams(alpha, b, 0.5), STD, Fraction(1, 2), grid)
    assert np.max(np.abs(2 * curve.values - tvdw(alpha, b, grid))) <= 1e-10


def test_tvdw_negative_control_odd_base():
    grid = BadicGrid(3, 7)
    alpha = 0.5
    curve = covariance_curve(WWParams(alpha, 3, 0.5), STD, Fraction(1, 2), grid)
    T = tvdw(alpha, 3, grid)
    assert np.max(np.abs(2 * curve.values - T)) > 1e-3
    # the orbit of 1/2 is fixed, so the covariance is the same function scaled by 1/(1 - alpha)
    assert np.allclose(2 * curve.values, T / (1 - alpha), rtol=0, atol=1e-12)


def test_covariance_variation_examples():
    params = WWParams(2**-0.5, 2, 0.75)
    grid = BadicGrid(2, 12)
    curve = covariance_curve(params, STD, Fraction(1, 2), grid)
    vc = covariance_variation(curve)
    top = vc.values[-3:]
    assert top.min() > 0 and top.max() / top.min() < 1.1
    half = covariance_variation(curve, t_cap=0.5)
    assert abs(half.final / vc.final - 0.5) <= 0.05
    smooth = CovCurve(params, STD, Fraction(1, 2), grid, grid.times() * (1 - grid.times()))
    sv = covariance_variation(smooth).values
    assert sv[-1] < 1e-3 and np.all(np.diff(sv) < 0)
    with pytest.raises(ValueError):
        covariance_variation(covariance_curve(params, STD, Fraction(1, 2), BadicGrid(2, 7)))


def test_increment_second_moment_examples():
    assert increment_second_moment(P_HALF, STD, Fraction(1, 4), Fraction(1, 4)) == 0.0
    assert increment_second_moment(P_HALF, STD, 0, Fraction(1, 2)) == 0.25
    params = WWParams(2**-0.8, 2, 0.5)
    grid = BadicGrid(2, 6)
    adj = adjacent_increment_moments(params, STD, grid)
    for k in (0, 5, 31, 63):
        assert adj[k] == pytest.approx(
            increment_second_moment(params, STD, grid.point(k), grid.point(k + 1)), rel=1e-12, abs=1e-16
        )


def test_quasi_helix_bracket_is_positive():
    params = WWParams(2**-0.8, 2, 0.5)
    for N in (6, 9, 12):
        grid = BadicGrid(2, N)
        ratio = adjacent_increment_moments(params, STD, grid) * grid.size
        assert ratio.min() > 1.0 and ratio.max() < 12.0


def test_grid_base_must_match():
    with pytest.raises(ValueError):
        covariance_curve(P_HALF, STD, Fraction(1, 2), BadicGrid(3, 3))
    with pytest.raises(ValueError):
        grid_covariance(P_HALF, STD, BadicGrid(3, 3), [1], [2])
