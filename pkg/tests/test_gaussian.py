from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from wwbridge.gaussian import (
    CHOLESKY_MAX_CELLS,
    KappaSpec,
    Method,
    SamplerConfig,
    _circulant_sqrt_eigs,
    bridge_covariance,
    fbm_covariance,
    fgn_autocovariance,
    kappa_eval,
    kappa_on_grid,
    sample_bridge,
    sample_fbm,
    sample_martingale,
    to_bridge,
)
from wwbridge.grid import BadicGrid, GridPath


def empirical_cov(X):
    """Zero-mean covariance estimate and its entrywise standard error."""
    n = X.shape[0]
    C = X.T @ X / n
    M2 = (X**2).T @ (X**2) / n
    return C, np.sqrt(np.maximum(M2 - C**2, 0) / n)


@pytest.mark.parametrize("H,lag,expected", [(0.5, 0, 1.0), (0.5, 3, 0.0), (0.7, 1, 0.5 * (2**1.4 - 2))])
def test_fgn_examples(H, lag, expected):
    assert fgn_autocovariance(H, lag) == pytest.approx(expected, abs=1e-15)


def test_fgn_value_at_07():
    assert fgn_autocovariance(0.7, 1) == pytest.approx(0.31951, abs=5e-6)


@pytest.mark.parametrize("H", [0.1, 0.3, 0.45, 0.55, 0.7, 0.9])
def test_fgn_sign_pattern(H):
    g = fgn_autocovariance(H, np.arange(1, 10_001))
    assert np.all(g <= 0) if H < 0.5 else np.all(g >= 0)


def test_kappa_examples():
    s = KappaSpec.standard()
    assert kappa_eval(s, 0.5, 0.3) == 0.3
    for H in (0.1, 0.5, 0.9):
        assert kappa_eval(s, H, 1.0) == 1.0
        assert kappa_eval(s, H, 0.0) == 0.0
    assert kappa_eval(s, 0.7, 0.5) == 0.5


def test_kappa_table_and_density():
    grid = BadicGrid(2, 2)
    table = KappaSpec.from_table(grid, [0, 0.1, 0.5, 0.9, 1], holder=1.0)
    assert kappa_eval(table, 0.5, 0.25) == 0.1
    with pytest.raises(ValueError):
        kappa_eval(table, 0.5, 0.3)
    with pytest.raises(ValueError):
        KappaSpec.from_table(grid, [0, 0.1, 0.5, 0.9, 0.99], holder=1.0)
    with pytest.warns(UserWarning):
        KappaSpec.from_table(grid, [0, 0.1, 0.5, 0.9, 1])
    dens = KappaSpec.from_density(BadicGrid(2, 1), [2.0, 0.0])
    assert kappa_eval(dens, 0.5, 0.25) == 0.5
    assert kappa_eval(dens, 0.5, 0.75) == 1.0
    with pytest.raises(ValueError):
        KappaSpec.from_density(BadicGrid(2, 1), [0.0, 0.0])
    with pytest.raises(ValueError):
        KappaSpec.from_density(BadicGrid(2, 1), [1.0, -1.0])


def test_density_csv(tmp_path):
    src = tmp_path / "phi.csv"
    src.write_text("t,phi\n0,1\n0.25,3\n0.5,0\n0.75,0\n")
    spec = KappaSpec.density_from_csv(src, 2)
    assert kappa_eval(spec, 0.5, 0.5) == 1.0
    assert kappa_eval(spec, 0.5, 0.25) == 0.25


def test_to_bridge_examples():
    grid = BadicGrid(2, 4)
    zero = GridPath(grid, np.zeros(grid.point_count))
    assert np.all(to_bridge(zero, KappaSpec.standard(), 0.7).values == 0)
    for H in (0.3, 0.7):
        W = GridPath(grid, 2.5 * kappa_on_grid(KappaSpec.standard(), H, grid))
        assert np.max(np.abs(to_bridge(W, KappaSpec.standard(), H).values)) < 1e-15


def test_bridge_covariance_examples():
    s = KappaSpec.standard()
    assert bridge_covariance(0.5, s, 0.5, 0.5) == 0.25
    for H in (0.2, 0.5, 0.8):
        assert bridge_covariance(H, s, 0.0, 0.7) == 0.0
        assert bridge_covariance(H, s, 1.0, 0.7) == 0.0


def test_standard_kappa_formulas_agree():
    t = np.linspace(0, 1, 33)
    S, T = np.meshgrid(t, t, indexing="ij")
    for H in (0.1, 0.3, 0.5, 0.7, 0.9):
        ks = kappa_eval(KappaSpec.standard(), H, S)
        kt = kappa_eval(KappaSpec.standard(), H, T)
        general = fbm_covariance(H, S, T) - ks * fbm_covariance(H, T, 1.0) - kt * fbm_covariance(H, S, 1.0) + ks * kt
        general[(S == 0) | (S == 1) | (T == 0) | (T == 1)] = 0
        assert np.max(np.abs(general - bridge_covariance(H, KappaSpec.standard(), S, T))) <= 1e-12


def test_bridge_covariance_symmetric_bitwise():
    rng = np.random.default_rng(3)
    s, t = rng.random(500), rng.random(500)
    dens = KappaSpec.from_density(BadicGrid(2, 2), [1, 3, 0, 2])
    for spec in (KappaSpec.standard(), KappaSpec.linear(), dens):
        for H in (0.3, 0.7):
            assert np.array_equal(bridge_covariance(H, spec, s, t), bridge_covariance(H, spec, t, s))


@pytest.mark.parametrize("H", [0.2, 0.5, 0.8])
@pytest.mark.parametrize("N", [4, 8])
def test_bridge_covariance_psd(H, N):
    t = BadicGrid(2, N).times()[1:-1]
    C = bridge_covariance(H, KappaSpec.standard(), t[:, None], t[None, :])
    np.linalg.cholesky(C + 1e-10 * np.eye(t.size))


def test_sample_fbm_depth_zero():
    grid = BadicGrid(2, 0)
    draws = np.array([sample_fbm(0.3, grid, SamplerConfig(seed=5, replicate_id=r)).values for r in range(4000)])
    assert np.all(draws[:, 0] == 0)
    assert abs(draws[:, 1].var() - 1) < 0.1


def test_cholesky_cost_guard():
    with pytest.raises(ValueError):
        sample_fbm(0.5, BadicGrid(2, 13), SamplerConfig(Method.CHOLESKY))
    assert BadicGrid(2, 12).size == CHOLESKY_MAX_CELLS
    sample_fbm(0.5, BadicGrid(2, 12), SamplerConfig(Method.CHOLESKY))


def test_circulant_eigenvalues_nonnegative():
    for H in (0.05, 0.3, 0.5, 0.7, 0.95):
        for n in (1, 2, 64, 4096):
            assert np.all(_circulant_sqrt_eigs(H, n) >= 0)


def test_fbm_mc_covariance_h_half():
    grid = BadicGrid(2, 10)
    X = np.array([sample_fbm(0.5, grid, SamplerConfig(seed=11, replicate_id=r)).values for r in range(2000)])
    idx = np.arange(0, grid.point_count, 64)
    C, se = empirical_cov(X[:, idx])
    t = grid.times()[idx]
    assert np.all(np.abs(C - np.minimum.outer(t, t)) <= 5 * se + 1e-15)


def test_linear_bridge_mc_covariance():
    grid = BadicGrid(2, 10)
    cfg = SamplerConfig(seed=12)
    X = np.array([sample_bridge(0.5, grid, cfg.replicate(r), KappaSpec.linear()).values for r in range(2000)])
    idx = np.arange(0, grid.point_count, 64)
    C, se = empirical_cov(X[:, idx])
    t = grid.times()[idx]
    assert np.all(np.abs(C - (np.minimum.outer(t, t) - np.outer(t, t))) <= 5 * se + 1e-15)


def test_bridge_covariance_mc_h07():
    grid = BadicGrid(2, 2)
    cfg = SamplerConfig(seed=13)
    X = np.array([sample_bridge(0.7, grid, cfg.replicate(r)).values for r in range(20_000)])
    C, se = empirical_cov(X[:, [1, 3]])
    exact = bridge_covariance(0.7, KappaSpec.standard(), 0.25, 0.75)
    assert abs(C[0, 1] - exact) <= 5 * se[0, 1]


def test_sampler_thread_independence():
    grid = BadicGrid(2, 9)
    cfg = SamplerConfig(seed=99)
    serial = [sample_bridge(0.3, grid, cfg.replicate(r)).values for r in range(64)]
    with ThreadPoolExecutor(8) as pool:
        parallel = list(pool.map(lambda r: sample_bridge(0.3, grid, cfg.replicate(r)).values, reversed(range(64))))
    for a, b in zip(serial, reversed(parallel)):
        assert np.array_equal(a, b)


def test_replicates_differ_and_seed_matters():
    grid = BadicGrid(2, 6)
    a = sample_fbm(0.5, grid, SamplerConfig(seed=1, replicate_id=0)).values
    b = sample_fbm(0.5, grid, SamplerConfig(seed=1, replicate_id=1)).values
    c = sample_fbm(0.5, grid, SamplerConfig(seed=2, replicate_id=0)).values
    assert not np.array_equal(a, b) and not np.array_equal(a, c)


def test_martingale_increment_variances():
    grid = BadicGrid(2, 3)
    spec = KappaSpec.from_density(BadicGrid(2, 1), [2.0, 0.0])
    cfg = SamplerConfig(seed=4)
    M = np.array([sample_martingale(grid, spec, cfg.replicate(r)).values for r in range(4000)])
    inc = np.diff(M, axis=1)
    assert np.all(inc[:, 4:] == 0)
    assert np.allclose(inc[:, :4].var(axis=0), 0.25, rtol=0.1)
    with pytest.raises(ValueError):
        sample_martingale(grid, KappaSpec.standard(), cfg)
