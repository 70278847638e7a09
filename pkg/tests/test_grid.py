from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wwbridge.grid import (
    BadicGrid,
    GridPath,
    Regime,
    WWParams,
    badic_depth,
    dyadic_refine,
    frac_index,
    frac_indices,
    read_binary,
    read_csv,
    read_matrix_binary,
    shift_indices,
    write_matrix_binary,
)


@pytest.mark.parametrize(
    "k,n,b,N,expected",
    [(3, 1, 2, 3, 6), (3, 3, 2, 3, 0), (5, 2, 3, 2, 0)],
)
def test_frac_index_examples(k, n, b, N, expected):
    assert frac_index(k, n, BadicGrid(b, N)) == expected


def test_frac_index_level_zero_is_identity():
    grid = BadicGrid(3, 5)
    assert all(frac_index(k, 0, grid) == k for k in range(grid.size))


def test_frac_index_against_bigint_oracle():
    rng = np.random.default_rng(7)
    grids = [BadicGrid(2, 60), BadicGrid(3, 38), BadicGrid(5, 26), BadicGrid(10, 17)]
    for _ in range(10_000):
        grid = grids[rng.integers(len(grids))]
        k = int(rng.integers(0, grid.size + 1))
        n = int(rng.integers(0, 3 * grid.depth))
        t = Fraction(k, grid.size) * grid.base**n
        oracle = (t - math.floor(t)) * grid.size
        assert oracle.denominator == 1
        assert frac_index(k, n, grid) == oracle.numerator


@settings(max_examples=300, deadline=None)
@given(
    b=st.integers(2, 7),
    N=st.integers(0, 12),
    data=st.data(),
)
def test_frac_index_semigroup(b, N, data):
    grid = BadicGrid(b, N)
    k = data.draw(st.integers(0, grid.size))
    m = data.draw(st.integers(0, 20))
    n = data.draw(st.integers(0, 20))
    assert frac_index(frac_index(k, m, grid), n, grid) == frac_index(k, m + n, grid)


def test_vectorised_indices_match_scalar():
    grid = BadicGrid(3, 7)
    k = np.arange(grid.point_count)
    for n in range(0, 10):
        assert frac_indices(k, n, grid).tolist() == [frac_index(int(i), n, grid) for i in k]
    assert shift_indices(k, grid).tolist() == frac_indices(k, 1, grid).tolist()


def test_grid_validation():
    with pytest.raises(ValueError):
        BadicGrid(1, 3)
    with pytest.raises(ValueError):
        BadicGrid(2, -1)
    with pytest.raises(ValueError):
        BadicGrid(2, 63)
    g = BadicGrid(3, 2)
    assert g.size == 9 and g.point_count == 10
    assert g.point(3) == Fraction(1, 3)
    assert g.index_of(Fraction(2, 3)) == 6
    with pytest.raises(ValueError):
        g.index_of(Fraction(1, 2))


def test_dyadic_refine_examples():
    grid = BadicGrid(2, 3)
    path = GridPath(grid, np.arange(9.0))
    coarse = dyadic_refine(path, 1)
    assert coarse.values.tolist() == [0.0, 4.0, 8.0]
    assert dyadic_refine(path, 3) == path
    const = GridPath(grid, np.full(9, 2.5))
    assert np.all(dyadic_refine(const, 2).values == 2.5)
    with pytest.raises(ValueError):
        dyadic_refine(path, 4)


def test_gridpath_invariants():
    grid = BadicGrid(2, 2)
    with pytest.raises(ValueError):
        GridPath(grid, np.zeros(4))
    with pytest.raises(ValueError):
        GridPath(grid, np.array([0, 1, np.nan, 0, 0.0]))
    path = GridPath(grid, np.arange(5.0))
    with pytest.raises(ValueError):
        path.values[0] = 3.0


def test_wwparams_regimes():
    assert WWParams(0.5, 2, 0.5).K == 1.0
    assert WWParams(0.5, 2, 0.5).regime is Regime.HURST_WINS
    assert WWParams.from_roughness(0.5, 2, 0.7).regime is Regime.CONVOLUTION_WINS
    crit = WWParams.critical(2, 0.5)
    assert crit.regime is Regime.CRITICAL
    assert crit.p == pytest.approx(2.0)
    # K is capped at 1 for tiny alpha
    assert WWParams(0.1, 2, 0.9).K == 1.0
    for bad in [(0.0, 2, 0.5), (1.0, 2, 0.5), (0.5, 1, 0.5), (0.5, 2, 1.0)]:
        with pytest.raises(ValueError):
            WWParams(*bad)


def test_csv_roundtrip(tmp_path):
    grid = BadicGrid(3, 3)
    rng = np.random.default_rng(1)
    path = GridPath(grid, rng.standard_normal(grid.point_count))
    dest = tmp_path / "p.csv"
    path.to_csv(dest)
    back = read_csv(dest, 3)
    assert back == path
    rows = dest.read_text().splitlines()
    assert rows[0] == "t,value"
    assert float(rows[2].split(",")[0]) == 1 / 27


def test_binary_roundtrip(tmp_path):
    grid = BadicGrid(2, 5)
    path = GridPath(grid, np.linspace(-1, 1, grid.point_count))
    dest = tmp_path / "p.bin"
    path.to_binary(dest)
    raw = dest.read_bytes()
    assert raw[:4] == b"WWGP"
    assert int.from_bytes(raw[4:8], "little") == 2 and int.from_bytes(raw[8:12], "little") == 5
    assert read_binary(dest) == path
    m = np.arange(6.0).reshape(2, 3)
    write_matrix_binary(m, grid, tmp_path / "m.bin")
    back, g = read_matrix_binary(tmp_path / "m.bin")
    assert g == grid and np.array_equal(back, m)


@pytest.mark.parametrize(
    "t,b,expected",
    [(0, 2, 0), (1, 2, 0), (Fraction(3, 8), 2, 3), (Fraction(1, 3), 2, None), (Fraction(1, 6), 6, 1),
     (Fraction(1, 4), 6, 2), (0.75, 2, 2)],
)
def test_badic_depth(t, b, expected):
    assert badic_depth(t, b) == expected
