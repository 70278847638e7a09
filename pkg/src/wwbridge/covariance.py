"""Exact covariance of the Wiener-Weierstrass bridge at rational times.

For a rational s the orbit s, {bs}, {b^2 s}, ... is eventually periodic, so
sum_m alpha^m B({b^m s}) collapses to finitely many points with geometric
weights. b-adic points reach 0, where B vanishes, and drop out entirely.
No truncation is ever applied.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .gaussian import KappaSpec, bridge_covariance
from .grid import BadicGrid, GridPath, WWParams, frac_indices
from .variation import VariationCurve, pth_variation_curve

MAX_ORBIT = 4096
_CHUNK_ELEMS = 2_000_000


def shift_orbit(s, b: int, alpha: float, max_len: int = MAX_ORBIT):
    """Points of the orbit of s under x -> {b x} with their total weights.

    Returns (points, weights) such that sum_m alpha^m g({b^m s}) equals
    sum_i weights[i] * g(points[i]) for any g with g(0) = g(1) = 0.
    """
    q = Fraction(s)
    if not 0 <= q <= 1:
        raise ValueError("s must lie in [0, 1]")
    seen: dict[Fraction, int] = {}
    orbit: list[Fraction] = []
    x = q
    while x not in seen:
        if len(orbit) >= max_len:
            raise ValueError(f"orbit of {s} under x -> {{{b}x}} longer than {max_len}")
        seen[x] = len(orbit)
        orbit.append(x)
        x = x * b
        x -= x.numerator // x.denominator
    start, period = seen[x], len(orbit) - seen[x]
    points, weights = [], []
    for i, pt in enumerate(orbit):
        if pt == 0 or pt == 1:
            continue
        w = alpha**i
        if i >= start:
            w /= 1 - alpha**period
        points.append(float(pt))
        weights.append(w)
    return np.array(points), np.array(weights)


def _kappa(kappa: KappaSpec | None) -> KappaSpec:
    return kappa if kappa is not None else KappaSpec.standard()


def ww_covariance(params: WWParams, kappa: KappaSpec | None, s, t) -> float:
    """c(s, t) = cov(X(s), X(t)) for rational s, t (floats are read exactly)."""
    kappa = _kappa(kappa)
    qs, qt = Fraction(s), Fraction(t)
    if qs > qt:
        qs, qt = qt, qs  # canonical order keeps c(s, t) == c(t, s) bitwise
    ps, ws = shift_orbit(qs, params.b, params.alpha)
    pt, wt = shift_orbit(qt, params.b, params.alpha)
    if ps.size == 0 or pt.size == 0:
        return 0.0
    beta = bridge_covariance(params.hurst, kappa, ps[:, None], pt[None, :])
    return float(ws @ np.asarray(beta) @ wt)


def _level_points(idx: np.ndarray, grid: BadicGrid) -> np.ndarray:
    """(len(idx), N) array of {b^n t_k} for n < N."""
    cols = [frac_indices(idx, n, grid) for n in range(grid.depth)]
    if not cols:
        return np.zeros((idx.size, 0))
    return np.stack(cols, axis=1) / grid.size


def grid_covariance(params: WWParams, kappa: KappaSpec | None, grid: BadicGrid, i, j) -> np.ndarray:
    """c(t_i, t_j) for arrays of grid indices, summed as a finite double series."""
    kappa = _kappa(kappa)
    if grid.base != params.b:
        raise ValueError("grid base must equal params.b")
    i = np.asarray(i, dtype=np.int64).ravel()
    j = np.asarray(j, dtype=np.int64).ravel()
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    N = grid.depth
    if N == 0:
        return np.zeros(lo.size)
    powers = params.alpha ** np.arange(N)
    weight = np.outer(powers, powers)
    out = np.empty(lo.size)
    step = max(1, _CHUNK_ELEMS // (N * N))
    for a in range(0, lo.size, step):
        u = _level_points(lo[a : a + step], grid)
        v = _level_points(hi[a : a + step], grid)
        beta = bridge_covariance(params.hurst, kappa, u[:, :, None], v[:, None, :])
        out[a : a + step] = np.einsum("pmn,mn->p", beta, weight)
    return out


def covariance_matrix(params: WWParams, kappa: KappaSpec | None, grid: BadicGrid) -> np.ndarray:
    n = grid.point_count
    ii, jj = np.triu_indices(n)
    vals = grid_covariance(params, kappa, grid, ii, jj)
    out = np.zeros((n, n))
    out[ii, jj] = vals
    out[jj, ii] = vals
    return out


@dataclass(eq=False)
class CovCurve:
    params: WWParams
    kappa: KappaSpec
    anchor: Fraction
    grid: BadicGrid
    values: np.ndarray

    def as_path(self) -> GridPath:
        return GridPath(self.grid, self.values)

    def to_csv(self, dest) -> None:
        n = self.grid.size
        with open(dest, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "c"])
            for k, v in enumerate(self.values):
                w.writerow([format(k / n, ".17g"), repr(float(v))])


def covariance_curve(params: WWParams, kappa: KappaSpec | None, s, grid: BadicGrid) -> CovCurve:
    """t -> c(s, t) at every point of ``grid``; s may be any rational point."""
    kappa = _kappa(kappa)
    if grid.base != params.b:
        raise ValueError("grid base must equal params.b")
    ps, ws = shift_orbit(s, params.b, params.alpha)
    values = np.zeros(grid.point_count)
    idx = np.arange(grid.point_count, dtype=np.int64)
    for n in range(grid.depth):
        u = frac_indices(idx, n, grid) / grid.size
        inner = np.zeros(grid.point_count)
        for p, w in zip(ps, ws):
            inner += w * bridge_covariance(params.hurst, kappa, p, u)
        values += params.alpha**n * inner
    values[0] = values[-1] = 0.0
    return CovCurve(params, kappa, Fraction(s), grid, values)


def covariance_variation(curve: CovCurve, t_cap: float = 1.0) -> VariationCurve:
    """(1/K)-th variation of t -> c(s, t), with successive-level ratios as a stabilisation column."""
    if curve.grid.depth < 8:
        raise ValueError("covariance variation needs depth >= 8")
    p = 1.0 / curve.params.K
    vc = pth_variation_curve(curve.as_path(), p, t_cap)
    ratio = np.full(vc.values.shape, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio[1:] = vc.values[1:] / vc.values[:-1]
    vc.columns["ratio"] = ratio
    return vc


def increment_second_moment(params: WWParams, kappa: KappaSpec | None, s, t) -> float:
    """E[(X(t) - X(s))^2] = c(s, s) + c(t, t) - 2 c(s, t)."""
    v = ww_covariance(params, kappa, s, s) + ww_covariance(params, kappa, t, t) - 2 * ww_covariance(params, kappa, s, t)
    if v < -1e-12:
        raise ArithmeticError(f"negative increment variance {v:.3e}; covariance is inconsistent")
    return max(v, 0.0)


def adjacent_increment_moments(params: WWParams, kappa: KappaSpec | None, grid: BadicGrid) -> np.ndarray:
    """E[(X(t_{k+1}) - X(t_k))^2] for every cell of ``grid``."""
    k = np.arange(grid.point_count, dtype=np.int64)
    var = grid_covariance(params, kappa, grid, k, k)
    cross = grid_covariance(params, kappa, grid, k[:-1], k[1:])
    out = var[:-1] + var[1:] - 2 * cross
    if np.any(out < -1e-12):
        raise ArithmeticError("negative increment variance; covariance is inconsistent")
    return np.maximum(out, 0.0)
