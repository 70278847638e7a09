"""Weierstrass-type convolutions f(t) = sum_n alpha^n phi({b^n t}).

The stochastic version turns a bridge path into a Wiener-Weierstrass bridge;
the deterministic version works from a base function with known Holder
metadata, so truncation tails can be bounded rather than guessed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grid import BadicGrid, GridPath, badic_depth, read_two_column_csv, shift_indices

BASE_TABLE_TOL = 1e-12


class BaseKind(enum.Enum):
    TENT = "tent"
    WEIERSTRASS_COS = "cos"
    WEIERSTRASS_SIN = "sin"
    TABLE = "table"
    KERNEL = "kernel"


@dataclass(frozen=True, eq=False)
class BaseFunction:
    """A continuous phi on [0, 1] with phi(0) = phi(1).

    ``holder`` is the Holder exponent gamma, ``holder_const`` a constant C
    with |phi(x) - phi(y)| <= C |x - y|^gamma for the periodic extension.
    ``KERNEL`` bases are themselves Weierstrass convolutions (see
    :func:`kernel_base`).
    """

    kind: BaseKind
    holder: float
    holder_const: float | None
    sup_norm: float
    grid: BadicGrid | None = None
    values: np.ndarray | None = field(default=None, repr=False)
    inner: DeterministicFractal | None = None

    @classmethod
    def tent(cls) -> BaseFunction:
        return cls(BaseKind.TENT, 1.0, 1.0, 0.5)

    @classmethod
    def weierstrass_cos(cls) -> BaseFunction:
        return cls(BaseKind.WEIERSTRASS_COS, 1.0, 2 * math.pi, 2.0)

    @classmethod
    def weierstrass_sin(cls) -> BaseFunction:
        return cls(BaseKind.WEIERSTRASS_SIN, 1.0, 2 * math.pi, 1.0)

    @classmethod
    def table(cls, grid: BadicGrid, values, holder: float, holder_const: float | None = None):
        values = np.array(values, dtype=np.float64)
        if values.shape != (grid.point_count,):
            raise ValueError(f"table needs {grid.point_count} values, got {values.shape}")
        if abs(values[0] - values[-1]) > BASE_TABLE_TOL:
            raise ValueError("base table must satisfy phi(0) = phi(1)")
        if not 0 < holder <= 1:
            raise ValueError("holder exponent must lie in (0, 1]")
        values.setflags(write=False)
        return cls(BaseKind.TABLE, holder, holder_const, float(np.max(np.abs(values))), grid, values)

    @classmethod
    def table_from_csv(cls, src, base: int, holder: float, holder_const: float | None = None):
        ts, vs = read_two_column_csv(src)
        depth = round(math.log(len(vs) - 1, base))
        grid = BadicGrid(base, depth)
        if grid.point_count != len(vs) or not np.allclose(ts, grid.times(), rtol=0, atol=1e-15):
            raise ValueError("base table rows must be the points of a b-adic grid")
        return cls.table(grid, vs, holder, holder_const)

    @property
    def at_zero(self) -> float:
        if self.kind is BaseKind.TABLE:
            return float(self.values[0])
        if self.kind is BaseKind.KERNEL:
            return self.inner.base.at_zero / (1 - self.inner.alpha)
        return 0.0

    def __call__(self, x):
        """Evaluate phi at x, reduced mod 1 (periodic extension)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.mod(x, 1.0)
        if self.kind is BaseKind.TENT:
            out = np.minimum(y, 1.0 - y)
        elif self.kind is BaseKind.WEIERSTRASS_COS:
            out = np.cos(2 * np.pi * y) - 1.0
        elif self.kind is BaseKind.WEIERSTRASS_SIN:
            out = np.sin(2 * np.pi * y)
        elif self.kind is BaseKind.TABLE:
            scaled = y * self.grid.size
            idx = np.rint(scaled)
            if np.any(np.abs(scaled - idx) > 1e-9):
                raise ValueError("table base evaluated off its grid")
            out = self.values[idx.astype(np.int64)]
        else:
            out = self.inner.series(y)
        return float(out) if np.ndim(out) == 0 else out

    def on_grid(self, grid: BadicGrid) -> np.ndarray:
        """Exact values at the points of ``grid`` (as exact as float evaluation allows)."""
        if self.kind is BaseKind.TABLE:
            if self.grid.base != grid.base or self.grid.depth < grid.depth:
                raise ValueError("table base grid is coarser than the requested grid")
            return self.values[:: self.grid.base ** (self.grid.depth - grid.depth)].copy()
        if self.kind is BaseKind.KERNEL and self.inner.b == grid.base:
            return fractal_on_grid(self.inner, grid)
        out = np.asarray(self(np.arange(grid.point_count) / grid.size), dtype=np.float64)
        out[-1] = out[0]
        return out

    def cell_increments(self, j, m: int, b: int) -> np.ndarray:
        """phi((j + 1) b^-m) - phi(j b^-m) for integer cell indices j at level m.

        Uses integer reductions and difference identities so the result keeps
        full relative accuracy even when b^-m is far below float resolution.
        """
        j = np.asarray(j)
        P = b**m
        big = P > 2**62
        if big:
            j = j.astype(object)
        if self.kind is BaseKind.TENT:
            def num(i):
                r = i % P
                return np.minimum(r, P - r)
            d = num(j + 1) - num(j)
            return np.asarray(d, dtype=np.float64) / float(P)
        if self.kind in (BaseKind.WEIERSTRASS_COS, BaseKind.WEIERSTRASS_SIN):
            # cos/sin(2 pi (j+1)/P) - cos/sin(2 pi j/P) via product formulas
            mid = np.asarray((2 * j + 1) % (2 * P), dtype=np.float64) / float(P)
            half = math.sin(math.pi / float(P))
            if self.kind is BaseKind.WEIERSTRASS_COS:
                return -2.0 * np.sin(np.pi * mid) * half
            return 2.0 * np.cos(np.pi * mid) * half
        if self.kind is BaseKind.TABLE:
            if self.grid.base != b or m > self.grid.depth:
                raise ValueError(f"table base of depth {self.grid.depth} cannot resolve level {m}")
            step = b ** (self.grid.depth - m)
            jj = np.asarray(j % P, dtype=np.int64)
            return self.values[(jj + 1) * step] - self.values[jj * step]
        frac = self.inner
        if frac.b != b:
            x = np.asarray(j % P, dtype=np.float64) / float(P)
            return np.asarray(self(x + 1.0 / P) - self(x), dtype=np.float64)
        # psi((j+1)/b^m) - psi(j/b^m) = sum_{n<m} beta^n inc_phi(j mod b^(m-n), m-n);
        # deeper terms cancel by periodicity of phi.
        out = np.zeros(np.shape(j), dtype=np.float64)
        for n in range(m):
            level = m - n
            out += frac.alpha**n * frac.base.cell_increments(j % (b**level), level, b)
        return out


@dataclass(frozen=True)
class DeterministicFractal:
    """f(t) = sum_{n>=0} alpha^n phi({b^n t})."""

    base: BaseFunction
    alpha: float
    b: int

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.b) != self.b or self.b < 2:
            raise ValueError(f"b must be an integer >= 2, got {self.b}")

    @property
    def K(self) -> float:
        return min(1.0, -math.log(self.alpha) / math.log(self.b))

    @property
    def p(self) -> float:
        """Exponent with alpha^p b = 1."""
        return -math.log(self.b) / math.log(self.alpha)

    def tail_bound(self, levels: int) -> float:
        return self.alpha**levels * self.base.sup_norm / (1 - self.alpha)

    def levels_for(self, tol: float) -> int:
        if tol <= 0:
            raise ValueError("tol must be positive")
        if self.base.sup_norm == 0:
            return 0
        m = math.ceil(math.log(tol * (1 - self.alpha) / self.base.sup_norm) / math.log(self.alpha))
        return max(m, 0)

    def series(self, x, tol: float = 1e-15) -> np.ndarray:
        """Vectorised evaluation at float points (fractional parts taken in floats)."""
        y = np.mod(np.asarray(x, dtype=np.float64), 1.0)
        out = np.zeros_like(y)
        for n in range(self.levels_for(tol)):
            out += self.alpha**n * np.asarray(self.base(y))
            y = np.mod(y * self.b, 1.0)
        return out


def kernel_base(phi: BaseFunction, beta: float, b: int) -> BaseFunction:
    """psi = sum beta^m phi({b^m t}) packaged as a base function.

    Requires 0 < beta < b^-gamma so psi keeps phi's Holder exponent.
    """
    gamma = phi.holder
    if not 0.0 < beta < float(b) ** (-gamma):
        raise ValueError(f"beta must lie in (0, b^-gamma) = (0, {float(b) ** (-gamma):.6g})")
    const = None
    if phi.holder_const is not None:
        const = phi.holder_const / (1 - beta * b**gamma)
    inner = DeterministicFractal(phi, beta, b)
    return BaseFunction(BaseKind.KERNEL, gamma, const, phi.sup_norm / (1 - beta), inner=inner)


def kernel_psi(phi: BaseFunction, beta: float, b: int, grid: BadicGrid) -> GridPath:
    """The kernel psi sampled exactly on ``grid``."""
    if grid.base != b:
        raise ValueError("grid base must equal b")
    psi = kernel_base(phi, beta, b)
    return GridPath(grid, psi.on_grid(grid))


def fractal_on_grid(frac: DeterministicFractal, grid: BadicGrid) -> np.ndarray:
    """Exact values of the convolution at the points of a base-b grid.

    Levels n >= depth see phi(0) only and are summed in closed form.
    """
    if grid.base != frac.b:
        raise ValueError("grid base must equal the fractal's b")
    phi = frac.base.on_grid(grid)
    phi[-1] = phi[0]
    idx = np.arange(grid.point_count, dtype=np.int64)
    out = np.zeros(grid.point_count)
    for n in range(grid.depth):
        out += frac.alpha**n * phi[idx]
        idx = shift_indices(idx, grid)
    if phi[0] != 0.0:
        out += frac.alpha**grid.depth * phi[0] / (1 - frac.alpha)
    return out


def eval_deterministic(frac: DeterministicFractal, t, tol: float = 1e-12) -> float:
    """f(t) to within ``tol``; exact (up to float rounding) at b-adic t.

    ``t`` may be a float, int or Fraction; fractional parts are taken in
    exact rational arithmetic.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    q = Fraction(t)
    if not 0 <= q <= 1:
        raise ValueError("t must lie in [0, 1]")
    levels = frac.levels_for(tol)
    depth = badic_depth(q, frac.b)
    exact = depth is not None and depth <= levels
    if exact:
        levels = depth
    total = 0.0
    y = q - math.floor(q)
    for n in range(levels):
        total += frac.alpha**n * float(frac.base(float(y)))
        y = y * frac.b
        y -= math.floor(y)
    if exact and frac.base.at_zero != 0.0:
        total += frac.alpha**levels * frac.base.at_zero / (1 - frac.alpha)
    return total


def sample_deterministic(frac: DeterministicFractal, grid: BadicGrid) -> GridPath:
    return GridPath(grid, fractal_on_grid(frac, grid))


def convolve_bridge(B: GridPath, alpha: float) -> GridPath:
    """X(t_k) = sum_{n<N} alpha^n B({b^n t_k}) via X = B + alpha * (X o shift).

    Exact on the grid: all deeper levels evaluate B at 0.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    values = B.values
    if values[0] != 0.0 or values[-1] != 0.0:
        raise ValueError("bridge path must vanish exactly at t = 0 and t = 1")
    grid = B.grid
    shift = shift_indices(np.arange(grid.point_count), grid)
    X = values.copy()
    for _ in range(grid.depth):
        X = values + alpha * X[shift]
    return GridPath(grid, X)


def convolve_paths(B: np.ndarray, alpha: float, grid: BadicGrid) -> np.ndarray:
    """Batch version of :func:`convolve_bridge` for rows of an array."""
    B = np.asarray(B, dtype=np.float64)
    if np.any(B[..., 0] != 0.0) or np.any(B[..., -1] != 0.0):
        raise ValueError("bridge paths must vanish exactly at t = 0 and t = 1")
    shift = shift_indices(np.arange(grid.point_count), grid)
    X = B.copy()
    for _ in range(grid.depth):
        X = B + alpha * X[..., shift]
    return X


def holder_scan(path: GridPath, gamma: float, full: bool = False) -> float:
    """Largest |f(t_k) - f(t_j)| / (t_k - t_j)^gamma over grid pairs.

    Lags are limited to b^ceil(N/2) cells unless ``full`` (only for N <= 8).
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    grid = path.grid
    if full:
        if grid.depth > 8:
            raise ValueError("full pair scan only for depth <= 8")
        max_lag = grid.size
    else:
        max_lag = min(grid.size, grid.base ** math.ceil(grid.depth / 2))
    v = path.values
    best = 0.0
    for lag in range(1, max_lag + 1):
        d = np.max(np.abs(v[lag:] - v[:-lag]))
        best = max(best, d / (lag / grid.size) ** gamma)
    return float(best)
