"""Exact fractional Brownian motion on b-adic grids and the bridges built from it."""

from __future__ import annotations

import enum
import functools
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rng as _rng
from .grid import BadicGrid, GridPath, read_two_column_csv

CHOLESKY_MAX_CELLS = 4096
CIRCULANT_CLIP = 1e-8
KAPPA_TABLE_TOL = 1e-12


class Method(enum.Enum):
    CHOLESKY = "cholesky"
    CIRCULANT = "circulant"


@dataclass(frozen=True)
class SamplerConfig:
    method: Method = Method.CIRCULANT
    seed: int = 0
    replicate_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not 0 <= self.seed < 2**64 or not 0 <= self.replicate_id < 2**64:
            raise ValueError("seed and replicate_id must be 64-bit unsigned integers")

    def replicate(self, replicate_id: int) -> SamplerConfig:
        return SamplerConfig(self.method, self.seed, replicate_id)


class KappaKind(enum.Enum):
    STANDARD = "standard"
    LINEAR = "linear"
    DENSITY = "density"
    TABLE = "table"


@dataclass(frozen=True, eq=False)
class KappaSpec:
    """The deterministic function kappa with kappa(0) = 0, kappa(1) = 1.

    ``DENSITY`` holds a nonnegative step function on b-adic cells and
    integrates it exactly; ``TABLE`` holds values at grid points only.
    ``holder`` records the Holder exponent when it is known.
    """

    kind: KappaKind
    holder: float | None = None
    grid: BadicGrid | None = None
    values: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def standard(cls) -> KappaSpec:
        return cls(KappaKind.STANDARD)

    @classmethod
    def linear(cls) -> KappaSpec:
        return cls(KappaKind.LINEAR, holder=1.0)

    @classmethod
    def from_density(cls, grid: BadicGrid, density) -> KappaSpec:
        """kappa(t) = int_0^t phi / int_0^1 phi for phi constant on the cells of ``grid``."""
        density = np.asarray(density, dtype=np.float64)
        if density.shape != (grid.size,):
            raise ValueError(f"density needs one value per cell ({grid.size}), got {density.shape}")
        if not np.all(np.isfinite(density)) or np.any(density < 0):
            raise ValueError("density must be finite and nonnegative")
        total = float(np.sum(density))
        if total <= 0:
            raise ValueError("density integrates to zero")
        cum = np.concatenate([[0.0], np.cumsum(density)]) / total
        cum[-1] = 1.0
        # integral of a bounded density is Lipschitz
        return cls(KappaKind.DENSITY, holder=1.0, grid=grid, values=cum)

    @classmethod
    def from_table(cls, grid: BadicGrid, values, holder: float | None = None) -> KappaSpec:
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.point_count,):
            raise ValueError(f"table needs {grid.point_count} values, got {values.shape}")
        if abs(values[0]) > KAPPA_TABLE_TOL or abs(values[-1] - 1.0) > KAPPA_TABLE_TOL:
            raise ValueError("kappa table must satisfy kappa(0) = 0 and kappa(1) = 1")
        if holder is None:
            warnings.warn("kappa table has no Holder exponent; tau > H cannot be checked", stacklevel=2)
        return cls(KappaKind.TABLE, holder=holder, grid=grid, values=values)

    @classmethod
    def density_from_csv(cls, src, base: int) -> KappaSpec:
        """Density CSV rows are (left cell endpoint, value) on a base-``base`` grid."""
        ts, vs = read_two_column_csv(src)
        depth = round(np.log(len(vs)) / np.log(base))
        grid = BadicGrid(base, depth)
        if grid.size != len(vs) or not np.allclose(ts, grid.times()[:-1], rtol=0, atol=1e-15):
            raise ValueError("density rows must be the left endpoints of a b-adic grid")
        return cls.from_density(grid, vs)

    @classmethod
    def table_from_csv(cls, src, base: int, holder: float | None = None) -> KappaSpec:
        ts, vs = read_two_column_csv(src)
        depth = round(np.log(len(vs) - 1) / np.log(base))
        grid = BadicGrid(base, depth)
        if grid.point_count != len(vs) or not np.allclose(ts, grid.times(), rtol=0, atol=1e-15):
            raise ValueError("table rows must be the points of a b-adic grid")
        return cls.from_table(grid, vs, holder)

    def holder_exponent(self, hurst: float) -> float | None:
        if self.kind is KappaKind.STANDARD:
            # 1/2 (t^{2H} - (1-t)^{2H}) is Lipschitz for H >= 1/2, 2H-Holder otherwise
            return min(1.0, 2 * hurst)
        return self.holder


def kappa_eval(spec: KappaSpec, hurst: float, t):
    """Evaluate kappa at t (scalar or array) in [0, 1]."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any((t_arr < 0) | (t_arr > 1)):
        raise ValueError("t must lie in [0, 1]")
    if spec.kind is KappaKind.STANDARD and hurst != 0.5:
        out = 0.5 * (1.0 + t_arr ** (2 * hurst) - (1.0 - t_arr) ** (2 * hurst))
    elif spec.kind in (KappaKind.LINEAR, KappaKind.STANDARD):
        out = t_arr.copy()
    elif spec.kind is KappaKind.DENSITY:
        out = np.interp(t_arr, spec.grid.times(), spec.values)
    else:
        scaled = t_arr * spec.grid.size
        idx = np.rint(scaled)
        if np.any(np.abs(scaled - idx) > 1e-9):
            raise ValueError("table kappa evaluated off its grid")
        out = spec.values[idx.astype(np.int64)]
    return float(out) if np.ndim(out) == 0 else out


def kappa_on_grid(spec: KappaSpec, hurst: float, grid: BadicGrid) -> np.ndarray:
    if spec.kind is KappaKind.TABLE:
        if spec.grid.base != grid.base or spec.grid.depth < grid.depth:
            raise ValueError("table kappa grid is coarser than the sampling grid")
        return spec.values[:: spec.grid.base ** (spec.grid.depth - grid.depth)].copy()
    out = np.asarray(kappa_eval(spec, hurst, grid.times()), dtype=np.float64)
    out[0], out[-1] = 0.0, 1.0
    return out


def fgn_autocovariance(hurst: float, lag):
    """Autocovariance of unit-spaced fractional Gaussian noise."""
    k = np.abs(np.asarray(lag, dtype=np.float64))
    h2 = 2 * hurst
    out = 0.5 * ((k + 1) ** h2 + np.abs(k - 1) ** h2 - 2 * k**h2)
    return float(out) if np.ndim(out) == 0 else out


@functools.lru_cache(maxsize=32)
def _cholesky_factor(hurst: float, n: int) -> np.ndarray:
    gamma = fgn_autocovariance(hurst, np.arange(n))
    idx = np.arange(n)
    cov = gamma[np.abs(idx[:, None] - idx[None, :])]
    try:
        factor = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"fGn covariance (H={hurst}, n={n}) not numerically positive definite; add jitter"
        ) from exc
    factor.setflags(write=False)
    return factor


@functools.lru_cache(maxsize=32)
def _circulant_sqrt_eigs(hurst: float, n: int) -> np.ndarray:
    gamma = fgn_autocovariance(hurst, np.arange(n + 1))
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eig = np.fft.fft(row).real
    lam_max = eig.max()
    if eig.min() < -CIRCULANT_CLIP * lam_max:
        raise RuntimeError(
            f"circulant embedding has eigenvalue {eig.min():.3e} (H={hurst}, n={n}); this is a bug"
        )
    eig = np.where(eig < 0, 0.0, eig)
    out = np.sqrt(eig / row.size)
    out.setflags(write=False)
    return out


def _fgn(hurst: float, n: int, method: Method, gen: np.random.Generator) -> np.ndarray:
    if method is Method.CHOLESKY:
        if n > CHOLESKY_MAX_CELLS:
            raise ValueError(f"Cholesky sampling limited to {CHOLESKY_MAX_CELLS} cells, got {n}")
        return _cholesky_factor(hurst, n) @ gen.standard_normal(n)
    sq = _circulant_sqrt_eigs(hurst, n)
    z = gen.standard_normal(sq.size) + 1j * gen.standard_normal(sq.size)
    return np.fft.fft(sq * z)[:n].real


def sample_fbm(hurst: float, grid: BadicGrid, config: SamplerConfig) -> GridPath:
    """Fractional Brownian motion at the points of ``grid`` with W(0) = 0."""
    if not 0.0 < hurst < 1.0:
        raise ValueError(f"hurst must lie in (0, 1), got {hurst}")
    gen = _rng.stream(config.seed, config.replicate_id, _rng.GAUSSIAN)
    n = grid.size
    if n > CHOLESKY_MAX_CELLS and config.method is Method.CHOLESKY:
        raise ValueError(f"Cholesky sampling limited to {CHOLESKY_MAX_CELLS} cells, got {n}")
    if n == 1:
        inc = gen.standard_normal(1)
    else:
        inc = _fgn(hurst, n, config.method, gen)
    values = np.empty(n + 1)
    values[0] = 0.0
    np.cumsum(inc * float(n) ** (-hurst), out=values[1:])
    return GridPath(grid, values)


def to_bridge(W: GridPath, spec: KappaSpec, hurst: float) -> GridPath:
    """B(t) = W(t) - kappa(t) W(1), with B(1) forced to exactly zero."""
    kap = kappa_on_grid(spec, hurst, W.grid)
    values = W.values - kap * W.values[-1]
    values[0] = 0.0
    values[-1] = 0.0
    return GridPath(W.grid, values)


def sample_bridge(hurst: float, grid: BadicGrid, config: SamplerConfig,
                  spec: KappaSpec | None = None) -> GridPath:
    return to_bridge(sample_fbm(hurst, grid, config), spec or KappaSpec.standard(), hurst)


def sample_martingale(grid: BadicGrid, spec: KappaSpec, config: SamplerConfig) -> GridPath:
    """Gaussian martingale with <M>_t = kappa(t): independent cell increments."""
    if spec.kind is not KappaKind.DENSITY:
        raise ValueError("martingale sampling needs a density kappa")
    gen = _rng.stream(config.seed, config.replicate_id, _rng.GAUSSIAN)
    qv = kappa_on_grid(spec, 0.5, grid)
    var = np.maximum(np.diff(qv), 0.0)
    values = np.empty(grid.point_count)
    values[0] = 0.0
    np.cumsum(np.sqrt(var) * gen.standard_normal(grid.size), out=values[1:])
    return GridPath(grid, values)


def fbm_covariance(hurst: float, u, v):
    """rho(u, v) = cov(W(u), W(v)); uses min(u, v) exactly at H = 1/2."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if hurst == 0.5:
        return np.minimum(u, v)
    h2 = 2 * hurst
    return 0.5 * ((u**h2 + v**h2) - np.abs(u - v) ** h2)


def bridge_covariance(hurst: float, spec: KappaSpec, s, t):
    """cov(B(s), B(t)) for B = W - kappa W(1); bitwise symmetric in (s, t)."""
    s_arr = np.asarray(s, dtype=np.float64)
    t_arr = np.asarray(t, dtype=np.float64)
    ks = np.asarray(kappa_eval(spec, hurst, s_arr))
    kt = np.asarray(kappa_eval(spec, hurst, t_arr))
    rho = fbm_covariance(hurst, s_arr, t_arr)
    if spec.kind is KappaKind.STANDARD:
        # rho(t, 1) = kappa(t) for the standard choice
        out = rho - ks * kt
    else:
        cross = ks * fbm_covariance(hurst, t_arr, 1.0) + kt * fbm_covariance(hurst, s_arr, 1.0)
        out = rho - cross + ks * kt
    out = np.where((s_arr == 0) | (s_arr == 1) | (t_arr == 0) | (t_arr == 1), 0.0, out)
    return float(out) if np.ndim(out) == 0 else out
