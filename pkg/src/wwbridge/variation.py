"""p-th variation along b-adic partitions, roughness estimation and the
digit-randomisation representation of the variation."""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import rng as _rng
from .fractal import BaseFunction, BaseKind, DeterministicFractal
from .grid import BadicGrid, GridPath, WWParams

Z_CHUNK = 4096
PHI_CUTOFF = math.exp(-1.0)


@dataclass(eq=False)
class VariationCurve:
    """V_n for n in ``levels``, plus optional derived columns keyed by name."""

    p: float
    t_cap: float
    levels: np.ndarray
    values: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        if np.any(np.diff(self.levels) <= 0):
            raise ValueError("levels must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("variation sums are nonnegative")

    def __getitem__(self, n: int) -> float:
        hit = np.nonzero(self.levels == n)[0]
        if hit.size == 0:
            raise KeyError(n)
        return float(self.values[hit[0]])

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def per_level(self) -> np.ndarray:
        """V_n / n."""
        return self.values / self.levels

    def hurst_normalized(self, hurst: float) -> np.ndarray:
        """V_n / n^(1/(2H)); a diagnostic only."""
        return self.values / self.levels ** (1 / (2 * hurst))

    def rows(self):
        names = list(self.columns)
        for i, n in enumerate(self.levels):
            yield [int(n), self.p, float(self.values[i])] + [float(self.columns[c][i]) for c in names]

    def to_csv(self, dest) -> None:
        with open(dest, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "p", "V_n", *self.columns])
            for row in self.rows():
                w.writerow([repr(x) if isinstance(x, float) else x for x in row])

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "t_cap": self.t_cap,
            "levels": self.levels.tolist(),
            "V_n": self.values.tolist(),
            **{k: np.asarray(v).tolist() for k, v in self.columns.items()},
        }

    def to_json(self, dest, config: dict | None = None) -> None:
        payload = {"config": config or {}, "curve": self.to_dict()}
        with open(dest, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def increment_count(t_cap: float, b: int, n: int) -> int:
    """Number of increments k = 0..floor(t b^n), capped at the b^n cells of [0, 1]."""
    if not 0 < t_cap <= 1:
        raise ValueError("t_cap must lie in (0, 1]")
    return min(math.floor(Fraction(t_cap) * b**n), b**n - 1) + 1


def level_increments(values: np.ndarray, grid: BadicGrid, n: int, t_cap: float = 1.0) -> np.ndarray:
    """Increments of (rows of) ``values`` along the level-n partition up to t_cap."""
    step = grid.base ** (grid.depth - n)
    coarse = values[..., ::step]
    count = increment_count(t_cap, grid.base, n)
    return np.diff(coarse[..., : count + 1], axis=-1)


def variation_matrix(values: np.ndarray, grid: BadicGrid, p: float, t_cap: float = 1.0,
                     levels=None) -> np.ndarray:
    """V_n(p) for each row of ``values`` and each level; shape (..., len(levels))."""
    if p < 1:
        raise ValueError("p must be >= 1")
    levels = range(1, grid.depth + 1) if levels is None else levels
    out = [np.sum(np.abs(level_increments(values, grid, n, t_cap)) ** p, axis=-1) for n in levels]
    return np.stack(out, axis=-1)


def pth_variation_curve(path: GridPath, p: float, t_cap: float = 1.0) -> VariationCurve:
    """V_n = sum_{k <= floor(t b^n)} |f((k+1) b^-n) - f(k b^-n)|^p for n = 1..N."""
    if p < 1:
        raise ValueError("p must be >= 1")
    levels = np.arange(1, path.grid.depth + 1)
    vals = variation_matrix(path.values, path.grid, p, t_cap, levels)
    return VariationCurve(p, t_cap, levels, vals)


def normalized_qv(path: GridPath, t_cap: float = 1.0, params: WWParams | None = None,
                  diagnostics=(1.8, 2.2)) -> VariationCurve:
    """Quadratic variation divided by the level, with q-variation diagnostics."""
    if params is not None and (abs(params.alpha**2 * params.b - 1) > 1e-12 or params.hurst != 0.5):
        warnings.warn("normalized_qv is meant for H = 1/2 and alpha^2 b = 1", stacklevel=2)
    curve = pth_variation_curve(path, 2.0, t_cap)
    curve.columns["V_n/n"] = curve.per_level()
    for q in diagnostics:
        curve.columns[f"V_n({q:g})"] = variation_matrix(path.values, path.grid, q, t_cap, curve.levels)
    return curve


def phi_function(x, hurst: float) -> np.ndarray:
    """x^(1/H) (-log x)^(-1/(2H)) on [0, 1/e); zero at zero."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    pos = (x > 0) & (x < PHI_CUTOFF)
    xp = x[pos]
    out[pos] = xp ** (1 / hurst) * (-np.log(xp)) ** (-1 / (2 * hurst))
    return out


def phi_variation(path: GridPath, hurst: float, t_cap: float = 1.0) -> VariationCurve:
    """Sum of Phi(|increment|) per level; increments >= 1/e are skipped and counted."""
    if not 0 < hurst < 1:
        raise ValueError("hurst must lie in (0, 1)")
    levels = np.arange(1, path.grid.depth + 1)
    vals, excluded = [], []
    for n in levels:
        inc = np.abs(level_increments(path.values, path.grid, int(n), t_cap))
        vals.append(float(np.sum(phi_function(inc, hurst))))
        excluded.append(int(np.sum(inc >= PHI_CUTOFF)))
    curve = VariationCurve(1 / hurst, t_cap, levels, vals)
    curve.columns["excluded"] = np.array(excluded, dtype=np.float64)
    return curve


def conjectured_phi_limit(hurst: float, alpha: float, t: float = 1.0) -> float:
    """Limit proposed for the Phi-variation in the critical case (unproven)."""
    return gaussian_abs_moment(1 / hurst) / (-math.log(alpha)) ** (1 / (2 * hurst)) * t


def gaussian_abs_moment(p: float) -> float:
    """E|N|^p for a standard normal N."""
    return 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)


def hurst_regime_constant(params: WWParams) -> float:
    """Limit of V_n(1/H) at t = 1 when H < K."""
    H = params.hurst
    return gaussian_abs_moment(1 / H) / (1 - params.alpha**2 * params.b ** (2 * H)) ** (1 / (2 * H))


@dataclass(frozen=True)
class RoughnessFit:
    value: float
    slope: float
    smooth: bool
    levels: tuple[int, ...]


def roughness_fit(path: GridPath) -> RoughnessFit:
    """R = (1 - slope) / 2 from a least-squares fit of log_b V_n(2) on n over the top half of levels."""
    N = path.grid.depth
    if N < 6:
        raise ValueError("roughness estimation needs depth >= 6")
    levels = np.arange(N - math.ceil(N / 2) + 1, N + 1)
    v = variation_matrix(path.values, path.grid, 2.0, 1.0, levels)
    if np.any(v == 0):
        return RoughnessFit(1.0, float("nan"), True, tuple(levels.tolist()))
    slope = np.polyfit(levels, np.log(v) / math.log(path.grid.base), 1)[0]
    return RoughnessFit(0.5 * (1 - float(slope)), float(slope), False, tuple(levels.tolist()))


def roughness_estimate(path: GridPath) -> float:
    return roughness_fit(path).value


@dataclass(frozen=True)
class DigitSequence:
    """Uniform base-b digits U_1..U_m and R_j = sum_{i<=j} U_i b^(i-1)."""

    base: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if any(not 0 <= u < self.base for u in self.digits):
            raise ValueError("digits must lie in 0..b-1")

    @classmethod
    def sample(cls, base: int, m: int, seed: int, replicate_id: int = 0) -> DigitSequence:
        gen = _rng.stream(seed, replicate_id, _rng.DIGITS)
        return cls(base, tuple(int(u) for u in gen.integers(0, base, size=m)))

    @property
    def R(self) -> tuple[int, ...]:
        out, r, power = [], 0, 1
        for u in self.digits:
            r += u * power
            power *= self.base
            out.append(r)
        return tuple(out)


def digit_matrix(base: int, m: int, reps: int, seed: int, chunk: int) -> np.ndarray:
    """Digits for chunk ``chunk`` of a z-moment run, from the digit stream only."""
    gen = _rng.stream(seed, chunk, _rng.DIGITS)
    return gen.integers(0, base, size=(reps, m), dtype=np.int64)


def _positions(U: np.ndarray, base: int):
    """Yield (j, R_j) for j = 1..m, switching to Python ints once b^j overflows."""
    R = np.zeros(U.shape[0], dtype=np.int64)
    power = 1
    for j in range(1, U.shape[1] + 1):
        if R.dtype != object and base**j > 2**62:
            R = R.astype(object)
        digit = U[:, j - 1] if R.dtype != object else U[:, j - 1].astype(object)
        R = R + digit * power
        power *= base
        yield j, R


def z_from_digits(source, U: np.ndarray, alpha: float | None = None) -> np.ndarray:
    """Truncated Z_m = sum_{j<=m} alpha^-j (phi((R_j+1) b^-j) - phi(R_j b^-j)) per digit row.

    ``source`` is a :class:`DeterministicFractal` or a bridge :class:`GridPath`
    (then ``alpha`` is required and phi is the path itself).
    """
    U = np.atleast_2d(np.asarray(U, dtype=np.int64))
    Z = np.zeros(U.shape[0])
    if isinstance(source, DeterministicFractal):
        b, a = source.b, source.alpha
        for j, R in _positions(U, b):
            Z += a ** (-j) * source.base.cell_increments(R, j, b)
        return Z
    path: GridPath = source
    if alpha is None:
        raise ValueError("alpha is required for path input")
    grid = path.grid
    if U.shape[1] > grid.depth:
        raise ValueError(f"truncation {U.shape[1]} exceeds path depth {grid.depth}")
    v = path.values
    for j, R in _positions(U, grid.base):
        step = grid.base ** (grid.depth - j)
        Z += alpha ** (-j) * (v[(R + 1) * step] - v[R * step])
    return Z


@dataclass(frozen=True)
class ZMomentEstimate:
    p: float
    truncation: int
    reps: int
    estimate: float
    stderr: float
    tail_bound: float

    def variation(self, t: float = 1.0) -> float:
        """The implied p-th variation t * E_R|Z|^p."""
        return t * self.estimate

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("p", "truncation", "reps", "estimate", "stderr", "tail_bound")}


def z_tail_bound(frac: DeterministicFractal, m: int) -> float:
    """C * sum_{j>m} (alpha b^gamma)^-j, a bound on |Z - Z_m|."""
    base = frac.base
    r = 1.0 / (frac.alpha * frac.b**base.holder)
    if r >= 1:
        return math.inf
    if base.holder_const is None:
        return math.nan
    return base.holder_const * r ** (m + 1) / (1 - r)


def _check_source(source, m: int, alpha):
    if isinstance(source, DeterministicFractal):
        if source.alpha * source.b**source.base.holder <= 1:
            raise ValueError("Z representation needs alpha * b^gamma > 1")
        return source.b
    if not isinstance(source, GridPath):
        raise TypeError("source must be a DeterministicFractal or a GridPath")
    if alpha is None or not 0 < alpha < 1:
        raise ValueError("path input needs alpha in (0, 1)")
    if m > source.grid.depth:
        raise ValueError(f"truncation {m} exceeds path depth {source.grid.depth}")
    return source.grid.base


def sample_z(source, m: int, reps: int, seed: int, alpha: float | None = None,
             workers: int = 1) -> np.ndarray:
    """Z_m for ``reps`` digit sequences; chunked streams make the result worker-independent."""
    b = _check_source(source, m, alpha)
    chunks = [(c, min(Z_CHUNK, reps - c * Z_CHUNK)) for c in range(math.ceil(reps / Z_CHUNK))]

    def run(item):
        c, size = item
        return z_from_digits(source, digit_matrix(b, m, size, seed, c), alpha)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(item) for item in chunks]
    return np.concatenate(parts) if parts else np.zeros(0)


def enumerate_z(source, m: int, alpha: float | None = None) -> np.ndarray:
    """Z_m for every R_m in 0..b^m-1 (all digit sequences of length m)."""
    b = _check_source(source, m, alpha)
    if b**m > 2**22:
        raise ValueError("exhaustive enumeration limited to 2^22 sequences")
    r = np.arange(b**m, dtype=np.int64)
    U = np.stack([(r // b**i) % b for i in range(m)], axis=1)
    return z_from_digits(source, U, alpha)


def z_moment(source, p: float, m: int, reps: int = 10_000, seed: int = 0,
             alpha: float | None = None, exact: bool = False, workers: int = 1) -> ZMomentEstimate:
    """Monte Carlo (or exhaustive) estimate of E_R|Z_m|^p."""
    if exact:
        z = enumerate_z(source, m, alpha)
    else:
        if reps < 2:
            raise ValueError("need at least two replications for a standard error")
        z = sample_z(source, m, reps, seed, alpha, workers)
    zp = np.abs(z) ** p
    mean = float(np.mean(zp))
    se = 0.0 if exact else float(np.std(zp, ddof=1) / math.sqrt(zp.size))
    tail = z_tail_bound(source, m) if isinstance(source, DeterministicFractal) else math.nan
    return ZMomentEstimate(p, m, int(zp.size), mean, se, tail)


def validity_check(phi: BaseFunction, b: int, kmax: int = 60) -> bool:
    """Sufficient condition for a nonzero Z: phi(b^-k), k >= 1, all of one sign and not all zero.

    Also accepts the mirrored conditions on -phi, phi(1 - .) and -phi(1 - .).
    Table bases are checked only at the levels their grid resolves.
    """
    if phi.kind is BaseKind.TABLE:
        if phi.grid.base != b:
            raise ValueError("table base must be tabulated on a base-b grid")
        kmax = min(kmax, phi.grid.depth)
    ks = np.arange(1, kmax + 1, dtype=np.float64)
    x = float(b) ** (-ks)
    near_zero = np.asarray(phi(x), dtype=np.float64)
    near_one = np.asarray(phi(1.0 - x), dtype=np.float64)
    for vals in (near_zero, -near_zero, near_one, -near_one):
        if np.all(vals >= 0) and np.any(vals != 0):
            return True
    return False
