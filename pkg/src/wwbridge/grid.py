"""b-adic grids, sampled paths and exact fractional-part index arithmetic."""

from __future__ import annotations

import csv
import enum
import math
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

# Critical regime is declared when |H - K| falls below this.
CRITICAL_TOL = 1e-12

_INDEX_MAX = np.iinfo(np.int64).max
_BINARY_MAGIC = b"WWGP"
_BINARY_HEADER = struct.Struct("<4sII")


@dataclass(frozen=True)
class BadicGrid:
    """The partition points k * b**-depth, k = 0..b**depth, of [0, 1]."""

    base: int
    depth: int

    def __post_init__(self):
        if int(self.base) != self.base or self.base < 2:
            raise ValueError(f"base must be an integer >= 2, got {self.base!r}")
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError(f"depth must be an integer >= 0, got {self.depth!r}")
        # Vectorised shifts multiply indices by b once more, so b**(N+1) must fit.
        if self.base ** (self.depth + 1) > _INDEX_MAX:
            raise ValueError(f"grid {self.base}**{self.depth} too large for int64 indices")

    @property
    def size(self) -> int:
        """Number of cells, b**depth."""
        return self.base**self.depth

    @property
    def point_count(self) -> int:
        return self.size + 1

    def point(self, k: int) -> Fraction:
        return Fraction(k, self.size)

    def times(self) -> np.ndarray:
        return np.arange(self.point_count) / self.size

    def index_of(self, t) -> int:
        """Grid index of the b-adic point t; raises if t is not on the grid."""
        q = Fraction(t) * self.size
        if q.denominator != 1 or not 0 <= q <= self.size:
            raise ValueError(f"{t!r} is not a point of {self}")
        return int(q)

    def coarsen(self, depth: int) -> BadicGrid:
        return BadicGrid(self.base, depth)


class Regime(enum.Enum):
    HURST_WINS = "HurstWins"
    CONVOLUTION_WINS = "ConvolutionWins"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class WWParams:
    """Parameters (alpha, b, H) of a Wiener-Weierstrass bridge."""

    alpha: float
    b: int
    hurst: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if int(self.b) != self.b or self.b < 2:
            raise ValueError(f"b must be an integer >= 2, got {self.b}")
        if not 0.0 < self.hurst < 1.0:
            raise ValueError(f"hurst must lie in (0, 1), got {self.hurst}")

    @classmethod
    def from_roughness(cls, K: float, b: int, hurst: float) -> WWParams:
        """Parameters with alpha = b**-K, i.e. convolution roughness K (K < 1)."""
        if not 0.0 < K < 1.0:
            raise ValueError(f"K must lie in (0, 1), got {K}")
        return cls(float(b) ** (-K), b, hurst)

    @classmethod
    def critical(cls, b: int, hurst: float) -> WWParams:
        """Exactly critical parameters, alpha = b**-H."""
        return cls(float(b) ** (-hurst), b, hurst)

    @property
    def K(self) -> float:
        return min(1.0, -math.log(self.alpha) / math.log(self.b))

    @property
    def p(self) -> float:
        return 1.0 / min(self.hurst, self.K)

    @property
    def regime(self) -> Regime:
        diff = self.hurst - self.K
        if abs(diff) < CRITICAL_TOL:
            return Regime.CRITICAL
        return Regime.HURST_WINS if diff < 0 else Regime.CONVOLUTION_WINS


def frac_index(k: int, n: int, grid: BadicGrid) -> int:
    """Index j with j / b**N = frac(b**n * k / b**N), in exact integer arithmetic."""
    if not 0 <= k <= grid.size:
        raise ValueError(f"index {k} outside 0..{grid.size}")
    if n < 0:
        raise ValueError("level must be nonnegative")
    m = grid.size
    return (k % m) * pow(grid.base, n, m) % m


def shift_indices(k: np.ndarray, grid: BadicGrid) -> np.ndarray:
    """Vectorised one-step shift k -> (k * b) mod b**N."""
    return (np.asarray(k, dtype=np.int64) * grid.base) % grid.size


def frac_indices(k: np.ndarray, n: int, grid: BadicGrid) -> np.ndarray:
    """Vectorised :func:`frac_index`; multiplies by b one step at a time."""
    out = np.asarray(k, dtype=np.int64) % grid.size
    for _ in range(min(n, grid.depth)):
        out = shift_indices(out, grid)
    if n >= grid.depth:
        out = np.zeros_like(out)
    return out


@dataclass(frozen=True, eq=False)
class GridPath:
    """A real function sampled at every point of a :class:`BadicGrid`."""

    grid: BadicGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != self.grid.point_count:
            raise ValueError(
                f"expected {self.grid.point_count} values for {self.grid}, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: BadicGrid, fn) -> GridPath:
        return cls(grid, fn(grid.times()))

    def __len__(self):
        return self.grid.point_count

    def __add__(self, other: GridPath) -> GridPath:
        if other.grid != self.grid:
            raise ValueError("paths live on different grids")
        return GridPath(self.grid, self.values + other.values)

    def scaled(self, c: float) -> GridPath:
        return GridPath(self.grid, c * self.values)

    def __eq__(self, other):
        if not isinstance(other, GridPath):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)

    def to_csv(self, path) -> None:
        write_csv(self, path)

    def to_binary(self, path) -> None:
        write_binary(self, path)


def dyadic_refine(path: GridPath, target_depth: int) -> GridPath:
    """Restrict ``path`` to the coarser grid of depth ``target_depth``."""
    depth = path.grid.depth
    if target_depth > depth:
        raise ValueError(f"target depth {target_depth} exceeds path depth {depth}")
    if target_depth < 0:
        raise ValueError("target depth must be nonnegative")
    step = path.grid.base ** (depth - target_depth)
    return GridPath(path.grid.coarsen(target_depth), path.values[::step])


def write_csv(path: GridPath, dest) -> None:
    n = path.grid.size
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "value"])
        for k, v in enumerate(path.values):
            w.writerow([format(k / n, ".17g"), repr(float(v))])


def read_csv(src, base: int) -> GridPath:
    """Read a two-column (t, value) CSV written on a b-adic grid of base ``base``."""
    ts, vs = read_two_column_csv(src)
    size = len(vs) - 1
    depth = round(math.log(size, base)) if size > 0 else 0
    grid = BadicGrid(base, depth)
    if grid.point_count != len(vs):
        raise ValueError(f"{len(vs)} rows do not form a base-{base} grid")
    if not np.allclose(ts, grid.times(), rtol=0, atol=1e-15):
        raise ValueError("t column does not match the b-adic grid points")
    return GridPath(grid, vs)


def read_two_column_csv(src) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    with open(src, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise
                continue  # header line
    if not rows:
        raise ValueError(f"no numeric rows in {src}")
    arr = np.array(rows, dtype=np.float64)
    return arr[:, 0], arr[:, 1]


def write_binary(path: GridPath, dest) -> None:
    """Header (magic, b, N) followed by little-endian float64 values."""
    with open(dest, "wb") as fh:
        fh.write(_BINARY_HEADER.pack(_BINARY_MAGIC, path.grid.base, path.grid.depth))
        fh.write(path.values.astype("<f8").tobytes())


def read_binary(src) -> GridPath:
    data = Path(src).read_bytes()
    magic, base, depth = _BINARY_HEADER.unpack_from(data)
    if magic != _BINARY_MAGIC:
        raise ValueError(f"{src}: not a grid path container")
    grid = BadicGrid(base, depth)
    values = np.frombuffer(data, dtype="<f8", offset=_BINARY_HEADER.size)
    return GridPath(grid, values)


def write_matrix_binary(matrix: np.ndarray, grid: BadicGrid, dest) -> None:
    """Square matrix indexed by grid points, same header as path containers."""
    matrix = np.asarray(matrix, dtype="<f8")
    with open(dest, "wb") as fh:
        fh.write(_BINARY_HEADER.pack(_BINARY_MAGIC, grid.base, grid.depth))
        fh.write(struct.pack("<II", *matrix.shape))
        fh.write(matrix.tobytes())


def read_matrix_binary(src) -> tuple[np.ndarray, BadicGrid]:
    data = Path(src).read_bytes()
    magic, base, depth = _BINARY_HEADER.unpack_from(data)
    if magic != _BINARY_MAGIC:
        raise ValueError(f"{src}: not a grid container")
    rows, cols = struct.unpack_from("<II", data, _BINARY_HEADER.size)
    offset = _BINARY_HEADER.size + 8
    m = np.frombuffer(data, dtype="<f8", offset=offset).reshape(rows, cols)
    return m, BadicGrid(base, depth)


def badic_depth(t, b: int) -> int | None:
    """Smallest d with b**d * t an integer, or None if t is not b-adic."""
    den = Fraction(t).denominator
    d, power = 0, 1
    # den | b**d can only happen for d <= log2(den)
    while power % den:
        d += 1
        power *= b
        if d > den.bit_length():
            return None
    return d
