"""Uniform grids on the torus T^n and discretization of maps to finite maps.

The order-N grid consists of the N^n points with coordinates (i_1/N, ..., i_n/N),
i_j in 0..N-1.  A multi-index is flattened row-major (last index fastest).
Projection sends a torus point to the nearest grid point, coordinatewise, with
the half-open tie rule of `rounding.round_half_down` applied to N*x_j.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rounding import round_half_down

_DUMP_MAGIC = b"RDFM"


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid E_N on T^n: n = dimension, N = points per side."""

    n: int
    N: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("grid dimension must be >= 1")
        if self.N < 1:
            raise ValidationError("grid order must be >= 1")
        if self.N ** self.n > 2 ** 52:
            raise ValidationError("grid has more than 2^52 points")

    @property
    def size(self) -> int:
        return self.N ** self.n

    def coords(self) -> np.ndarray:
        """All grid coordinates, shape (N^n, n), row-major flat order."""
        axes = np.arange(self.N, dtype=np.float64) / self.N
        grids = np.meshgrid(*([axes] * self.n), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def multi_to_flat(self, multi) -> int:
        multi = tuple(int(i) for i in multi)
        if len(multi) != self.n:
            raise ValidationError("multi-index has wrong length")
        flat = 0
        for i in multi:
            if not 0 <= i < self.N:
                raise ValidationError("multi-index entry out of range")
            flat = flat * self.N + i
        return flat

    def flat_to_multi(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.size:
            raise ValidationError("flat index out of range")
        multi = []
        for _ in range(self.n):
            multi.append(flat % self.N)
            flat //= self.N
        return tuple(reversed(multi))

    def point(self, flat: int) -> "TorusPoint":
        return TorusPoint(tuple(i / self.N for i in self.flat_to_multi(flat)))


@dataclass(frozen=True)
class TorusPoint:
    """A point of T^n with coordinates reduced to [0, 1)."""

    coords: tuple[float, ...]

    def __post_init__(self):
        reduced = tuple(float(c) % 1.0 for c in self.coords)
        # c % 1.0 lands in [0, 1) for every finite float
        object.__setattr__(self, "coords", reduced)

    @property
    def n(self) -> int:
        return len(self.coords)


def project_batch(spec: GridSpec, points: np.ndarray) -> np.ndarray:
    """Flat grid indices of the nearest grid points; input shape (m, n)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != spec.n:
        raise ValidationError("points must have shape (m, n)")
    idx = round_half_down(points * spec.N) % spec.N
    flat = idx[:, 0].copy()
    for j in range(1, spec.n):
        flat = flat * spec.N + idx[:, j]
    return flat


def project(spec: GridSpec, point: TorusPoint) -> int:
    """Flat index of the grid point nearest to `point` (half-open tie rule)."""
    if point.n != spec.n:
        raise ValidationError("point dimension does not match grid")
    return int(project_batch(spec, np.array([point.coords]))[0])


@dataclass
class FiniteMap:
    """A map of the order-N grid into itself, stored as a successor array."""

    spec: GridSpec
    succ: np.ndarray

    def __post_init__(self):
        self.succ = np.asarray(self.succ, dtype=np.int64)
        if self.succ.shape != (self.spec.size,):
            raise ValidationError("successor array has wrong length")
        if self.succ.size and (self.succ.min() < 0 or self.succ.max() >= self.spec.size):
            raise ValidationError("successor array has out-of-range entries")


def discretize(f, spec: GridSpec) -> FiniteMap:
    """P_N after f, restricted to the grid.  f maps (m, n) arrays to (m, n) arrays."""
    images = np.asarray(f(spec.coords()), dtype=np.float64)
    if images.shape != (spec.size, spec.n):
        raise ValidationError("map output has wrong shape")
    return FiniteMap(spec, project_batch(spec, images))


def dump_finite_map(fm: FiniteMap, path) -> None:
    """Binary dump: magic 'RDFM', u32 n, u64 N, then N^n little-endian u64 successors."""
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<IQ", fm.spec.n, fm.spec.N))
        fh.write(fm.succ.astype("<u8").tobytes())


def load_finite_map(path) -> FiniteMap:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _DUMP_MAGIC:
            raise ValidationError("not a finite-map dump")
        n, N = struct.unpack("<IQ", fh.read(12))
        spec = GridSpec(n=int(n), N=int(N))
        succ = np.frombuffer(fh.read(8 * spec.size), dtype="<u8").astype(np.int64)
    return FiniteMap(spec, succ)
