"""Discretizations of linear and affine maps of R^n acting on Z^n.

A matrix A (plus optional shift v) acts on integer points by x -> P(Ax + v)
with P the coordinatewise half-open rounding.  Composing a sequence of such
maps and counting surviving points inside a ball measures the rate of
injectivity of the sequence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalGuardError, ValidationError
from .rounding import round_half_down

# Coordinates beyond this magnitude lose integer resolution in doubles.
_COORD_LIMIT = 2.0 ** 52
_MIN_DET = 1e-12
_MIN_MEASURE_RADIUS = 10


def opnorm_inf(mat: np.ndarray) -> float:
    """Operator norm for the sup norm: max absolute row sum."""
    return float(np.abs(np.asarray(mat, dtype=np.float64)).sum(axis=1).max())


@dataclass(frozen=True)
class MatrixSeq:
    """A finite sequence of invertible matrices A_1..A_k with optional shifts.

    mats[i] is applied i-th (A_1 first).  When `conservative` is set every
    determinant must be 1 up to 1e-9.
    """

    n: int
    mats: tuple
    shifts: tuple | None = None
    conservative: bool = False

    def __post_init__(self):
        mats = tuple(np.array(m, dtype=np.float64) for m in self.mats)
        if not mats:
            raise ValidationError("matrix sequence is empty")
        for m in mats:
            if m.shape != (self.n, self.n):
                raise ValidationError("matrix has wrong shape")
            det = float(np.linalg.det(m))
            if abs(det) <= _MIN_DET:
                raise ValidationError("matrix is numerically singular")
            if self.conservative and abs(abs(det) - 1.0) > 1e-9:
                raise ValidationError("sequence declared conservative but |det| != 1")
        object.__setattr__(self, "mats", mats)
        if self.shifts is not None:
            shifts = tuple(np.array(s, dtype=np.float64) for s in self.shifts)
            if len(shifts) != len(mats):
                raise ValidationError("need one shift per matrix")
            for s in shifts:
                if s.shape != (self.n,):
                    raise ValidationError("shift has wrong shape")
            object.__setattr__(self, "shifts", shifts)

    @property
    def k(self) -> int:
        return len(self.mats)

    def shift(self, i: int) -> np.ndarray:
        if self.shifts is None:
            return np.zeros(self.n)
        return self.shifts[i]

    def prefix(self, j: int) -> "MatrixSeq":
        return MatrixSeq(
            self.n,
            self.mats[:j],
            None if self.shifts is None else self.shifts[:j],
            self.conservative,
        )


@dataclass
class PointSet:
    """Deduplicated integer points produced by an image computation."""

    n: int
    points: np.ndarray  # (m, n) int64
    radius: float  # radius of the generating input ball


def hat_apply(mat, shift, points) -> np.ndarray:
    """P(A x + v) for an array of integer points, shape (m, n)."""
    mat = np.asarray(mat, dtype=np.float64)
    points = np.asarray(points)
    real = points.astype(np.float64) @ mat.T
    if shift is not None:
        real = real + np.asarray(shift, dtype=np.float64)
    if real.size and np.abs(real).max() >= _COORD_LIMIT:
        raise NumericalGuardError("image coordinates exceed 2^52; integer precision lost")
    return round_half_down(real)


def _dedupe(points: np.ndarray) -> np.ndarray:
    """Unique rows; packs coordinate pairs into 64-bit keys when they fit."""
    if points.shape[0] == 0:
        return points
    span = max(abs(int(points.min())), abs(int(points.max()))) + 1
    bits = int(span).bit_length() + 1
    if points.shape[1] * bits <= 63:
        keys = np.zeros(points.shape[0], dtype=np.int64)
        for j in range(points.shape[1]):
            keys = (keys << bits) | (points[:, j] + span)
        keys = np.unique(keys)
        out = np.empty((keys.size, points.shape[1]), dtype=np.int64)
        mask = (1 << bits) - 1
        for j in range(points.shape[1] - 1, -1, -1):
            out[:, j] = (keys & mask) - span
            keys >>= bits
        return out
    return np.unique(points, axis=0)


def integer_ball(n: int, R: float) -> np.ndarray:
    """Z^n intersected with the closed sup-norm ball of radius R."""
    if R < 0:
        raise ValidationError("radius must be >= 0")
    lo, hi = int(np.ceil(-R)), int(np.floor(R))
    axis = np.arange(lo, hi + 1, dtype=np.int64)
    if len(axis) ** n > 4e8:
        raise NumericalGuardError("input ball too large to enumerate")
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def image_stages(seq: MatrixSeq, R: float) -> list[PointSet]:
    """Images of Z^n∩B_R under each prefix of the hat-composition, deduplicated."""
    points = integer_ball(seq.n, R)
    stages = []
    for i in range(seq.k):
        points = _dedupe(hat_apply(seq.mats[i], seq.shift(i), points))
        stages.append(PointSet(seq.n, points, R))
    return stages


def image_set(seq: MatrixSeq, R: float) -> PointSet:
    """Image of Z^n∩B_R under the full hat-composition."""
    return image_stages(seq, R)[-1]


def ball_count(points: np.ndarray, R: float) -> int:
    if points.shape[0] == 0:
        return 0
    return int((np.abs(points) <= R).all(axis=1).sum())


def _shrink_radius(seq: MatrixSeq, R: float) -> float:
    """Output radius R' such that inputs in B_R produce every true image point in B_R'.

    Any image point y of the full integer lattice satisfies y = Mx + w + e with
    M the matrix product, w the accumulated shift, and |e| bounded by the
    rounding errors amplified through the remaining stages; solving for x gives
    the input radius needed to realize y.
    """
    prod = np.eye(seq.n)
    for m in seq.mats:
        prod = m @ prod
    inv_norm = opnorm_inf(np.linalg.inv(prod))
    total_shift = np.zeros(seq.n)
    for i in range(seq.k):
        total_shift = seq.mats[i] @ total_shift + seq.shift(i)
    # rounding error of stage i is at most 1/2, then passes through A_{i+1}..A_k
    rounding_slack = 0.0
    for i in range(seq.k):
        amplify = 1.0
        for j in range(i + 1, seq.k):
            amplify *= opnorm_inf(seq.mats[j])
        rounding_slack += 0.5 * amplify
    shift_norm = float(np.abs(total_shift).max()) if seq.n else 0.0
    return R / inv_norm - rounding_slack - shift_norm - 1.0


@dataclass
class BallRate:
    """Exact counting result for one sequence and one input radius."""

    rate: float
    R: float
    R_prime: float
    image_in_ball: int
    lattice_in_ball: int


def rate_injectivity_ball(seq: MatrixSeq, R: float) -> BallRate:
    """Card(image ∩ B_R') / Card(Z^n ∩ B_R') with R' shrunk to avoid boundary leakage."""
    return rate_injectivity_ball_prefixes(seq, R)[-1]


def rate_injectivity_ball_prefixes(seq: MatrixSeq, R: float) -> list[BallRate]:
    """Ball rates of every prefix A_1..A_j, sharing one image computation."""
    radii = [_shrink_radius(seq.prefix(j), R) for j in range(1, seq.k + 1)]
    for r in radii:
        if r < _MIN_MEASURE_RADIUS:
            raise NumericalGuardError(
                "output ball radius %.3g is below %d; increase R" % (r, _MIN_MEASURE_RADIUS)
            )
    stages = image_stages(seq, R)
    out = []
    for r, stage in zip(radii, stages):
        denom_side = 2 * int(np.floor(r)) + 1
        denom = denom_side ** seq.n
        hits = ball_count(stage.points, np.floor(r))
        out.append(BallRate(hits / denom, R, float(r), hits, denom))
    return out


def truncated_density(ps: PointSet) -> float:
    """Fraction of Z^n ∩ B_R (R the generating radius) present in ps."""
    side = 2 * int(np.floor(ps.radius)) + 1
    return ball_count(ps.points, np.floor(ps.radius)) / side ** ps.n


def render_image(ps: PointSet, path) -> None:
    """Binary PGM over Z^2 ∩ B_R, one pixel per point, black iff in ps."""
    if ps.n != 2:
        raise ValidationError("image rendering is 2-D only")
    R = int(np.floor(ps.radius))
    side = 2 * R + 1
    if side > 8192:
        raise ValidationError("image would exceed 8192 pixels per side")
    img = np.full((side, side), 255, dtype=np.uint8)
    pts = ps.points[(np.abs(ps.points) <= R).all(axis=1)]
    # row 0 is the top of the image: second coordinate +R
    rows = R - pts[:, 1]
    cols = pts[:, 0] + R
    img[rows, cols] = 0
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (side, side))
        fh.write(img.tobytes())


def sample_sl2(rng) -> np.ndarray:
    """One random SL_2 matrix R_theta D_t R_theta' with t ~ U[-1/2,1/2], angles ~ U[0,2pi]."""
    theta, theta2 = rng.uniform(0.0, 2.0 * np.pi, size=2)
    t = rng.uniform(-0.5, 0.5)

    def rot(a):
        return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])

    return rot(theta) @ np.diag([np.exp(t), np.exp(-t)]) @ rot(theta2)


def random_sl2_seq(k: int, seed: int, with_shifts: bool = False) -> MatrixSeq:
    """Seeded sequence of k independent SVD-form SL_2 matrices."""
    rng = np.random.default_rng(seed)
    mats = tuple(sample_sl2(rng) for _ in range(k))
    shifts = tuple(rng.uniform(-0.5, 0.5, size=2) for _ in range(k)) if with_shifts else None
    return MatrixSeq(2, mats, shifts, conservative=True)
