"""Lattices and window densities behind the mean rate of injectivity.

A sequence A_1..A_k of invertible n x n matrices defines two block lattices:
the (k+1)-block form with A_1..A_k on the diagonal, -Id above it and Id in the
last block, and the condensed k-block form with A_k closing the chain.  The
mean rate of injectivity of the sequence is the density of the union of
half-open unit cubes centered at the condensed lattice, estimated here by
Monte Carlo over the fundamental domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import NumericalGuardError, ValidationError
from .lindisc import MatrixSeq, opnorm_inf
from .rounding import round_half_down

_MEMBER_CANDIDATE_LIMIT = 10 ** 7


@dataclass
class Window:
    """The half-open cube (-1/2, 1/2]^dim."""

    dim: int

    def contains(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return ((pts > -0.5) & (pts <= 0.5)).all(axis=1)


@dataclass
class LatticeBasis:
    """Full-rank lattice B Z^dim with cached inverse and covolume."""

    dim: int
    basis: np.ndarray

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=np.float64)
        if self.basis.shape != (self.dim, self.dim):
            raise ValidationError("basis has wrong shape")
        det = float(np.linalg.det(self.basis))
        if abs(det) <= 1e-12:
            raise ValidationError("basis is numerically singular")
        self.covolume = abs(det)
        self.inv = np.linalg.inv(self.basis)
        if np.abs(self.inv @ self.basis - np.eye(self.dim)).max() > 1e-9:
            raise ValidationError("basis inverse fails round-trip check")


def build_lattices(seq: MatrixSeq) -> tuple[LatticeBasis, LatticeBasis]:
    """(full (k+1)-block basis, condensed k-block basis) for the sequence."""
    n, k = seq.n, seq.k
    full = np.zeros((n * (k + 1), n * (k + 1)))
    for i in range(k):
        full[i * n : (i + 1) * n, i * n : (i + 1) * n] = seq.mats[i]
        full[i * n : (i + 1) * n, (i + 1) * n : (i + 2) * n] = -np.eye(n)
    full[k * n :, k * n :] = np.eye(n)
    cond = np.zeros((n * k, n * k))
    for i in range(k):
        cond[i * n : (i + 1) * n, i * n : (i + 1) * n] = seq.mats[i]
        if i + 1 < k:
            cond[i * n : (i + 1) * n, (i + 1) * n : (i + 2) * n] = -np.eye(n)
    return LatticeBasis(n * (k + 1), full), LatticeBasis(n * k, cond)


def condensed_inverse_blocks(seq: MatrixSeq) -> np.ndarray:
    """Explicit inverse of the condensed basis: block (i, j) is A_i^{-1}...A_j^{-1}."""
    n, k = seq.n, seq.k
    invs = [np.linalg.inv(m) for m in seq.mats]
    out = np.zeros((n * k, n * k))
    for i in range(k):
        acc = np.eye(n)
        for j in range(i, k):
            acc = acc @ invs[j]
            out[i * n : (i + 1) * n, j * n : (j + 1) * n] = acc
    return out


def member(lattice: LatticeBasis, window: Window, x) -> bool:
    """True iff x lies in (window + lattice), by enumeration near B^{-1}x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (lattice.dim,):
        raise ValidationError("probe point has wrong dimension")
    if window.dim != lattice.dim:
        raise ValidationError("window dimension does not match lattice")
    y = lattice.inv @ x
    r = int(np.ceil(opnorm_inf(lattice.inv) / 2.0)) + 1
    if (2 * r + 1) ** lattice.dim > _MEMBER_CANDIDATE_LIMIT:
        raise NumericalGuardError("membership enumeration box too large; basis ill-conditioned")
    base = np.rint(y).astype(np.int64)
    offsets = np.array(list(product(range(-r, r + 1), repeat=lattice.dim)), dtype=np.int64)
    cand = base[None, :] + offsets
    residual = x[None, :] - cand.astype(np.float64) @ lattice.basis.T
    return bool(window.contains(residual).any())


_OFFSET_LIMIT = 10 ** 5


def _offset_grid(inv_mat: np.ndarray) -> np.ndarray:
    """Integer offsets covering A^{-1}(c + W) around its rounded center."""
    half_widths = 0.5 * np.abs(inv_mat).sum(axis=1)
    radii = np.floor(half_widths + 0.5 + 1e-9).astype(int)
    count = np.prod(2 * radii.astype(np.float64) + 1)
    if count > _OFFSET_LIMIT:
        raise NumericalGuardError(
            "per-level offset enumeration too large; sequence ill-conditioned"
        )
    axes = [np.arange(-r, r + 1) for r in radii]
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1).astype(np.float64)


def _chain_alive(seq: MatrixSeq, U: np.ndarray, c_init: np.ndarray) -> np.ndarray:
    """Which samples admit a full solution of the block constraint chain.

    U[s, i] is the real offset of block variable i for sample s (the variable
    ranges over U[s, i] + Z^n).  Row i demands A_i var_i - next ∈ W - shift_i,
    with `next` the chosen value of variable i+1 (c_init for the last row).
    Processes rows last-to-first keeping, per sample, the frontier of viable
    variable values.
    """
    S, k, n = U.shape
    mats = seq.mats
    invs = [np.linalg.inv(m) for m in mats]
    grids = [_offset_grid(inv) for inv in invs]
    sid = np.arange(S, dtype=np.int64)
    val = np.asarray(c_init, dtype=np.float64)
    if val.shape != (S, n):
        raise ValidationError("c_init has wrong shape")
    for i in range(k - 1, -1, -1):
        if sid.size == 0:
            break
        A, Ainv, offsets = mats[i], invs[i], grids[i]
        c = val - seq.shift(i)[None, :]
        u = U[sid, i]
        center = c @ Ainv.T - u
        base = np.rint(center)
        var = u[:, None, :] + base[:, None, :] + offsets[None, :, :]
        t = var @ A.T - c[:, None, :]
        ok = ((t > -0.5) & (t <= 0.5)).all(axis=2)
        rows, cols = np.nonzero(ok)
        sid = sid[rows]
        val = var[rows, cols]
        if sid.size > 8 * S:
            sid, val = _dedupe_frontier(sid, val, U[:, i])
    alive = np.zeros(S, dtype=bool)
    alive[sid] = True
    return alive


def _dedupe_frontier(sid: np.ndarray, val: np.ndarray, u_block: np.ndarray) -> tuple:
    """Drop duplicate (sample, value) rows; values differ from u by exact integers."""
    m = np.rint(val - u_block[sid]).astype(np.int64)
    key = sid
    for j in range(m.shape[1]):
        key = key * 16384 + (m[:, j] + 8192)
    _, keep = np.unique(key, return_index=True)
    return sid[keep], val[keep]


@dataclass
class MeanRateResult:
    estimate: float
    std_error: float
    samples: int
    hits: int
    covolume: float
    seed: int


def _covolume(seq: MatrixSeq) -> float:
    out = 1.0
    for m in seq.mats:
        out *= abs(float(np.linalg.det(m)))
    return out


def mean_rate(
    seq: MatrixSeq, samples: int, seed: int, chunk: int = 200_000
) -> MeanRateResult:
    """Monte Carlo density of the cube union over the condensed lattice.

    Samples x = B u with u uniform on [0,1)^{nk}, i.e. uniform on a fundamental
    domain, and counts membership; the hit fraction is the density.
    """
    if samples < 1:
        raise ValidationError("need at least one sample")
    rng = np.random.default_rng(seed)
    n, k = seq.n, seq.k
    hits = 0
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        U = rng.random((c, k, n))
        alive = _chain_alive(seq, U, np.zeros((c, n)))
        hits += int(alive.sum())
        done += c
    est = hits / samples
    se = float(np.sqrt(est * (1.0 - est) / samples))
    return MeanRateResult(est, se, samples, hits, _covolume(seq), seed)


def mean_rate_alt(
    seq: MatrixSeq, samples: int, seed: int, chunk: int = 200_000
) -> MeanRateResult:
    """Same density through the full (k+1)-block lattice and window.

    The extra block variable has no successor coupling, so its in-window
    representative is unique and acts as a uniform jitter of the closing
    window; agreement with `mean_rate` is an exact identity, not an
    approximation, which makes the pair a strong cross-check.
    """
    if samples < 1:
        raise ValidationError("need at least one sample")
    rng = np.random.default_rng(seed)
    n, k = seq.n, seq.k
    hits = 0
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        U = rng.random((c, k + 1, n))
        u_last = U[:, k, :]
        w = u_last - round_half_down(u_last)
        alive = _chain_alive(seq, U[:, :k, :], w)
        hits += int(alive.sum())
        done += c
    est = hits / samples
    se = float(np.sqrt(est * (1.0 - est) / samples))
    return MeanRateResult(est, se, samples, hits, _covolume(seq), seed)


def member_batch(seq: MatrixSeq, X: np.ndarray) -> np.ndarray:
    """Membership of arbitrary probe points in (cube union + condensed lattice)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, k = seq.n, seq.k
    if X.shape[1] != n * k:
        raise ValidationError("probe points have wrong dimension")
    inv = condensed_inverse_blocks(seq)
    U = (X @ inv.T).reshape(X.shape[0], k, n)
    return _chain_alive(seq, U, np.zeros((X.shape[0], n)))


@dataclass
class OverlapResult:
    density: float
    overlap_density: float
    lower_bound: float
    sigma: float
    samples: int
    qualified: bool


def overlap_inequality_check(
    seq: MatrixSeq, v: np.ndarray, samples: int, seed: int, chunk: int = 200_000
) -> OverlapResult:
    """Estimate D(cubes+lattice) and D(overlap with the v-translate).

    For a covolume-1 lattice with density >= 1/2 the overlap density is at
    least 2D - 1 for every translation v.  `qualified` records whether the
    density cleared 1/2 by three standard errors, so callers can skip
    non-qualifying draws.
    """
    rng = np.random.default_rng(seed)
    n, k = seq.n, seq.k
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n * k,):
        raise ValidationError("translation vector has wrong dimension")
    inv = condensed_inverse_blocks(seq)
    shift_blocks = (inv @ v).reshape(k, n)
    hits_d = 0
    hits_int = 0
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        U = rng.random((c, k, n))
        alive = _chain_alive(seq, U, np.zeros((c, n)))
        alive2 = _chain_alive(seq, U - shift_blocks[None, :, :], np.zeros((c, n)))
        hits_d += int(alive.sum())
        hits_int += int((alive & alive2).sum())
        done += c
    d = hits_d / samples
    d_int = hits_int / samples
    sigma = float(np.sqrt(max(d * (1 - d), d_int * (1 - d_int)) / samples)) or 1.0 / samples
    return OverlapResult(
        density=d,
        overlap_density=d_int,
        lower_bound=2.0 * d - 1.0,
        sigma=sigma,
        samples=samples,
        qualified=d >= 0.5 + 3.0 * sigma,
    )
