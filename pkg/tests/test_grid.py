import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from recdyn.errors import ValidationError
from recdyn.grid import (
    FiniteMap,
    GridSpec,
    TorusPoint,
    discretize,
    dump_finite_map,
    load_finite_map,
    project,
    project_batch,
)
from recdyn.rounding import round_half_down


def test_round_half_down_pinned_values():
    assert round_half_down(3.5) == 3
    assert round_half_down(0.5) == 0
    assert round_half_down(-2.5) == -3
    assert round_half_down(2.44) == 2
    assert round_half_down(3.52) == 4
    assert round_half_down(0.0) == 0


def test_round_half_down_vectorized():
    out = round_half_down(np.array([3.5, 0.5, -2.5, 2.44, 3.52]))
    assert out.dtype == np.int64
    assert out.tolist() == [3, 0, -3, 2, 4]


@given(st.floats(min_value=-1e12, max_value=1e12))
def test_round_half_down_half_open_bracket(x):
    k = round_half_down(x)
    # snapping moves x by at most 2^-40, so allow that much slack at the ends
    assert k - 0.5 - 2e-12 * max(1.0, abs(x)) < x
    assert x <= k + 0.5 + 2e-12 * max(1.0, abs(x))


def test_round_half_down_snaps_near_half_integers():
    # just below a half-integer within the snap window still rounds as the
    # half-integer itself would
    eps = 2.0 ** -44
    assert round_half_down(3.5 - eps) == 3
    assert round_half_down(3.5 + eps) == 3
    assert round_half_down(2.5 + eps) == 2


def test_grid_spec_size_and_guard():
    spec = GridSpec(2, 10)
    assert spec.size == 100
    with pytest.raises(ValidationError):
        GridSpec(3, 2 ** 20)  # 2^60 cells
    with pytest.raises(ValidationError):
        GridSpec(0, 10)
    with pytest.raises(ValidationError):
        GridSpec(2, 0)


def test_flat_index_round_trip():
    spec = GridSpec(3, 7)
    for flat in (0, 1, 6, 7, 48, 342):
        multi = spec.flat_to_multi(flat)
        assert spec.multi_to_flat(multi) == flat


def test_flat_index_is_row_major():
    spec = GridSpec(2, 5)
    assert spec.multi_to_flat((0, 0)) == 0
    assert spec.multi_to_flat((0, 1)) == 1
    assert spec.multi_to_flat((1, 0)) == 5
    assert spec.multi_to_flat((2, 3)) == 13


def test_torus_point_reduces_mod_one():
    p = TorusPoint((1.25, -0.25))
    assert np.allclose(p.coords, [0.25, 0.75])


@given(st.integers(2, 40), st.lists(st.floats(0, 1, exclude_max=True),
                                    min_size=1, max_size=1))
@settings(max_examples=60)
def test_project_returns_nearest_grid_point(N, xs):
    x = xs[0]
    spec = GridSpec(1, N)
    idx = project(spec, TorusPoint((x,)))
    grid = np.arange(N) / N
    d = np.abs(grid - x)
    dist = np.minimum(d, 1.0 - d)
    best = dist.min()
    chosen = dist[idx]
    assert chosen <= best + 1e-12
    assert chosen <= 0.5 / N + 1e-12


def test_project_tie_goes_to_lower_index():
    # x exactly between grid points 1/4 and 2/4
    spec = GridSpec(1, 4)
    assert project(spec, TorusPoint((0.375,))) == 1


def test_project_batch_matches_single():
    spec = GridSpec(2, 9)
    rng = np.random.default_rng(0)
    pts = rng.random((40, 2))
    flat = project_batch(spec, pts)
    for i in range(40):
        assert flat[i] == project(spec, TorusPoint(tuple(pts[i])))


def test_project_wraps_top_edge():
    # points just under 1 round to grid index N, which wraps to 0
    spec = GridSpec(1, 8)
    assert project(spec, TorusPoint((1.0 - 1e-9,))) == 0


def test_discretize_translation_permutation_is_permutation():
    spec = GridSpec(2, 16)

    def f(pts):
        out = pts[:, ::-1].copy()  # coordinate swap
        out[:, 0] += 3.0 / 16.0    # integer-cell translation
        return out

    fm = discretize(f, spec)
    assert sorted(fm.succ.tolist()) == list(range(spec.size))


def test_discretize_identity():
    spec = GridSpec(2, 12)
    fm = discretize(lambda p: p, spec)
    assert np.array_equal(fm.succ, np.arange(spec.size))


def test_finite_map_validates_totality():
    spec = GridSpec(1, 4)
    with pytest.raises(ValidationError):
        FiniteMap(spec, np.array([0, 1, 2, 4], dtype=np.int64))
    with pytest.raises(ValidationError):
        FiniteMap(spec, np.array([0, 1, 2], dtype=np.int64))


def test_dump_load_round_trip(tmp_path):
    spec = GridSpec(2, 13)
    fm = discretize(lambda p: (p + 0.21) % 1.0, spec)
    path = tmp_path / "map.rdfm"
    dump_finite_map(fm, path)
    back = load_finite_map(path)
    assert back.spec.n == 2 and back.spec.N == 13
    assert np.array_equal(back.succ, fm.succ)
    raw = path.read_bytes()
    assert raw[:4] == b"RDFM"
