import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from dydbscan import HashFunction, InputError, LSHIndex, UsageError, compute_key, draw_hash_functions


def index_with(etas, eps=0.5):
    return LSHIndex([HashFunction(eps, e, i) for i, e in enumerate(etas)])


# ------------------------------------------------------------------ keys


def test_compute_key_direct_formula():
    f = HashFunction(0.5, 0.3)
    assert compute_key(f, [0.7, -0.3]) == (1, 0)


def test_compute_key_zero_vector():
    assert compute_key(HashFunction(0.5, 0.0), np.zeros(4)) == (0, 0, 0, 0)


def test_compute_key_negative_coordinates_floor():
    f = HashFunction(0.5, 0.0)
    assert compute_key(f, [-0.01, -1.0, -1.01]) == (-1, -1, -2)


def test_compute_key_errors():
    f = HashFunction(0.5, 0.1)
    with pytest.raises(UsageError):
        compute_key(f, [0.0, 1.0], d=3)
    with pytest.raises(InputError):
        compute_key(f, [0.0, np.nan])
    with pytest.raises(InputError):
        compute_key(f, [np.inf])
    with pytest.raises(InputError):
        compute_key(f, [1e300])


def test_hash_function_validation():
    with pytest.raises(UsageError):
        HashFunction(0.5, 1.0)  # eta must be < 2 eps
    with pytest.raises(UsageError):
        HashFunction(0.5, -0.1)
    with pytest.raises(UsageError):
        HashFunction(0.0, 0.0)


def test_draw_is_seeded_and_in_range():
    a = draw_hash_functions(50, 0.75, np.random.default_rng(4))
    b = draw_hash_functions(50, 0.75, np.random.default_rng(4))
    assert a == b
    assert all(0 <= f.eta < 1.5 for f in a)
    assert [f.function_index for f in a] == list(range(50))


def test_lemma_collision_implies_max_norm_bound_10k_pairs():
    rng = np.random.default_rng(0)
    for eps in (0.1, 0.75, 2.0):
        f = draw_hash_functions(1, eps, rng)[0]
        x = rng.uniform(-20, 20, (10_000, 5))
        y = x + rng.uniform(-2.5 * eps, 2.5 * eps, (10_000, 5))
        same = np.all(f.keys(x) == f.keys(y), axis=1)
        assert same.any()
        assert np.abs(x - y).max(axis=1)[same].max() <= 2 * eps


@settings(max_examples=200, deadline=None)
@given(
    x=arrays(np.float64, 3, elements=st.floats(-1e3, 1e3)),
    y=arrays(np.float64, 3, elements=st.floats(-1e3, 1e3)),
    eta_frac=st.floats(0, 1, exclude_max=True),
    eps=st.floats(0.01, 10),
)
def test_property_collision_implies_close(x, y, eta_frac, eps):
    f = HashFunction(eps, eta_frac * 2 * eps)
    if compute_key(f, x) == compute_key(f, y):
        assert np.abs(x - y).max() <= 2 * eps


# ------------------------------------------------------------------ index


def test_first_insertion_sizes():
    idx = index_with([0.1, 0.2, 0.3])
    out = idx.insert_point("a", [0.0, 0.0])
    assert [size for _, size in out] == [1, 1, 1]


def test_identical_points_share_every_bucket():
    idx = index_with([0.1, 0.2, 0.3])
    idx.insert_point("a", [0.4, 0.4])
    out = idx.insert_point("b", [0.4, 0.4])
    assert [size for _, size in out] == [2, 2, 2]


def test_far_points_share_no_bucket():
    idx = index_with([0.1, 0.7, 0.99])
    idx.insert_point("a", [0.0, 0.0])
    out = idx.insert_point("b", [0.0, 1.01])  # max-norm gap > 2 eps = 1.0
    assert [size for _, size in out] == [1, 1, 1]


def test_duplicate_id_and_dimension():
    idx = index_with([0.0])
    idx.insert_point(1, [0.0, 0.0])
    with pytest.raises(UsageError):
        idx.insert_point(1, [0.0, 0.0])
    with pytest.raises(InputError):
        idx.insert_point(2, [0.0])


def test_insert_remove_leaves_tables_empty():
    idx = index_with([0.1, 0.2])
    idx.insert_point("a", [3.0])
    idx.remove_point("a")
    assert idx.bucket_count() == 0
    assert len(idx) == 0


def test_remove_reports_sizes():
    idx = index_with([0.0, 0.3])
    for i in range(5):
        idx.insert_point(i, [0.1 + 0.01 * i])
    assert [s for _, s in idx.remove_point(0)] == [4, 4]
    assert [s for _, s in idx.remove_point(1)] == [3, 3]
    with pytest.raises(UsageError):
        idx.remove_point(0)


def test_bucket_partition_per_function():
    rng = np.random.default_rng(1)
    idx = LSHIndex(draw_hash_functions(4, 0.3, rng))
    for i in range(300):
        idx.insert_point(i, rng.normal(size=2))
    for i in range(4):
        members = [m for b in idx.buckets(i) for m in b.members]
        assert sorted(members) == list(range(300))


def core_bucket(indices_core):
    """One bucket holding ids 0..9 (idx = id); flag the given ids core."""
    idx = index_with([0.0])
    for i in range(10):
        idx.insert_point(i, [0.1])
    for i in indices_core:
        idx.set_core_flag(i, True)
    return idx


def test_core_neighbors_examples():
    idx = core_bucket([3, 7, 9])
    assert idx.core_neighbors(0, 7) == (3, 9)
    assert idx.core_neighbors(0, 3) == (None, 7)
    assert idx.core_neighbors(0, 5) == (3, 7)  # non-core query point
    solo = core_bucket([4])
    assert solo.core_neighbors(0, 4) == (None, None)
    with pytest.raises(UsageError):
        idx.core_neighbors(0, 42)


def test_set_core_flag_involution_and_idempotence():
    idx = core_bucket([2, 8])
    before = list(idx.bucket(0, 2).core)
    idx.set_core_flag(5, True)
    idx.set_core_flag(5, True)
    assert list(idx.bucket(0, 2).core) == [2, 5, 8]
    assert idx.core_neighbors(0, 2) == (None, 5)
    assert idx.core_neighbors(0, 8) == (5, None)
    idx.set_core_flag(5, False)
    assert list(idx.bucket(0, 2).core) == before
    with pytest.raises(UsageError):
        idx.set_core_flag("zz", True)


def test_core_neighbors_against_linear_scan():
    rng = np.random.default_rng(5)
    idx = LSHIndex(draw_hash_functions(3, 0.5, rng))
    for i in range(200):
        idx.insert_point(i, rng.normal(size=1))
    for i in rng.choice(200, 80, replace=False):
        idx.set_core_flag(int(i), True)
    for i in range(3):
        for p in range(200):
            b = idx.bucket(i, p)
            cores = sorted(idx.idx(m) for m in b.members if idx.is_core(m))
            below = [c for c in cores if c < idx.idx(p)]
            above = [c for c in cores if c > idx.idx(p)]
            assert idx.core_neighbors(i, p) == (below[-1] if below else None, above[0] if above else None)


def test_any_core_in_buckets_rules():
    # grid side 1.0; offsets 0.5 put a boundary between 0.45 and 0.55, offset 0 does not
    idx = index_with([0.5, 0.5, 0.0])
    idx.insert_point("p", [0.45])
    idx.insert_point("q", [0.55])
    assert idx.any_core_in_buckets("p") is None
    idx.set_core_flag("q", True)
    assert idx.any_core_in_buckets("p") == (2, "q")


def test_any_core_prefers_lowest_function_then_smallest_idx():
    idx = index_with([0.0, 0.0])
    for name in ("p", "a", "b"):
        idx.insert_point(name, [0.1])
    idx.set_core_flag("b", True)
    idx.set_core_flag("a", True)
    assert idx.any_core_in_buckets("p") == (0, "a")
