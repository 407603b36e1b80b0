import math
import pytest
import numpy as np
from atvprune.numerics import (
    Rng,
    as_dense,
    matmul,
    column_l2_norms,
    column_sq_sums,
    cosine_distance,
    pairwise_cosine_distance,
    rowwise_cosine_distance,
)
from atvprune.errors import ValidationError

SEED_42 = [
    0xBDD732262FEB6E95,
    0x28EFE333B266F103,
    0x47526757130F9F52,
    0x581CE1FF0E4AE394,
    0x09BC585A244823F2,
    0xDE4431FA3C80DB06,
    0x37E9671C45376D5D,
    0xCCF635EE9E9E2FA4,
    0x5705B8770B3D7DD5,
    0x9E54D738297F77AE,
    0x3474724A775B19BF,
    0x7E348A0E451650BE,
    0x836DED897F3E46E6,
    0x851F977347ED6DB7,
    0xAA47E31C02E78EDC,
    0x341452C54D7C33F2,
]


def test_rng_golden_stream():
    assert [int(v) for v in Rng(42).next_u64(16)] == SEED_42
    assert [int(v) for v in Rng(0).next_u64(2)] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]


def test_rng_stream_is_split_invariant():
    rng = Rng(42)
    pieces = np.concatenate([rng.next_u64(5), rng.next_u64(11)])
    assert [int(v) for v in pieces] == SEED_42


def test_rng_spawn_ignores_parent_draws():
    a = Rng(9)
    b = Rng(9)
    b.next_u64(100)
    assert np.array_equal(a.spawn("s1", 2).next_u64(4), b.spawn("s1", 2).next_u64(4))
    assert not np.array_equal(a.spawn("s1", 2).next_u64(4), a.spawn("s1", 3).next_u64(4))


def test_rng_uniform_and_normal_ranges():
    rng = Rng(1)
    u = rng.random(10000)
    assert u.min() >= 0.0 and u.max() < 1.0
    z = rng.normal(20000)
    assert abs(z.mean()) < 0.05
    assert abs(z.std() - 1.0) < 0.05
    assert rng.normal((3, 5), scale=2.0).shape == (3, 5)


def test_sample_without_replacement():
    rng = Rng(5)
    for n, k in [(10, 3), (10, 10), (10, 0), (5, 9)]:
        picks = rng.sample_without_replacement(n, k)
        assert picks.size == min(k, n)
        assert np.all(np.diff(picks) > 0)
        assert np.all((picks >= 0) & (picks < n))


def test_as_dense_validation():
    assert as_dense([[1, 2], [3, 4]]).dtype == np.float32
    with pytest.raises(ValidationError) as e:
        as_dense([1.0, 2.0])
    assert e.value.code == "dimension-mismatch"
    with pytest.raises(ValidationError) as e:
        as_dense([[1.0, float("nan")]])
    assert e.value.code == "non-finite"


def test_matmul():
    rng = Rng(2)
    a = rng.normal((5, 7)).astype(np.float32)
    b = rng.normal((7, 3)).astype(np.float32)
    out = matmul(a, b)
    assert out.dtype == np.float32
    assert np.allclose(out, a.astype(np.float64) @ b.astype(np.float64), atol=1e-5)
    with pytest.raises(ValidationError) as e:
        matmul(a, a)
    assert e.value.code == "dimension-mismatch"


def test_cosine_distance_values(run_context):
    assert cosine_distance([1.0, 0.0], [2.0, 0.0]) == pytest.approx(0.0)
    assert cosine_distance([1.0, 0.0], [-3.0, 0.0]) == pytest.approx(2.0)
    assert cosine_distance([1.0, 0.0], [0.0, 5.0]) == pytest.approx(1.0)
    assert run_context.flags.count("degenerate-vector") == 0
    assert cosine_distance([0.0, 0.0], [1.0, 1.0]) == 0.0
    assert run_context.flags.count("degenerate-vector") == 1
    with pytest.raises(ValidationError):
        cosine_distance([1.0], [1.0, 2.0])


def test_rowwise_and_pairwise_agree_with_scalar():
    rng = Rng(4)
    a = rng.normal((6, 5))
    b = rng.normal((6, 5))
    rows = rowwise_cosine_distance(a, b)
    for i in range(6):
        assert rows[i] == pytest.approx(cosine_distance(a[i], b[i]), abs=1e-12)
    pairs = pairwise_cosine_distance(a)
    assert np.allclose(pairs, pairs.T)
    assert np.all(np.diag(pairs) == 0.0)
    assert pairs[1, 4] == pytest.approx(cosine_distance(a[1], a[4]), abs=1e-12)


def test_degenerate_rows_are_zero_distance(run_context):
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    pairs = pairwise_cosine_distance(x)
    assert np.all(pairs[0] == 0.0) and np.all(pairs[:, 0] == 0.0)
    assert pairs[1, 2] == pytest.approx(1.0)
    assert run_context.flags.count("degenerate-vector") == 1


def test_column_norms_match_numpy():
    rng = Rng(6)
    x = rng.normal((12, 4)).astype(np.float32)
    rows = [7, 1, 3, 3]
    expected = np.linalg.norm(x[[1, 3, 7]].astype(np.float64), axis=0)
    assert np.allclose(column_l2_norms(x, rows), expected, rtol=1e-12)
    assert np.allclose(column_l2_norms(x), np.linalg.norm(x.astype(np.float64), axis=0))
    assert np.allclose(column_sq_sums(x, np.array([0, 2])), (x[[0, 2]].astype(np.float64) ** 2).sum(0))


def test_column_norms_empty_subset(run_context):
    x = np.ones((3, 4), dtype=np.float32)
    assert np.array_equal(column_l2_norms(x, []), np.zeros(4))
    assert run_context.flags.count("empty-calibration") == 1
    with pytest.raises(ValidationError) as e:
        column_l2_norms(x, [3])
    assert e.value.code == "index-out-of-range"


def test_norm_law_scaling():
    x = Rng(8).normal((10, 3))
    assert np.allclose(column_l2_norms(2.0 * x), 2.0 * column_l2_norms(x))
    assert math.isclose(float(column_l2_norms(x)[0] ** 2), float(column_sq_sums(x)[0]), rel_tol=1e-12)
