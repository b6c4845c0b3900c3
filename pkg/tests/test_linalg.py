import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ttring.linalg import (
    SvdConvergenceError,
    kron,
    qr_thin,
    svd,
    truncated_svd,
    truncation_rank,
)

from oracles import power_sigma_max, tail_rank


@pytest.mark.parametrize("shape", [(7, 3), (3, 7), (5, 5), (1, 4)])
def test_qr_thin(shape):
    m = np.random.default_rng(0).standard_normal(shape)
    q, r = qr_thin(m)
    k = min(shape)
    assert q.shape == (shape[0], k) and r.shape == (k, shape[1])
    np.testing.assert_allclose(q.T @ q, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(q @ r, m, atol=1e-12)
    assert np.allclose(np.tril(r, -1), 0)


@pytest.mark.parametrize("shape", [(8, 5), (5, 8), (6, 6)])
def test_svd_invariants(shape):
    m = np.random.default_rng(1).standard_normal(shape)
    res = svd(m)
    k = min(shape)
    assert res.rank == k
    np.testing.assert_allclose(res.left_vectors.T @ res.left_vectors, np.eye(k), atol=1e-12)
    np.testing.assert_allclose(res.right_vectors.T @ res.right_vectors, np.eye(k), atol=1e-12)
    assert np.all(np.diff(res.singular_values) <= 0)
    np.testing.assert_allclose(res.reconstruct(), m, atol=1e-12)
    assert res.singular_values[0] == pytest.approx(power_sigma_max(m), rel=1e-8)


def test_svd_rejects_nonfinite():
    with pytest.raises(SvdConvergenceError):
        svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_truncation_rank_examples():
    s = [3.0, 2.0, 1.0]
    assert truncation_rank(s, 0.0) == 3
    assert truncation_rank(s, 1.0) == 2
    assert truncation_rank(s, np.sqrt(5.0)) == 1
    assert truncation_rank(s, 10.0) == 0
    with pytest.raises(ValueError):
        truncation_rank(s, -1.0)


@settings(max_examples=60, deadline=None)
@given(
    s=st.lists(st.floats(0, 10, allow_nan=False), min_size=1, max_size=8),
    delta=st.floats(0, 20, allow_nan=False),
)
def test_truncation_rank_matches_loop(s, delta):
    s = sorted(s, reverse=True)
    r = truncation_rank(s, delta)
    ref = tail_rank(s, delta)
    # the two tail sums may round differently right at the threshold
    if r != ref:
        tail = np.sqrt(sum(x * x for x in s[min(r, ref):]))
        assert tail == pytest.approx(delta, rel=1e-12)
    else:
        assert r == ref


def test_truncated_svd_error_bound():
    m = np.random.default_rng(2).standard_normal((10, 8))
    full = svd(m).singular_values
    delta = 0.5 * np.linalg.norm(full)
    res, r = truncated_svd(m, delta)
    assert res.rank == r
    assert np.linalg.norm(m - res.reconstruct()) <= delta + 1e-12


def test_truncated_svd_low_rank():
    rng = np.random.default_rng(3)
    m = rng.standard_normal((9, 2)) @ rng.standard_normal((2, 7))
    _, r = truncated_svd(m, 1e-10 * np.linalg.norm(m))
    assert r == 2


def test_kron_index_convention():
    a = np.array([[1.0, 2.0]])
    b = np.array([[1.0], [10.0]])
    k = kron(a, b)
    # second factor's index fastest: row = i_a * rows_b + i_b
    np.testing.assert_array_equal(k, [[1.0, 2.0], [10.0, 20.0]])
