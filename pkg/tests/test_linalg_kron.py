import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levysim.errors import DimensionError, MatrixError, PairIndexError
from levysim.linalg_kron import (
    apply_commutation,
    embed_antisym,
    index_to_pair,
    kron,
    kron_vec,
    mat_of,
    n_pairs,
    pair_to_index,
    select_lower,
    sym_psd_sqrt,
    vec_of,
)


def test_vec_of_identity_and_columns():
    assert vec_of(np.eye(2)).tolist() == [1, 0, 0, 1]
    B = np.array([[1, 4, 7], [2, 5, 8], [3, 6, 9]])
    assert vec_of(B).tolist() == list(range(1, 10))


def test_mat_of_examples(rng):
    assert np.array_equal(mat_of([1, 0, 0, 1], 2, 2), np.eye(2))
    assert np.array_equal(mat_of(np.arange(1, 7), 2, 3), [[1, 3, 5], [2, 4, 6]])
    B = rng.normal(size=(3, 4))
    assert np.array_equal(mat_of(vec_of(B), 3, 4), B)
    v = rng.normal(size=12)
    assert np.array_equal(vec_of(mat_of(v, 4, 3)), v)


def test_mat_of_bad_length():
    with pytest.raises(DimensionError):
        mat_of(np.arange(5), 2, 3)


def test_kron_examples(rng):
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert kron_vec([1, 2], [3, 4]).tolist() == [3, 4, 6, 8]
    B, C = rng.normal(size=(2, 3)), rng.normal(size=(3, 2))
    naive = np.zeros((6, 6))
    for i in range(2):
        for j in range(3):
            for k in range(3):
                for l in range(2):
                    naive[i * 3 + k, j * 2 + l] = B[i, j] * C[k, l]
    assert np.array_equal(kron(B, C), naive)


def test_commutation(rng):
    assert apply_commutation([3, 4, 6, 8], 2).tolist() == [3, 6, 4, 8]
    v = rng.normal(size=16)
    assert np.array_equal(apply_commutation(apply_commutation(v, 4), 4), v)
    B = rng.normal(size=(3, 3))
    assert np.array_equal(apply_commutation(vec_of(B), 3), vec_of(B.T))
    with pytest.raises(DimensionError):
        apply_commutation(np.zeros(5), 2)


def test_select_lower_examples(rng):
    assert select_lower(np.arange(1, 10), 3).tolist() == [2, 3, 6]
    A = rng.normal(size=(3, 3))
    A = A - A.T
    assert np.array_equal(select_lower(vec_of(A.T), 3), [A[0, 1], A[0, 2], A[1, 2]])


def test_embed_antisym():
    assert np.array_equal(embed_antisym(np.zeros(3), 3), np.zeros(9))
    c = 2.5
    assert np.array_equal(mat_of(embed_antisym([c], 2), 2, 2), [[0, -c], [c, 0]])


@settings(max_examples=50, deadline=None)
@given(m=st.integers(2, 7), data=st.data())
def test_embed_select_round_trip(m, data):
    a = np.array(data.draw(st.lists(st.floats(-1e6, 1e6), min_size=n_pairs(m), max_size=n_pairs(m))))
    w = embed_antisym(a, m)
    assert np.array_equal(select_lower(w, m), a)
    W = mat_of(w, m, m)
    assert np.array_equal(W + W.T, np.zeros((m, m)))


def test_pair_index_examples():
    assert [pair_to_index(1, 2, 3), pair_to_index(1, 3, 3), pair_to_index(2, 3, 3)] == [1, 2, 3]
    assert pair_to_index(2, 4, 4) == 5


@pytest.mark.parametrize("m", range(2, 11))
def test_pair_index_bijection(m):
    seen = []
    for i in range(1, m + 1):
        for j in range(i + 1, m + 1):
            r = pair_to_index(i, j, m)
            assert index_to_pair(r, m) == (i, j)
            seen.append(r)
    assert sorted(seen) == list(range(1, n_pairs(m) + 1))


def test_pair_index_errors():
    with pytest.raises(PairIndexError):
        pair_to_index(2, 2, 3)
    with pytest.raises(PairIndexError):
        index_to_pair(4, 3)


def test_sym_psd_sqrt(rng):
    assert np.allclose(sym_psd_sqrt(np.eye(4)), np.eye(4), atol=1e-15)
    assert np.allclose(sym_psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    for _ in range(20):
        L = rng.normal(size=(5, 5))
        S = L @ L.T
        R = sym_psd_sqrt(S)
        assert np.linalg.norm(R @ R - S) <= 1e-8 * np.linalg.norm(S)


def test_sym_psd_sqrt_rejects():
    with pytest.raises(MatrixError):
        sym_psd_sqrt(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(MatrixError):
        sym_psd_sqrt(np.diag([1.0, -1.0]))
