"""Kronecker/Khatri-Rao kernel tests against dense oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from krsketch.tensor_core import (
    KhatriRaoOperator,
    TensorVector,
    kr_apply,
    kr_materialize,
    kron_vec,
    matricize,
    mixed_product_check,
    vectorize,
)


def test_kron_vec_hand_values():
    assert np.array_equal(kron_vec([2, 3], [5, 7]), [10.0, 14.0, 15.0, 21.0])


def test_kron_vec_layout_position():
    # entry u[i]*v[k] sits at flat index i*n2 + k
    u = np.array([1.0, 10.0, 100.0])
    v = np.array([1.0, 2.0])
    out = kron_vec(u, v)
    for i in range(3):
        for k in range(2):
            assert out[i * 2 + k] == u[i] * v[k]


def test_matricize_hand_values():
    mat = matricize([10.0, 14.0, 15.0, 21.0], 2, 2)
    assert np.array_equal(mat, [[10.0, 15.0], [14.0, 21.0]])


def test_matricize_round_trip():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(12)
    assert np.array_equal(vectorize(matricize(x, 3, 4), 3, 4), x)


def test_matricize_bilinear_identity():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n1, n2 = rng.integers(1, 9, 2)
        p = rng.standard_normal(n1)
        q = rng.standard_normal(n2)
        x = rng.standard_normal(n1 * n2)
        lhs = kron_vec(p, q) @ x
        rhs = q @ matricize(x, n1, n2) @ p
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_matricize_shape_errors():
    with pytest.raises(ValueError):
        matricize([1.0, 2.0, 3.0], 2, 2)
    with pytest.raises(ValueError):
        kron_vec([], [1.0])


@settings(max_examples=40, deadline=None)
@given(
    n1=st.integers(1, 6),
    n2=st.integers(1, 6),
    seed=st.integers(0, 10_000),
)
def test_kron_vec_norm_multiplicative(n1, n2, seed):
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(n1)
    v = rng.standard_normal(n2)
    out = kron_vec(u, v)
    assert np.linalg.norm(out) == pytest.approx(
        np.linalg.norm(u) * np.linalg.norm(v), rel=1e-12, abs=1e-12
    )


def test_operator_validation():
    d = np.ones((3, 2))
    e = np.ones((4, 2))
    op = KhatriRaoOperator(((d, e),))
    assert op.shape == (12, 2)
    assert op.n_terms == 1
    with pytest.raises(ValueError):
        KhatriRaoOperator(())
    with pytest.raises(ValueError):
        KhatriRaoOperator(((d, np.ones((4, 3))),))
    with pytest.raises(ValueError):
        KhatriRaoOperator(((d, e), (np.ones((5, 2)), e)))
    bad = d.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        KhatriRaoOperator(((bad, e),))


def test_materialize_columns_are_kron_sums():
    rng = np.random.default_rng(5)
    for n_terms in (1, 2, 3):
        terms = tuple(
            (rng.standard_normal((4, 3)), rng.standard_normal((5, 3)))
            for _ in range(n_terms)
        )
        op = KhatriRaoOperator(terms)
        dense = kr_materialize(op)
        for j in range(3):
            col = sum(np.kron(d[:, j], e[:, j]) for d, e in terms)
            assert np.allclose(dense[:, j], col, rtol=0, atol=1e-13)


def test_materialize_cap_names_the_cap():
    op = KhatriRaoOperator(((np.ones((10, 4)), np.ones((10, 4))),))
    with pytest.raises(ValueError, match="300"):
        kr_materialize(op, cap=300)


def test_apply_matches_materialized():
    rng = np.random.default_rng(17)
    for _ in range(50):
        n1, n2, p, n_terms = (int(v) for v in rng.integers(1, 7, 4))
        terms = tuple(
            (rng.standard_normal((n1, p)), rng.standard_normal((n2, p)))
            for _ in range(n_terms)
        )
        op = KhatriRaoOperator(terms)
        x = rng.standard_normal(p)
        want = kr_materialize(op) @ x
        got = kr_apply(op, x)
        assert np.linalg.norm(got - want) <= 1e-12 * max(1.0, np.linalg.norm(want))


def test_apply_rejects_wrong_length():
    op = KhatriRaoOperator(((np.ones((2, 3)), np.ones((2, 3))),))
    with pytest.raises(ValueError):
        kr_apply(op, np.ones(4))


def test_mixed_product_identity():
    rng = np.random.default_rng(23)
    for _ in range(100):
        dims = rng.integers(1, 9, 6)
        a = rng.standard_normal((dims[0], dims[1]))
        c = rng.standard_normal((dims[1], dims[2]))
        b = rng.standard_normal((dims[3], dims[4]))
        d = rng.standard_normal((dims[4], dims[5]))
        resid = mixed_product_check(a, b, c, d)
        scale = max(1.0, np.max(np.abs(np.kron(a @ c, b @ d))))
        assert resid <= 1e-12 * scale


def test_mixed_product_shape_error():
    with pytest.raises(ValueError):
        mixed_product_check(np.ones((2, 3)), np.ones((2, 2)), np.ones((2, 2)), np.ones((2, 2)))


def test_tensor_vector_expand():
    tv = TensorVector([1.0, 2.0], [3.0, 4.0])
    assert np.array_equal(tv.expand(), [3.0, 4.0, 6.0, 8.0])
    assert tv.size == 4
    with pytest.raises(ValueError):
        TensorVector([np.inf], [1.0])
