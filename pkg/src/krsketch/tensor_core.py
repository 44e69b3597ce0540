"""Kronecker and column-wise Khatri-Rao kernels shared by every other module.

Layout convention, fixed once and used everywhere: arrays are C-ordered
(row-major) numpy float64 arrays.  The Kronecker product of a length-n1
vector u and a length-n2 vector v stores u[i] * v[k] at flat position
i * n2 + k.  ``matricize`` is the matching bilinear view: for any vectors
p (length n1) and q (length n2),

    kron_vec(p, q) @ x == q @ matricize(x, n1, n2) @ p.

A column-wise Khatri-Rao operator represents a tall matrix whose column j
is a sum of Kronecker products, sum_l kron_vec(D_l[:, j], E_l[:, j]),
without ever storing the n1*n2-by-p dense array.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Largest dense array, in entries, that materialization helpers will build.
MATERIALIZE_CAP = 10_000_000


def _as_vector(x, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    return x


def kron_vec(u, v) -> np.ndarray:
    """Kronecker product of two vectors in row-major layout.

    :param u: length-n1 vector
    :param v: length-n2 vector
    :return: length n1*n2 vector with u[i]*v[k] at position i*n2 + k
    """
    u = _as_vector(u, "u")
    v = _as_vector(v, "v")
    return np.kron(u, v)


def matricize(x, n1: int, n2: int) -> np.ndarray:
    """Reshape a length n1*n2 vector into the n2-by-n1 matrix paired with
    :func:`kron_vec`: kron_vec(p, q) @ x == q @ matricize(x, n1, n2) @ p.
    """
    x = _as_vector(x, "x")
    if n1 < 1 or n2 < 1 or x.size != n1 * n2:
        raise ValueError(f"cannot matricize length-{x.size} vector as {n1}x{n2}")
    return x.reshape(n1, n2).T


def vectorize(mat, n1: int, n2: int) -> np.ndarray:
    """Inverse of :func:`matricize`: n2-by-n1 matrix back to a flat vector."""
    mat = np.asarray(mat, dtype=float)
    if mat.shape != (n2, n1):
        raise ValueError(f"expected shape {(n2, n1)}, got {mat.shape}")
    return mat.T.reshape(-1).copy()


@dataclass(frozen=True)
class TensorVector:
    """Rank-one vector f kron g stored by its two factors."""

    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _as_vector(self.f, "f"))
        object.__setattr__(self, "g", _as_vector(self.g, "g"))
        if not (np.isfinite(self.f).all() and np.isfinite(self.g).all()):
            raise ValueError("tensor vector factors must be finite")

    @property
    def size(self) -> int:
        return self.f.size * self.g.size

    def expand(self) -> np.ndarray:
        """Dense length f.size * g.size vector."""
        return np.kron(self.f, self.g)


@dataclass(frozen=True)
class KhatriRaoOperator:
    """Column-wise Khatri-Rao matrix: column j is sum_l D_l[:,j] kron E_l[:,j].

    ``terms`` is a nonempty tuple of (D_l, E_l) factor pairs where every D_l
    is n1-by-p and every E_l is n2-by-p.  The represented matrix has shape
    (n1 * n2, p) and is never stored unless :func:`kr_materialize` is called.
    """

    terms: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        if len(self.terms) == 0:
            raise ValueError("operator needs at least one factor pair")
        norm = []
        for d_fac, e_fac in self.terms:
            d_fac = np.asarray(d_fac, dtype=float)
            e_fac = np.asarray(e_fac, dtype=float)
            if d_fac.ndim != 2 or e_fac.ndim != 2:
                raise ValueError("factors must be 2-D arrays")
            if d_fac.shape[1] != e_fac.shape[1]:
                raise ValueError("factor pair must share a column count")
            if not (np.isfinite(d_fac).all() and np.isfinite(e_fac).all()):
                raise ValueError("factors must be finite")
            norm.append((d_fac, e_fac))
        d0, e0 = norm[0]
        for d_fac, e_fac in norm[1:]:
            if d_fac.shape != d0.shape or e_fac.shape != e0.shape:
                raise ValueError("all factor pairs must share shapes")
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def n1(self) -> int:
        return self.terms[0][0].shape[0]

    @property
    def n2(self) -> int:
        return self.terms[0][1].shape[0]

    @property
    def n_rows(self) -> int:
        return self.n1 * self.n2

    @property
    def n_cols(self) -> int:
        return self.terms[0][0].shape[1]

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)


def kr_materialize(op: KhatriRaoOperator, cap: int = MATERIALIZE_CAP) -> np.ndarray:
    """Dense (n1*n2)-by-p array for the operator.  Intended for small
    instances and oracles; errors out instead of allocating past ``cap``.
    """
    if op.n_rows * op.n_cols > cap:
        raise ValueError(
            f"materializing {op.n_rows}x{op.n_cols} exceeds the cap of {cap} entries"
        )
    out = np.zeros((op.n_rows, op.n_cols))
    for d_fac, e_fac in op.terms:
        # column j gets kron(D[:,j], E[:,j]); einsum builds all columns at once
        out += np.einsum("ij,kj->ikj", d_fac, e_fac).reshape(op.n_rows, op.n_cols)
    return out


def kr_apply(op: KhatriRaoOperator, x) -> np.ndarray:
    """Matrix-vector product A @ x without forming A.

    Each term contributes vec of the rank-structured product: with row-major
    vec, sum_j x_j kron(D[:,j], E[:,j]) == ((D * x) @ E.T) flattened.
    Cost is O(L * n1 * n2 * p).
    """
    x = _as_vector(x, "x")
    if x.size != op.n_cols:
        raise ValueError(f"expected length {op.n_cols}, got {x.size}")
    out = np.zeros(op.n_rows)
    for d_fac, e_fac in op.terms:
        out += ((d_fac * x) @ e_fac.T).reshape(-1)
    return out


def mixed_product_check(a, b, c, d) -> float:
    """Max-norm residual of (A kron B)(C kron D) - (AC) kron (BD).

    Test and diagnostic helper only; materializes both sides.
    """
    a, b, c, d = (np.asarray(m, dtype=float) for m in (a, b, c, d))
    if a.shape[1] != c.shape[0] or b.shape[1] != d.shape[0]:
        raise ValueError("inner dimensions do not match")
    lhs = np.kron(a, b) @ np.kron(c, d)
    rhs = np.kron(a @ c, b @ d)
    return float(np.max(np.abs(lhs - rhs)))
