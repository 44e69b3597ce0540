"""Dense least-squares solves and residual bookkeeping.

The solver prefers a QR factorization and falls back to a truncated-SVD
minimum-norm solve when the system is underdetermined or the triangular
factor is numerically rank deficient.  Residuals are always recomputed
from the original matrix and right-hand side, never read off the
factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .tensor_core import KhatriRaoOperator, TensorVector, kr_apply

DEFAULT_RCOND = 1e-10

# Floor applied to relative errors: a sketched solve can beat the baseline
# only through rounding, so anything below this is clamped.
_REL_ERROR_FLOOR = -1e-12


@dataclass(frozen=True)
class LsSolution:
    """Solution record: minimizer, squared residual, and how it was found."""

    x: np.ndarray
    residual_sq: float
    rank_used: int
    method: str
    underdetermined: bool


def solve_ls(mat, rhs, rcond: float = DEFAULT_RCOND) -> LsSolution:
    """Minimize ||M x - rhs||_2.

    QR when M is tall with a well-conditioned triangular factor; otherwise
    a truncated SVD keeping singular values above rcond * s_max, returning
    the minimum-norm solution.

    :param mat: (m, p) matrix
    :param rhs: length-m vector
    :param rcond: relative singular value / diagonal cutoff in [0, 1)
    """
    mat = np.asarray(mat, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if mat.ndim != 2 or rhs.ndim != 1 or rhs.size != mat.shape[0]:
        raise ValueError(f"incompatible shapes {mat.shape} and {rhs.shape}")
    if not (np.isfinite(mat).all() and np.isfinite(rhs).all()):
        raise ValueError("matrix and rhs must be finite")
    if not 0.0 <= rcond < 1.0:
        raise ValueError(f"rcond must lie in [0, 1), got {rcond}")

    m, p = mat.shape
    x = None
    if m >= p:
        q_fac, r_fac = np.linalg.qr(mat)
        diag = np.abs(np.diag(r_fac))
        if diag.max() > 0 and diag.min() > rcond * diag.max():
            x = scipy.linalg.solve_triangular(r_fac, q_fac.T @ rhs)
            rank, method = p, "qr"
    if x is None:
        u, s, vt = np.linalg.svd(mat, full_matrices=False)
        rank = int(np.count_nonzero(s > rcond * s[0])) if s.size and s[0] > 0 else 0
        coeff = (u[:, :rank].T @ rhs) / s[:rank]
        x = vt[:rank].T @ coeff
        method = "svd"
    resid = mat @ x - rhs
    return LsSolution(
        x=x,
        residual_sq=float(resid @ resid),
        rank_used=rank,
        method=method,
        underdetermined=m < p,
    )


def residual_sq_full(op: KhatriRaoOperator, x, b) -> float:
    """||A x - b||^2 against the full structured system; b may be a
    TensorVector or a dense vector."""
    b_dense = b.expand() if isinstance(b, TensorVector) else np.asarray(b, dtype=float)
    if b_dense.ndim != 1 or b_dense.size != op.n_rows:
        raise ValueError(f"rhs must have length {op.n_rows}")
    resid = kr_apply(op, x) - b_dense
    return float(resid @ resid)


def relative_error(f_sketched: float, f_baseline: float) -> float:
    """(f(x_s) - f(x*)) / f(x*), clamped at a tiny negative rounding floor.

    :param f_sketched: squared residual of the sketched solution on the
        full system
    :param f_baseline: squared residual of the full solve; must be positive
    """
    if not (np.isfinite(f_sketched) and np.isfinite(f_baseline)):
        raise ValueError("residuals must be finite")
    if f_baseline <= 0:
        raise ValueError(
            f"baseline residual must be positive for a relative error, got {f_baseline}"
        )
    return max((f_sketched - f_baseline) / f_baseline, _REL_ERROR_FLOOR)
