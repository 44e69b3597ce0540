"""Random sketch strategies for tensor-structured least squares.

Three strategies map a length n1*n2 vector to a short one:

* kron-factored ("case1"): S = P kron Q with P of shape (r1, n1) and
  Q of shape (r2, n2), entries i.i.d. N(0, 1/r1) and N(0, 1/r2).  Applied
  to structured inputs it never forms the r1*r2-by-n1*n2 matrix.
* row-factored ("case2"): row i of S is (p_i kron q_i) / sqrt(r) with
  standard normal factor rows, i.e. a row-wise Khatri-Rao product.
* unstructured ("dense-gaussian"): S = R / sqrt(r) with i.i.d. standard
  normal R, regenerated blockwise from the seed and never stored whole.

Every strategy exposes the same apply surface: ``apply_to_operator`` for a
KhatriRaoOperator, ``apply_to_tensor_vec`` for a rank-one TensorVector,
``apply_to_dense_vec`` for a plain vector, and ``materialize`` for oracles.
All randomness flows through numpy Generators seeded from the integer seed
stored on the sketch, so equal seeds give bitwise-equal sketches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .tensor_core import (
    MATERIALIZE_CAP,
    KhatriRaoOperator,
    TensorVector,
    kr_materialize,
)

STRATEGY_CASE1 = "case1"
STRATEGY_CASE2 = "case2"
STRATEGY_GAUSSIAN = "dense-gaussian"
STRATEGIES = (STRATEGY_CASE1, STRATEGY_CASE2, STRATEGY_GAUSSIAN)

# Entries generated per block when streaming an unstructured sketch.
_BLOCK_ENTRIES = 10_000_000


def _check_dims(**dims: int) -> None:
    for name, value in dims.items():
        if int(value) != value or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value}")


def _dense_vec(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or y.size != n:
        raise ValueError(f"expected a length-{n} vector, got shape {y.shape}")
    return y


class Case1Sketch:
    """Kron-factored sketch S = P kron Q."""

    strategy = STRATEGY_CASE1

    def __init__(self, p_mat: np.ndarray, q_mat: np.ndarray, seed: int):
        self.p_mat = np.asarray(p_mat, dtype=float)
        self.q_mat = np.asarray(q_mat, dtype=float)
        self.seed = seed
        self.r1, self.n1 = self.p_mat.shape
        self.r2, self.n2 = self.q_mat.shape

    @property
    def rows(self) -> int:
        return self.r1 * self.r2

    @property
    def ambient_dim(self) -> int:
        return self.n1 * self.n2

    def apply_to_operator(self, op: KhatriRaoOperator) -> np.ndarray:
        """S @ A, built one factor pair at a time.

        Column j of S @ A is sum_l kron(P @ D_l[:, j], Q @ E_l[:, j]), so
        the cost is O(L * (r1 n1 + r2 n2) p + L * r1 r2 p); the ambient
        n1 * n2 dimension never appears.
        """
        self._check_op(op)
        out = np.zeros((self.rows, op.n_cols))
        for d_fac, e_fac in op.terms:
            pd = self.p_mat @ d_fac
            qe = self.q_mat @ e_fac
            out += np.einsum("ij,kj->ikj", pd, qe).reshape(self.rows, op.n_cols)
        return out

    def apply_to_tensor_vec(self, tv: TensorVector) -> np.ndarray:
        self._check_tv(tv)
        return np.kron(self.p_mat @ tv.f, self.q_mat @ tv.g)

    def apply_to_dense_vec(self, y) -> np.ndarray:
        """(P kron Q) y == vec(P Mat' Q^T) with Mat' = y reshaped n1-by-n2;
        cost O(n1 n2 (r1 + r2)) instead of O(n1 n2 r1 r2)."""
        y = _dense_vec(y, self.ambient_dim)
        return (self.p_mat @ y.reshape(self.n1, self.n2) @ self.q_mat.T).reshape(-1)

    def materialize(self, cap: int = MATERIALIZE_CAP) -> np.ndarray:
        if self.rows * self.ambient_dim > cap:
            raise ValueError(
                f"materializing {self.rows}x{self.ambient_dim} exceeds the cap of {cap} entries"
            )
        return np.kron(self.p_mat, self.q_mat)

    def _check_op(self, op: KhatriRaoOperator) -> None:
        if (op.n1, op.n2) != (self.n1, self.n2):
            raise ValueError(
                f"operator factor dims {(op.n1, op.n2)} do not match sketch {(self.n1, self.n2)}"
            )

    def _check_tv(self, tv: TensorVector) -> None:
        if (tv.f.size, tv.g.size) != (self.n1, self.n2):
            raise ValueError("tensor vector dims do not match sketch")


class Case2Sketch:
    """Row-factored sketch: row i is kron(p_i, q_i) / sqrt(r)."""

    strategy = STRATEGY_CASE2

    def __init__(self, p_rows: np.ndarray, q_rows: np.ndarray, seed: int):
        self.p_rows = np.asarray(p_rows, dtype=float)
        self.q_rows = np.asarray(q_rows, dtype=float)
        if self.p_rows.shape[0] != self.q_rows.shape[0]:
            raise ValueError("row factor banks must have equal row counts")
        self.seed = seed
        self.r = self.p_rows.shape[0]
        self.n1 = self.p_rows.shape[1]
        self.n2 = self.q_rows.shape[1]
        self._scale = 1.0 / math.sqrt(self.r)

    @property
    def rows(self) -> int:
        return self.r

    @property
    def ambient_dim(self) -> int:
        return self.n1 * self.n2

    def apply_to_operator(self, op: KhatriRaoOperator) -> np.ndarray:
        """(S A)[i, j] = sum_l (P D_l)[i, j] * (Q E_l)[i, j] / sqrt(r)."""
        if (op.n1, op.n2) != (self.n1, self.n2):
            raise ValueError("operator dims do not match sketch")
        out = np.zeros((self.r, op.n_cols))
        for d_fac, e_fac in op.terms:
            out += (self.p_rows @ d_fac) * (self.q_rows @ e_fac)
        out *= self._scale
        return out

    def apply_to_tensor_vec(self, tv: TensorVector) -> np.ndarray:
        if (tv.f.size, tv.g.size) != (self.n1, self.n2):
            raise ValueError("tensor vector dims do not match sketch")
        return self._scale * (self.p_rows @ tv.f) * (self.q_rows @ tv.g)

    def apply_to_dense_vec(self, y) -> np.ndarray:
        """Row i gives q_i^T Mat'(y)^T p_i; evaluated as a row-aligned
        contraction in O(r n1 n2)."""
        y = _dense_vec(y, self.ambient_dim)
        mat = y.reshape(self.n1, self.n2)
        return self._scale * np.einsum("ij,ij->i", self.p_rows @ mat, self.q_rows)

    def materialize(self, cap: int = MATERIALIZE_CAP) -> np.ndarray:
        n = self.ambient_dim
        if self.r * n > cap:
            raise ValueError(
                f"materializing {self.r}x{n} exceeds the cap of {cap} entries"
            )
        out = np.einsum("ij,ik->ijk", self.p_rows, self.q_rows).reshape(self.r, n)
        out *= self._scale
        return out


class DenseGaussianSketch:
    """Unstructured Gaussian sketch, streamed in row blocks.

    The matrix R / sqrt(r) is never held in memory: block b of rows is
    regenerated on demand from Generator(SeedSequence((seed, b))), which is
    stateless, order-independent, and safe to evaluate concurrently.
    """

    strategy = STRATEGY_GAUSSIAN

    def __init__(self, r: int, n: int, seed: int):
        _check_dims(r=r, n=n)
        self.r = int(r)
        self.n = int(n)
        self.seed = seed
        self._block_rows = max(1, min(self.r, _BLOCK_ENTRIES // self.n))

    @property
    def rows(self) -> int:
        return self.r

    @property
    def ambient_dim(self) -> int:
        return self.n

    def _iter_blocks(self):
        scale = 1.0 / math.sqrt(self.r)
        for b, start in enumerate(range(0, self.r, self._block_rows)):
            stop = min(start + self._block_rows, self.r)
            rng = np.random.default_rng((self.seed, b))
            yield start, stop, scale * rng.standard_normal((stop - start, self.n))

    def apply_to_matrix(self, mat: np.ndarray) -> np.ndarray:
        """S @ M for a dense (n, k) matrix, one row block at a time."""
        mat = np.asarray(mat, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != self.n:
            raise ValueError(f"expected shape ({self.n}, k), got {mat.shape}")
        out = np.empty((self.r, mat.shape[1]))
        for start, stop, block in self._iter_blocks():
            out[start:stop] = block @ mat
        return out

    def apply_to_operator(self, op: KhatriRaoOperator) -> np.ndarray:
        if op.n_rows != self.n:
            raise ValueError("operator height does not match sketch width")
        if op.n_rows * op.n_cols <= MATERIALIZE_CAP:
            return self.apply_to_matrix(kr_materialize(op))
        # Operator too large to densify: contract each block against the
        # factors directly, (R_blk reshaped (m, n1, n2)) E_l then D_l.
        out = np.zeros((self.r, op.n_cols))
        for start, stop, block in self._iter_blocks():
            m = stop - start
            cube = block.reshape(m, op.n1, op.n2)
            for d_fac, e_fac in op.terms:
                z = (cube.reshape(m * op.n1, op.n2) @ e_fac).reshape(m, op.n1, -1)
                out[start:stop] += np.einsum("mnp,np->mp", z, d_fac)
        return out

    def apply_to_tensor_vec(self, tv: TensorVector) -> np.ndarray:
        n1, n2 = tv.f.size, tv.g.size
        if n1 * n2 != self.n:
            raise ValueError("tensor vector size does not match sketch width")
        out = np.empty(self.r)
        for start, stop, block in self._iter_blocks():
            m = stop - start
            out[start:stop] = (block.reshape(m * n1, n2) @ tv.g).reshape(m, n1) @ tv.f
        return out

    def apply_to_dense_vec(self, y) -> np.ndarray:
        y = _dense_vec(y, self.n)
        return self.apply_to_matrix(y[:, None]).reshape(-1)

    def materialize(self, cap: int = MATERIALIZE_CAP) -> np.ndarray:
        if self.r * self.n > cap:
            raise ValueError(
                f"materializing {self.r}x{self.n} exceeds the cap of {cap} entries"
            )
        out = np.empty((self.r, self.n))
        for start, stop, block in self._iter_blocks():
            out[start:stop] = block
        return out


class IdentitySketch:
    """S = I test hook: sketched solves must reproduce unsketched ones."""

    strategy = "identity"

    def __init__(self, n1: int, n2: int):
        _check_dims(n1=n1, n2=n2)
        self.n1, self.n2 = int(n1), int(n2)
        self.seed = None

    @property
    def rows(self) -> int:
        return self.n1 * self.n2

    @property
    def ambient_dim(self) -> int:
        return self.n1 * self.n2

    def apply_to_operator(self, op: KhatriRaoOperator) -> np.ndarray:
        return kr_materialize(op)

    def apply_to_tensor_vec(self, tv: TensorVector) -> np.ndarray:
        return tv.expand()

    def apply_to_dense_vec(self, y) -> np.ndarray:
        return _dense_vec(y, self.ambient_dim).copy()

    def materialize(self, cap: int = MATERIALIZE_CAP) -> np.ndarray:
        return np.eye(self.ambient_dim)


def gen_case1(r1: int, r2: int, n1: int, n2: int, seed: int) -> Case1Sketch:
    """Draw P (r1-by-n1, entries N(0, 1/r1)) then Q (r2-by-n2, N(0, 1/r2))
    from one generator, so the pair is reproducible from the seed alone."""
    _check_dims(r1=r1, r2=r2, n1=n1, n2=n2)
    rng = np.random.default_rng(seed)
    p_mat = rng.standard_normal((r1, n1)) / math.sqrt(r1)
    q_mat = rng.standard_normal((r2, n2)) / math.sqrt(r2)
    return Case1Sketch(p_mat, q_mat, seed)


def gen_case2(r: int, n1: int, n2: int, seed: int) -> Case2Sketch:
    """Draw the r-by-n1 and r-by-n2 standard normal row banks."""
    _check_dims(r=r, n1=n1, n2=n2)
    rng = np.random.default_rng(seed)
    p_rows = rng.standard_normal((r, n1))
    q_rows = rng.standard_normal((r, n2))
    return Case2Sketch(p_rows, q_rows, seed)


def gen_dense_gaussian(r: int, n: int, seed: int) -> DenseGaussianSketch:
    return DenseGaussianSketch(r, n, seed)


def balanced_split(r: int) -> tuple[int, int]:
    """r1 = r2 = floor(sqrt(r)): the balanced kron-factored row split with
    r1 * r2 <= r.  Exact on perfect squares, which all shipped grids use."""
    _check_dims(r=r)
    side = math.isqrt(r)
    return side, side


def make_sketch(
    strategy: str,
    n1: int,
    n2: int,
    seed: int,
    r: int | None = None,
    r1: int | None = None,
    r2: int | None = None,
):
    """Build a sketch by strategy name; benchmark and CLI entry point.

    For "case1" either pass r1 and r2 explicitly or a target r that is
    split by :func:`balanced_split`.
    """
    if strategy == STRATEGY_CASE1:
        if r1 is None or r2 is None:
            if r is None:
                raise ValueError("case1 needs r or an explicit (r1, r2)")
            r1, r2 = balanced_split(r)
        return gen_case1(r1, r2, n1, n2, seed)
    if r is None:
        raise ValueError(f"{strategy} needs a row count r")
    if strategy == STRATEGY_CASE2:
        return gen_case2(r, n1, n2, seed)
    if strategy == STRATEGY_GAUSSIAN:
        return gen_dense_gaussian(r, n1 * n2, seed)
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class SketchedSystem:
    """The pair (S A, S b) ready for a dense least-squares solve."""

    sa: np.ndarray
    sb: np.ndarray

    def __post_init__(self):
        if self.sa.ndim != 2 or self.sb.ndim != 1 or self.sa.shape[0] != self.sb.size:
            raise ValueError("sketched matrix and rhs must have matching rows")
        if self.sa.shape[0] < self.sa.shape[1]:
            warnings.warn(
                f"sketch rows {self.sa.shape[0]} < unknowns {self.sa.shape[1]}; "
                "the sketched solve is underdetermined",
                stacklevel=2,
            )


def sketch_system(sketch, op: KhatriRaoOperator, b) -> SketchedSystem:
    """Sketch the stacked system [A, b] with one sketch draw.

    ``b`` may be a TensorVector or a dense length n1*n2 vector.  For the
    streamed unstructured sketch with a dense rhs, A and b are sketched in
    a single pass over the regenerated blocks.
    """
    if isinstance(sketch, DenseGaussianSketch) and not isinstance(b, TensorVector):
        if op.n_rows * (op.n_cols + 1) <= MATERIALIZE_CAP:
            stacked = np.column_stack([kr_materialize(op), _dense_vec(b, op.n_rows)])
            sab = sketch.apply_to_matrix(stacked)
            return SketchedSystem(sab[:, :-1], sab[:, -1])
    sa = sketch.apply_to_operator(op)
    if isinstance(b, TensorVector):
        sb = sketch.apply_to_tensor_vec(b)
    else:
        sb = sketch.apply_to_dense_vec(b)
    return SketchedSystem(sa, sb)
