"""Structured random sketching for tensor-structured least squares."""

from .embedding import (
    RangeBasis,
    SigmaSpectrum,
    case2_norm_distribution_check,
    distortion,
    embed_dim_case1,
    embed_dim_case2,
    embed_dim_gaussian,
    sup_distortion_exact,
    sup_distortion_sampled,
    zeta_sample,
    zeta_tail_bound,
)
from .lsq import LsSolution, relative_error, residual_sq_full, solve_ls
from .sketches import (
    STRATEGIES,
    Case1Sketch,
    Case2Sketch,
    DenseGaussianSketch,
    IdentitySketch,
    SketchedSystem,
    balanced_split,
    gen_case1,
    gen_case2,
    gen_dense_gaussian,
    make_sketch,
    sketch_system,
)
from .tensor_core import (
    KhatriRaoOperator,
    TensorVector,
    kr_apply,
    kr_materialize,
    kron_vec,
    matricize,
    mixed_product_check,
    vectorize,
)

__version__ = "0.1.0"

__all__ = [
    "Case1Sketch",
    "Case2Sketch",
    "DenseGaussianSketch",
    "IdentitySketch",
    "KhatriRaoOperator",
    "LsSolution",
    "RangeBasis",
    "STRATEGIES",
    "SigmaSpectrum",
    "SketchedSystem",
    "TensorVector",
    "balanced_split",
    "case2_norm_distribution_check",
    "distortion",
    "embed_dim_case1",
    "embed_dim_case2",
    "embed_dim_gaussian",
    "gen_case1",
    "gen_case2",
    "gen_dense_gaussian",
    "kr_apply",
    "kr_materialize",
    "kron_vec",
    "make_sketch",
    "matricize",
    "mixed_product_check",
    "relative_error",
    "residual_sq_full",
    "sketch_system",
    "solve_ls",
    "sup_distortion_exact",
    "sup_distortion_sampled",
    "vectorize",
    "zeta_sample",
    "zeta_tail_bound",
]
