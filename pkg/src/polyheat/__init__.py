"""Small-time heat content expansion for polygons inside reflecting polygonal domains."""

import os as _os

# Honor POLYHEAT_THREADS before numpy/scipy load their BLAS backends. Only the
# standard threadpool knobs are touched, and only if the user left them unset.
if "POLYHEAT_THREADS" in _os.environ:
    _n = _os.environ["POLYHEAT_THREADS"]
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _n)
del _os

from .corners import (
    CoefficientValue,
    QuadratureSpec,
    coeff_a,
    coeff_b,
    coeff_b_hat,
    coeff_c,
    coeff_c_hat,
    coeff_d_hat,
    coeff_f,
    coeff_g,
    coeff_h_hat,
    coeff_k,
    cot_identity_residual,
    cusp_term,
    generalized_vertex_coeff,
    integrate_semi_infinite,
)
from .geometry import (
    ClassifiedVertex,
    DomainPair,
    EdgeKind,
    PartitionSpec,
    Point,
    Polygon,
    VertexKind,
    build_domain_pair,
    classify_vertices,
    cusp_area,
    partition,
)
from .expansion import (
    ExpansionCoefficients,
    eval_expansion,
    expansion_coefficients,
    isoflow_check,
    model_piece_contribution,
    piece_sum_check,
    reflect_and_double,
)
from .oracles import (
    McSpec,
    OracleResult,
    SpectralSpec,
    eigen_integral,
    exit_tail_probability,
    rbm_heat_content,
    rbm_step,
    spectral_heat_content,
)

__all__ = [
    "CoefficientValue",
    "QuadratureSpec",
    "coeff_a",
    "coeff_b",
    "coeff_b_hat",
    "coeff_c",
    "coeff_c_hat",
    "coeff_d_hat",
    "coeff_f",
    "coeff_g",
    "coeff_h_hat",
    "coeff_k",
    "cot_identity_residual",
    "cusp_term",
    "generalized_vertex_coeff",
    "integrate_semi_infinite",
    "ClassifiedVertex",
    "DomainPair",
    "EdgeKind",
    "PartitionSpec",
    "Point",
    "Polygon",
    "VertexKind",
    "build_domain_pair",
    "classify_vertices",
    "cusp_area",
    "partition",
    "ExpansionCoefficients",
    "eval_expansion",
    "expansion_coefficients",
    "isoflow_check",
    "model_piece_contribution",
    "piece_sum_check",
    "reflect_and_double",
    "McSpec",
    "OracleResult",
    "SpectralSpec",
    "eigen_integral",
    "exit_tail_probability",
    "rbm_heat_content",
    "rbm_step",
    "spectral_heat_content",
]

__version__ = "0.1.0"
