"""Three-factor regularized matrix decomposition A = P D Q.

An alternating block solver factors dense or CSR matrices into a thin
orthonormal pair (P, Q) around a k x k core D, with ridge / l1 / elastic
/ off-diagonal penalties, a symmetric variant, a Tucker extension for
tensors, and an experiment harness for perturbation, conditioning, and
complexity measurements.
"""

from .analysis import (
    BaselineReport,
    BaselineRow,
    PerturbationReport,
    ReduceResult,
    ScalingReport,
    StabilityReport,
    UniquenessReport,
    baseline_compare,
    perturbation_experiment,
    reduce,
    scaling_experiment,
    stability_experiment,
    uniqueness_experiment,
    write_report,
)
from .exceptions import (
    InvalidArgumentError,
    MatrixFormatError,
    NumericalFailureError,
    SingularMatrixError,
)
from .flops import FlopCounts
from .generators import gen_matrix
from .linalg import (
    LuResult,
    QrResult,
    SvdResult,
    condition_number,
    frobenius_norm,
    lu,
    lu_solve,
    matmul,
    qr,
    svd,
)
from .matrices import DenseMatrix, SparseMatrix
from .regularization import RegularizerSpec, penalty_value, prox_step, soft_threshold
from .solver import (
    Factorization,
    SolverConfig,
    evaluate_objective,
    residual_norm,
    solve,
    solve_rank_restricted,
    solve_symmetric,
)
from .tensor import (
    DenseTensor,
    TuckerConfig,
    TuckerFactorization,
    fold,
    mode_product,
    tucker_solve,
    unfold,
)

__version__ = "0.1.0"

__all__ = [
    "BaselineReport",
    "BaselineRow",
    "DenseMatrix",
    "DenseTensor",
    "Factorization",
    "FlopCounts",
    "InvalidArgumentError",
    "LuResult",
    "MatrixFormatError",
    "NumericalFailureError",
    "PerturbationReport",
    "QrResult",
    "ReduceResult",
    "RegularizerSpec",
    "ScalingReport",
    "SingularMatrixError",
    "SolverConfig",
    "SparseMatrix",
    "StabilityReport",
    "SvdResult",
    "TuckerConfig",
    "TuckerFactorization",
    "UniquenessReport",
    "baseline_compare",
    "condition_number",
    "evaluate_objective",
    "fold",
    "frobenius_norm",
    "gen_matrix",
    "lu",
    "lu_solve",
    "matmul",
    "mode_product",
    "penalty_value",
    "perturbation_experiment",
    "prox_step",
    "qr",
    "reduce",
    "residual_norm",
    "scaling_experiment",
    "soft_threshold",
    "solve",
    "solve_rank_restricted",
    "solve_symmetric",
    "stability_experiment",
    "svd",
    "tucker_solve",
    "unfold",
    "uniqueness_experiment",
    "write_report",
]
