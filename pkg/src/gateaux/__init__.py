"""Gateaux derivatives of matrix norms, Birkhoff--James orthogonality and matrix-state certificates."""

from .derivative import (
    DerivativeResult,
    QuotientTrace,
    gd_blockfun,
    gd_fd_oracle,
    gd_opnorm,
    gd_opsys_verify,
    gd_phase,
    gd_phase_profile,
)
from .errors import (
    CertificateRejected,
    DegenerateInputError,
    GateauxError,
    InvalidInputError,
    NotFoundError,
    VerificationError,
)
from .linalg import herm_eig, max_singular_subspace, op_norm, polar_partial_isometry, svd
from .numrange import contains_zero, range_point_certificate, rho_star
from .opspace import (
    BlockOperator,
    CbFactorization,
    DualFunctional,
    FullMatrix,
    Functions,
    Scalars,
    UcpMap,
    cb_factorization,
    hahn_banach_functional,
    matrix_norm,
    support_mapping_check,
    thm3_certificate,
    ucp_from_vector,
)
from .orthogonality import (
    DensityMatrix,
    OrthogonalityDecision,
    Verdict,
    bj_pair,
    bj_subspace,
    density_face_feasibility,
    state_certificate,
)
from .povm import (
    BlockMeasure,
    FinitePovm,
    MatrixFunction,
    compress_measure,
    gd_commutative_certificate,
    integrate_block,
    integrate_scalar,
    state_to_block_measure,
    validate_povm,
)

__version__ = "0.1.0"
