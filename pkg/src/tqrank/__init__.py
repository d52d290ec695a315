"""Low-rank 3-order tensor completion with orthonormal mode-3 transforms."""

from .bench import (
    GridResult,
    PSNR_CAP,
    bernoulli_mask,
    grid_to_csv,
    psnr,
    run_grid,
    synth_low_qrank,
    write_grid_csv,
)
from .orth import (
    check_orthonormal,
    dct_matrix,
    fix_signs,
    identity_q,
    l21_of_unfolding,
    orthonormality_defect,
    pca_q,
    random_orthonormal,
    read_q,
    right_singular_basis,
    write_q,
)
from .qnorm import (
    envelope_gap,
    prox_q_nuclear,
    q_nuclear_norm,
    q_singular_values,
    q_spectral_norm,
    tensor_q_rank,
)
from .solver import SolverConfig, SolverReport, admm_complete, fixed_q_complete, objective_value
from .tensor3 import (
    FormatError,
    ObservationMask,
    fold3,
    frobenius,
    inf_norm_diff,
    mode3_product,
    project_omega,
    project_omega_complement,
    read_mask,
    read_tensor,
    unfold3,
    validate_tensor,
    write_mask,
    write_tensor,
)

__all__ = [
    "FormatError",
    "GridResult",
    "ObservationMask",
    "PSNR_CAP",
    "SolverConfig",
    "SolverReport",
    "admm_complete",
    "bernoulli_mask",
    "check_orthonormal",
    "dct_matrix",
    "envelope_gap",
    "fix_signs",
    "fixed_q_complete",
    "fold3",
    "frobenius",
    "grid_to_csv",
    "identity_q",
    "inf_norm_diff",
    "l21_of_unfolding",
    "mode3_product",
    "objective_value",
    "orthonormality_defect",
    "pca_q",
    "project_omega",
    "project_omega_complement",
    "prox_q_nuclear",
    "psnr",
    "q_nuclear_norm",
    "q_singular_values",
    "q_spectral_norm",
    "random_orthonormal",
    "read_mask",
    "read_q",
    "read_tensor",
    "right_singular_basis",
    "run_grid",
    "synth_low_qrank",
    "tensor_q_rank",
    "unfold3",
    "validate_tensor",
    "write_grid_csv",
    "write_mask",
    "write_q",
    "write_tensor",
]

__version__ = "0.1.0"
