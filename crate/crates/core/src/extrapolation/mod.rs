//! Off-diagonal extrapolation, the structure of restricted vector weights and
//! the resulting endpoint bounds.

mod endpoint;
mod offdiag;
mod structure;

pub use endpoint::{
    diagonal_index_residual, endpoint_verify, endpoint_verify_maximal, multilinear_ratio,
    EndpointReport, MultilinearRatio,
};
pub use offdiag::{
    build_h, construct_v, construct_v_from, gamma_optimize, membership_residual, offdiag_verify,
    sawyer_ratio, y_grid, OffDiagExponents, OffDiagRow, OffDiagTrace,
};
pub use structure::{assemble_last_weight, factorization_check, AssemblyReport, FactorizationReport};
