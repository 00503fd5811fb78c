//! Exact diagonalization on small Fock sectors and the many-body form of the
//! Feshbach–Schur identity.

pub mod hamiltonian;
pub mod lanczos;
pub mod report;
pub mod sector;
pub mod sparse;
pub mod transformed;

pub use hamiltonian::{apply_word, build_hamiltonian, hamiltonian_at_scale, max_cross_momentum, Ladder};
pub use lanczos::{lowest_eigenvalues, lowest_eigenvalues_with, Eigenpairs, LanczosConfig};
pub use report::{dense_two_body_ground, ed_report, first_order_energy, EdReport, EdRow};
pub use sector::{build_sector, build_sector_with_cap, FockSector, Occupation};
pub use sparse::SparseOperator;
pub use transformed::{
    build_transformed_variables, remainder_operator, verify_many_body_identity, CorrelationTable, IdentityReport,
    TransformedVariables,
};
