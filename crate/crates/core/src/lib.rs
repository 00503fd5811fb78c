//! Numerical engine for dilute Bose gases on a periodic momentum lattice.
//!
//! The pipeline runs bottom-up:
//!
//! * [`potential`]: radial interactions, Fourier transforms and the continuum
//!   scattering length;
//! * [`lattice`]: momentum lattices and fixed-total-momentum pair blocks;
//! * [`twobody`]: the Feshbach–Schur renormalized two-body coefficients;
//! * [`bogoliubov`]: dispersion tables, LHY sums and excitation spectra;
//! * [`fock`]: small-N exact diagonalization and the many-body operator identity.

pub mod bogoliubov;
pub mod error;
pub mod fock;
pub mod lattice;
pub mod potential;
pub mod quadrature;
pub mod twobody;

pub use error::{Error, Result};
pub use lattice::{LatticeSpec, LowCutoff, Momentum, MomentumBlock};
pub use potential::{Potential, ScatteringSolution};
