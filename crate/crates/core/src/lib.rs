//! Transfer operators of expanding circle maps in a Fourier basis, linear
//! response of invariant densities and isolated eigenvalues, and closed-form
//! optimal map perturbations under Sobolev constraints.

pub mod adjoint;
pub mod circle_map;
pub mod cli;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod response;
pub mod transfer;

pub use adjoint::{adjoint_representative, h1_pairing, normalize_pair, EigenData};
pub use circle_map::CircleMap;
pub use error::{Error, ErrorClass, Result};
pub use fourier::{FourierVector, GridSamples};
pub use optimizer::{
    objective_certificate, optimal_eigenvalue_perturbation, optimal_expectation_perturbation, OptimizationResult,
};
pub use oracle::{fd_density_response, fd_eigenvalue_response, ulam_density, FdReport};
pub use response::{DerivativeScheme, ResponseContext};
pub use transfer::{MarkovMatrix, Resolvent, TransferMatrix};
