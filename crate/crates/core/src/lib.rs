//! Asymptotic constants of motion for first-order ODEs y' = sum_k P_k(y) / x^k near x = infinity.
//!
//! The crate builds formal constants of motion C_n(y, x) by quadrature of the F-recursion,
//! inverts them for the solution, locates movable singularities through the singular-domain
//! constant, and carries a Runge-Kutta and power-series oracle for cross-checks.

pub mod abel;
pub mod comotion;
pub mod error;
pub mod inversion;
pub mod ode;
pub mod oracle;
pub mod path;
pub mod poly;
pub mod rk;
pub mod singular;

pub use num_complex::Complex64;

pub use comotion::{build_constant, BranchState, ConstantSeries, FSystem, FVector, Kind};
pub use error::{Error, Result};
pub use inversion::{constant_from_ic, continue_trajectory, newton_invert, TrajectorySample};
pub use ode::OdeSpec;
pub use path::{deform_path, Contour, Path, Plane, Segment, Side};
pub use poly::{poly_roots, residue, ComplexPoly, PoleOrder, RootSet};
pub use rk::Tolerance;
pub use singular::{
    build_singular, locate_singularity, singularity_array, verify_singularity, SingularSeries, SingularityReport,
};
