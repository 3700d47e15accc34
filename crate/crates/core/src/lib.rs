//! Near-optimal recovery of Poisson solutions on the unit square from a finite
//! set of linear measurements.
//!
//! The recovery is split into an offline stage, which depends only on the
//! mesh, the source and the sensors, and an online stage that maps a
//! measurement vector to a Q1 field:
//!
//! ```no_run
//! use harmrec_core::{build_mesh, offline, online, SensorGrid};
//! use std::sync::Arc;
//!
//! let mesh = Arc::new(build_mesh(6)?);
//! let sensors = SensorGrid::gaussian_grid(9, 0.1)?;
//! let bundle = offline(&mesh, None, &sensors, 1e-10)?;
//! let result = online(&bundle, &[1.0; 9], None)?;
//! println!("{}", result.data_residual);
//! # Ok::<(), harmrec_core::Error>(())
//! ```

pub mod bundle;
pub mod error;
pub mod fem;
pub mod functionals;
pub mod linalg;
pub mod mesh;
pub mod recovery;
pub mod representers;
pub mod stats;

pub use bundle::{read_bundle, read_bundle_file, write_bundle, write_bundle_file};
pub use error::{Error, Result};
pub use fem::{
    fe_difference_norms, fe_h1_norm, h1_error, harmonic_extension, solve_dirichlet_poisson,
    BoundaryFunction, DirichletSolver, ExactField, FeFunction,
};
pub use functionals::{grid_centers, MeasurementFunctional, SensorGrid, DEFAULT_RADIUS};
pub use linalg::{CsrMatrix, DenseMatrix, DEFAULT_TOL};
pub use mesh::{build_mesh, GridMesh, Point};
pub use recovery::{
    offline, online, recover_from_exact, NoiseBound, OfflineBundle, RecoveryDiagnostics,
    RecoveryResult,
};
pub use representers::{
    assemble_saddle_system, compute_representer, compute_representer_set, RepresenterSet,
    RepresenterSolution, RepresenterSolver,
};
pub use stats::{convergence_slope, least_squares_slope};
