//! Offline and online stages of the recovery.
//!
//! Offline: `û₀` solves the Poisson problem with zero boundary data, `φ̂_j` are
//! the representers, `Ĝ` has entries `ĝ_ij = λ_j(φ̂_i)` and `λ(û₀)` is stored.
//! Online: `ŵ = w − λ(û₀)`, `Ĝâ = ŵ`, `û = û₀ + Σ â_j φ̂_j`. The online stage
//! never touches a sparse solver.

use crate::error::{Error, Result};
use crate::fem::spectral::H1RieszInverse;
use crate::fem::{assemble_mass, h1_error, ExactField, FeFunction};
use crate::functionals::SensorGrid;
use crate::linalg::{dot, one_norm_inverse, pcg, solve_dense, DenseMatrix, TripletBuilder};
use crate::mesh::GridMesh;
use crate::representers::{RepresenterSet, RepresenterSolver};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Gramian condition numbers above this are reported through `log::warn!`.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryDiagnostics {
    /// `‖Ĝ⁻¹‖₁`, infinite when `Ĝ` is singular.
    pub m_hat: f64,
    /// Spectral condition number of `Ĝ`.
    pub gramian_condition: f64,
    /// `‖Ĝ − Ĝᵀ‖∞`
    pub gramian_asymmetry: f64,
    /// `max_j ‖φ̂_j‖_{H¹(Ω)}`
    pub c0_hat: f64,
    /// `max_j ‖λ_j‖` in the dual of the discrete `H¹(Ω)`.
    pub lambda_bound: f64,
    pub max_harmonicity_residual: f64,
    pub max_solver_residual: f64,
    pub u0_solver_residual: f64,
}

impl RecoveryDiagnostics {
    pub fn is_well_posed(&self) -> bool {
        self.m_hat.is_finite()
    }
}

/// Everything the online stage needs.
#[derive(Clone, Debug, PartialEq)]
pub struct OfflineBundle {
    pub mesh: Arc<GridMesh>,
    pub sensors: SensorGrid,
    pub u0_hat: FeFunction,
    /// `λ_j(û₀)`
    pub lambda_u0: Vec<f64>,
    pub representers: RepresenterSet,
    pub gramian: DenseMatrix,
    pub diagnostics: RecoveryDiagnostics,
}

impl OfflineBundle {
    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }
}

/// A-priori bound on the effect of measurement noise `|e_j| ≤ κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseBound {
    pub kappa: f64,
    /// `M̂ · m · κ`
    pub coefficient_bound: f64,
    /// `M̂ · m · Ĉ₀ · κ`
    pub h1_bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub u_hat: FeFunction,
    pub a_hat: Vec<f64>,
    pub w_prime: Vec<f64>,
    /// `‖Ĝâ − ŵ‖∞`
    pub data_residual: f64,
    pub noise: Option<NoiseBound>,
}

impl RecoveryResult {
    pub fn h1_error(&self, exact: &ExactField) -> f64 {
        h1_error(&self.u_hat, exact)
    }
}

/// Runs the offline stage with a fresh solver.
pub fn offline(
    mesh: &Arc<GridMesh>,
    source: Option<&ExactField>,
    sensors: &SensorGrid,
    tol: f64,
) -> Result<OfflineBundle> {
    let solver = RepresenterSolver::new(mesh.clone(), tol)?;
    offline_with(&solver, source, sensors)
}

/// Runs the offline stage reusing an existing solver for the mesh.
pub fn offline_with(
    solver: &RepresenterSolver,
    source: Option<&ExactField>,
    sensors: &SensorGrid,
) -> Result<OfflineBundle> {
    let mesh = solver.mesh().clone();
    let zero = crate::fem::BoundaryFunction::zero(mesh.clone());
    let (u0_hat, u0_stats) = solver.dirichlet().solve(source, &zero)?;

    let loads: Vec<Vec<f64>> = sensors
        .functionals()
        .par_iter()
        .map(|f| f.load_vector(&mesh))
        .collect();
    let representers = solver.solve_all(&loads)?;

    let m = sensors.len();
    let mut gramian = DenseMatrix::zeros(m, m);
    for i in 0..m {
        let phi = representers.phi(i).coefficients();
        for (j, load) in loads.iter().enumerate() {
            gramian.set(i, j, dot(load, phi));
        }
    }
    let lambda_u0: Vec<f64> = loads
        .iter()
        .map(|l| dot(l, u0_hat.coefficients()))
        .collect();

    let lambda_bound = dual_norm_bound(solver, &loads)?;
    let m_hat = one_norm_inverse(&gramian).unwrap_or(f64::INFINITY);
    let gramian_condition = gramian.condition_2norm();
    if gramian_condition > CONDITION_WARNING || gramian_condition.is_nan() {
        log::warn!(
            "Gramian condition number {gramian_condition:.3e} on level {} with {m} sensors",
            mesh.level()
        );
    }
    let diagnostics = RecoveryDiagnostics {
        m_hat,
        gramian_condition,
        gramian_asymmetry: gramian.asymmetry_inf(),
        c0_hat: representers.c0_hat(),
        lambda_bound,
        max_harmonicity_residual: representers
            .solutions
            .iter()
            .map(|s| s.harmonicity_residual)
            .fold(0.0, f64::max),
        max_solver_residual: representers
            .solutions
            .iter()
            .map(|s| s.solver_residual)
            .fold(0.0, f64::max),
        u0_solver_residual: u0_stats.relative_residual,
    };
    Ok(OfflineBundle {
        mesh,
        sensors: sensors.clone(),
        u0_hat,
        lambda_u0,
        representers,
        gramian,
        diagnostics,
    })
}

/// `max_j (ℓ_jᵀ (K + M)⁻¹ ℓ_j)^{1/2}`
fn dual_norm_bound(solver: &RepresenterSolver, loads: &[Vec<f64>]) -> Result<f64> {
    let mesh = solver.mesh();
    let k = solver.dirichlet().stiffness();
    let mass = assemble_mass(mesh);
    let mut b = TripletBuilder::with_capacity(k.rows(), k.cols(), k.nnz() + mass.nnz());
    for matrix in [k, &mass] {
        for r in 0..matrix.rows() {
            let (cols, vals) = matrix.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                b.push(r, c, v);
            }
        }
    }
    let riesz = b.build();
    let inverse = H1RieszInverse::new(mesh.cells_per_side());
    let norms: Vec<Result<f64>> = loads
        .par_iter()
        .map(|l| {
            let (x, _) = pcg(&riesz, l, solver.tol(), &inverse)?;
            Ok(dot(l, &x).max(0.0).sqrt())
        })
        .collect();
    let mut best: f64 = 0.0;
    for n in norms {
        best = best.max(n?);
    }
    Ok(best)
}

/// Online stage for measurements `w`; `kappa` is an optional noise level.
pub fn online(bundle: &OfflineBundle, w: &[f64], kappa: Option<f64>) -> Result<RecoveryResult> {
    let m = bundle.len();
    if w.len() != m {
        return Err(Error::Config(format!(
            "expected {m} measurements, got {}",
            w.len()
        )));
    }
    if let Some(k) = kappa {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::Config(format!(
                "noise level {k} must be finite and nonnegative"
            )));
        }
    }
    let w_prime: Vec<f64> = w
        .iter()
        .zip(&bundle.lambda_u0)
        .map(|(a, b)| a - b)
        .collect();
    let solution = solve_dense(&bundle.gramian, &w_prime).map_err(|e| Error::Recovery {
        reason: e.to_string(),
        condition: bundle.diagnostics.gramian_condition,
    })?;
    let mut u_hat = bundle.u0_hat.clone();
    for (j, &a) in solution.x.iter().enumerate() {
        u_hat.add_scaled(a, bundle.representers.phi(j));
    }
    let d = &bundle.diagnostics;
    let noise = kappa.map(|kappa| NoiseBound {
        kappa,
        coefficient_bound: d.m_hat * m as f64 * kappa,
        h1_bound: d.m_hat * m as f64 * d.c0_hat * kappa,
    });
    Ok(RecoveryResult {
        u_hat,
        a_hat: solution.x,
        w_prime,
        data_residual: solution.residual_inf,
        noise,
    })
}

/// Online stage with measurements taken from a closed-form field.
pub fn recover_from_exact(bundle: &OfflineBundle, exact: &ExactField) -> Result<RecoveryResult> {
    online(bundle, &bundle.sensors.measure_exact(exact), None)
}

/// Online stage with measurements of the Q1 interpolant of `exact` on `data_mesh`.
pub fn recover_from_interpolant(
    bundle: &OfflineBundle,
    exact: &ExactField,
    data_mesh: &Arc<GridMesh>,
) -> Result<RecoveryResult> {
    let w: Vec<f64> = bundle
        .sensors
        .functionals()
        .iter()
        .map(|f| f.apply_to_interpolant(exact, data_mesh))
        .collect();
    online(bundle, &w, None)
}
