//! Discrete Riesz representers of measurement functionals in the space of
//! discretely harmonic Q1 fields normed by the `H¹(Γ)` norm of their traces.
//!
//! The representer `φ` of `λ` and a multiplier `π` over interior nodes solve
//!
//! ```text
//! [ A_Γ   Bᵀ ] [φ]   [ℓ]        A_Γ : boundary H¹(Γ) Gram, embedded at boundary nodes
//! [ B     0  ] [π] = [0]        B   : stiffness rows of interior nodes
//! ```
//!
//! with `ℓᵢ = λ(Nᵢ)`. Unknowns are ordered as all mesh nodes, then interior nodes.
//! Splitting rows into boundary and interior parts the system is block
//! triangular after reordering: `K_II π = ℓ_I`, then
//! `A_Γ φ_B = ℓ_B − K_BI π`, then `K_II φ_I = −K_IB φ_B`. [`RepresenterSolver`]
//! solves it that way, with iterative refinement on the full saddle residual.

use crate::error::{Error, Result};
use crate::fem::spectral::BoundaryGramInverse;
use crate::fem::{
    assemble_boundary_h1, assemble_stiffness, fe_h1_norm, DirichletSolver, FeFunction,
};
use crate::functionals::{MeasurementFunctional, SensorGrid};
use crate::linalg::{norm2, pcg, CsrMatrix, TripletBuilder};
use crate::mesh::GridMesh;
use rayon::prelude::*;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

const MAX_REFINEMENTS: usize = 8;

/// Multiple of `ε ‖ |S| |x| ‖₂` below which a stagnated residual is accepted.
const ROUNDING_FACTOR: f64 = 1.0;

static SOLVE_COUNT: AtomicUsize = AtomicUsize::new(0);

/// Number of representer solves performed by this process so far.
pub fn representer_solve_count() -> usize {
    SOLVE_COUNT.load(Ordering::Relaxed)
}

/// Explicit saddle-point matrix and right-hand side for one functional.
pub fn assemble_saddle_system(
    mesh: &GridMesh,
    functional: &MeasurementFunctional,
) -> (CsrMatrix, Vec<f64>) {
    let n = mesh.node_count();
    let interior = mesh.interior_ids();
    let dim = n + interior.len();
    let gram = assemble_boundary_h1(mesh);
    let stiffness = assemble_stiffness(mesh);
    let mut b = TripletBuilder::with_capacity(dim, dim, gram.nnz() + 2 * 9 * interior.len());
    let chain = mesh.boundary_chain();
    for r in 0..gram.rows() {
        let (cols, vals) = gram.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            b.push(chain[r], chain[c], v);
        }
    }
    for (k, &node) in interior.iter().enumerate() {
        let (cols, vals) = stiffness.row(node);
        for (&c, &v) in cols.iter().zip(vals) {
            b.push(n + k, c, v);
            b.push(c, n + k, v);
        }
    }
    let mut rhs = functional.load_vector(mesh);
    rhs.resize(dim, 0.0);
    (b.build(), rhs)
}

/// One representer with its multiplier and residual diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresenterSolution {
    pub phi: FeFunction,
    /// Multiplier over interior nodes.
    pub pi: Vec<f64>,
    /// `‖(Kφ)_I‖₂ / max(1, ‖φ‖₂)`
    pub harmonicity_residual: f64,
    /// Relative residual of the full saddle system.
    pub solver_residual: f64,
}

/// Representers of a sensor set on one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct RepresenterSet {
    pub mesh: Arc<GridMesh>,
    pub solutions: Vec<RepresenterSolution>,
    /// `‖φ̂_j‖_{X¹} = (‖φ̂_j|_Γ‖²_{H¹(Γ)} + ‖∇φ̂_j‖²)^{1/2}`
    pub x1_norms: Vec<f64>,
    /// `‖φ̂_j‖_{H¹(Ω)}`
    pub h1_norms: Vec<f64>,
}

impl RepresenterSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn phi(&self, j: usize) -> &FeFunction {
        &self.solutions[j].phi
    }

    /// `max_j ‖φ̂_j‖_{H¹(Ω)}`
    pub fn c0_hat(&self) -> f64 {
        self.h1_norms.iter().cloned().fold(0.0, f64::max)
    }
}

/// Reusable saddle-point solver for one mesh; only the load vector changes
/// between functionals.
pub struct RepresenterSolver {
    dirichlet: DirichletSolver,
    boundary_gram: CsrMatrix,
    boundary_inverse: BoundaryGramInverse,
    /// `K_BI`
    coupling_t: CsrMatrix,
    tol: f64,
}

impl RepresenterSolver {
    pub fn new(mesh: Arc<GridMesh>, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::Config(format!(
                "solver tolerance {tol:e} outside (0, 1e-6]"
            )));
        }
        let boundary_gram = assemble_boundary_h1(&mesh);
        let boundary_inverse = BoundaryGramInverse::new(boundary_gram.rows(), mesh.h());
        let dirichlet = DirichletSolver::new(mesh, tol);
        let coupling_t = dirichlet.coupling_matrix().transpose();
        Ok(Self {
            dirichlet,
            boundary_gram,
            boundary_inverse,
            coupling_t,
            tol,
        })
    }

    pub fn mesh(&self) -> &Arc<GridMesh> {
        self.dirichlet.mesh()
    }

    pub fn dirichlet(&self) -> &DirichletSolver {
        &self.dirichlet
    }

    pub fn boundary_gram(&self) -> &CsrMatrix {
        &self.boundary_gram
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn split(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mesh = self.mesh();
        (
            mesh.boundary_chain().iter().map(|&k| v[k]).collect(),
            mesh.interior_ids().iter().map(|&k| v[k]).collect(),
        )
    }

    /// Block elimination for right-hand side `(f, c)`; returns `(φ, π)`.
    fn eliminate(&self, f: &[f64], c: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (f_b, f_i) = self.split(f);
        let (pi, _) = self.dirichlet.solve_interior(&f_i)?;
        let mut r_b = self.coupling_t.mul_vec(&pi);
        for (r, fb) in r_b.iter_mut().zip(&f_b) {
            *r = fb - *r;
        }
        let (phi_b, _) = pcg(&self.boundary_gram, &r_b, self.tol, &self.boundary_inverse)?;
        let mut r_i = self.dirichlet.coupling_matrix().mul_vec(&phi_b);
        for (r, ci) in r_i.iter_mut().zip(c) {
            *r = ci - *r;
        }
        let (phi_i, _) = self.dirichlet.solve_interior(&r_i)?;
        let mesh = self.mesh();
        let mut phi = vec![0.0; mesh.node_count()];
        for (&k, v) in mesh.boundary_chain().iter().zip(phi_b) {
            phi[k] = v;
        }
        for (&k, v) in mesh.interior_ids().iter().zip(phi_i) {
            phi[k] = v;
        }
        Ok((phi, pi))
    }

    /// Saddle residual `(f − Aφ − Bᵀπ, c − Bφ)`.
    fn residual(&self, phi: &[f64], pi: &[f64], f: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mesh = self.mesh();
        let k = self.dirichlet.stiffness();
        let (phi_b, _) = self.split(phi);
        let a_phi = self.boundary_gram.mul_vec(&phi_b);
        let mut r1 = f.to_vec();
        for (&node, v) in mesh.boundary_chain().iter().zip(&a_phi) {
            r1[node] -= v;
        }
        // Bᵀπ = K[:, I] π
        let mut pi_full = vec![0.0; mesh.node_count()];
        for (&node, &v) in mesh.interior_ids().iter().zip(pi) {
            pi_full[node] = v;
        }
        let bt_pi = k.mul_vec(&pi_full);
        for (r, v) in r1.iter_mut().zip(&bt_pi) {
            *r -= v;
        }
        let k_phi = k.mul_vec(phi);
        let r2 = mesh
            .interior_ids()
            .iter()
            .zip(c)
            .map(|(&node, ci)| ci - k_phi[node])
            .collect();
        (r1, r2)
    }

    /// `‖ |S| |x| ‖₂`, the scale of rounding errors when forming `Sx`.
    fn rounding_scale(&self, phi: &[f64], pi: &[f64]) -> f64 {
        let mesh = self.mesh();
        let abs_mul = |m: &CsrMatrix, x: &[f64]| -> Vec<f64> {
            (0..m.rows())
                .map(|r| {
                    let (cols, vals) = m.row(r);
                    cols.iter().zip(vals).map(|(&c, v)| (v * x[c]).abs()).sum()
                })
                .collect()
        };
        let k = self.dirichlet.stiffness();
        let (phi_b, _) = self.split(phi);
        let mut pi_full = vec![0.0; mesh.node_count()];
        for (&node, &v) in mesh.interior_ids().iter().zip(pi) {
            pi_full[node] = v;
        }
        let mut top = abs_mul(k, &pi_full);
        for (&node, v) in mesh
            .boundary_chain()
            .iter()
            .zip(abs_mul(&self.boundary_gram, &phi_b))
        {
            top[node] += v;
        }
        let k_phi = abs_mul(k, phi);
        let bottom: Vec<f64> = mesh.interior_ids().iter().map(|&n| k_phi[n]).collect();
        (norm2(&top).powi(2) + norm2(&bottom).powi(2)).sqrt()
    }

    /// Representer for the load vector `ℓᵢ = λ(Nᵢ)`.
    pub fn solve_load(&self, load: &[f64]) -> Result<RepresenterSolution> {
        SOLVE_COUNT.fetch_add(1, Ordering::Relaxed);
        let mesh = self.mesh().clone();
        assert_eq!(load.len(), mesh.node_count());
        let zero = vec![0.0; mesh.interior_ids().len()];
        let rhs_norm = norm2(load);
        let (mut phi, mut pi) = self.eliminate(load, &zero)?;
        let mut achieved = 0.0;
        if rhs_norm > 0.0 {
            let mut previous = f64::INFINITY;
            for refinement in 0.. {
                let (r1, r2) = self.residual(&phi, &pi, load, &zero);
                achieved = (norm2(&r1).powi(2) + norm2(&r2).powi(2)).sqrt() / rhs_norm;
                if achieved <= self.tol {
                    break;
                }
                if achieved > 0.5 * previous || refinement == MAX_REFINEMENTS {
                    let floor =
                        ROUNDING_FACTOR * f64::EPSILON * self.rounding_scale(&phi, &pi) / rhs_norm;
                    if achieved <= floor {
                        log::debug!("saddle residual {achieved:e} at rounding floor {floor:e}");
                        break;
                    }
                    return Err(Error::Solver {
                        method: "saddle-point block elimination",
                        achieved,
                        target: self.tol,
                        iterations: refinement,
                    });
                }
                previous = achieved;
                let (dphi, dpi) = self.eliminate(&r1, &r2)?;
                crate::linalg::axpy(1.0, &dphi, &mut phi);
                crate::linalg::axpy(1.0, &dpi, &mut pi);
            }
        }
        let phi = FeFunction::new(mesh, phi);
        let harmonicity_residual =
            self.dirichlet.harmonicity_residual(&phi) / norm2(phi.coefficients()).max(1.0);
        Ok(RepresenterSolution {
            phi,
            pi,
            harmonicity_residual,
            solver_residual: achieved,
        })
    }

    pub fn compute(&self, functional: &MeasurementFunctional) -> Result<RepresenterSolution> {
        self.solve_load(&functional.load_vector(self.mesh()))
    }

    /// `‖φ|_Γ‖²_{H¹(Γ)}` of a discrete field.
    pub fn trace_norm_squared(&self, v: &FeFunction) -> f64 {
        self.boundary_gram.quadratic_form(v.trace().values())
    }

    /// `⟨u|_Γ, v|_Γ⟩_{H¹(Γ)}`
    pub fn trace_inner(&self, u: &FeFunction, v: &FeFunction) -> f64 {
        self.boundary_gram
            .bilinear_form(u.trace().values(), v.trace().values())
    }

    /// Solves for every load vector (in parallel) and collects norms.
    pub fn solve_all(&self, loads: &[Vec<f64>]) -> Result<RepresenterSet> {
        let results: Vec<Result<RepresenterSolution>> =
            loads.par_iter().map(|l| self.solve_load(l)).collect();
        let mut solutions = Vec::with_capacity(results.len());
        for (index, r) in results.into_iter().enumerate() {
            solutions.push(r.map_err(|e| Error::Representer {
                index,
                source: Box::new(e),
            })?);
        }
        let k = self.dirichlet.stiffness();
        let x1_norms = solutions
            .iter()
            .map(|s| {
                (self.trace_norm_squared(&s.phi) + k.quadratic_form(s.phi.coefficients()))
                    .max(0.0)
                    .sqrt()
            })
            .collect();
        let h1_norms = solutions.iter().map(|s| fe_h1_norm(&s.phi)).collect();
        Ok(RepresenterSet {
            mesh: self.mesh().clone(),
            solutions,
            x1_norms,
            h1_norms,
        })
    }
}

/// Representer of a single functional.
pub fn compute_representer(
    mesh: &Arc<GridMesh>,
    functional: &MeasurementFunctional,
    tol: f64,
) -> Result<RepresenterSolution> {
    RepresenterSolver::new(mesh.clone(), tol)?.compute(functional)
}

/// Representers of all functionals of a sensor set, in sensor order.
pub fn compute_representer_set(
    mesh: &Arc<GridMesh>,
    sensors: &SensorGrid,
    tol: f64,
) -> Result<RepresenterSet> {
    let solver = RepresenterSolver::new(mesh.clone(), tol)?;
    let loads: Vec<Vec<f64>> = sensors
        .functionals()
        .iter()
        .map(|f| f.load_vector(mesh))
        .collect();
    solver.solve_all(&loads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{minres, DEFAULT_TOL};
    use crate::mesh::{build_mesh, Point};

    fn mesh(level: u32) -> Arc<GridMesh> {
        Arc::new(build_mesh(level).unwrap())
    }

    #[test]
    fn saddle_system_shape() {
        let m = mesh(2);
        let f = MeasurementFunctional::point(Point::new(0.3, 0.6)).unwrap();
        let (a, rhs) = assemble_saddle_system(&m, &f);
        assert_eq!(a.rows(), 34);
        assert_eq!(rhs.len(), 34);
        assert!(rhs[25..].iter().all(|&v| v == 0.0));
        assert!(a.max_asymmetry() <= 1e-15);
        // lower-right block is zero
        for r in 25..34 {
            assert!(a.row(r).0.iter().all(|&c| c < 25));
        }
    }

    #[test]
    fn block_elimination_matches_minres() {
        let m = mesh(3);
        for f in [
            MeasurementFunctional::gaussian(Point::new(0.75, 0.5), 0.1).unwrap(),
            MeasurementFunctional::point(Point::new(0.4, 0.3)).unwrap(),
        ] {
            let (a, rhs) = assemble_saddle_system(&m, &f);
            let (x, _) = minres(&a, &rhs, 1e-11).unwrap();
            let sol = compute_representer(&m, &f, DEFAULT_TOL).unwrap();
            let n = m.node_count();
            let scale = crate::linalg::norm_inf(&x[..n]);
            for (p, q) in sol.phi.coefficients().iter().zip(&x[..n]) {
                assert!((p - q).abs() <= 1e-8 * scale);
            }
            for (p, q) in sol.pi.iter().zip(&x[n..]) {
                assert!((p - q).abs() <= 1e-8 * crate::linalg::norm_inf(&x[n..]).max(1.0));
            }
            assert!(sol.solver_residual <= DEFAULT_TOL);
            assert!(sol.harmonicity_residual <= 1e-8);
        }
    }

    #[test]
    fn self_consistency() {
        let m = mesh(4);
        let f = MeasurementFunctional::gaussian(Point::new(0.3, 0.6), 0.1).unwrap();
        let solver = RepresenterSolver::new(m.clone(), DEFAULT_TOL).unwrap();
        let s = solver.compute(&f).unwrap();
        let lhs = f.apply_to_fe(&s.phi);
        let rhs = solver.trace_norm_squared(&s.phi);
        assert!(lhs > 0.0);
        assert!((lhs - rhs).abs() <= 1e-8 * rhs);
    }

    #[test]
    fn set_order_and_errors() {
        let m = mesh(3);
        let f = MeasurementFunctional::point(Point::new(0.5, 0.5)).unwrap();
        let sensors = SensorGrid::new(vec![f, f]).unwrap();
        let set = compute_representer_set(&m, &sensors, DEFAULT_TOL).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.solutions[0], set.solutions[1]);
        assert!(set.solutions[0].harmonicity_residual <= 1e-8);
        assert!(set.c0_hat() > 0.0);
        assert!(RepresenterSolver::new(m, 1e-3).is_err());
    }
}
