//! Q1 finite elements on [`GridMesh`]: assembly, Dirichlet solves, the discrete
//! harmonic extension, point evaluation and error norms.

mod assembly;
mod dirichlet;
mod norms;
pub mod quadrature;
pub mod spectral;

pub use assembly::{
    assemble_boundary_h1, assemble_mass, assemble_source_load, assemble_stiffness,
    ELEMENT_MASS_UNIT, ELEMENT_STIFFNESS,
};
pub use dirichlet::{harmonic_extension, solve_dirichlet_poisson, DirichletSolver};
pub use norms::{
    fe_difference_norms, fe_h1_norm, h1_error, l2_error, linf_error_on_nodes, ErrorNorms,
    DEFAULT_ERROR_ORDER,
};

use crate::error::Result;
use crate::mesh::{GridMesh, Point};
use std::fmt;
use std::sync::Arc;

/// Q1 shape functions on the reference square in local order SW, SE, NE, NW.
#[inline]
pub fn shape_values(xi: f64, eta: f64) -> [f64; 4] {
    [
        (1.0 - xi) * (1.0 - eta),
        xi * (1.0 - eta),
        xi * eta,
        (1.0 - xi) * eta,
    ]
}

/// Reference gradients `(∂ξ, ∂η)` of the Q1 shape functions.
#[inline]
pub fn shape_gradients(xi: f64, eta: f64) -> [[f64; 2]; 4] {
    [
        [-(1.0 - eta), -(1.0 - xi)],
        [1.0 - eta, -xi],
        [eta, xi],
        [-eta, 1.0 - xi],
    ]
}

/// Continuous piecewise-bilinear field given by its nodal values.
#[derive(Clone, Debug, PartialEq)]
pub struct FeFunction {
    mesh: Arc<GridMesh>,
    coefficients: Vec<f64>,
}

impl FeFunction {
    /// Panics if the coefficient count does not match the mesh.
    pub fn new(mesh: Arc<GridMesh>, coefficients: Vec<f64>) -> Self {
        assert_eq!(
            coefficients.len(),
            mesh.node_count(),
            "one coefficient per mesh node"
        );
        Self { mesh, coefficients }
    }

    pub fn zero(mesh: Arc<GridMesh>) -> Self {
        let n = mesh.node_count();
        Self::new(mesh, vec![0.0; n])
    }

    /// Nodal interpolant of a closed-form field.
    pub fn interpolate(mesh: Arc<GridMesh>, field: &ExactField) -> Self {
        let coefficients = (0..mesh.node_count())
            .map(|k| field.value(mesh.node_point(k)))
            .collect();
        Self::new(mesh, coefficients)
    }

    pub fn mesh(&self) -> &Arc<GridMesh> {
        &self.mesh
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<f64> {
        self.coefficients
    }

    /// Bilinear interpolation inside the cell returned by `locate_cell`.
    pub fn evaluate(&self, p: Point) -> Result<f64> {
        let loc = self.mesh.locate_cell(p)?;
        let nodes = self.mesh.cell_nodes(loc.ci, loc.cj);
        let n = shape_values(loc.xi, loc.eta);
        Ok((0..4).map(|k| n[k] * self.coefficients[nodes[k]]).sum())
    }

    pub fn trace(&self) -> BoundaryFunction {
        let values = self
            .mesh
            .boundary_chain()
            .iter()
            .map(|&k| self.coefficients[k])
            .collect();
        BoundaryFunction::new(self.mesh.clone(), values)
    }

    /// `self += alpha * other`; both must live on the same mesh.
    pub fn add_scaled(&mut self, alpha: f64, other: &FeFunction) {
        assert_eq!(self.coefficients.len(), other.coefficients.len());
        crate::linalg::axpy(alpha, &other.coefficients, &mut self.coefficients);
    }

    /// Re-expresses the field on a uniformly refined mesh. Exact because Q1 spaces
    /// on nested uniform meshes are nested.
    pub fn prolongate(&self, fine: Arc<GridMesh>) -> Result<FeFunction> {
        if fine.level() < self.mesh.level() {
            return Err(crate::Error::Config(format!(
                "cannot prolongate from level {} to coarser level {}",
                self.mesh.level(),
                fine.level()
            )));
        }
        let coefficients = (0..fine.node_count())
            .map(|k| self.evaluate(fine.node_point(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(FeFunction::new(fine, coefficients))
    }
}

/// Nodal values on the boundary chain (continuous piecewise-linear traces).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFunction {
    mesh: Arc<GridMesh>,
    values: Vec<f64>,
}

impl BoundaryFunction {
    pub fn new(mesh: Arc<GridMesh>, values: Vec<f64>) -> Self {
        assert_eq!(
            values.len(),
            mesh.boundary_chain().len(),
            "one value per boundary chain node"
        );
        Self { mesh, values }
    }

    pub fn zero(mesh: Arc<GridMesh>) -> Self {
        let n = mesh.boundary_chain().len();
        Self::new(mesh, vec![0.0; n])
    }

    /// Nodal trace of a closed-form field.
    pub fn from_field(mesh: Arc<GridMesh>, field: &ExactField) -> Self {
        let values = mesh
            .boundary_chain()
            .iter()
            .map(|&k| field.value(mesh.node_point(k)))
            .collect();
        Self::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<GridMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

type ValueFn = dyn Fn(f64, f64) -> f64 + Send + Sync;
type GradientFn = dyn Fn(f64, f64) -> [f64; 2] + Send + Sync;

/// A closed-form scalar field with its gradient.
#[derive(Clone)]
pub struct ExactField {
    name: String,
    value: Arc<ValueFn>,
    gradient: Arc<GradientFn>,
}

impl fmt::Debug for ExactField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactField")
            .field("name", &self.name)
            .finish()
    }
}

impl ExactField {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: Arc::new(gradient),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(format!("{c}"), move |_, _| c, |_, _| [0.0, 0.0])
    }

    /// The harmonic test field `eˣ cos y`.
    pub fn exp_cos() -> Self {
        Self::new(
            "exp(x)cos(y)",
            |x, y| x.exp() * y.cos(),
            |x, y| [x.exp() * y.cos(), -x.exp() * y.sin()],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn value(&self, p: Point) -> f64 {
        (self.value)(p.x, p.y)
    }

    #[inline]
    pub fn gradient(&self, p: Point) -> [f64; 2] {
        (self.gradient)(p.x, p.y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    #[test]
    fn evaluate_examples() {
        let mesh = Arc::new(build_mesh(3).unwrap());
        let ones = FeFunction::new(mesh.clone(), vec![1.0; mesh.node_count()]);
        for p in [
            Point::new(0.1, 0.7),
            Point::new(1.0, 0.0),
            Point::new(0.5, 0.33),
        ] {
            assert!((ones.evaluate(p).unwrap() - 1.0).abs() < 1e-15);
        }
        let x = FeFunction::interpolate(
            mesh.clone(),
            &ExactField::new("x", |x, _| x, |_, _| [1.0, 0.0]),
        );
        assert!((x.evaluate(Point::new(0.3, 0.9)).unwrap() - 0.3).abs() < 1e-15);
        assert!(x.evaluate(Point::new(0.3, 1.5)).is_err());

        let coarse = Arc::new(build_mesh(1).unwrap());
        let xy =
            FeFunction::interpolate(coarse, &ExactField::new("xy", |x, y| x * y, |x, y| [y, x]));
        assert!((xy.evaluate(Point::new(0.25, 0.75)).unwrap() - 0.1875).abs() < 1e-15);
    }

    #[test]
    fn exact_gradient_matches_finite_differences() {
        let f = ExactField::exp_cos();
        let d = 1e-6;
        for p in [
            Point::new(0.2, 0.3),
            Point::new(0.9, 0.1),
            Point::new(0.5, 0.95),
        ] {
            let g = f.gradient(p);
            let gx =
                (f.value(Point::new(p.x + d, p.y)) - f.value(Point::new(p.x - d, p.y))) / (2.0 * d);
            let gy =
                (f.value(Point::new(p.x, p.y + d)) - f.value(Point::new(p.x, p.y - d))) / (2.0 * d);
            assert!((g[0] - gx).abs() < 1e-8 && (g[1] - gy).abs() < 1e-8);
        }
    }

    #[test]
    fn prolongation_is_exact_for_bilinear() {
        let coarse = Arc::new(build_mesh(2).unwrap());
        let fine = Arc::new(build_mesh(4).unwrap());
        let field = ExactField::new(
            "1+2x-y+3xy",
            |x, y| 1.0 + 2.0 * x - y + 3.0 * x * y,
            |x, y| [2.0 + 3.0 * y, -1.0 + 3.0 * x],
        );
        let v = FeFunction::interpolate(coarse, &field)
            .prolongate(fine.clone())
            .unwrap();
        let w = FeFunction::interpolate(fine, &field);
        for (a, b) in v.coefficients().iter().zip(w.coefficients()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
