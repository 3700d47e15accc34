use super::assembly::{ELEMENT_MASS_UNIT, ELEMENT_STIFFNESS};
use super::quadrature::tensor_rule;
use super::{shape_gradients, shape_values, ExactField, FeFunction};
use crate::error::{Error, Result};
use crate::mesh::Point;
use rayon::prelude::*;

/// Gauss points per direction for error quadrature.
pub const DEFAULT_ERROR_ORDER: usize = 3;

/// Norms of `v − u` for a discrete `v` and a closed-form `u`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l2: f64,
    /// `‖∇(v − u)‖_{L²}`
    pub h1_seminorm: f64,
    /// `(‖v − u‖²_{L²} + ‖∇(v − u)‖²_{L²})^{1/2}`
    pub h1: f64,
}

impl ErrorNorms {
    /// Per-cell tensor Gauss quadrature of the given order.
    pub fn compute(v: &FeFunction, reference: &ExactField, order: usize) -> Self {
        let mesh = v.mesh();
        let rule = tensor_rule(order);
        let h = mesh.h();
        let area = h * h;
        let c = v.coefficients();
        // row sums are reduced in order so the result does not depend on threading
        let rows: Vec<(f64, f64)> = (0..mesh.cells_per_side())
            .into_par_iter()
            .map(|cj| {
                let (mut l2, mut semi) = (0.0, 0.0);
                for ci in 0..mesh.cells_per_side() {
                    let nodes = mesh.cell_nodes(ci, cj);
                    let o = mesh.cell_origin(ci, cj);
                    for &(xi, eta, w) in &rule {
                        let n = shape_values(xi, eta);
                        let g = shape_gradients(xi, eta);
                        let (mut val, mut gx, mut gy) = (0.0, 0.0, 0.0);
                        for k in 0..4 {
                            let ck = c[nodes[k]];
                            val += n[k] * ck;
                            gx += g[k][0] * ck / h;
                            gy += g[k][1] * ck / h;
                        }
                        let p = Point::new(o.x + xi * h, o.y + eta * h);
                        let du = val - reference.value(p);
                        let gr = reference.gradient(p);
                        l2 += w * area * du * du;
                        semi += w * area * ((gx - gr[0]).powi(2) + (gy - gr[1]).powi(2));
                    }
                }
                (l2, semi)
            })
            .collect();
        let (l2, semi) = rows
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        Self {
            l2: l2.sqrt(),
            h1_seminorm: semi.sqrt(),
            h1: (l2 + semi).sqrt(),
        }
    }
}

/// `‖v − u‖_{H¹(Ω)}` with the default quadrature.
pub fn h1_error(v: &FeFunction, reference: &ExactField) -> f64 {
    ErrorNorms::compute(v, reference, DEFAULT_ERROR_ORDER).h1
}

/// `‖v − u‖_{L²(Ω)}` with the default quadrature.
pub fn l2_error(v: &FeFunction, reference: &ExactField) -> f64 {
    ErrorNorms::compute(v, reference, DEFAULT_ERROR_ORDER).l2
}

/// `max_k |v_k − u(x_k)|` over mesh nodes.
pub fn linf_error_on_nodes(v: &FeFunction, reference: &ExactField) -> f64 {
    let mesh = v.mesh();
    v.coefficients()
        .iter()
        .enumerate()
        .map(|(k, &c)| (c - reference.value(mesh.node_point(k))).abs())
        .fold(0.0, f64::max)
}

fn cellwise_energy(v: &[f64], mesh: &crate::mesh::GridMesh) -> (f64, f64) {
    let area = mesh.h() * mesh.h();
    let (mut mass, mut stiff) = (0.0, 0.0);
    for (ci, cj) in mesh.cells() {
        let nodes = mesh.cell_nodes(ci, cj);
        let local = nodes.map(|k| v[k]);
        for a in 0..4 {
            for b in 0..4 {
                let p = local[a] * local[b];
                mass += area * ELEMENT_MASS_UNIT[a][b] * p;
                stiff += ELEMENT_STIFFNESS[a][b] * p;
            }
        }
    }
    (mass, stiff)
}

/// Exact `‖v‖_{H¹(Ω)}` of a discrete field.
pub fn fe_h1_norm(v: &FeFunction) -> f64 {
    let (m, s) = cellwise_energy(v.coefficients(), v.mesh());
    (m + s).max(0.0).sqrt()
}

/// Exact `(‖a − b‖_{H¹(Ω)}, max_nodes |a − b|)` for fields on the same mesh.
///
/// For Q1 fields the nodal maximum equals the `L∞(Ω)` norm of the difference.
pub fn fe_difference_norms(a: &FeFunction, b: &FeFunction) -> Result<(f64, f64)> {
    if a.mesh().level() != b.mesh().level() {
        return Err(Error::Config(format!(
            "fields live on levels {} and {}",
            a.mesh().level(),
            b.mesh().level()
        )));
    }
    let d: Vec<f64> = a
        .coefficients()
        .iter()
        .zip(b.coefficients())
        .map(|(x, y)| x - y)
        .collect();
    let (m, s) = cellwise_energy(&d, a.mesh());
    Ok(((m + s).max(0.0).sqrt(), crate::linalg::norm_inf(&d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use std::sync::Arc;

    /// `‖eˣcos y‖²_{H¹}` on the unit square in closed form:
    /// `∫eˣ² = (e²−1)/2`, `∫cos² y = (2+sin 2)/4`, `∫sin² y = (2−sin 2)/4`.
    fn exp_cos_h1_norm_closed_form() -> f64 {
        let ex = (1f64.exp().powi(2) - 1.0) / 2.0;
        let c2 = (2.0 + 2f64.sin()) / 4.0;
        let s2 = (2.0 - 2f64.sin()) / 4.0;
        (ex * c2 + ex * c2 + ex * s2).sqrt()
    }

    #[test]
    fn zero_error_cases() {
        let mesh = Arc::new(build_mesh(3).unwrap());
        let one = FeFunction::interpolate(mesh.clone(), &ExactField::constant(1.0));
        assert!(h1_error(&one, &ExactField::constant(1.0)) <= 1e-14);
        let zero = FeFunction::zero(mesh);
        assert_eq!(h1_error(&zero, &ExactField::zero()), 0.0);
        assert_eq!(linf_error_on_nodes(&zero, &ExactField::zero()), 0.0);
    }

    #[test]
    fn norm_of_exp_cos_against_oracle() {
        // 10x10 Gauss per cell on n=6 as the high-order oracle
        let mesh = Arc::new(build_mesh(6).unwrap());
        let zero = FeFunction::zero(mesh);
        let oracle = ErrorNorms::compute(&zero, &ExactField::exp_cos(), 10).h1;
        assert!((oracle - exp_cos_h1_norm_closed_form()).abs() < 1e-13);
        assert!((oracle - 2.349039).abs() < 1e-6);
        let default = h1_error(&zero, &ExactField::exp_cos());
        assert!((default - oracle).abs() < 1e-12);
    }

    #[test]
    fn interpolation_error_has_first_order_slope() {
        let u = ExactField::exp_cos();
        let errs: Vec<f64> = (3..=7)
            .map(|n| {
                let mesh = Arc::new(build_mesh(n).unwrap());
                h1_error(&FeFunction::interpolate(mesh, &u), &u)
            })
            .collect();
        let xs: Vec<f64> = (3..=7).map(|n| -(n as f64)).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
        let slope = crate::stats::least_squares_slope(&xs, &ys).unwrap();
        assert!((0.85..=1.1).contains(&slope), "slope {slope}");
    }

    #[test]
    fn fe_norm_matches_quadrature() {
        let mesh = Arc::new(build_mesh(3).unwrap());
        let v = FeFunction::interpolate(mesh.clone(), &ExactField::exp_cos());
        let q = ErrorNorms::compute(&v, &ExactField::zero(), 2).h1;
        assert!((fe_h1_norm(&v) - q).abs() < 1e-13);
        let (h1, linf) = fe_difference_norms(&v, &FeFunction::zero(mesh)).unwrap();
        assert!((h1 - q).abs() < 1e-13);
        assert!((linf - 1f64.exp()).abs() < 1e-15);
    }
}
