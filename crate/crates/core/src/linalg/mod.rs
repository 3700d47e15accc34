//! Sparse and dense linear algebra used by the assembled systems.

mod dense;
mod krylov;
mod sparse;

pub use dense::{one_norm_inverse, solve_dense, DenseMatrix, DenseSolution, LuFactorization};
pub use krylov::{
    minres, pcg, solve_spd, solve_symmetric_indefinite, IdentityPreconditioner,
    JacobiPreconditioner, Preconditioner, SolveStats, DEFAULT_TOL,
};
pub use sparse::{CsrMatrix, TripletBuilder};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
