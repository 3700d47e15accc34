//! Krylov solvers with explicit residual contracts.
//!
//! Both solvers return only when the *true* residual `‖b − Ax‖₂ ≤ tol·‖b‖₂`
//! holds; the recurrence estimate is used to decide when to check it.

use super::{axpy, dot, norm2, CsrMatrix};
use crate::error::{Error, Result};

/// Relative residual target used for all PDE solves.
pub const DEFAULT_TOL: f64 = 1e-10;

const MAX_TOL: f64 = 1e-6;

/// Approximate inverse applied inside preconditioned CG.
pub trait Preconditioner: Sync {
    /// `z ← P⁻¹ r`
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &CsrMatrix) -> Self {
        Self {
            inv_diag: a
                .diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        }
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// True relative residual `‖b − Ax‖₂ / ‖b‖₂` of the returned iterate.
    pub relative_residual: f64,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= MAX_TOL {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "solver tolerance {tol:e} outside (0, {MAX_TOL:e}]"
        )))
    }
}

fn check_square(a: &CsrMatrix, b: &[f64]) -> Result<()> {
    if a.rows() != a.cols() || b.len() != a.rows() {
        return Err(Error::Config(format!(
            "system is {}x{} with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    Ok(())
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    norm2(&r)
}

/// Solves a symmetric positive definite system with Jacobi-preconditioned CG.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    pcg(a, b, tol, &JacobiPreconditioner::new(a)).map(|(x, _)| x)
}

/// Restarts without improvement before PCG gives up.
const MAX_STALLS: usize = 4;

/// Preconditioned conjugate gradients from a zero initial guess.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    precond: &dyn Preconditioner,
) -> Result<(Vec<f64>, SolveStats)> {
    check_tol(tol)?;
    check_square(a, b)?;
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    let target = tol * b_norm;
    let max_iter = 2 * n + 200;

    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    // the recurrence residual drifts from the true one; on a false stop the
    // true residual is recomputed and the iteration restarted from the best iterate
    let mut inner_target = target;
    let mut best = (f64::INFINITY, x.clone());
    let mut stalls = 0;
    let mut used = max_iter;

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if norm2(&r) <= inner_target {
            let achieved = true_residual(a, &x, b);
            if achieved <= target {
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        relative_residual: achieved / b_norm,
                    },
                ));
            }
            if achieved < best.0 {
                best = (achieved, x.clone());
                stalls = 0;
            } else {
                stalls += 1;
                if stalls >= MAX_STALLS {
                    used = it;
                    break;
                }
                x.copy_from_slice(&best.1);
            }
            inner_target *= 0.1;
            r = b
                .iter()
                .zip(a.mul_vec(&x))
                .map(|(bi, ai)| bi - ai)
                .collect();
            precond.apply(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(Error::Solver {
        method: "conjugate gradients",
        achieved: best.0.min(true_residual(a, &x, b)) / b_norm,
        target: tol,
        iterations: used,
    })
}

/// Solves a symmetric (possibly indefinite) system with MINRES.
pub fn solve_symmetric_indefinite(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    minres(a, b, tol).map(|(x, _)| x)
}

/// Unpreconditioned MINRES (Lanczos tridiagonalization with Givens QR).
pub fn minres(a: &CsrMatrix, b: &[f64], tol: f64) -> Result<(Vec<f64>, SolveStats)> {
    check_tol(tol)?;
    check_square(a, b)?;
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    let target = tol * b_norm;
    let max_iter = 20 * n + 200;

    let mut v_prev = vec![0.0; n];
    let mut v: Vec<f64> = b.iter().map(|bi| bi / b_norm).collect();
    let mut beta = 0.0; // sub-diagonal entry coupling v to v_prev
    let (mut c_prev, mut s_prev, mut c, mut s) = (1.0, 0.0, 1.0, 0.0);
    let mut w_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut eta = b_norm;
    let mut z = vec![0.0; n];
    let mut check_at = target;

    for it in 1..=max_iter {
        a.mul_vec_into(&v, &mut z);
        let alpha = dot(&v, &z);
        for k in 0..n {
            z[k] -= alpha * v[k] + beta * v_prev[k];
        }
        let beta_next = norm2(&z);

        let eps = s_prev * beta;
        let delta_bar = c_prev * beta;
        let delta = c * delta_bar + s * alpha;
        let gamma_bar = -s * delta_bar + c * alpha;
        let gamma = gamma_bar.hypot(beta_next);
        if gamma == 0.0 || !gamma.is_finite() {
            break;
        }
        let c_new = gamma_bar / gamma;
        let s_new = beta_next / gamma;

        let mut w_new = vec![0.0; n];
        for k in 0..n {
            w_new[k] = (v[k] - delta * w[k] - eps * w_prev[k]) / gamma;
        }
        axpy(c_new * eta, &w_new, &mut x);
        eta *= -s_new;

        if eta.abs() <= check_at || beta_next == 0.0 {
            let achieved = true_residual(a, &x, b);
            if achieved <= target {
                return Ok((
                    x,
                    SolveStats {
                        iterations: it,
                        relative_residual: achieved / b_norm,
                    },
                ));
            }
            check_at *= 0.1;
            if beta_next == 0.0 {
                break;
            }
        }

        v_prev = std::mem::replace(&mut v, z.iter().map(|zi| zi / beta_next).collect());
        beta = beta_next;
        c_prev = c;
        s_prev = s;
        c = c_new;
        s = s_new;
        w_prev = std::mem::replace(&mut w, w_new);
    }
    Err(Error::Solver {
        method: "MINRES",
        achieved: true_residual(a, &x, b) / b_norm,
        target: tol,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dense(rows: &[&[f64]]) -> CsrMatrix {
        CsrMatrix::from_dense_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>())
    }

    #[test]
    fn spd_examples() {
        let x = solve_spd(&CsrMatrix::identity(3), &[1.0, 2.0, 3.0], 1e-10).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        let x = solve_spd(&CsrMatrix::from_diagonal(&[2.0, 4.0]), &[2.0, 8.0], 1e-10).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
        let a = dense(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, -1.0], &[0.0, -1.0, 2.0]]);
        let x = solve_spd(&a, &[1.0, 1.0, 1.0], 1e-10).unwrap();
        for (xi, e) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert_abs_diff_eq!(*xi, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn indefinite_examples() {
        type Case<'a> = (&'a [&'a [f64]], [f64; 2], [f64; 2]);
        let cases: [Case; 3] = [
            (&[&[0.0, 1.0], &[1.0, 0.0]], [1.0, 2.0], [2.0, 1.0]),
            (&[&[1.0, 1.0], &[1.0, 0.0]], [2.0, 1.0], [1.0, 1.0]),
            (&[&[2.0, 1.0], &[1.0, 0.0]], [3.0, 1.0], [1.0, 1.0]),
        ];
        for (a, b, expected) in cases {
            let x = solve_symmetric_indefinite(&dense(a), &b, 1e-10).unwrap();
            assert_abs_diff_eq!(x[0], expected[0], epsilon = 1e-10);
            assert_abs_diff_eq!(x[1], expected[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_rhs_and_bad_tol() {
        let a = CsrMatrix::identity(2);
        assert_eq!(solve_spd(&a, &[0.0, 0.0], 1e-10).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            solve_spd(&a, &[1.0, 0.0], 1e-3),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            minres(&a, &[1.0, 0.0], 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            solve_spd(&a, &[1.0], 1e-10),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn non_spd_reports_solver_error() {
        // negative definite: CG breaks down immediately
        let a = CsrMatrix::from_diagonal(&[-1.0, -2.0]);
        match solve_spd(&a, &[1.0, 1.0], 1e-10) {
            Err(Error::Solver { achieved, .. }) => assert!(achieved > 0.0),
            other => panic!("expected solver error, got {other:?}"),
        }
    }
}
