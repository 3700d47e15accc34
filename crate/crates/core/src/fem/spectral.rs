//! Exact fast solvers for the uniform-grid operators, used as preconditioners.
//!
//! On a uniform grid the Q1 stiffness and mass matrices are Kronecker sums of
//! 1D tridiagonal matrices, `K = K₁⊗M₁ + M₁⊗K₁`, `M = M₁⊗M₁`. The 1D pairs are
//! simultaneously diagonalized by the sine transform (homogeneous Dirichlet,
//! interior nodes) and by the cosine transform (all nodes, natural boundary).
//! The boundary Gram matrix on the closed chain is circulant. Each inverse is
//! therefore a pair of FFT-based transforms around a diagonal scaling.

use crate::linalg::Preconditioner;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// `x_j ← Σ_{k=1}^{N-1} sin(πjk/N) x_k` for a vector of length `N-1`.
struct SineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    fn new(n: usize) -> Self {
        Self {
            n,
            fft: FftPlanner::new().plan_fft_forward(2 * n),
        }
    }

    fn apply(&self, x: &mut [f64], buf: &mut [Complex<f64>]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n - 1);
        buf[0] = Complex::default();
        buf[n] = Complex::default();
        for k in 1..n {
            buf[k] = Complex::new(x[k - 1], 0.0);
            buf[2 * n - k] = Complex::new(-x[k - 1], 0.0);
        }
        self.fft.process(buf);
        for j in 1..n {
            x[j - 1] = -0.5 * buf[j].im;
        }
    }
}

/// `x_j ← Σ_{k=0}^{N} cos(πjk/N) x_k` for a vector of length `N+1`.
struct CosineTransform {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl CosineTransform {
    fn new(n: usize) -> Self {
        Self {
            n,
            fft: FftPlanner::new().plan_fft_forward(2 * n),
        }
    }

    fn apply(&self, x: &mut [f64], buf: &mut [Complex<f64>]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n + 1);
        for k in 0..=n {
            buf[k] = Complex::new(x[k], 0.0);
        }
        for k in 1..n {
            buf[2 * n - k] = Complex::new(x[k], 0.0);
        }
        self.fft.process(buf);
        let (x0, xn) = (x[0], x[n]);
        for j in 0..=n {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            x[j] = 0.5 * (buf[j].re + x0 + sign * xn);
        }
    }
}

/// Applies a 1D transform along both axes of a row-major `side × side` array.
fn transform_2d(
    data: &mut [f64],
    side: usize,
    buf_len: usize,
    apply: impl Fn(&mut [f64], &mut [Complex<f64>]),
) {
    let mut buf = vec![Complex::default(); buf_len];
    for row in data.chunks_mut(side) {
        apply(row, &mut buf);
    }
    let mut col = vec![0.0; side];
    for c in 0..side {
        for r in 0..side {
            col[r] = data[r * side + c];
        }
        apply(&mut col, &mut buf);
        for r in 0..side {
            data[r * side + c] = col[r];
        }
    }
}

fn stiffness_1d(theta: f64, h: f64) -> f64 {
    (2.0 - 2.0 * theta.cos()) / h
}

fn mass_1d(theta: f64, h: f64) -> f64 {
    h * (4.0 + 2.0 * theta.cos()) / 6.0
}

/// Exact inverse of the Q1 stiffness restricted to interior nodes
/// (row-major interior ordering of [`crate::mesh::GridMesh::interior_ids`]).
pub struct InteriorLaplaceInverse {
    cells: usize,
    transform: SineTransform,
    /// `1 / λ_{k,l}` scaled by the transform normalization, row-major in `(l, k)`
    scale: Vec<f64>,
}

impl InteriorLaplaceInverse {
    pub fn new(cells_per_side: usize) -> Self {
        assert!(cells_per_side >= 2, "no interior nodes");
        let n = cells_per_side;
        let h = 1.0 / n as f64;
        let theta = |k: usize| PI * k as f64 / n as f64;
        let norm = (2.0 / n as f64).powi(2);
        let mut scale = Vec::with_capacity((n - 1) * (n - 1));
        for l in 1..n {
            let (sl, ml) = (stiffness_1d(theta(l), h), mass_1d(theta(l), h));
            for k in 1..n {
                let (sk, mk) = (stiffness_1d(theta(k), h), mass_1d(theta(k), h));
                scale.push(norm / (sk * ml + mk * sl));
            }
        }
        Self {
            cells: n,
            transform: SineTransform::new(n),
            scale,
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let side = self.cells - 1;
        assert_eq!(x.len(), side * side);
        let t = |v: &mut [f64], b: &mut [Complex<f64>]| self.transform.apply(v, b);
        transform_2d(x, side, 2 * self.cells, t);
        for (v, s) in x.iter_mut().zip(&self.scale) {
            *v *= s;
        }
        transform_2d(x, side, 2 * self.cells, t);
    }
}

impl Preconditioner for InteriorLaplaceInverse {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

/// Exact inverse of `K + M` over all nodes (the discrete `H¹(Ω)` Riesz map).
pub struct H1RieszInverse {
    cells: usize,
    transform: CosineTransform,
    scale: Vec<f64>,
}

impl H1RieszInverse {
    pub fn new(cells_per_side: usize) -> Self {
        let n = cells_per_side;
        let h = 1.0 / n as f64;
        let theta = |k: usize| PI * k as f64 / n as f64;
        // cosine-basis norms under the endpoint-halved inner product
        let c = |k: usize| {
            if k == 0 || k == n {
                n as f64
            } else {
                n as f64 / 2.0
            }
        };
        let mut scale = Vec::with_capacity((n + 1) * (n + 1));
        for l in 0..=n {
            let (sl, ml) = (stiffness_1d(theta(l), h), mass_1d(theta(l), h));
            for k in 0..=n {
                let (sk, mk) = (stiffness_1d(theta(k), h), mass_1d(theta(k), h));
                let lambda = sk * ml + mk * sl + mk * ml;
                scale.push(1.0 / (lambda * c(k) * c(l)));
            }
        }
        Self {
            cells: n,
            transform: CosineTransform::new(n),
            scale,
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let side = self.cells + 1;
        assert_eq!(x.len(), side * side);
        let t = |v: &mut [f64], b: &mut [Complex<f64>]| self.transform.apply(v, b);
        transform_2d(x, side, 2 * self.cells, t);
        for (v, s) in x.iter_mut().zip(&self.scale) {
            *v *= s;
        }
        transform_2d(x, side, 2 * self.cells, t);
    }
}

impl Preconditioner for H1RieszInverse {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.solve_in_place(z);
    }
}

/// Exact inverse of the circulant boundary `H¹(Γ)` Gram matrix.
pub struct BoundaryGramInverse {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: Vec<f64>,
}

impl BoundaryGramInverse {
    /// `chain_len` nodes with uniform spacing `h`.
    pub fn new(chain_len: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let diag = 4.0 * h / 6.0 + 2.0 / h;
        let off = h / 6.0 - 1.0 / h;
        let scale = (0..chain_len)
            .map(|k| {
                let lambda = diag + 2.0 * off * (2.0 * PI * k as f64 / chain_len as f64).cos();
                1.0 / (lambda * chain_len as f64)
            })
            .collect();
        Self {
            forward: planner.plan_fft_forward(chain_len),
            inverse: planner.plan_fft_inverse(chain_len),
            scale,
        }
    }
}

impl Preconditioner for BoundaryGramInverse {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let mut buf: Vec<Complex<f64>> = r.iter().map(|&v| Complex::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.scale) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        for (zi, b) in z.iter_mut().zip(&buf) {
            *zi = b.re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_boundary_h1, assemble_mass, assemble_stiffness};
    use crate::linalg::CsrMatrix;
    use crate::mesh::build_mesh;

    fn pseudo_random(n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| ((k * 7919 + 13) % 101) as f64 / 50.0 - 1.0)
            .collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn interior_inverse_is_exact() {
        for level in 1..=5 {
            let mesh = build_mesh(level).unwrap();
            let k = assemble_stiffness(&mesh);
            let kii = k.submatrix(mesh.interior_ids(), mesh.interior_ids());
            let x = pseudo_random(kii.rows());
            let mut y = kii.mul_vec(&x);
            InteriorLaplaceInverse::new(mesh.cells_per_side()).solve_in_place(&mut y);
            assert!(max_diff(&x, &y) < 1e-11, "level {level}");
        }
    }

    #[test]
    fn h1_riesz_inverse_is_exact() {
        for level in 1..=5 {
            let mesh = build_mesh(level).unwrap();
            let k = assemble_stiffness(&mesh);
            let m = assemble_mass(&mesh);
            let x = pseudo_random(mesh.node_count());
            let mut y: Vec<f64> = k
                .mul_vec(&x)
                .iter()
                .zip(m.mul_vec(&x))
                .map(|(a, b)| a + b)
                .collect();
            H1RieszInverse::new(mesh.cells_per_side()).solve_in_place(&mut y);
            assert!(max_diff(&x, &y) < 1e-11, "level {level}");
        }
    }

    #[test]
    fn boundary_inverse_is_exact() {
        for level in 1..=6 {
            let mesh = build_mesh(level).unwrap();
            let a: CsrMatrix = assemble_boundary_h1(&mesh);
            let x = pseudo_random(a.rows());
            let y = a.mul_vec(&x);
            let mut z = vec![0.0; y.len()];
            BoundaryGramInverse::new(a.rows(), mesh.h()).apply(&y, &mut z);
            assert!(max_diff(&x, &z) < 1e-11, "level {level}");
        }
    }
}
