//! Binary serialization of [`OfflineBundle`].
//!
//! All integers and floats are little-endian; floats are written bit for bit.
//!
//! | field | type |
//! |---|---|
//! | magic | `b"HRB1"` |
//! | version | `u32` (= 1) |
//! | level | `u32` |
//! | node count `N` | `u64` |
//! | sensor count `m` | `u32` |
//! | sensors | `m ×` (`u8` kind: 0 gaussian, 1 point; `f64` x, y, radius) |
//! | `û₀` | `N × f64` |
//! | `λ(û₀)` | `m × f64` |
//! | representers | `m ×` (`N × f64` φ, `M × f64` π, `f64` harmonicity residual, solver residual, X¹ norm, H¹ norm) |
//! | Gramian | `m² × f64`, row-major |
//! | diagnostics | `8 × f64` in declaration order |
//!
//! `M` is the interior node count `(2ⁿ − 1)²`.

use crate::error::{Error, Result};
use crate::fem::FeFunction;
use crate::functionals::{MeasurementFunctional, SensorGrid};
use crate::linalg::DenseMatrix;
use crate::mesh::{build_mesh, Point};
use crate::recovery::{OfflineBundle, RecoveryDiagnostics};
use crate::representers::{RepresenterSet, RepresenterSolution};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"HRB1";
pub const VERSION: u32 = 1;

fn put_f64s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_bundle<W: Write>(bundle: &OfflineBundle, mut w: W) -> Result<()> {
    let mesh = &bundle.mesh;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&mesh.level().to_le_bytes())?;
    w.write_all(&(mesh.node_count() as u64).to_le_bytes())?;
    w.write_all(&(bundle.len() as u32).to_le_bytes())?;
    for f in bundle.sensors.functionals() {
        let (kind, p, r) = match *f {
            MeasurementFunctional::GaussianAverage { center, radius } => (0u8, center, radius),
            MeasurementFunctional::PointEval { point } => (1u8, point, 0.0),
        };
        w.write_all(&[kind])?;
        put_f64s(&mut w, &[p.x, p.y, r])?;
    }
    put_f64s(&mut w, bundle.u0_hat.coefficients())?;
    put_f64s(&mut w, &bundle.lambda_u0)?;
    let reps = &bundle.representers;
    for (j, s) in reps.solutions.iter().enumerate() {
        put_f64s(&mut w, s.phi.coefficients())?;
        put_f64s(&mut w, &s.pi)?;
        put_f64s(
            &mut w,
            &[
                s.harmonicity_residual,
                s.solver_residual,
                reps.x1_norms[j],
                reps.h1_norms[j],
            ],
        )?;
    }
    for i in 0..bundle.len() {
        put_f64s(&mut w, bundle.gramian.row(i))?;
    }
    let d = &bundle.diagnostics;
    put_f64s(
        &mut w,
        &[
            d.m_hat,
            d.gramian_condition,
            d.gramian_asymmetry,
            d.c0_hat,
            d.lambda_bound,
            d.max_harmonicity_residual,
            d.max_solver_residual,
            d.u0_solver_residual,
        ],
    )?;
    w.flush()?;
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => Error::Format("truncated bundle".into()),
                _ => Error::Io(e),
            })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn read_bundle<R: Read>(r: R) -> Result<OfflineBundle> {
    let mut c = Cursor { inner: r };
    if &c.bytes::<4>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mesh = Arc::new(build_mesh(c.u32()?)?);
    let n = c.u64()? as usize;
    if n != mesh.node_count() {
        return Err(Error::Format(format!(
            "node count {n} does not match level {}",
            mesh.level()
        )));
    }
    let m = c.u32()? as usize;
    let mut functionals = Vec::with_capacity(m);
    for _ in 0..m {
        let [kind] = c.bytes::<1>()?;
        let (x, y, radius) = (c.f64()?, c.f64()?, c.f64()?);
        let p = Point::new(x, y);
        functionals.push(match kind {
            0 => MeasurementFunctional::gaussian(p, radius)?,
            1 => MeasurementFunctional::point(p)?,
            k => return Err(Error::Format(format!("unknown functional kind {k}"))),
        });
    }
    let sensors = SensorGrid::new(functionals)?;
    let u0_hat = FeFunction::new(mesh.clone(), c.f64s(n)?);
    let lambda_u0 = c.f64s(m)?;
    let interior = mesh.interior_ids().len();
    let mut solutions = Vec::with_capacity(m);
    let mut x1_norms = Vec::with_capacity(m);
    let mut h1_norms = Vec::with_capacity(m);
    for _ in 0..m {
        let phi = FeFunction::new(mesh.clone(), c.f64s(n)?);
        let pi = c.f64s(interior)?;
        let harmonicity_residual = c.f64()?;
        let solver_residual = c.f64()?;
        x1_norms.push(c.f64()?);
        h1_norms.push(c.f64()?);
        solutions.push(RepresenterSolution {
            phi,
            pi,
            harmonicity_residual,
            solver_residual,
        });
    }
    let gramian = DenseMatrix::from_row_major(m, m, c.f64s(m * m)?)?;
    let d = c.f64s(8)?;
    let diagnostics = RecoveryDiagnostics {
        m_hat: d[0],
        gramian_condition: d[1],
        gramian_asymmetry: d[2],
        c0_hat: d[3],
        lambda_bound: d[4],
        max_harmonicity_residual: d[5],
        max_solver_residual: d[6],
        u0_solver_residual: d[7],
    };
    if c.inner.read(&mut [0u8; 1])? != 0 {
        return Err(Error::Format("trailing bytes after bundle".into()));
    }
    Ok(OfflineBundle {
        representers: RepresenterSet {
            mesh: mesh.clone(),
            solutions,
            x1_norms,
            h1_norms,
        },
        mesh,
        sensors,
        u0_hat,
        lambda_u0,
        gramian,
        diagnostics,
    })
}

pub fn write_bundle_file(bundle: &OfflineBundle, path: impl AsRef<Path>) -> Result<()> {
    write_bundle(bundle, BufWriter::new(std::fs::File::create(path)?))
}

pub fn read_bundle_file(path: impl AsRef<Path>) -> Result<OfflineBundle> {
    read_bundle(BufReader::new(std::fs::File::open(path)?))
}
