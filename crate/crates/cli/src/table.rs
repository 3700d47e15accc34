//! Recovery error tables `e(m, n) = ‖u − û‖_{H¹(Ω)}` for `u = eˣ cos y`.

use crate::config::{DataSource, ExperimentConfig};
use crate::format::{na, sig6};
use harmrec_core::fem::ErrorNorms;
use harmrec_core::recovery::{offline_with, online, OfflineBundle};
use harmrec_core::{build_mesh, ExactField, GridMesh, RepresenterSolver};
use rayon::prelude::*;
use std::sync::Arc;
use std::time::Instant;

pub const CSV_HEADER: &str = "n,m,e,gramian_cond,M_hat,wall_ms";

#[derive(Clone, Debug, PartialEq)]
pub struct CellValues {
    pub e: f64,
    pub gramian_condition: f64,
    pub m_hat: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableCell {
    pub n: u32,
    pub m: usize,
    pub outcome: Result<CellValues, String>,
    pub wall_ms: f64,
}

#[derive(Clone, Debug)]
pub struct ErrorTable {
    pub config: ExperimentConfig,
    /// Cells in `(n, m)` order.
    pub cells: Vec<TableCell>,
}

impl ErrorTable {
    pub fn get(&self, n: u32, m: usize) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.n == n && c.m == m)
    }

    /// Error value of a cell, if it produced one.
    pub fn error(&self, n: u32, m: usize) -> Option<f64> {
        self.get(n, m)?.outcome.as_ref().ok().map(|v| v.e)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let (e, cond, m_hat) = match &c.outcome {
                Ok(v) => (sig6(v.e), sig6(v.gramian_condition), sig6(v.m_hat)),
                Err(reason) => (na(reason), "NA".into(), "NA".into()),
            };
            out.push_str(&format!(
                "{},{},{e},{cond},{m_hat},{:.0}\n",
                c.n, c.m, c.wall_ms
            ));
        }
        out
    }
}

/// Measurement vector of the test field for a bundle.
pub fn measure(config: &ExperimentConfig, bundle: &OfflineBundle, exact: &ExactField) -> Vec<f64> {
    let q = config.quadrature;
    match config.data_source {
        DataSource::Exact => bundle
            .sensors
            .functionals()
            .iter()
            .map(|f| f.apply_to_exact_with(exact, q.exact_order, q.exact_level))
            .collect(),
        DataSource::FineMesh { level } => {
            let fine = Arc::new(build_mesh(level).expect("validated level"));
            bundle
                .sensors
                .functionals()
                .iter()
                .map(|f| f.apply_to_interpolant(exact, &fine))
                .collect()
        }
    }
}

fn run_cell(
    config: &ExperimentConfig,
    solver: &RepresenterSolver,
    m: usize,
) -> Result<CellValues, String> {
    let exact = ExactField::exp_cos();
    let sensors = config.sensors(m).map_err(|e| e.to_string())?;
    let bundle = offline_with(solver, None, &sensors).map_err(|e| e.to_string())?;
    let w = measure(config, &bundle, &exact);
    let result = online(&bundle, &w, None).map_err(|e| e.to_string())?;
    Ok(CellValues {
        e: ErrorNorms::compute(&result.u_hat, &exact, config.quadrature.error_order).h1,
        gramian_condition: bundle.diagnostics.gramian_condition,
        m_hat: bundle.diagnostics.m_hat,
    })
}

/// Runs every `(n, m)` cell; failures become `NA` cells.
pub fn run_table(config: &ExperimentConfig) -> ErrorTable {
    let solvers: Vec<(u32, Result<RepresenterSolver, String>)> = config
        .n_list
        .par_iter()
        .map(|&n| {
            let solver = build_mesh(n)
                .and_then(|mesh| RepresenterSolver::new(Arc::new(mesh), config.tol))
                .map_err(|e| e.to_string());
            (n, solver)
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..solvers.len())
        .flat_map(|i| (0..config.m_list.len()).map(move |j| (i, j)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(i, j)| {
            let (n, solver) = &solvers[i];
            let m = config.m_list[j];
            let start = Instant::now();
            let outcome = match solver {
                Ok(s) => run_cell(config, s, m),
                Err(e) => Err(e.clone()),
            };
            if let Err(reason) = &outcome {
                log::warn!("cell n={n} m={m}: {reason}");
            }
            TableCell {
                n: *n,
                m,
                outcome,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            }
        })
        .collect();
    ErrorTable {
        config: config.clone(),
        cells,
    }
}

/// Mesh helper shared by the other experiments.
pub(crate) fn mesh(n: u32) -> harmrec_core::Result<Arc<GridMesh>> {
    build_mesh(n).map(Arc::new)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FunctionalKind;

    #[test]
    fn small_table_shape_and_order() {
        let config = ExperimentConfig {
            m_list: vec![4, 9],
            n_list: vec![3, 4],
            functional: FunctionalKind::Point,
            ..Default::default()
        };
        let t = run_table(&config);
        let order: Vec<(u32, usize)> = t.cells.iter().map(|c| (c.n, c.m)).collect();
        assert_eq!(order, vec![(3, 4), (3, 9), (4, 4), (4, 9)]);
        let csv = t.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
        assert!(t.error(4, 4).unwrap() > 0.5);
    }
}
