//! Convergence of discrete representers against a fine reference level.

use crate::config::ExperimentConfig;
use crate::format::sig6;
use crate::table::mesh;
use harmrec_core::{compute_representer, convergence_slope, fe_difference_norms, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: u32,
    pub h1: f64,
    pub linf: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub reference_n: u32,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log₂ e` against `log₂ h`; `None` below two levels.
    pub h1_slope: Option<f64>,
    pub linf_slope: Option<f64>,
}

impl ConvergenceReport {
    /// Rows `n,h1_err_vs_ref,linf_err_vs_ref`, then a `slope` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,h1_err_vs_ref,linf_err_vs_ref\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", r.n, sig6(r.h1), sig6(r.linf)));
        }
        let slope = |s: Option<f64>| s.map(sig6).unwrap_or_else(|| "NA(single level)".into());
        out.push_str(&format!(
            "slope,{},{}\n",
            slope(self.h1_slope),
            slope(self.linf_slope)
        ));
        out
    }
}

pub fn run_representer_convergence(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let functional = config.convergence_functional()?;
    let fine = mesh(config.reference_n)?;
    let reference = compute_representer(&fine, &functional, config.tol)?.phi;
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        let coarse = compute_representer(&mesh(n)?, &functional, config.tol)?.phi;
        let (h1, linf) = fe_difference_norms(&coarse.prolongate(fine.clone())?, &reference)?;
        rows.push(ConvergenceRow { n, h1, linf });
    }
    let levels: Vec<u32> = rows.iter().map(|r| r.n).collect();
    let h1: Vec<f64> = rows.iter().map(|r| r.h1).collect();
    let linf: Vec<f64> = rows.iter().map(|r| r.linf).collect();
    Ok(ConvergenceReport {
        reference_n: config.reference_n,
        h1_slope: convergence_slope(&levels, &h1),
        linf_slope: convergence_slope(&levels, &linf),
        rows,
    })
}
