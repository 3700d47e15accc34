//! Single recovery reports and bundle files.

use crate::config::ExperimentConfig;
use crate::table::{measure, mesh};
use harmrec_core::fem::ErrorNorms;
use harmrec_core::recovery::{NoiseBound, OfflineBundle, RecoveryDiagnostics};
use harmrec_core::{offline, online, read_bundle_file, write_bundle_file, ExactField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct RecoveryReport {
    pub n: u32,
    pub m: usize,
    pub functional: &'static str,
    pub w: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub data_residual: f64,
    pub diagnostics: RecoveryDiagnostics,
    pub noise: Option<NoiseBound>,
    /// Present when the data came from `eˣ cos y`.
    pub h1_error: Option<f64>,
}

pub fn build_bundle(config: &ExperimentConfig) -> anyhow::Result<OfflineBundle> {
    let (n, m) = (config.n_list[0], config.m_list[0]);
    let sensors = config.sensors(m)?;
    Ok(offline(&mesh(n)?, None, &sensors, config.tol)?)
}

/// Recovers from `config.data`, or from data of `eˣ cos y` when absent.
/// With `config.noise = Some(κ)` the data are perturbed by uniform noise in
/// `[−κ, κ]` drawn from `config.seed`.
pub fn run_single_recovery(config: &ExperimentConfig) -> anyhow::Result<RecoveryReport> {
    config.validate()?;
    let bundle = build_bundle(config)?;
    let exact = ExactField::exp_cos();
    let from_field = config.data.is_none();
    let mut w = match &config.data {
        Some(w) => w.clone(),
        None => measure(config, &bundle, &exact),
    };
    if let Some(kappa) = config.noise {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for x in &mut w {
            if kappa > 0.0 {
                *x += rng.gen_range(-kappa..=kappa);
            }
        }
    }
    let result = online(&bundle, &w, config.noise)?;
    let h1_error = from_field
        .then(|| ErrorNorms::compute(&result.u_hat, &exact, config.quadrature.error_order).h1);
    Ok(RecoveryReport {
        n: config.n_list[0],
        m: config.m_list[0],
        functional: config.functional.as_str(),
        w,
        a_hat: result.a_hat,
        data_residual: result.data_residual,
        diagnostics: bundle.diagnostics,
        noise: result.noise,
        h1_error,
    })
}

pub fn write_bundle_from_config(
    config: &ExperimentConfig,
    path: &Path,
) -> anyhow::Result<OfflineBundle> {
    let bundle = build_bundle(config)?;
    write_bundle_file(&bundle, path)?;
    Ok(bundle)
}

#[derive(Clone, Debug, Serialize)]
pub struct BundleSummary {
    pub level: u32,
    pub m: usize,
    pub diagnostics: RecoveryDiagnostics,
    pub online_solves: usize,
    pub online_total_ms: f64,
}

/// Reads a bundle and times `repeat` online solves on data of `eˣ cos y`
/// sampled at the sensors (point sensors) or at their centers.
pub fn read_bundle_summary(path: &Path, repeat: usize) -> anyhow::Result<BundleSummary> {
    let bundle = read_bundle_file(path)?;
    let exact = ExactField::exp_cos();
    let base: Vec<f64> = bundle
        .sensors
        .functionals()
        .iter()
        .map(|f| exact.value(f.location()))
        .collect();
    let start = Instant::now();
    for k in 0..repeat {
        let scale = 1.0 + k as f64 * 1e-6;
        let w: Vec<f64> = base.iter().map(|x| x * scale).collect();
        online(&bundle, &w, None)?;
    }
    Ok(BundleSummary {
        level: bundle.mesh.level(),
        m: bundle.len(),
        diagnostics: bundle.diagnostics,
        online_solves: repeat,
        online_total_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}
