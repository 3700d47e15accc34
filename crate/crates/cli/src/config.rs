//! Experiment configuration.
//!
//! Values come from built-in defaults, then an optional JSON file, then
//! command-line flags; later sources win. Unknown JSON keys are rejected.

use harmrec_core::fem::DEFAULT_ERROR_ORDER;
use harmrec_core::functionals::{DEFAULT_EXACT_LEVEL, DEFAULT_EXACT_ORDER};
use harmrec_core::mesh::{MAX_LEVEL, MIN_LEVEL};
use harmrec_core::{MeasurementFunctional, Point, SensorGrid, DEFAULT_RADIUS, DEFAULT_TOL};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Largest level a table runs without `long_run`.
pub const SHORT_RUN_MAX_LEVEL: u32 = 7;

/// Invalid or inconsistent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Table,
    RepresenterConvergence,
    SingleRecovery,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Gaussian,
    Point,
}

impl FunctionalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Point => "point",
        }
    }
}

/// Where measurement data of the test field comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Closed-form field, Gaussian averages by high-order quadrature.
    Exact,
    /// Nodal interpolant of the field on a fine mesh.
    FineMesh { level: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss points per direction for Gaussian averages of closed-form data.
    pub exact_order: usize,
    /// Level of the integration grid for those averages.
    pub exact_level: u32,
    /// Gauss points per direction in error norms.
    pub error_order: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            exact_order: DEFAULT_EXACT_ORDER,
            exact_level: DEFAULT_EXACT_LEVEL,
            error_order: DEFAULT_ERROR_ORDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub functional: FunctionalKind,
    pub radius: f64,
    pub m_list: Vec<usize>,
    pub n_list: Vec<u32>,
    pub reference_n: u32,
    /// Functional location for convergence runs.
    pub center: Point,
    pub tol: f64,
    pub quadrature: QuadratureConfig,
    pub data_source: DataSource,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub long_run: bool,
    pub threads: Option<usize>,
    /// Measurements for single recovery; defaults to data of `eˣ cos y`.
    pub data: Option<Vec<f64>>,
    /// Uniform noise level added to the data in single recovery.
    pub noise: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Table,
            functional: FunctionalKind::Gaussian,
            radius: DEFAULT_RADIUS,
            m_list: vec![4, 9, 16, 25, 36],
            n_list: vec![4, 5, 6, 7],
            reference_n: 9,
            center: Point::new(0.75, 0.5),
            tol: DEFAULT_TOL,
            quadrature: QuadratureConfig::default(),
            data_source: DataSource::Exact,
            output: None,
            seed: 0,
            long_run: false,
            threads: None,
            data: None,
            noise: None,
        }
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

fn is_square(m: usize) -> bool {
    let s = (m as f64).sqrt().round() as usize;
    s * s == m
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.m_list.is_empty() || self.n_list.is_empty() {
            return err("m_list and n_list must be nonempty");
        }
        if let Some(&m) = self.m_list.iter().find(|&&m| m == 0 || !is_square(m)) {
            return err(format!("m = {m} is not a positive perfect square"));
        }
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return err("n_list must be strictly ascending");
        }
        let levels = self.n_list.iter().chain(std::iter::once(&self.reference_n));
        if let Some(n) = levels
            .clone()
            .find(|&&n| !(MIN_LEVEL..=MAX_LEVEL).contains(&n))
        {
            return err(format!("level {n} outside [{MIN_LEVEL}, {MAX_LEVEL}]"));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-6) {
            return err(format!("tol {:e} outside (0, 1e-6]", self.tol));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return err("radius must be positive");
        }
        if !self.center.in_unit_square() {
            return err("center must lie in the unit square");
        }
        let q = &self.quadrature;
        if q.exact_order == 0
            || q.error_order == 0
            || !(MIN_LEVEL..=MAX_LEVEL).contains(&q.exact_level)
        {
            return err("quadrature orders must be positive and exact_level a valid level");
        }
        if let DataSource::FineMesh { level } = self.data_source {
            if !(MIN_LEVEL..=MAX_LEVEL).contains(&level) {
                return err(format!(
                    "data mesh level {level} outside [{MIN_LEVEL}, {MAX_LEVEL}]"
                ));
            }
        }
        if let Some(k) = self.noise {
            if !(k >= 0.0 && k.is_finite()) {
                return err("noise must be finite and nonnegative");
            }
        }
        if self.threads == Some(0) {
            return err("threads must be at least 1");
        }
        match self.experiment {
            ExperimentKind::Table => {
                let top = *self.n_list.last().unwrap();
                if top > SHORT_RUN_MAX_LEVEL && !self.long_run {
                    return err(format!("n = {top} requires the long-run flag"));
                }
            }
            ExperimentKind::RepresenterConvergence => {
                if self.n_list.iter().any(|&n| n >= self.reference_n) {
                    return err("every n must be below reference_n");
                }
            }
            ExperimentKind::SingleRecovery => {
                if self.n_list.len() != 1 || self.m_list.len() != 1 {
                    return err("single recovery takes exactly one n and one m");
                }
                if let Some(w) = &self.data {
                    if w.len() != self.m_list[0] {
                        return err(format!(
                            "data has {} entries, expected m = {}",
                            w.len(),
                            self.m_list[0]
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn sensors(&self, m: usize) -> harmrec_core::Result<SensorGrid> {
        match self.functional {
            FunctionalKind::Gaussian => SensorGrid::gaussian_grid(m, self.radius),
            FunctionalKind::Point => SensorGrid::point_grid(m),
        }
    }

    pub fn convergence_functional(&self) -> harmrec_core::Result<MeasurementFunctional> {
        match self.functional {
            FunctionalKind::Gaussian => MeasurementFunctional::gaussian(self.center, self.radius),
            FunctionalKind::Point => MeasurementFunctional::point(self.center),
        }
    }
}
