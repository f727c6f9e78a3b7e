use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use eap_core::synthgen::{normalize_synthetic, GaussianScenario, ScenarioKind};
use eap_core::{ApConfig, DatasetSeries, EapConfig, PreferenceMode};

use crate::csv_io::{load_csv, ColumnMapping};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Eap,
    Ap,
    /// EAP without consensus nodes and with `omega = 0`.
    EapNoCn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Eap, Algorithm::Ap, Algorithm::EapNoCn];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eap => "eap",
            Algorithm::Ap => "ap",
            Algorithm::EapNoCn => "eap-nocn",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown algorithm `{s}` (expected ap, eap or eap-nocn)")))
    }
}

/// Parses `per-time-min`, `global-min` or `const:X`.
pub fn parse_preference(s: &str) -> Result<PreferenceMode> {
    match s {
        "per-time-min" => Ok(PreferenceMode::PerTimeMin),
        "global-min" => Ok(PreferenceMode::GlobalMin),
        _ => {
            let value = s
                .strip_prefix("const:")
                .and_then(|v| v.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| {
                    CliError::Config(format!(
                        "unknown preference `{s}` (expected per-time-min, global-min or const:X)"
                    ))
                })?;
            Ok(PreferenceMode::Constant(value))
        }
    }
}

pub fn preference_name(mode: PreferenceMode) -> String {
    match mode {
        PreferenceMode::PerTimeMin => "per-time-min".into(),
        PreferenceMode::GlobalMin => "global-min".into(),
        PreferenceMode::Constant(c) => format!("const:{c}"),
    }
}

pub fn parse_scenario(s: &str) -> Result<ScenarioKind> {
    ScenarioKind::from_name(s).ok_or_else(|| {
        CliError::Config(format!(
            "unknown scenario `{s}` (expected separated, colliding, cluster-change or third-cluster)"
        ))
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Csv {
        path: PathBuf,
        mapping: ColumnMapping,
        /// Standardise every feature over the whole horizon before clustering.
        normalize: bool,
    },
    /// Generated benchmark, always standardised.
    Synthetic {
        kind: ScenarioKind,
        seed: u64,
        n_points: Option<usize>,
        n_steps: Option<usize>,
    },
}

impl DatasetSource {
    pub fn scenario(&self) -> Option<GaussianScenario> {
        let DatasetSource::Synthetic { kind, seed, n_points, n_steps } = *self else { return None };
        let mut sc = GaussianScenario::new(kind, seed);
        sc.n_points = n_points.unwrap_or(sc.n_points);
        sc.n_steps = n_steps.unwrap_or(sc.n_steps);
        Some(sc)
    }

    /// The dataset that gets clustered.
    pub fn load(&self) -> Result<DatasetSeries> {
        match self {
            DatasetSource::Csv { path, mapping, normalize } => {
                let ds = load_csv(path, mapping)?;
                Ok(if *normalize { eap_core::dataseries::normalize_global(&ds)? } else { ds })
            }
            DatasetSource::Synthetic { .. } => {
                let sc = self.scenario().expect("synthetic source");
                if sc.n_points == 0 || sc.n_steps == 0 {
                    return Err(CliError::Config("synthetic datasets need at least one point and one step".into()));
                }
                Ok(normalize_synthetic(&sc.generate())?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub source: DatasetSource,
    /// Parameters as given; [`RunConfig::engine`] applies the algorithm's
    /// restrictions.
    pub params: EapConfig,
    pub preference: PreferenceMode,
    pub out: PathBuf,
    pub emit_plot_data: bool,
}

impl RunConfig {
    pub fn new(algorithm: Algorithm, source: DatasetSource) -> Self {
        Self {
            algorithm,
            source,
            params: EapConfig::default(),
            preference: PreferenceMode::PerTimeMin,
            out: PathBuf::from("."),
            emit_plot_data: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| match e {
            eap_core::Error::InvalidConfig(msg) => CliError::Config(msg),
            other => other.into(),
        })?;
        if let PreferenceMode::Constant(c) = self.preference {
            if !c.is_finite() {
                return Err(CliError::Config("constant preference must be finite".into()));
            }
        }
        Ok(())
    }

    /// Engine parameters actually used: consensus disabled and `omega = 0`
    /// for `eap-nocn`.
    pub fn engine(&self) -> EapConfig {
        let seed = match self.source {
            DatasetSource::Synthetic { seed, .. } => seed,
            DatasetSource::Csv { .. } => 0,
        };
        let cfg = EapConfig { seed, ..self.params };
        match self.algorithm {
            Algorithm::EapNoCn => cfg.without_consensus(),
            _ => cfg,
        }
    }

    pub fn ap(&self) -> ApConfig {
        ApConfig {
            lambda: self.params.lambda,
            max_iter: self.params.max_iter,
            conv_window: self.params.conv_window,
        }
    }
}
