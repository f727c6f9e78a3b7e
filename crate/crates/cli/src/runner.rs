use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use eap_core::engine::run_eap_detailed;
use eap_core::{build_similarity, run_ap_series, set_preferences, ClusteringSolution, DatasetSeries};

use crate::config::{Algorithm, RunConfig};
use crate::error::{CliError, Result};
use crate::report::{plot_rows, write_assignments, write_metrics, write_plot_data};
use crate::result::ResultDoc;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

pub const RESULT_FILE: &str = "result.json";
pub const ASSIGNMENTS_FILE: &str = "assignments.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PLOT_FILE: &str = "plot.csv";

pub struct RunOutcome {
    pub dataset: DatasetSeries,
    pub solution: ClusteringSolution,
    pub doc: ResultDoc,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.solution.converged {
            EXIT_CONVERGED
        } else {
            EXIT_NOT_CONVERGED
        }
    }
}

/// Loads the dataset and clusters it; nothing is written.
pub fn execute(cfg: &RunConfig, created_unix: u64) -> Result<RunOutcome> {
    cfg.validate()?;
    let dataset = cfg.source.load()?;
    let sim = set_preferences(build_similarity(&dataset), cfg.preference)?;
    let solution = match cfg.algorithm {
        Algorithm::Ap => run_ap_series(&dataset, &sim, &cfg.ap())?,
        Algorithm::Eap | Algorithm::EapNoCn => run_eap_detailed(&dataset, &sim, &cfg.engine())?.solution,
    };
    let doc = ResultDoc::build(cfg, &dataset, &solution, created_unix);
    Ok(RunOutcome { dataset, solution, doc })
}

fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Runs `cfg` and writes the result files into `cfg.out`. Returns the
/// outcome and any warnings.
pub fn run(cfg: &RunConfig) -> Result<(RunOutcome, Vec<String>)> {
    let outcome = execute(cfg, now_unix())?;
    fs::create_dir_all(&cfg.out).map_err(CliError::io(&cfg.out))?;
    let target = |name: &str| -> PathBuf { cfg.out.join(name) };
    let path = target(RESULT_FILE);
    fs::write(&path, outcome.doc.to_json()).map_err(CliError::io(&path))?;
    let path = target(ASSIGNMENTS_FILE);
    write_assignments(&outcome.doc, create(&path)?, &path)?;
    let path = target(METRICS_FILE);
    write_metrics(&outcome.doc, create(&path)?, &path)?;
    let mut warnings = Vec::new();
    if cfg.emit_plot_data {
        let (rows, skipped) = plot_rows(std::slice::from_ref(&outcome.doc))?;
        warnings.extend(skipped);
        if !rows.is_empty() {
            let path = target(PLOT_FILE);
            write_plot_data(&rows, create(&path)?, &path)?;
        }
    }
    Ok((outcome, warnings))
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(CliError::io(path))
}

pub fn read_result(path: &Path) -> Result<ResultDoc> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    ResultDoc::from_json(&text, &path.display().to_string())
}
