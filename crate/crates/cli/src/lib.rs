//! Command implementations behind the `netvd` binary. Each command returns
//! its output as text so the binary only decides where it goes.

pub mod config;

use std::time::{SystemTime, UNIX_EPOCH};

use netvd::estimator::{
    resampled_batch_spread, run_monte_carlo, scaling_fit, sweep, EngineMode, SampleStream,
    SweepRow, REPORT_HEADER,
};
use netvd::network::{required_topology, validate_topology, Topology};
use netvd::vd::{count_resources, Implementation, ResourceMode, ResourceReport};

pub use config::{Counts, ExperimentConfig, Overrides};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: configuration, arguments, topology files.
    #[error("{0}")]
    Validation(String),
    /// Failures while computing or writing results.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// `# generated-at <unix seconds>`, or nothing.
fn stamp(timestamp: bool) -> String {
    if !timestamp {
        return String::new();
    }
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated-at {secs}\n")
}

fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(runtime)?;
    for r in rows {
        w.write_record(r).map_err(runtime)?;
    }
    String::from_utf8(w.into_inner().map_err(runtime)?).map_err(runtime)
}

pub struct RunOutput {
    pub csv: String,
    /// One line per cell.
    pub summary: Vec<String>,
    pub failed: usize,
}

fn summary_line(row: &SweepRow) -> String {
    let head = format!(
        "{} n={} N={} c={} {}",
        row.implementation, row.n, row.data_width, row.c, row.mode
    );
    match &row.result {
        Ok(r) => format!(
            "{head}: ratio={:.8} deltaE={:.3e} stderr={:.3e}",
            r.ratio, r.delta_e, r.std_error
        ),
        Err(e) => format!("{head}: FAILED {e}"),
    }
}

/// Runs every cell of `config` and renders the report.
pub fn cmd_run(
    config: &ExperimentConfig,
    overrides: &Overrides,
    timestamp: bool,
) -> Result<RunOutput, CliError> {
    let cells = config.cells(overrides)?;
    let rows = sweep(&cells, config.jobs(overrides));
    let failed = rows.iter().filter(|r| r.result.is_err()).count();
    let summary = rows.iter().map(summary_line).collect();
    let body = csv_text(&REPORT_HEADER, rows.iter().map(SweepRow::csv_record))?;
    Ok(RunOutput {
        csv: stamp(timestamp) + &body,
        summary,
        failed,
    })
}

/// One row per `(impl, n, N)`, implementations outermost.
pub fn cmd_resources(
    implementations: &[Implementation],
    ns: &[usize],
    sites: &[usize],
    mode: ResourceMode,
    timestamp: bool,
) -> Result<String, CliError> {
    let mut rows = Vec::new();
    for &imp in implementations {
        for &n in ns {
            for &w in sites {
                let r = count_resources(imp, n, w, mode)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                rows.push(r.csv_record());
            }
        }
    }
    Ok(stamp(timestamp) + &csv_text(&ResourceReport::CSV_HEADER, rows)?)
}

/// `ok` plus the node mapping, or the deficiency list as a validation error.
pub fn cmd_validate(
    topology: &str,
    implementation: Implementation,
    n: usize,
    data_width: usize,
) -> Result<String, CliError> {
    let available = Topology::parse(topology).map_err(|e| CliError::Validation(e.to_string()))?;
    let required = required_topology(implementation, n, data_width)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    match validate_topology(&available, &required) {
        Ok(map) => {
            let pairs: Vec<String> = map.iter().map(|(r, a)| format!("{r}->{a}")).collect();
            Ok(format!("ok {}\n", pairs.join(" ")))
        }
        Err(deficiencies) => {
            let lines: Vec<String> = deficiencies.iter().map(ToString::to_string).collect();
            Err(CliError::Validation(format!(
                "{implementation} n={n} does not fit:\n  {}",
                lines.join("\n  ")
            )))
        }
    }
}

/// Samples per resampled batch: from a hundredth of the stream up to the
/// whole stream.
pub fn default_points(m: usize) -> Vec<usize> {
    let mut v: Vec<usize> = [100, 40, 20, 10, 4, 1]
        .iter()
        .map(|d| m / d)
        .filter(|&p| p > 0)
        .collect();
    v.dedup();
    v
}

/// Resampled batches per point when none is given.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Spread of resampled batch ratios at each batch size, and its `1/√M` fit.
/// Batches are drawn with replacement from `stream`, seeded by its seed.
pub fn cmd_scaling(
    stream: &SampleStream,
    points: &[usize],
    batches: usize,
    timestamp: bool,
) -> Result<String, CliError> {
    if let Some(&p) = points.iter().find(|&&p| p > stream.len()) {
        return Err(CliError::Validation(format!(
            "{p} samples requested, the stream has {}",
            stream.len()
        )));
    }
    let errs: Vec<(usize, f64)> = points
        .iter()
        .map(|&m| resampled_batch_spread(stream, m, batches, stream.seed).map(|e| (m, e)))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let fit = scaling_fit(&errs).map_err(|e| CliError::Validation(e.to_string()))?;
    let rows = errs.iter().map(|&(m, e)| {
        let line = 10f64.powf(fit.intercept + fit.slope * (m as f64).log10());
        [m.to_string(), format!("{e:.12e}"), format!("{line:.12e}")]
    });
    let body = csv_text(&["M", "sd", "fit"], rows)?;
    Ok(format!(
        "{}{body}# slope={:.6} intercept={:.6} underlying_sd={:.6}\n",
        stamp(timestamp),
        fit.slope,
        fit.intercept,
        fit.underlying_sd()
    ))
}

/// The stream behind the first cell of `config`, sampled in Monte Carlo
/// mode.
pub fn sample_stream(
    config: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<SampleStream, CliError> {
    let o = Overrides {
        mode: Some(EngineMode::Mc),
        ..overrides.clone()
    };
    let cells = config.cells(&o)?;
    let cell = cells
        .first()
        .ok_or_else(|| CliError::Validation("configuration has no cells".into()))?;
    let (_, stream) =
        run_monte_carlo(&cell.run, cell.m, cell.seed, config.jobs(overrides)).map_err(runtime)?;
    Ok(stream)
}
