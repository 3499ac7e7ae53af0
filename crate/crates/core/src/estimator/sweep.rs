//! Grids of VD estimates with per-cell error capture.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    ideal_vd_oracle, noisy_copy_density, reference_value, run_exact, run_monte_carlo,
    EstimateReport, VdRun,
};
use crate::vd::Implementation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineMode {
    /// Density-matrix simulation of the full circuit.
    #[default]
    Exact,
    /// Pauli-trajectory Monte Carlo.
    Mc,
    /// `Tr[Oρⁿ]/Tr[ρⁿ]` straight from the copy's density matrix.
    Oracle,
}

impl fmt::Display for EngineMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineMode::Exact => "exact",
            EngineMode::Mc => "mc",
            EngineMode::Oracle => "oracle",
        })
    }
}

impl FromStr for EngineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(EngineMode::Exact),
            "mc" => Ok(EngineMode::Mc),
            "oracle" => Ok(EngineMode::Oracle),
            _ => Err(Error::InvalidParameter(format!(
                "unknown engine mode `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCell {
    pub run: VdRun,
    /// Noise scale factor, echoed in the report.
    pub c: f64,
    pub mode: EngineMode,
    pub m: usize,
    pub seed: u64,
    /// Worker threads for Monte Carlo trajectories.
    pub jobs: usize,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub implementation: Implementation,
    pub n: usize,
    pub data_width: usize,
    pub c: f64,
    pub mode: EngineMode,
    pub m: usize,
    pub seed: u64,
    pub observable: String,
    pub result: std::result::Result<EstimateReport, String>,
}

pub const REPORT_HEADER: [&str; 13] = [
    "impl",
    "n",
    "N",
    "c",
    "mode",
    "M",
    "ratio",
    "stderr",
    "deltaE",
    "reference",
    "seed",
    "observable",
    "error",
];

impl SweepRow {
    pub fn csv_record(&self) -> [String; 13] {
        let num = |f: fn(&EstimateReport) -> f64| match &self.result {
            Ok(r) => format!("{:.12e}", f(r)),
            Err(_) => String::new(),
        };
        [
            self.implementation.to_string(),
            self.n.to_string(),
            self.data_width.to_string(),
            self.c.to_string(),
            self.mode.to_string(),
            self.m.to_string(),
            num(|r| r.ratio),
            num(|r| r.std_error),
            num(|r| r.delta_e),
            num(|r| r.reference),
            self.seed.to_string(),
            self.observable.clone(),
            self.result.as_ref().err().cloned().unwrap_or_default(),
        ]
    }
}

/// Evaluates one cell.
pub fn run_cell(cell: &SweepCell) -> Result<EstimateReport> {
    match cell.mode {
        EngineMode::Exact => run_exact(&cell.run),
        EngineMode::Mc => run_monte_carlo(&cell.run, cell.m, cell.seed, cell.jobs).map(|(r, _)| r),
        EngineMode::Oracle => {
            let rho = noisy_copy_density(&cell.run.state_prep, &cell.run.copy_model)?;
            let mut notes = Vec::new();
            let reference = reference_value(&cell.run, Some(&rho), &mut notes)?;
            let v = ideal_vd_oracle(&rho, &cell.run.observable, cell.run.n)?;
            EstimateReport::new(v, 1.0, 0.0, 0, reference, notes)
        }
    }
}

/// Evaluates every cell; failures are recorded in their rows and the
/// sweep carries on. Rows come back in input order.
pub fn sweep(cells: &[SweepCell], jobs: usize) -> Vec<SweepRow> {
    let row = |cell: &SweepCell| SweepRow {
        implementation: cell.run.implementation,
        n: cell.run.n,
        data_width: cell.run.state_prep.width(),
        c: cell.c,
        mode: cell.mode,
        m: if cell.mode == EngineMode::Mc {
            cell.m
        } else {
            0
        },
        seed: cell.seed,
        observable: cell
            .run
            .observable
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("+"),
        result: run_cell(cell).map_err(|e| e.to_string()),
    };
    let jobs = jobs.max(1);
    if jobs == 1 || cells.len() <= 1 {
        return cells.iter().map(row).collect();
    }
    let chunk = cells.len().div_ceil(jobs);
    std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(row).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    })
}
