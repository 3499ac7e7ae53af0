//! Experiment files: TOML with `[plan]`, `[noise]`, `[engine]`, `[output]`
//! and, for the resources command, `[resources]`. Every section and key is
//! listed in the README.

use std::path::PathBuf;
use std::sync::Arc;

use netvd::estimator::{EngineMode, SweepCell, VdRun};
use netvd::heisenberg::{self, build_trotter_circuit, HeisenbergParams};
use netvd::network::{BsmFold, NetworkMode};
use netvd::noise::{Durations, NoiseModel, ScaledModel, ScaledSet};
use netvd::sim::PauliString;
use netvd::vd::{Implementation, ResourceMode};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// `4`, `[1, 2, 5]` or `{ from = 1, to = 5 }` (inclusive).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Counts {
    One(usize),
    Many(Vec<usize>),
    Span { from: usize, to: usize },
}

impl Counts {
    pub fn to_vec(&self) -> Vec<usize> {
        match self {
            Counts::One(v) => vec![*v],
            Counts::Many(v) => v.clone(),
            Counts::Span { from, to } => (*from..=*to).collect(),
        }
    }

    /// `4`, `2-8` or `1,3,5`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
        if let Some((a, b)) = s.split_once('-') {
            return Ok(Counts::Span {
                from: num(a)?,
                to: num(b)?,
            });
        }
        let v = s.split(',').map(num).collect::<Result<Vec<_>, _>>()?;
        Ok(Counts::Many(v))
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub plan: Option<PlanSection>,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub engine: EngineSection,
    #[serde(default)]
    pub output: OutputSection,
    pub resources: Option<ResourcesSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    #[serde(rename = "impl")]
    pub implementation: OneOrMany<String>,
    pub n: Counts,
    #[serde(rename = "N")]
    pub sites: Option<usize>,
    /// `h4`, `h5` or `h6`.
    pub preset: Option<String>,
    pub h: Option<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub delta_t: Option<f64>,
    pub init_site: Option<usize>,
    /// Pauli strings such as `"ZIII"` or `"0.5*XXII"`; defaults to Z on the
    /// excited site.
    pub observable: Option<OneOrMany<String>>,
    /// Overrides the dominant-eigenvector reference.
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    /// `reference` or `noiseless`.
    pub base: String,
    #[serde(rename = "p1Q")]
    pub p1q: Option<f64>,
    #[serde(rename = "p2Q")]
    pub p2q: Option<f64>,
    #[serde(rename = "pBell")]
    pub p_bell: Option<f64>,
    #[serde(rename = "pDetect")]
    pub p_detect: Option<f64>,
    #[serde(rename = "pMidPrep")]
    pub p_mid_prep: Option<f64>,
    #[serde(rename = "idleRate")]
    pub idle_rate: Option<f64>,
    pub durations: Option<Durations>,
    pub c: OneOrMany<f64>,
    /// Which probabilities `c` multiplies; all three when absent.
    pub scaled: Option<ScaledKeys>,
    /// Keep VD operations ideal and put noise only in the copies.
    pub copies_only: bool,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            base: "reference".into(),
            p1q: None,
            p2q: None,
            p_bell: None,
            p_detect: None,
            p_mid_prep: None,
            idle_rate: None,
            durations: None,
            c: OneOrMany::One(1.0),
            scaled: None,
            copies_only: false,
        }
    }
}

/// Keys left out of a `scaled` table are not scaled.
#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaledKeys {
    #[serde(rename = "p1Q")]
    pub p1q: bool,
    #[serde(rename = "p2Q")]
    pub p2q: bool,
    #[serde(rename = "pBell")]
    pub p_bell: bool,
}

impl ScaledKeys {
    fn set(keys: Option<Self>) -> ScaledSet {
        match keys {
            None => ScaledSet::ALL,
            Some(k) => ScaledSet {
                p1q: k.p1q,
                p2q: k.p2q,
                p_bell: k.p_bell,
            },
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub mode: EngineMode,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
    pub network: NetworkMode,
    pub bsm_fold: BsmFold,
    pub charge_bell_generation: bool,
    pub jobs: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        Self {
            mode: EngineMode::Exact,
            m: 10_000,
            seed: 1,
            network: NetworkMode::Folded,
            bsm_fold: BsmFold::Exact,
            charge_bell_generation: false,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesSection {
    #[serde(rename = "impl")]
    pub implementation: Option<OneOrMany<String>>,
    pub n: Counts,
    #[serde(rename = "N")]
    pub sites: Counts,
    pub mode: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub mode: Option<EngineMode>,
    pub jobs: Option<usize>,
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation(format!("`{field}`: {}", message.into()))
}

pub fn parse_implementations(
    field: &str,
    names: &[String],
) -> Result<Vec<Implementation>, CliError> {
    if names.is_empty() {
        return Err(invalid(field, "no implementation given"));
    }
    names
        .iter()
        .map(|s| {
            s.parse()
                .map_err(|e: netvd::Error| invalid(field, e.to_string()))
        })
        .collect()
}

pub fn parse_resource_mode(s: &str) -> Result<ResourceMode, CliError> {
    s.parse()
        .map_err(|e: netvd::Error| invalid("resources.mode", e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// The base model with the file's overrides, before scaling by `c`.
    pub fn base_model(&self) -> Result<NoiseModel, CliError> {
        let s = &self.noise;
        let mut m = match s.base.as_str() {
            "reference" => NoiseModel::reference(),
            "noiseless" => NoiseModel::noiseless(),
            other => {
                return Err(invalid(
                    "noise.base",
                    format!("unknown base model `{other}`"),
                ))
            }
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut m.p1q, s.p1q);
        set(&mut m.p2q, s.p2q);
        set(&mut m.p_bell, s.p_bell);
        set(&mut m.p_detect, s.p_detect);
        set(&mut m.p_mid_prep, s.p_mid_prep);
        set(&mut m.idle_rate, s.idle_rate);
        if let Some(d) = s.durations {
            m.durations = d;
        }
        m.validate().map_err(|e| invalid("noise", e.to_string()))?;
        Ok(m)
    }

    /// Heisenberg parameters. `K` defaults to the one-error-per-copy budget
    /// at the base two-qubit error, or at the reference one when the base
    /// model has none.
    pub fn workload(&self, base: &NoiseModel) -> Result<HeisenbergParams, CliError> {
        let plan = self
            .plan
            .as_ref()
            .ok_or_else(|| invalid("plan", "section missing"))?;
        let h = match (&plan.preset, &plan.h) {
            (Some(_), Some(_)) => {
                return Err(invalid("plan.h", "give either `preset` or `h`, not both"))
            }
            (Some(name), None) => heisenberg::preset(name)
                .ok_or_else(|| invalid("plan.preset", format!("unknown preset `{name}`")))?,
            (None, Some(h)) => h.clone(),
            (None, None) => {
                let n = plan
                    .sites
                    .ok_or_else(|| invalid("plan.N", "needed when no field vector is given"))?;
                vec![0.0; n]
            }
        };
        if let Some(n) = plan.sites {
            if n != h.len() {
                return Err(invalid(
                    "plan.N",
                    format!("{n} does not match the {} fields", h.len()),
                ));
            }
        }
        let k = match plan.k {
            Some(k) => k,
            None => {
                let p2q = if base.p2q > 0.0 {
                    base.p2q
                } else {
                    NoiseModel::reference().p2q
                };
                heisenberg::trotter_steps_for_budget(h.len(), p2q)
                    .map_err(|e| invalid("plan.K", e.to_string()))?
            }
        };
        let mut p = HeisenbergParams::new(h, k).map_err(|e| invalid("plan", e.to_string()))?;
        if let Some(dt) = plan.delta_t {
            p.delta_t = dt;
        }
        if let Some(s) = plan.init_site {
            p.init_site = s;
        }
        p.validate().map_err(|e| invalid("plan", e.to_string()))?;
        Ok(p)
    }

    /// Sweep cells in file order: implementation, then `c`, then `n`.
    pub fn cells(&self, overrides: &Overrides) -> Result<Vec<SweepCell>, CliError> {
        let plan = self
            .plan
            .as_ref()
            .ok_or_else(|| invalid("plan", "section missing"))?;
        let imps = parse_implementations("plan.impl", &plan.implementation.to_vec())?;
        let ns = plan.n.to_vec();
        if ns.is_empty() {
            return Err(invalid("plan.n", "empty range"));
        }
        if let Some(&bad) = ns.iter().find(|&&n| n == 0) {
            return Err(invalid(
                "plan.n",
                format!("copy count {bad} must be at least 1"),
            ));
        }
        let cs = self.noise.c.to_vec();
        if cs.is_empty() {
            return Err(invalid("noise.c", "empty range"));
        }
        let mut engine = self.engine.clone();
        if let Some(s) = overrides.seed {
            engine.seed = s;
        }
        if let Some(m) = overrides.mode {
            engine.mode = m;
        }
        if let Some(j) = overrides.jobs {
            engine.jobs = j;
        }
        if engine.mode == EngineMode::Mc && (engine.m == 0 || !engine.m.is_multiple_of(100)) {
            return Err(invalid(
                "engine.M",
                format!("{} is not a positive multiple of 100", engine.m),
            ));
        }
        let base = self.base_model()?;
        let params = self.workload(&base)?;
        let prep = Arc::new(
            build_trotter_circuit(&params, &base.durations)
                .map_err(|e| invalid("plan", e.to_string()))?,
        );
        let observable = match &plan.observable {
            None => vec![params.default_observable()],
            Some(list) => list
                .to_vec()
                .iter()
                .map(|s| {
                    s.parse::<PauliString>()
                        .map_err(|e| invalid("plan.observable", e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        if let Some(t) = observable.iter().find(|t| t.width() != params.n_sites()) {
            return Err(invalid(
                "plan.observable",
                format!(
                    "`{t}` acts on {} qubits, the chain has {}",
                    t.width(),
                    params.n_sites()
                ),
            ));
        }
        let single = imps.len() * cs.len() * ns.len() == 1;
        let mut cells = Vec::new();
        for &imp in &imps {
            for &c in &cs {
                let model = ScaledModel::new(base, c, ScaledKeys::set(self.noise.scaled))
                    .map_err(|e| invalid("noise.c", e.to_string()))?
                    .model();
                for &n in &ns {
                    let mut run = VdRun::new(imp, n, observable.clone(), prep.clone(), model);
                    if self.noise.copies_only {
                        run = run.noise_only_in_copies();
                    }
                    run.network = engine.network;
                    run.bsm_fold = engine.bsm_fold;
                    run.charge_bell_generation = engine.charge_bell_generation;
                    run.reference = plan.reference;
                    cells.push(SweepCell {
                        run,
                        c,
                        mode: engine.mode,
                        m: engine.m,
                        seed: engine.seed,
                        // one cell gets every worker; otherwise cells run in parallel
                        jobs: if single { engine.jobs.max(1) } else { 1 },
                    });
                }
            }
        }
        Ok(cells)
    }

    pub fn jobs(&self, overrides: &Overrides) -> usize {
        overrides.jobs.unwrap_or(self.engine.jobs).max(1)
    }
}
