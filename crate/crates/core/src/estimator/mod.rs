//! VD estimates: the density-matrix oracle, exact simulation of the built
//! circuits and Pauli-trajectory Monte Carlo.

mod engine;
mod oracle;
mod stats;
mod sweep;

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use oracle::{dominant_reference, ideal_vd_oracle, DominantReference, DEGENERACY_TOLERANCE};
pub use stats::{
    batch_standard_error, compensated_sum, mean, resampled_batch_spread, scaling_fit, SampleStream,
    ScalingFit, BATCHES,
};
pub use sweep::{run_cell, sweep, EngineMode, SweepCell, SweepRow, REPORT_HEADER};

use crate::circuit::TimedCircuit;
use crate::network::{BsmFold, NetworkMode};
use crate::noise::{schedule_copy, schedule_noise_split, NoiseModel};
use crate::sim::{PauliString, StateKind};
use crate::vd::{build, insert_artificial_gates, Implementation, VdPlan};
use crate::{Error, Mat, Result, State};
use engine::{compile, flipped_zero, sample_errors, Channels, Program, Register};

/// Denominators smaller than this make the ratio meaningless.
const DENOMINATOR_FLOOR: f64 = 1e-14;

/// One VD estimate to compute.
#[derive(Debug, Clone)]
pub struct VdRun {
    pub implementation: Implementation,
    pub n: usize,
    /// `O = Σ c_i σ_i` on the copy's qubits.
    pub observable: Vec<PauliString>,
    pub state_prep: Arc<TimedCircuit>,
    /// Noise inside each copy's preparation.
    pub copy_model: NoiseModel,
    /// Noise on everything else.
    pub vd_model: NoiseModel,
    pub network: NetworkMode,
    pub bsm_fold: BsmFold,
    pub charge_bell_generation: bool,
    /// Overrides the dominant-eigenvector reference.
    pub reference: Option<f64>,
}

impl VdRun {
    pub fn new(
        implementation: Implementation,
        n: usize,
        observable: Vec<PauliString>,
        state_prep: Arc<TimedCircuit>,
        model: NoiseModel,
    ) -> Self {
        Self {
            implementation,
            n,
            observable,
            state_prep,
            copy_model: model,
            vd_model: model,
            network: NetworkMode::Folded,
            bsm_fold: BsmFold::Exact,
            charge_bell_generation: false,
            reference: None,
        }
    }

    /// Keeps the copy noise and makes every VD operation ideal.
    pub fn noise_only_in_copies(mut self) -> Self {
        self.vd_model = NoiseModel::noiseless();
        self
    }

    fn data_width(&self) -> usize {
        self.state_prep.width()
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::TooFewCopies { n: 0, min: 1 });
        }
        if self.observable.is_empty() {
            return Err(Error::InvalidParameter("observable has no terms".into()));
        }
        for t in &self.observable {
            if t.width() != self.data_width() {
                return Err(Error::WidthMismatch {
                    expected: self.data_width(),
                    found: t.width(),
                });
            }
        }
        self.copy_model.validate()?;
        self.vd_model.validate()
    }

    fn plan(&self, sigma: PauliString) -> VdPlan {
        let mut plan = VdPlan::new(self.implementation, self.n, sigma, self.state_prep.clone());
        plan.network = self.network;
        plan.bsm_fold = self.bsm_fold;
        plan.charge_bell_generation = self.charge_bell_generation;
        plan.durations = self.vd_model.durations;
        plan
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub numerator_mean: f64,
    pub denominator_mean: f64,
    pub ratio: f64,
    /// Zero for exact evaluations.
    pub std_error: f64,
    /// Trajectories; zero for exact evaluations.
    pub m: usize,
    pub delta_e: f64,
    pub reference: f64,
    pub notes: Vec<String>,
}

impl EstimateReport {
    fn new(
        numerator: f64,
        denominator: f64,
        std_error: f64,
        m: usize,
        reference: f64,
        notes: Vec<String>,
    ) -> Result<Self> {
        if denominator.abs() < DENOMINATOR_FLOOR {
            return Err(Error::VanishingDenominator(denominator));
        }
        let ratio = numerator / denominator;
        Ok(Self {
            numerator_mean: numerator,
            denominator_mean: denominator,
            ratio,
            std_error,
            m,
            delta_e: (ratio - reference).abs(),
            reference,
            notes,
        })
    }
}

/// One numerator circuit per observable term plus the denominator.
struct Compiled {
    copy: Program,
    data_width: usize,
    /// `(coefficient, index into programs)`.
    terms: Vec<(f64, usize)>,
    programs: Vec<(Program, Vec<PauliString>)>,
    denominator: usize,
    /// `(coefficient, weight, σ)` for the single-copy rule.
    single: Vec<(f64, usize, PauliString)>,
}

fn compile_run(run: &VdRun) -> Result<Compiled> {
    run.validate()?;
    let noisy_copy = schedule_copy(&run.state_prep, &run.copy_model)?;
    let w = run.data_width();
    let copy = compile(&noisy_copy, &(0..w).collect());
    let mut c = Compiled {
        copy,
        data_width: w,
        terms: Vec::new(),
        programs: Vec::new(),
        denominator: 0,
        single: Vec::new(),
    };
    for t in &run.observable {
        let sigma = PauliString::new(t.ops().to_vec(), 1.0)?;
        c.single.push((t.coefficient(), t.weight(), sigma));
    }
    if run.n == 1 {
        return Ok(c);
    }
    let mut build_program = |sigma: PauliString| -> Result<usize> {
        let vd = build(&run.plan(sigma))?;
        let (circuit, obs) = insert_artificial_gates(&vd)?;
        let noisy = schedule_noise_split(&circuit, &run.copy_model, &run.vd_model)?;
        let keep: BTreeSet<usize> = obs.support().map(|(q, _)| q).collect();
        c.programs.push((compile(&noisy, &keep), vec![obs]));
        Ok(c.programs.len() - 1)
    };
    let den = build_program(PauliString::identity(w))?;
    let mut terms = Vec::new();
    for t in &run.observable {
        let idx = if t.is_identity() {
            den
        } else {
            build_program(PauliString::new(t.ops().to_vec(), 1.0)?)?
        };
        terms.push((t.coefficient(), idx));
    }
    c.denominator = den;
    c.terms = terms;
    Ok(c)
}

fn dummy_rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0)
}

/// Density matrix of one copy, each register qubit first flipped with
/// probability `flip`.
fn copy_density(copy: &Program, width: usize, flip: f64, channels: Channels<'_>) -> Result<State> {
    let mut r = Register::from_state(flipped_zero(StateKind::Density, width, flip)?);
    r.run(
        copy,
        channels,
        &mut |_, _, _| unreachable!("copies do not nest"),
        &mut dummy_rng(),
    )?;
    r.into_state()
}

/// Density matrix of one copy under `model`, as fed to the oracle.
pub fn noisy_copy_density(state_prep: &TimedCircuit, model: &NoiseModel) -> Result<Mat> {
    let noisy = schedule_copy(state_prep, model)?;
    let w = state_prep.width();
    let program = compile(&noisy, &(0..w).collect());
    Ok(copy_density(&program, w, 0.0, Channels::Exact)?.density_matrix())
}

fn reference_value(run: &VdRun, rho: Option<&Mat>, notes: &mut Vec<String>) -> Result<f64> {
    if let Some(r) = run.reference {
        return Ok(r);
    }
    let Some(rho) = rho else {
        return Err(Error::InvalidParameter(
            "copy too wide for a dominant-eigenvector reference; supply one".into(),
        ));
    };
    let d = dominant_reference(rho, &run.observable)?;
    notes.extend(d.warning);
    Ok(d.value)
}

/// `Σ c_i Tr[σ_i ρ] (1 − 2 pDetect)^{weight}`: one copy read out directly.
fn single_copy_value(c: &Compiled, state: &State, p_detect: f64) -> Result<f64> {
    let mut v = 0.0;
    for (coef, weight, sigma) in &c.single {
        v += coef * state.pauli_expectation(sigma)? * (1.0 - 2.0 * p_detect).powi(*weight as i32);
    }
    Ok(v)
}

/// Shot-noise-free estimate from density-matrix simulation.
pub fn run_exact(run: &VdRun) -> Result<EstimateReport> {
    let c = compile_run(run)?;
    let rho = copy_density(&c.copy, c.data_width, 0.0, Channels::Exact)?;
    let mut notes = Vec::new();
    let reference = reference_value(run, Some(&rho.density_matrix()), &mut notes)?;
    if run.n == 1 {
        let v = single_copy_value(&c, &rho, run.vd_model.p_detect)?;
        return EstimateReport::new(v, 1.0, 0.0, 0, reference, notes);
    }
    let mut cache: Vec<(Arc<TimedCircuit>, f64, State)> = vec![(run.state_prep.clone(), 0.0, rho)];
    let mut copies = |_: usize, copy: &Arc<TimedCircuit>, flip: f64| -> Result<State> {
        // every copy circuit in a run is the same noisy preparation
        let _ = copy;
        if let Some((_, _, s)) = cache.iter().find(|(_, f, _)| *f == flip) {
            return Ok(s.clone());
        }
        let s = copy_density(&c.copy, c.data_width, flip, Channels::Exact)?;
        cache.push((run.state_prep.clone(), flip, s.clone()));
        Ok(s)
    };
    let mut values = Vec::with_capacity(c.programs.len());
    let mut peak = 0;
    for (program, obs) in &c.programs {
        let mut r = Register::new(StateKind::Density, program.width);
        r.run(program, Channels::Exact, &mut copies, &mut dummy_rng())?;
        peak = peak.max(r.peak_width());
        values.push(r.expectation(obs)?);
    }
    notes.push(format!("peak simulated width {peak}"));
    let numerator = compensated_sum(c.terms.iter().map(|&(coef, i)| coef * values[i]));
    EstimateReport::new(numerator, values[c.denominator], 0.0, 0, reference, notes)
}

/// Exact `Σ ⟨σ_i⟩` at the end of `circuit` (noise already attached, or
/// none), with every copy preparation handing over `copy` after its
/// per-qubit flips. Measurements act as deferred readouts.
pub fn circuit_expectation(
    circuit: &TimedCircuit,
    copy: &State,
    observable: &[PauliString],
) -> Result<f64> {
    let keep: BTreeSet<usize> = observable
        .iter()
        .flat_map(|t| t.support().map(|(q, _)| q))
        .collect();
    let program = compile(circuit, &keep);
    let copy = copy.to_density()?;
    let mut r = Register::new(StateKind::Density, program.width);
    let mut supply = |_: usize, _: &Arc<TimedCircuit>, flip: f64| -> Result<State> {
        let mut s = copy.clone();
        if flip > 0.0 {
            for q in 0..s.width() {
                s.bit_flip(q, flip)?;
            }
        }
        Ok(s)
    };
    r.run(&program, Channels::Exact, &mut supply, &mut dummy_rng())?;
    r.expectation(observable)
}

/// Value of a program with every channel removed and ideal copies.
fn ideal_value(
    program: &Program,
    obs: &[PauliString],
    ideal_density: &State,
    ideal_sv: &State,
    seed: u64,
) -> Result<f64> {
    let mut r = Register::new(StateKind::Density, program.width);
    match r.run(
        program,
        Channels::Skip,
        &mut |_, _, _| Ok(ideal_density.clone()),
        &mut dummy_rng(),
    ) {
        Ok(()) => r.expectation(obs),
        Err(Error::WidthCap { .. }) => {
            let mut r = Register::new(StateKind::Statevector, program.width);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            r.run(
                program,
                Channels::Skip,
                &mut |_, _, _| Ok(ideal_sv.clone()),
                &mut rng,
            )?;
            r.expectation(obs)
        }
        Err(e) => Err(e),
    }
}

/// A sampled copy: `None` when no error occurred.
fn sample_copy<R: Rng + ?Sized>(c: &Compiled, flip: f64, rng: &mut R) -> Result<Option<State>> {
    let mut index = 0usize;
    let mut flipped = false;
    if flip > 0.0 {
        for q in 0..c.data_width {
            if rng.random::<f64>() < flip {
                index |= 1 << q;
                flipped = true;
            }
        }
    }
    let (errs, any) = sample_errors(&c.copy, rng);
    if !flipped && !any {
        return Ok(None);
    }
    let mut r = Register::from_state(State::basis(StateKind::Statevector, c.data_width, index)?);
    r.run(
        &c.copy,
        Channels::Sampled(&errs),
        &mut |_, _, _| unreachable!("copies do not nest"),
        rng,
    )?;
    Ok(Some(r.into_state()?))
}

/// Pauli-trajectory Monte Carlo with `m` trajectories.
///
/// Each trajectory samples its copies once and shares them between the
/// numerator terms and the denominator; the remaining channels are sampled
/// per circuit. Trajectory `t` draws from ChaCha8 stream `t` of `seed`.
pub fn run_monte_carlo(
    run: &VdRun,
    m: usize,
    seed: u64,
    jobs: usize,
) -> Result<(EstimateReport, SampleStream)> {
    if m == 0 || !m.is_multiple_of(BATCHES) {
        return Err(Error::InvalidSampleCount(m));
    }
    let c = compile_run(run)?;
    let ideal_rho = copy_density(&c.copy, c.data_width, 0.0, Channels::Skip)?;
    let ideal_sv = {
        let mut r = Register::from_state(State::zero(StateKind::Statevector, c.data_width)?);
        r.run(
            &c.copy,
            Channels::Skip,
            &mut |_, _, _| unreachable!("copies do not nest"),
            &mut dummy_rng(),
        )?;
        r.into_state()?
    };
    let mut notes = vec![
        "denominator shares each trajectory's copies; other channels sampled per circuit"
            .to_string(),
    ];
    let rho = if c.data_width <= StateKind::Density.cap() {
        Some(copy_density(&c.copy, c.data_width, 0.0, Channels::Exact)?.density_matrix())
    } else {
        None
    };
    let reference = reference_value(run, rho.as_ref(), &mut notes)?;
    let ideal: Vec<f64> = c
        .programs
        .iter()
        .map(|(p, obs)| ideal_value(p, obs, &ideal_rho, &ideal_sv, seed))
        .collect::<Result<_>>()?;
    let flips: Vec<f64> = c
        .programs
        .get(c.denominator)
        .map(|(p, _)| p.prepares().map(|(_, f)| f).collect())
        .unwrap_or_default();

    let trajectory = |t: usize| -> Result<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t as u64);
        if run.n == 1 {
            let s = sample_copy(&c, 0.0, &mut rng)?.unwrap_or_else(|| ideal_sv.clone());
            return Ok((single_copy_value(&c, &s, run.vd_model.p_detect)?, 1.0));
        }
        let copies: Vec<Option<State>> = flips
            .iter()
            .map(|&f| sample_copy(&c, f, &mut rng))
            .collect::<Result<_>>()?;
        let copies_ideal = copies.iter().all(Option::is_none);
        let mut values = Vec::with_capacity(c.programs.len());
        for (i, (program, obs)) in c.programs.iter().enumerate() {
            let (errs, any) = sample_errors(program, &mut rng);
            if copies_ideal && !any {
                values.push(ideal[i]);
                continue;
            }
            let mut r = Register::new(StateKind::Statevector, program.width);
            let mut supply = |k: usize, _: &Arc<TimedCircuit>, _: f64| -> Result<State> {
                Ok(copies[k].clone().unwrap_or_else(|| ideal_sv.clone()))
            };
            r.run(program, Channels::Sampled(&errs), &mut supply, &mut rng)?;
            values.push(r.expectation(obs)?);
        }
        let a_o = compensated_sum(c.terms.iter().map(|&(coef, i)| coef * values[i]));
        Ok((a_o, values[c.denominator]))
    };

    let jobs = jobs.max(1).min(m);
    let mut samples = vec![(0.0, 0.0); m];
    if jobs == 1 {
        for (t, s) in samples.iter_mut().enumerate() {
            *s = trajectory(t)?;
        }
    } else {
        let chunk = m.div_ceil(jobs);
        let results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = samples
                .chunks_mut(chunk)
                .enumerate()
                .map(|(j, out)| {
                    let trajectory = &trajectory;
                    scope.spawn(move || -> Result<()> {
                        for (i, s) in out.iter_mut().enumerate() {
                            *s = trajectory(j * chunk + i)?;
                        }
                        Ok(())
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        });
        results.into_iter().collect::<Result<()>>()?;
    }
    let stream = SampleStream {
        a_o: samples.iter().map(|s| s.0).collect(),
        a_i: samples.iter().map(|s| s.1).collect(),
        seed,
    };
    let se = batch_standard_error(&stream)?;
    let report = EstimateReport::new(
        mean(&stream.a_o),
        mean(&stream.a_i),
        se,
        m,
        reference,
        notes,
    )?;
    Ok((report, stream))
}
