use std::sync::Arc;

use netvd::circuit::{Event, NoiseChannel, Op, TimedCircuit};
use netvd::gates::NativeGate;
use netvd::noise::*;
use netvd::sim::{self, linalg, Pauli, StateKind};
use netvd::State;
use num_complex::Complex;
use proptest::prelude::*;

fn channels(c: &TimedCircuit) -> Vec<NoiseChannel> {
    c.events()
        .iter()
        .filter_map(|e| match &e.op {
            Op::Channel(ch) => Some(ch.clone()),
            _ => None,
        })
        .collect()
}

#[test]
fn idle_probability_examples() {
    let m = NoiseModel::reference();
    assert_eq!(idle_error_probability(0.0, &m), 0.0);
    assert!((idle_error_probability(1.0, &m) - 1e-5).abs() < 1e-18);
    // scalar oracle: repeated multiplication of the survival probability
    let survive = (0..100).fold(1.0f64, |s, _| s * (1.0 - 1e-5));
    assert!((idle_error_probability(100.0, &m) - (1.0 - survive)).abs() < 1e-13);
    // binomial series 100r − C(100,2)r² + C(100,3)r³
    let series = 100.0 * 1e-5 - 4950.0 * 1e-10 + 161_700.0 * 1e-15;
    assert!((idle_error_probability(100.0, &m) - series).abs() < 1e-12);
    assert!((idle_error_probability(100.0, &m) - 9.99505e-4).abs() < 1e-9);
}

#[test]
fn idle_probability_is_monotone_and_bounded() {
    let m = NoiseModel::reference();
    let mut last = 0.0;
    for t in [0.5, 1.0, 10.0, 1e3, 1e5, 1e7] {
        let p = idle_error_probability(t, &m);
        assert!(p > last && p <= 1.0);
        last = p;
    }
}

#[test]
fn all_zero_model_attaches_nothing() {
    let mut c = TimedCircuit::new(2);
    c.gate(NativeGate::rx(0, 0.3));
    c.gate(NativeGate::rzz(0, 1, 0.2));
    c.gate(NativeGate::ry(1, 0.1));
    let noisy = schedule_noise(&c, &NoiseModel::noiseless()).unwrap();
    assert_eq!(noisy, c);
}

#[test]
fn single_rx_gets_one_depolarising_channel() {
    let m = NoiseModel::reference();
    let mut c = TimedCircuit::new(1);
    c.gate(NativeGate::rx(0, 0.7));
    let ch = channels(&schedule_noise(&c, &m).unwrap());
    assert_eq!(
        ch,
        vec![NoiseChannel::Depolarizing {
            qubits: vec![0],
            p: m.p1q
        }]
    );
}

#[test]
fn virtual_rz_attaches_nothing() {
    let mut c = TimedCircuit::new(1);
    c.gate(NativeGate::rz(0, 0.7));
    let noisy = schedule_noise(&c, &NoiseModel::reference()).unwrap();
    assert!(channels(&noisy).is_empty());
}

#[test]
fn rzz_gets_two_qubit_depolarising() {
    let m = NoiseModel::reference();
    let mut c = TimedCircuit::new(2);
    c.gate(NativeGate::rzz(0, 1, 0.7));
    let ch = channels(&schedule_noise(&c, &m).unwrap());
    assert_eq!(
        ch,
        vec![NoiseChannel::Depolarizing {
            qubits: vec![0, 1],
            p: m.p2q
        }]
    );
}

#[test]
fn idle_gap_from_a_slow_neighbour() {
    // qubit 0: Rx, then waits while qubit 1 runs a 10 µs gate, then an Rzz
    // with qubit 1 forces it to sync up
    let m = NoiseModel {
        p1q: 0.0,
        p2q: 0.0,
        ..NoiseModel::reference()
    };
    let mut c = TimedCircuit::new(2);
    c.gate(NativeGate::rx(0, 0.1));
    c.gate(NativeGate::rx(1, 0.1).with_duration(11.0));
    c.gate(NativeGate::rzz(0, 1, 0.1));
    let ch = channels(&schedule_noise(&c, &m).unwrap());
    assert_eq!(
        ch,
        vec![NoiseChannel::Dephasing {
            qubit: 0,
            p: idle_error_probability(10.0, &m)
        }]
    );
}

#[test]
fn detection_and_mid_prep_flips() {
    let m = NoiseModel::reference();
    let mut c = TimedCircuit::new(1);
    c.push(Event::new(
        Op::Measure {
            qubit: 0,
            flip: 0.0,
            kind: netvd::circuit::MeasureKind::Local,
        },
        100.0,
    ))
    .unwrap();
    c.push(Event::new(Op::Reset { qubit: 0 }, 1.0)).unwrap();
    let noisy = schedule_noise(&c, &m).unwrap();
    match &noisy.events()[0].op {
        Op::Measure { flip, .. } => assert_eq!(*flip, m.p_detect),
        other => panic!("expected a measurement, got {other:?}"),
    }
    assert_eq!(
        channels(&noisy),
        vec![NoiseChannel::BitFlip {
            qubit: 0,
            p: m.p_mid_prep
        }]
    );
}

fn prepare(register: Vec<usize>, mid_circuit: bool) -> Event {
    let mut copy = TimedCircuit::new(register.len());
    copy.gate(NativeGate::rx(0, 0.4));
    Event::new(
        Op::PrepareCopy {
            register,
            circuit: Arc::new(copy),
            mid_circuit,
            flip: 0.0,
        },
        1.0,
    )
}

#[test]
fn initial_preparation_is_noiseless_and_mid_circuit_is_not() {
    let m = NoiseModel::reference();
    let mut c = TimedCircuit::new(1);
    c.push(prepare(vec![0], false)).unwrap();
    c.push(prepare(vec![0], true)).unwrap();
    let noisy = schedule_noise(&c, &m).unwrap();
    let flips: Vec<f64> = noisy
        .events()
        .iter()
        .filter_map(|e| match &e.op {
            Op::PrepareCopy { flip, .. } => Some(*flip),
            _ => None,
        })
        .collect();
    assert_eq!(flips, vec![0.0, m.p_mid_prep]);
}

#[test]
fn bell_pair_examples() {
    let ideal = noisy_bell_pair(&NoiseModel::noiseless());
    let phi = State::from_amplitudes(vec![
        Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(0.0, 0.0),
        Complex::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ])
    .unwrap()
    .to_density()
    .unwrap();
    assert!(ideal.density_matrix().max_abs_diff(&phi.density_matrix()) < 1e-15);

    let m = NoiseModel {
        p_bell: 0.01,
        ..NoiseModel::noiseless()
    };
    let noisy = noisy_bell_pair(&m);
    // fidelity ⟨Φ⁺|ρ|Φ⁺⟩ from the four corner elements
    let f = (noisy.rho(0, 0) + noisy.rho(0, 3) + noisy.rho(3, 0) + noisy.rho(3, 3)).re / 2.0;
    assert!((f - 0.99).abs() < 1e-14);

    // explicit Bell-basis mixture
    let bell = |amps: [f64; 4]| {
        State::from_amplitudes(amps.iter().map(|&a| Complex::new(a, 0.0)).collect())
            .unwrap()
            .density_matrix()
    };
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let projectors = [
        bell([s, 0.0, 0.0, s]),
        bell([s, 0.0, 0.0, -s]),
        bell([0.0, s, s, 0.0]),
        bell([0.0, s, -s, 0.0]),
    ];
    let weights = [0.99, 0.01 / 3.0, 0.01 / 3.0, 0.01 / 3.0];
    let mut mix = netvd::Mat::zeros(4);
    for (p, w) in projectors.iter().zip(weights) {
        for r in 0..4 {
            for c in 0..4 {
                mix[(r, c)] += p[(r, c)] * w;
            }
        }
    }
    assert!(linalg::trace_distance(&mix, &noisy.density_matrix()) < 1e-14);

    // same as depolarising the first half instead of the second
    let mut other = phi.clone();
    other.depolarize_1q(0, 0.01).unwrap();
    assert!(linalg::trace_distance(&other.density_matrix(), &noisy.density_matrix()) < 1e-14);
}

#[test]
fn scaled_model_scales_only_the_subset_and_clamps() {
    let base = NoiseModel::reference();
    let m = ScaledModel::new(base, 4.0, ScaledSet::ALL).unwrap().model();
    assert!((m.p1q - 4e-4).abs() < 1e-18);
    assert!((m.p2q - 4e-3).abs() < 1e-18);
    assert!((m.p_bell - 4e-2).abs() < 1e-18);
    assert_eq!(m.idle_rate, base.idle_rate);
    assert_eq!(m.p_detect, base.p_detect);
    assert_eq!(m.p_mid_prep, base.p_mid_prep);

    let only = ScaledSet {
        p1q: false,
        p2q: true,
        p_bell: false,
    };
    let m = ScaledModel::new(base, 1000.0, only).unwrap().model();
    assert_eq!(m.p2q, 1.0);
    assert_eq!(m.p1q, base.p1q);
    assert!(ScaledModel::new(base, 0.0, only).is_err());
}

#[test]
fn model_validation() {
    assert!(NoiseModel::reference().validate().is_ok());
    let bad = NoiseModel {
        p2q: 1.5,
        ..NoiseModel::reference()
    };
    assert!(bad.validate().is_err());
}

/// Random gate lists on a few qubits with random durations.
fn circuits() -> impl Strategy<Value = TimedCircuit> {
    let gate = (0usize..4, 0usize..4, 0u8..3, 0.0f64..20.0, -3.0f64..3.0);
    prop::collection::vec(gate, 1..40).prop_map(|gs| {
        let mut c = TimedCircuit::new(4);
        for (a, b, kind, d, angle) in gs {
            let g = match kind {
                0 => NativeGate::rx(a, angle),
                1 if a != b => NativeGate::rzz(a, b, angle),
                1 => NativeGate::rz(a, angle),
                _ => NativeGate::ry(a, angle),
            };
            c.gate(g.with_duration(d));
        }
        c
    })
}

proptest! {
    #[test]
    fn idle_insertion_is_exhaustive(c in circuits()) {
        let rep = schedule(&c).unwrap();
        for q in 0..4 {
            if let Some(start) = rep.first_start[q] {
                let window = rep.last_end[q] - start;
                prop_assert!((rep.idle[q] - (window - rep.busy[q])).abs() < 1e-9);
            }
        }
        // one dephasing channel per gap, with the composed probability
        let m = NoiseModel { p1q: 0.0, p2q: 0.0, ..NoiseModel::reference() };
        let noisy = schedule_noise(&c, &m).unwrap();
        let mut dephasing = [0.0f64; 4];
        for ch in channels(&noisy) {
            match ch {
                NoiseChannel::Dephasing { qubit, p } => {
                    // invert λ = 1 − (1 − r)^t to recover the gap
                    dephasing[qubit] += (1.0 - p).ln() / (1.0 - m.idle_rate).ln();
                }
                other => prop_assert!(false, "unexpected channel {:?}", other),
            }
        }
        for q in 0..4 {
            prop_assert!((dephasing[q] - rep.idle[q]).abs() < 1e-6);
        }
    }

    #[test]
    fn scaling_commutes_with_scheduling(c in circuits(), scale in 0.1f64..2000.0) {
        let base = NoiseModel::reference();
        let scaled = ScaledModel::new(base, scale, ScaledSet::ALL).unwrap().model();
        let a = channels(&schedule_noise(&c, &scaled).unwrap());
        let b: Vec<NoiseChannel> = channels(&schedule_noise(&c, &base).unwrap())
            .into_iter()
            .map(|ch| match ch {
                NoiseChannel::Depolarizing { qubits, p } => {
                    NoiseChannel::Depolarizing { qubits, p: (p * scale).min(1.0) }
                }
                other => other,
            })
            .collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn bell_pair_fidelity(p in 0.0f64..=1.0) {
        let m = NoiseModel { p_bell: p, ..NoiseModel::noiseless() };
        let s = noisy_bell_pair(&m);
        let f = (s.rho(0, 0) + s.rho(0, 3) + s.rho(3, 0) + s.rho(3, 3)).re / 2.0;
        prop_assert!((f - (1.0 - p)).abs() < 1e-12);
        prop_assert!((s.trace() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn dephasing_convention_scales_coherence_by_one_minus_two_lambda() {
    let mut s = State::zero(StateKind::Density, 1).unwrap();
    s.apply_unitary(&sim::hadamard(), &[0]).unwrap();
    s.dephase(0, 0.1).unwrap();
    assert!((s.rho(0, 1).re - 0.5 * 0.8).abs() < 1e-15);
    assert!(
        (s.pauli_expectation(&netvd::sim::PauliString::single(1, 0, Pauli::X))
            .unwrap()
            - 0.8)
            .abs()
            < 1e-15
    );
}
