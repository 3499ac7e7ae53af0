mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use netvd::circuit::{Op, TimedCircuit};
use netvd::estimator::{circuit_expectation, ideal_vd_oracle};
use netvd::gates::{GateKind, NativeGate};
use netvd::noise::{schedule, schedule_noise, NoiseModel};
use netvd::sim::{Pauli, PauliString, StateKind};
use netvd::vd::*;
use netvd::State;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{density_state, random_density};

/// A copy-preparation stand-in: one Rx layer, so `d_ρ` is 1 µs.
fn prep(width: usize) -> Arc<TimedCircuit> {
    let mut c = TimedCircuit::new(width);
    for q in 0..width {
        c.gate(NativeGate::rx(q, 0.3));
    }
    Arc::new(c)
}

fn plan(imp: Implementation, n: usize, sigma: PauliString) -> VdPlan {
    let w = sigma.width();
    VdPlan::new(imp, n, sigma, prep(w))
}

/// `Tr[σρⁿ] / Tr[ρⁿ]` read off the built circuits with `copy` as every copy.
fn built_ratio(p: &VdPlan, copy: &State, model: Option<&NoiseModel>) -> f64 {
    let value = |sigma: PauliString| {
        let vd = build(&p.with_sigma(sigma)).unwrap();
        let (c, obs) = insert_artificial_gates(&vd).unwrap();
        let c = match model {
            Some(m) => schedule_noise(&c, m).unwrap(),
            None => c,
        };
        circuit_expectation(&c, copy, &[obs]).unwrap()
    };
    let w = p.data_width();
    value(p.sigma.clone()) / value(PauliString::identity(w))
}

fn bits(pairs: &[(usize, bool)]) -> BTreeMap<usize, bool> {
    pairs.iter().copied().collect()
}

#[test]
fn table_counts_match_closed_forms() {
    let r = count_resources(Implementation::Cr, 4, 6, ResourceMode::Table).unwrap();
    assert_eq!((r.qubits, r.cswap, r.bsm), (25, 18, 6));
    assert_eq!(r.depth.to_string(), "d_ρ+2d_S+d_B+d_σ");

    let r = count_resources(Implementation::Qecr, 5, 4, ResourceMode::Table).unwrap();
    assert_eq!((r.registers, r.qubits, r.cswap, r.bsm), (2, 9, 16, 4));
    assert_eq!(r.depth.to_string(), "4d_ρ+3d_S+d_B");

    let r = count_resources(Implementation::Bw, 7, 3, ResourceMode::Table).unwrap();
    assert_eq!((r.qubits, r.cswap, r.bsm), (24, 9, 9));
    assert_eq!(r.depth.to_string(), "d_ρ+d_S+d_B+d_σ");

    for imp in Implementation::ALL {
        for mode in [ResourceMode::Table, ResourceMode::AsBuilt] {
            let r = count_resources(imp, 1, 5, mode).unwrap();
            assert_eq!((r.registers, r.cswap, r.bsm, r.qubits), (1, 0, 0, 5));
        }
        assert!(count_resources(imp, 0, 3, ResourceMode::Table).is_err());
    }
}

#[test]
fn as_built_counts_examples() {
    let r = count_resources(Implementation::Cr, 4, 6, ResourceMode::AsBuilt).unwrap();
    assert_eq!((r.cswap, r.bsm), (12, 6));
    let r = count_resources(Implementation::Qecr, 5, 4, ResourceMode::AsBuilt).unwrap();
    assert_eq!((r.cswap, r.bsm, r.qubits), (12, 4, 9));
    let r = count_resources(Implementation::Bw, 4, 6, ResourceMode::AsBuilt).unwrap();
    assert_eq!((r.qubits, r.cswap, r.bsm), (25, 6, 12));
    let r = count_resources(Implementation::Bw, 2, 3, ResourceMode::AsBuilt).unwrap();
    assert_eq!((r.qubits, r.cswap, r.bsm), (7, 0, 3));
    let r = count_resources(Implementation::Cr, 2, 1, ResourceMode::AsBuilt).unwrap();
    assert_eq!((r.cswap, r.bsm), (0, 1));
}

#[test]
fn resource_csv_record() {
    let r = count_resources(Implementation::Bw, 5, 2, ResourceMode::Table).unwrap();
    assert_eq!(
        r.csv_record(),
        [
            "BW",
            "5",
            "2",
            "table",
            "5",
            "12",
            "4",
            "4",
            "9",
            "d_ρ+d_S+d_B+d_σ"
        ]
        .map(String::from)
    );
}

#[test]
fn shot_value_examples() {
    let rule = ShotRule {
        ancillas: vec![0],
        bsm_pairs: vec![BsmOutcome::local(1, 2), BsmOutcome::local(3, 4)],
    };
    let zero = bits(&[(0, false), (1, false), (2, false), (3, false), (4, false)]);
    assert_eq!(shot_value(&rule, &zero).unwrap(), 1);
    let one_pair = bits(&[(0, false), (1, true), (2, true), (3, false), (4, true)]);
    assert_eq!(shot_value(&rule, &one_pair).unwrap(), -1);
    let two_pairs = bits(&[(0, false), (1, true), (2, true), (3, true), (4, true)]);
    assert_eq!(shot_value(&rule, &two_pairs).unwrap(), 1);
    let ancilla = bits(&[(0, true), (1, false), (2, false), (3, false), (4, false)]);
    assert_eq!(shot_value(&rule, &ancilla).unwrap(), -1);
    let missing = bits(&[(0, false), (1, false)]);
    assert!(shot_value(&rule, &missing).is_err());

    // split bits of an explicit remote BSM are parities
    let remote = ShotRule {
        ancillas: vec![],
        bsm_pairs: vec![BsmOutcome {
            x_bits: vec![0, 1],
            z_bits: vec![2, 3],
        }],
    };
    let b = bits(&[(0, true), (1, false), (2, true), (3, true)]);
    assert_eq!(shot_value(&remote, &b).unwrap(), 1);
    let b = bits(&[(0, true), (1, false), (2, false), (3, true)]);
    assert_eq!(shot_value(&remote, &b).unwrap(), -1);
}

/// `½(I + Z₁ + Z₂ − Z₁Z₂)` on a BSM's two bits.
fn sign_observable(width: usize, q1: usize, q2: usize) -> Vec<PauliString> {
    vec![
        PauliString::identity(width).with_coefficient(0.5),
        PauliString::single(width, q1, Pauli::Z).with_coefficient(0.5),
        PauliString::single(width, q2, Pauli::Z).with_coefficient(0.5),
        PauliString::on(width, &[q1, q2], Pauli::Z).with_coefficient(-0.5),
    ]
}

/// A BSM acting on a two-qubit input handed over as one copy.
fn bsm_on(input: &State) -> f64 {
    let (bsm, _) = build_bsm(0, 1, 2, &Default::default()).unwrap();
    let mut c = TimedCircuit::new(2);
    c.push(netvd::circuit::Event::new(
        Op::PrepareCopy {
            register: vec![0, 1],
            circuit: Arc::new(TimedCircuit::new(2)),
            mid_circuit: false,
            flip: 0.0,
        },
        0.0,
    ))
    .unwrap();
    c.extend(&bsm).unwrap();
    circuit_expectation(&c, input, &sign_observable(2, 0, 1)).unwrap()
}

#[test]
fn bsm_examples() {
    let zero = State::zero(StateKind::Density, 2).unwrap();
    assert!((bsm_on(&zero) - 1.0).abs() < 1e-14);

    // |0⟩|1⟩: P(both 1) = 1/2, so the sign averages to 0
    let zero_one = State::basis(StateKind::Density, 2, 0b10).unwrap();
    assert!(bsm_on(&zero_one).abs() < 1e-14);

    let mut mixed = netvd::Mat::zeros(4);
    for i in 0..4 {
        mixed[(i, i)] = num_complex::Complex::new(0.25, 0.0);
    }
    assert!((bsm_on(&density_state(&mixed)) - 0.5).abs() < 1e-14);
}

#[test]
fn bsm_sign_is_the_overlap_of_its_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a = random_density(1, 2, &mut rng);
        let b = random_density(1, 2, &mut rng);
        let overlap: f64 = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (a[(r, c)] * b[(c, r)]).re)
            .sum();
        // qubit 0 holds a, qubit 1 holds b
        let input = density_state(&b.kron(&a));
        assert!((bsm_on(&input) - overlap).abs() < 1e-12);
    }
}

#[test]
fn builders_reject_a_single_copy() {
    for imp in Implementation::ALL {
        let p = plan(imp, 1, PauliString::single(2, 0, Pauli::Z));
        assert!(build(&p).is_err());
    }
    let p = plan(Implementation::Cr, 3, PauliString::single(2, 0, Pauli::Z));
    assert!(build_bw(&p).is_err());
}

#[test]
fn cr_two_copies_of_one_qubit_is_a_destructive_swap_test() {
    let p = plan(Implementation::Cr, 2, PauliString::single(1, 0, Pauli::Z));
    let vd = build(&p).unwrap();
    assert_eq!(
        vd.circuit.count_gates(GateKind::Rzz),
        2,
        "controlled-Z and one BSM CNOT"
    );
    assert_eq!(vd.rule.bsm_pairs.len(), 1);
    assert_eq!(vd.rule.ancillas.len(), 1);

    let zero = State::zero(StateKind::Density, 1).unwrap();
    assert!((built_ratio(&p, &zero, None) - 1.0).abs() < 1e-12);
}

#[test]
fn noiseless_builders_match_the_oracle_for_random_copies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for width in 1..=2 {
        let rho = random_density(width, 3, &mut rng);
        let copy = density_state(&rho);
        let sigma = PauliString::on(width, &(0..width).collect::<Vec<_>>(), Pauli::X);
        for imp in Implementation::ALL {
            for n in 2..=4 {
                let got = built_ratio(&plan(imp, n, sigma.clone()), &copy, None);
                let want = ideal_vd_oracle(&rho, std::slice::from_ref(&sigma), n).unwrap();
                assert!(
                    (got - want).abs() < 1e-10,
                    "{imp} n={n} N={width}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn artificial_gates_match_the_full_observable_under_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let copy = density_state(&random_density(2, 2, &mut rng));
    let model = NoiseModel {
        p1q: 0.01,
        p2q: 0.02,
        p_bell: 0.05,
        p_detect: 0.03,
        ..NoiseModel::reference()
    };
    for imp in Implementation::ALL {
        for n in [2, 3] {
            let vd = build(&plan(imp, n, PauliString::single(2, 1, Pauli::Y))).unwrap();
            let (reduced, obs) = insert_artificial_gates(&vd).unwrap();
            let a = circuit_expectation(&schedule_noise(&reduced, &model).unwrap(), &copy, &[obs])
                .unwrap();
            let full = full_observable(&vd);
            let b =
                circuit_expectation(&schedule_noise(&vd.circuit, &model).unwrap(), &copy, &full)
                    .unwrap();
            assert!((a - b).abs() < 1e-10, "{imp} n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn full_observable_term_counts() {
    for n in 2..=5 {
        for width in 1..=2 {
            let vd = build(&plan(
                Implementation::Bw,
                n,
                PauliString::single(width, 0, Pauli::Z),
            ))
            .unwrap();
            assert_eq!(
                full_observable(&vd).len(),
                4usize.pow(((n / 2) * width) as u32)
            );
            let (_, obs) = insert_artificial_gates(&vd).unwrap();
            assert!(obs.support().all(|(_, p)| p == Pauli::Z));
        }
    }
}

#[test]
fn qecr_two_copies_equals_cr() {
    for sigma in ["ZX", "IY"] {
        let sigma: PauliString = sigma.parse().unwrap();
        let cr = build(&plan(Implementation::Cr, 2, sigma.clone())).unwrap();
        let qecr = build(&plan(Implementation::Qecr, 2, sigma)).unwrap();
        assert_eq!(cr.circuit, qecr.circuit);
        assert_eq!(cr.rule, qecr.rule);
    }
}

#[test]
fn qecr_held_register_idles_one_preparation_per_extra_copy() {
    // a slower preparation makes the effect dominate the C-SWAP layer time
    let mut c = TimedCircuit::new(2);
    for _ in 0..50 {
        c.gate(NativeGate::rzz(0, 1, 0.1));
    }
    let c = Arc::new(c);
    let d_rho = schedule(&c).unwrap().makespan;
    let held_idle = |n: usize| {
        let vd = build(&VdPlan::new(
            Implementation::Qecr,
            n,
            "ZZ".parse().unwrap(),
            c.clone(),
        ))
        .unwrap();
        let rep = schedule(&vd.circuit).unwrap();
        vd.layout.registers[0]
            .iter()
            .map(|&q| rep.idle[q])
            .sum::<f64>()
            / 2.0
    };
    let idle: Vec<f64> = (2..=6).map(held_idle).collect();
    for w in idle.windows(2) {
        let growth = w[1] - w[0];
        // one re-preparation plus its reset, give or take waiting for the
        // other register qubit's C-SWAP
        assert!(growth >= d_rho, "growth {growth} < d_ρ {d_rho}");
        assert!(growth < d_rho + 200.0, "growth {growth} for d_ρ {d_rho}");
    }
    // from n = 3 on every added copy adds the same cycle
    for w in idle[1..].windows(3) {
        assert!(((w[2] - w[1]) - (w[1] - w[0])).abs() < 1e-9);
    }
}

#[test]
fn bw_depth_is_independent_of_copy_count() {
    let durations: Vec<f64> = (3..=8)
        .map(|n| {
            let vd = build(&plan(
                Implementation::Bw,
                n,
                PauliString::single(2, 0, Pauli::Z),
            ))
            .unwrap();
            schedule(&vd.circuit).unwrap().makespan
        })
        .collect();
    // the layer structure is fixed; only the ancilla preparation differs
    // (one Hadamard for a single ancilla, a folded GHZ state beyond that)
    for d in &durations {
        assert!((d - durations[0]).abs() <= 1.0, "{durations:?}");
    }
    for d in &durations[2..] {
        assert_eq!(*d, durations[2]);
    }
    for n in 3..=8 {
        let r = count_resources(Implementation::Bw, n, 2, ResourceMode::AsBuilt).unwrap();
        assert_eq!(r.depth.to_string(), "d_ρ+d_S+d_B+d_σ");
    }
}

#[test]
fn bw_uses_floor_ancillas() {
    for n in 3..=8 {
        let vd = build(&plan(
            Implementation::Bw,
            n,
            PauliString::single(1, 0, Pauli::Z),
        ))
        .unwrap();
        assert_eq!(vd.layout.ancillas.len(), (n - 1) / 2);
        assert_eq!(vd.rule.bsm_pairs.len(), n / 2);
    }
}

#[test]
fn controlled_sigma_placement_does_not_change_the_estimate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let copy = density_state(&random_density(2, 2, &mut rng));
    let sigma: PauliString = "XZ".parse().unwrap();
    for imp in Implementation::ALL {
        for n in [2, 3] {
            let p = plan(imp, n, sigma.clone());
            let base = built_ratio(&p, &copy, None);
            for r in 0..n {
                let mut q = p.clone();
                q.sigma_register = Some(r);
                let v = built_ratio(&q, &copy, None);
                assert!(
                    (v - base).abs() < 1e-10,
                    "{imp} n={n} σ on {r}: {v} vs {base}"
                );
            }
        }
    }
}

#[test]
fn listing_names_every_event_kind() {
    let vd = build(&plan(
        Implementation::Qecr,
        3,
        PauliString::single(1, 0, Pauli::Z),
    ))
    .unwrap();
    let noisy = schedule_noise(&vd.circuit, &NoiseModel::reference()).unwrap();
    let text = noisy.listing();
    for word in ["RZZ", "CHANNEL", "MEASURE", "PREPARE"] {
        assert!(text.contains(word), "listing lacks {word}:\n{text}");
    }
}
