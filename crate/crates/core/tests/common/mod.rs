//! Random states shared by the integration tests.
#![allow(dead_code)]

use netvd::{Mat, State};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-random pure state on `width` qubits.
pub fn random_pure<R: Rng>(width: usize, rng: &mut R) -> State {
    let d = 1usize << width;
    let mut amps: Vec<Complex<f64>> = (0..d)
        .map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    State::from_amplitudes(amps).expect("normalised")
}

/// Mixture of `rank` random pure states with random weights.
pub fn random_density<R: Rng>(width: usize, rank: usize, rng: &mut R) -> Mat {
    let d = 1usize << width;
    let weights: Vec<f64> = (0..rank).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    let mut m = Mat::zeros(d);
    for w in weights {
        let p = random_pure(width, rng).density_matrix();
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] += p[(r, c)] * (w / total);
            }
        }
    }
    m
}

pub fn density_state(m: &Mat) -> State {
    State::from_density(m).expect("valid density matrix")
}
