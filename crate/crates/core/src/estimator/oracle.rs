//! Reference values computed directly from a copy's density matrix.

use num_complex::Complex;

use crate::sim::linalg::hermitian_eigen;
use crate::sim::{PauliString, StateKind};
use crate::{Error, Mat, Result, State};

/// Two top eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

fn check_width(rho: &Mat, observable: &[PauliString]) -> Result<usize> {
    let w = rho.qubits().ok_or_else(|| {
        Error::InvalidState(format!("dimension {} is not a power of two", rho.dim()))
    })?;
    for t in observable {
        if t.width() != w {
            return Err(Error::WidthMismatch {
                expected: w,
                found: t.width(),
            });
        }
    }
    Ok(w)
}

/// `Σ_i c_i Tr[P_i m]` for any square `m`.
fn trace_with(m: &Mat, w: usize, observable: &[PauliString]) -> Result<f64> {
    let s = State::from_raw(StateKind::Density, w, m.data().to_vec())?;
    s.expectation(observable)
}

/// `Σ_i c_i Tr[σ_i ρⁿ] / Tr[ρⁿ]` by repeated multiplication.
///
/// The running power is rescaled to unit trace after every product so that
/// large `n` on a mixed `ρ` does not underflow; the ratio is unaffected.
/// A trace below `1e-14` at any step is reported as a vanishing
/// denominator.
pub fn ideal_vd_oracle(rho: &Mat, observable: &[PauliString], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::TooFewCopies { n, min: 1 });
    }
    let w = check_width(rho, observable)?;
    let normalised = |m: Mat| -> Result<Mat> {
        let t = m.trace().re;
        if t.abs() < 1e-14 {
            return Err(Error::VanishingDenominator(t));
        }
        Ok(m.scale(Complex::new(1.0 / t, 0.0)))
    };
    let mut power = normalised(rho.clone())?;
    for _ in 1..n {
        power = normalised(&power * rho)?;
    }
    trace_with(&power, w, observable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantReference {
    pub value: f64,
    pub eigenvalue: f64,
    /// Set when the top eigenvalue is degenerate within
    /// [`DEGENERACY_TOLERANCE`]; the lowest-index eigenvector was used.
    pub warning: Option<String>,
}

/// `⟨ψ|O|ψ⟩` for the eigenvector of `ρ` with the largest eigenvalue.
pub fn dominant_reference(rho: &Mat, observable: &[PauliString]) -> Result<DominantReference> {
    let w = check_width(rho, observable)?;
    let e = hermitian_eigen(rho);
    let top = *e.values.last().expect("non-empty matrix");
    // eigenvalues ascend, so the tied group is a suffix; take its first member
    let first = e
        .values
        .iter()
        .position(|&v| top - v <= DEGENERACY_TOLERANCE)
        .expect("top is present");
    let warning = (first + 1 < e.values.len())
        .then(|| format!("top eigenvalue {top:.6e} is degenerate; using eigenvector {first}"));
    let v: Vec<Complex<f64>> = e.vectors[first].clone();
    let s = State::from_amplitudes(v)?;
    debug_assert_eq!(s.width(), w);
    Ok(DominantReference {
        value: s.expectation(observable)?,
        eigenvalue: e.values[first],
        warning,
    })
}
