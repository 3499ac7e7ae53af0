//! Pauli letters, weighted Pauli strings and their action on basis states.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn phases(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Bit masks describing a Pauli string acting on computational basis states.
///
/// `P|x⟩ = i^{y_count} (−1)^{popcount(x & z_mask)} |x ^ x_mask⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PauliMasks {
    pub x_mask: usize,
    pub z_mask: usize,
    pub y_count: u32,
}

impl PauliMasks {
    /// Phase picked up by basis state `x`.
    #[inline]
    pub fn phase<T: Scalar>(&self, x: usize) -> Complex<T> {
        let sign = if (x & self.z_mask).count_ones().is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        };
        match self.y_count % 4 {
            0 => Complex::new(sign, T::zero()),
            1 => Complex::new(T::zero(), sign),
            2 => Complex::new(-sign, T::zero()),
            _ => Complex::new(T::zero(), -sign),
        }
    }
}

/// A real-weighted tensor product of Pauli letters, one letter per qubit.
///
/// Letter `k` acts on qubit `k`; the text form lists qubit 0 first, e.g.
/// `"IIZI"` is `Z` on qubit 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    ops: Vec<Pauli>,
    coefficient: f64,
}

impl PauliString {
    pub fn new(ops: Vec<Pauli>, coefficient: f64) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Pauli coefficient {coefficient} is not finite"
            )));
        }
        Ok(Self { ops, coefficient })
    }

    pub fn identity(width: usize) -> Self {
        Self {
            ops: vec![Pauli::I; width],
            coefficient: 1.0,
        }
    }

    /// Single-letter string on `qubit` in a register of `width`.
    pub fn single(width: usize, qubit: usize, p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; width];
        ops[qubit] = p;
        Self {
            ops,
            coefficient: 1.0,
        }
    }

    /// Product of `p` on every listed qubit.
    pub fn on(width: usize, qubits: &[usize], p: Pauli) -> Self {
        let mut ops = vec![Pauli::I; width];
        for &q in qubits {
            ops[q] = p;
        }
        Self {
            ops,
            coefficient: 1.0,
        }
    }

    pub fn with_coefficient(mut self, c: f64) -> Self {
        self.coefficient = c;
        self
    }

    pub fn width(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.ops
    }

    pub fn coefficient(&self) -> f64 {
        self.coefficient
    }

    pub fn is_identity(&self) -> bool {
        self.ops.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.ops.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Qubits carrying a non-identity letter, with their letters.
    pub fn support(&self) -> impl Iterator<Item = (usize, Pauli)> + '_ {
        self.ops
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != Pauli::I)
            .map(|(q, &p)| (q, p))
    }

    pub fn masks(&self) -> PauliMasks {
        let mut m = PauliMasks {
            x_mask: 0,
            z_mask: 0,
            y_count: 0,
        };
        for (q, &p) in self.ops.iter().enumerate() {
            if p.flips() {
                m.x_mask |= 1 << q;
            }
            if p.phases() {
                m.z_mask |= 1 << q;
            }
            if p == Pauli::Y {
                m.y_count += 1;
            }
        }
        m
    }

    /// Embeds the string into a wider register, mapping letter `k` to qubit `map[k]`.
    pub fn embed(&self, width: usize, map: &[usize]) -> Self {
        let mut ops = vec![Pauli::I; width];
        for (k, &p) in self.ops.iter().enumerate() {
            ops[map[k]] = p;
        }
        Self {
            ops,
            coefficient: self.coefficient,
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficient != 1.0 {
            write!(f, "{}*", self.coefficient)?;
        }
        for p in &self.ops {
            write!(f, "{}", p.letter())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `"ZIIX"` or `"0.5*ZIIX"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (coefficient, letters) = match s.split_once('*') {
            Some((c, rest)) => (
                c.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidParameter(format!("bad Pauli coefficient `{c}`: {e}"))
                })?,
                rest.trim(),
            ),
            None => (1.0, s),
        };
        let ops = letters
            .chars()
            .map(|c| {
                Pauli::from_letter(c)
                    .ok_or_else(|| Error::InvalidParameter(format!("bad Pauli letter `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::InvalidParameter("empty Pauli string".into()));
        }
        PauliString::new(ops, coefficient)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        let p: PauliString = "0.5*IXYZ".parse().unwrap();
        assert_eq!(p.weight(), 3);
        assert_eq!(p.to_string(), "0.5*IXYZ");
        let m = p.masks();
        assert_eq!(m.x_mask, 0b0110);
        assert_eq!(m.z_mask, 0b1100);
        assert!("IQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn y_phase_on_basis_states() {
        let y = PauliString::single(1, 0, Pauli::Y).masks();
        // Y|0> = i|1>, Y|1> = -i|0>
        assert_eq!(y.phase::<f64>(0), Complex::new(0.0, 1.0));
        assert_eq!(y.phase::<f64>(1), Complex::new(0.0, -1.0));
    }
}
