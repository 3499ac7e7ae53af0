//! Low-level amplitude kernels shared by both state kinds.
//!
//! A density matrix over `W` qubits is treated as a vector over `2W` bits
//! (row bits high, column bits low), so the same kernels serve both kinds.

use num_complex::Complex;

use crate::Scalar;

/// Shape of a small operator, detected once so hot loops can specialise.
#[derive(Debug, Clone)]
pub(crate) enum Shape<T> {
    Diagonal(Vec<Complex<T>>),
    /// Row `r` has its single nonzero entry `value[r]` in column `col[r]`.
    Monomial {
        col: Vec<usize>,
        value: Vec<Complex<T>>,
    },
    Dense(Vec<Complex<T>>),
}

impl<T: Scalar> Shape<T> {
    pub(crate) fn classify(dim: usize, m: &[Complex<T>]) -> Self {
        let zero = |z: &Complex<T>| z.re == T::zero() && z.im == T::zero();
        let mut diagonal = true;
        let mut col = Vec::with_capacity(dim);
        let mut value = Vec::with_capacity(dim);
        let mut monomial = true;
        for r in 0..dim {
            let row = &m[r * dim..(r + 1) * dim];
            let nz: Vec<usize> = (0..dim).filter(|&c| !zero(&row[c])).collect();
            if nz.iter().any(|&c| c != r) {
                diagonal = false;
            }
            if nz.len() == 1 {
                col.push(nz[0]);
                value.push(row[nz[0]]);
            } else {
                monomial = false;
            }
        }
        if diagonal {
            Shape::Diagonal((0..dim).map(|i| m[i * dim + i]).collect())
        } else if monomial {
            Shape::Monomial { col, value }
        } else {
            Shape::Dense(m.to_vec())
        }
    }

    pub(crate) fn conj(&self) -> Self {
        match self {
            Shape::Diagonal(d) => Shape::Diagonal(d.iter().map(|z| z.conj()).collect()),
            Shape::Monomial { col, value } => Shape::Monomial {
                col: col.clone(),
                value: value.iter().map(|z| z.conj()).collect(),
            },
            Shape::Dense(m) => Shape::Dense(m.iter().map(|z| z.conj()).collect()),
        }
    }
}

/// Offsets of the `2^k` sub-indices spanned by `positions`; bit `b` of the
/// sub-index maps to bit `positions[b]` of the full index.
pub(crate) fn offsets(positions: &[usize]) -> Vec<usize> {
    let d = 1usize << positions.len();
    (0..d)
        .map(|s| {
            positions
                .iter()
                .enumerate()
                .filter(|(b, _)| s >> b & 1 == 1)
                .fold(0, |acc, (_, &p)| acc | 1 << p)
        })
        .collect()
}

/// Calls `f(base)` for every index in `0..len` whose `mask` bits are clear.
#[inline]
pub(crate) fn for_each_base(len: usize, mask: usize, mut f: impl FnMut(usize)) {
    let mut base = 0usize;
    while base < len {
        f(base);
        base = ((base | mask) + 1) & !mask;
    }
}

/// Applies a `2^k × 2^k` operator to the bits at `positions` of `data`.
pub(crate) fn apply<T: Scalar>(data: &mut [Complex<T>], positions: &[usize], op: &Shape<T>) {
    let off = offsets(positions);
    let d = off.len();
    let mask = off[d - 1];
    let len = data.len();
    match op {
        Shape::Diagonal(diag) => {
            for_each_base(len, mask, |b| {
                for s in 0..d {
                    data[b | off[s]] *= diag[s];
                }
            });
        }
        Shape::Monomial { col, value } => {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); d];
            for_each_base(len, mask, |b| {
                for s in 0..d {
                    buf[s] = data[b | off[s]];
                }
                for r in 0..d {
                    data[b | off[r]] = value[r] * buf[col[r]];
                }
            });
        }
        Shape::Dense(m) if d == 2 => {
            let (m00, m01, m10, m11) = (m[0], m[1], m[2], m[3]);
            let o = off[1];
            for_each_base(len, mask, |b| {
                let a0 = data[b];
                let a1 = data[b | o];
                data[b] = m00 * a0 + m01 * a1;
                data[b | o] = m10 * a0 + m11 * a1;
            });
        }
        Shape::Dense(m) => {
            let mut buf = vec![Complex::new(T::zero(), T::zero()); d];
            for_each_base(len, mask, |b| {
                for s in 0..d {
                    buf[s] = data[b | off[s]];
                }
                for r in 0..d {
                    let row = &m[r * d..(r + 1) * d];
                    let mut acc = Complex::new(T::zero(), T::zero());
                    for s in 0..d {
                        acc += row[s] * buf[s];
                    }
                    data[b | off[r]] = acc;
                }
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_iteration_skips_masked_bits() {
        let mut seen = Vec::new();
        for_each_base(16, 0b0101, |b| seen.push(b));
        assert_eq!(seen, vec![0b0000, 0b0010, 0b1000, 0b1010]);
    }

    #[test]
    fn classify_detects_structure() {
        let c = |re: f64| Complex::new(re, 0.0);
        let x = [c(0.0), c(1.0), c(1.0), c(0.0)];
        assert!(matches!(Shape::classify(2, &x), Shape::Monomial { .. }));
        let z = [c(1.0), c(0.0), c(0.0), c(-1.0)];
        assert!(matches!(Shape::classify(2, &z), Shape::Diagonal(_)));
        let h = [c(1.0), c(1.0), c(1.0), c(-1.0)];
        assert!(matches!(Shape::classify(2, &h), Shape::Dense(_)));
    }
}
