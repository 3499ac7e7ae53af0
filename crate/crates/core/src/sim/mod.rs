//! State representations and primitive evolution.

mod kernel;
pub mod linalg;
pub mod matrix;
pub mod pauli;
pub mod state;

use num_complex::Complex;

pub use matrix::Matrix;
pub use pauli::{Pauli, PauliMasks, PauliString};
pub use state::{
    Basis, BoundUnitary, QuantumState, StateKind, DENSITY_WIDTH_CAP, STATEVECTOR_WIDTH_CAP,
};

use crate::Scalar;

fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::of(re), T::of(im))
}

pub fn hadamard<T: Scalar>() -> Matrix<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_f64(2, &[(s, 0.0), (s, 0.0), (s, 0.0), (-s, 0.0)])
}

pub fn pauli_matrix<T: Scalar>(p: Pauli) -> Matrix<T> {
    match p {
        Pauli::I => Matrix::identity(2),
        Pauli::X => Matrix::from_f64(2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]),
        Pauli::Y => Matrix::from_f64(2, &[(0.0, 0.0), (0.0, -1.0), (0.0, 1.0), (0.0, 0.0)]),
        Pauli::Z => Matrix::from_f64(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]),
    }
}

/// `exp(−iθX/2)`.
pub fn rx<T: Scalar>(theta: f64) -> Matrix<T> {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Matrix::from_rows(2, vec![c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)])
}

/// `exp(−iθY/2)`.
pub fn ry<T: Scalar>(theta: f64) -> Matrix<T> {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    Matrix::from_rows(2, vec![c(co, 0.0), c(-si, 0.0), c(si, 0.0), c(co, 0.0)])
}

/// `exp(−iθZ/2)`.
pub fn rz<T: Scalar>(theta: f64) -> Matrix<T> {
    let h = theta / 2.0;
    Matrix::diagonal(&[c(h.cos(), -h.sin()), c(h.cos(), h.sin())])
}

/// `exp(−iθ Z⊗Z/2)`.
pub fn rzz<T: Scalar>(theta: f64) -> Matrix<T> {
    let h = theta / 2.0;
    let (even, odd) = (c(h.cos(), -h.sin()), c(h.cos(), h.sin()));
    Matrix::diagonal(&[even, odd, odd, even])
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ u` with the control on the first target.
///
/// The returned matrix acts on `[control, target…]`, control least significant.
pub fn controlled<T: Scalar>(u: &Matrix<T>) -> Matrix<T> {
    let du = u.dim();
    let d = 2 * du;
    let mut m = Matrix::zeros(d);
    for r in 0..du {
        m[(r << 1, r << 1)] = c(1.0, 0.0);
        for col in 0..du {
            m[((r << 1) | 1, (col << 1) | 1)] = u[(r, col)];
        }
    }
    m
}

/// Three-qubit Toffoli on `[c1, c2, target]`.
pub fn toffoli<T: Scalar>() -> Matrix<T> {
    let mut m = Matrix::zeros(8);
    for x in 0..8usize {
        let y = if x & 0b011 == 0b011 { x ^ 0b100 } else { x };
        m[(y, x)] = c(1.0, 0.0);
    }
    m
}

/// Controlled swap on `[control, t1, t2]`.
pub fn cswap<T: Scalar>() -> Matrix<T> {
    let mut m = Matrix::zeros(8);
    for x in 0..8usize {
        let y = if x & 1 == 1 {
            let (a, b) = (x >> 1 & 1, x >> 2 & 1);
            1 | (b << 1) | (a << 2)
        } else {
            x
        };
        m[(y, x)] = c(1.0, 0.0);
    }
    m
}
