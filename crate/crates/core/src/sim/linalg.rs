//! Dense Hermitian linear algebra backed by nalgebra, always in `f64`.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::matrix::Matrix;
use crate::Scalar;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the normalised eigenvector of `values[k]`.
    pub vectors: Vec<Vec<Complex<f64>>>,
}

fn to_na<T: Scalar>(m: &Matrix<T>) -> DMatrix<Complex<f64>> {
    let d = m.dim();
    DMatrix::from_fn(d, d, |r, c| {
        let z = m[(r, c)];
        // symmetrise so rounding noise cannot break the solver's assumptions
        let w = m[(c, r)].conj();
        Complex::new(
            (z.re.as_f64() + w.re.as_f64()) / 2.0,
            (z.im.as_f64() + w.im.as_f64()) / 2.0,
        )
    })
}

pub fn hermitian_eigen<T: Scalar>(m: &Matrix<T>) -> HermitianEigen {
    let eig = to_na(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..m.dim()).collect();
    // stable sort keeps the solver's index order among ties
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    HermitianEigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors: order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().cloned().collect())
            .collect(),
    }
}

/// `exp(−i t H)` for Hermitian `H`.
pub fn hermitian_expm<T: Scalar>(h: &Matrix<T>, t: f64) -> Matrix<T> {
    let d = h.dim();
    let e = hermitian_eigen(h);
    let mut out = Matrix::zeros(d);
    for (lam, v) in e.values.iter().zip(&e.vectors) {
        let ph = Complex::from_polar(1.0, -lam * t);
        for r in 0..d {
            let vr = ph * v[r];
            for c in 0..d {
                let z = vr * v[c].conj();
                out[(r, c)] += Complex::new(T::of(z.re), T::of(z.im));
            }
        }
    }
    out
}

/// `½‖a − b‖₁` for Hermitian `a`, `b`.
pub fn trace_distance<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> f64 {
    let d = a.dim();
    let mut diff = Matrix::<T>::zeros(d);
    for r in 0..d {
        for c in 0..d {
            diff[(r, c)] = a[(r, c)] - b[(r, c)];
        }
    }
    hermitian_eigen(&diff)
        .values
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        / 2.0
}
