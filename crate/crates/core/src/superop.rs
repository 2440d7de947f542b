//! Column-stacking vectorization and the left/right multiplication superoperators.
//!
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`; element `(r, c)` of a d×d operator lives at `c·d + r`.

use crate::error::{HeomError, Result};
use crate::sparse::CsrMatrix;
use crate::{Op, C64};
use nalgebra::DMatrix;

pub fn vectorize(rho: &Op) -> Vec<C64> {
    // nalgebra stores column-major, which is exactly column stacking
    rho.as_slice().to_vec()
}

pub fn unvectorize(v: &[C64], d: usize) -> Result<Op> {
    if v.len() != d * d {
        return Err(HeomError::Dimension(format!(
            "vector of length {} is not {d}x{d}",
            v.len()
        )));
    }
    Ok(DMatrix::from_column_slice(d, d, v))
}

fn check_square(a: &Op, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(HeomError::Dimension(format!(
            "{what} is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// `I ⊗ A` as a sparse d²×d² matrix.
pub fn left_mul(a: &Op) -> Result<CsrMatrix> {
    let d = check_square(a, "left factor")?;
    let mut trip = Vec::new();
    for c in 0..d {
        for r in 0..d {
            for k in 0..d {
                let v = a[(r, k)];
                if v != C64::new(0.0, 0.0) {
                    trip.push((c * d + r, c * d + k, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(d * d, d * d, trip)
}

/// `Bᵀ ⊗ I` as a sparse d²×d² matrix.
pub fn right_mul(b: &Op) -> Result<CsrMatrix> {
    let d = check_square(b, "right factor")?;
    let mut trip = Vec::new();
    for c in 0..d {
        for k in 0..d {
            let v = b[(k, c)];
            if v != C64::new(0.0, 0.0) {
                for r in 0..d {
                    trip.push((c * d + r, k * d + r, v));
                }
            }
        }
    }
    CsrMatrix::from_triplets(d * d, d * d, trip)
}

/// Kronecker product of dense operators.
pub fn kron(a: &Op, b: &Op) -> Op {
    a.kronecker(b)
}

/// Largest entry of `A − A†`.
pub fn hermiticity_defect(a: &Op) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(a: &Op, tol: f64) -> bool {
    a.nrows() == a.ncols() && hermiticity_defect(a) <= tol
}

/// Locations of the diagonal elements in a vectorized d×d block.
pub fn diagonal_positions(d: usize) -> impl Iterator<Item = usize> {
    (0..d).map(move |i| i * (d + 1))
}
