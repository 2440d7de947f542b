//! Scaling-and-squaring Taylor propagator on sparse matrices.

use super::{AdosVector, SolveReport};
use crate::error::{HeomError, Result};
use crate::liouvillian::HeomMatrix;
use crate::sparse::CsrMatrix;
use crate::{Op, C64};
use std::time::Instant;

pub const DEFAULT_DROP_TOL: f64 = 1e-14;
/// Switch to dense storage above this fill fraction.
const DENSE_FILL: f64 = 0.25;
/// Norm bound of the scaled matrix fed to the Taylor series.
const THETA: f64 = 0.5;

#[derive(Debug, Clone)]
pub enum Propagator {
    Sparse(CsrMatrix),
    Dense(Op),
}

impl Propagator {
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        match self {
            Propagator::Sparse(p) => p.mul_vec(x),
            Propagator::Dense(p) => {
                let v = nalgebra::DVector::from_column_slice(x);
                (p * v).as_slice().to_vec()
            }
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Propagator::Sparse(p) => p.nnz(),
            Propagator::Dense(p) => p.len(),
        }
    }

    pub fn to_dense(&self) -> Op {
        match self {
            Propagator::Sparse(p) => p.to_dense(),
            Propagator::Dense(p) => p.clone(),
        }
    }
}

enum Work {
    S(CsrMatrix),
    D(Op),
}

impl Work {
    fn densify_if_full(self, n: usize) -> Work {
        match self {
            Work::S(s) if s.nnz() as f64 > DENSE_FILL * (n * n) as f64 => Work::D(s.to_dense()),
            w => w,
        }
    }
}

/// `exp(A)` by scaling and squaring a truncated Taylor series.
pub fn expm_sparse(a: &CsrMatrix, drop_tol: f64) -> Result<Propagator> {
    if a.nrows() != a.ncols() {
        return Err(HeomError::Dimension("exponential of a non-square matrix".into()));
    }
    let n = a.nrows();
    let norm = a.norm_1();
    let s = if norm > THETA {
        (norm / THETA).log2().ceil() as i32
    } else {
        0
    };
    let mut b = a.clone();
    b.scale(C64::new(0.5f64.powi(s), 0.0));

    let mut sum = Work::S(CsrMatrix::identity(n));
    let mut term = Work::S(CsrMatrix::identity(n));
    let bd = || b.to_dense();
    let mut b_dense: Option<Op> = None;
    for k in 1..=60 {
        let inv = C64::new(1.0 / k as f64, 0.0);
        term = match term {
            Work::S(t) => {
                let mut p = t.matmul(&b)?;
                p.scale(inv);
                p.drop_small(drop_tol);
                Work::S(p)
            }
            Work::D(t) => {
                let bm = b_dense.get_or_insert_with(bd);
                Work::D(&t * &*bm * inv)
            }
        }
        .densify_if_full(n);
        let (tnorm, snorm);
        sum = match (sum, &term) {
            (Work::S(sm), Work::S(t)) => {
                let mut r = sm.add_scaled(C64::new(1.0, 0.0), t, C64::new(1.0, 0.0))?;
                r.drop_small(drop_tol);
                tnorm = t.norm_1();
                snorm = r.norm_1();
                Work::S(r)
            }
            (sm, t) => {
                let sd = match sm {
                    Work::S(x) => x.to_dense(),
                    Work::D(x) => x,
                };
                let td = match t {
                    Work::S(x) => x.to_dense(),
                    Work::D(x) => x.clone(),
                };
                tnorm = dense_norm_1(&td);
                let r = sd + td;
                snorm = dense_norm_1(&r);
                Work::D(r)
            }
        }
        .densify_if_full(n);
        if tnorm <= 1e-17 * snorm {
            break;
        }
    }
    for _ in 0..s {
        sum = match sum {
            Work::S(p) => {
                let mut q = p.matmul(&p)?;
                q.drop_small(drop_tol);
                Work::S(q)
            }
            Work::D(p) => Work::D(&p * &p),
        }
        .densify_if_full(n);
    }
    Ok(match sum {
        Work::S(p) => Propagator::Sparse(p),
        Work::D(p) => Propagator::Dense(p),
    })
}

fn dense_norm_1(m: &Op) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Builds `exp(MΔt)` once and steps through a uniform time list.
pub fn evolve_expm(
    m: &HeomMatrix,
    x0: &AdosVector,
    t_list: &[f64],
    drop_tol: f64,
) -> Result<(Vec<AdosVector>, SolveReport)> {
    x0.check(m)?;
    if m.is_time_dependent() {
        return Err(HeomError::Usage(
            "the propagator method needs a time-independent generator".into(),
        ));
    }
    if t_list.is_empty() {
        return Err(HeomError::Parameter("empty time list".into()));
    }
    let started = Instant::now();
    let mut out = vec![x0.clone()];
    if t_list.len() == 1 {
        return Ok((out, SolveReport::new("expm", 0, 0.0, started)));
    }
    let dt = t_list[1] - t_list[0];
    for (i, w) in t_list.windows(2).enumerate() {
        let step = w[1] - w[0];
        if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt.abs().max(1e-300) * (i + 1) as f64 {
            return Err(HeomError::Parameter(
                "the propagator method needs a uniform, increasing time list".into(),
            ));
        }
    }
    let mut a = m.data().clone();
    a.scale(C64::new(dt, 0.0));
    let p = expm_sparse(&a, drop_tol)?;
    let mut x = x0.data.clone();
    for _ in 1..t_list.len() {
        x = p.apply(&x);
        out.push(AdosVector {
            data: x.clone(),
            ..x0.clone_shell()
        });
    }
    Ok((out, SolveReport::new("expm", t_list.len() - 1, 0.0, started)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_identity() {
        let z = CsrMatrix::zeros(4, 4);
        assert_eq!(
            expm_sparse(&z, DEFAULT_DROP_TOL).unwrap().to_dense(),
            Op::identity(4, 4)
        );
    }

    #[test]
    fn nilpotent_exact() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(0, 2, C64::new(7.5, -1.0))]).unwrap();
        let p = expm_sparse(&m, DEFAULT_DROP_TOL).unwrap().to_dense();
        let mut want = Op::identity(3, 3);
        want[(0, 2)] = C64::new(7.5, -1.0);
        assert_eq!(p, want);
    }

    #[test]
    fn rotation_generator() {
        let w = 3.7;
        let m = CsrMatrix::from_triplets(2, 2, vec![(0, 1, C64::new(w, 0.0)), (1, 0, C64::new(-w, 0.0))]).unwrap();
        let p = expm_sparse(&m, DEFAULT_DROP_TOL).unwrap().to_dense();
        assert!((p[(0, 0)].re - w.cos()).abs() < 1e-13);
        assert!((p[(0, 1)].re - w.sin()).abs() < 1e-13);
    }
}
