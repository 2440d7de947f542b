//! Sparse LU through faer, with the symbolic analysis shared across shifts.

use super::{norm_inf, ShiftSign, SolveReport};
use crate::error::{HeomError, Result};
use crate::sparse::CsrMatrix;
use crate::C64;
use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use std::time::Instant;

/// Refinement sweeps after the direct solve.
const REFINE_STEPS: usize = 3;
/// Relative residual below which refinement stops.
const REFINE_TARGET: f64 = 1e-14;

/// Numeric LU of one matrix.
pub struct SparseLu {
    lu: Lu<usize, C64>,
    n: usize,
}

fn csc_parts(a: &CsrMatrix) -> (SymbolicSparseColMat<usize>, Vec<C64>) {
    // rows of Aᵀ are the columns of A
    let t = a.transpose();
    let (indptr, indices, values) = (t.indptr().to_vec(), t.indices().to_vec(), t.values().to_vec());
    (
        SymbolicSparseColMat::new_checked(a.nrows(), a.ncols(), indptr, None, indices),
        values,
    )
}

fn lu_error(e: impl std::fmt::Debug) -> HeomError {
    HeomError::Solver {
        msg: format!("sparse LU failed: {e:?}"),
        residual: f64::INFINITY,
    }
}

impl SparseLu {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(HeomError::Dimension("LU of a non-square matrix".into()));
        }
        let (sym, vals) = csc_parts(a);
        let symbolic = SymbolicLu::try_new(sym.as_ref()).map_err(lu_error)?;
        let mat = SparseColMat::new(sym, vals);
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(lu_error)?;
        Ok(Self { lu, n: a.nrows() })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let mut rhs = faer::Mat::<C64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place_with_conj(faer::Conj::No, rhs.as_mut());
        (0..self.n).map(|i| rhs[(i, 0)]).collect()
    }
}

/// Solves `A x = b` with `lu ≈ A` and a few rounds of iterative refinement.
pub(crate) fn refined_solve(a: &CsrMatrix, shift: C64, lu: &SparseLu, b: &[C64]) -> (Vec<C64>, f64, usize) {
    let bn = norm_inf(b).max(f64::MIN_POSITIVE);
    let residual = |x: &[C64]| -> Vec<C64> {
        let ax = a.mul_vec(x);
        b.iter()
            .zip(ax)
            .zip(x)
            .map(|((bi, axi), xi)| bi - axi - shift * xi)
            .collect()
    };
    let mut x = lu.solve(b);
    let mut r = residual(&x);
    let mut rel = norm_inf(&r) / bn;
    let mut sweeps = 0;
    while sweeps < REFINE_STEPS && rel > REFINE_TARGET && rel.is_finite() {
        let dx = lu.solve(&r);
        let cand: Vec<C64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
        let rc = residual(&cand);
        let relc = norm_inf(&rc) / bn;
        sweeps += 1;
        if !(relc < rel) {
            break;
        }
        x = cand;
        r = rc;
        rel = relc;
    }
    (x, rel, sweeps)
}

/// Factorizes `M + s·iω` for many ω over one symbolic analysis.
#[derive(Clone)]
pub struct ShiftedSolver {
    base: CsrMatrix,
    sym: SymbolicSparseColMat<usize>,
    vals: Vec<C64>,
    diag_pos: Vec<usize>,
    symbolic: SymbolicLu<usize>,
}

impl ShiftedSolver {
    pub fn new(m: &CsrMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(HeomError::Dimension("shifted solve on a non-square matrix".into()));
        }
        let base = m.with_full_diagonal();
        let t = base.transpose();
        let diag_pos = (0..base.nrows())
            .map(|c| t.find(c, c).expect("diagonal stored"))
            .collect();
        let (sym, vals) = csc_parts(&base);
        let symbolic = SymbolicLu::try_new(sym.as_ref()).map_err(lu_error)?;
        Ok(Self {
            base,
            sym,
            vals,
            diag_pos,
            symbolic,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    /// LU of `M + shift·I`.
    pub fn factor(&self, shift: C64) -> Result<SparseLu> {
        let mut vals = self.vals.clone();
        for &p in &self.diag_pos {
            vals[p] += shift;
        }
        let mat = faer::sparse::SparseColMatRef::new(self.sym.as_ref(), &vals);
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat).map_err(lu_error)?;
        Ok(SparseLu { lu, n: self.dim() })
    }

    /// Solves `(M + sign·iω) x = b`.
    pub fn solve(&self, omega: f64, sign: ShiftSign, b: &[C64]) -> Result<(Vec<C64>, SolveReport)> {
        if b.len() != self.dim() {
            return Err(HeomError::Dimension(format!(
                "right-hand side of length {} for size {}",
                b.len(),
                self.dim()
            )));
        }
        let started = Instant::now();
        let shift = C64::new(0.0, sign.value() * omega);
        let lu = self.factor(shift)?;
        let (x, rel, sweeps) = refined_solve(&self.base, shift, &lu, b);
        if !rel.is_finite() {
            return Err(HeomError::Solver {
                msg: format!("shifted system singular at omega = {omega}"),
                residual: rel,
            });
        }
        Ok((x, SolveReport::new("sparse-lu", sweeps, rel, started)))
    }

    /// Solves several right-hand sides with one factorization.
    pub fn solve_many(&self, shift: C64, rhs: &[&[C64]]) -> Result<Vec<(Vec<C64>, f64)>> {
        let lu = self.factor(shift)?;
        Ok(rhs
            .iter()
            .map(|b| {
                let (x, rel, _) = refined_solve(&self.base, shift, &lu, b);
                (x, rel)
            })
            .collect())
    }
}
