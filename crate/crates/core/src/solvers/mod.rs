//! Time evolution, propagators, steady states and shifted linear solves.

mod expm;
mod gmres;
mod lu;
mod ode;
mod steady;

pub use expm::{evolve_expm, expm_sparse, Propagator, DEFAULT_DROP_TOL};
pub use gmres::{gmres, GmresOptions, Ilu0};
pub use lu::{ShiftedSolver, SparseLu};
pub use ode::{evolve_ode, OdeOptions};
pub use steady::{steadystate, steadystate_with, LinearMethod};

use crate::error::{HeomError, Result};
use crate::hierarchy::HierarchySpace;
use crate::liouvillian::{HeomMatrix, Parity};
use crate::superop::{unvectorize, vectorize};
use crate::{Op, C64};
use std::sync::Arc;
use std::time::Instant;

/// Stacked ADO vector of one parity sector.
#[derive(Debug, Clone)]
pub struct AdosVector {
    pub data: Vec<C64>,
    pub space: Arc<HierarchySpace>,
    pub parity: Parity,
    pub d: usize,
}

impl AdosVector {
    /// Separable initial state: root block `rho`, all other blocks zero.
    pub fn from_density(rho: &Op, space: Arc<HierarchySpace>, parity: Parity) -> Result<Self> {
        let d = rho.nrows();
        if rho.ncols() != d {
            return Err(HeomError::Dimension("initial density matrix is not square".into()));
        }
        let mut data = vec![C64::new(0.0, 0.0); space.len() * d * d];
        data[..d * d].copy_from_slice(&vectorize(rho));
        Ok(Self { data, space, parity, d })
    }

    pub fn from_data(data: Vec<C64>, m: &HeomMatrix) -> Result<Self> {
        if data.len() != m.dim() {
            return Err(HeomError::Dimension(format!(
                "vector of length {} for a matrix of size {}",
                data.len(),
                m.dim()
            )));
        }
        Ok(Self {
            data,
            space: m.space().clone(),
            parity: m.parity(),
            d: m.system_dim(),
        })
    }

    pub fn n_ados(&self) -> usize {
        self.space.len()
    }

    pub fn block(&self, flat: usize) -> &[C64] {
        let d2 = self.d * self.d;
        &self.data[flat * d2..(flat + 1) * d2]
    }

    /// Root block as a matrix.
    pub fn root(&self) -> Op {
        unvectorize(self.block(0), self.d).expect("block has d² entries")
    }

    pub fn block_matrix(&self, flat: usize) -> Op {
        unvectorize(self.block(flat), self.d).expect("block has d² entries")
    }

    fn check(&self, m: &HeomMatrix) -> Result<()> {
        if self.data.len() != m.dim() {
            return Err(HeomError::Dimension(format!(
                "ADO vector of length {} does not match generator of size {}",
                self.data.len(),
                m.dim()
            )));
        }
        Ok(())
    }
}

/// What a solver did.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub method: String,
    pub steps: usize,
    pub residual: f64,
    pub wall_time: f64,
}

impl SolveReport {
    pub(crate) fn new(method: &str, steps: usize, residual: f64, started: Instant) -> Self {
        Self {
            method: method.into(),
            steps,
            residual,
            wall_time: started.elapsed().as_secs_f64(),
        }
    }
}

/// Sign of the imaginary shift in `(M ± iω)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Plus,
    Minus,
}

impl ShiftSign {
    pub fn value(self) -> f64 {
        match self {
            ShiftSign::Plus => 1.0,
            ShiftSign::Minus => -1.0,
        }
    }
}

pub(crate) fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `(M + sign·iω) x = b` once. Use [`ShiftedSolver`] to reuse the analysis over many ω.
pub fn shifted_solve(
    m: &HeomMatrix,
    omega: f64,
    sign: ShiftSign,
    b: &[C64],
    method: &LinearMethod,
) -> Result<(Vec<C64>, SolveReport)> {
    if b.len() != m.dim() {
        return Err(HeomError::Dimension(format!(
            "right-hand side of length {} for size {}",
            b.len(),
            m.dim()
        )));
    }
    if m.is_time_dependent() {
        return Err(HeomError::Usage(
            "shifted solves need a time-independent generator".into(),
        ));
    }
    match method {
        LinearMethod::Direct => ShiftedSolver::new(m.data())?.solve(omega, sign, b),
        LinearMethod::Gmres(opts) => {
            let started = Instant::now();
            let a = m.shifted(C64::new(0.0, sign.value() * omega))?;
            let pre = Ilu0::new(&a)?;
            let (x, it, res) = gmres(&a, b, Some(&pre), opts)?;
            Ok((x, SolveReport::new("gmres+ilu0", it, res, started)))
        }
    }
}
