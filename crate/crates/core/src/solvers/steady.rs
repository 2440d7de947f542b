//! Stationary state under the trace constraint on the root block.

use super::gmres::{gmres, GmresOptions, Ilu0};
use super::lu::{refined_solve, SparseLu};
use super::{norm_inf, AdosVector, SolveReport};
use crate::error::{HeomError, Result};
use crate::liouvillian::{HeomMatrix, Parity};
use crate::superop::diagonal_positions;
use crate::C64;
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Default)]
pub enum LinearMethod {
    #[default]
    Direct,
    Gmres(GmresOptions),
}

pub fn steadystate(m: &HeomMatrix) -> Result<(AdosVector, SolveReport)> {
    steadystate_with(m, &LinearMethod::Direct)
}

/// Solves `M x = 0` with row 0 (element (0,0) of the root block) replaced by `Tr ρ = 1`.
pub fn steadystate_with(m: &HeomMatrix, method: &LinearMethod) -> Result<(AdosVector, SolveReport)> {
    if m.is_time_dependent() {
        return Err(HeomError::Usage(
            "steady state needs a time-independent generator".into(),
        ));
    }
    if m.parity() != Parity::Even {
        return Err(HeomError::Usage("steady state is defined in the even sector".into()));
    }
    let started = Instant::now();
    let d = m.system_dim();
    let trace_row: Vec<(usize, C64)> = diagonal_positions(d).map(|p| (p, C64::new(1.0, 0.0))).collect();
    let a = m.data().replace_row(0, &trace_row).with_full_diagonal();
    let mut b = vec![C64::new(0.0, 0.0); m.dim()];
    b[0] = C64::new(1.0, 0.0);
    let (x, steps, tag) = match method {
        LinearMethod::Direct => {
            let lu = SparseLu::new(&a).map_err(|_| HeomError::Multiplicity)?;
            let (x, rel, sweeps) = refined_solve(&a, C64::new(0.0, 0.0), &lu, &b);
            if !rel.is_finite() || rel > 1e-6 || x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(HeomError::Multiplicity);
            }
            (x, sweeps, "sparse-lu")
        }
        LinearMethod::Gmres(opts) => {
            let pre = Ilu0::new(&a)?;
            let (x, it, _) = gmres(&a, &b, Some(&pre), opts)?;
            (x, it, "gmres+ilu0")
        }
    };
    let mx = m.data().mul_vec(&x);
    let residual = norm_inf(&mx) / norm_inf(&x).max(f64::MIN_POSITIVE);
    let ados = AdosVector::from_data(x, m)?;
    Ok((ados, SolveReport::new(tag, steps, residual, started)))
}
