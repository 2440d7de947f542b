//! Reduced density, expectation values, spectra and currents.

use crate::bath::{BathSpec, Nu};
use crate::error::{HeomError, Result};
use crate::liouvillian::{HeomMatrix, Parity};
use crate::solvers::{AdosVector, LinearMethod, ShiftedSolver};
use crate::{Op, C64};
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Dos,
    Psd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: SpectrumKind,
    /// Largest relative residual of the shifted solves.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentResult {
    pub bath: String,
    /// Current in e·meV/ħ (e = 1), positive when charge flows from the bath into the system.
    pub value: f64,
    /// Imaginary remainder of the trace sum, zero up to round-off.
    pub imag: f64,
}

pub fn reduced_density(ados: &AdosVector) -> Result<Op> {
    if ados.parity != Parity::Even {
        return Err(HeomError::Usage("the reduced density lives in the even sector".into()));
    }
    Ok(ados.root())
}

/// `Tr[op·ρ]` on the root block.
pub fn expectation(ados: &AdosVector, op: &Op) -> Result<C64> {
    check_op(op, ados.d)?;
    Ok(trace_product(op, ados.block(0), ados.d))
}

fn check_op(op: &Op, d: usize) -> Result<()> {
    if op.nrows() != d || op.ncols() != d {
        return Err(HeomError::Dimension(format!(
            "operator is {}x{}, system is {d}x{d}",
            op.nrows(),
            op.ncols()
        )));
    }
    Ok(())
}

/// `Tr[A·X]` for a column-stacked block `x`.
fn trace_product(a: &Op, x: &[C64], d: usize) -> C64 {
    let mut t = ZERO;
    for c in 0..d {
        for r in 0..d {
            t += a[(c, r)] * x[c * d + r];
        }
    }
    t
}

/// Applies `op·X` to every block.
fn stack_left(op: &Op, data: &[C64], d: usize) -> Vec<C64> {
    let d2 = d * d;
    let mut out = vec![ZERO; data.len()];
    for (xb, yb) in data.chunks(d2).zip(out.chunks_mut(d2)) {
        for c in 0..d {
            for r in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    acc += op[(r, k)] * xb[c * d + k];
                }
                yb[c * d + r] = acc;
            }
        }
    }
    out
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(HeomError::Parameter("empty frequency grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
        return Err(HeomError::Parameter(
            "frequency grid must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

fn same_space(m: &HeomMatrix, ados: &AdosVector) -> Result<()> {
    if !Arc::ptr_eq(m.space(), &ados.space) && m.space().keys() != ados.space.keys() {
        return Err(HeomError::Usage(
            "generator and ADO vector use different hierarchies".into(),
        ));
    }
    if ados.data.len() != m.dim() {
        return Err(HeomError::Dimension("ADO vector does not match the generator".into()));
    }
    Ok(())
}

fn solve_group(
    solver: &ShiftedSolver,
    method: &LinearMethod,
    m: &HeomMatrix,
    shift: C64,
    rhs: &[&[C64]],
) -> Result<Vec<(Vec<C64>, f64)>> {
    match method {
        LinearMethod::Direct => solver.solve_many(shift, rhs),
        LinearMethod::Gmres(o) => {
            let a = m.shifted(shift)?;
            let pre = crate::solvers::Ilu0::new(&a)?;
            rhs.iter()
                .map(|b| {
                    let (x, _, r) = crate::solvers::gmres(&a, b, Some(&pre), o)?;
                    Ok((x, r))
                })
                .collect()
        }
    }
}

/// Density of states `A(ω)` from odd-sector shifted solves around the even steady state.
pub fn dos(
    m_odd: &HeomMatrix,
    ados_ss: &AdosVector,
    d_op: &Op,
    grid: &[f64],
    method: &LinearMethod,
) -> Result<SpectrumResult> {
    if m_odd.parity() != Parity::Odd || ados_ss.parity != Parity::Even {
        return Err(HeomError::Usage(
            "DOS needs an odd-parity generator and an even-parity steady state".into(),
        ));
    }
    check_op(d_op, ados_ss.d)?;
    check_grid(grid)?;
    same_space(m_odd, ados_ss)?;
    let d = ados_ss.d;
    let dd = d_op.adjoint();
    let b_plus = stack_left(&dd, &ados_ss.data, d);
    let b_minus = stack_left(d_op, &ados_ss.data, d);
    let solver = ShiftedSolver::new(m_odd.data())?;
    // (M + iω)x = d†ρ and (M − iω)y = dρ; the factor for +iω at ω also serves −iω at −ω
    let mut shifts: Vec<f64> = grid.iter().flat_map(|&w| [w, -w]).map(|s| s + 0.0).collect();
    shifts.sort_by(f64::total_cmp);
    shifts.dedup();
    let solved: Vec<Vec<(usize, bool, C64, f64)>> = shifts
        .par_iter()
        .map(|&s| {
            let plus: Vec<usize> = grid
                .iter()
                .enumerate()
                .filter(|(_, &w)| w + 0.0 == s)
                .map(|(i, _)| i)
                .collect();
            let minus: Vec<usize> = grid
                .iter()
                .enumerate()
                .filter(|(_, &w)| -w + 0.0 == s)
                .map(|(i, _)| i)
                .collect();
            let mut rhs: Vec<&[C64]> = Vec::new();
            if !plus.is_empty() {
                rhs.push(&b_plus);
            }
            if !minus.is_empty() {
                rhs.push(&b_minus);
            }
            let xs = solve_group(&solver, method, m_odd, C64::new(0.0, s), &rhs)?;
            let mut out = Vec::new();
            let mut it = xs.into_iter();
            if !plus.is_empty() {
                let (x, r) = it.next().unwrap();
                let t = trace_product(d_op, &x[..d * d], d);
                out.extend(plus.iter().map(|&i| (i, true, t, r)));
            }
            if !minus.is_empty() {
                let (x, r) = it.next().unwrap();
                let t = trace_product(&dd, &x[..d * d], d);
                out.extend(minus.iter().map(|&i| (i, false, t, r)));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut vals = vec![(0.0, 0.0); grid.len()];
    let mut acc = vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); grid.len()];
    for (i, is_plus, t, r) in solved.into_iter().flatten() {
        if is_plus {
            acc[i].0 = t;
        } else {
            acc[i].1 = t;
        }
        vals[i].1 = f64::max(vals[i].1, r);
    }
    for (v, (p, m)) in vals.iter_mut().zip(acc) {
        // sum in a fixed order so the result does not depend on the grouping
        v.0 = -(p + m).re / PI;
    }
    Ok(SpectrumResult {
        omega: grid.to_vec(),
        values: vals.iter().map(|v| v.0).collect(),
        kind: SpectrumKind::Dos,
        max_residual: vals.iter().map(|v| v.1).fold(0.0, f64::max),
    })
}

/// Power spectral density `S(ω)` of `a_op` from even-sector shifted solves.
pub fn psd(
    m_even: &HeomMatrix,
    ados_ss: &AdosVector,
    a_op: &Op,
    grid: &[f64],
    method: &LinearMethod,
) -> Result<SpectrumResult> {
    if m_even.parity() != Parity::Even || ados_ss.parity != Parity::Even {
        return Err(HeomError::Usage(
            "PSD needs the even-parity generator and steady state".into(),
        ));
    }
    check_op(a_op, ados_ss.d)?;
    check_grid(grid)?;
    same_space(m_even, ados_ss)?;
    let d = ados_ss.d;
    let ad = a_op.adjoint();
    let b = stack_left(a_op, &ados_ss.data, d);
    let zero_rhs = b.iter().all(|z| *z == ZERO);
    let solver = if zero_rhs {
        None
    } else {
        Some(ShiftedSolver::new(m_even.data())?)
    };
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&w| {
            let Some(solver) = &solver else { return Ok((0.0, 0.0)) };
            let (x, r) = solve_group(solver, method, m_even, C64::new(0.0, -w), &[&b])?
                .pop()
                .unwrap();
            Ok((-trace_product(&ad, &x[..d * d], d).re / PI, r))
        })
        .collect::<Result<_>>()?;
    Ok(SpectrumResult {
        omega: grid.to_vec(),
        values: vals.iter().map(|v| v.0).collect(),
        kind: SpectrumKind::Psd,
        max_residual: vals.iter().map(|v| v.1).fold(0.0, f64::max),
    })
}

/// Current of bath `label` from the level-one fermionic ADOs.
pub fn current(ados: &AdosVector, label: &str, baths: &[BathSpec]) -> Result<CurrentResult> {
    if ados.parity != Parity::Even {
        return Err(HeomError::Usage("current is evaluated on even-sector ADOs".into()));
    }
    if !baths.iter().any(|b| b.label == label) {
        return Err(HeomError::NotFound(format!("no bath labelled {label:?}")));
    }
    let table = ados.space.table();
    let d = ados.d;
    let mut total = ZERO;
    for (flat, id) in ados.space.first_level_fermionic() {
        let entry = &table.fermionic[id as usize];
        let bath = baths
            .get(entry.bath)
            .ok_or_else(|| HeomError::Usage("bath list does not match the hierarchy".into()))?;
        if bath.label != label {
            continue;
        }
        // d^{ν̄}: d for ν=+, d† for ν=-
        let (op, sign) = match entry.exp.nu {
            Nu::Plus => (bath.coupling.clone(), 1.0),
            Nu::Minus => (bath.coupling.adjoint(), -1.0),
        };
        total += sign * trace_product(&op, ados.block(flat), d);
    }
    let i_alpha = C64::new(0.0, 1.0) * total;
    if !(i_alpha.re.is_finite()) {
        return Err(HeomError::Solver {
            msg: "non-finite current".into(),
            residual: f64::NAN,
        });
    }
    Ok(CurrentResult {
        bath: label.into(),
        value: i_alpha.re,
        imag: i_alpha.im,
    })
}

/// Differential conductance on a uniform bias grid: second-order central
/// differences inside, second-order one-sided stencils at the ends.
pub fn conductance(bias: &[f64], currents: &[f64]) -> Result<Vec<(f64, f64)>> {
    if bias.len() != currents.len() {
        return Err(HeomError::Dimension("bias and current lists differ in length".into()));
    }
    if bias.len() < 3 {
        return Err(HeomError::Parameter("conductance needs at least 3 bias points".into()));
    }
    let h = bias[1] - bias[0];
    if !(h > 0.0) {
        return Err(HeomError::Parameter("bias grid must be increasing".into()));
    }
    for (i, w) in bias.windows(2).enumerate() {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(bias[i].abs()) {
            return Err(HeomError::Parameter("bias grid must be uniform".into()));
        }
    }
    let n = bias.len();
    let f = currents;
    Ok((0..n)
        .map(|i| {
            let g = if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            };
            (bias[i], g)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_current_gives_constant_conductance() {
        let phi: Vec<f64> = (0..9).map(|i| -2.0 + 0.5 * i as f64).collect();
        let cur: Vec<f64> = phi.iter().map(|p| 0.37 * p).collect();
        for (_, g) in conductance(&phi, &cur).unwrap() {
            assert!((g - 0.37).abs() < 1e-14);
        }
    }

    #[test]
    fn conductance_second_order() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let phi: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let cur: Vec<f64> = phi.iter().map(|p| p.sin()).collect();
            conductance(&phi, &cur)
                .unwrap()
                .iter()
                .map(|(p, g)| (g - p.cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(11) / err(21)).log2();
        assert!((order - 2.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn conductance_rejects_bad_grids() {
        assert!(conductance(&[0.0, 1.0], &[0.0, 1.0]).is_err());
        assert!(conductance(&[0.0, 1.0, 3.0], &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn trace_product_matches_dense() {
        let a = Op::from_fn(3, 3, |r, c| C64::new(r as f64 + 0.5, c as f64 - 1.0));
        let x = Op::from_fn(3, 3, |r, c| C64::new((r * c) as f64, r as f64));
        let want = (&a * &x).trace();
        let got = trace_product(&a, x.as_slice(), 3);
        assert!((want - got).norm() < 1e-12);
        let y = stack_left(&a, x.as_slice(), 3);
        let want = &a * &x;
        assert!(y.iter().zip(want.as_slice()).all(|(p, q)| (p - q).norm() < 1e-12));
    }
}
