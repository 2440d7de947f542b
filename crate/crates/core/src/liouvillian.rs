//! Assembly of the sparse HEOM generator acting on the stacked, vectorized ADOs.

use crate::bath::{BathSpec, Nu, Part};
use crate::error::{HeomError, Result};
use crate::hierarchy::{Direction, ExponentTable, HierarchySpace};
use crate::sparse::CsrMatrix;
use crate::superop::{hermiticity_defect, left_mul, right_mul};
use crate::{Op, C64};
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// System Hamiltonian: a constant part plus scalar-weighted terms.
#[derive(Clone)]
pub struct SystemSpec {
    pub h0: Op,
    pub terms: Vec<(Op, Coefficient)>,
}

impl fmt::Debug for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("h0", &self.h0)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl SystemSpec {
    pub fn constant(h0: Op) -> Result<Self> {
        if h0.nrows() != h0.ncols() {
            return Err(HeomError::Dimension("Hamiltonian is not square".into()));
        }
        let defect = hermiticity_defect(&h0);
        if defect > 1e-12 {
            return Err(HeomError::Parameter(format!(
                "Hamiltonian is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self { h0, terms: Vec::new() })
    }

    /// Adds `f(t)·op` to the Hamiltonian.
    pub fn with_term(mut self, op: Op, f: Coefficient) -> Result<Self> {
        if op.shape() != self.h0.shape() {
            return Err(HeomError::Dimension("time-dependent term has the wrong shape".into()));
        }
        self.terms.push((op, f));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn is_time_dependent(&self) -> bool {
        !self.terms.is_empty()
    }
}

/// `-i(left_mul(H) - right_mul(H))`.
pub fn liouvillian_of(h: &Op) -> Result<CsrMatrix> {
    left_mul(h)?.add_scaled(-I, &right_mul(h)?, I)
}

/// Dissipator `F ρ F† - ½{F†F, ρ}` as a d²×d² matrix.
pub fn lindblad_dissipator(f: &Op) -> Result<CsrMatrix> {
    let fd = f.adjoint();
    let ff = &fd * f;
    let jump = left_mul(f)?.matmul(&right_mul(&fd)?)?;
    let anti = left_mul(&ff)?.add_scaled(ONE, &right_mul(&ff)?, ONE)?;
    jump.add_scaled(ONE, &anti, C64::new(-0.5, 0.0))
}

/// Sparse HEOM generator of one parity sector.
#[derive(Clone)]
pub struct HeomMatrix {
    data: CsrMatrix,
    parity: Parity,
    space: Arc<HierarchySpace>,
    d: usize,
    td: Vec<(CsrMatrix, Coefficient)>,
}

impl fmt::Debug for HeomMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HeomMatrix")
            .field("dim", &self.dim())
            .field("nnz", &self.data.nnz())
            .field("parity", &self.parity)
            .field("time_dependent", &self.td.len())
            .finish()
    }
}

/// Cached d²×d² triplets of a superoperator.
type Block = Vec<(usize, usize, C64)>;

fn block(m: &CsrMatrix) -> Block {
    m.triplets().collect()
}

struct FermionOps {
    // acting with d^{ν̄}, used when coupling up
    l_bar: Block,
    r_bar: Block,
    // acting with d^{ν}, used when coupling down
    l: Block,
    r: Block,
    eta: C64,
    eta_partner_conj: C64,
}

struct BosonOps {
    l: Block,
    r: Block,
    xi: C64,
    part: Part,
}

fn fermion_ops(baths: &[BathSpec], table: &ExponentTable) -> Result<Vec<FermionOps>> {
    let mut cache: Vec<Option<(Block, Block, Block, Block)>> = vec![None; 2 * baths.len()];
    table
        .fermionic
        .iter()
        .map(|entry| {
            let e = entry.exp;
            let partner = table
                .fermionic
                .iter()
                .find(|o| o.bath == entry.bath && o.exp.h == e.h && o.exp.nu == e.nu.flip())
                .ok_or_else(|| {
                    HeomError::Parameter(format!(
                        "exponent h={} of bath {} has no partner in the opposite nu family",
                        e.h, baths[entry.bath].label
                    ))
                })?;
            let slot = 2 * entry.bath + usize::from(e.nu == Nu::Minus);
            if cache[slot].is_none() {
                let d = &baths[entry.bath].coupling;
                let dag = d.adjoint();
                // d^ν is d† for ν=+ and d for ν=-
                let (op_nu, op_bar) = match e.nu {
                    Nu::Plus => (&dag, d),
                    Nu::Minus => (d, &dag),
                };
                cache[slot] = Some((
                    block(&left_mul(op_bar)?),
                    block(&right_mul(op_bar)?),
                    block(&left_mul(op_nu)?),
                    block(&right_mul(op_nu)?),
                ));
            }
            let (l_bar, r_bar, l, r) = cache[slot].clone().unwrap();
            Ok(FermionOps {
                l_bar,
                r_bar,
                l,
                r,
                eta: e.eta,
                eta_partner_conj: partner.exp.eta.conj(),
            })
        })
        .collect()
}

fn boson_ops(baths: &[BathSpec], table: &ExponentTable) -> Result<Vec<BosonOps>> {
    table
        .bosonic
        .iter()
        .map(|entry| {
            let v = &baths[entry.bath].coupling;
            Ok(BosonOps {
                l: block(&left_mul(v)?),
                r: block(&right_mul(v)?),
                xi: entry.exp.xi,
                part: entry.exp.part,
            })
        })
        .collect()
}

/// Sign of the right-multiplication term for an ADO at fermionic level `n`.
fn ps_sign(parity: Parity, n: usize) -> f64 {
    let alt = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    match parity {
        Parity::Even => -alt,
        Parity::Odd => alt,
    }
}

/// Assembles the generator.
pub fn build_heomls(
    system: &SystemSpec,
    baths: &[BathSpec],
    space: Arc<HierarchySpace>,
    parity: Parity,
) -> Result<HeomMatrix> {
    let d = system.dim();
    for b in baths {
        b.validate()?;
        if b.dim() != d {
            return Err(HeomError::Dimension(format!(
                "coupling operator of bath {} is {}x{}, system is {d}x{d}",
                b.label,
                b.dim(),
                b.dim()
            )));
        }
    }
    let table = ExponentTable::from_baths(baths)?;
    if &table != space.table() {
        return Err(HeomError::Usage(
            "hierarchy space was built from different exponents".into(),
        ));
    }
    if parity == Parity::Odd && table.k_f() == 0 {
        return Err(HeomError::Usage("odd parity needs at least one fermionic bath".into()));
    }
    let fops = fermion_ops(baths, &table)?;
    let bops = boson_ops(baths, &table)?;
    let lsys = block(&liouvillian_of(&system.h0)?);
    let par = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let d2 = d * d;
    let n_ado = space.len();

    let rows: Vec<Vec<(usize, C64)>> = (0..n_ado)
        .into_par_iter()
        .flat_map_iter(|a| {
            let key = &space.keys()[a];
            let n = key.n();
            let mut trip: Vec<(usize, usize, C64)> = Vec::new();
            // explicit zero keeps the diagonal in the pattern
            for k in 0..d2 {
                trip.push((k, a * d2 + k, ZERO));
            }
            let mut push = |col_block: usize, blk: &Block, coef: C64| {
                if coef != ZERO {
                    for &(r, c, v) in blk {
                        trip.push((r, col_block * d2 + c, coef * v));
                    }
                }
            };
            // diagonal block
            let decay: C64 = key.j.iter().map(|&i| table.bosonic[i as usize].exp.chi).sum::<C64>()
                + key
                    .q
                    .iter()
                    .map(|&i| table.fermionic[i as usize].exp.gamma)
                    .sum::<C64>();
            push(a, &lsys, ONE);
            let diag: Block = (0..d2).map(|k| (k, k, ONE)).collect();
            push(a, &diag, -decay);
            for nb in space.neighbors(a) {
                let s = nb.factor as f64;
                match nb.dir {
                    Direction::UpF => {
                        let f = &fops[nb.id as usize];
                        let ps = ps_sign(parity, n + 1);
                        push(nb.flat, &f.l_bar, -I * s * par);
                        push(nb.flat, &f.r_bar, I * s * par * ps);
                    }
                    Direction::DownF => {
                        let f = &fops[nb.id as usize];
                        let ps = ps_sign(parity, n - 1);
                        push(nb.flat, &f.l, -I * s * par * f.eta);
                        push(nb.flat, &f.r, -I * s * par * ps * f.eta_partner_conj);
                    }
                    Direction::UpB => {
                        let b = &bops[nb.id as usize];
                        push(nb.flat, &b.l, -I);
                        push(nb.flat, &b.r, I);
                    }
                    Direction::DownB => {
                        let b = &bops[nb.id as usize];
                        let (cl, cr) = match b.part {
                            Part::Real => (b.xi, -b.xi),
                            Part::Imag => (I * b.xi, I * b.xi),
                            Part::Combined => (b.xi, -b.xi.conj()),
                        };
                        push(nb.flat, &b.l, -I * s * cl);
                        push(nb.flat, &b.r, -I * s * cr);
                    }
                }
            }
            // stable sort keeps the summation order fixed
            trip.sort_by_key(|t| (t.0, t.1));
            let mut out: Vec<Vec<(usize, C64)>> = vec![Vec::new(); d2];
            for (r, c, v) in trip {
                let row = &mut out[r];
                match row.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => row.push((c, v)),
                }
            }
            out
        })
        .collect();
    let data = CsrMatrix::from_rows(n_ado * d2, n_ado * d2, rows);
    let td = system
        .terms
        .iter()
        .map(|(op, f)| Ok((liouvillian_of(op)?, f.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(HeomMatrix {
        data,
        parity,
        space,
        d,
        td,
    })
}

impl HeomMatrix {
    pub fn data(&self) -> &CsrMatrix {
        &self.data
    }
    pub fn parity(&self) -> Parity {
        self.parity
    }
    pub fn space(&self) -> &Arc<HierarchySpace> {
        &self.space
    }
    pub fn system_dim(&self) -> usize {
        self.d
    }
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }
    pub fn n_ados(&self) -> usize {
        self.space.len()
    }
    pub fn is_time_dependent(&self) -> bool {
        !self.td.is_empty()
    }

    /// Adds a Lindblad dissipator with jump operator `f` to every diagonal block.
    pub fn add_lindblad(&self, f: &Op) -> Result<HeomMatrix> {
        if f.nrows() != self.d || f.ncols() != self.d {
            return Err(HeomError::Dimension(format!("jump operator must be {0}x{0}", self.d)));
        }
        let blk = lindblad_dissipator(f)?;
        let full = block_diagonal(&blk, self.n_ados());
        let mut out = self.clone();
        out.data = self.data.add_scaled(ONE, &full, ONE)?;
        Ok(out)
    }

    /// `M(t)·x`.
    pub fn apply(&self, x: &[C64], t: f64) -> Vec<C64> {
        let mut y = vec![ZERO; x.len()];
        self.apply_into(x, t, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[C64], t: f64, y: &mut [C64]) {
        self.data.mul_vec_into(x, y);
        let d2 = self.d * self.d;
        for (blk, f) in &self.td {
            let w = f(t);
            if w == 0.0 {
                continue;
            }
            let apply_block = |(xb, yb): (&[C64], &mut [C64])| {
                for r in 0..d2 {
                    let mut acc = ZERO;
                    for (c, v) in blk.row(r) {
                        acc += v * xb[c];
                    }
                    yb[r] += w * acc;
                }
            };
            if self.n_ados() > 256 {
                x.par_chunks(d2).zip(y.par_chunks_mut(d2)).for_each(apply_block);
            } else {
                x.chunks(d2).zip(y.chunks_mut(d2)).for_each(apply_block);
            }
        }
    }

    /// Constant part with `s` added to the diagonal.
    pub fn shifted(&self, s: C64) -> Result<CsrMatrix> {
        let mut m = self.data.clone();
        m.shift_diagonal(s)?;
        Ok(m)
    }

    /// Dense copy of the constant part, for small checks.
    pub fn to_dense(&self) -> Op {
        self.data.to_dense()
    }
}

/// `I_n ⊗ blk`.
pub fn block_diagonal(blk: &CsrMatrix, n: usize) -> CsrMatrix {
    let b = blk.nrows();
    let rows = (0..n * b)
        .map(|r| {
            let off = (r / b) * b;
            blk.row(r % b).map(|(c, v)| (off + c, v)).collect()
        })
        .collect();
    CsrMatrix::from_rows(n * b, n * b, rows)
}

/// Jump operators of a thermal two-level damping model, used by the tests and oracles.
pub fn thermal_jumps(lowering: &Op, rate: f64, n_th: f64) -> (Op, Op) {
    (
        lowering * C64::new((rate * (n_th + 1.0)).sqrt(), 0.0),
        lowering.adjoint() * C64::new((rate * n_th).sqrt(), 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::lorentzian_pade_fermion;
    use crate::hierarchy::{enumerate_space, Truncation};
    use crate::superop::vectorize;
    use nalgebra::DMatrix;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn space(baths: &[BathSpec], m: usize, n: usize) -> Arc<HierarchySpace> {
        Arc::new(enumerate_space(ExponentTable::from_baths(baths).unwrap(), Truncation::new(m, n, 0.0)).unwrap())
    }

    fn sigma_z() -> Op {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]))
    }

    fn lowering() -> Op {
        DMatrix::from_fn(2, 2, |r, cc| if r == 0 && cc == 1 { c(1.0) } else { ZERO })
    }

    #[test]
    fn bare_liouvillian() {
        let h = sigma_z() * c(0.7);
        let sys = SystemSpec::constant(h.clone()).unwrap();
        let m = build_heomls(&sys, &[], space(&[], 0, 0), Parity::Even).unwrap();
        let want = Op::identity(2, 2).kronecker(&h) - h.transpose().kronecker(&Op::identity(2, 2));
        assert!((m.to_dense() - want * (-I)).norm() < 1e-15);
    }

    #[test]
    fn odd_needs_fermions() {
        let sys = SystemSpec::constant(sigma_z()).unwrap();
        assert!(matches!(
            build_heomls(&sys, &[], space(&[], 0, 0), Parity::Odd),
            Err(HeomError::Usage(_))
        ));
    }

    #[test]
    fn trace_preserved_at_root() {
        let bath = BathSpec::fermionic(
            "L",
            "d",
            lowering(),
            lorentzian_pade_fermion(1.0, 5.0, 0.5, 1.0, 3).unwrap(),
        )
        .unwrap();
        let baths = vec![bath];
        let sys = SystemSpec::constant(sigma_z()).unwrap();
        let m = build_heomls(&sys, &baths, space(&baths, 0, 2), Parity::Even).unwrap();
        let x: Vec<C64> = (0..m.dim())
            .map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let y = m.apply(&x, 0.0);
        let tr = y[0] + y[3];
        assert!(tr.norm() < 1e-12, "{tr}");
    }

    #[test]
    fn lindblad_zero_and_decay_generator() {
        let sys = SystemSpec::constant(Op::zeros(2, 2)).unwrap();
        let m = build_heomls(&sys, &[], space(&[], 0, 0), Parity::Even).unwrap();
        assert_eq!(m.add_lindblad(&Op::zeros(2, 2)).unwrap().to_dense(), m.to_dense());
        let g: f64 = 0.3;
        let l = m.add_lindblad(&(lowering() * c(g.sqrt()))).unwrap();
        // excited population at index (1,1)
        let rho = DMatrix::from_fn(2, 2, |r, cc| if r == 1 && cc == 1 { c(1.0) } else { ZERO });
        let dr = l.apply(&vectorize(&rho), 0.0);
        assert!((dr[3] - c(-g)).norm() < 1e-15);
        assert!((dr[0] - c(g)).norm() < 1e-15);
        assert!(l.add_lindblad(&Op::zeros(3, 3)).is_err());
    }

    #[test]
    fn unit_coefficient_matches_constant() {
        let h0 = sigma_z() * c(0.5);
        let h1 = DMatrix::from_fn(2, 2, |r, cc| if r != cc { c(0.2) } else { ZERO });
        let td = SystemSpec::constant(h0.clone())
            .unwrap()
            .with_term(h1.clone(), Arc::new(|_| 1.0))
            .unwrap();
        let cst = SystemSpec::constant(&h0 + &h1).unwrap();
        let s = space(&[], 0, 0);
        let a = build_heomls(&td, &[], s.clone(), Parity::Even).unwrap();
        let b = build_heomls(&cst, &[], s, Parity::Even).unwrap();
        let x = vec![c(0.3), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.7)];
        for (p, q) in a.apply(&x, 1.3).iter().zip(b.apply(&x, 0.0)) {
            assert!((p - q).norm() < 1e-15);
        }
    }
}
