//! Brute-force generator over ordered exponent vectors, built from dense
//! Kronecker products. Used only to cross-check `build_heomls` on small spaces.

use crate::bath::{BathSpec, Exponents, Nu, Part};
use crate::error::{HeomError, Result};
use crate::hierarchy::AdoKey;
use crate::liouvillian::Parity;
use crate::{Op, C64};
use std::collections::BTreeMap;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy)]
struct FermiTerm {
    bath: usize,
    eta: C64,
    nu: Nu,
    h: usize,
}

#[derive(Clone, Copy)]
struct BoseTerm {
    bath: usize,
    xi: C64,
    part: Part,
    chi: C64,
}

/// Generator as a map from (row, col) in the oracle's own key order.
pub struct OracleGenerator {
    pub keys: Vec<AdoKey>,
    pub d: usize,
    pub entries: BTreeMap<(usize, usize), C64>,
}

fn lmul(a: &Op) -> Op {
    Op::identity(a.nrows(), a.nrows()).kronecker(a)
}

fn rmul(b: &Op) -> Op {
    b.transpose().kronecker(&Op::identity(b.nrows(), b.nrows()))
}

/// All sorted multisets of `0..k` of size ≤ `max`.
fn multisets(k: usize, max: usize) -> Vec<Vec<u16>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..max {
        let mut next = Vec::new();
        for v in &frontier {
            let start = v.last().copied().unwrap_or(0);
            for id in start..k as u16 {
                let mut w: Vec<u16> = v.clone();
                w.push(id);
                next.push(w);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// All strictly increasing subsets of `0..k` of size ≤ `max`.
fn subsets(k: usize, max: usize) -> Vec<Vec<u16>> {
    multisets(k, max)
        .into_iter()
        .filter(|v| v.windows(2).all(|w| w[0] < w[1]))
        .collect()
}

/// Sorts an ordered vector, returning the parity of the permutation.
fn sort_with_sign(v: &[u16]) -> (Vec<u16>, f64) {
    let mut w = v.to_vec();
    let mut sign = 1.0;
    // bubble sort counts transpositions directly
    for i in 0..w.len() {
        for j in 0..w.len() - 1 - i {
            if w[j] > w[j + 1] {
                w.swap(j, j + 1);
                sign = -sign;
            }
        }
    }
    (w, sign)
}

/// Builds the generator over all ADOs with `m ≤ m_max`, `n ≤ n_max` (no pruning).
pub fn ordered_vector_generator(
    h: &Op,
    baths: &[BathSpec],
    m_max: usize,
    n_max: usize,
    parity: Parity,
) -> Result<OracleGenerator> {
    let d = h.nrows();
    let mut ferm = Vec::new();
    let mut bose = Vec::new();
    for (b, spec) in baths.iter().enumerate() {
        match &spec.exponents {
            Exponents::Fermionic(v) => ferm.extend(v.iter().map(|e| FermiTerm {
                bath: b,
                eta: e.eta,
                nu: e.nu,
                h: e.h,
            })),
            Exponents::Bosonic(v) => bose.extend(v.iter().map(|e| BoseTerm {
                bath: b,
                xi: e.xi,
                part: e.part,
                chi: e.chi,
            })),
        }
    }
    let gammas: Vec<C64> = baths
        .iter()
        .flat_map(|s| match &s.exponents {
            Exponents::Fermionic(v) => v.iter().map(|e| e.gamma).collect::<Vec<_>>(),
            Exponents::Bosonic(_) => vec![],
        })
        .collect();
    let m_max = if bose.is_empty() { 0 } else { m_max };
    let n_max = n_max.min(ferm.len());
    let mut keys = Vec::new();
    for q in subsets(ferm.len(), n_max) {
        for j in multisets(bose.len(), m_max) {
            keys.push(AdoKey::new(&j, &q));
        }
    }
    let pos: BTreeMap<AdoKey, usize> = keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();
    let d2 = d * d;
    let eye = Op::identity(d2, d2);
    let lsys = (lmul(h) - rmul(h)) * (-I);
    let odd = parity == Parity::Odd;
    let par = if odd { -1.0 } else { 1.0 };
    // P_s[ρ d] = ∓(−1)^n ρ d for parity ±
    let ps = |n: usize| -> f64 {
        let alt = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        if odd {
            alt
        } else {
            -alt
        }
    };
    let mut entries: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    let mut add = |row: usize, col: usize, blk: &Op| {
        for c in 0..d2 {
            for r in 0..d2 {
                let v = blk[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    *entries.entry((row * d2 + r, col * d2 + c)).or_default() += v;
                }
            }
        }
    };
    for (a, key) in keys.iter().enumerate() {
        let j: Vec<u16> = key.j.to_vec();
        let q: Vec<u16> = key.q.to_vec();
        let (m, n) = (j.len(), q.len());
        let mut decay = C64::new(0.0, 0.0);
        for &x in &j {
            decay += bose[x as usize].chi;
        }
        for &x in &q {
            decay += gammas[x as usize];
        }
        add(a, a, &(&lsys - &eye * decay));
        // bosonic raising: any exponent may be appended
        if m < m_max {
            for jp in 0..bose.len() as u16 {
                let mut v = j.clone();
                v.push(jp);
                v.sort();
                let Some(&b) = pos.get(&AdoKey::new(&v, &q)) else {
                    continue;
                };
                let vop = &baths[bose[jp as usize].bath].coupling;
                add(a, b, &((lmul(vop) - rmul(vop)) * (-I)));
            }
        }
        // bosonic lowering: one term per position r
        for r in 0..m {
            let mut v = j.clone();
            let id = v.remove(r);
            let t = bose[id as usize];
            let vop = &baths[t.bath].coupling;
            let (xr, xi) = match t.part {
                Part::Real => (t.xi, C64::new(0.0, 0.0)),
                Part::Imag => (C64::new(0.0, 0.0), t.xi),
                Part::Combined => (C64::new(t.xi.re, 0.0), C64::new(t.xi.im, 0.0)),
            };
            let dop = (lmul(vop) - rmul(vop)) * xr + (lmul(vop) + rmul(vop)) * (I * xi);
            let b = pos[&AdoKey::new(&v, &q)];
            add(a, b, &(dop * (-I)));
        }
        // fermionic raising: q′ becomes the new last entry of the ordered vector
        if n < n_max {
            for qp in 0..ferm.len() as u16 {
                if q.contains(&qp) {
                    continue;
                }
                let mut v = q.clone();
                v.push(qp);
                let (sorted, sign) = sort_with_sign(&v);
                let b = pos[&AdoKey::new(&j, &sorted)];
                let t = ferm[qp as usize];
                let dd = &baths[t.bath].coupling;
                let op_bar = match t.nu {
                    Nu::Plus => dd.clone(),
                    Nu::Minus => dd.adjoint(),
                };
                let blk = (lmul(&op_bar) - rmul(&op_bar) * C64::new(ps(n + 1), 0.0)) * C64::new(par, 0.0);
                add(a, b, &(blk * (-I * sign)));
            }
        }
        // fermionic lowering: remove position w (1-based) with (−1)^{n−w}
        for w in 1..=n {
            let mut v = q.clone();
            let id = v.remove(w - 1);
            let sign = if (n - w) % 2 == 0 { 1.0 } else { -1.0 };
            let b = pos[&AdoKey::new(&j, &v)];
            let t = ferm[id as usize];
            let partner = ferm
                .iter()
                .find(|o| o.bath == t.bath && o.h == t.h && o.nu != t.nu)
                .ok_or_else(|| HeomError::Parameter("fermionic exponent without partner".into()))?;
            let dd = &baths[t.bath].coupling;
            let op_nu = match t.nu {
                Nu::Plus => dd.adjoint(),
                Nu::Minus => dd.clone(),
            };
            let blk = (lmul(&op_nu) * t.eta + rmul(&op_nu) * (partner.eta.conj() * ps(n - 1))) * C64::new(par, 0.0);
            add(a, b, &(blk * (-I * sign)));
        }
    }
    Ok(OracleGenerator { keys, d, entries })
}

/// Entry-wise comparison against an assembled generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorDiff {
    /// Nonzero entries compared.
    pub entries: usize,
    /// Largest `|a − b|`.
    pub max_abs: f64,
    /// Largest `|a − b| / (|a| + |b|)` over entries where either side is nonzero.
    pub max_rel: f64,
    /// ADOs present on one side only.
    pub missing_ados: usize,
}

impl OracleGenerator {
    pub fn compare(&self, m: &crate::liouvillian::HeomMatrix) -> GeneratorDiff {
        let space = m.space();
        let d2 = self.d * self.d;
        let mut missing = space.len().abs_diff(self.keys.len());
        let map: Vec<Option<usize>> = self.keys.iter().map(|k| space.lookup(k)).collect();
        missing += map.iter().filter(|x| x.is_none()).count();
        let to_lib = |i: usize| map[i / d2].map(|f| f * d2 + i % d2);
        let mut ours: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (&(r, c), &v) in &self.entries {
            if let (Some(r), Some(c)) = (to_lib(r), to_lib(c)) {
                ours.insert((r, c), v);
            }
        }
        let mut theirs: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in m.data().triplets() {
            if v != C64::new(0.0, 0.0) {
                theirs.insert((r, c), v);
            }
        }
        let mut keys: Vec<(usize, usize)> = ours.keys().chain(theirs.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        let (mut max_abs, mut max_rel) = (0.0f64, 0.0f64);
        for k in &keys {
            let a = ours.get(k).copied().unwrap_or_default();
            let b = theirs.get(k).copied().unwrap_or_default();
            let diff = (a - b).norm();
            max_abs = max_abs.max(diff);
            max_rel = max_rel.max(diff / (a.norm() + b.norm()));
        }
        GeneratorDiff {
            entries: keys.len(),
            max_abs,
            max_rel,
            missing_ados: missing,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_sign() {
        assert_eq!(sort_with_sign(&[0, 2, 1]), (vec![0, 1, 2], -1.0));
        assert_eq!(sort_with_sign(&[2, 0, 1]), (vec![0, 1, 2], 1.0));
        assert_eq!(subsets(4, 2).len(), 1 + 4 + 6);
        assert_eq!(multisets(3, 2).len(), 1 + 3 + 6);
    }
}
