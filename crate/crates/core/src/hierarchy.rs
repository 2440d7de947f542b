//! Truncated, importance-filtered ADO index space.
//!
//! A key is a bosonic multiset `j` (sorted, repeats allowed) and a fermionic set `q`
//! (strictly ascending, Pauli exclusion). Ids are global over all baths of one flavor.

use crate::bath::{BathSpec, BosonicExponent, Exponents, FermionicExponent};
use crate::error::{HeomError, Result};
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;
use std::fmt;

pub type IdList = SmallVec<[u16; 8]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct AdoKey {
    pub j: IdList,
    pub q: IdList,
}

impl AdoKey {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn new(j: &[u16], q: &[u16]) -> Self {
        Self {
            j: j.iter().copied().collect(),
            q: q.iter().copied().collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.j.len()
    }
    pub fn n(&self) -> usize {
        self.q.len()
    }
    pub fn level(&self) -> usize {
        self.m() + self.n()
    }

    fn well_formed(&self) -> bool {
        self.j.windows(2).all(|w| w[0] <= w[1]) && self.q.windows(2).all(|w| w[0] < w[1])
    }
}

impl fmt::Display for AdoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "j={:?} q={:?}", self.j.as_slice(), self.q.as_slice())
    }
}

/// A key together with its flat position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdoIndex {
    pub key: AdoKey,
    pub flat: usize,
}

impl AdoIndex {
    pub fn m(&self) -> usize {
        self.key.m()
    }
    pub fn n(&self) -> usize {
        self.key.n()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FermionicEntry {
    /// Index of the owning `BathSpec`.
    pub bath: usize,
    pub exp: FermionicExponent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BosonicEntry {
    pub bath: usize,
    pub exp: BosonicExponent,
}

/// Global exponent ids, in bath order then exponent order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExponentTable {
    pub fermionic: Vec<FermionicEntry>,
    pub bosonic: Vec<BosonicEntry>,
}

impl ExponentTable {
    pub fn from_baths(baths: &[BathSpec]) -> Result<Self> {
        let mut t = Self::default();
        for (b, spec) in baths.iter().enumerate() {
            match &spec.exponents {
                Exponents::Fermionic(v) => t.fermionic.extend(v.iter().map(|&exp| FermionicEntry { bath: b, exp })),
                Exponents::Bosonic(v) => t.bosonic.extend(v.iter().map(|&exp| BosonicEntry { bath: b, exp })),
            }
        }
        if t.fermionic.len() > u16::MAX as usize || t.bosonic.len() > u16::MAX as usize {
            return Err(HeomError::Parameter("more than 65535 exponents of one flavor".into()));
        }
        Ok(t)
    }

    /// Table with unit coefficients and rates, for counting experiments.
    pub fn uniform(k_b: usize, k_f: usize) -> Self {
        use crate::bath::{Nu, Part};
        use crate::C64;
        let one = C64::new(1.0, 0.0);
        Self {
            fermionic: (0..k_f)
                .map(|i| FermionicEntry {
                    bath: 0,
                    exp: FermionicExponent {
                        eta: one,
                        gamma: one,
                        nu: if i % 2 == 0 { Nu::Plus } else { Nu::Minus },
                        h: 1,
                    },
                })
                .collect(),
            bosonic: (0..k_b)
                .map(|_| BosonicEntry {
                    bath: 0,
                    exp: BosonicExponent {
                        xi: one,
                        chi: one,
                        part: Part::Real,
                        l: 1,
                    },
                })
                .collect(),
        }
    }

    pub fn k_b(&self) -> usize {
        self.bosonic.len()
    }
    pub fn k_f(&self) -> usize {
        self.fermionic.len()
    }

    fn boson_weight(&self, id: u16) -> (f64, f64) {
        let e = &self.bosonic[id as usize].exp;
        (e.xi.norm(), e.chi.re)
    }

    fn fermion_weight(&self, id: u16) -> (f64, f64) {
        let e = &self.fermionic[id as usize].exp;
        (e.eta.norm(), e.gamma.re)
    }
}

/// Importance of one ADO; ids are taken in ascending order for the cumulative sums.
pub fn importance(key: &AdoKey, table: &ExponentTable) -> f64 {
    let mut val = 1.0;
    let mut cum = 0.0;
    for &id in &key.j {
        let (c, r) = table.boson_weight(id);
        cum += r;
        val *= c / r / cum;
    }
    let mut cum = 0.0;
    for &id in &key.q {
        let (c, r) = table.fermion_weight(id);
        cum += r;
        val *= c / r / cum;
    }
    val
}

fn always_kept(m: usize, n: usize) -> bool {
    m <= 1 && n <= 1
}

fn binom(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Size of the unfiltered space.
pub fn closed_form_count(k_b: usize, k_f: usize, m_max: usize, n_max: usize) -> u128 {
    let fs: u128 = (0..=n_max as u128).map(|n| binom(k_f as u128, n)).sum();
    let bs: u128 = if k_b == 0 {
        1
    } else {
        (0..=m_max as u128).map(|m| binom(k_b as u128 + m - 1, m)).sum()
    };
    fs * bs
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub m_max: usize,
    pub n_max: usize,
    pub i_th: f64,
}

impl Truncation {
    pub fn new(m_max: usize, n_max: usize, i_th: f64) -> Self {
        Self { m_max, n_max, i_th }
    }
}

/// Bytes charged per stored ADO against the memory budget.
pub const BYTES_PER_ADO: usize = 160;
/// Default budget for materialized spaces.
pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

#[derive(Debug, Clone)]
pub struct HierarchySpace {
    ados: Vec<AdoKey>,
    lookup: FxHashMap<AdoKey, u32>,
    table: ExponentTable,
    trunc: Truncation,
    level_starts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    UpB,
    DownB,
    UpF,
    DownF,
}

/// One coupling of an ADO to a neighbor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub flat: usize,
    pub dir: Direction,
    /// Exponent id inserted or removed.
    pub id: u16,
    /// DOWN_F: 1-based position w of the removed id in ascending order. Otherwise 0.
    pub position: usize,
    /// UP_F/DOWN_F: permutation sign. DOWN_B: multiplicity. UP_B: 1.
    pub factor: i32,
}

fn multisets(k: usize, m: usize) -> Vec<IdList> {
    let mut out = Vec::new();
    let mut cur = IdList::new();
    fn rec(start: usize, k: usize, left: usize, cur: &mut IdList, out: &mut Vec<IdList>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for id in start..k {
            cur.push(id as u16);
            rec(id, k, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, k, m, &mut cur, &mut out);
    out
}

fn subsets(k: usize, n: usize) -> Vec<IdList> {
    let mut out = Vec::new();
    let mut cur = IdList::new();
    fn rec(start: usize, k: usize, left: usize, cur: &mut IdList, out: &mut Vec<IdList>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for id in start..k {
            cur.push(id as u16);
            rec(id + 1, k, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, k, n, &mut cur, &mut out);
    out
}

/// Builds the space with the default memory budget.
pub fn enumerate_space(table: ExponentTable, trunc: Truncation) -> Result<HierarchySpace> {
    enumerate_space_with_budget(table, trunc, DEFAULT_MEMORY_BUDGET)
}

pub fn enumerate_space_with_budget(table: ExponentTable, trunc: Truncation, budget: usize) -> Result<HierarchySpace> {
    if !(trunc.i_th >= 0.0) {
        return Err(HeomError::Parameter(format!(
            "importance threshold must be >= 0, got {}",
            trunc.i_th
        )));
    }
    let k_b = table.k_b();
    let k_f = table.k_f();
    let m_max = if k_b == 0 { 0 } else { trunc.m_max };
    let n_max = trunc.n_max.min(k_f);
    let bound = closed_form_count(k_b, k_f, m_max, n_max);
    if bound.saturating_mul(BYTES_PER_ADO as u128) > budget as u128 {
        return Err(HeomError::SpaceTooLarge { count: bound, budget });
    }
    let mut ados: Vec<AdoKey> = Vec::new();
    let mut level_starts = Vec::new();
    for level in 0..=(m_max + n_max) {
        level_starts.push(ados.len());
        let mut cands: Vec<AdoKey> = Vec::new();
        for m in 0..=m_max.min(level) {
            let n = level - m;
            if n > n_max {
                continue;
            }
            let js = multisets(k_b, m);
            let qs = subsets(k_f, n);
            let keep_all = always_kept(m, n) || trunc.i_th == 0.0;
            let chunk: Vec<AdoKey> = js
                .par_iter()
                .flat_map_iter(|j| {
                    let table = &table;
                    qs.iter().filter_map(move |q| {
                        let key = AdoKey {
                            j: j.clone(),
                            q: q.clone(),
                        };
                        (keep_all || importance(&key, table) >= trunc.i_th).then_some(key)
                    })
                })
                .collect();
            cands.extend(chunk);
        }
        cands.par_sort_unstable();
        ados.extend(cands);
    }
    let lookup = ados.iter().enumerate().map(|(i, k)| (k.clone(), i as u32)).collect();
    Ok(HierarchySpace {
        ados,
        lookup,
        table,
        trunc: Truncation {
            m_max,
            n_max,
            i_th: trunc.i_th,
        },
        level_starts,
    })
}

/// Counts retained ADOs without storing them.
pub fn count_space(table: &ExponentTable, trunc: Truncation) -> u128 {
    let k_b = table.k_b();
    let k_f = table.k_f();
    let m_max = if k_b == 0 { 0 } else { trunc.m_max };
    let n_max = trunc.n_max.min(k_f);
    if trunc.i_th == 0.0 {
        return closed_form_count(k_b, k_f, m_max, n_max);
    }
    // bosonic prefixes with their partial importance, then a depth-first sweep over q
    let mut bos: Vec<(usize, f64)> = Vec::new();
    fn rec_b(t: &ExponentTable, start: usize, left: usize, m: usize, val: f64, cum: f64, out: &mut Vec<(usize, f64)>) {
        out.push((m, val));
        if left == 0 {
            return;
        }
        for id in start..t.k_b() {
            let (c, r) = t.boson_weight(id as u16);
            let cum2 = cum + r;
            rec_b(t, id, left - 1, m + 1, val * c / r / cum2, cum2, out);
        }
    }
    rec_b(table, 0, m_max, 0, 1.0, 0.0, &mut bos);
    fn rec_f(t: &ExponentTable, start: usize, left: usize, m: usize, n: usize, val: f64, cum: f64, th: f64) -> u128 {
        let mut total = 0;
        for id in start..t.k_f() {
            let (c, r) = t.fermion_weight(id as u16);
            let cum2 = cum + r;
            let v = val * c / r / cum2;
            if always_kept(m, n + 1) || v >= th {
                total += 1;
            }
            if left > 1 {
                total += rec_f(t, id + 1, left - 1, m, n + 1, v, cum2, th);
            }
        }
        total
    }
    bos.par_iter()
        .map(|&(m, val)| {
            let own = u128::from(always_kept(m, 0) || val >= trunc.i_th);
            own + if n_max > 0 {
                rec_f(table, 0, n_max, m, 0, val, 0.0, trunc.i_th)
            } else {
                0
            }
        })
        .sum()
}

impl HierarchySpace {
    pub fn len(&self) -> usize {
        self.ados.len()
    }
    pub fn is_empty(&self) -> bool {
        self.ados.is_empty()
    }
    pub fn k_b(&self) -> usize {
        self.table.k_b()
    }
    pub fn k_f(&self) -> usize {
        self.table.k_f()
    }
    pub fn truncation(&self) -> Truncation {
        self.trunc
    }
    pub fn table(&self) -> &ExponentTable {
        &self.table
    }
    pub fn keys(&self) -> &[AdoKey] {
        &self.ados
    }

    /// Flat range of ADOs at a combined level.
    pub fn level_range(&self, level: usize) -> std::ops::Range<usize> {
        let start = self.level_starts.get(level).copied().unwrap_or(self.ados.len());
        let end = self.level_starts.get(level + 1).copied().unwrap_or(self.ados.len());
        start..end
    }

    pub fn lookup(&self, key: &AdoKey) -> Option<usize> {
        self.lookup.get(key).map(|&i| i as usize)
    }

    pub fn index_of(&self, key: &AdoKey) -> Result<usize> {
        if let Some(i) = self.lookup(key) {
            return Ok(i);
        }
        if !key.well_formed()
            || key.j.iter().any(|&i| i as usize >= self.k_b())
            || key.q.iter().any(|&i| i as usize >= self.k_f())
        {
            return Err(HeomError::NotFound(format!(
                "{key} is not a valid label for this exponent table"
            )));
        }
        if key.m() > self.trunc.m_max || key.n() > self.trunc.n_max {
            return Err(HeomError::NotFound(format!(
                "{key} exceeds tier (m_max={}, n_max={})",
                self.trunc.m_max, self.trunc.n_max
            )));
        }
        Err(HeomError::NotFound(format!(
            "{key} pruned (importance {:e} below threshold {:e})",
            importance(key, &self.table),
            self.trunc.i_th
        )))
    }

    pub fn ado_at(&self, flat: usize) -> Result<AdoIndex> {
        self.ados
            .get(flat)
            .map(|k| AdoIndex { key: k.clone(), flat })
            .ok_or_else(|| HeomError::NotFound(format!("flat index {flat} out of range (size {})", self.len())))
    }

    pub fn importance_of(&self, flat: usize) -> f64 {
        importance(&self.ados[flat], &self.table)
    }

    /// All couplings of ADO `flat` to retained neighbors.
    pub fn neighbors(&self, flat: usize) -> Vec<Neighbor> {
        let key = &self.ados[flat];
        let mut out = Vec::new();
        let n = key.n();
        // UP_F: insert q' keeping q ascending
        if n < self.trunc.n_max {
            let mut probe = AdoKey {
                j: key.j.clone(),
                q: IdList::with_capacity(n + 1),
            };
            for id in 0..self.k_f() as u16 {
                if key.q.contains(&id) {
                    continue;
                }
                let greater = key.q.iter().filter(|&&x| x > id).count();
                probe.q.clear();
                probe.q.extend(key.q.iter().copied().filter(|&x| x < id));
                probe.q.push(id);
                probe.q.extend(key.q.iter().copied().filter(|&x| x > id));
                if let Some(b) = self.lookup(&probe) {
                    let factor = if greater % 2 == 0 { 1 } else { -1 };
                    out.push(Neighbor {
                        flat: b,
                        dir: Direction::UpF,
                        id,
                        position: 0,
                        factor,
                    });
                }
            }
        }
        // DOWN_F: remove q_w, sign (-1)^(n-w)
        for w in 1..=n {
            let mut q = key.q.clone();
            let id = q.remove(w - 1);
            if let Some(b) = self.lookup(&AdoKey { j: key.j.clone(), q }) {
                let factor = if (n - w).is_multiple_of(2) { 1 } else { -1 };
                out.push(Neighbor {
                    flat: b,
                    dir: Direction::DownF,
                    id,
                    position: w,
                    factor,
                });
            }
        }
        // UP_B: increment one count
        if key.m() < self.trunc.m_max {
            for id in 0..self.k_b() as u16 {
                let mut j = key.j.clone();
                let pos = j.partition_point(|&x| x <= id);
                j.insert(pos, id);
                if let Some(b) = self.lookup(&AdoKey { j, q: key.q.clone() }) {
                    out.push(Neighbor {
                        flat: b,
                        dir: Direction::UpB,
                        id,
                        position: 0,
                        factor: 1,
                    });
                }
            }
        }
        // DOWN_B: decrement a count, the count is the multiplicity
        let mut i = 0;
        while i < key.j.len() {
            let id = key.j[i];
            let count = key.j[i..].iter().take_while(|&&x| x == id).count();
            let mut j = key.j.clone();
            j.remove(i);
            if let Some(b) = self.lookup(&AdoKey { j, q: key.q.clone() }) {
                out.push(Neighbor {
                    flat: b,
                    dir: Direction::DownB,
                    id,
                    position: 0,
                    factor: count as i32,
                });
            }
            i += count;
        }
        out
    }

    /// Flat indices of the level-one fermionic ADOs `(∅, {q})`, paired with `q`.
    pub fn first_level_fermionic(&self) -> Vec<(usize, u16)> {
        (0..self.k_f() as u16)
            .filter_map(|id| self.lookup(&AdoKey::new(&[], &[id])).map(|f| (f, id)))
            .collect()
    }
}
