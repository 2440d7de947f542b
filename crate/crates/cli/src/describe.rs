//! Hierarchy dictionary lookups for `heom describe`.

use crate::build::{build_baths, build_model, exponent_table, truncation};
use crate::config::RunConfig;
use crate::error::CliError;
use heom_core::bath::{BathSpec, Nu, Part};
use heom_core::hierarchy::{enumerate_space, importance, AdoKey, HierarchySpace};
use heom_core::io::fmt_g;
use heom_core::liouvillian::Parity;
use std::fmt::Write;

/// A flat index or a key such as `j=0,0;q=3,5` (either half may be omitted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdoRef {
    Flat(usize),
    Key(AdoKey),
}

pub fn parse_ado_ref(s: &str) -> Result<AdoRef, CliError> {
    let s = s.trim();
    if let Ok(i) = s.parse::<usize>() {
        return Ok(AdoRef::Flat(i));
    }
    let mut j = Vec::new();
    let mut q = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, list) = part.split_once('=').ok_or_else(|| {
            CliError::config(format!(
                "cannot read ADO reference {s:?}: expected `j=..;q=..` or an index"
            ))
        })?;
        let ids: Vec<u16> = list
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| {
                x.parse::<u16>()
                    .map_err(|_| CliError::config(format!("bad exponent id {x:?} in {s:?}")))
            })
            .collect::<Result<_, _>>()?;
        match name.trim() {
            "j" => j = ids,
            "q" => q = ids,
            other => return Err(CliError::config(format!("unknown key part {other:?} in {s:?}"))),
        }
    }
    Ok(AdoRef::Key(AdoKey::new(&j, &q)))
}

fn nu_str(nu: Nu) -> &'static str {
    match nu {
        Nu::Plus => "+",
        Nu::Minus => "-",
    }
}

fn part_str(p: Part) -> &'static str {
    match p {
        Part::Real => "real",
        Part::Imag => "imag",
        Part::Combined => "combined",
    }
}

fn cplx(z: heom_core::C64) -> String {
    let im = if z.im == 0.0 { 0.0 } else { z.im };
    format!(
        "{}{}{}i",
        fmt_g(z.re + 0.0, 10),
        if im.is_sign_negative() { "-" } else { "+" },
        fmt_g(im.abs(), 10)
    )
}

fn channel(b: &BathSpec) -> &str {
    if b.channel.is_empty() {
        "-"
    } else {
        &b.channel
    }
}

fn describe_key(out: &mut String, key: &AdoKey, space: &HierarchySpace, baths: &[BathSpec]) {
    let t = space.table();
    for &id in &key.j {
        let e = &t.bosonic[id as usize];
        let b = &baths[e.bath];
        let _ = writeln!(
            out,
            "  j {id}: bath beta={} channel={} l={} part={} xi={} chi={}",
            b.label,
            channel(b),
            e.exp.l,
            part_str(e.exp.part),
            cplx(e.exp.xi),
            cplx(e.exp.chi)
        );
    }
    for &id in &key.q {
        let e = &t.fermionic[id as usize];
        let b = &baths[e.bath];
        let _ = writeln!(
            out,
            "  q {id}: bath alpha={} nu={} h={} sigma={} eta={} gamma={}",
            b.label,
            nu_str(e.exp.nu),
            e.exp.h,
            channel(b),
            cplx(e.exp.eta),
            cplx(e.exp.gamma)
        );
    }
}

/// Human-readable dictionary entry. A pruned key is reported, not an error.
pub fn describe(cfg: &RunConfig, what: &AdoRef, parity: Parity) -> Result<String, CliError> {
    let model = build_model(&cfg.system)?;
    let baths = build_baths(cfg, &model, cfg.phi)?;
    let space =
        enumerate_space(exponent_table(&baths)?, truncation(cfg)).map_err(|e| CliError::from_engine("build", e))?;
    let key = match what {
        AdoRef::Flat(i) => space.ado_at(*i).map_err(|e| CliError::from_engine("describe", e))?.key,
        AdoRef::Key(k) => k.clone(),
    };
    let (kb, kf) = (space.k_b() as u16, space.k_f() as u16);
    let well_formed = key.j.windows(2).all(|w| w[0] <= w[1])
        && key.q.windows(2).all(|w| w[0] < w[1])
        && key.j.iter().all(|&i| i < kb)
        && key.q.iter().all(|&i| i < kf);
    if !well_formed {
        return Err(CliError::config(format!(
            "{key} is not a valid label: j must be sorted ids < {kb}, q strictly ascending ids < {kf}"
        )));
    }
    let trunc = space.truncation();
    if key.m() > trunc.m_max || key.n() > trunc.n_max {
        return Err(CliError::config(format!(
            "{key} is beyond the tier (m_max={}, n_max={})",
            trunc.m_max, trunc.n_max
        )));
    }
    let imp = importance(&key, space.table());
    let sector_odd = parity == Parity::Odd;
    let ado_odd = sector_odd ^ (key.n() % 2 == 1);
    let mut out = String::new();
    match space.lookup(&key) {
        Some(flat) => {
            let _ = writeln!(out, "index: {flat} of {}", space.len());
        }
        None => {
            let _ = writeln!(
                out,
                "index: pruned (importance below threshold: {imp:.6e} < {:.6e})",
                trunc.i_th
            );
        }
    }
    let _ = writeln!(out, "key: j={:?} q={:?}", key.j.as_slice(), key.q.as_slice());
    let _ = writeln!(out, "tier: m={} n={}", key.m(), key.n());
    let _ = writeln!(
        out,
        "parity: {} (sector {})",
        if ado_odd { "odd" } else { "even" },
        if sector_odd { "odd" } else { "even" }
    );
    let _ = writeln!(out, "importance: {imp:.6e}");
    if key.level() == 0 {
        let _ = writeln!(out, "root: reduced density operator");
    }
    describe_key(&mut out, &key, &space, &baths);
    Ok(out)
}
