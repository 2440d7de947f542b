//! Turns a validated configuration into engine objects.

use crate::config::*;
use crate::error::CliError;
use heom_core::bath::{
    drude_lorentz_boson, lorentzian_fermion, BathSpec, BosonicExponent, Decomposition, FermionicExponent, Nu, Part,
};
use heom_core::hierarchy::{ExponentTable, Truncation};
use heom_core::models::{boson_mode, charge_cavity, fermion_level};
use heom_core::{Op, C64};
use std::collections::BTreeMap;

/// System Hamiltonian with its named operators.
#[derive(Debug, Clone)]
pub struct Model {
    pub h: Op,
    pub ops: BTreeMap<String, Op>,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn op(&self, path: &str, r: &OpRef) -> Result<Op, CliError> {
        let op = match r {
            OpRef::Named(name) => self.ops.get(name).cloned().ok_or_else(|| {
                let known: Vec<&str> = self.ops.keys().map(String::as_str).collect();
                CliError::config(format!(
                    "{path}: unknown operator {name:?} (known: {})",
                    known.join(", ")
                ))
            })?,
            OpRef::Matrix(m) => to_op(m),
        };
        if op.nrows() != self.dim() {
            return Err(CliError::config(format!(
                "{path}: operator is {0}x{0}, system is {1}x{1}",
                op.nrows(),
                self.dim()
            )));
        }
        Ok(op)
    }

    pub fn named(&self, path: &str, name: &str) -> Result<Op, CliError> {
        self.op(path, &OpRef::Named(name.to_string()))
    }
}

pub fn to_op(m: &MatrixSpec) -> Op {
    let n = m.len();
    Op::from_fn(n, n, |r, c| C64::new(m[r][c][0], m[r][c][1]))
}

fn engine(stage: &str) -> impl Fn(heom_core::HeomError) -> CliError + '_ {
    move |e| CliError::from_engine(stage, e)
}

pub fn build_model(sys: &SystemConfig) -> Result<Model, CliError> {
    let err = engine("config");
    let mut ops = BTreeMap::new();
    let h = match sys {
        SystemConfig::FermionLevel { eps, u, spins } => {
            let m = fermion_level(*eps, *u, *spins).map_err(err)?;
            let mut total = Op::zeros(m.h.nrows(), m.h.ncols());
            let names: &[(&str, &str)] = if *spins == 1 {
                &[("d", "")]
            } else {
                &[("d_up", "n_up"), ("d_down", "n_down")]
            };
            for ((name, occ), d) in names.iter().zip(&m.d) {
                let n = d.adjoint() * d;
                total += &n;
                if !occ.is_empty() {
                    ops.insert(occ.to_string(), n);
                }
                ops.insert(name.to_string(), d.clone());
            }
            ops.insert("n".into(), total);
            m.h
        }
        SystemConfig::BosonMode { omega, n_photon } => {
            let m = boson_mode(*omega, *n_photon).map_err(err)?;
            let a = m.a.expect("boson mode has a lowering operator");
            ops.insert("x".into(), &a + a.adjoint());
            ops.insert("n".into(), a.adjoint() * &a);
            ops.insert("a".into(), a);
            m.h
        }
        SystemConfig::ChargeCavity {
            eps,
            omega_c,
            g,
            n_photon,
        } => {
            let m = charge_cavity(*eps, *omega_c, *g, *n_photon).map_err(err)?;
            let a = m.a.expect("cavity has a lowering operator");
            let d = m.d[0].clone();
            ops.insert("x".into(), &a + a.adjoint());
            ops.insert("n_photon".into(), a.adjoint() * &a);
            ops.insert("a".into(), a);
            ops.insert("n".into(), d.adjoint() * &d);
            ops.insert("d".into(), d);
            m.h
        }
        SystemConfig::Matrix { hamiltonian, operators } => {
            for (k, v) in operators {
                ops.insert(k.clone(), to_op(v));
            }
            to_op(hamiltonian)
        }
    };
    let d = h.nrows();
    ops.entry("identity".into()).or_insert_with(|| Op::identity(d, d));
    ops.entry("h".into()).or_insert_with(|| h.clone());
    Ok(Model { h, ops })
}

/// Chemical potential of a lead at bias `phi` (μ_L = −μ_R = eΦ/2).
pub fn lead_mu(b: &BathConfig, phi: f64) -> f64 {
    match (b.mu, b.bias) {
        (_, Some(BiasSide::Left)) => 0.5 * phi,
        (_, Some(BiasSide::Right)) => -0.5 * phi,
        (Some(mu), None) => mu,
        (None, None) => 0.0,
    }
}

fn scheme(d: DecompositionConfig) -> Decomposition {
    match d {
        DecompositionConfig::Pade => Decomposition::Pade,
        DecompositionConfig::Matsubara => Decomposition::Matsubara,
    }
}

fn c(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

/// All baths at bias `phi`.
pub fn build_baths(cfg: &RunConfig, model: &Model, phi: f64) -> Result<Vec<BathSpec>, CliError> {
    let mut out = Vec::with_capacity(cfg.baths.len());
    for (i, b) in cfg.baths.iter().enumerate() {
        let path = format!("baths[{i}]");
        let err = |e| CliError::from_engine(&path, e);
        let coupling = model.op(&format!("{path}.coupling"), &b.coupling)?;
        let spec = match (b.flavor, b.family) {
            (FlavorConfig::Fermionic, Family::Lorentzian) => {
                let exps = lorentzian_fermion(
                    b.gamma.unwrap_or_default(),
                    b.width.unwrap_or_default(),
                    lead_mu(b, phi),
                    b.kt.unwrap_or_default(),
                    b.n.unwrap_or_default(),
                    scheme(b.decomposition),
                )
                .map_err(err)?;
                BathSpec::fermionic(&b.label, &b.channel, coupling, exps).map_err(err)?
            }
            (FlavorConfig::Bosonic, Family::DrudeLorentz) => {
                let exps = drude_lorentz_boson(
                    b.delta.unwrap_or_default(),
                    b.width.unwrap_or_default(),
                    b.kt.unwrap_or_default(),
                    b.n.unwrap_or_default(),
                    scheme(b.decomposition),
                )
                .map_err(err)?;
                let spec = BathSpec::bosonic(&b.label, &b.channel, coupling, exps).map_err(err)?;
                if b.combine {
                    spec.combine_real_imag()
                } else {
                    spec
                }
            }
            (FlavorConfig::Fermionic, Family::Raw) => {
                let raw = b.exponents.as_deref().unwrap_or_default();
                let mut count = [0usize; 2];
                let exps = raw
                    .iter()
                    .map(|e| {
                        let nu = match e.nu {
                            Some(NuConfig::Minus) => Nu::Minus,
                            _ => Nu::Plus,
                        };
                        let k = &mut count[(nu == Nu::Minus) as usize];
                        *k += 1;
                        FermionicExponent {
                            eta: c(e.coeff),
                            gamma: c(e.rate),
                            nu,
                            h: *k,
                        }
                    })
                    .collect();
                BathSpec::fermionic(&b.label, &b.channel, coupling, exps).map_err(err)?
            }
            (FlavorConfig::Bosonic, Family::Raw) => {
                let raw = b.exponents.as_deref().unwrap_or_default();
                let exps = raw
                    .iter()
                    .enumerate()
                    .map(|(l, e)| {
                        let part = match e.part {
                            Some(PartConfig::Real) => Part::Real,
                            Some(PartConfig::Imag) => Part::Imag,
                            _ => Part::Combined,
                        };
                        BosonicExponent {
                            xi: c(e.coeff),
                            chi: c(e.rate),
                            part,
                            l: l + 1,
                        }
                    })
                    .collect();
                let spec = BathSpec::bosonic(&b.label, &b.channel, coupling, exps).map_err(err)?;
                if b.combine {
                    spec.combine_real_imag()
                } else {
                    spec
                }
            }
            _ => unreachable!("validated"),
        };
        out.push(spec);
    }
    Ok(out)
}

/// Lindblad jump operators `√rate·F`.
pub fn build_jumps(cfg: &RunConfig, model: &Model) -> Result<Vec<Op>, CliError> {
    cfg.lindblad
        .iter()
        .enumerate()
        .map(|(i, j)| Ok(model.op(&format!("lindblad[{i}].operator"), &j.operator)? * C64::new(j.rate.sqrt(), 0.0)))
        .collect()
}

pub fn truncation(cfg: &RunConfig) -> Truncation {
    Truncation::new(cfg.truncation.m_max, cfg.truncation.n_max, cfg.truncation.i_th)
}

pub fn exponent_table(baths: &[BathSpec]) -> Result<ExponentTable, CliError> {
    ExponentTable::from_baths(baths).map_err(|e| CliError::from_engine("build", e))
}
