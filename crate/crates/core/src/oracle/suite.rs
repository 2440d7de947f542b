//! Toy systems on which the assembled generator is checked against the brute-force one.

use super::generator::{ordered_vector_generator, GeneratorDiff};
use crate::bath::{drude_lorentz_pade_boson, lorentzian_fermion, BathSpec, BosonicExponent, Decomposition, Part};
use crate::error::Result;
use crate::hierarchy::{enumerate_space, ExponentTable, Truncation};
use crate::liouvillian::{build_heomls, Parity, SystemSpec};
use crate::models::{charge_cavity, fermion_level};
use crate::{Op, C64};
use std::sync::Arc;

pub struct ToySystem {
    pub name: &'static str,
    pub h: Op,
    pub baths: Vec<BathSpec>,
}

#[derive(Debug, Clone)]
pub struct ToyResult {
    pub system: &'static str,
    pub m_max: usize,
    pub n_max: usize,
    pub parity: Parity,
    pub n_ados: usize,
    pub diff: GeneratorDiff,
}

/// Deterministic complex entries in [-1, 1]².
fn scrambled(d: usize, seed: u64) -> Op {
    let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    Op::from_fn(d, d, |_, _| C64::new(next(), next()))
}

fn hermitian(d: usize, seed: u64) -> Op {
    let a = scrambled(d, seed);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Systems covering K_f ≤ 6 and K_b ≤ 3 with fermionic, bosonic and mixed baths.
pub fn toy_systems() -> Result<Vec<ToySystem>> {
    let lvl = fermion_level(0.3, 0.0, 1)?;
    let spin = fermion_level(-1.0, 2.0, 2)?;
    let cav = charge_cavity(-0.5, 1.0, 0.4, 2)?;
    let lead = |label: &str, d: &Op, mu: f64, n: usize| -> Result<BathSpec> {
        BathSpec::fermionic(
            label,
            "",
            d.clone(),
            lorentzian_fermion(0.8, 3.0, mu, 0.7, n, Decomposition::Pade)?,
        )
    };
    let dl = |label: &str, v: &Op, n: usize| -> Result<BathSpec> {
        BathSpec::bosonic(label, "", v.clone(), drude_lorentz_pade_boson(0.05, 0.4, 0.6, n)?)
    };
    let x = cav.a.clone().unwrap();
    let x = &x + x.adjoint();
    let combined = BathSpec::bosonic(
        "C",
        "",
        hermitian(2, 7),
        vec![
            BosonicExponent {
                xi: C64::new(0.3, -0.2),
                chi: C64::new(0.9, 0.4),
                part: Part::Combined,
                l: 1,
            },
            BosonicExponent {
                xi: C64::new(0.1, 0.0),
                chi: C64::new(1.3, 0.0),
                part: Part::Real,
                l: 2,
            },
            BosonicExponent {
                xi: C64::new(-0.2, 0.0),
                chi: C64::new(1.3, 0.0),
                part: Part::Imag,
                l: 2,
            },
        ],
    )?;
    Ok(vec![
        ToySystem {
            name: "level, one lead, K_f=2",
            h: lvl.h.clone(),
            baths: vec![lead("L", &lvl.d[0], 0.4, 1)?],
        },
        ToySystem {
            name: "level, one lead, K_f=6",
            h: lvl.h.clone(),
            baths: vec![lead("L", &lvl.d[0], -0.6, 3)?],
        },
        ToySystem {
            name: "level, scrambled coupling, K_f=4",
            h: hermitian(2, 3),
            baths: vec![
                lead("L", &scrambled(2, 11), 0.5, 1)?,
                lead("R", &scrambled(2, 12), -0.5, 1)?,
            ],
        },
        ToySystem {
            name: "spinful level, two spin-resolved leads, K_f=4",
            h: spin.h.clone(),
            baths: vec![lead("L", &spin.d[0], 0.5, 1)?, lead("L", &spin.d[1], 0.5, 1)?],
        },
        ToySystem {
            name: "spinful level, three leads, K_f=6",
            h: spin.h.clone(),
            baths: vec![
                lead("L", &spin.d[0], 0.5, 1)?,
                lead("R", &spin.d[1], -0.5, 1)?,
                lead("L", &spin.d[1], 0.5, 1)?,
            ],
        },
        ToySystem {
            name: "qubit, Drude-Lorentz, K_b=3",
            h: hermitian(2, 5),
            baths: vec![dl("B", &hermitian(2, 6), 2)?],
        },
        ToySystem {
            name: "qubit, combined and split parts, K_b=3",
            h: hermitian(2, 5),
            baths: vec![combined],
        },
        ToySystem {
            name: "charge cavity, mixed, K_b=2 K_f=4",
            h: cav.h.clone(),
            baths: vec![
                dl("B", &x, 1)?,
                lead("L", &cav.d[0], 0.5, 1)?,
                lead("R", &cav.d[0], -0.5, 1)?,
            ],
        },
        ToySystem {
            name: "charge cavity, mixed, K_b=3 K_f=6",
            h: cav.h.clone(),
            baths: vec![
                lead("L", &cav.d[0], 0.5, 2)?,
                dl("B", &x, 2)?,
                lead("R", &cav.d[0], -0.5, 1)?,
            ],
        },
    ])
}

/// Runs every toy system over tiers 0..=2 and both parities.
pub fn generator_suite() -> Result<Vec<ToyResult>> {
    let mut out = Vec::new();
    for sys in toy_systems()? {
        let table = ExponentTable::from_baths(&sys.baths)?;
        let parities: &[Parity] = if table.k_f() > 0 {
            &[Parity::Even, Parity::Odd]
        } else {
            &[Parity::Even]
        };
        for m_max in 0..=2 {
            for n_max in 0..=2 {
                let space = Arc::new(enumerate_space(table.clone(), Truncation::new(m_max, n_max, 0.0))?);
                for &parity in parities {
                    let m = build_heomls(&SystemSpec::constant(sys.h.clone())?, &sys.baths, space.clone(), parity)?;
                    let oracle = ordered_vector_generator(&sys.h, &sys.baths, m_max, n_max, parity)?;
                    out.push(ToyResult {
                        system: sys.name,
                        m_max,
                        n_max,
                        parity,
                        n_ados: space.len(),
                        diff: oracle.compare(&m),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Largest |A_heom − A_exact| / max A_exact over the grid for a single level
/// `ε d†d` coupled to one Lorentzian lead.
pub fn resonant_level_dos_error(
    eps: f64,
    lead: (f64, f64, f64),
    kt: f64,
    n_exp: usize,
    n_max: usize,
    grid: &[f64],
) -> Result<(f64, f64)> {
    use crate::observables::dos;
    use crate::solvers::{steadystate, LinearMethod};
    let (gamma, w, mu) = lead;
    let lvl = fermion_level(eps, 0.0, 1)?;
    let bath = BathSpec::fermionic(
        "L",
        "",
        lvl.d[0].clone(),
        lorentzian_fermion(gamma, w, mu, kt, n_exp, Decomposition::Pade)?,
    )?;
    let baths = [bath];
    let table = ExponentTable::from_baths(&baths)?;
    let space = Arc::new(enumerate_space(table, Truncation::new(0, n_max, 0.0))?);
    let sys = SystemSpec::constant(lvl.h.clone())?;
    let even = build_heomls(&sys, &baths, space.clone(), Parity::Even)?;
    let odd = build_heomls(&sys, &baths, space, Parity::Odd)?;
    let (ss, _) = steadystate(&even)?;
    let a = dos(&odd, &ss, &lvl.d[0], grid, &LinearMethod::Direct)?;
    let exact: Vec<f64> = grid
        .iter()
        .map(|&x| super::exact::resonant_level_dos(eps, &[lead], x))
        .collect();
    let peak = exact.iter().cloned().fold(0.0, f64::max);
    let err = a
        .values
        .iter()
        .zip(&exact)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    Ok((err / peak, a.max_residual))
}

/// HEOM steady-state currents `(I_L, I_R)` and the Landauer value for a single level between two leads.
pub fn resonant_level_currents(
    eps: f64,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    kt: f64,
    n_exp: usize,
    n_max: usize,
) -> Result<(f64, f64, f64)> {
    use crate::observables::current;
    use crate::solvers::steadystate;
    let lvl = fermion_level(eps, 0.0, 1)?;
    let mk = |label: &str, (g, w, mu): (f64, f64, f64)| -> Result<BathSpec> {
        BathSpec::fermionic(
            label,
            "",
            lvl.d[0].clone(),
            lorentzian_fermion(g, w, mu, kt, n_exp, Decomposition::Pade)?,
        )
    };
    let baths = [mk("L", left)?, mk("R", right)?];
    let table = ExponentTable::from_baths(&baths)?;
    let space = Arc::new(enumerate_space(table, Truncation::new(0, n_max, 0.0))?);
    let even = build_heomls(&SystemSpec::constant(lvl.h.clone())?, &baths, space, Parity::Even)?;
    let (ss, _) = steadystate(&even)?;
    let il = current(&ss, "L", &baths)?.value;
    let ir = current(&ss, "R", &baths)?.value;
    Ok((il, ir, super::exact::resonant_level_current(eps, left, right, kt)))
}

/// Pure dephasing of `(ε/2)σ_z` through `V = σ_z` and a Drude-Lorentz bath.
/// Returns the largest `| |ρ01|_heom − ½e^{−Γ(t)} |` on `times`, starting from `|+⟩⟨+|`.
pub fn dephasing_error(
    eps: f64,
    delta: f64,
    w: f64,
    kt: f64,
    n_exp: usize,
    m_max: usize,
    times: &[f64],
) -> Result<f64> {
    use crate::solvers::{evolve_ode, AdosVector, OdeOptions};
    let sz = Op::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]));
    let h = &sz * C64::new(0.5 * eps, 0.0);
    let baths = [BathSpec::bosonic(
        "B",
        "",
        sz.clone(),
        drude_lorentz_pade_boson(delta, w, kt, n_exp)?,
    )?];
    let table = ExponentTable::from_baths(&baths)?;
    let space = Arc::new(enumerate_space(table, Truncation::new(m_max, 0, 0.0))?);
    let m = build_heomls(&SystemSpec::constant(h)?, &baths, space.clone(), Parity::Even)?;
    let rho0 = Op::from_element(2, 2, C64::new(0.5, 0.0));
    let x0 = AdosVector::from_density(&rho0, space, Parity::Even)?;
    let (traj, _) = evolve_ode(&m, &x0, times, &OdeOptions::default())?;
    Ok(traj
        .iter()
        .zip(times)
        .map(|(x, &t)| {
            (x.root()[(0, 1)].norm() - 0.5 * (-super::exact::dephasing_exponent(delta, w, kt, t)).exp()).abs()
        })
        .fold(0.0, f64::max))
}

/// Thermal qubit under Lindblad damping only; returns `max |ρ_ss − ρ_Gibbs|`.
pub fn lindblad_gibbs_error(omega: f64, rate: f64, kt: f64) -> Result<f64> {
    use crate::liouvillian::thermal_jumps;
    use crate::solvers::steadystate;
    let sz = Op::from_diagonal(&nalgebra::DVector::from_vec(vec![
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ]));
    let h = &sz * C64::new(0.5 * omega, 0.0);
    // σ⁻ lowers |0⟩ (energy +ω/2) to |1⟩
    let lower = Op::from_fn(2, 2, |r, c| {
        if r == 1 && c == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let n_th = 1.0 / (omega / kt).exp_m1();
    let (down, up) = thermal_jumps(&lower, rate, n_th);
    let space = Arc::new(enumerate_space(ExponentTable::default(), Truncation::new(0, 0, 0.0))?);
    let m = build_heomls(&SystemSpec::constant(h.clone())?, &[], space, Parity::Even)?
        .add_lindblad(&down)?
        .add_lindblad(&up)?;
    let (ss, _) = steadystate(&m)?;
    let g = super::exact::gibbs_state(&h, kt)?;
    Ok((ss.root() - g).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `points` uniform times on `[0, 10/W]`; τ = 0 dropped when `skip_zero`.
pub fn correlation_grid(w: f64, points: usize, skip_zero: bool) -> Vec<f64> {
    let t_max = 10.0 / w;
    (0..points)
        .map(|i| t_max * i as f64 / (points - 1) as f64)
        .filter(|&t| !(skip_zero && t == 0.0))
        .collect()
}

/// `max_{τ,ν} |Σηe^{−γτ} − C_quad| / max_{τ,ν} |C_quad|`.
pub fn fermionic_correlation_error(
    gamma: f64,
    w: f64,
    mu: f64,
    kt: f64,
    n: usize,
    scheme: Decomposition,
    grid: &[f64],
) -> Result<f64> {
    use crate::bath::{correlation_of, Exponents, Nu};
    use rayon::prelude::*;
    let exps = Exponents::Fermionic(lorentzian_fermion(gamma, w, mu, kt, n, scheme)?);
    let pts: Vec<(f64, f64)> = grid
        .par_iter()
        .flat_map_iter(|&t| [Nu::Plus, Nu::Minus].map(|nu| (t, nu)))
        .map(|(t, nu)| {
            let q = super::exact::lorentzian_correlation_quad(gamma, w, mu, kt, nu, t)?;
            let s = correlation_of(&exps, t, Some(nu))?;
            Ok(((q - s).norm(), q.norm()))
        })
        .collect::<Result<_>>()?;
    let scale = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(pts.iter().map(|p| p.0).fold(0.0, f64::max) / scale)
}

/// Same for a Drude-Lorentz bath; `grid` must exclude τ = 0.
pub fn bosonic_correlation_error(
    delta: f64,
    w: f64,
    kt: f64,
    n: usize,
    scheme: Decomposition,
    grid: &[f64],
) -> Result<f64> {
    use crate::bath::{correlation_of, drude_lorentz_boson, Exponents};
    use rayon::prelude::*;
    let exps = Exponents::Bosonic(drude_lorentz_boson(delta, w, kt, n, scheme)?);
    let pts: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&t| {
            let q = super::exact::drude_lorentz_correlation_quad(delta, w, kt, t)?;
            let s = correlation_of(&exps, t, None)?;
            Ok(((q - s).norm(), q.norm()))
        })
        .collect::<Result<_>>()?;
    let scale = pts.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(pts.iter().map(|p| p.0).fold(0.0, f64::max) / scale)
}
