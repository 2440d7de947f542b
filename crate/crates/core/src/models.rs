//! Operator builders for the impurity and cavity systems.

use crate::error::{HeomError, Result};
use crate::{Op, C64};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Single-mode annihilator `|0⟩⟨1|` (index 0 empty, index 1 occupied).
fn lowering() -> Op {
    Op::from_fn(2, 2, |r, col| if r == 0 && col == 1 { c(1.0) } else { c(0.0) })
}

/// Jordan-Wigner annihilators for `modes` fermionic modes; mode 0 is the leftmost factor.
pub fn fermion_annihilators(modes: usize) -> Vec<Op> {
    let z = Op::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(-1.0)]));
    let id = Op::identity(2, 2);
    (0..modes)
        .map(|k| {
            let mut op = Op::identity(1, 1);
            for i in 0..modes {
                let f = match i.cmp(&k) {
                    std::cmp::Ordering::Less => &z,
                    std::cmp::Ordering::Equal => &lowering(),
                    std::cmp::Ordering::Greater => &id,
                };
                op = op.kronecker(f);
            }
            op
        })
        .collect()
}

/// Truncated bosonic annihilator on `n` Fock states.
pub fn boson_annihilator(n: usize) -> Op {
    Op::from_fn(
        n,
        n,
        |r, col| if col == r + 1 { c((col as f64).sqrt()) } else { c(0.0) },
    )
}

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub h: Op,
    /// Fermionic annihilators, one per spin.
    pub d: Vec<Op>,
    /// Cavity annihilator, if any.
    pub a: Option<Op>,
}

/// `ε Σ_σ n_σ + U n_↑ n_↓` for one or two spin species.
pub fn fermion_level(eps: f64, u: f64, spins: usize) -> Result<SystemModel> {
    if !(1..=2).contains(&spins) {
        return Err(HeomError::Parameter(format!("spins must be 1 or 2, got {spins}")));
    }
    if !eps.is_finite() || !u.is_finite() {
        return Err(HeomError::Parameter("level energies must be finite".into()));
    }
    let d = fermion_annihilators(spins);
    let n: Vec<Op> = d.iter().map(|x| x.adjoint() * x).collect();
    let mut h = n
        .iter()
        .fold(Op::zeros(1 << spins, 1 << spins), |acc, ni| acc + ni * c(eps));
    if spins == 2 {
        h += &n[0] * &n[1] * c(u);
    }
    Ok(SystemModel { h, d, a: None })
}

/// `ω a†a` on `n_photon` Fock states.
pub fn boson_mode(omega: f64, n_photon: usize) -> Result<SystemModel> {
    if n_photon < 2 {
        return Err(HeomError::Parameter(
            "a bosonic mode needs at least 2 Fock states".into(),
        ));
    }
    let a = boson_annihilator(n_photon);
    let h = a.adjoint() * &a * c(omega);
    Ok(SystemModel {
        h,
        d: vec![],
        a: Some(a),
    })
}

/// `ε d†d + ω_c a†a + g d†d(a + a†)` on (level) ⊗ (cavity).
pub fn charge_cavity(eps: f64, omega_c: f64, g: f64, n_photon: usize) -> Result<SystemModel> {
    if n_photon < 2 {
        return Err(HeomError::Parameter("the cavity needs at least 2 Fock states".into()));
    }
    let d1 = lowering();
    let a1 = boson_annihilator(n_photon);
    let d = d1.kronecker(&Op::identity(n_photon, n_photon));
    let a = Op::identity(2, 2).kronecker(&a1);
    let n = d.adjoint() * &d;
    let h = &n * c(eps) + a.adjoint() * &a * c(omega_c) + &n * (&a + a.adjoint()) * c(g);
    Ok(SystemModel {
        h,
        d: vec![d],
        a: Some(a),
    })
}
