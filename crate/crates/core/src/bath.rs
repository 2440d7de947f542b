//! Exponential expansions of bath correlation functions.
//!
//! Fermionic: `C^ν(τ) = Σ_h η^ν_h e^{-γ^ν_h τ}`, Lorentzian `J(ω) = ΓW²/((ω-μ)²+W²)`.
//! Bosonic: `C(τ) = Σ_l ξ_l e^{-χ_l τ}` split into real and imaginary parts,
//! Drude-Lorentz `J(ω) = 4ΔWω/(ω²+W²)`.

use crate::error::{HeomError, Result};
use crate::superop::hermiticity_defect;
use crate::{Op, C64};
use nalgebra::{DMatrix, SymmetricEigen};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Fermionic,
    Bosonic,
}

/// Conjugation flag ν. `Plus` pairs with `d†`, `Minus` with `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nu {
    Plus,
    Minus,
}

impl Nu {
    pub fn sign(self) -> f64 {
        match self {
            Nu::Plus => 1.0,
            Nu::Minus => -1.0,
        }
    }
    pub fn flip(self) -> Nu {
        match self {
            Nu::Plus => Nu::Minus,
            Nu::Minus => Nu::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Real,
    Imag,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decomposition {
    Pade,
    Matsubara,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermionicExponent {
    pub eta: C64,
    pub gamma: C64,
    pub nu: Nu,
    /// Term number inside its ν family, starting at 1 for the pole of J.
    pub h: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BosonicExponent {
    pub xi: C64,
    pub chi: C64,
    pub part: Part,
    /// Term number, starting at 1 for the pole of J.
    pub l: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Exponents {
    Fermionic(Vec<FermionicExponent>),
    Bosonic(Vec<BosonicExponent>),
}

impl Exponents {
    pub fn len(&self) -> usize {
        match self {
            Exponents::Fermionic(v) => v.len(),
            Exponents::Bosonic(v) => v.len(),
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One coupling operator with the expansion of its bath correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    /// Bath identifier α or β, e.g. `"L"`. Several specs may share one.
    pub label: String,
    /// Name of the coupling operator, e.g. `"d_up"`.
    pub channel: String,
    pub coupling: Op,
    pub exponents: Exponents,
}

impl BathSpec {
    pub fn fermionic(label: &str, channel: &str, coupling: Op, exps: Vec<FermionicExponent>) -> Result<Self> {
        let b = Self {
            label: label.into(),
            channel: channel.into(),
            coupling,
            exponents: Exponents::Fermionic(exps),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn bosonic(label: &str, channel: &str, coupling: Op, exps: Vec<BosonicExponent>) -> Result<Self> {
        let b = Self {
            label: label.into(),
            channel: channel.into(),
            coupling,
            exponents: Exponents::Bosonic(exps),
        };
        b.validate()?;
        Ok(b)
    }

    pub fn flavor(&self) -> Flavor {
        match self.exponents {
            Exponents::Fermionic(_) => Flavor::Fermionic,
            Exponents::Bosonic(_) => Flavor::Bosonic,
        }
    }

    pub fn dim(&self) -> usize {
        self.coupling.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.coupling.nrows() != self.coupling.ncols() {
            return Err(HeomError::Dimension(format!(
                "coupling operator of bath {} is not square",
                self.label
            )));
        }
        match &self.exponents {
            Exponents::Fermionic(v) => {
                let plus = v.iter().filter(|e| e.nu == Nu::Plus).count();
                if 2 * plus != v.len() {
                    return Err(HeomError::Parameter(format!(
                        "bath {}: nu = +1 and nu = -1 families differ in length",
                        self.label
                    )));
                }
                for e in v {
                    check_rate(e.gamma, &self.label)?;
                }
            }
            Exponents::Bosonic(v) => {
                let defect = hermiticity_defect(&self.coupling);
                if defect > 1e-12 {
                    return Err(HeomError::Parameter(format!(
                        "bosonic coupling operator of bath {} is not Hermitian (defect {defect:e})",
                        self.label
                    )));
                }
                for e in v {
                    check_rate(e.chi, &self.label)?;
                    if e.part != Part::Combined && e.xi.im != 0.0 {
                        return Err(HeomError::Parameter(format!(
                            "bath {}: REAL/IMAG exponents need real coefficients, use COMBINED",
                            self.label
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Merges REAL/IMAG pairs that share a real decay rate into single COMBINED terms.
    pub fn combine_real_imag(&self) -> Self {
        let mut out = self.clone();
        if let Exponents::Bosonic(v) = &self.exponents {
            let mut merged: Vec<BosonicExponent> = Vec::new();
            let mut used = vec![false; v.len()];
            for i in 0..v.len() {
                if used[i] {
                    continue;
                }
                let e = v[i];
                let partner = (i + 1..v.len()).find(|&k| {
                    !used[k]
                        && v[k].chi == e.chi
                        && e.chi.im == 0.0
                        && matches!((e.part, v[k].part), (Part::Real, Part::Imag) | (Part::Imag, Part::Real))
                });
                match partner {
                    Some(k) => {
                        used[k] = true;
                        let (re, im) = if e.part == Part::Real {
                            (e.xi.re, v[k].xi.re)
                        } else {
                            (v[k].xi.re, e.xi.re)
                        };
                        merged.push(BosonicExponent {
                            xi: C64::new(re, im),
                            chi: e.chi,
                            part: Part::Combined,
                            l: e.l,
                        });
                    }
                    None => merged.push(e),
                }
            }
            out.exponents = Exponents::Bosonic(merged);
        }
        out
    }
}

fn check_rate(rate: C64, label: &str) -> Result<()> {
    if !(rate.re > 0.0) || !rate.im.is_finite() {
        return Err(HeomError::Parameter(format!(
            "bath {label}: decay rate {rate} must have positive real part"
        )));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(HeomError::Parameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(HeomError::Parameter(format!("{name} must be non-negative, got {v}")));
    }
    Ok(())
}

/// Poles `ζ` and residues `κ` of a distribution approximant, scaled to `x = ω/kT`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub kappa: Vec<f64>,
    pub zeta: Vec<f64>,
}

fn tridiagonal_eigenvalues(n: usize, offdiag: impl Fn(usize) -> f64) -> Vec<f64> {
    let m = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j {
            offdiag(i)
        } else if j + 1 == i {
            offdiag(j)
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Padé poles of the `[M-1/M]` approximant, `M = n_poles`, for the Fermi or Bose function.
pub fn pade_poles(flavor: Flavor, n_poles: usize) -> PoleSet {
    if n_poles == 0 {
        return PoleSet {
            kappa: vec![],
            zeta: vec![],
        };
    }
    let nk = n_poles;
    // continued-fraction coefficients differ only in their offsets
    let (off_a, off_b, pre_shift): (f64, f64, f64) = match flavor {
        Flavor::Fermionic => (1.0, 3.0, -1.0),
        Flavor::Bosonic => (3.0, 5.0, 1.0),
    };
    let ea = tridiagonal_eigenvalues(2 * nk, |k| {
        1.0 / ((2.0 * k as f64 + off_a + 2.0) * (2.0 * k as f64 + off_a)).sqrt()
    });
    let eps: Vec<f64> = ea[..nk].iter().map(|v| -2.0 / v).collect();
    let chi: Vec<f64> = if nk > 1 {
        let eb = tridiagonal_eigenvalues(2 * nk - 1, |k| {
            1.0 / ((2.0 * k as f64 + off_b + 2.0) * (2.0 * k as f64 + off_b)).sqrt()
        });
        eb[..nk - 1].iter().map(|v| -2.0 / v).collect()
    } else {
        vec![]
    };
    let pre = 0.5 * nk as f64 * (2.0 * (nk as f64 + 1.0) + pre_shift);
    let kappa = (0..nk)
        .map(|j| {
            let e2 = eps[j] * eps[j];
            let mut t = pre;
            for k in 0..nk - 1 {
                let delta = if j == k { 1.0 } else { 0.0 };
                t *= (chi[k] * chi[k] - e2) / (eps[k] * eps[k] - e2 + delta);
            }
            let delta = if j == nk - 1 { 1.0 } else { 0.0 };
            t / (eps[nk - 1] * eps[nk - 1] - e2 + delta)
        })
        .collect();
    PoleSet { kappa, zeta: eps }
}

/// Matsubara poles: `(2h-1)π` for fermions, `2πl` for bosons, unit residues.
pub fn matsubara_poles(flavor: Flavor, n_poles: usize) -> PoleSet {
    let zeta = (1..=n_poles)
        .map(|h| match flavor {
            Flavor::Fermionic => (2 * h - 1) as f64 * std::f64::consts::PI,
            Flavor::Bosonic => 2.0 * h as f64 * std::f64::consts::PI,
        })
        .collect();
    PoleSet {
        kappa: vec![1.0; n_poles],
        zeta,
    }
}

fn poles(flavor: Flavor, scheme: Decomposition, n_poles: usize) -> PoleSet {
    match scheme {
        Decomposition::Pade => pade_poles(flavor, n_poles),
        Decomposition::Matsubara => matsubara_poles(flavor, n_poles),
    }
}

/// Approximant of the Fermi function `1/(eˣ+1)`, valid for complex `x`.
pub fn fermi_approx(p: &PoleSet, x: C64) -> C64 {
    let mut n = C64::new(0.5, 0.0);
    for (k, z) in p.kappa.iter().zip(&p.zeta) {
        n -= 2.0 * k * x / (x * x + z * z);
    }
    n
}

/// Approximant of the Bose function `1/(eˣ-1)`.
pub fn bose_approx(p: &PoleSet, x: C64) -> C64 {
    let mut n = 1.0 / x - 0.5;
    for (k, z) in p.kappa.iter().zip(&p.zeta) {
        n += 2.0 * k * x / (x * x + z * z);
    }
    n
}

/// Lorentzian fermionic spectral density.
pub fn lorentzian(gamma: f64, w: f64, mu: f64, omega: C64) -> C64 {
    let dx = omega - mu;
    gamma * w * w / (dx * dx + w * w)
}

/// Drude-Lorentz bosonic spectral density.
pub fn drude_lorentz(delta: f64, w: f64, omega: C64) -> C64 {
    4.0 * delta * w * omega / (omega * omega + w * w)
}

/// Lorentzian lead expansion, `N` terms per ν family; the ν = +1 family comes first.
pub fn lorentzian_fermion(
    gamma: f64,
    w: f64,
    mu: f64,
    kt: f64,
    n: usize,
    scheme: Decomposition,
) -> Result<Vec<FermionicExponent>> {
    check_nonneg("Gamma", gamma)?;
    check_positive("W", w)?;
    check_positive("kT", kt)?;
    if !mu.is_finite() {
        return Err(HeomError::Parameter("mu must be finite".into()));
    }
    if n == 0 {
        return Err(HeomError::Parameter("number of exponents N must be at least 1".into()));
    }
    let p = poles(Flavor::Fermionic, scheme, n - 1);
    let mut out = Vec::with_capacity(2 * n);
    for nu in [Nu::Plus, Nu::Minus] {
        let s = nu.sign();
        let eta1 = 0.5 * gamma * w * fermi_approx(&p, C64::new(0.0, w / kt));
        out.push(FermionicExponent {
            eta: eta1,
            gamma: C64::new(w, -s * mu),
            nu,
            h: 1,
        });
        for (i, (k, z)) in p.kappa.iter().zip(&p.zeta).enumerate() {
            let zk = z * kt;
            if (w * w - zk * zk).abs() < 1e-12 * w * w {
                return Err(HeomError::Singularity(format!(
                    "W = {w} coincides with a distribution pole at {zk}; change W or kT"
                )));
            }
            let eta = -I * k * kt * gamma * w * w / (w * w - zk * zk);
            out.push(FermionicExponent {
                eta,
                gamma: C64::new(zk, -s * mu),
                nu,
                h: i + 2,
            });
        }
    }
    Ok(out)
}

pub fn lorentzian_pade_fermion(gamma: f64, w: f64, mu: f64, kt: f64, n: usize) -> Result<Vec<FermionicExponent>> {
    lorentzian_fermion(gamma, w, mu, kt, n, Decomposition::Pade)
}

/// Drude-Lorentz expansion. Term 1 is emitted as a REAL and an IMAG part.
pub fn drude_lorentz_boson(
    delta: f64,
    w: f64,
    kt: f64,
    n: usize,
    scheme: Decomposition,
) -> Result<Vec<BosonicExponent>> {
    check_nonneg("Delta", delta)?;
    check_positive("W", w)?;
    check_positive("kT", kt)?;
    if n == 0 {
        return Err(HeomError::Parameter("number of exponents N must be at least 1".into()));
    }
    let half = w / (2.0 * kt);
    if (half / std::f64::consts::PI - (half / std::f64::consts::PI).round()).abs() < 1e-10 {
        return Err(HeomError::Singularity(format!(
            "W/(2kT) = {half} sits at a pole of cot; choose a different W or kT"
        )));
    }
    let p = poles(Flavor::Bosonic, scheme, n - 1);
    let mut out = vec![
        BosonicExponent {
            xi: C64::new(delta * w / half.tan(), 0.0),
            chi: C64::new(w, 0.0),
            part: Part::Real,
            l: 1,
        },
        BosonicExponent {
            xi: C64::new(-delta * w, 0.0),
            chi: C64::new(w, 0.0),
            part: Part::Imag,
            l: 1,
        },
    ];
    for (i, (k, z)) in p.kappa.iter().zip(&p.zeta).enumerate() {
        let zk = z * kt;
        if (w * w - zk * zk).abs() < 1e-12 * w * w {
            return Err(HeomError::Singularity(format!(
                "W = {w} coincides with a distribution pole at {zk}; change W or kT"
            )));
        }
        let xi = -2.0 * k * kt * 2.0 * delta * w * zk / (w * w - zk * zk);
        out.push(BosonicExponent {
            xi: C64::new(xi, 0.0),
            chi: C64::new(zk, 0.0),
            part: Part::Real,
            l: i + 2,
        });
    }
    Ok(out)
}

pub fn drude_lorentz_pade_boson(delta: f64, w: f64, kt: f64, n: usize) -> Result<Vec<BosonicExponent>> {
    drude_lorentz_boson(delta, w, kt, n, Decomposition::Pade)
}

/// Matsubara variant of either constructor; `mu` is ignored for bosons.
pub fn matsubara_decomposition(flavor: Flavor, strength: f64, w: f64, mu: f64, kt: f64, n: usize) -> Result<Exponents> {
    Ok(match flavor {
        Flavor::Fermionic => {
            Exponents::Fermionic(lorentzian_fermion(strength, w, mu, kt, n, Decomposition::Matsubara)?)
        }
        Flavor::Bosonic => Exponents::Bosonic(drude_lorentz_boson(strength, w, kt, n, Decomposition::Matsubara)?),
    })
}

/// `Σ coeff·e^{-rate·τ}`; fermionic baths need `nu`, bosonic ones reject it.
pub fn correlation(bath: &BathSpec, tau: f64, nu: Option<Nu>) -> Result<C64> {
    correlation_of(&bath.exponents, tau, nu)
}

pub fn correlation_of(exps: &Exponents, tau: f64, nu: Option<Nu>) -> Result<C64> {
    if !(tau >= 0.0) {
        return Err(HeomError::Parameter(format!("tau must be >= 0, got {tau}")));
    }
    match (exps, nu) {
        (Exponents::Fermionic(v), Some(nu)) => Ok(v
            .iter()
            .filter(|e| e.nu == nu)
            .map(|e| {
                if tau == 0.0 {
                    e.eta
                } else {
                    e.eta * (-e.gamma * tau).exp()
                }
            })
            .sum()),
        (Exponents::Fermionic(_), None) => Err(HeomError::Usage("fermionic correlation needs nu".into())),
        (Exponents::Bosonic(v), None) => Ok(v
            .iter()
            .map(|e| {
                let c = match e.part {
                    Part::Imag => I * e.xi,
                    _ => e.xi,
                };
                if tau == 0.0 {
                    c
                } else {
                    c * (-e.chi * tau).exp()
                }
            })
            .sum()),
        (Exponents::Bosonic(_), Some(_)) => Err(HeomError::Usage("nu is meaningless for a bosonic bath".into())),
    }
}

/// Jump operators replacing a bosonic bath at a single frequency in the Born-Markov limit:
/// `√(J(ω)(n+1))·a` and `√(J(ω)n)·a†`.
pub fn born_markov_jumps(j_omega: f64, kt: f64, omega: f64, a: &Op) -> Result<(Op, Op)> {
    check_nonneg("J(omega)", j_omega)?;
    check_positive("kT", kt)?;
    check_positive("omega", omega)?;
    let n = 1.0 / ((omega / kt).exp() - 1.0);
    let down = a * C64::new((j_omega * (n + 1.0)).sqrt(), 0.0);
    let up = a.adjoint() * C64::new((j_omega * n).sqrt(), 0.0);
    Ok((down, up))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pade_fermi_sum_rule_and_accuracy() {
        for nk in 1..8 {
            let p = pade_poles(Flavor::Fermionic, nk);
            let s: f64 = p.kappa.iter().zip(&p.zeta).map(|(k, z)| k / (z * z)).sum();
            assert!((s - 0.125).abs() < 1e-12, "nk={nk} sum={s}");
        }
        let p = pade_poles(Flavor::Fermionic, 6);
        for x in [0.5, 2.0, 5.0, 10.0] {
            let exact = 1.0 / (f64::exp(x) + 1.0);
            assert!((fermi_approx(&p, C64::new(x, 0.0)).re - exact).abs() < 1e-7);
        }
    }

    #[test]
    fn pade_bose_accuracy() {
        let p = pade_poles(Flavor::Bosonic, 4);
        for x in [0.5f64, 2.0, 5.0] {
            let exact = 1.0 / x.exp_m1();
            assert!((bose_approx(&p, C64::new(x, 0.0)).re - exact).abs() < 1e-6 * exact.max(1e-2));
        }
    }

    #[test]
    fn fermi_approximant_stays_in_unit_interval() {
        let p = pade_poles(Flavor::Fermionic, 6);
        for i in -500..=500 {
            let n = fermi_approx(&p, C64::new(i as f64 * 0.1, 0.0)).re;
            assert!((0.0..=1.0).contains(&n), "x={} n={n}", i as f64 * 0.1);
        }
    }

    #[test]
    fn lorentzian_first_term() {
        let e = lorentzian_pade_fermion(1.0, 10.0, 0.0, 0.5, 7).unwrap();
        assert_eq!(e.len(), 14);
        assert_eq!(e[0].gamma, C64::new(10.0, 0.0));
        let e = lorentzian_pade_fermion(1.0, 10.0, 2.0, 0.5, 3).unwrap();
        assert_eq!(e[0].gamma, C64::new(10.0, -2.0));
        assert_eq!(e[3].gamma, C64::new(10.0, 2.0));
        assert_eq!(e[0].eta, e[3].eta);
        assert!(lorentzian_pade_fermion(0.0, 10.0, 0.3, 0.5, 4)
            .unwrap()
            .iter()
            .all(|x| x.eta == C64::new(0.0, 0.0)));
    }

    #[test]
    fn single_term_uses_half_occupation() {
        let e = lorentzian_pade_fermion(2.0, 4.0, 0.0, 1.0, 1).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e[0].eta, C64::new(2.0 * 4.0 / 4.0, 0.0));
        let m = matsubara_decomposition(Flavor::Fermionic, 2.0, 4.0, 0.0, 1.0, 1).unwrap();
        assert_eq!(m.len(), 2);
    }

    #[test]
    fn parameter_errors() {
        assert!(lorentzian_pade_fermion(1.0, 0.0, 0.0, 0.5, 3).is_err());
        assert!(lorentzian_pade_fermion(1.0, 1.0, 0.0, -0.5, 3).is_err());
        assert!(lorentzian_pade_fermion(1.0, 1.0, 0.0, 0.5, 0).is_err());
        assert!(drude_lorentz_pade_boson(0.01, 0.2, 0.5, 0).is_err());
        let pole = 2.0 * std::f64::consts::PI * 0.5;
        assert!(matches!(
            drude_lorentz_pade_boson(0.01, pole, 0.5, 2),
            Err(HeomError::Singularity(_))
        ));
    }

    #[test]
    fn drude_first_term() {
        let e = drude_lorentz_pade_boson(0.01, 0.2, 0.5, 5).unwrap();
        assert_eq!(e.len(), 6);
        assert_eq!(e[0].chi, C64::new(0.2, 0.0));
        assert_eq!(e[1].part, Part::Imag);
        assert!((e[1].xi.re + 0.002).abs() < 1e-15);
        assert!(drude_lorentz_pade_boson(0.0, 0.2, 0.5, 3)
            .unwrap()
            .iter()
            .all(|x| x.xi.norm() == 0.0));
    }

    #[test]
    fn combined_matches_split() {
        let v = Op::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(-1.0, 0.0),
        ]));
        let b = BathSpec::bosonic("b", "V", v, drude_lorentz_pade_boson(0.05, 1.0, 1.0, 3).unwrap()).unwrap();
        let c = b.combine_real_imag();
        assert_eq!(c.exponents.len(), 3);
        for t in [0.0, 0.3, 2.0] {
            let x = correlation(&b, t, None).unwrap();
            let y = correlation(&c, t, None).unwrap();
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn correlation_usage() {
        let d = Op::from_fn(2, 2, |r, c| {
            if r == 0 && c == 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let b = BathSpec::fermionic("L", "d", d, lorentzian_pade_fermion(1.0, 10.0, 0.0, 0.5, 4).unwrap()).unwrap();
        assert!(correlation(&b, 0.1, None).is_err());
        let sum: C64 = match &b.exponents {
            Exponents::Fermionic(v) => v.iter().filter(|e| e.nu == Nu::Plus).map(|e| e.eta).sum(),
            _ => unreachable!(),
        };
        assert_eq!(correlation(&b, 0.0, Some(Nu::Plus)).unwrap(), sum);
        for t in [0.0, 0.05, 0.4, 3.0] {
            let p = correlation(&b, t, Some(Nu::Plus)).unwrap();
            let m = correlation(&b, t, Some(Nu::Minus)).unwrap();
            assert!((p - m).norm() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_bosonic_coupling_rejected() {
        let v = Op::from_fn(2, 2, |r, c| {
            if r == 0 && c == 1 {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(BathSpec::bosonic("b", "V", v, drude_lorentz_pade_boson(0.01, 0.2, 0.5, 2).unwrap()).is_err());
    }

    #[test]
    fn user_exponents_need_decay() {
        let d = Op::identity(2, 2);
        let bad = vec![
            FermionicExponent {
                eta: C64::new(1.0, 0.0),
                gamma: C64::new(0.0, 1.0),
                nu: Nu::Plus,
                h: 1,
            },
            FermionicExponent {
                eta: C64::new(1.0, 0.0),
                gamma: C64::new(1.0, 1.0),
                nu: Nu::Minus,
                h: 1,
            },
        ];
        assert!(BathSpec::fermionic("L", "d", d, bad).is_err());
    }
}
