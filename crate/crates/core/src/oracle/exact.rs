//! Reference values computed without exponential expansions: direct quadrature
//! of the bath correlations, the resonant level, pure dephasing, Gibbs states.

use super::quad::{integrate, integrate_to_infinity};
use crate::bath::{drude_lorentz, lorentzian, Nu};
use crate::error::{HeomError, Result};
use crate::{Op, C64};
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);
const ABS_TOL: f64 = 1e-12;
const REL_TOL: f64 = 1e-11;
const MAX_INTERVALS: usize = 20_000;

fn fermi(x: C64) -> C64 {
    // 1/(eˣ+1), split to avoid overflow
    if x.re > 0.0 {
        let e = (-x).exp();
        e / (e + 1.0)
    } else {
        1.0 / (x.exp() + 1.0)
    }
}

/// `C^ν(τ)` of a Lorentzian lead by quadrature. The real-axis window is
/// `μ ± 60kT`; the Lorentzian tails beyond it are rotated into the complex plane.
pub fn lorentzian_correlation_quad(gamma: f64, w: f64, mu: f64, kt: f64, nu: Nu, tau: f64) -> Result<C64> {
    if !(tau >= 0.0) || !(kt > 0.0) || !(w > 0.0) {
        return Err(HeomError::Parameter("need tau >= 0, kT > 0, W > 0".into()));
    }
    let s = nu.sign();
    let g = |z: C64| -> C64 {
        let occ = match nu {
            Nu::Plus => fermi((z - mu) / kt),
            Nu::Minus => fermi(-(z - mu) / kt),
        };
        lorentzian(gamma, w, mu, z) * occ * (I * s * z * tau).exp()
    };
    let half = 60.0 * kt;
    let (a, b) = (mu - half, mu + half);
    let mid = integrate(|x| g(C64::new(x, 0.0)), a, b, ABS_TOL, REL_TOL, MAX_INTERVALS).value;
    let tail = match nu {
        // ∫_{-∞}^{a} along a + is
        Nu::Plus => -I * integrate_to_infinity(|y| g(C64::new(a, y)), 0.0, w, ABS_TOL, REL_TOL, MAX_INTERVALS).value,
        // ∫_{b}^{∞} along b - is
        Nu::Minus => -I * integrate_to_infinity(|y| g(C64::new(b, -y)), 0.0, w, ABS_TOL, REL_TOL, MAX_INTERVALS).value,
    };
    Ok((mid + tail) / (2.0 * PI))
}

/// `C(τ)` of a Drude-Lorentz bath by quadrature, `τ > 0`.
pub fn drude_lorentz_correlation_quad(delta: f64, w: f64, kt: f64, tau: f64) -> Result<C64> {
    if !(tau > 0.0) || !(kt > 0.0) || !(w > 0.0) {
        return Err(HeomError::Parameter("need tau > 0, kT > 0, W > 0".into()));
    }
    // (1/2π)[∫₀^∞ J e^{-iωτ} dω + 2∫₀^∞ J n cos ωτ dω]
    let big = 20.0 * w.max(kt);
    let j = |z: C64| drude_lorentz(delta, w, z);
    let osc = integrate(
        |x| j(C64::new(x, 0.0)) * (-I * x * tau).exp(),
        0.0,
        big,
        ABS_TOL,
        REL_TOL,
        MAX_INTERVALS,
    )
    .value
        - I * integrate_to_infinity(
            |y| {
                let z = C64::new(big, -y);
                j(z) * (-I * z * tau).exp()
            },
            0.0,
            big,
            ABS_TOL,
            REL_TOL,
            MAX_INTERVALS,
        )
        .value;
    let thermal = integrate_to_infinity(
        |x| {
            // ω·n(ω) → kT as ω → 0
            let wn = if x < 1e-8 * kt {
                kt - 0.5 * x
            } else {
                x / (x / kt).exp_m1()
            };
            C64::new(2.0 * 4.0 * delta * w * wn / (x * x + w * w) * (x * tau).cos(), 0.0)
        },
        0.0,
        kt,
        ABS_TOL,
        REL_TOL,
        MAX_INTERVALS,
    )
    .value;
    Ok((osc + thermal) / (2.0 * PI))
}

/// Dephasing exponent `Γ(t) = (4/2π)∫₀^∞ J coth(ω/2kT)(1 − cos ωt)/ω² dω`
/// for a Drude-Lorentz bath coupled through σ_z.
pub fn dephasing_exponent(delta: f64, w: f64, kt: f64, t: f64) -> f64 {
    let f = |x: f64| {
        if x == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let jw = 4.0 * delta * w / (x * x + w * w);
        // coth(x/2kT)/x, regular expansion at small x
        let r = x / (2.0 * kt);
        let coth_over_x = if r < 1e-4 {
            (1.0 / r + r / 3.0) / x
        } else {
            1.0 / (r.tanh() * x)
        };
        // (1 − cos xt) = 2 sin²(xt/2)
        let s = (0.5 * x * t).sin();
        C64::new(jw * coth_over_x * 2.0 * s * s, 0.0)
    };
    4.0 / (2.0 * PI) * integrate_to_infinity(f, 0.0, w, 1e-14, 1e-12, MAX_INTERVALS).value.re
}

/// Retarded Green's function of a single level hybridized with Lorentzian leads
/// `(Γ, W, μ)`.
pub fn resonant_level_green(eps: f64, leads: &[(f64, f64, f64)], omega: f64) -> C64 {
    let sigma: C64 = leads
        .iter()
        .map(|&(g, w, mu)| 0.5 * g * w / (C64::new(omega - mu, w)))
        .sum();
    1.0 / (omega - eps - sigma)
}

pub fn resonant_level_dos(eps: f64, leads: &[(f64, f64, f64)], omega: f64) -> f64 {
    -resonant_level_green(eps, leads, omega).im / PI
}

/// Landauer current out of lead `left` into the level, two Lorentzian leads.
pub fn resonant_level_current(eps: f64, left: (f64, f64, f64), right: (f64, f64, f64), kt: f64) -> f64 {
    let f = |x: f64| {
        let g = resonant_level_green(eps, &[left, right], x);
        let t = lorentzian(left.0, left.1, left.2, C64::new(x, 0.0)).re
            * lorentzian(right.0, right.1, right.2, C64::new(x, 0.0)).re
            * g.norm_sqr();
        let df = fermi(C64::new((x - left.2) / kt, 0.0)).re - fermi(C64::new((x - right.2) / kt, 0.0)).re;
        C64::new(t * df, 0.0)
    };
    let lo = left.2.min(right.2) - 60.0 * kt;
    let hi = left.2.max(right.2) + 60.0 * kt;
    integrate(f, lo, hi, 1e-14, 1e-12, MAX_INTERVALS).value.re / (2.0 * PI)
}

/// `e^{-H/kT}/Z` for Hermitian `H`.
pub fn gibbs_state(h: &Op, kt: f64) -> Result<Op> {
    if !(kt > 0.0) {
        return Err(HeomError::Parameter("kT must be > 0".into()));
    }
    let eig = h.clone().symmetric_eigen();
    let e0 = eig.eigenvalues.min();
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|e| (-(e - e0) / kt).exp()).collect();
    let z: f64 = weights.iter().sum();
    let n = h.nrows();
    let diag = Op::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(weights[r] / z, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Ok(&eig.eigenvectors * diag * eig.eigenvectors.adjoint())
}
