use heom_core::bath::{lorentzian_pade_fermion, BathSpec};
use heom_core::hierarchy::{enumerate_space, ExponentTable, Truncation};
use heom_core::liouvillian::{build_heomls, thermal_jumps, Parity, SystemSpec};
use heom_core::models::{boson_mode, fermion_level};
use heom_core::observables::{dos, psd};
use heom_core::oracle::suite::*;
use heom_core::solvers::{steadystate, LinearMethod};
use heom_core::Op;
use std::sync::Arc;

#[test]
fn resonant_level_dos_is_exact_at_every_tier() {
    let grid: Vec<f64> = (0..=80).map(|i| -20.0 + 0.5 * i as f64).collect();
    for (n, n_max) in [(3, 1), (7, 1), (3, 2), (7, 2)] {
        let (err, res) = resonant_level_dos_error(-1.0, (1.0, 10.0, 0.0), 0.5, n, n_max, &grid).unwrap();
        assert!(err < 1e-12, "N={n} n_max={n_max}: {err:e}");
        assert!(res < 1e-10);
    }
    // a biased lead only moves the hybridization centre
    let (err, _) = resonant_level_dos_error(0.5, (0.7, 5.0, 1.5), 0.3, 4, 1, &grid).unwrap();
    assert!(err < 1e-12, "{err:e}");
}

#[test]
fn resonant_level_current_matches_landauer() {
    let (il, ir, want) = resonant_level_currents(0.3, (1.0, 10.0, 1.0), (0.7, 8.0, -1.0), 0.5, 7, 2).unwrap();
    assert!((il - want).abs() / want < 1e-6, "{il} vs {want}");
    assert!((il + ir).abs() < 1e-12);
    // one tier is not enough for the density matrix
    let (il1, _, _) = resonant_level_currents(0.3, (1.0, 10.0, 1.0), (0.7, 8.0, -1.0), 0.5, 7, 1).unwrap();
    assert!((il1 - want).abs() / want > 0.1);
}

#[test]
fn pure_dephasing_converges_in_tier() {
    let times: Vec<f64> = (0..=40).map(|i| 0.5 * i as f64).collect();
    let e3 = dephasing_error(1.0, 0.01, 0.2, 0.5, 5, 3, &times).unwrap();
    let e5 = dephasing_error(1.0, 0.01, 0.2, 0.5, 5, 5, &times).unwrap();
    assert!(e5 < 2e-4, "{e5:e}");
    assert!(e5 < e3 / 10.0);
}

#[test]
fn lindblad_qubit_relaxes_to_gibbs() {
    for (w, rate, kt) in [(1.0, 0.1, 0.5), (2.0, 0.5, 3.0)] {
        assert!(lindblad_gibbs_error(w, rate, kt).unwrap() < 1e-12);
    }
}

#[test]
fn damped_cavity_psd_is_lorentzian() {
    let (wc, kappa, n_th, n_fock) = (1.0, 0.05, 0.1, 8);
    let mode = boson_mode(wc, n_fock).unwrap();
    let a = mode.a.unwrap();
    let (down, up) = thermal_jumps(&a, kappa, n_th);
    let space = Arc::new(enumerate_space(ExponentTable::default(), Truncation::new(0, 0, 0.0)).unwrap());
    let m = build_heomls(&SystemSpec::constant(mode.h).unwrap(), &[], space, Parity::Even)
        .unwrap()
        .add_lindblad(&down)
        .unwrap()
        .add_lindblad(&up)
        .unwrap();
    let (ss, _) = steadystate(&m).unwrap();
    let grid: Vec<f64> = (0..=60).map(|i| 0.85 + 0.005 * i as f64).collect();
    let s = psd(&m, &ss, &a, &grid, &LinearMethod::Direct).unwrap();
    let half = kappa / 2.0;
    let peak = n_th / half / std::f64::consts::PI;
    for (w, v) in grid.iter().zip(&s.values) {
        let want = n_th * half / (half * half + (w - wc) * (w - wc)) / std::f64::consts::PI;
        assert!((v - want).abs() < 0.05 * peak, "omega {w}: {v} vs {want}");
    }
}

#[test]
fn anderson_dos_sum_rule() {
    let lvl = fermion_level(-2.0, 4.0, 2).unwrap();
    let mut baths = Vec::new();
    for s in 0..2 {
        baths.push(
            BathSpec::fermionic(
                "L",
                "",
                lvl.d[s].clone(),
                lorentzian_pade_fermion(1.0, 5.0, 0.0, 0.5, 2).unwrap(),
            )
            .unwrap(),
        );
    }
    let space =
        Arc::new(enumerate_space(ExponentTable::from_baths(&baths).unwrap(), Truncation::new(0, 2, 0.0)).unwrap());
    let sys = SystemSpec::constant(lvl.h.clone()).unwrap();
    let even = build_heomls(&sys, &baths, space.clone(), Parity::Even).unwrap();
    let odd = build_heomls(&sys, &baths, space, Parity::Odd).unwrap();
    let (ss, _) = steadystate(&even).unwrap();
    let h = 0.05;
    let grid: Vec<f64> = (0..=2400).map(|i| -60.0 + h * i as f64).collect();
    let a = dos(&odd, &ss, &lvl.d[0], &grid, &LinearMethod::Direct).unwrap();
    let total: f64 = a.values.iter().sum::<f64>() * h;
    assert!((total - 1.0).abs() < 2e-2, "{total}");
    assert!(a.values.iter().all(|&v| v > -1e-10));
    // particle-hole symmetric point
    let n = a.values.len();
    for i in 0..n {
        assert!((a.values[i] - a.values[n - 1 - i]).abs() < 1e-9);
    }
}

#[test]
fn psd_of_zero_operator_vanishes() {
    let lvl = fermion_level(0.0, 0.0, 1).unwrap();
    let baths = [BathSpec::fermionic(
        "L",
        "",
        lvl.d[0].clone(),
        lorentzian_pade_fermion(1.0, 5.0, 0.0, 0.5, 2).unwrap(),
    )
    .unwrap()];
    let space =
        Arc::new(enumerate_space(ExponentTable::from_baths(&baths).unwrap(), Truncation::new(0, 2, 0.0)).unwrap());
    let even = build_heomls(
        &SystemSpec::constant(lvl.h.clone()).unwrap(),
        &baths,
        space,
        Parity::Even,
    )
    .unwrap();
    let (ss, _) = steadystate(&even).unwrap();
    let s = psd(&even, &ss, &Op::zeros(2, 2), &[0.0, 1.0], &LinearMethod::Direct).unwrap();
    assert_eq!(s.values, vec![0.0, 0.0]);
}
