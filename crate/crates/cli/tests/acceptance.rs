//! Acceptance report: one [PASS]/[FAIL] line per criterion, details indented below.
//!
//! `ACCEPTANCE_ONLY=1,3` runs a subset. The process exits 0 so that the report is
//! always produced by `cargo test`; set `ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use heom_cli::config::to_json;
use heom_cli::oracles::{self, Check};
use heom_cli::{parse_config, run, RunConfig, RunOptions, EXAMPLE1, EXAMPLE2};
use heom_core::io::AdoDump;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

/// Exact integers for n_max = 1..6 with K_f = 56 and no pruning.
const TABLE_COUNTS: [u128; 6] = [57, 1_597, 29_317, 396_607, 4_216_423, 36_684_859];
const THRESHOLDS: [f64; 5] = [0.0, 1e-7, 1e-6, 1e-5, 1e-4];
/// Enumerate (not just count) up to this tier.
const ENUMERATE_UP_TO: usize = 4;

const TRACE_TOL: f64 = 1e-8;
const HERMITICITY_TOL: f64 = 1e-8;
const STEADY_TOL: f64 = 1e-10;
const CROSS_METHOD_TOL: f64 = 1e-6;
/// Hubbard peaks must sit within this distance of ε and ε + U.
const HUBBARD_TOL: f64 = 0.5;
/// PSD peak distance from ω_c.
const PSD_TOL: f64 = 0.05;
const ZERO_BIAS_TOL: f64 = 1e-10;

struct Criterion {
    id: usize,
    title: &'static str,
    checks: Vec<Check>,
    notes: Vec<String>,
    secs: f64,
}

impl Criterion {
    fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }

    fn print(&self) {
        let tag = if self.pass() { "[PASS]" } else { "[FAIL]" };
        println!("{tag} criterion {}: {} ({:.1} s)", self.id, self.title, self.secs);
        for c in &self.checks {
            println!("    {}", c.line());
        }
        for n in &self.notes {
            println!("    note: {n}");
        }
    }
}

fn edit(text: &str, f: impl FnOnce(&mut Value)) -> RunConfig {
    let mut v: Value = serde_json::from_str(text).unwrap();
    f(&mut v);
    parse_config(&v.to_string()).unwrap_or_else(|e| panic!("acceptance config: {e}"))
}

struct Out {
    _dir: tempfile::TempDir,
    path: PathBuf,
    manifest: Value,
}

impl Out {
    fn csv(&self, file: &str) -> Vec<Vec<f64>> {
        let text = std::fs::read_to_string(self.path.join(file)).unwrap();
        text.lines()
            .skip(1)
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect()
    }

    fn task(&self, name: &str) -> &Value {
        self.manifest["tasks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|t| t["name"] == name)
            .unwrap()
    }

    fn files(&self) -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(&self.path)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.file_name().unwrap() != "manifest.json")
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read(&p).unwrap(),
                )
            })
            .collect()
    }
}

fn execute(cfg: &RunConfig, threads: usize) -> Out {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().to_path_buf();
    let s = run(
        cfg,
        &RunOptions {
            out: Some(path.clone()),
            threads: Some(threads),
            verbose: false,
        },
    )
    .unwrap_or_else(|e| panic!("run failed: {e}\n{}", to_json(cfg)));
    Out {
        _dir: dir,
        path,
        manifest: s.manifest,
    }
}

/// Example 1 at a reduced tier with the given tasks.
fn example1(n_exp: usize, n_max: usize, i_th: f64, phi: f64, tasks: Value) -> RunConfig {
    edit(EXAMPLE1, |v| {
        for b in v["baths"].as_array_mut().unwrap() {
            b["n"] = n_exp.into();
        }
        v["truncation"] = json!({"m_max": 0, "n_max": n_max, "i_th": i_th});
        v["phi"] = phi.into();
        v["tasks"] = tasks;
    })
}

/// Example 2 at a desk tier.
fn example2(tasks: Value) -> RunConfig {
    edit(EXAMPLE2, |v| {
        v["system"]["n_photon"] = 4.into();
        v["baths"][0]["n"] = 2.into();
        v["baths"][1]["n"] = 2.into();
        v["baths"][2]["n"] = 2.into();
        v["truncation"] = json!({"m_max": 2, "n_max": 2, "i_th": 1e-6});
        v["tasks"] = tasks;
    })
}

/// Spinless level with one phonon bath and two single-exponent leads.
fn small_mixed(tasks: Value) -> RunConfig {
    edit(EXAMPLE1, |v| {
        v["system"] = json!({"builder": "fermion_level", "eps": 0.4, "spins": 1});
        v["baths"] = json!([
            {"label": "B", "flavor": "bosonic", "family": "drude_lorentz", "coupling": "n",
             "delta": 0.1, "width": 0.5, "kt": 0.5, "n": 1},
            {"label": "L", "flavor": "fermionic", "family": "lorentzian", "coupling": "d",
             "gamma": 0.5, "width": 3.0, "mu": 1.0, "kt": 0.5, "n": 1},
            {"label": "R", "flavor": "fermionic", "family": "lorentzian", "coupling": "d",
             "gamma": 0.5, "width": 3.0, "mu": -1.0, "kt": 0.5, "n": 1}
        ]);
        v["truncation"] = json!({"m_max": 2, "n_max": 2});
        v["tasks"] = tasks;
        v["output"]["formats"] = json!(["ados"]);
    })
}

fn grid(from: f64, to: f64, step: f64) -> Value {
    let points = ((to - from) / step).round() as usize + 1;
    json!({"from": from, "to": to, "points": points})
}

fn argmax(rows: &[Vec<f64>], col: usize) -> usize {
    (0..rows.len()).fold(0, |b, i| if rows[i][col] > rows[b][col] { i } else { b })
}

/// Local maxima of column 1, excluding the grid ends.
fn local_maxima(rows: &[Vec<f64>]) -> Vec<f64> {
    rows.windows(3)
        .filter(|w| w[1][1] > w[0][1] && w[1][1] > w[2][1])
        .map(|w| w[1][0])
        .collect()
}

fn counts() -> Criterion {
    use heom_core::hierarchy::{count_space, enumerate_space, Truncation};
    let cfg = example1(7, 1, 0.0, 0.0, json!([{"kind": "steadystate"}]));
    let baths = heom_cli::build::build_baths(&cfg, &heom_cli::build::build_model(&cfg.system).unwrap(), 0.0).unwrap();
    let table = heom_cli::build::exponent_table(&baths).unwrap();
    let mut checks = vec![Check::flag(
        format!("K_f = {}", table.fermionic.len()),
        table.fermionic.len() == 56,
    )];
    for (i, &want) in TABLE_COUNTS.iter().enumerate() {
        let n = i + 1;
        let got = count_space(&table, Truncation::new(0, n, 0.0));
        let mut label = format!("n_max={n}: counted {got}, expected {want}");
        let mut ok = got == want;
        if n <= ENUMERATE_UP_TO {
            let len = enumerate_space(table.clone(), Truncation::new(0, n, 0.0))
                .unwrap()
                .len() as u128;
            label += &format!(", enumerated {len}");
            ok &= len == want;
        }
        checks.push(Check::flag(label, ok));
    }
    // the pruned columns depend on an unstated bias, so only their ordering is checked
    let mut notes = Vec::new();
    for phi in [0.0, 4.0] {
        let baths =
            heom_cli::build::build_baths(&cfg, &heom_cli::build::build_model(&cfg.system).unwrap(), phi).unwrap();
        let table = heom_cli::build::exponent_table(&baths).unwrap();
        for n in 1..=4 {
            let row: Vec<u128> = THRESHOLDS
                .iter()
                .map(|&th| count_space(&table, Truncation::new(0, n, th)))
                .collect();
            checks.push(Check::flag(
                format!("phi={phi}, n_max={n}: non-increasing over I_th = {THRESHOLDS:?}"),
                row.windows(2).all(|w| w[1] <= w[0]),
            ));
            notes.push(format!("phi={phi}, n_max={n}: {row:?}"));
        }
    }
    Criterion {
        id: 1,
        title: "ADO counts",
        checks,
        notes,
        secs: 0.0,
    }
}

fn correlation() -> Criterion {
    let checks = oracles::correlation().unwrap();
    let notes = vec![
        "the configured orders miss 1e-4: the fermionic error sits at short tau and decays slowly with N, \
         the bosonic one is truncation and drops below 1e-4 from N=7"
            .into(),
    ];
    Criterion {
        id: 2,
        title: "bath correlation reconstructions",
        checks,
        notes,
        secs: 0.0,
    }
}

fn generator() -> Criterion {
    let all = oracles::generator().unwrap();
    let worst = all.iter().map(|c| c.value).fold(0.0, f64::max);
    let failed: Vec<Check> = all.iter().filter(|c| !c.pass).cloned().collect();
    let mut checks = vec![Check::below(
        format!("{} toy spaces, worst relative entry difference", all.len()),
        worst,
        oracles::GENERATOR_TOL,
    )];
    checks.extend(failed);
    Criterion {
        id: 3,
        title: "generator vs ordered-vector construction",
        checks,
        notes: vec![],
        secs: 0.0,
    }
}

fn exact_physics() -> Criterion {
    let mut checks: Vec<Check> = oracles::resonant_level()
        .unwrap()
        .into_iter()
        .filter(|c| !c.label.contains("I_R"))
        .collect();
    checks.extend(oracles::dephasing().unwrap());
    checks.extend(oracles::gibbs().unwrap());
    Criterion {
        id: 4,
        title: "exactly solvable models",
        checks,
        notes: vec![],
        secs: 0.0,
    }
}

fn invariants() -> Criterion {
    let mut checks = Vec::new();
    let times = grid(0.0, 10.0, 0.5);
    let mixed = small_mixed(json!([
        {"kind": "evolve", "name": "ode", "times": times, "rtol": 1e-10, "atol": 1e-12},
        {"kind": "evolve", "name": "prop", "method": "propagator", "times": times},
        {"kind": "steadystate"}
    ]));
    let e1 = example1(
        3,
        2,
        1e-7,
        1.0,
        json!([
            {"kind": "evolve", "times": times, "observables": ["n_up"]},
            {"kind": "dos", "operator": "d_up", "omega": grid(-6.0, 6.0, 1.0)},
            {"kind": "conductance", "bath": "L", "phi": grid(0.0, 2.0, 0.5)}
        ]),
    );
    let e2 = example2(json!([
        {"kind": "steadystate"},
        {"kind": "psd", "operator": "a", "omega": grid(0.8, 1.2, 0.1)}
    ]));

    let m1 = execute(&mixed, 1);
    let x1 = execute(&e1, 1);
    let y1 = execute(&e2, 1);
    for (name, out, task) in [
        ("mixed model ODE", &m1, "ode"),
        ("mixed model propagator", &m1, "prop"),
        ("example 1 ODE", &x1, "evolve"),
    ] {
        let t = out.task(task);
        checks.push(Check::below(
            format!("{name}: trace drift"),
            t["max_trace_error"].as_f64().unwrap(),
            TRACE_TOL,
        ));
        checks.push(Check::below(
            format!("{name}: root Hermiticity"),
            t["max_hermiticity_error"].as_f64().unwrap(),
            HERMITICITY_TOL,
        ));
    }
    let residuals = [
        ("mixed model", m1.task("steadystate")["residual"].as_f64().unwrap()),
        ("example 1", x1.task("dos")["steady_residual"].as_f64().unwrap()),
        (
            "example 1 bias sweep",
            x1.task("conductance")["max_steady_residual"].as_f64().unwrap(),
        ),
        ("example 2", y1.task("steadystate")["residual"].as_f64().unwrap()),
    ];
    for (name, r) in residuals {
        checks.push(Check::below(format!("{name}: steady-state residual"), r, STEADY_TOL));
    }

    let load = |f: &str| AdoDump::decode(&std::fs::read(m1.path.join(f)).unwrap()).unwrap();
    let (ode, prop) = (load("ode.ados"), load("prop.ados"));
    let mut diff = 0.0f64;
    for ((ta, a), (tb, b)) in ode.frames.iter().zip(&prop.frames) {
        assert_eq!(ta, tb);
        diff = a.iter().zip(b).fold(diff, |d, (x, y)| d.max((x - y).norm()));
    }
    checks.push(Check::below(
        format!(
            "ODE vs propagator, every ADO entry, {} frames of {} ADOs",
            ode.frames.len(),
            ode.n_ados
        ),
        diff,
        CROSS_METHOD_TOL,
    ));

    for (name, cfg, single) in [
        ("mixed model", &mixed, &m1),
        ("example 1", &e1, &x1),
        ("example 2", &e2, &y1),
    ] {
        let many = execute(cfg, 4);
        let (a, b) = (single.files(), many.files());
        let same = a == b;
        checks.push(Check::flag(
            format!("{name}: {} output files byte-identical with 1 and 4 threads", a.len()),
            same,
        ));
    }
    Criterion {
        id: 5,
        title: "structural invariants",
        checks,
        notes: vec![],
        secs: 0.0,
    }
}

/// Coarse grid, then a finer one around each candidate maximum.
fn refine_peaks(
    base: impl Fn(Value) -> RunConfig,
    op: &str,
    kind: &str,
    coarse: Value,
    half: f64,
    step: f64,
    mut pick: impl FnMut(&[f64]) -> Vec<f64>,
) -> (Vec<f64>, f64) {
    let out = execute(
        &base(json!([{"kind": kind, "name": "coarse", "operator": op, "omega": coarse}])),
        1,
    );
    let rows = out.csv("coarse.csv");
    let mut worst = out.task("coarse")["steady_residual"].as_f64().unwrap();
    let mut peaks = Vec::new();
    for c in pick(&local_maxima(&rows)) {
        let out = execute(
            &base(json!([{"kind": kind, "name": "fine", "operator": op, "omega": grid(c - half, c + half, step)}])),
            1,
        );
        let fine = out.csv("fine.csv");
        worst = worst.max(out.task("fine")["steady_residual"].as_f64().unwrap());
        peaks.push(fine[argmax(&fine, 1)][0]);
    }
    (peaks, worst)
}

fn features() -> Criterion {
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    // Kondo spectrum and zero-bias conductance, N_α = 3, n_max = 3
    let fig3 = |tasks| example1(3, 3, 1e-7, 0.0, tasks);
    let mut maxima = Vec::new();
    let (peaks, res) = refine_peaks(fig3, "d_up", "dos", grid(-8.0, 8.0, 0.5), 0.5, 0.05, |m| {
        maxima = m.to_vec();
        let lower = m.iter().copied().rfind(|&w| w < -2.0);
        let upper = m.iter().copied().find(|&w| w > 2.0);
        lower.into_iter().chain(upper).collect()
    });
    notes.push(format!("DOS local maxima on the coarse grid: {maxima:?}"));
    notes.push(
        "the side peaks are converged in N_alpha and move inward only slowly with n_max (-6.0 at n_max=2); \
         hybridization shifts the levels outward and the broadening shrinks with |omega|, so at this tier \
         they sit further from eps and eps + U than 0.5"
            .into(),
    );
    checks.push(Check::flag(
        "DOS has a central maximum at omega = 0",
        maxima.iter().any(|w| w.abs() < 1e-12),
    ));
    let lower = peaks.iter().copied().find(|&w| w < 0.0).unwrap_or(f64::NAN);
    let upper = peaks.iter().copied().find(|&w| w > 0.0).unwrap_or(f64::NAN);
    checks.push(Check::below(
        format!("lower Hubbard peak at {lower:.2}, distance from -5"),
        (lower + 5.0).abs(),
        HUBBARD_TOL,
    ));
    checks.push(Check::below(
        format!("upper Hubbard peak at {upper:.2}, distance from +5"),
        (upper - 5.0).abs(),
        HUBBARD_TOL,
    ));
    let mut worst = res;

    let g = execute(
        &fig3(json!([{"kind": "conductance", "bath": "L", "phi": grid(-4.0, 4.0, 0.5)}])),
        1,
    );
    let rows = g.csv("conductance.csv");
    worst = worst.max(g.task("conductance")["max_steady_residual"].as_f64().unwrap());
    let at = rows[argmax(&rows, 2)][0];
    checks.push(Check::flag(
        format!("conductance maximum at phi = {at} over [-4, 4]"),
        at == 0.0,
    ));

    // cavity PSD, N_photon = 4, N_β = N_α = 2, m_max = n_max = 2
    let (psd_peaks, res) = refine_peaks(example2, "a", "psd", grid(0.5, 1.5, 0.1), 0.1, 0.01, |m| {
        let top = m
            .iter()
            .copied()
            .min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs()));
        top.into_iter().collect()
    });
    worst = worst.max(res);
    let p = psd_peaks.first().copied().unwrap_or(f64::NAN);
    checks.push(Check::below(
        format!("PSD peak at {p:.2}, distance from omega_c = 1"),
        (p - 1.0).abs(),
        PSD_TOL,
    ));

    // current against the importance threshold, N_α = 4, n_max = 3; the second sequence
    // is one where every step prunes at this tier
    for thresholds in [[1e-5, 1e-7, 0.0], [1e-4, 1e-5, 0.0]] {
        for phi in [1.0, 2.0, 3.0, 4.0] {
            let mut currents = Vec::new();
            let mut sizes = Vec::new();
            for &th in &thresholds {
                let out = execute(
                    &example1(4, 3, th, phi, json!([{"kind": "current", "baths": ["L"]}])),
                    1,
                );
                worst = worst.max(out.task("current")["steady_residual"].as_f64().unwrap());
                currents.push(out.csv("current.csv")[0][1]);
                sizes.push(out.manifest["ado_count"].as_u64().unwrap());
            }
            let dev: Vec<f64> = currents.iter().map(|c| (c - currents[2]).abs()).collect();
            let steps: Vec<String> = thresholds
                .iter()
                .zip(&dev)
                .zip(&sizes)
                .map(|((t, d), n)| format!("{t:e}: {d:.2e} ({n} ADOs)"))
                .collect();
            checks.push(Check::flag(
                format!(
                    "phi={phi}: |I - I(I_th=0)| non-increasing, first step strict [{}]",
                    steps.join(", ")
                ),
                dev[0] > dev[1] && dev[1] >= dev[2],
            ));
            let note = format!(
                "I_th={:e} prunes nothing at this tier, so its deviation is zero by construction",
                thresholds[1]
            );
            if sizes[1] == sizes[2] && !notes.contains(&note) {
                notes.push(note);
            }
        }
    }
    checks.push(Check::below(
        "worst steady-state residual in this criterion",
        worst,
        STEADY_TOL,
    ));
    Criterion {
        id: 6,
        title: "Kondo, cavity and pruning features at desk tier",
        checks,
        notes,
        secs: 0.0,
    }
}

fn conservation() -> Criterion {
    let mut checks: Vec<Check> = oracles::resonant_level()
        .unwrap()
        .into_iter()
        .filter(|c| c.label.contains("I_R"))
        .collect();
    let both = json!([{"kind": "current", "baths": ["L", "R"]}]);
    let mut runs: Vec<(String, Out)> = Vec::new();
    for phi in [0.0, 1.0, 4.0] {
        runs.push((
            format!("example 1, phi={phi}"),
            execute(&example1(3, 3, 1e-7, phi, both.clone()), 1),
        ));
    }
    runs.push(("example 2, phi=6".into(), execute(&example2(both.clone()), 1)));
    for (name, out) in &runs {
        let r = &out.csv("current.csv")[0];
        checks.push(Check::below(
            format!("{name}: |I_L + I_R| (I_L = {:.6e})", r[1]),
            (r[1] + r[2]).abs(),
            oracles::CONSERVATION_TOL,
        ));
        if r[0] == 0.0 {
            checks.push(Check::below(
                format!("{name}: |I_L| at zero bias"),
                r[1].abs(),
                ZERO_BIAS_TOL,
            ));
        }
    }
    Criterion {
        id: 7,
        title: "current conservation",
        checks,
        notes: vec![],
        secs: 0.0,
    }
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|s| s == "1");
    let all: [(usize, fn() -> Criterion); 7] = [
        (1, counts),
        (2, correlation),
        (3, generator),
        (4, exact_physics),
        (5, invariants),
        (6, features),
        (7, conservation),
    ];
    let mut failed = Vec::new();
    let mut ran = 0;
    for (id, f) in all {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t = Instant::now();
        let mut c = f();
        c.secs = t.elapsed().as_secs_f64();
        c.print();
        ran += 1;
        if !c.pass() {
            failed.push(id);
        }
    }
    println!(
        "acceptance: {} of {ran} criteria pass; failing: {failed:?}",
        ran - failed.len()
    );
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
