use heom_cli::config::{to_json, Family, SystemConfig, TaskConfig};
use heom_cli::describe::{describe, parse_ado_ref, AdoRef};
use heom_cli::{count_only, parse_config, run, RunConfig, RunOptions, EXAMPLE1, EXAMPLE2};
use heom_core::liouvillian::Parity;
use serde_json::Value;
use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_heom"))
}

fn edit(text: &str, f: impl FnOnce(&mut Value)) -> String {
    let mut v: Value = serde_json::from_str(text).unwrap();
    f(&mut v);
    v.to_string()
}

/// Example 1 at N=3, n_max=2 with short grids.
fn small_example1() -> RunConfig {
    let text = edit(EXAMPLE1, |v| {
        for b in v["baths"].as_array_mut().unwrap() {
            b["n"] = 3.into();
        }
        v["truncation"]["n_max"] = 2.into();
        v["tasks"][0]["omega"]["points"] = 21.into();
        v["tasks"][1]["phi"]["points"] = 4.into();
    });
    parse_config(&text).unwrap()
}

#[test]
fn bundled_configs_carry_the_model_parameters() {
    let c = parse_config(EXAMPLE1).unwrap();
    assert_eq!(
        c.system,
        SystemConfig::FermionLevel {
            eps: -5.0,
            u: 10.0,
            spins: 2
        }
    );
    assert_eq!(c.baths.len(), 4);
    for b in &c.baths {
        assert_eq!(b.family, Family::Lorentzian);
        assert_eq!(
            (b.gamma, b.width, b.kt, b.n),
            (Some(1.0), Some(10.0), Some(0.5), Some(7))
        );
    }
    assert_eq!(
        (c.truncation.m_max, c.truncation.n_max, c.truncation.i_th),
        (0, 4, 1e-7)
    );

    let c = parse_config(EXAMPLE2).unwrap();
    assert_eq!(
        c.system,
        SystemConfig::ChargeCavity {
            eps: -3.0,
            omega_c: 1.0,
            g: 0.5,
            n_photon: 6
        }
    );
    let b = &c.baths[0];
    assert_eq!(
        (b.delta, b.width, b.kt, b.n),
        (Some(0.01), Some(0.2), Some(0.5), Some(5))
    );
    assert_eq!(
        (c.truncation.m_max, c.truncation.n_max, c.truncation.i_th),
        (4, 3, 1e-6)
    );
    assert_eq!(c.phi, 6.0);
}

#[test]
fn serialized_config_parses_back_to_itself() {
    for text in [EXAMPLE1, EXAMPLE2] {
        let c = parse_config(text).unwrap();
        let again = parse_config(&to_json(&c)).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.clone().validated().unwrap(), c);
    }
}

#[test]
fn defaults_are_filled() {
    let c = parse_config(EXAMPLE1).unwrap();
    assert!(c.baths.iter().all(|b| b.mu.is_none() && b.bias.is_some()));
    let names: Vec<&str> = c.tasks.iter().map(|t| t.name()).collect();
    assert_eq!(names, ["dos", "conductance"]);
    let c = parse_config(&edit(EXAMPLE1, |v| {
        for b in v["baths"].as_array_mut().unwrap() {
            b.as_object_mut().unwrap().remove("bias");
        }
    }))
    .unwrap();
    assert!(c.baths.iter().all(|b| b.mu == Some(0.0)));
}

#[test]
fn bad_configs_are_rejected_with_a_path() {
    let cases: Vec<(String, &str)> = vec![
        (edit(EXAMPLE1, |v| v["tasks"] = Value::Array(vec![])), "tasks"),
        (edit(EXAMPLE1, |v| v["baths"][2]["colour"] = "red".into()), "baths[2]"),
        (edit(EXAMPLE1, |v| v["system"]["spin"] = 1.into()), "system"),
        (edit(EXAMPLE1, |v| v["tasks"][1]["extra"] = 1.into()), "tasks[1]"),
        (
            edit(EXAMPLE1, |v| v["truncation"]["n_max"] = (-1).into()),
            "truncation.n_max",
        ),
        (edit(EXAMPLE1, |v| v["tasks"][1]["phi"]["points"] = 2.into()), "points"),
        (edit(EXAMPLE1, |v| v["tasks"][1]["name"] = "dos".into()), "dos"),
        ("{".into(), ""),
    ];
    for (text, needle) in cases {
        let e = parse_config(&text).unwrap_err();
        assert!(e.is_config(), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains(needle), "{e} should mention {needle}");
    }
}

#[test]
fn count_only_matches_the_closed_form() {
    let full = edit(EXAMPLE1, |v| v["truncation"]["i_th"] = 0.0.into());
    assert_eq!(count_only(&parse_config(&full).unwrap()).unwrap(), 396_607);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    std::fs::write(&path, full).unwrap();
    let out = bin().arg("run").arg(&path).arg("--count-only").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "396607");
}

fn read(dir: &Path, f: &str) -> String {
    std::fs::read_to_string(dir.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"))
}

#[test]
fn small_run_writes_outputs_and_is_thread_independent() {
    let cfg = small_example1();
    let d1 = tempfile::tempdir().unwrap();
    let d4 = tempfile::tempdir().unwrap();
    let s1 = run(
        &cfg,
        &RunOptions {
            out: Some(d1.path().into()),
            threads: Some(1),
            verbose: false,
        },
    )
    .unwrap();
    run(
        &cfg,
        &RunOptions {
            out: Some(d4.path().into()),
            threads: Some(4),
            verbose: false,
        },
    )
    .unwrap();

    assert_eq!(s1.manifest["status"], "ok");
    assert_eq!(s1.manifest["threads"], 1);
    assert_eq!(s1.manifest["system_dim"], 4);
    for f in ["dos.csv", "conductance.csv"] {
        assert_eq!(
            read(d1.path(), f),
            read(d4.path(), f),
            "{f} differs across thread counts"
        );
    }
    let dos = read(d1.path(), "dos.csv");
    let mut lines = dos.lines();
    assert_eq!(lines.next(), Some("omega,value"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 21);
    assert_eq!(rows[0][0], -10.0);
    assert_eq!(rows[20][0], 10.0);
    assert!(rows.iter().all(|r| r[1] > 0.0));

    let g = read(d1.path(), "conductance.csv");
    assert!(g.starts_with("phi,current,conductance\n"));
    let first: Vec<f64> = g
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!(first[1].abs() < 1e-10, "current at zero bias {}", first[1]);
    assert!(!d1.path().join("conductance.sweep.csv").exists());
    let leftovers: Vec<_> = std::fs::read_dir(d1.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn evolve_and_steady_outputs() {
    let text = edit(EXAMPLE1, |v| {
        v["system"] = serde_json::json!({"builder": "fermion_level", "eps": 0.5, "spins": 1});
        v["baths"] = serde_json::json!([
            {"label": "L", "flavor": "fermionic", "family": "lorentzian", "coupling": "d",
             "gamma": 0.5, "width": 5.0, "mu": 1.0, "kt": 0.5, "n": 2},
            {"label": "R", "flavor": "fermionic", "family": "lorentzian", "coupling": "d",
             "gamma": 0.5, "width": 5.0, "mu": -1.0, "kt": 0.5, "n": 2}
        ]);
        v["truncation"] = serde_json::json!({"n_max": 2});
        v["tasks"] = serde_json::json!([
            {"kind": "evolve", "times": {"from": 0.0, "to": 2.0, "points": 5}, "observables": ["n"]},
            {"kind": "evolve", "name": "prop", "method": "propagator", "times": {"from": 0.0, "to": 2.0, "points": 5}},
            {"kind": "steadystate", "observables": ["n"]},
            {"kind": "current"}
        ]);
        v["output"]["formats"] = serde_json::json!(["ados", "coo"]);
    });
    let cfg = parse_config(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let s = run(
        &cfg,
        &RunOptions {
            out: Some(dir.path().into()),
            threads: Some(1),
            verbose: false,
        },
    )
    .unwrap();
    let ev = read(dir.path(), "evolve.csv");
    assert!(ev.starts_with("t,n_re,n_im,trace_error,hermiticity_error\n"), "{ev}");
    for l in ev.lines().skip(1) {
        let r: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(r[3] < 1e-8 && r[4] < 1e-8, "{l}");
    }
    assert_eq!(read(dir.path(), "prop.csv").lines().count(), 6);
    assert!(read(dir.path(), "steadystate.csv").starts_with("row,col,re,im\n"));
    let cur = read(dir.path(), "current.csv");
    let r: Vec<f64> = cur
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(|x| x.parse().unwrap())
        .collect();
    assert!((r[1] + r[2]).abs() < 1e-8, "{cur}");
    assert!(r[1] > 0.0);
    assert!(read(dir.path(), "heomls_even.coo").len() > 100);
    assert!(std::fs::read_dir(dir.path()).unwrap().any(|e| e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".ados")));
    assert_eq!(s.manifest["tasks"].as_array().unwrap().len(), 4);
}

#[test]
fn describe_reports_root_neighbors_and_pruned_keys() {
    let cfg = parse_config(EXAMPLE1).unwrap();
    let root = describe(&cfg, &AdoRef::Flat(0), Parity::Even).unwrap();
    assert!(root.contains("index: 0 of"));
    assert!(root.contains("importance: 1.000000e0"));
    assert!(root.contains("root"));

    let first = describe(&cfg, &AdoRef::Flat(1), Parity::Even).unwrap();
    assert!(first.contains("tier: m=0 n=1"));
    assert!(first.contains("parity: odd"));
    for f in ["alpha=", "nu=", "h=", "sigma="] {
        assert!(first.contains(f), "{first}");
    }

    let deep = parse_ado_ref("q=0,1,2,3").unwrap();
    let text = describe(&cfg, &deep, Parity::Even).unwrap();
    assert!(text.contains("pruned"), "{text}");

    assert!(describe(&cfg, &parse_ado_ref("q=1,0").unwrap(), Parity::Even)
        .unwrap_err()
        .is_config());
    assert!(describe(&cfg, &parse_ado_ref("q=0,1,2,3,4").unwrap(), Parity::Even)
        .unwrap_err()
        .is_config());
    assert!(describe(&cfg, &AdoRef::Flat(usize::MAX), Parity::Even)
        .unwrap_err()
        .is_config());
    assert!(parse_ado_ref("x=1").is_err());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, edit(EXAMPLE1, |v| v["tasks"] = Value::Array(vec![]))).unwrap();
    assert_eq!(bin().args(["run", "-q"]).arg(&bad).status().unwrap().code(), Some(2));
    assert_eq!(
        bin()
            .args(["run", "-q", "/nonexistent/x.json"])
            .status()
            .unwrap()
            .code(),
        Some(2)
    );

    let stiff = dir.path().join("stiff.json");
    let out = dir.path().join("out");
    std::fs::write(
        &stiff,
        edit(&to_json(&small_example1()), |v| {
            v["tasks"] = serde_json::json!([{"kind": "evolve", "times": {"from": 0.0, "to": 1.0, "points": 3},
                "rtol": 1e-300, "atol": 1e-300}]);
        }),
    )
    .unwrap();
    let st = bin()
        .args(["run", "-q", "--threads", "1", "--out"])
        .arg(&out)
        .arg(&stiff)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(3));
    let m: Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
    assert_eq!(m["status"], "failed");
    assert_eq!(m["failed_stage"], "task evolve");
    assert_eq!(m["exit_code"], 3);
    assert!(m["partial_outputs"].is_array());

    assert_eq!(
        bin().args(["oracle", "generator"]).output().unwrap().status.code(),
        Some(0)
    );
    assert_eq!(bin().args(["oracle", "nope"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn thread_count_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let mut cfg = small_example1();
    cfg.tasks.truncate(1);
    if let TaskConfig::Dos { omega, .. } = &mut cfg.tasks[0] {
        omega.points = 2;
    }
    cfg.threads = Some(3);
    std::fs::write(&path, to_json(&cfg)).unwrap();
    let threads = |args: &[&str], env: Option<&str>| -> u64 {
        let out = dir.path().join(format!("o{}", args.len() + env.map_or(0, |_| 10)));
        let mut c = bin();
        c.args(["run", "-q", "--out"]).arg(&out).arg(&path).args(args);
        match env {
            Some(v) => c.env("HEOM_THREADS", v),
            None => c.env_remove("HEOM_THREADS"),
        };
        assert!(c.status().unwrap().success());
        let m: Value = serde_json::from_str(&read(&out, "manifest.json")).unwrap();
        m["threads"].as_u64().unwrap()
    };
    assert_eq!(threads(&["--threads", "2"], Some("5")), 2);
    assert_eq!(threads(&[], Some("5")), 3);
    cfg.threads = None;
    std::fs::write(&path, to_json(&cfg)).unwrap();
    assert_eq!(threads(&[], Some("5")), 5);
}
