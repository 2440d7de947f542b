//! Executes the tasks of a configuration and writes CSVs plus a manifest.

use crate::build::{build_baths, build_jumps, build_model, exponent_table, to_op, truncation, Model};
use crate::config::*;
use crate::error::{CliError, ErrorKind};
use heom_core::bath::BathSpec;
use heom_core::hierarchy::{count_space, enumerate_space, HierarchySpace};
use heom_core::io::{csv_num, write_coo, AdoDump};
use heom_core::liouvillian::{build_heomls, HeomMatrix, Parity, SystemSpec};
use heom_core::observables::{conductance, current, dos, expectation, psd, reduced_density};
use heom_core::solvers::{
    evolve_expm, evolve_ode, steadystate_with, AdosVector, GmresOptions, LinearMethod, OdeOptions, SolveReport,
    DEFAULT_DROP_TOL,
};
use heom_core::{Op, C64};
use serde_json::{json, Value};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output.dir`.
    pub out: Option<PathBuf>,
    /// Overrides `threads` and `HEOM_THREADS`.
    pub threads: Option<usize>,
    /// Log progress to stderr.
    pub verbose: bool,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Value,
}

/// Thread count: flag, then config, then `HEOM_THREADS`, then all cores.
pub fn resolve_threads(flag: Option<usize>, cfg: &RunConfig) -> Result<usize, CliError> {
    if let Some(n) = flag.or(cfg.threads) {
        return if n == 0 {
            Err(CliError::config("threads must be at least 1"))
        } else {
            Ok(n)
        };
    }
    match std::env::var("HEOM_THREADS") {
        Ok(s) if !s.trim().is_empty() => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::config(format!(
                "HEOM_THREADS={s:?} is not a positive integer"
            ))),
        },
        _ => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

/// ADO count of the configured space without building it.
pub fn count_only(cfg: &RunConfig) -> Result<u128, CliError> {
    let model = build_model(&cfg.system)?;
    let baths = build_baths(cfg, &model, cfg.phi)?;
    Ok(count_space(&exponent_table(&baths)?, truncation(cfg)))
}

/// Everything that depends on the bias.
struct Sector {
    phi: f64,
    baths: Vec<BathSpec>,
    space: Arc<HierarchySpace>,
    even: HeomMatrix,
    odd: Option<HeomMatrix>,
    steady: Option<(AdosVector, SolveReport)>,
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    model: Model,
    jumps: Vec<Op>,
    out: PathBuf,
    verbose: bool,
    base: Option<Sector>,
}

fn method(s: SolverChoice) -> LinearMethod {
    match s {
        SolverChoice::Direct => LinearMethod::Direct,
        SolverChoice::Gmres => LinearMethod::Gmres(GmresOptions::default()),
    }
}

fn engine(stage: &str) -> impl Fn(heom_core::HeomError) -> CliError + '_ {
    move |e| CliError::from_engine(stage, e)
}

/// A CSV that lives under `<name>.partial` until it is complete.
struct PartialCsv {
    path: PathBuf,
    partial: PathBuf,
    w: BufWriter<File>,
    stage: String,
}

impl PartialCsv {
    fn create(dir: &Path, file: &str, header: &[String], stage: &str) -> Result<Self, CliError> {
        let path = dir.join(file);
        let partial = dir.join(format!("{file}.partial"));
        let f = File::create(&partial).map_err(|e| CliError::io(stage, e))?;
        let mut me = Self {
            path,
            partial,
            w: BufWriter::new(f),
            stage: stage.into(),
        };
        me.line(&header.join(","))?;
        Ok(me)
    }

    fn line(&mut self, s: &str) -> Result<(), CliError> {
        writeln!(self.w, "{s}")
            .and_then(|_| self.w.flush())
            .map_err(|e| CliError::io(&self.stage, e))
    }

    fn row(&mut self, vals: &[f64]) -> Result<(), CliError> {
        let s: Vec<String> = vals.iter().map(|&v| csv_num(v)).collect();
        self.line(&s.join(","))
    }

    fn finish(mut self) -> Result<PathBuf, CliError> {
        self.w.flush().map_err(|e| CliError::io(&self.stage, e))?;
        drop(self.w);
        fs::rename(&self.partial, &self.path).map_err(|e| CliError::io(&self.stage, e))?;
        Ok(self.path)
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

impl<'a> Runner<'a> {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[heom] {}", msg.as_ref());
        }
    }

    fn sector(&self, phi: f64, stage: &str) -> Result<Sector, CliError> {
        let baths = build_baths(self.cfg, &self.model, phi)?;
        let table = exponent_table(&baths)?;
        let space = Arc::new(enumerate_space(table, truncation(self.cfg)).map_err(engine(stage))?);
        let system = SystemSpec::constant(self.model.h.clone()).map_err(engine(stage))?;
        let mut even = build_heomls(&system, &baths, space.clone(), Parity::Even).map_err(engine(stage))?;
        for f in &self.jumps {
            even = even.add_lindblad(f).map_err(engine(stage))?;
        }
        Ok(Sector {
            phi,
            baths,
            space,
            even,
            odd: None,
            steady: None,
        })
    }

    fn odd(&self, sec: &mut Sector, stage: &str) -> Result<(), CliError> {
        if sec.odd.is_none() {
            let system = SystemSpec::constant(self.model.h.clone()).map_err(engine(stage))?;
            let mut odd = build_heomls(&system, &sec.baths, sec.space.clone(), Parity::Odd).map_err(engine(stage))?;
            for f in &self.jumps {
                odd = odd.add_lindblad(f).map_err(engine(stage))?;
            }
            sec.odd = Some(odd);
        }
        Ok(())
    }

    fn steady(&self, sec: &mut Sector, solver: SolverChoice, stage: &str) -> Result<(), CliError> {
        if sec.steady.is_none() {
            let r = steadystate_with(&sec.even, &method(solver)).map_err(engine(stage))?;
            self.log(format!(
                "steady state at phi={} residual {:e} ({})",
                sec.phi, r.1.residual, r.1.method
            ));
            sec.steady = Some(r);
        }
        Ok(())
    }

    fn wants(&self, f: Format) -> bool {
        self.cfg.output.formats.contains(&f)
    }

    fn write_dump(
        &self,
        file: &str,
        frames: Vec<(f64, Vec<C64>)>,
        like: &AdosVector,
        stage: &str,
    ) -> Result<String, CliError> {
        let dump = AdoDump {
            parity: like.parity,
            n_ados: like.n_ados(),
            d: like.d,
            frames,
        };
        let bytes = dump.encode().map_err(engine(stage))?;
        fs::write(self.out.join(file), bytes).map_err(|e| CliError::io(stage, e))?;
        Ok(file.to_string())
    }

    fn initial(&self, init: &InitialState, stage: &str) -> Result<Op, CliError> {
        let d = self.model.dim();
        match init {
            InitialState::Named(s) if s == "ground" => {
                let eig = self.model.h.clone().symmetric_eigen();
                let (k, _) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, &e)| if e < acc.1 - 1e-12 { (i, e) } else { acc },
                    );
                let v = eig.eigenvectors.column(k).into_owned();
                Ok(&v * v.adjoint())
            }
            InitialState::Named(s) if s == "mixed" => Ok(Op::identity(d, d) * C64::new(1.0 / d as f64, 0.0)),
            InitialState::Named(s) => Err(CliError::config(format!(
                "{stage}: unknown initial state {s:?} (ground, mixed or a matrix)"
            ))),
            InitialState::Matrix(m) => {
                let rho = to_op(m);
                if rho.nrows() != d {
                    return Err(CliError::config(format!("{stage}: initial state must be {d}x{d}")));
                }
                Ok(rho)
            }
        }
    }

    fn task(&mut self, task: &TaskConfig) -> Result<Value, CliError> {
        let stage = format!("task {}", task.name());
        let stage = stage.as_str();
        let started = Instant::now();
        let name = task.name().to_string();
        let csv = format!("{name}.csv");
        let mut info = json!({ "name": name, "kind": task.kind(), "file": csv });
        match task {
            TaskConfig::Evolve {
                times,
                method: how,
                rtol,
                atol,
                initial,
                observables,
                ..
            } => {
                let rho0 = self.initial(initial, stage)?;
                let ops: Vec<(String, Op)> = observables
                    .iter()
                    .map(|o| Ok((o.clone(), self.model.named(stage, o)?)))
                    .collect::<Result<_, CliError>>()?;
                let t = times.values();
                let sec = self.base.as_ref().expect("base sector built");
                let x0 = AdosVector::from_density(&rho0, sec.space.clone(), Parity::Even).map_err(engine(stage))?;
                let (traj, rep) = match how {
                    EvolveMethod::Ode => {
                        let opts = OdeOptions {
                            rtol: *rtol,
                            atol: *atol,
                            ..OdeOptions::default()
                        };
                        evolve_ode(&sec.even, &x0, &t, &opts)
                    }
                    EvolveMethod::Propagator => evolve_expm(&sec.even, &x0, &t, DEFAULT_DROP_TOL),
                }
                .map_err(engine(stage))?;
                let d = self.model.dim();
                let mut header = vec!["t".to_string()];
                if ops.is_empty() {
                    header.extend((0..d).map(|i| format!("p{i}")));
                } else {
                    for (o, _) in &ops {
                        header.push(format!("{o}_re"));
                        header.push(format!("{o}_im"));
                    }
                }
                header.push("trace_error".into());
                header.push("hermiticity_error".into());
                let mut w = PartialCsv::create(&self.out, &csv, &header, stage)?;
                let (mut max_trace, mut max_herm) = (0.0f64, 0.0f64);
                for (x, &ti) in traj.iter().zip(&t) {
                    let rho = reduced_density(x).map_err(engine(stage))?;
                    let mut row = vec![ti];
                    if ops.is_empty() {
                        row.extend((0..d).map(|i| rho[(i, i)].re));
                    } else {
                        for (_, op) in &ops {
                            let v = expectation(x, op).map_err(engine(stage))?;
                            row.extend([v.re, v.im]);
                        }
                    }
                    let te = (rho.trace() - C64::new(1.0, 0.0)).norm();
                    let he = heom_core::superop::hermiticity_defect(&rho);
                    max_trace = max_trace.max(te);
                    max_herm = max_herm.max(he);
                    row.extend([te, he]);
                    w.row(&row)?;
                }
                w.finish()?;
                info["method"] = json!(rep.method);
                info["steps"] = json!(rep.steps);
                info["max_trace_error"] = json!(max_trace);
                info["max_hermiticity_error"] = json!(max_herm);
                if self.wants(Format::Ados) {
                    let frames = traj.iter().zip(&t).map(|(x, &ti)| (ti, x.data.clone())).collect();
                    info["ados"] = json!(self.write_dump(&format!("{name}.ados"), frames, &x0, stage)?);
                }
            }
            TaskConfig::Steadystate {
                solver, observables, ..
            } => {
                let ops: Vec<(String, Op)> = observables
                    .iter()
                    .map(|o| Ok((o.clone(), self.model.named(stage, o)?)))
                    .collect::<Result<_, CliError>>()?;
                let mut sec = self.base.take().expect("base sector built");
                let r = self.steady(&mut sec, *solver, stage);
                self.base = Some(sec);
                r?;
                let (ss, rep) = self
                    .base
                    .as_ref()
                    .and_then(|s| s.steady.as_ref())
                    .expect("steady state computed");
                let rho = reduced_density(ss).map_err(engine(stage))?;
                let mut w = PartialCsv::create(
                    &self.out,
                    &csv,
                    &["row".into(), "col".into(), "re".into(), "im".into()],
                    stage,
                )?;
                for c in 0..rho.ncols() {
                    for r in 0..rho.nrows() {
                        w.row(&[r as f64, c as f64, rho[(r, c)].re, rho[(r, c)].im])?;
                    }
                }
                w.finish()?;
                info["method"] = json!(rep.method);
                info["residual"] = json!(rep.residual);
                let mut obs = serde_json::Map::new();
                for (o, op) in &ops {
                    let v = expectation(ss, op).map_err(engine(stage))?;
                    obs.insert(o.clone(), json!([v.re, v.im]));
                }
                info["observables"] = Value::Object(obs);
                if self.wants(Format::Ados) {
                    info["ados"] = json!(self.write_dump(
                        &format!("{name}.ados"),
                        vec![(f64::INFINITY, ss.data.clone())],
                        ss,
                        stage
                    )?);
                }
            }
            TaskConfig::Dos {
                operator,
                omega,
                solver,
                ..
            }
            | TaskConfig::Psd {
                operator,
                omega,
                solver,
                ..
            } => {
                let op = self.model.named(stage, operator)?;
                let is_dos = matches!(task, TaskConfig::Dos { .. });
                let mut sec = self.base.take().expect("base sector built");
                let r = self.steady(&mut sec, *solver, stage).and_then(|_| {
                    if is_dos {
                        self.odd(&mut sec, stage)
                    } else {
                        Ok(())
                    }
                });
                self.base = Some(sec);
                r?;
                let sec = self.base.as_ref().expect("base sector built");
                let (ss, ss_rep) = sec.steady.as_ref().expect("steady state computed");
                let grid = omega.values();
                // an empty .partial file marks the task as started
                let w = PartialCsv::create(&self.out, &csv, &["omega".into(), "value".into()], stage)?;
                let spec = if is_dos {
                    dos(
                        sec.odd.as_ref().expect("odd generator built"),
                        ss,
                        &op,
                        &grid,
                        &method(*solver),
                    )
                } else {
                    psd(&sec.even, ss, &op, &grid, &method(*solver))
                }
                .map_err(engine(stage))?;
                let mut w = w;
                for (o, v) in spec.omega.iter().zip(&spec.values) {
                    w.row(&[*o, *v])?;
                }
                w.finish()?;
                info["steady_residual"] = json!(ss_rep.residual);
                info["residual"] = json!(spec.max_residual);
                info["points"] = json!(grid.len());
            }
            TaskConfig::Current { baths, solver, .. } => {
                let mut sec = self.base.take().expect("base sector built");
                let r = self.steady(&mut sec, *solver, stage);
                self.base = Some(sec);
                r?;
                let sec = self.base.as_ref().expect("base sector built");
                let (ss, ss_rep) = sec.steady.as_ref().expect("steady state computed");
                let mut header = vec!["phi".to_string()];
                header.extend(baths.iter().map(|b| format!("current_{b}")));
                let mut w = PartialCsv::create(&self.out, &csv, &header, stage)?;
                let mut row = vec![sec.phi];
                let mut imag = 0.0f64;
                for b in baths {
                    let c = current(ss, b, &sec.baths).map_err(engine(stage))?;
                    imag = imag.max(c.imag.abs());
                    row.push(c.value);
                }
                w.row(&row)?;
                w.finish()?;
                info["steady_residual"] = json!(ss_rep.residual);
                info["max_imaginary_part"] = json!(imag);
            }
            TaskConfig::Conductance { bath, phi, solver, .. } => {
                let grid = phi.values();
                let mut w = PartialCsv::create(
                    &self.out,
                    &format!("{name}.sweep.csv"),
                    &["phi".into(), "current".into()],
                    stage,
                )?;
                let mut currents = Vec::with_capacity(grid.len());
                let mut worst = 0.0f64;
                for &p in &grid {
                    let reuse = self.base.as_ref().is_some_and(|s| s.phi == p);
                    let mut sec = if reuse {
                        self.base.take().expect("base sector built")
                    } else {
                        self.sector(p, stage)?
                    };
                    let r = self.steady(&mut sec, *solver, stage);
                    let value = r.and_then(|_| {
                        let (ss, rep) = sec.steady.as_ref().expect("steady state computed");
                        worst = worst.max(rep.residual);
                        current(ss, bath, &sec.baths).map(|c| c.value).map_err(engine(stage))
                    });
                    if reuse {
                        self.base = Some(sec);
                    }
                    let value = value?;
                    currents.push(value);
                    w.row(&[p, value])?;
                }
                let g = conductance(&grid, &currents).map_err(engine(stage))?;
                let mut out = PartialCsv::create(
                    &self.out,
                    &csv,
                    &["phi".into(), "current".into(), "conductance".into()],
                    stage,
                )?;
                for ((p, gi), i) in g.iter().zip(&currents) {
                    out.row(&[*p, *i, *gi])?;
                }
                out.finish()?;
                // the sweep log is only kept while the task is incomplete
                let sweep = w.finish()?;
                let _ = fs::remove_file(sweep);
                info["max_steady_residual"] = json!(worst);
                info["points"] = json!(grid.len());
            }
        }
        info["wall_time"] = json!(started.elapsed().as_secs_f64());
        Ok(info)
    }
}

/// Runs every task; the manifest is written whether or not a task fails.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let threads = resolve_threads(opts.threads, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::run("threads", e.to_string()))?;
    pool.install(|| run_inner(cfg, opts, threads))
}

fn run_inner(cfg: &RunConfig, opts: &RunOptions, threads: usize) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let out = opts.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    fs::create_dir_all(&out).map_err(|e| CliError::io("output", e))?;
    if opts.verbose {
        eprintln!("[heom] configuration:\n{}", to_json(cfg));
    }
    let mut manifest = json!({
        "status": "running",
        "threads": threads,
        "config": serde_json::to_value(cfg).expect("config serializes"),
        "tasks": [],
    });
    let write_manifest = |m: &Value| -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(m).expect("manifest serializes");
        fs::write(out.join("manifest.json"), text + "\n").map_err(|e| CliError::io("manifest", e))
    };

    let result = (|| -> Result<(), CliError> {
        let model = build_model(&cfg.system)?;
        let jumps = build_jumps(cfg, &model)?;
        let mut runner = Runner {
            cfg,
            model,
            jumps,
            out: out.clone(),
            verbose: opts.verbose,
            base: None,
        };
        let t0 = Instant::now();
        let base = runner.sector(cfg.phi, "build")?;
        manifest["ado_count"] = json!(base.space.len());
        manifest["system_dim"] = json!(base.even.system_dim());
        manifest["matrix_dim"] = json!(base.even.dim());
        manifest["nnz"] = json!(base.even.data().nnz());
        manifest["k_b"] = json!(base.space.k_b());
        manifest["k_f"] = json!(base.space.k_f());
        manifest["build_time"] = json!(t0.elapsed().as_secs_f64());
        runner.log(format!(
            "{} ADOs, matrix dimension {}, {} nonzeros",
            base.space.len(),
            base.even.dim(),
            base.even.data().nnz()
        ));
        if runner.wants(Format::Coo) {
            fs::write(out.join("heomls_even.coo"), write_coo(base.even.data()))
                .map_err(|e| CliError::io("build", e))?;
            manifest["matrix_file"] = json!("heomls_even.coo");
        }
        runner.base = Some(base);
        for task in &cfg.tasks {
            runner.log(format!("task {} ({})", task.name(), task.kind()));
            let info = runner.task(task)?;
            manifest["tasks"].as_array_mut().expect("tasks array").push(info);
        }
        Ok(())
    })();

    manifest["wall_time"] = json!(started.elapsed().as_secs_f64());
    match &result {
        Ok(()) => manifest["status"] = json!("ok"),
        Err(e) => {
            manifest["status"] = json!("failed");
            manifest["failed_stage"] = json!(e.stage);
            manifest["error"] = json!(e.msg);
            manifest["exit_code"] = json!(e.exit_code());
            let partial: Vec<String> = fs::read_dir(&out)
                .map(|rd| {
                    let mut v: Vec<String> = rd
                        .filter_map(|e| e.ok())
                        .map(|e| file_name(&e.path()))
                        .filter(|n| n.ends_with(".partial"))
                        .collect();
                    v.sort();
                    v
                })
                .unwrap_or_default();
            manifest["partial_outputs"] = json!(partial);
        }
    }
    write_manifest(&manifest)?;
    result.map(|_| RunSummary { out_dir: out, manifest })
}

impl CliError {
    pub fn is_config(&self) -> bool {
        self.kind == ErrorKind::Config
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_is_renamed_on_finish() {
        let dir = tempfile::tempdir().unwrap();
        let mut csv = PartialCsv::create(dir.path(), "x.csv", &["a".into(), "b".into()], "t").unwrap();
        csv.row(&[1.0, 2.5]).unwrap();
        assert!(dir.path().join("x.csv.partial").exists());
        assert!(!dir.path().join("x.csv").exists());
        let done = csv.finish().unwrap();
        assert_eq!(fs::read_to_string(done).unwrap(), "a,b\n1,2.5\n");
        assert!(!dir.path().join("x.csv.partial").exists());
    }
}
