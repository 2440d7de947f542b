//! Run configuration: JSON schema, defaults and validation.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Dense complex matrix as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub baths: Vec<BathConfig>,
    /// Extra Lindblad channels on every ADO block.
    #[serde(default)]
    pub lindblad: Vec<JumpConfig>,
    #[serde(default)]
    pub truncation: TruncationConfig,
    /// Bias eΦ used by tasks that do not sweep it.
    #[serde(default)]
    pub phi: f64,
    pub tasks: Vec<TaskConfig>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// Spinless or spinful level; operators `d` (or `d_up`, `d_down`) and `n`.
    FermionLevel {
        eps: f64,
        #[serde(default)]
        u: f64,
        #[serde(default = "default_spins")]
        spins: usize,
    },
    /// Operators `a`, `x = a + a†`, `n`.
    BosonMode { omega: f64, n_photon: usize },
    /// Level ⊗ cavity; operators `d`, `a`, `x`, `n`.
    ChargeCavity {
        eps: f64,
        omega_c: f64,
        g: f64,
        n_photon: usize,
    },
    Matrix {
        hamiltonian: MatrixSpec,
        #[serde(default)]
        operators: BTreeMap<String, MatrixSpec>,
    },
}

fn default_spins() -> usize {
    2
}

/// Either the name of a system operator or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpRef {
    Named(String),
    Matrix(MatrixSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorConfig {
    Fermionic,
    Bosonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lorentzian,
    DrudeLorentz,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionConfig {
    #[default]
    Pade,
    Matsubara,
}

/// Which side of the bias a lead sits on: `left` gets μ = +eΦ/2, `right` μ = −eΦ/2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartConfig {
    Real,
    Imag,
    Combined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NuConfig {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawExponent {
    pub coeff: [f64; 2],
    pub rate: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<NuConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<PartConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    /// α or β; baths sharing a label form one reservoir (e.g. both spins of a lead).
    pub label: String,
    /// Coupling-operator tag such as a spin name.
    #[serde(default)]
    pub channel: String,
    pub flavor: FlavorConfig,
    pub family: Family,
    pub coupling: OpRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<BiasSide>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub decomposition: DecompositionConfig,
    /// Merge the REAL/IMAG pair of a bosonic expansion into COMBINED terms.
    #[serde(default)]
    pub combine: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<RawExponent>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpConfig {
    pub operator: OpRef,
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default)]
    pub m_max: usize,
    #[serde(default)]
    pub n_max: usize,
    #[serde(default)]
    pub i_th: f64,
}

/// `points` values from `from` to `to` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + step * i as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[default]
    Direct,
    Gmres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EvolveMethod {
    #[default]
    Ode,
    Propagator,
}

/// Initial reduced density: `ground` (lowest eigenvector of H), `mixed`, or a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialState {
    Named(String),
    Matrix(MatrixSpec),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::Named("ground".into())
    }
}

fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskConfig {
    Evolve {
        #[serde(default)]
        name: String,
        times: Grid,
        #[serde(default)]
        method: EvolveMethod,
        #[serde(default = "default_rtol")]
        rtol: f64,
        #[serde(default = "default_atol")]
        atol: f64,
        #[serde(default)]
        initial: InitialState,
        #[serde(default)]
        observables: Vec<String>,
    },
    Steadystate {
        #[serde(default)]
        name: String,
        #[serde(default)]
        solver: SolverChoice,
        #[serde(default)]
        observables: Vec<String>,
    },
    Dos {
        #[serde(default)]
        name: String,
        operator: String,
        omega: Grid,
        #[serde(default)]
        solver: SolverChoice,
    },
    Psd {
        #[serde(default)]
        name: String,
        operator: String,
        omega: Grid,
        #[serde(default)]
        solver: SolverChoice,
    },
    Current {
        #[serde(default)]
        name: String,
        /// Defaults to every fermionic label.
        #[serde(default)]
        baths: Vec<String>,
        #[serde(default)]
        solver: SolverChoice,
    },
    Conductance {
        #[serde(default)]
        name: String,
        bath: String,
        phi: Grid,
        #[serde(default)]
        solver: SolverChoice,
    },
}

impl TaskConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskConfig::Evolve { .. } => "evolve",
            TaskConfig::Steadystate { .. } => "steadystate",
            TaskConfig::Dos { .. } => "dos",
            TaskConfig::Psd { .. } => "psd",
            TaskConfig::Current { .. } => "current",
            TaskConfig::Conductance { .. } => "conductance",
        }
    }

    pub fn name(&self) -> &str {
        match self {
            TaskConfig::Evolve { name, .. }
            | TaskConfig::Steadystate { name, .. }
            | TaskConfig::Dos { name, .. }
            | TaskConfig::Psd { name, .. }
            | TaskConfig::Current { name, .. }
            | TaskConfig::Conductance { name, .. } => name,
        }
    }

    fn name_mut(&mut self) -> &mut String {
        match self {
            TaskConfig::Evolve { name, .. }
            | TaskConfig::Steadystate { name, .. }
            | TaskConfig::Dos { name, .. }
            | TaskConfig::Psd { name, .. }
            | TaskConfig::Current { name, .. }
            | TaskConfig::Conductance { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    /// One CSV per task (always written).
    Csv,
    /// The even-parity generator as a COO text matrix.
    Coo,
    /// Binary ADO dumps of trajectories and steady states.
    Ados,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> String {
    "out".into()
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

/// Parses and validates a JSON document.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(format!("{path}: {}", e.inner()))
    })?;
    cfg.validated()
}

pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

fn bad(path: impl AsRef<str>, msg: impl AsRef<str>) -> CliError {
    CliError::config(format!("{}: {}", path.as_ref(), msg.as_ref()))
}

fn finite(path: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(path, "must be a finite number"))
    }
}

fn check_matrix(path: &str, m: &MatrixSpec) -> Result<usize, CliError> {
    let n = m.len();
    if n == 0 {
        return Err(bad(path, "matrix is empty"));
    }
    for (r, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(bad(
                format!("{path}[{r}]"),
                format!("row has {} entries, expected {n}", row.len()),
            ));
        }
        if row.iter().flatten().any(|x| !x.is_finite()) {
            return Err(bad(format!("{path}[{r}]"), "non-finite entry"));
        }
    }
    Ok(n)
}

fn check_grid(path: &str, g: &Grid, min_points: usize) -> Result<(), CliError> {
    finite(&format!("{path}.from"), g.from)?;
    finite(&format!("{path}.to"), g.to)?;
    if g.points < min_points {
        return Err(bad(
            format!("{path}.points"),
            format!("need at least {min_points} points"),
        ));
    }
    if g.points > 1 && !(g.to > g.from) {
        return Err(bad(path, "`to` must exceed `from`"));
    }
    Ok(())
}

impl RunConfig {
    /// Checks every field and fills defaults; idempotent.
    pub fn validated(mut self) -> Result<Self, CliError> {
        if self.tasks.is_empty() {
            return Err(bad("tasks", "at least one task is required"));
        }
        match &self.system {
            SystemConfig::FermionLevel { eps, u, spins } => {
                finite("system.eps", *eps)?;
                finite("system.u", *u)?;
                if !(1..=2).contains(spins) {
                    return Err(bad("system.spins", "must be 1 or 2"));
                }
            }
            SystemConfig::BosonMode { omega, n_photon } => {
                finite("system.omega", *omega)?;
                if *n_photon < 2 {
                    return Err(bad("system.n_photon", "need at least 2 Fock states"));
                }
            }
            SystemConfig::ChargeCavity {
                eps,
                omega_c,
                g,
                n_photon,
            } => {
                finite("system.eps", *eps)?;
                finite("system.omega_c", *omega_c)?;
                finite("system.g", *g)?;
                if *n_photon < 2 {
                    return Err(bad("system.n_photon", "need at least 2 Fock states"));
                }
            }
            SystemConfig::Matrix { hamiltonian, operators } => {
                let d = check_matrix("system.hamiltonian", hamiltonian)?;
                for (k, m) in operators {
                    if check_matrix(&format!("system.operators.{k}"), m)? != d {
                        return Err(bad(format!("system.operators.{k}"), format!("must be {d}x{d}")));
                    }
                }
            }
        }
        for (i, b) in self.baths.iter_mut().enumerate() {
            validate_bath(&format!("baths[{i}]"), b)?;
        }
        for (i, j) in self.lindblad.iter().enumerate() {
            if !(j.rate >= 0.0 && j.rate.is_finite()) {
                return Err(bad(format!("lindblad[{i}].rate"), "must be non-negative"));
            }
            if let OpRef::Matrix(m) = &j.operator {
                check_matrix(&format!("lindblad[{i}].operator"), m)?;
            }
        }
        let t = &self.truncation;
        if !(t.i_th >= 0.0 && t.i_th.is_finite()) {
            return Err(bad("truncation.i_th", "must be non-negative"));
        }
        finite("phi", self.phi)?;
        if self.threads == Some(0) {
            return Err(bad("threads", "must be at least 1"));
        }
        if self.output.dir.is_empty() {
            return Err(bad("output.dir", "must not be empty"));
        }
        self.output.formats.sort();
        self.output.formats.dedup();
        if !self.output.formats.contains(&Format::Csv) {
            self.output.formats.insert(0, Format::Csv);
        }

        let fermionic: Vec<String> = self
            .baths
            .iter()
            .filter(|b| b.flavor == FlavorConfig::Fermionic)
            .map(|b| b.label.clone())
            .collect();
        let mut seen: BTreeMap<String, usize> = BTreeMap::new();
        for (i, task) in self.tasks.iter_mut().enumerate() {
            let p = format!("tasks[{i}]");
            match task {
                TaskConfig::Evolve { times, rtol, atol, .. } => {
                    check_grid(&format!("{p}.times"), times, 1)?;
                    if !(*rtol > 0.0) || !(*atol > 0.0) {
                        return Err(bad(&p, "rtol and atol must be positive"));
                    }
                }
                TaskConfig::Dos { omega, .. } | TaskConfig::Psd { omega, .. } => {
                    check_grid(&format!("{p}.omega"), omega, 1)?
                }
                TaskConfig::Current { baths, .. } => {
                    if baths.is_empty() {
                        for l in &fermionic {
                            if !baths.contains(l) {
                                baths.push(l.clone());
                            }
                        }
                    }
                    if baths.is_empty() {
                        return Err(bad(&p, "current needs a fermionic bath"));
                    }
                    if let Some(l) = baths.iter().find(|l| !fermionic.contains(l)) {
                        return Err(bad(format!("{p}.baths"), format!("no fermionic bath labelled {l:?}")));
                    }
                }
                TaskConfig::Conductance { bath, phi, .. } => {
                    check_grid(&format!("{p}.phi"), phi, 3)?;
                    if !fermionic.contains(bath) {
                        return Err(bad(format!("{p}.bath"), format!("no fermionic bath labelled {bath:?}")));
                    }
                }
                TaskConfig::Steadystate { .. } => {}
            }
            let kind = task.kind();
            let name = task.name_mut();
            if name.is_empty() {
                *name = kind.to_string();
            }
            if name.contains(['/', '\\']) || name.starts_with('.') {
                return Err(bad(format!("{p}.name"), "must be a plain file stem"));
            }
            let count = seen.entry(name.clone()).or_insert(0);
            *count += 1;
            if *count > 1 {
                return Err(bad(format!("{p}.name"), format!("duplicate task name {name:?}")));
            }
        }
        Ok(self)
    }
}

fn validate_bath(p: &str, b: &mut BathConfig) -> Result<(), CliError> {
    if b.label.is_empty() {
        return Err(bad(format!("{p}.label"), "must not be empty"));
    }
    if let OpRef::Matrix(m) = &b.coupling {
        check_matrix(&format!("{p}.coupling"), m)?;
    }
    let need = |name: &str, v: Option<f64>| -> Result<f64, CliError> {
        let v = v.ok_or_else(|| bad(format!("{p}.{name}"), format!("required for family {:?}", b.family)))?;
        finite(&format!("{p}.{name}"), v)?;
        Ok(v)
    };
    let forbid = |name: &str, present: bool| -> Result<(), CliError> {
        if present {
            Err(bad(
                format!("{p}.{name}"),
                format!("not used by a {:?} {:?} bath", b.flavor, b.family),
            ))
        } else {
            Ok(())
        }
    };
    match (b.flavor, b.family) {
        (FlavorConfig::Fermionic, Family::Lorentzian) => {
            need("gamma", b.gamma)?;
            need("width", b.width)?;
            need("kt", b.kt)?;
            forbid("delta", b.delta.is_some())?;
            forbid("exponents", b.exponents.is_some())?;
            forbid("combine", b.combine)?;
            match (b.mu, b.bias) {
                (Some(_), Some(_)) => return Err(bad(p, "give either `mu` or `bias`, not both")),
                (Some(mu), None) => finite(&format!("{p}.mu"), mu)?,
                (None, None) => b.mu = Some(0.0),
                (None, Some(_)) => {}
            }
            if b.n.unwrap_or(0) == 0 {
                return Err(bad(format!("{p}.n"), "number of exponents must be at least 1"));
            }
        }
        (FlavorConfig::Bosonic, Family::DrudeLorentz) => {
            need("delta", b.delta)?;
            need("width", b.width)?;
            need("kt", b.kt)?;
            forbid("gamma", b.gamma.is_some())?;
            forbid("mu", b.mu.is_some())?;
            forbid("bias", b.bias.is_some())?;
            forbid("exponents", b.exponents.is_some())?;
            if b.n.unwrap_or(0) == 0 {
                return Err(bad(format!("{p}.n"), "number of exponents must be at least 1"));
            }
        }
        (flavor, Family::Raw) => {
            for (name, present) in [
                ("gamma", b.gamma.is_some()),
                ("delta", b.delta.is_some()),
                ("width", b.width.is_some()),
                ("mu", b.mu.is_some()),
                ("bias", b.bias.is_some()),
                ("kt", b.kt.is_some()),
                ("n", b.n.is_some()),
            ] {
                forbid(name, present)?;
            }
            if flavor == FlavorConfig::Fermionic {
                forbid("combine", b.combine)?;
            }
            let exps = b
                .exponents
                .as_ref()
                .ok_or_else(|| bad(format!("{p}.exponents"), "required for family Raw"))?;
            for (k, e) in exps.iter().enumerate() {
                let q = format!("{p}.exponents[{k}]");
                if e.coeff.iter().chain(&e.rate).any(|x| !x.is_finite()) {
                    return Err(bad(&q, "non-finite value"));
                }
                match flavor {
                    FlavorConfig::Fermionic if e.nu.is_none() || e.part.is_some() => {
                        return Err(bad(&q, "fermionic exponents need `nu` (\"+\" or \"-\") and no `part`"))
                    }
                    FlavorConfig::Bosonic if e.part.is_none() || e.nu.is_some() => {
                        return Err(bad(&q, "bosonic exponents need `part` and no `nu`"))
                    }
                    _ => {}
                }
            }
        }
        (flavor, family) => {
            return Err(bad(
                format!("{p}.family"),
                format!("{family:?} is not a {flavor:?} spectral density"),
            ))
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints_are_exact() {
        let g = Grid {
            from: -4.0,
            to: 4.0,
            points: 17,
        };
        let v = g.values();
        assert_eq!(v.len(), 17);
        assert_eq!(v[0], -4.0);
        assert_eq!(v[8], 0.0);
        assert_eq!(v[16], 4.0);
    }
}
