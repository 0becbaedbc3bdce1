//! Sectioned `key = value` configuration files.
//!
//! ```text
//! [grid]
//! n = 512
//! length = 64
//!
//! [experiment]
//! kind = inflate
//! k = 1/4
//! n_list = 32, 64, 128, 256
//! ```
//!
//! Unknown sections and keys are rejected. Numbers may be written as
//! fractions `p/q`. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::closed_forms::HatVariant;
use crate::error::{Result, ZrError};
use crate::model::{PhysicalParams, DEFAULT_SCHEDULE_EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Conserve,
    Inflate,
    C2probe,
    Decohere,
    Growth,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Simulate,
        ExperimentKind::Conserve,
        ExperimentKind::Inflate,
        ExperimentKind::C2probe,
        ExperimentKind::Decohere,
        ExperimentKind::Growth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Conserve => "conserve",
            ExperimentKind::Inflate => "inflate",
            ExperimentKind::C2probe => "c2probe",
            ExperimentKind::Decohere => "decohere",
            ExperimentKind::Growth => "growth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Unit coefficients, speeds `(+1, −1)`.
    Normalized,
    /// Coefficients derived from `(θ, γ, ω, β, ν)`.
    Physical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    Gaussian,
    PlaneWave,
    Random,
    Zero,
}

impl InitialData {
    fn name(self) -> &'static str {
        match self {
            InitialData::Gaussian => "gaussian",
            InitialData::PlaneWave => "plane_wave",
            InitialData::Random => "random",
            InitialData::Zero => "zero",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            InitialData::Gaussian,
            InitialData::PlaneWave,
            InitialData::Random,
            InitialData::Zero,
        ]
        .into_iter()
        .find(|d| d.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    /// Frequency cells per hat width for the inflation grids.
    pub modes_per_hat: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsSpec {
    pub preset: Preset,
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub beta: f64,
    pub nu: f64,
}

impl ParamsSpec {
    pub fn physical(&self) -> Result<PhysicalParams> {
        PhysicalParams::new(self.theta, self.gamma, self.omega, self.beta, self.nu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperSpec {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub record_every: usize,
    pub midpoint_external: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub data: InitialData,
    pub amplitude: f64,
    pub width: f64,
    pub kick: f64,
    pub psi_amplitude: f64,
    pub kappa: f64,
    pub k: f64,
    pub l: f64,
    pub n_list: Vec<u32>,
    pub t_probe: f64,
    pub variant: HatVariant,
    pub t: f64,
    pub mu: f64,
    pub m: f64,
    pub c: f64,
    pub mu_list: Vec<f64>,
    pub s_list: Vec<f64>,
    pub psi_s: f64,
    pub quad_nodes: usize,
    pub schedule_eps: f64,
    /// Refined companion run at `dt/2` for the order check.
    pub refine: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub dir: String,
    pub prefix: String,
    pub fit_file: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub grid: GridSpec,
    pub params: ParamsSpec,
    pub stepper: StepperSpec,
    pub experiment: ExperimentParams,
    pub output: OutputSpec,
}

impl ExperimentSpec {
    /// Preset values for one experiment kind.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut s = ExperimentSpec {
            grid: GridSpec {
                n: 512,
                length: 64.0,
                modes_per_hat: 8,
            },
            params: ParamsSpec {
                preset: Preset::Physical,
                theta: 1.0,
                gamma: 1.0,
                omega: 1.0,
                beta: 2.0,
                nu: 0.5,
            },
            stepper: StepperSpec {
                dt: 1e-3,
                t_end: 5.0,
                dealias: true,
                record_every: 100,
                midpoint_external: true,
            },
            experiment: ExperimentParams {
                kind,
                seed: 0,
                data: InitialData::Gaussian,
                amplitude: 1.0,
                width: 2.0,
                kick: 0.5,
                psi_amplitude: 0.0,
                kappa: 2.0,
                k: 0.25,
                l: 0.25,
                n_list: vec![32, 64, 128, 256],
                t_probe: 0.1,
                variant: HatVariant::InflationF,
                t: 0.01,
                mu: 0.05,
                m: 20.0,
                c: 0.5,
                mu_list: vec![0.1, 0.05, 0.025],
                s_list: vec![1.0, 2.0, 3.0],
                psi_s: -0.5,
                quad_nodes: 64,
                schedule_eps: DEFAULT_SCHEDULE_EPS,
                refine: true,
            },
            output: OutputSpec {
                dir: "out".into(),
                prefix: kind.name().into(),
                fit_file: true,
            },
        };
        match kind {
            ExperimentKind::Simulate => {
                s.experiment.refine = false;
            }
            ExperimentKind::Conserve => {}
            ExperimentKind::Inflate => {
                s.params.preset = Preset::Normalized;
                s.stepper.dt = 5e-3;
                s.stepper.t_end = 0.1;
                s.stepper.record_every = 1;
                s.experiment.refine = false;
            }
            ExperimentKind::C2probe => {
                s.params.preset = Preset::Normalized;
                s.experiment.k = 0.0;
                s.experiment.l = -1.0;
                s.experiment.n_list = vec![16, 32, 64, 128, 256];
                s.experiment.variant = HatVariant::C2B0;
                s.experiment.refine = false;
            }
            ExperimentKind::Decohere => {
                s.params.preset = Preset::Normalized;
                s.grid.n = 1024;
                s.grid.length = 40.0;
                s.experiment.refine = false;
            }
            ExperimentKind::Growth => {
                s.stepper.t_end = 50.0;
                s.stepper.dt = 2e-3;
                s.stepper.record_every = 50;
                s.experiment.amplitude = 1.2;
                s.experiment.width = 1.5;
                s.experiment.psi_amplitude = 0.3;
                s.experiment.refine = false;
            }
        }
        s
    }

    /// Checks the hypotheses each experiment relies on.
    pub fn validate(&self) -> Result<()> {
        let e = &self.experiment;
        let fail = |m: String| Err(ZrError::Constraint(m));
        if !self.grid.n.is_power_of_two() || self.grid.n < 4 {
            return fail(format!("grid.n must be a power of two >= 4, got {}", self.grid.n));
        }
        if !(self.grid.length > 0.0) {
            return fail("grid.length must be positive".into());
        }
        if self.grid.modes_per_hat < 2 {
            return fail("grid.modes_per_hat must be at least 2".into());
        }
        if self.params.preset == Preset::Physical {
            self.params.physical()?;
        }
        if !(self.stepper.dt > 0.0) || !(self.stepper.t_end > 0.0) || self.stepper.dt > self.stepper.t_end {
            return fail("stepper needs 0 < dt <= t_end".into());
        }
        if self.stepper.record_every == 0 {
            return fail("stepper.record_every must be positive".into());
        }
        if !(0.0..1.0 / 6.0).contains(&e.schedule_eps) {
            return fail("experiment.schedule_eps must lie in [0, 1/6)".into());
        }
        match e.kind {
            ExperimentKind::Simulate => {}
            ExperimentKind::Conserve => {
                if self.params.preset == Preset::Physical {
                    let p = self.params.physical()?;
                    if !(p.omega > 0.0 && p.beta - p.nu * p.nu > 0.0) {
                        return fail("conserve requires omega > 0 and beta - nu^2 > 0".into());
                    }
                }
            }
            ExperimentKind::Inflate => {
                if !(e.k > 0.0 && e.k < 1.0) {
                    return fail(format!("inflate requires 0 < k < 1, got k = {}", e.k));
                }
                if e.l < 2.0 * e.k - 0.5 - 1e-12 {
                    return fail(format!(
                        "inflate requires l >= 2k - 1/2 (l = {}, 2k - 1/2 = {})",
                        e.l,
                        2.0 * e.k - 0.5
                    ));
                }
                if e.variant == HatVariant::C2B0 {
                    return fail("inflate uses variant inflation_f or inflation_g".into());
                }
                check_n_list(&e.n_list)?;
                let nmin = *e.n_list.iter().min().expect("non-empty") as f64;
                if e.t_probe * nmin < 1.0 {
                    return fail(format!(
                        "inflate requires t_probe * min(N) >= 1, got {}",
                        e.t_probe * nmin
                    ));
                }
                if !(e.t_probe > 0.0) {
                    return fail("experiment.t_probe must be positive".into());
                }
            }
            ExperimentKind::C2probe => {
                if e.l > -0.5 + 1e-12 {
                    return fail(format!("c2probe requires l <= -1/2, got {}", e.l));
                }
                check_n_list(&e.n_list)?;
                if !(e.t > 0.0) {
                    return fail("experiment.t must be positive".into());
                }
                if e.quad_nodes < 16 {
                    return fail("experiment.quad_nodes must be at least 16".into());
                }
            }
            ExperimentKind::Decohere => {
                if !(e.mu > 0.0 && e.mu < 1.0) {
                    return fail(format!("decohere requires 0 < mu < 1, got {}", e.mu));
                }
                if e.m < 1.0 / e.mu - 1e-9 {
                    return fail(format!("decohere requires M >= 1/mu ({} < {})", e.m, 1.0 / e.mu));
                }
                if !(e.c > 0.0 && e.c < 1.0) {
                    return fail(format!("decohere requires 0 < c < 1, got {}", e.c));
                }
                if e.mu_list.iter().any(|m| !(*m > 0.0 && *m < 1.0)) {
                    return fail("every mu_list entry must lie in (0, 1)".into());
                }
            }
            ExperimentKind::Growth => {
                if e.s_list.is_empty() || e.s_list.iter().any(|s| !(1.0..=8.0).contains(s)) {
                    return fail("growth requires s_list within [1, 8]".into());
                }
            }
        }
        Ok(())
    }
}

fn check_n_list(n: &[u32]) -> Result<()> {
    if n.len() < 3 {
        return Err(ZrError::Constraint("n_list needs at least 3 entries".into()));
    }
    if n.windows(2).any(|w| w[1] <= w[0]) || n[0] < 2 {
        return Err(ZrError::Constraint("n_list must be ascending with entries >= 2".into()));
    }
    Ok(())
}

/// Raw `section.key → (value, line)` table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
}

const SECTIONS: [&str; 5] = ["grid", "params", "stepper", "experiment", "output"];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ZrError::Parse {
                    line: line_no,
                    message: format!("malformed section header `{line}`"),
                })?;
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(ZrError::Parse {
                        line: line_no,
                        message: format!("unknown section [{name}]"),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ZrError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let sec = section.as_ref().ok_or_else(|| ZrError::Parse {
                line: line_no,
                message: "key outside of any section".into(),
            })?;
            let key = format!("{sec}.{}", k.trim());
            if entries.insert(key.clone(), (v.trim().to_string(), line_no)).is_some() {
                return Err(ZrError::Parse {
                    line: line_no,
                    message: format!("duplicate key {key}"),
                });
            }
        }
        Ok(RawConfig { entries })
    }

    /// Applies `section.key=value`.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ZrError::Config(format!("override `{assignment}` is not section.key=value")))?;
        let k = k.trim();
        match k.split_once('.') {
            Some((s, _)) if SECTIONS.contains(&s) => {}
            _ => return Err(ZrError::Config(format!("override key `{k}` has no known section"))),
        }
        self.entries.insert(k.to_string(), (v.trim().to_string(), 0));
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    /// Resolves the table into a validated spec. `kind` wins over
    /// `experiment.kind` when given.
    pub fn into_spec(self, kind: Option<ExperimentKind>) -> Result<ExperimentSpec> {
        let kind = match (kind, self.get("experiment.kind")) {
            (Some(k), _) => k,
            (None, Some(v)) => ExperimentKind::parse(v)
                .ok_or_else(|| self.err("experiment.kind", format!("unknown kind `{v}`")))?,
            (None, None) => ExperimentKind::Simulate,
        };
        let mut s = ExperimentSpec::defaults(kind);
        for (key, (value, _)) in &self.entries {
            self.assign(&mut s, key, value)?;
        }
        s.experiment.kind = kind;
        s.validate()?;
        Ok(s)
    }

    fn err(&self, key: &str, message: String) -> ZrError {
        match self.entries.get(key) {
            Some((_, line)) if *line > 0 => ZrError::Parse { line: *line, message },
            _ => ZrError::Config(message),
        }
    }

    fn assign(&self, s: &mut ExperimentSpec, key: &str, v: &str) -> Result<()> {
        let num = |v: &str| parse_number(v).map_err(|m| self.err(key, format!("{key}: {m}")));
        let int = |v: &str| -> Result<u64> {
            v.parse::<u64>()
                .map_err(|_| self.err(key, format!("{key}: expected a nonnegative integer, got `{v}`")))
        };
        let boolean = |v: &str| match v {
            "true" => Ok(true),
            "false" => Ok(false),
            _ => Err(self.err(key, format!("{key}: expected true or false, got `{v}`"))),
        };
        let list = |v: &str| -> Result<Vec<f64>> {
            v.split(',').filter(|p| !p.trim().is_empty()).map(|p| num(p.trim())).collect()
        };
        let e = &mut s.experiment;
        match key {
            "grid.n" => s.grid.n = int(v)? as usize,
            "grid.length" => s.grid.length = num(v)?,
            "grid.modes_per_hat" => s.grid.modes_per_hat = int(v)? as usize,
            "params.preset" => {
                s.params.preset = match v {
                    "normalized" => Preset::Normalized,
                    "physical" => Preset::Physical,
                    _ => return Err(self.err(key, format!("unknown preset `{v}`"))),
                }
            }
            "params.theta" => s.params.theta = num(v)?,
            "params.gamma" => s.params.gamma = num(v)?,
            "params.omega" => s.params.omega = num(v)?,
            "params.beta" => s.params.beta = num(v)?,
            "params.nu" => s.params.nu = num(v)?,
            "stepper.dt" => s.stepper.dt = num(v)?,
            "stepper.t_end" => s.stepper.t_end = num(v)?,
            "stepper.dealias" => s.stepper.dealias = boolean(v)?,
            "stepper.record_every" => s.stepper.record_every = int(v)? as usize,
            "stepper.midpoint_external" => s.stepper.midpoint_external = boolean(v)?,
            "experiment.kind" => {}
            "experiment.seed" => e.seed = int(v)?,
            "experiment.data" => {
                e.data = InitialData::parse(v).ok_or_else(|| self.err(key, format!("unknown data `{v}`")))?
            }
            "experiment.amplitude" => e.amplitude = num(v)?,
            "experiment.width" => e.width = num(v)?,
            "experiment.kick" => e.kick = num(v)?,
            "experiment.psi_amplitude" => e.psi_amplitude = num(v)?,
            "experiment.kappa" => e.kappa = num(v)?,
            "experiment.k" => e.k = num(v)?,
            "experiment.l" => e.l = num(v)?,
            "experiment.n_list" => {
                e.n_list = list(v)?
                    .into_iter()
                    .map(|x| {
                        if x.fract() == 0.0 && x >= 0.0 && x <= u32::MAX as f64 {
                            Ok(x as u32)
                        } else {
                            Err(self.err(key, format!("N must be an integer, got {x}")))
                        }
                    })
                    .collect::<Result<_>>()?
            }
            "experiment.t_probe" => e.t_probe = num(v)?,
            "experiment.variant" => {
                e.variant = HatVariant::parse(v).ok_or_else(|| self.err(key, format!("unknown variant `{v}`")))?
            }
            "experiment.t" => e.t = num(v)?,
            "experiment.mu" => e.mu = num(v)?,
            "experiment.m" => e.m = num(v)?,
            "experiment.c" => e.c = num(v)?,
            "experiment.mu_list" => e.mu_list = list(v)?,
            "experiment.s_list" => e.s_list = list(v)?,
            "experiment.psi_s" => e.psi_s = num(v)?,
            "experiment.quad_nodes" => e.quad_nodes = int(v)? as usize,
            "experiment.schedule_eps" => e.schedule_eps = num(v)?,
            "experiment.refine" => e.refine = boolean(v)?,
            "output.dir" => s.output.dir = v.to_string(),
            "output.prefix" => s.output.prefix = v.to_string(),
            "output.fit_file" => s.output.fit_file = boolean(v)?,
            _ => return Err(self.err(key, format!("unknown key {key}"))),
        }
        Ok(())
    }
}

/// Decimal or `p/q`.
pub fn parse_number(v: &str) -> std::result::Result<f64, String> {
    let bad = || format!("expected a number, got `{v}`");
    let x = match v.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(format!("division by zero in `{v}`"));
            }
            p / q
        }
        None => v.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

/// Parses and validates a config text.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    RawConfig::parse(text)?.into_spec(None)
}

/// Reads a config file, applies `section.key=value` overrides and validates.
pub fn load_config(
    path: Option<&Path>,
    overrides: &[String],
    kind: Option<ExperimentKind>,
) -> Result<ExperimentSpec> {
    let mut raw = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| ZrError::io(p, e))?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    for o in overrides {
        raw.set(o)?;
    }
    raw.into_spec(kind)
}

fn fmt_list<T: std::fmt::Debug>(v: &[T]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

/// Fully resolved config text; `parse_config(&emit_config(s)) == s`.
pub fn emit_config(s: &ExperimentSpec) -> String {
    let e = &s.experiment;
    let mut o = String::new();
    let preset = match s.params.preset {
        Preset::Normalized => "normalized",
        Preset::Physical => "physical",
    };
    let _ = writeln!(o, "[grid]");
    let _ = writeln!(o, "n = {}", s.grid.n);
    let _ = writeln!(o, "length = {:?}", s.grid.length);
    let _ = writeln!(o, "modes_per_hat = {}", s.grid.modes_per_hat);
    let _ = writeln!(o, "\n[params]");
    let _ = writeln!(o, "preset = {preset}");
    for (k, v) in [
        ("theta", s.params.theta),
        ("gamma", s.params.gamma),
        ("omega", s.params.omega),
        ("beta", s.params.beta),
        ("nu", s.params.nu),
    ] {
        let _ = writeln!(o, "{k} = {v:?}");
    }
    let _ = writeln!(o, "\n[stepper]");
    let _ = writeln!(o, "dt = {:?}", s.stepper.dt);
    let _ = writeln!(o, "t_end = {:?}", s.stepper.t_end);
    let _ = writeln!(o, "dealias = {}", s.stepper.dealias);
    let _ = writeln!(o, "record_every = {}", s.stepper.record_every);
    let _ = writeln!(o, "midpoint_external = {}", s.stepper.midpoint_external);
    let _ = writeln!(o, "\n[experiment]");
    let _ = writeln!(o, "kind = {}", e.kind.name());
    let _ = writeln!(o, "seed = {}", e.seed);
    let _ = writeln!(o, "data = {}", e.data.name());
    for (k, v) in [
        ("amplitude", e.amplitude),
        ("width", e.width),
        ("kick", e.kick),
        ("psi_amplitude", e.psi_amplitude),
        ("kappa", e.kappa),
        ("k", e.k),
        ("l", e.l),
    ] {
        let _ = writeln!(o, "{k} = {v:?}");
    }
    let _ = writeln!(o, "n_list = {}", fmt_list(&e.n_list));
    let _ = writeln!(o, "t_probe = {:?}", e.t_probe);
    let _ = writeln!(o, "variant = {}", e.variant.name());
    for (k, v) in [("t", e.t), ("mu", e.mu), ("m", e.m), ("c", e.c)] {
        let _ = writeln!(o, "{k} = {v:?}");
    }
    let _ = writeln!(o, "mu_list = {}", fmt_list(&e.mu_list));
    let _ = writeln!(o, "s_list = {}", fmt_list(&e.s_list));
    let _ = writeln!(o, "psi_s = {:?}", e.psi_s);
    let _ = writeln!(o, "quad_nodes = {}", e.quad_nodes);
    let _ = writeln!(o, "schedule_eps = {:?}", e.schedule_eps);
    let _ = writeln!(o, "refine = {}", e.refine);
    let _ = writeln!(o, "\n[output]");
    let _ = writeln!(o, "dir = {}", s.output.dir);
    let _ = writeln!(o, "prefix = {}", s.output.prefix);
    let _ = writeln!(o, "fit_file = {}", s.output.fit_file);
    o
}
