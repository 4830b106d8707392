//! Experiment configuration files.
//!
//! Flat `key = value unit` lines grouped under `[section]` headers, `#`
//! comments. Every physical value carries a unit; frequencies are read as
//! f/2π (`kHz`, `Hz`, `MHz`) or as angular frequencies (`rad/s`).
//!
//! ```text
//! [model]
//! kind = rabi
//!
//! [params]
//! omega = 0.30 kHz
//! Omega = 320 kHz
//! g = 4 kHz
//! gamma = 0.08 kHz
//! z = 14 nm
//! F = 5 yN
//! ```
//!
//! [`ExperimentConfig::to_text`] writes the fully resolved configuration in
//! SI units; reading it back gives an identical configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use rabi_sense::dynamics::{EvolveConfig, MAX_DIRECT_DIM};
use rabi_sense::hilbert::{HilbertSpec, SystemParams};
use rabi_sense::metrology::RepetitionBudget;
use rabi_sense::protocol::SqueezeProtocolParams;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Frequency,
    Length,
    Force,
    Time,
    Angle,
    Plain,
}

impl Dim {
    fn si_unit(self) -> &'static str {
        match self {
            Dim::Frequency => "rad/s",
            Dim::Length => "m",
            Dim::Force => "N",
            Dim::Time => "s",
            Dim::Angle => "rad",
            Dim::Plain => "",
        }
    }

    fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dim::Frequency, "rad/s") => 1.0,
            (Dim::Frequency, "Hz") => 2.0 * PI,
            (Dim::Frequency, "kHz") => 2.0 * PI * 1e3,
            (Dim::Frequency, "MHz") => 2.0 * PI * 1e6,
            (Dim::Length, "m") => 1.0,
            (Dim::Length, "um") => 1e-6,
            (Dim::Length, "nm") => 1e-9,
            (Dim::Force, "N") => 1.0,
            (Dim::Force, "zN") => 1e-21,
            (Dim::Force, "yN") => 1e-24,
            (Dim::Force, "xN") => 1e-27,
            (Dim::Time, "s") => 1.0,
            (Dim::Time, "ms") => 1e-3,
            (Dim::Time, "us") => 1e-6,
            (Dim::Angle, "rad") => 1.0,
            (Dim::Angle, "deg") => PI / 180.0,
            (Dim::Plain, "") => 1.0,
            _ => return None,
        };
        Some(f)
    }

    fn accepted(self) -> &'static str {
        match self {
            Dim::Frequency => "kHz, Hz, MHz or rad/s",
            Dim::Length => "nm, um or m",
            Dim::Force => "yN, xN, zN or N",
            Dim::Time => "ms, us or s",
            Dim::Angle => "rad or deg",
            Dim::Plain => "no unit",
        }
    }
}

/// Keys accepted in each section.
const SCHEMA: &[(&str, &[&str])] = &[
    ("model", &["kind"]),
    ("params", &["omega", "Omega", "g", "gamma", "z", "F"]),
    ("protocol", &["xi", "phi", "Omega0", "kappa", "t_final"]),
    ("hilbert", &["fock_dim", "spin"]),
    (
        "evolve",
        &["t_final", "record_every", "rel_tol", "abs_tol", "max_step", "tail_threshold"],
    ),
    ("steady", &["method", "horizon", "eps"]),
    ("qfi", &["epsilon"]),
    ("budget", &["total_time", "cycle_time"]),
    ("sweep", &["variable", "start", "stop", "points", "scale", "numeric"]),
    ("output", &["dir"]),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

/// Parsed but untyped configuration: `section.key` → value text.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

fn check_key(section: &str, key: &str, line: Option<usize>) -> Result<()> {
    let field = format!("{section}.{key}");
    match SCHEMA.iter().find(|(s, _)| *s == section) {
        None => Err(CliError::config(line, field, format!("unknown section [{section}]"))),
        Some((_, keys)) if !keys.contains(&key) => Err(CliError::config(
            line,
            field,
            format!("unknown key; [{section}] accepts {}", keys.join(", ")),
        )),
        _ => Ok(()),
    }
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section: Option<String> = None;
        for (idx, full) in text.lines().enumerate() {
            let line = Some(idx + 1);
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| {
                    CliError::config(line, content, "section header must end with `]`")
                })?;
                let name = name.trim();
                if !SCHEMA.iter().any(|(s, _)| *s == name) {
                    return Err(CliError::config(line, name, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::config(line, content, "expected `key = value`"))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| CliError::config(line, key, "key outside of any [section]"))?;
            check_key(sec, key, line)?;
            let value = value.trim();
            if value.is_empty() {
                return Err(CliError::config(line, format!("{sec}.{key}"), "missing value"));
            }
            let field = format!("{sec}.{key}");
            if let Some(prev) = raw.entries.get(&field) {
                return Err(CliError::config(
                    line,
                    field,
                    format!("duplicate key (first set on line {})", prev.line.unwrap_or(0)),
                ));
            }
            raw.entries.insert(
                field,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(raw)
    }

    /// Applies a `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (field, value) = assignment.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("--set expects section.key=value, got `{assignment}`"))
        })?;
        let field = field.trim();
        let (sec, key) = field.split_once('.').ok_or_else(|| {
            CliError::Usage(format!("--set key must look like section.key, got `{field}`"))
        })?;
        check_key(sec, key, None)?;
        self.entries.insert(
            field.to_string(),
            Entry {
                value: value.trim().to_string(),
                line: None,
            },
        );
        Ok(())
    }

    fn entry(&self, field: &str) -> Option<&Entry> {
        self.entries.get(field)
    }

    fn has_section(&self, section: &str) -> bool {
        let prefix = format!("{section}.");
        self.entries.keys().any(|k| k.starts_with(&prefix))
    }

    fn word(&self, field: &str) -> Option<(&str, Option<usize>)> {
        self.entry(field).map(|e| (e.value.as_str(), e.line))
    }

    fn quantity(&self, field: &str, dim: Dim) -> Result<Option<f64>> {
        let Some(e) = self.entry(field) else {
            return Ok(None);
        };
        parse_quantity(&e.value, dim)
            .map(Some)
            .map_err(|m| CliError::config(e.line, field, m))
    }

    fn required(&self, field: &str, dim: Dim) -> Result<f64> {
        self.quantity(field, dim)?
            .ok_or_else(|| CliError::config(None, field, "required but missing"))
    }

    fn integer(&self, field: &str) -> Result<Option<usize>> {
        let Some(e) = self.entry(field) else {
            return Ok(None);
        };
        e.value
            .parse()
            .map(Some)
            .map_err(|_| CliError::config(e.line, field, format!("expected an integer, got `{}`", e.value)))
    }

    fn boolean(&self, field: &str) -> Result<Option<bool>> {
        let Some(e) = self.entry(field) else {
            return Ok(None);
        };
        match e.value.as_str() {
            "true" | "yes" | "on" => Ok(Some(true)),
            "false" | "no" | "off" => Ok(Some(false)),
            other => Err(CliError::config(e.line, field, format!("expected true or false, got `{other}`"))),
        }
    }
}

fn parse_quantity(text: &str, dim: Dim) -> std::result::Result<f64, String> {
    let mut parts = text.split_whitespace();
    let number = parts.next().unwrap_or("");
    let unit: String = parts.collect::<Vec<_>>().join(" ");
    let value: f64 = number
        .parse()
        .map_err(|_| format!("expected a number, got `{number}`"))?;
    if !value.is_finite() {
        return Err(format!("value `{number}` is not finite"));
    }
    if dim != Dim::Plain && unit.is_empty() {
        return Err(format!("missing unit (use {})", dim.accepted()));
    }
    let factor = dim
        .factor(&unit)
        .ok_or_else(|| format!("unit `{unit}` not accepted here (use {})", dim.accepted()))?;
    Ok(value * factor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Rabi,
    Effective,
    Squeezed,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Rabi => "rabi",
            ModelKind::Effective => "effective",
            ModelKind::Squeezed => "squeezed",
        }
    }
}

/// How `steady`, `sweep` and `qfi` obtain numerical steady states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Liouvillian null space.
    Direct,
    /// Time evolution until the residual drops below `eps·γ`.
    Evolve,
    /// Time evolution for a fixed number of damping times.
    Plateau,
}

impl SteadyMethod {
    fn name(self) -> &'static str {
        match self {
            SteadyMethod::Direct => "direct",
            SteadyMethod::Evolve => "evolve",
            SteadyMethod::Plateau => "plateau",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadySettings {
    pub method: SteadyMethod,
    /// Plateau horizon in units of `1/γ`.
    pub horizon: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    Omega,
    Field,
    G,
    Gamma,
    Z,
    Force,
    Xi,
    Kappa,
    Omega0,
}

const SWEEP_VARS: &[(&str, SweepVar)] = &[
    ("omega", SweepVar::Omega),
    ("Omega", SweepVar::Field),
    ("g", SweepVar::G),
    ("gamma", SweepVar::Gamma),
    ("z", SweepVar::Z),
    ("F", SweepVar::Force),
    ("xi", SweepVar::Xi),
    ("kappa", SweepVar::Kappa),
    ("Omega0", SweepVar::Omega0),
];

impl SweepVar {
    pub fn name(self) -> &'static str {
        SWEEP_VARS.iter().find(|(_, v)| *v == self).map(|(n, _)| *n).unwrap_or("?")
    }

    pub fn dim(self) -> Dim {
        match self {
            SweepVar::Z => Dim::Length,
            SweepVar::Force => Dim::Force,
            _ => Dim::Frequency,
        }
    }

    fn is_protocol(self) -> bool {
        matches!(self, SweepVar::Xi | SweepVar::Kappa | SweepVar::Omega0)
    }

    /// CSV column holding the swept value: frequencies as f/2π in Hz,
    /// everything else in SI.
    pub fn column(self) -> String {
        match self.dim() {
            Dim::Frequency => format!("{}_Hz", self.name()),
            d => format!("{}_{}", self.name(), d.si_unit()),
        }
    }

    /// The swept value as written in its CSV column.
    pub fn display_value(self, si: f64) -> f64 {
        match self.dim() {
            Dim::Frequency => si / (2.0 * PI),
            _ => si,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
    /// Add numerically computed steady-state columns.
    pub numeric: bool,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => self.start + (self.stop - self.start) * t,
                    Scale::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSettings {
    pub xi: f64,
    pub phi: f64,
    pub omega0: f64,
    pub kappa: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub params: SystemParams,
    pub protocol: Option<ProtocolSettings>,
    pub hilbert: HilbertSpec,
    pub evolve: EvolveConfig,
    pub steady: SteadySettings,
    /// Force step of the fidelity QFI; `None` uses the library default.
    pub qfi_epsilon: Option<f64>,
    pub budget: RepetitionBudget,
    pub sweep: Option<SweepAxis>,
    pub output: PathBuf,
}

impl ExperimentConfig {
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut raw = RawConfig::parse(text)?;
        for o in overrides {
            raw.set(o)?;
        }
        Self::from_raw(&raw)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let model = match raw.word("model.kind") {
            None => return Err(CliError::config(None, "model.kind", "required but missing")),
            Some(("rabi", _)) => ModelKind::Rabi,
            Some(("effective", _)) => ModelKind::Effective,
            Some(("squeezed", _)) => ModelKind::Squeezed,
            Some((other, line)) => {
                return Err(CliError::config(
                    line,
                    "model.kind",
                    format!("unknown model `{other}`; use rabi, effective or squeezed"),
                ))
            }
        };

        let squeezed = model == ModelKind::Squeezed;
        let params = SystemParams {
            omega: raw.required("params.omega", Dim::Frequency)?,
            field: if squeezed {
                raw.quantity("params.Omega", Dim::Frequency)?.unwrap_or(0.0)
            } else {
                raw.required("params.Omega", Dim::Frequency)?
            },
            g: raw.required("params.g", Dim::Frequency)?,
            gamma: raw.required("params.gamma", Dim::Frequency)?,
            z: raw.required("params.z", Dim::Length)?,
            force: raw.quantity("params.F", Dim::Force)?.unwrap_or(0.0),
        };
        params.validate()?;

        let protocol = if squeezed {
            Some(ProtocolSettings {
                xi: raw.required("protocol.xi", Dim::Frequency)?,
                phi: raw.quantity("protocol.phi", Dim::Angle)?.unwrap_or(PI),
                omega0: raw.required("protocol.Omega0", Dim::Frequency)?,
                kappa: raw.required("protocol.kappa", Dim::Frequency)?,
                t_final: raw.required("protocol.t_final", Dim::Time)?,
            })
        } else {
            if raw.has_section("protocol") {
                return Err(CliError::config(
                    None,
                    "protocol",
                    "[protocol] only applies to model.kind = squeezed",
                ));
            }
            None
        };

        let default_spin = model != ModelKind::Effective;
        let include_spin = raw.boolean("hilbert.spin")?.unwrap_or(default_spin);
        if include_spin != default_spin {
            let line = raw.entry("hilbert.spin").and_then(|e| e.line);
            return Err(CliError::config(
                line,
                "hilbert.spin",
                format!("the {} model {} the spin", model.name(), if default_spin { "needs" } else { "has no" }),
            ));
        }
        let default_fock = if squeezed { 60 } else { 40 };
        let hilbert = HilbertSpec {
            fock_dim: raw.integer("hilbert.fock_dim")?.unwrap_or(default_fock),
            include_spin,
        };
        hilbert.validate()?;

        let t_final = match raw.quantity("evolve.t_final", Dim::Time)? {
            Some(t) => t,
            None => match protocol {
                Some(pr) => pr.t_final,
                None if params.gamma > 0.0 => 15.0 / params.gamma,
                None => {
                    return Err(CliError::config(
                        None,
                        "evolve.t_final",
                        "required when gamma = 0",
                    ))
                }
            },
        };
        let mut evolve = EvolveConfig::new(
            t_final,
            raw.quantity("evolve.record_every", Dim::Time)?.unwrap_or(t_final / 100.0),
        );
        if let Some(v) = raw.quantity("evolve.rel_tol", Dim::Plain)? {
            evolve.rel_tol = v;
        }
        if let Some(v) = raw.quantity("evolve.abs_tol", Dim::Plain)? {
            evolve.abs_tol = v;
        }
        if let Some(v) = raw.quantity("evolve.max_step", Dim::Time)? {
            evolve.max_step = v;
        }
        if let Some(v) = raw.quantity("evolve.tail_threshold", Dim::Plain)? {
            evolve.tail_threshold = v;
        }
        evolve.validate()?;

        let method = match raw.word("steady.method") {
            None if model == ModelKind::Effective && hilbert.dim() <= MAX_DIRECT_DIM => SteadyMethod::Direct,
            None if model == ModelKind::Effective => SteadyMethod::Evolve,
            None => SteadyMethod::Plateau,
            Some(("direct", _)) => SteadyMethod::Direct,
            Some(("evolve", _)) => SteadyMethod::Evolve,
            Some(("plateau", _)) => SteadyMethod::Plateau,
            Some((other, line)) => {
                return Err(CliError::config(
                    line,
                    "steady.method",
                    format!("unknown method `{other}`; use direct, evolve or plateau"),
                ))
            }
        };
        let steady = SteadySettings {
            method,
            horizon: raw.quantity("steady.horizon", Dim::Plain)?.unwrap_or(10.0),
            eps: raw.quantity("steady.eps", Dim::Plain)?.unwrap_or(1e-6),
        };
        if !(steady.horizon > 0.0 && steady.eps > 0.0) {
            return Err(CliError::config(None, "steady", "horizon and eps must be positive"));
        }

        let budget = match (
            raw.quantity("budget.total_time", Dim::Time)?,
            raw.quantity("budget.cycle_time", Dim::Time)?,
        ) {
            (None, None) => RepetitionBudget::single_shot(),
            (Some(total), Some(cycle)) => RepetitionBudget::new(total, cycle)?,
            _ => {
                return Err(CliError::config(
                    None,
                    "budget",
                    "total_time and cycle_time must be given together",
                ))
            }
        };

        let sweep = if raw.has_section("sweep") {
            Some(sweep_axis(raw, model)?)
        } else {
            None
        };

        Ok(ExperimentConfig {
            model,
            params,
            protocol,
            hilbert,
            evolve,
            steady,
            qfi_epsilon: raw.quantity("qfi.epsilon", Dim::Force)?,
            budget,
            sweep,
            output: raw
                .word("output.dir")
                .map(|(d, _)| PathBuf::from(d))
                .unwrap_or_else(|| PathBuf::from(".")),
        })
    }

    pub fn protocol_params(&self) -> Result<SqueezeProtocolParams> {
        let pr = self.protocol.ok_or_else(|| {
            CliError::Usage("this command needs model.kind = squeezed and a [protocol] section".into())
        })?;
        let mut p = SqueezeProtocolParams::new(self.params, pr.xi, pr.omega0, pr.kappa, pr.t_final);
        p.phi = pr.phi;
        Ok(p)
    }

    /// Returns a copy with `var` set to `value` (SI).
    pub fn with_value(&self, var: SweepVar, value: f64) -> Self {
        let mut c = self.clone();
        let p = &mut c.params;
        match var {
            SweepVar::Omega => p.omega = value,
            SweepVar::Field => p.field = value,
            SweepVar::G => p.g = value,
            SweepVar::Gamma => p.gamma = value,
            SweepVar::Z => p.z = value,
            SweepVar::Force => p.force = value,
            SweepVar::Xi | SweepVar::Kappa | SweepVar::Omega0 => {
                if let Some(pr) = c.protocol.as_mut() {
                    match var {
                        SweepVar::Xi => pr.xi = value,
                        SweepVar::Kappa => pr.kappa = value,
                        _ => pr.omega0 = value,
                    }
                }
            }
        }
        c
    }

    /// Resolved configuration in SI units, readable by [`Self::from_text`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let q = |s: &mut String, key: &str, v: f64, dim: Dim| {
            let unit = dim.si_unit();
            if unit.is_empty() {
                let _ = writeln!(s, "{key} = {v:?}");
            } else {
                let _ = writeln!(s, "{key} = {v:?} {unit}");
            }
        };
        let _ = writeln!(s, "[model]\nkind = {}\n", self.model.name());
        let p = &self.params;
        s.push_str("[params]\n");
        q(&mut s, "omega", p.omega, Dim::Frequency);
        q(&mut s, "Omega", p.field, Dim::Frequency);
        q(&mut s, "g", p.g, Dim::Frequency);
        q(&mut s, "gamma", p.gamma, Dim::Frequency);
        q(&mut s, "z", p.z, Dim::Length);
        q(&mut s, "F", p.force, Dim::Force);
        if let Some(pr) = &self.protocol {
            s.push_str("\n[protocol]\n");
            q(&mut s, "xi", pr.xi, Dim::Frequency);
            q(&mut s, "phi", pr.phi, Dim::Angle);
            q(&mut s, "Omega0", pr.omega0, Dim::Frequency);
            q(&mut s, "kappa", pr.kappa, Dim::Frequency);
            q(&mut s, "t_final", pr.t_final, Dim::Time);
        }
        let _ = writeln!(
            s,
            "\n[hilbert]\nfock_dim = {}\nspin = {}",
            self.hilbert.fock_dim, self.hilbert.include_spin
        );
        let e = &self.evolve;
        s.push_str("\n[evolve]\n");
        q(&mut s, "t_final", e.t_final, Dim::Time);
        q(&mut s, "record_every", e.record_every, Dim::Time);
        q(&mut s, "rel_tol", e.rel_tol, Dim::Plain);
        q(&mut s, "abs_tol", e.abs_tol, Dim::Plain);
        if e.max_step.is_finite() {
            q(&mut s, "max_step", e.max_step, Dim::Time);
        }
        q(&mut s, "tail_threshold", e.tail_threshold, Dim::Plain);
        let _ = writeln!(s, "\n[steady]\nmethod = {}", self.steady.method.name());
        q(&mut s, "horizon", self.steady.horizon, Dim::Plain);
        q(&mut s, "eps", self.steady.eps, Dim::Plain);
        if let Some(eps) = self.qfi_epsilon {
            s.push_str("\n[qfi]\n");
            q(&mut s, "epsilon", eps, Dim::Force);
        }
        s.push_str("\n[budget]\n");
        q(&mut s, "total_time", self.budget.total_time, Dim::Time);
        q(&mut s, "cycle_time", self.budget.cycle_time, Dim::Time);
        if let Some(a) = &self.sweep {
            let _ = writeln!(s, "\n[sweep]\nvariable = {}", a.variable.name());
            q(&mut s, "start", a.start, a.variable.dim());
            q(&mut s, "stop", a.stop, a.variable.dim());
            let _ = writeln!(
                s,
                "points = {}\nscale = {}\nnumeric = {}",
                a.points,
                if a.scale == Scale::Log { "log" } else { "linear" },
                a.numeric
            );
        }
        let _ = writeln!(s, "\n[output]\ndir = {}", self.output.display());
        s
    }
}

fn sweep_axis(raw: &RawConfig, model: ModelKind) -> Result<SweepAxis> {
    let (name, line) = raw
        .word("sweep.variable")
        .ok_or_else(|| CliError::config(None, "sweep.variable", "required but missing"))?;
    let variable = SWEEP_VARS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, v)| *v)
        .ok_or_else(|| {
            let names: Vec<&str> = SWEEP_VARS.iter().map(|(n, _)| *n).collect();
            CliError::config(
                line,
                "sweep.variable",
                format!("`{name}` is not a parameter; use one of {}", names.join(", ")),
            )
        })?;
    if variable.is_protocol() && model != ModelKind::Squeezed {
        return Err(CliError::config(
            line,
            "sweep.variable",
            format!("`{name}` only exists for model.kind = squeezed"),
        ));
    }
    let points = raw
        .integer("sweep.points")?
        .ok_or_else(|| CliError::config(None, "sweep.points", "required but missing"))?;
    if points < 2 {
        let l = raw.entry("sweep.points").and_then(|e| e.line);
        return Err(CliError::config(l, "sweep.points", "a sweep needs at least 2 points"));
    }
    let scale = match raw.word("sweep.scale") {
        None | Some(("linear", _)) => Scale::Linear,
        Some(("log", _)) => Scale::Log,
        Some((other, l)) => {
            return Err(CliError::config(l, "sweep.scale", format!("expected linear or log, got `{other}`")))
        }
    };
    let start = raw.required("sweep.start", variable.dim())?;
    let stop = raw.required("sweep.stop", variable.dim())?;
    if scale == Scale::Log && !(start > 0.0 && stop > 0.0) {
        return Err(CliError::config(None, "sweep.start", "a log sweep needs positive end points"));
    }
    Ok(SweepAxis {
        variable,
        start,
        stop,
        points,
        scale,
        numeric: raw.boolean("sweep.numeric")?.unwrap_or(false),
    })
}
