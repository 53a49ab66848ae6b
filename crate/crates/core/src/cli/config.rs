//! Run configuration: one level of `[section]` tables holding scalar keys,
//! overridable with `section.key=value` assignments.
//!
//! Every command resolves its sections to concrete values and echoes them
//! as `cfg section.key = value` header lines. Such a header is itself a
//! valid configuration source, so an output file can be fed back with
//! `--config` to reproduce it.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::pendulum::{FeedbackParams, PendulumParams};
use crate::planner::{CasimirModel, Electronics, MeasurementPlan, WireSpec};
use crate::sim::{Channel, Hooks, SimConfig, Stepper, MAX_STEP_PHASE};
use crate::spectral::Window;

pub const SECTIONS: &[&str] = &[
    "pendulum", "feedback", "sim", "hooks", "analyze", "model", "plan", "run",
];

/// Prefix of the header lines that carry configuration.
pub const HEADER_PREFIX: &str = "cfg ";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    table: Table,
}

impl RunConfig {
    /// Reads a TOML file, or the `# cfg` header of a data file written by
    /// any command.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if text.lines().any(|l| l.starts_with(&format!("# {HEADER_PREFIX}"))) {
            Self::from_header(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| {
            Error::Config(e.to_string().trim_end().to_string())
        })?;
        for (name, value) in &table {
            check_section_name(name)?;
            let Some(section) = value.as_table() else {
                return Err(Error::Config(format!("`{name}` must be a [section]")));
            };
            for (key, v) in section {
                if v.is_table() || v.is_array() {
                    return Err(Error::Config(format!(
                        "`{name}.{key}`: only scalar values are allowed"
                    )));
                }
            }
        }
        Ok(Self { table })
    }

    pub fn from_header(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, line) in text.lines().enumerate() {
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            if let Some(assignment) = rest.trim_start().strip_prefix(HEADER_PREFIX) {
                cfg.set(assignment).map_err(|e| Error::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            }
        }
        Ok(cfg)
    }

    /// Applies `section.key=value`. The value is read as a TOML scalar,
    /// falling back to a bare string.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (lhs, rhs) = assignment.split_once('=').ok_or_else(|| {
            Error::Config(format!("override `{assignment}` is not of the form section.key=value"))
        })?;
        let (section, key) = lhs.trim().split_once('.').ok_or_else(|| {
            Error::Config(format!("override key `{}` needs a section, e.g. sim.dt", lhs.trim()))
        })?;
        check_section_name(section)?;
        if key.is_empty() || key.contains('.') {
            return Err(Error::Config(format!("bad key `{key}` in `{lhs}`")));
        }
        let raw = rhs.trim();
        let value = match raw.parse::<Value>() {
            Ok(v) if !(v.is_table() || v.is_array()) => v,
            _ => Value::String(raw.to_string()),
        };
        self.table
            .entry(section.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .expect("sections are tables")
            .insert(key.to_string(), value);
        Ok(())
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.table.get(section)?.get(key)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.table.get(name).and_then(Value::as_table).is_some_and(|t| !t.is_empty())
    }

    /// Deserializes `[name]`, with missing keys taking their defaults and
    /// unknown keys rejected.
    pub fn section<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T> {
        match self.table.get(name) {
            None => Ok(T::default()),
            Some(v) => v
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(format!("[{name}] {}", e.message()))),
        }
    }

    /// Replaces `[name]` with the serialized form of `value`.
    pub fn put_section<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let table = Table::try_from(value)
            .map_err(|e| Error::Config(format!("[{name}] cannot be written: {e}")))?;
        if table.is_empty() {
            self.table.remove(name);
        } else {
            self.table.insert(name.to_string(), Value::Table(table));
        }
        Ok(())
    }

    pub fn remove_section(&mut self, name: &str) {
        self.table.remove(name);
    }

    /// `cfg section.key = value`, one per key, in sorted order.
    pub fn header_lines(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (name, section) in &self.table {
            if let Some(t) = section.as_table() {
                for (key, value) in t {
                    out.push(format!("{HEADER_PREFIX}{name}.{key} = {value}"));
                }
            }
        }
        out
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.table).expect("scalar tables serialize")
    }
}

fn check_section_name(name: &str) -> Result<()> {
    if SECTIONS.contains(&name) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unknown section `{name}` (expected one of {})",
            SECTIONS.join(", ")
        )))
    }
}

/// `[pendulum]`: either `inertia`/`damping` or `omega0`/`q`, plus
/// `stiffness` and `temperature`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumSection {
    pub inertia: Option<f64>,
    pub damping: Option<f64>,
    pub stiffness: Option<f64>,
    pub temperature: Option<f64>,
    pub omega0: Option<f64>,
    pub q: Option<f64>,
}

impl PendulumSection {
    pub fn resolve(&self) -> Result<PendulumParams> {
        let stiffness = self.stiffness.unwrap_or(1.0);
        let temperature = self.temperature.unwrap_or(300.0);
        match (self.omega0, self.q) {
            (None, None) => PendulumParams::new(
                self.inertia.unwrap_or(1.0),
                self.damping.unwrap_or(0.1),
                stiffness,
                temperature,
            ),
            (Some(w), Some(q)) if self.inertia.is_none() && self.damping.is_none() => {
                PendulumParams::from_resonance(w, q, stiffness, temperature)
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "[pendulum] give either inertia/damping or omega0/q, not both".into(),
            )),
            _ => Err(Error::Config("[pendulum] omega0 and q must be given together".into())),
        }
    }

    pub fn resolved(p: &PendulumParams) -> Self {
        Self {
            inertia: Some(p.inertia()),
            damping: Some(p.damping()),
            stiffness: Some(p.stiffness()),
            temperature: Some(p.temperature()),
            omega0: None,
            q: None,
        }
    }
}

/// `[feedback]`: either `beta`/`kappa` or the loop targets `omega0_fb`/`q_fb`.
/// An empty section means free operation.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeedbackSection {
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub omega0_fb: Option<f64>,
    pub q_fb: Option<f64>,
}

impl FeedbackSection {
    pub fn resolve(&self, p: &PendulumParams) -> Result<Option<FeedbackParams>> {
        match (self.beta, self.kappa, self.omega0_fb, self.q_fb) {
            (None, None, None, None) => Ok(None),
            (beta, Some(kappa), None, None) => {
                FeedbackParams::new(beta.unwrap_or(0.0), kappa).map(Some)
            }
            (None, None, Some(w), Some(q)) => FeedbackParams::for_loop(p, w, q).map(Some),
            _ => Err(Error::Config(
                "[feedback] give kappa (and optionally beta), or omega0_fb and q_fb".into(),
            )),
        }
    }

    pub fn resolved(fb: Option<&FeedbackParams>) -> Self {
        match fb {
            None => Self::default(),
            Some(fb) => Self {
                beta: Some(fb.beta()),
                kappa: Some(fb.kappa()),
                ..Self::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesFormat {
    #[default]
    Text,
    Binary,
}

impl SeriesFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            SeriesFormat::Text => "txt",
            SeriesFormat::Binary => "bin",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    /// Defaults to half the largest stable step.
    pub dt: Option<f64>,
    pub n_steps: usize,
    pub n_burnin: Option<usize>,
    pub seed: u64,
    pub stepper: Stepper,
    pub include_inertia: bool,
    /// Independent records; above 1 the run is an ensemble.
    pub n_records: usize,
    pub workers: usize,
    pub format: SeriesFormat,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: None,
            n_steps: 100_000,
            n_burnin: None,
            seed: 1,
            stepper: Stepper::Exact,
            include_inertia: false,
            n_records: 1,
            workers: 1,
            format: SeriesFormat::Text,
        }
    }
}

/// Physics and integration settings shared by `simulate` and `analyze`.
#[derive(Debug, Clone)]
pub struct SimSetup {
    pub sim: SimConfig,
    pub n_records: usize,
    pub workers: usize,
    pub format: SeriesFormat,
}

/// Resolves `[pendulum]`, `[feedback]`, `[sim]` and `[hooks]` and writes the
/// resolved values back into `cfg`.
pub fn resolve_sim(cfg: &mut RunConfig) -> Result<SimSetup> {
    let pendulum = cfg.section::<PendulumSection>("pendulum")?.resolve()?;
    let feedback = cfg.section::<FeedbackSection>("feedback")?.resolve(&pendulum)?;
    let mut s: SimSection = cfg.section("sim")?;
    let hooks: Hooks = cfg.section("hooks")?;
    if s.n_records == 0 {
        return Err(Error::Config("[sim] n_records must be ≥ 1".into()));
    }
    let mut sim = SimConfig {
        pendulum,
        feedback,
        include_inertia: s.include_inertia,
        dt: 1.0,
        n_steps: s.n_steps,
        n_burnin: s.n_burnin,
        seed: s.seed,
        stepper: s.stepper,
        hooks,
    };
    sim.dt = s
        .dt
        .unwrap_or(0.5 * MAX_STEP_PHASE / sim.characteristic_frequency());
    sim.n_burnin = Some(sim.burnin_steps());
    sim.validate()?;
    s.dt = Some(sim.dt);
    s.n_burnin = sim.n_burnin;
    cfg.put_section("pendulum", &PendulumSection::resolved(&pendulum))?;
    cfg.put_section("feedback", &FeedbackSection::resolved(feedback.as_ref()))?;
    cfg.put_section("sim", &s)?;
    cfg.put_section("hooks", &hooks)?;
    Ok(SimSetup {
        sim,
        n_records: s.n_records,
        workers: s.workers.max(1),
        format: s.format,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    /// Series file, or the output directory of a `simulate` run.
    pub input: Option<String>,
    pub channel: Channel,
    /// Welch segment length; defaults to the largest power of two ≤ len/8.
    pub segment_len: Option<usize>,
    pub overlap: f64,
    pub window: Window,
    /// Comparison band edges, in units of the resonance frequency.
    pub x_lo: f64,
    pub x_hi: f64,
    pub tolerance: f64,
    /// Autocorrelation lags; defaults to three relaxation times.
    pub max_lag: Option<usize>,
    /// Lever arm for the integrator-torque force model, cm.
    pub arm: f64,
    /// Averaging window of the ensemble mean-variance check, s.
    pub averaging_time: Option<f64>,
}

impl Default for AnalyzeSection {
    fn default() -> Self {
        Self {
            input: None,
            channel: Channel::Angle,
            segment_len: None,
            overlap: 0.5,
            window: Window::Hann,
            x_lo: 0.01,
            x_hi: 10.0,
            tolerance: 0.1,
            max_lag: None,
            arm: 1.0,
            averaging_time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    FreeAnglePsd,
    FreeAngleAutocorr,
    FeedbackAnglePsd,
    FeedbackForcePsd,
    FeedbackForceAutocorr,
}

impl ModelKind {
    pub fn is_autocorr(&self) -> bool {
        matches!(self, ModelKind::FreeAngleAutocorr | ModelKind::FeedbackForceAutocorr)
    }

    pub fn needs_feedback(&self) -> bool {
        !matches!(self, ModelKind::FreeAnglePsd | ModelKind::FreeAngleAutocorr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// `[model]`: grid in Hz for densities, in seconds for autocorrelations.
/// Unset bounds default to `[0.01, 10]` resonance frequencies or `[0, 10]`
/// periods.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub arm: f64,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub n_points: usize,
    pub spacing: Option<Spacing>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::FreeAnglePsd,
            arm: 1.0,
            start: None,
            stop: None,
            n_points: 200,
            spacing: None,
        }
    }
}

impl ModelSection {
    /// Grid points. `scale` is the resonance frequency (Hz) for densities and
    /// the period (s) for autocorrelations.
    pub fn grid(&mut self, scale: f64) -> Result<Vec<f64>> {
        let auto = self.kind.is_autocorr();
        let start = *self.start.get_or_insert(if auto { 0.0 } else { 0.01 * scale });
        let stop = *self.stop.get_or_insert(10.0 * scale);
        let spacing = *self
            .spacing
            .get_or_insert(if auto { Spacing::Linear } else { Spacing::Log });
        let n = self.n_points;
        if n < 2 || !(stop > start) || !start.is_finite() || !stop.is_finite() || start < 0.0 {
            return Err(Error::Config(format!(
                "[model] need 0 ≤ start < stop and n_points ≥ 2, got [{start}, {stop}] × {n}"
            )));
        }
        Ok(match spacing {
            Spacing::Linear => (0..n)
                .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                .collect(),
            Spacing::Log => {
                if start <= 0.0 {
                    return Err(Error::Config("[model] log spacing needs start > 0".into()));
                }
                let ratio = stop / start;
                (0..n)
                    .map(|i| start * ratio.powf(i as f64 / (n - 1) as f64))
                    .collect()
            }
        })
    }
}

/// `[plan]`: flat view of a measurement plan. Unset keys take the
/// thermal-Casimir preset; `stiffness` defaults to the wire's value.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSection {
    pub wire_radius: Option<f64>,
    pub wire_length: Option<f64>,
    pub wire_viscosity: Option<f64>,
    pub wire_torsion_modulus: Option<f64>,
    pub inertia: Option<f64>,
    pub damping: Option<f64>,
    pub stiffness: Option<f64>,
    pub arm: Option<f64>,
    pub curvature: Option<f64>,
    pub separation: Option<f64>,
    pub temperature: Option<f64>,
    pub accuracy: Option<f64>,
    pub averaging_time: Option<f64>,
    pub casimir_model: Option<CasimirModel>,
    pub excess_noise_factor: Option<f64>,
    /// V/√Hz; 0 drops the electronics entry.
    pub voltage_noise_density: Option<f64>,
    /// V/rad
    pub sensitivity: Option<f64>,
}

impl PlanSection {
    pub fn resolve(&self) -> Result<MeasurementPlan> {
        let preset = MeasurementPlan::thermal_casimir_preset();
        let wire = WireSpec {
            radius: self.wire_radius.unwrap_or(preset.wire.radius),
            length: self.wire_length.unwrap_or(preset.wire.length),
            viscosity: self.wire_viscosity.unwrap_or(preset.wire.viscosity),
            torsion_modulus: self.wire_torsion_modulus.unwrap_or(preset.wire.torsion_modulus),
        };
        wire.validate()?;
        let stiffness = match self.stiffness {
            Some(s) => s,
            None => crate::planner::wire_properties(&wire)?.stiffness,
        };
        let temperature = self.temperature.unwrap_or(preset.temperature);
        let pendulum = PendulumParams::new(
            self.inertia.unwrap_or(preset.pendulum.inertia()),
            self.damping.unwrap_or(preset.pendulum.damping()),
            stiffness,
            temperature,
        )?;
        let default_e = preset.electronics.expect("preset has electronics");
        let e_n = self.voltage_noise_density.unwrap_or(default_e.voltage_noise_density);
        let electronics = (e_n != 0.0).then(|| Electronics {
            voltage_noise_density: e_n,
            sensitivity: self.sensitivity.unwrap_or(default_e.sensitivity),
        });
        let plan = MeasurementPlan {
            wire,
            pendulum,
            arm: self.arm.unwrap_or(preset.arm),
            curvature: self.curvature.unwrap_or(preset.curvature),
            separation: self.separation.unwrap_or(preset.separation),
            temperature,
            accuracy: self.accuracy.unwrap_or(preset.accuracy),
            averaging_time: self.averaging_time.unwrap_or(preset.averaging_time),
            casimir_model: self.casimir_model.unwrap_or(preset.casimir_model),
            excess_noise_factor: self.excess_noise_factor.unwrap_or(preset.excess_noise_factor),
            electronics,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn resolved(plan: &MeasurementPlan) -> Self {
        Self {
            wire_radius: Some(plan.wire.radius),
            wire_length: Some(plan.wire.length),
            wire_viscosity: Some(plan.wire.viscosity),
            wire_torsion_modulus: Some(plan.wire.torsion_modulus),
            inertia: Some(plan.pendulum.inertia()),
            damping: Some(plan.pendulum.damping()),
            stiffness: Some(plan.pendulum.stiffness()),
            arm: Some(plan.arm),
            curvature: Some(plan.curvature),
            separation: Some(plan.separation),
            temperature: Some(plan.temperature),
            accuracy: Some(plan.accuracy),
            averaging_time: Some(plan.averaging_time),
            casimir_model: Some(plan.casimir_model),
            excess_noise_factor: Some(plan.excess_noise_factor),
            voltage_noise_density: Some(
                plan.electronics.map_or(0.0, |e| e.voltage_noise_density),
            ),
            sensitivity: plan.electronics.map(|e| e.sensitivity),
        }
    }
}
