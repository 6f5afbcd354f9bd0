//! Run configuration: a flat TOML document with `[params]`, `[run.NAME]`,
//! `[sweep]` and `[scaling]` tables. Unknown keys are rejected.

use std::collections::BTreeMap;

use dicke_core::experiments::log_grid;
use dicke_core::linalg::c;
use dicke_core::params::table1;
use dicke_core::{Engine, InitialState, LaserDetuning, ModelKind, ModelParams, Scenario, SweepAxis, SweepSpec};
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Either a fixed laser detuning or the keyword `"resonant"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaLaserSetting {
    Value(f64),
    Keyword(String),
}

/// Physical parameters. Unset values fall back to the reference constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_rabi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_cavity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_d: Option<f64>,
    /// Raman detuning as a multiple of the reference value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_raman: Option<f64>,
    /// Cavity loss as a multiple of the reference value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    /// Real placement coefficients, one per ion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_laser: Option<DeltaLaserSetting>,
}

/// One scenario. Parameter keys given here override `[params]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_engine")]
    pub engine: String,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    #[serde(default = "default_initial")]
    pub initial: String,
    #[serde(default = "default_true")]
    pub emission: bool,
    #[serde(default = "default_n_max")]
    pub n_max: usize,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_rabi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_cavity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_raman: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_laser: Option<DeltaLaserSetting>,
}

fn default_model() -> String {
    "effective".into()
}
fn default_engine() -> String {
    "lindblad".into()
}
fn default_n_traj() -> usize {
    1000
}
fn default_seed() -> u64 {
    1
}
fn default_t_max() -> f64 {
    10.0
}
fn default_n_points() -> usize {
    400
}
fn default_initial() -> String {
    "ion1".into()
}
fn default_true() -> bool {
    true
}
fn default_n_max() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(default = "default_ratio_min")]
    pub delta_ratio_min: f64,
    #[serde(default = "default_ratio_max")]
    pub delta_ratio_max: f64,
    #[serde(default = "default_scaling_points")]
    pub points: usize,
}

fn default_ratio_min() -> f64 {
    10.0
}
fn default_ratio_max() -> f64 {
    1000.0
}
fn default_scaling_points() -> usize {
    41
}

impl Default for ScalingSection {
    fn default() -> Self {
        ScalingSection {
            delta_ratio_min: default_ratio_min(),
            delta_ratio_max: default_ratio_max(),
            points: default_scaling_points(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub params: ParamsSection,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub run: BTreeMap<String, RunSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Invalid(msg.into())
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Applies command-line overrides to every trajectory run.
    pub fn override_runs(&mut self, seed: Option<u64>, traj: Option<usize>) {
        for run in self.run.values_mut().filter(|r| r.engine == "mcwf") {
            if let Some(s) = seed {
                run.seed = s;
            }
            if let Some(n) = traj {
                run.n_traj = n;
            }
        }
    }

    pub fn scenarios(&self) -> Result<Vec<Scenario>, Failure> {
        if self.run.is_empty() {
            return Err(invalid("config defines no [run.NAME] table"));
        }
        self.run.iter().map(|(name, run)| run.scenario(name, &self.params)).collect()
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec, Failure> {
        let sw = self.sweep.as_ref().ok_or_else(|| invalid("config has no [sweep] table"))?;
        if self.run.len() != 1 {
            return Err(invalid(format!("a sweep needs exactly one [run.NAME] template, found {}", self.run.len())));
        }
        let (name, run) = self.run.iter().next().unwrap();
        let template = run.scenario(name, &self.params)?;
        let axis = SweepAxis::from_name(&sw.axis)
            .ok_or_else(|| invalid(format!("sweep.axis: unknown axis `{}` (r1, delta_laser, delta_raman, kappa)", sw.axis)))?;
        let spec = SweepSpec { axis, values: sw.grid()?, template };
        spec.validate()?;
        Ok(spec)
    }

    /// Raman detunings of the scaling report and the base parameters.
    pub fn scaling_grid(&self) -> Result<(ModelParams, Vec<f64>), Failure> {
        let sc = self.scaling.clone().unwrap_or_default();
        let (lo, hi) = (sc.delta_ratio_min, sc.delta_ratio_max);
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(invalid(format!("scaling: need 0 < delta_ratio_min < delta_ratio_max, got {lo} and {hi}")));
        }
        if sc.points < 2 {
            return Err(invalid("scaling.points must be at least 2"));
        }
        let (params, _) = resolve_params(&self.params)?;
        let grid = log_grid(lo, hi, sc.points).into_iter().map(|r| r * table1::DELTA_RAMAN).collect();
        Ok((params, grid))
    }
}

impl SweepSection {
    fn grid(&self) -> Result<Vec<f64>, Failure> {
        match (&self.values, self.start, self.stop, self.step) {
            (Some(v), None, None, None) => {
                if v.is_empty() {
                    return Err(invalid("sweep.values is empty"));
                }
                Ok(v.clone())
            }
            (None, Some(a), Some(b), Some(h)) => {
                if !(h > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
                    return Err(invalid(format!("sweep: need step > 0 and stop >= start, got {a}..{b} step {h}")));
                }
                // Rounded to suppress accumulated float noise in the axis column.
                let n = ((b - a) / h + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| round12(a + h * k as f64)).collect())
            }
            _ => Err(invalid("sweep: give either `values` or all of `start`, `stop`, `step`")),
        }
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

impl RunSection {
    fn overrides(&self) -> ParamsSection {
        ParamsSection {
            omega_rabi: self.omega_rabi,
            g_cavity: self.g_cavity,
            gamma_s: self.gamma_s,
            gamma_d: self.gamma_d,
            delta_ratio: self.delta_ratio,
            delta_raman: self.delta_raman,
            kappa_ratio: self.kappa_ratio,
            kappa: self.kappa,
            r1: self.r1,
            beta: self.beta.clone(),
            delta_laser: self.delta_laser.clone(),
        }
    }

    pub fn scenario(&self, name: &str, base: &ParamsSection) -> Result<Scenario, Failure> {
        let ctx = |key: &str| format!("run.{name}.{key}");
        let model = ModelKind::from_name(&self.model).ok_or_else(|| {
            invalid(format!(
                "{}: unknown model `{}` (dicke_ideal, dicke_lossy, effective, full)",
                ctx("model"),
                self.model
            ))
        })?;
        let engine = match self.engine.as_str() {
            "closed_form" => Engine::ClosedForm,
            "lindblad" => Engine::Lindblad,
            "mcwf" => Engine::Mcwf { n_traj: self.n_traj, seed: self.seed },
            other => {
                return Err(invalid(format!("{}: unknown engine `{other}` (closed_form, lindblad, mcwf)", ctx("engine"))))
            }
        };
        let initial = InitialState::from_name(&self.initial).ok_or_else(|| {
            invalid(format!(
                "{}: unknown initial state `{}` (ion1, ion2, subradiant, superradiant)",
                ctx("initial"),
                self.initial
            ))
        })?;
        let (params, delta_laser) = resolve_params(&merge(base, &self.overrides()))?;
        let mut s = Scenario::new(name, model, params, engine).with_time(self.t_max, self.n_points).with_initial(initial);
        s.delta_laser = delta_laser;
        s.emission = self.emission;
        s.n_max = self.n_max;
        s.validate().map_err(|e| invalid(format!("run.{name}: {e}")))?;
        Ok(s)
    }
}

/// Run-level overrides win. Keys that describe the same quantity
/// (`delta_ratio`/`delta_raman`, `kappa_ratio`/`kappa`, `r1`/`beta`) are
/// overridden as a group.
fn merge(base: &ParamsSection, over: &ParamsSection) -> ParamsSection {
    let det = over.delta_ratio.is_some() || over.delta_raman.is_some();
    let kap = over.kappa_ratio.is_some() || over.kappa.is_some();
    let pl = over.r1.is_some() || over.beta.is_some();
    let src = |over_wins: bool| if over_wins { over } else { base };
    ParamsSection {
        omega_rabi: over.omega_rabi.or(base.omega_rabi),
        g_cavity: over.g_cavity.or(base.g_cavity),
        gamma_s: over.gamma_s.or(base.gamma_s),
        gamma_d: over.gamma_d.or(base.gamma_d),
        delta_ratio: src(det).delta_ratio,
        delta_raman: src(det).delta_raman,
        kappa_ratio: src(kap).kappa_ratio,
        kappa: src(kap).kappa,
        r1: src(pl).r1,
        beta: src(pl).beta.clone(),
        delta_laser: over.delta_laser.clone().or_else(|| base.delta_laser.clone()),
    }
}

fn exclusive(a: (&str, Option<f64>), b: (&str, Option<f64>)) -> Result<(), Failure> {
    if a.1.is_some() && b.1.is_some() {
        return Err(invalid(format!("set only one of `{}` and `{}`", a.0, b.0)));
    }
    Ok(())
}

fn resolve_params(p: &ParamsSection) -> Result<(ModelParams, LaserDetuning), Failure> {
    exclusive(("delta_ratio", p.delta_ratio), ("delta_raman", p.delta_raman))?;
    exclusive(("kappa_ratio", p.kappa_ratio), ("kappa", p.kappa))?;
    if p.r1.is_some() && p.beta.is_some() {
        return Err(invalid("set only one of `r1` and `beta`"));
    }
    let mut m = ModelParams::table1();
    if let Some(v) = p.omega_rabi {
        m.omega_rabi = v;
    }
    if let Some(v) = p.g_cavity {
        m.g_cavity = v;
    }
    if let Some(v) = p.gamma_s {
        m.gamma_s = v;
    }
    if let Some(v) = p.gamma_d {
        m.gamma_d = v;
    }
    if let Some(r) = p.delta_ratio {
        m = m.with_detuning_ratio(r);
    }
    if let Some(v) = p.delta_raman {
        m.delta_raman = v;
    }
    if let Some(r) = p.kappa_ratio {
        m = m.with_kappa_ratio(r);
    }
    if let Some(v) = p.kappa {
        m.kappa = v;
    }
    if let Some(r1) = p.r1 {
        m = m.with_r1(r1).map_err(|e| invalid(format!("r1: {e}")))?;
    }
    if let Some(b) = &p.beta {
        if b.len() != 2 {
            return Err(invalid(format!("beta: expected 2 placement coefficients, got {}", b.len())));
        }
        m = m.with_beta(b.iter().map(|&x| c(x, 0.0)).collect());
    }
    let delta_laser = match &p.delta_laser {
        None => LaserDetuning::Value(0.0),
        Some(DeltaLaserSetting::Value(v)) => LaserDetuning::Value(*v),
        Some(DeltaLaserSetting::Keyword(k)) if k == "resonant" => LaserDetuning::Resonant,
        Some(DeltaLaserSetting::Keyword(k)) => {
            return Err(invalid(format!("delta_laser: expected a number or \"resonant\", got \"{k}\"")))
        }
    };
    if let LaserDetuning::Value(v) = delta_laser {
        m.delta_laser = v;
    }
    m.validate().map_err(|e| invalid(e.to_string()))?;
    Ok((m, delta_laser))
}
