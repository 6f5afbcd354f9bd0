//! Scenarios binding parameters, models and engines; parameter sweeps and
//! the derived summaries used to compare against reference results.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{self, AmplitudePair, DickeParams};
use crate::dynamics::lindblad::{integrate_lindblad, LindbladSystem, Method};
use crate::dynamics::mcwf::{ensemble_reduce, jump_statistics, run_mcwf, JumpStatistics, McwfOptions};
use crate::error::{Error, Result};
use crate::linalg::{c, CVector, ZERO};
use crate::observables::DensityMatrix;
use crate::params::ModelParams;
use crate::reduce::{self, EffectiveParams, Frame};
use crate::series::{table_from_states, TimeSeriesTable};
use crate::space::{BasisState, HilbertSpace, Level, R4_ION1, R4_ION2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Effective couplings, no losses at all.
    DickeIdeal,
    /// Effective couplings with cavity loss only.
    DickeLossy,
    /// Effective model with cavity loss and, optionally, emission channels.
    EffectiveTwoLevel,
    /// Three-level ions and a truncated Fock space.
    FullThreeLevel,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DickeIdeal => "dicke_ideal",
            ModelKind::DickeLossy => "dicke_lossy",
            ModelKind::EffectiveTwoLevel => "effective",
            ModelKind::FullThreeLevel => "full",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [ModelKind::DickeIdeal, ModelKind::DickeLossy, ModelKind::EffectiveTwoLevel, ModelKind::FullThreeLevel]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    ClosedForm,
    Lindblad,
    Mcwf { n_traj: usize, seed: u64 },
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::ClosedForm => "closed_form",
            Engine::Lindblad => "lindblad",
            Engine::Mcwf { .. } => "mcwf",
        }
    }
}

/// Initial atomic state; the cavity starts in vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// |1⁽¹⁾0⁽²⁾⟩
    Ion1,
    /// |0⁽¹⁾1⁽²⁾⟩
    Ion2,
    Subradiant,
    Superradiant,
    Amplitudes(AmplitudePair),
}

impl InitialState {
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "ion1" | "10" => InitialState::Ion1,
            "ion2" | "01" => InitialState::Ion2,
            "subradiant" => InitialState::Subradiant,
            "superradiant" => InitialState::Superradiant,
            _ => return None,
        })
    }

    pub fn name(&self) -> String {
        match self {
            InitialState::Ion1 => "ion1".into(),
            InitialState::Ion2 => "ion2".into(),
            InitialState::Subradiant => "subradiant".into(),
            InitialState::Superradiant => "superradiant".into(),
            InitialState::Amplitudes(a) => format!("amplitudes({},{})", a.c10, a.c01),
        }
    }

    /// Normalized amplitudes given the relative couplings of the model.
    pub fn amplitudes(&self, r: [Complex64; 2]) -> Result<AmplitudePair> {
        let a = match *self {
            InitialState::Ion1 => AmplitudePair::ion1(),
            InitialState::Ion2 => AmplitudePair::ion2(),
            InitialState::Subradiant => AmplitudePair::subradiant(r),
            InitialState::Superradiant => AmplitudePair::superradiant(r),
            InitialState::Amplitudes(a) => a,
        };
        let n = a.norm_sqr().sqrt();
        if n == 0.0 {
            return Err(Error::param("initial", "zero amplitudes"));
        }
        Ok(a.scale(c(1.0 / n, 0.0)))
    }
}

/// Laser detuning policy: a fixed value, or the value cancelling the Stark
/// shifts (recomputed whenever the placement changes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaserDetuning {
    Value(f64),
    Resonant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub model: ModelKind,
    pub params: ModelParams,
    pub delta_laser: LaserDetuning,
    pub initial: InitialState,
    pub t_max: f64,
    pub n_points: usize,
    pub engine: Engine,
    /// Keeps the spontaneous-emission channels of the effective model.
    pub emission: bool,
    /// Fock truncation of the full model.
    pub n_max: usize,
}

impl Scenario {
    pub fn new(name: impl Into<String>, model: ModelKind, params: ModelParams, engine: Engine) -> Self {
        Scenario {
            name: name.into(),
            model,
            delta_laser: LaserDetuning::Value(params.delta_laser),
            params,
            initial: InitialState::Ion1,
            t_max: 10.0,
            n_points: 400,
            engine,
            emission: true,
            n_max: 2,
        }
    }

    pub fn resonant(mut self) -> Self {
        self.delta_laser = LaserDetuning::Resonant;
        self
    }

    pub fn with_time(mut self, t_max: f64, n_points: usize) -> Self {
        self.t_max = t_max;
        self.n_points = n_points;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_model(mut self, model: ModelKind) -> Self {
        self.model = model;
        self
    }

    /// Parameters with the detuning policy applied.
    pub fn resolved_params(&self) -> ModelParams {
        let mut p = self.params.clone();
        p.delta_laser = match self.delta_laser {
            LaserDetuning::Value(v) => v,
            LaserDetuning::Resonant => reduce::resonant_delta_laser(&p),
        };
        p
    }

    pub fn time_grid(&self) -> Result<Vec<f64>> {
        if self.n_points < 2 || !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidTimeGrid(format!(
                "need t_max > 0 and at least 2 points (t_max = {}, n_points = {})",
                self.t_max, self.n_points
            )));
        }
        let n = self.n_points - 1;
        Ok((0..=n).map(|k| self.t_max * k as f64 / n as f64).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.resolved_params().validate()?;
        self.time_grid()?;
        match (self.engine, self.model) {
            (Engine::ClosedForm, ModelKind::EffectiveTwoLevel | ModelKind::FullThreeLevel) => {
                return Err(Error::EngineModelMismatch { engine: "closed_form", model: self.model.name() })
            }
            (Engine::Mcwf { .. }, ModelKind::DickeIdeal) => {
                return Err(Error::EngineModelMismatch { engine: "mcwf", model: self.model.name() })
            }
            (Engine::Mcwf { n_traj: 0, .. }, _) => return Err(Error::param("n_traj", "must be positive")),
            _ => {}
        }
        if self.model == ModelKind::FullThreeLevel && self.n_max == 0 {
            return Err(Error::param("n_max", "must be at least 1"));
        }
        Ok(())
    }

    pub fn effective(&self) -> Result<EffectiveParams> {
        reduce::reduce(&self.resolved_params())
    }

    fn dicke(&self) -> Result<DickeParams> {
        let mut d = self.effective()?.dicke()?;
        if self.model == ModelKind::DickeIdeal {
            d.kappa = 0.0;
        }
        Ok(d)
    }

    /// Master equation of the scenario's model.
    pub fn system(&self) -> Result<LindbladSystem> {
        let p = self.resolved_params();
        match self.model {
            ModelKind::DickeIdeal | ModelKind::DickeLossy => Ok(analytic::dicke_system(&self.dicke()?)),
            ModelKind::EffectiveTwoLevel => reduce::effective_system(&p, Frame::default(), self.emission),
            ModelKind::FullThreeLevel => reduce::full_lambda_system(&p, self.n_max),
        }
    }

    /// Initial state vector in the model's space.
    pub fn initial_vector(&self) -> Result<CVector> {
        let eff = self.effective()?;
        let r = match eff.dicke() {
            Ok(d) => d.r,
            Err(_) => crate::analytic::relative_pair(0.0)?,
        };
        let a = self.initial.amplitudes(r)?;
        match self.model {
            ModelKind::FullThreeLevel => {
                let space = HilbertSpace::full_lambda(self.n_max)?;
                let mut v = CVector::zeros(space.dim());
                let i10 = space.index_of(&BasisState::new(Level::S, Level::D, 0)).unwrap();
                let i01 = space.index_of(&BasisState::new(Level::D, Level::S, 0)).unwrap();
                v[i10] = a.c10;
                v[i01] = a.c01;
                Ok(v)
            }
            _ => {
                let mut v = CVector::from_element(4, ZERO);
                v[R4_ION1] = a.c10;
                v[R4_ION2] = a.c01;
                Ok(v)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutput {
    pub table: TimeSeriesTable,
    pub jump_stats: Option<JumpStatistics>,
    pub effective: EffectiveParams,
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioOutput> {
    s.validate()?;
    let grid = s.time_grid()?;
    let effective = s.effective()?;
    let (table, jump_stats) = match s.engine {
        Engine::ClosedForm => (closed_form_table(s, &grid)?, None),
        Engine::Lindblad => {
            let sys = s.system()?;
            let rho0 = DensityMatrix::from_pure(sys.kind(), &s.initial_vector()?)?;
            let run = integrate_lindblad(&sys, &rho0, &grid, Method::Auto)?;
            (table_from_states(&run.times, &run.states)?, None)
        }
        Engine::Mcwf { n_traj, seed } => {
            let sys = s.system()?;
            if sys.channels().iter().all(|c| c.rate == 0.0) {
                return Err(Error::EngineModelMismatch { engine: "mcwf", model: s.model.name() });
            }
            let ens = run_mcwf(&sys, &s.initial_vector()?, &grid, &McwfOptions::new(n_traj, seed))?;
            (ensemble_reduce(&ens)?, Some(jump_statistics(&ens)))
        }
    };
    Ok(ScenarioOutput { table, jump_stats, effective })
}

fn closed_form_table(s: &Scenario, grid: &[f64]) -> Result<TimeSeriesTable> {
    let d = s.dicke()?;
    let c0 = s.initial.amplitudes(d.r)?;
    let amps: Vec<AmplitudePair> = grid.iter().map(|&t| analytic::evolve_amplitudes(t, c0, &d)).collect();
    let mut t = TimeSeriesTable::new(grid.to_vec())?;
    let col = |f: &dyn Fn(&AmplitudePair) -> f64| amps.iter().map(f).collect::<Vec<_>>();
    t.push_column("rho_00_00", col(&|a| 1.0 - a.norm_sqr()))?;
    t.push_column("rho_01_01", col(&|a| a.c01.norm_sqr()))?;
    t.push_column("rho_10_10", col(&|a| a.c10.norm_sqr()))?;
    t.push_column("rho_01_10_re", col(&|a| a.coherence().re))?;
    t.push_column("rho_01_10_im", col(&|a| a.coherence().im))?;
    t.push_column("rho_01_10_abs", col(&|a| a.coherence().norm()))?;
    t.push_column("concurrence", col(&|a| a.concurrence()))?;
    t.push_column("norm", vec![1.0; grid.len()])?;
    Ok(t)
}

/// Physical parameters of a regime: Δ = `delta_ratio`·Δ₀, κ =
/// `kappa_ratio`·κ₀ and ion placement giving relative coupling `r1`.
pub fn regime_params(delta_ratio: f64, kappa_ratio: f64, r1: f64) -> Result<ModelParams> {
    ModelParams::table1().with_detuning_ratio(delta_ratio).with_kappa_ratio(kappa_ratio).with_r1(r1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    R1,
    DeltaLaser,
    DeltaRaman,
    Kappa,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::R1 => "r1",
            SweepAxis::DeltaLaser => "delta_laser",
            SweepAxis::DeltaRaman => "delta_raman",
            SweepAxis::Kappa => "kappa",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [SweepAxis::R1, SweepAxis::DeltaLaser, SweepAxis::DeltaRaman, SweepAxis::Kappa]
            .into_iter()
            .find(|a| a.name() == s)
    }

    /// The template with this axis set to `v`.
    pub fn apply(self, template: &Scenario, v: f64) -> Result<Scenario> {
        let mut s = template.clone();
        match self {
            SweepAxis::R1 => s.params = s.params.with_r1(v)?,
            SweepAxis::DeltaLaser => s.delta_laser = LaserDetuning::Value(v),
            SweepAxis::DeltaRaman => s.params.delta_raman = v,
            SweepAxis::Kappa => s.params.kappa = v,
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub template: Scenario,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::param("values", "sweep grid is empty"));
        }
        for &v in &self.values {
            self.axis.apply(&self.template, v)?.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub value: f64,
    /// Largest concurrence on the stored grid.
    pub peak_c: f64,
    /// Standard error at the peak (trajectory engines only).
    pub peak_se: Option<f64>,
    pub t_peak: f64,
    pub final_c: f64,
    /// Long-time concurrence of the lossy Dicke model with the same
    /// effective couplings.
    pub stationary_c: f64,
    /// `1 − ρ_{10,10}` at `t_e = 1/(8|α_T|)` from a deterministic run.
    pub early_exchange: f64,
    pub delta_eff: f64,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub scenario: Scenario,
    pub output: ScenarioOutput,
    pub summary: SweepSummary,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Sweep point with the largest peak concurrence.
    pub fn best_peak(&self) -> &SweepPoint {
        self.points
            .iter()
            .fold(&self.points[0], |b, p| if p.summary.peak_c > b.summary.peak_c { p } else { b })
    }

    /// Sweep point with the largest early-time exchange.
    pub fn fastest_exchange(&self) -> &SweepPoint {
        self.points
            .iter()
            .fold(&self.points[0], |b, p| if p.summary.early_exchange > b.summary.early_exchange { p } else { b })
    }

    pub fn best_stationary(&self) -> &SweepPoint {
        self.points
            .iter()
            .fold(&self.points[0], |b, p| if p.summary.stationary_c > b.summary.stationary_c { p } else { b })
    }

    /// Grid spacing of the swept axis, the resolution of any argmax.
    pub fn resolution(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].summary.value - w[0].summary.value).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Runs every grid point (concurrently) and summarizes it. Points share the
/// template's seed.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let points: Vec<Result<SweepPoint>> = spec
        .values
        .par_iter()
        .map(|&v| {
            let scenario = spec.axis.apply(&spec.template, v)?;
            let output = run_scenario(&scenario)?;
            let summary = summarize(&scenario, &output, v)?;
            Ok(SweepPoint { scenario, output, summary })
        })
        .collect();
    Ok(SweepResult { axis: spec.axis, points: points.into_iter().collect::<Result<_>>()? })
}

fn summarize(s: &Scenario, out: &ScenarioOutput, value: f64) -> Result<SweepSummary> {
    let table = &out.table;
    let (k, peak_c) = table.peak("concurrence").ok_or_else(|| Error::InvalidColumn("concurrence".into(), "missing".into()))?;
    let conc = table.column("concurrence").unwrap();
    let peak_se = table.column("concurrence_se").map(|se| se[k]);
    let dicke = out.effective.dicke();
    let stationary_c = match &dicke {
        Ok(d) => analytic::stationary_concurrence(s.initial.amplitudes(d.r)?, d.r),
        Err(_) => 0.0,
    };
    Ok(SweepSummary {
        value,
        peak_c,
        peak_se,
        t_peak: table.times()[k],
        final_c: *conc.last().unwrap(),
        stationary_c,
        early_exchange: early_exchange(s, &out.effective)?,
        delta_eff: out.effective.delta_eff[0],
    })
}

/// Population transferred away from |1⁽¹⁾0⁽²⁾⟩ after `1/(8|α_T|)`.
pub fn early_exchange(s: &Scenario, eff: &EffectiveParams) -> Result<f64> {
    let at = eff.alpha_total();
    if at == 0.0 {
        return Ok(0.0);
    }
    let te = 1.0 / (8.0 * at);
    let det = Scenario { engine: Engine::Lindblad, t_max: te, n_points: 2, ..s.clone() };
    let sys = det.system()?;
    let rho0 = DensityMatrix::from_pure(sys.kind(), &det.initial_vector()?)?;
    let run = integrate_lindblad(&sys, &rho0, &[0.0, te], Method::Auto)?;
    let block = crate::series::atomic_block(&run.states[1])?;
    Ok(1.0 - block[(crate::space::TQ_10, crate::space::TQ_10)].re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub delta_raman: f64,
    pub delta_ratio: f64,
    pub g_eff_abs: f64,
    pub beta_t_g_eff: f64,
    pub gamma_s: f64,
    pub kappa: f64,
    /// `4|β_T g_eff|/κ`.
    pub regime_ratio: f64,
}

/// Effective coupling, emission rate and cavity loss against Δ.
pub fn scaling_report(base: &ModelParams, delta_grid: &[f64]) -> Result<Vec<ScalingRow>> {
    if delta_grid.is_empty() {
        return Err(Error::param("delta_grid", "empty"));
    }
    delta_grid
        .iter()
        .map(|&d| {
            if !(d > 0.0) {
                return Err(Error::param("delta_raman", format!("{d} must be positive")));
            }
            let mut p = base.clone();
            p.delta_raman = d;
            let e = reduce::reduce(&p)?;
            Ok(ScalingRow {
                delta_raman: d,
                delta_ratio: d / crate::params::table1::DELTA_RAMAN,
                g_eff_abs: e.g_eff.norm(),
                beta_t_g_eff: e.beta_total * e.g_eff.norm(),
                gamma_s: e.gamma_s[0],
                kappa: p.kappa,
                regime_ratio: 4.0 * e.beta_total * e.g_eff.norm() / p.kappa,
            })
        })
        .collect()
}

/// Log-spaced grid of `n` points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseCharacter {
    /// Real coherence dominates, as in the subradiant state.
    SubradiantLike,
    /// Imaginary coherence dominates: `(|10⟩ ± i|01⟩)/√2`-like.
    IPhaseLike,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveCharacter {
    pub character: PhaseCharacter,
    /// |minor quadrature| / |major quadrature| at the peak.
    pub ratio: f64,
    pub t_peak: f64,
    pub coherence: Complex64,
}

/// Which quadrature of ρ_{01,10} dominates at the concurrence peak.
pub fn dispersive_character(table: &TimeSeriesTable) -> Result<DispersiveCharacter> {
    let missing = |n: &str| Error::InvalidColumn(n.into(), "missing".into());
    let (k, _) = table.peak("concurrence").ok_or_else(|| missing("concurrence"))?;
    let re = table.column("rho_01_10_re").ok_or_else(|| missing("rho_01_10_re"))?[k];
    let im = table.column("rho_01_10_im").ok_or_else(|| missing("rho_01_10_im"))?[k];
    let (character, ratio) = if re.abs() >= im.abs() {
        (PhaseCharacter::SubradiantLike, im.abs() / re.abs())
    } else {
        (PhaseCharacter::IPhaseLike, re.abs() / im.abs())
    };
    Ok(DispersiveCharacter { character, ratio, t_peak: table.times()[k], coherence: c(re, im) })
}

/// Tables of every sweep point stacked as one long table with the axis value
/// as the second column, for surface plots.
pub fn surface_rows(result: &SweepResult) -> (Vec<String>, Vec<Vec<f64>>) {
    let first = &result.points[0].output.table;
    let mut header = vec!["t_us".to_string(), result.axis.name().to_string()];
    header.extend(first.names().map(String::from));
    let mut rows = Vec::new();
    for p in &result.points {
        let t = &p.output.table;
        let cols: Vec<&[f64]> = first.names().map(|n| t.column(n).unwrap_or(&[])).collect();
        for (k, &time) in t.times().iter().enumerate() {
            let mut row = vec![time, p.summary.value];
            row.extend(cols.iter().map(|c| c.get(k).copied().unwrap_or(f64::NAN)));
            rows.push(row);
        }
    }
    (header, rows)
}
