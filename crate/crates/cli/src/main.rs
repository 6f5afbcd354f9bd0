//! `dicke`: runs scenarios, sweeps and the scaling report from a config file
//! or a bundled preset, writing CSVs, plot scripts and a manifest.

mod config;
mod output;
mod presets;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dicke_core::experiments::{scaling_report, surface_rows, ScenarioOutput, SweepResult};
use dicke_core::reduce::resonant_delta_laser;
use dicke_core::{run_scenario, sweep, EffectiveParams, Engine, LaserDetuning, Scenario, SweepAxis};
use rayon::prelude::*;
use serde_json::{json, Value};

use config::Config;
use output::{Csv, Order};

/// Failure classes, each with its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or malformed config, unknown key.
    Parse(String),
    /// Well-formed config with values the models reject.
    Invalid(String),
    /// A numerical method failed on valid input.
    Numerical(String),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Parse(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "config error: {m}"),
            Failure::Invalid(m) => write!(f, "invalid configuration: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<dicke_core::Error> for Failure {
    fn from(e: dicke_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Io(e)
    }
}

#[derive(Parser)]
#[command(name = "dicke", version, about = "Entanglement of two ions in a lossy cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every [run.NAME] scenario of the config.
    Simulate(RunArgs),
    /// Sweep one parameter of the single [run.NAME] template.
    Sweep(RunArgs),
    /// Effective rates against the Raman detuning.
    Scaling(RunArgs),
    /// List the bundled presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Config file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset, see `dicke presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, required_unless_present = "check")]
    out: Option<PathBuf>,
    /// Seed for every trajectory run.
    #[arg(long)]
    seed: Option<u64>,
    /// Trajectory count for every trajectory run.
    #[arg(long)]
    traj: Option<usize>,
    /// Artifacts to write. CSVs are always written since the plot scripts
    /// read them.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    emit: Vec<Emit>,
    /// Validate the config and exit without running.
    #[arg(long)]
    check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Plot,
}

#[derive(Clone, Copy)]
enum Mode {
    Simulate,
    Sweep,
    Scaling,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::Scaling => "scaling",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Presets => {
            for (name, text) in presets::PRESETS {
                println!("{name:<6} {}", presets::describe(text));
            }
            Ok(())
        }
        Command::Simulate(a) => execute(Mode::Simulate, &a),
        Command::Sweep(a) => execute(Mode::Sweep, &a),
        Command::Scaling(a) => execute(Mode::Scaling, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn init_workers() -> Result<usize, Failure> {
    if let Ok(v) = std::env::var("DICKE_WORKERS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Invalid(format!("DICKE_WORKERS must be a positive integer, got `{v}`")))?;
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(rayon::current_num_threads())
}

fn load(args: &RunArgs) -> Result<(Config, String), Failure> {
    let (text, source) = match (&args.config, &args.preset) {
        (Some(path), _) => (
            fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        (None, Some(name)) => {
            let text = presets::find(name).ok_or_else(|| {
                let names: Vec<&str> = presets::PRESETS.iter().map(|(n, _)| *n).collect();
                Failure::Parse(format!("unknown preset `{name}` (available: {})", names.join(", ")))
            })?;
            (text.to_string(), format!("preset {name}"))
        }
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    let mut cfg = Config::parse(&text)?;
    cfg.override_runs(args.seed, args.traj);
    Ok((cfg, source))
}

fn execute(mode: Mode, args: &RunArgs) -> Result<(), Failure> {
    let workers = init_workers()?;
    let (cfg, source) = load(args)?;
    let plan = Plan::build(mode, &cfg)?;
    for w in plan.warnings() {
        eprintln!("warning: {w}");
    }
    if args.check {
        println!("{source}: ok ({})", plan.describe());
        return Ok(());
    }
    let out = args.out.as_deref().expect("clap requires --out without --check");
    fs::create_dir_all(out)
        .map_err(|e| Failure::Io(anyhow::anyhow!("cannot create {}: {e}", out.display())))?;

    let start = Instant::now();
    let plots = args.emit.contains(&Emit::Plot);
    let mut files = Vec::new();
    let details = match &plan {
        Plan::Simulate(s) => simulate(s, out, plots, &mut files)?,
        Plan::Sweep(spec) => run_sweep(spec, out, plots, &mut files)?,
        Plan::Scaling(params, grid) => scaling(params, grid, out, plots, &mut files)?,
    };
    let echo = cfg.to_toml();
    files.push(output::write_text(out, "config.toml", &echo)?);

    let manifest = json!({
        "tool": "dicke",
        "version": env!("CARGO_PKG_VERSION"),
        "command": mode.name(),
        "source": source,
        "overrides": { "seed": args.seed, "traj": args.traj },
        "config": echo,
        "workers": workers,
        "wall_time_s": start.elapsed().as_secs_f64(),
        "validity_warnings": plan.warnings(),
        "results": details,
        "files": files.iter().chain([&out.join("manifest.json")]).map(|p| file_name(p)).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    output::write_text(out, "manifest.json", &text)?;
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

enum Plan {
    Simulate(Vec<Scenario>),
    Sweep(dicke_core::SweepSpec),
    Scaling(dicke_core::ModelParams, Vec<f64>),
}

impl Plan {
    fn build(mode: Mode, cfg: &Config) -> Result<Self, Failure> {
        Ok(match mode {
            Mode::Simulate => Plan::Simulate(cfg.scenarios()?),
            Mode::Sweep => Plan::Sweep(cfg.sweep_spec()?),
            Mode::Scaling => {
                let (p, g) = cfg.scaling_grid()?;
                Plan::Scaling(p, g)
            }
        })
    }

    fn describe(&self) -> String {
        match self {
            Plan::Simulate(s) => format!("{} run(s)", s.len()),
            Plan::Sweep(spec) => format!("{} points along {}", spec.values.len(), spec.axis.name()),
            Plan::Scaling(_, g) => format!("{} detunings", g.len()),
        }
    }

    /// Elimination-validity warnings, recomputed from the resolved parameters.
    fn warnings(&self) -> Vec<String> {
        let scenarios: Vec<Scenario> = match self {
            Plan::Simulate(s) => s.clone(),
            Plan::Sweep(spec) => {
                spec.values.iter().filter_map(|&v| spec.axis.apply(&spec.template, v).ok()).collect()
            }
            Plan::Scaling(..) => return Vec::new(),
        };
        scenarios
            .iter()
            .filter_map(|s| {
                let w = s.effective().ok()?.validity_warning()?;
                Some(format!("{}: {w}", s.name))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Vec::new(), |mut acc, w| {
                if !acc.contains(&w) {
                    acc.push(w);
                }
                acc
            })
    }
}

fn effective_json(e: &EffectiveParams) -> Value {
    let cplx = |z: dicke_core::Complex64| json!([z.re, z.im]);
    let dicke = e.dicke().ok();
    json!({
        "xi": e.xi,
        "beta_total": e.beta_total,
        "g_eff": cplx(e.g_eff),
        "alpha_eff": e.alpha_eff.iter().map(|&z| cplx(z)).collect::<Vec<_>>(),
        "alpha_total": e.alpha_total(),
        "delta_eff": e.delta_eff,
        "stark_cavity": e.stark_cavity,
        "stark_ion": e.stark_ion,
        "gamma_s": e.gamma_s,
        "gamma_d": e.gamma_d,
        "kappa": e.kappa,
        "generalized_rabi": cplx(e.generalized_rabi()),
        "rabi_period_us": dicke.as_ref().map(|_| e.rabi_period()),
        "coupling_regime_ratio": e.coupling_regime_ratio(),
        "validity_ratio": e.validity_ratio,
    })
}

fn scenario_json(s: &Scenario, eff: &EffectiveParams) -> Value {
    let (n_traj, seed) = match s.engine {
        Engine::Mcwf { n_traj, seed } => (Some(n_traj), Some(seed)),
        _ => (None, None),
    };
    json!({
        "name": s.name,
        "model": s.model.name(),
        "engine": s.engine.name(),
        "n_traj": n_traj,
        "seed": seed,
        "initial": s.initial.name(),
        "emission": s.emission,
        "t_max_us": s.t_max,
        "n_points": s.n_points,
        "delta_raman": s.params.delta_raman,
        "kappa": s.params.kappa,
        "beta": s.params.beta.iter().map(|b| json!([b.re, b.im])).collect::<Vec<_>>(),
        "delta_laser": s.resolved_params().delta_laser,
        "delta_laser_policy": match s.delta_laser {
            LaserDetuning::Resonant => "resonant",
            LaserDetuning::Value(_) => "fixed",
        },
        "effective": effective_json(eff),
    })
}

fn simulate(scenarios: &[Scenario], out: &Path, plots: bool, files: &mut Vec<PathBuf>) -> Result<Value, Failure> {
    // Runs are independent; each one also parallelizes internally.
    let outputs: Vec<Result<ScenarioOutput, dicke_core::Error>> = scenarios.par_iter().map(run_scenario).collect();
    let mut runs = Vec::new();
    let (mut series, mut jumps) = (Vec::new(), Vec::new());
    for (s, res) in scenarios.iter().zip(outputs) {
        let o = res.map_err(|e| prefix(&s.name, e.into()))?;
        let name = format!("timeseries_{}.csv", s.name);
        files.push(Csv::from_table(&o.table).write(out, &name)?);
        series.push(name);
        let peak = o.table.peak("concurrence").map(|(k, c)| json!({ "t_us": o.table.times()[k], "concurrence": c }));
        let mut entry = scenario_json(s, &o.effective);
        entry["peak"] = peak.unwrap_or(Value::Null);
        entry["final_concurrence"] = json!(o.table.column("concurrence").and_then(|c| c.last()));
        if let Some(js) = &o.jump_stats {
            let name = format!("jumps_{}.csv", s.name);
            files.push(Csv::from_table(&js.to_table()?).write(out, &name)?);
            jumps.push(name);
            let last = js.times.len() - 1;
            entry["final_jumps"] = js
                .labels
                .iter()
                .enumerate()
                .map(|(m, l)| (l.clone(), json!({ "mean": js.mean[m][last], "se": js.se[m][last] })))
                .collect::<serde_json::Map<_, _>>()
                .into();
        }
        runs.push(entry);
    }
    if plots {
        files.push(output::write_text(out, "plot_timeseries.py", &output::timeseries_script(&series))?);
        if !jumps.is_empty() {
            files.push(output::write_text(out, "plot_jumps.py", &output::jumps_script(&jumps))?);
        }
    }
    Ok(json!({ "runs": runs }))
}

fn prefix(name: &str, f: Failure) -> Failure {
    match f {
        Failure::Parse(m) => Failure::Parse(format!("run.{name}: {m}")),
        Failure::Invalid(m) => Failure::Invalid(format!("run.{name}: {m}")),
        Failure::Numerical(m) => Failure::Numerical(format!("run.{name}: {m}")),
        Failure::Io(e) => Failure::Io(e.context(format!("run.{name}"))),
    }
}

fn summary_csv(res: &SweepResult) -> Csv {
    let with_se = res.points.iter().all(|p| p.summary.peak_se.is_some());
    let mut header: Vec<String> = vec![res.axis.name().into(), "peak_c".into()];
    if with_se {
        header.push("peak_se".into());
    }
    for h in ["t_peak_us", "final_c", "stationary_c", "early_exchange", "delta_eff", "coupling_regime_ratio"] {
        header.push(h.into());
    }
    let rows = res
        .points
        .iter()
        .map(|p| {
            let s = &p.summary;
            let mut row = vec![s.value, s.peak_c];
            if with_se {
                row.push(s.peak_se.unwrap());
            }
            row.extend([
                s.t_peak,
                s.final_c,
                s.stationary_c,
                s.early_exchange,
                s.delta_eff,
                p.output.effective.coupling_regime_ratio(),
            ]);
            row
        })
        .collect();
    Csv { header, rows, order: Order::Increasing }
}

fn run_sweep(spec: &dicke_core::SweepSpec, out: &Path, plots: bool, files: &mut Vec<PathBuf>) -> Result<Value, Failure> {
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let spec = dicke_core::SweepSpec { values, ..spec.clone() };
    let res = sweep(&spec)?;
    let (header, rows) = surface_rows(&res);
    files.push(Csv { header, rows, order: Order::Blocked }.write(out, "surface.csv")?);
    files.push(summary_csv(&res).write(out, "summary.csv")?);
    if plots {
        files.push(output::write_text(out, "plot_surface.py", &output::surface_script(res.axis.name()))?);
    }
    let point = |p: &dicke_core::experiments::SweepPoint| {
        json!({
            "value": p.summary.value,
            "peak_c": p.summary.peak_c,
            "peak_se": p.summary.peak_se,
            "t_peak_us": p.summary.t_peak,
            "early_exchange": p.summary.early_exchange,
            "stationary_c": p.summary.stationary_c,
        })
    };
    let mut details = json!({
        "axis": res.axis.name(),
        "resolution": (res.points.len() > 1).then(|| res.resolution()),
        "template": scenario_json(&spec.template, &spec.template.effective()?),
        "best_peak": point(res.best_peak()),
        "fastest_exchange": point(res.fastest_exchange()),
        "best_stationary": point(res.best_stationary()),
    });
    if spec.axis == SweepAxis::DeltaLaser {
        // Laser detuning at which the Stark shifts cancel (zero effective detuning).
        details["delta_laser_at_zero_delta_eff"] = json!(resonant_delta_laser(&spec.template.params));
    }
    println!(
        "{}: best peak {:.4} at {} = {}; fastest exchange at {} = {}",
        spec.template.name,
        res.best_peak().summary.peak_c,
        res.axis.name(),
        res.best_peak().summary.value,
        res.axis.name(),
        res.fastest_exchange().summary.value
    );
    Ok(details)
}

fn scaling(
    params: &dicke_core::ModelParams,
    grid: &[f64],
    out: &Path,
    plots: bool,
    files: &mut Vec<PathBuf>,
) -> Result<Value, Failure> {
    let rows = scaling_report(params, grid)?;
    let header = ["delta_raman", "delta_ratio", "g_eff_abs", "gamma_s", "kappa", "beta_t_g_eff", "regime_ratio"];
    let csv = Csv {
        header: header.iter().map(|s| s.to_string()).collect(),
        rows: rows
            .iter()
            .map(|r| vec![r.delta_raman, r.delta_ratio, r.g_eff_abs, r.gamma_s, r.kappa, r.beta_t_g_eff, r.regime_ratio])
            .collect(),
        order: Order::Increasing,
    };
    files.push(csv.write(out, "scaling.csv")?);
    if plots {
        files.push(output::write_text(out, "plot_scaling.py", &output::scaling_script())?);
    }
    let x: Vec<f64> = rows.iter().map(|r| r.delta_raman).collect();
    let slope = |y: Vec<f64>| dicke_core::experiments::loglog_slope(&x, &y);
    Ok(json!({
        "points": rows.len(),
        "slope_g_eff": slope(rows.iter().map(|r| r.g_eff_abs).collect()),
        "slope_gamma_s": slope(rows.iter().map(|r| r.gamma_s).collect()),
    }))
}
