use dicke_core::experiments::{
    dispersive_character, log_grid, loglog_slope, regime_params, scaling_report, surface_rows, PhaseCharacter,
};
use dicke_core::linalg::ONE;
use dicke_core::reduce::resonant_delta_laser;
use dicke_core::{
    run_scenario, sweep, Engine, InitialState, ModelKind, ModelParams, Scenario, SweepAxis, SweepSpec, TimeSeriesTable,
};

fn conc(s: &Scenario) -> Vec<f64> {
    run_scenario(s).unwrap().table.column("concurrence").unwrap().to_vec()
}

fn weak(r1: f64) -> Scenario {
    Scenario::new("weak", ModelKind::DickeLossy, regime_params(100.0, 0.1, r1).unwrap(), Engine::ClosedForm)
        .resonant()
        .with_time(150.0, 301)
}

#[test]
fn stationary_concurrence_peaks_at_balanced_coupling() {
    let values: Vec<f64> = (1..50).map(|k| 0.02 * k as f64).collect();
    let res = sweep(&SweepSpec { axis: SweepAxis::R1, values, template: weak(0.5) }).unwrap();
    let best = res.best_stationary();
    assert!((best.summary.value - 0.5).abs() <= res.resolution() + 1e-12);
    assert!((best.summary.stationary_c - 0.6495).abs() < 1e-3);
}

#[test]
fn emission_only_lowers_concurrence() {
    let lossy = weak(0.55);
    let eff = lossy.clone().with_model(ModelKind::EffectiveTwoLevel).with_engine(Engine::Lindblad);
    let (a, b) = (conc(&lossy), conc(&eff));
    let n = a.len();
    assert!(a[n - 1] >= b[n - 1]);
    let peak = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    assert!(peak(&a) >= peak(&b));
    // The ideal model never settles; the lossy one reaches its stationary value.
    let ideal = conc(&lossy.clone().with_model(ModelKind::DickeIdeal));
    assert!(peak(&ideal) >= peak(&a) - 1e-9);
    let tail = &ideal[n - 60..];
    assert!(peak(tail) - tail.iter().cloned().fold(1.0, f64::min) > 0.1);
    assert!((a[n - 1] - a[n - 20]).abs() < 1e-3);
}

/// First time the lossy Dicke curve and the effective curve with emission
/// differ by 0.05.
fn agreement_window(delta_ratio: f64, kappa_ratio: f64) -> f64 {
    let p = regime_params(delta_ratio, kappa_ratio, 0.55).unwrap();
    let base = Scenario::new("q", ModelKind::DickeLossy, p, Engine::ClosedForm).resonant();
    let period = base.effective().unwrap().rabi_period();
    let s = base.with_time(20.0 * period, 2001);
    let t = s.time_grid().unwrap();
    let a = conc(&s);
    let b = conc(&s.clone().with_model(ModelKind::EffectiveTwoLevel).with_engine(Engine::Lindblad));
    a.iter().zip(&b).position(|(x, y)| (x - y).abs() > 0.05).map_or(t[t.len() - 1], |k| t[k])
}

#[test]
fn agreement_window_grows_with_cavity_quality() {
    // Same Δκ product, ten times smaller κ.
    let short = agreement_window(10.0, 0.1);
    let long = agreement_window(100.0, 0.01);
    assert!(long > short, "{short} vs {long}");
}

#[test]
fn degenerate_placements_do_not_entangle() {
    for r1 in [0.0, 1.0] {
        let p = regime_params(10.0, 0.1, r1).unwrap();
        let s = Scenario::new("d", ModelKind::DickeLossy, p, Engine::Lindblad).resonant().with_time(20.0, 101);
        assert!(conc(&s).iter().all(|&c| c < 1e-9));
    }
}

fn dispersive(delta_laser: f64, emission: bool) -> TimeSeriesTable {
    let p = ModelParams::table1().with_detuning_ratio(10.0).with_kappa_ratio(0.1).with_beta(vec![ONE, ONE]);
    let mut s = Scenario::new("disp", ModelKind::EffectiveTwoLevel, p.with_delta_laser(delta_laser), Engine::Lindblad)
        .with_time(60.0, 601);
    s.emission = emission;
    run_scenario(&s).unwrap().table
}

#[test]
fn dispersive_phase_follows_detuning_sign() {
    let p = ModelParams::table1().with_detuning_ratio(10.0).with_beta(vec![ONE, ONE]);
    let res = resonant_delta_laser(&p);
    for (dl, sign) in [(res - 0.3, 1.0), (res + 0.34, -1.0)] {
        let d = dispersive_character(&dispersive(dl, false)).unwrap();
        assert!(d.coherence.im * sign > 0.0, "δ_L {dl}: {:?}", d.coherence);
    }
    let d = dispersive_character(&dispersive(0.6, true)).unwrap();
    assert_eq!(d.character, PhaseCharacter::IPhaseLike);
    assert!(d.ratio < 0.3);
}

#[test]
fn dispersive_peak_near_detuned_laser() {
    let p = ModelParams::table1().with_detuning_ratio(10.0).with_kappa_ratio(0.1).with_beta(vec![ONE, ONE]);
    let template = Scenario::new("disp", ModelKind::EffectiveTwoLevel, p, Engine::Lindblad).with_time(60.0, 301);
    let values: Vec<f64> = (0..=20).map(|k| 0.04 * k as f64).collect();
    let res = sweep(&SweepSpec { axis: SweepAxis::DeltaLaser, values, template }).unwrap();
    let best = res.best_peak();
    assert!((best.summary.value - 0.6).abs() <= 0.09, "{}", best.summary.value);
    assert!((best.summary.peak_c - 0.62).abs() <= 0.05, "{}", best.summary.peak_c);
}

#[test]
fn early_exchange_is_fastest_at_resonance() {
    let p = regime_params(10.0, 0.1, 0.46).unwrap();
    let template = Scenario::new("x", ModelKind::EffectiveTwoLevel, p.clone(), Engine::Lindblad).with_time(1.0, 11);
    let values: Vec<f64> = (0..=30).map(|k| 0.02 * k as f64).collect();
    let res = sweep(&SweepSpec { axis: SweepAxis::DeltaLaser, values, template }).unwrap();
    let fastest = res.fastest_exchange().summary.value;
    assert!((fastest - resonant_delta_laser(&p)).abs() <= res.resolution());
}

#[test]
fn scaling_exponents() {
    let grid: Vec<f64> = log_grid(10.0, 1000.0, 9).into_iter().map(|r| 20.0 * r).collect();
    let rows = scaling_report(&ModelParams::table1(), &grid).unwrap();
    let x: Vec<f64> = rows.iter().map(|r| r.delta_raman).collect();
    let slope = |f: fn(&dicke_core::experiments::ScalingRow) -> f64| loglog_slope(&x, &rows.iter().map(f).collect::<Vec<_>>());
    assert!((slope(|r| r.g_eff_abs) + 1.0).abs() < 0.01);
    assert!((slope(|r| r.gamma_s) + 2.0).abs() < 0.01);
    assert!(slope(|r| r.kappa).abs() < 0.01);
    assert!(scaling_report(&ModelParams::table1(), &[]).is_err());
    assert!(scaling_report(&ModelParams::table1(), &[-1.0]).is_err());
}

#[test]
fn subradiant_start_is_stationary_without_emission() {
    let p = regime_params(10.0, 0.1, 0.46).unwrap();
    let base = Scenario::new("sub", ModelKind::DickeLossy, p, Engine::ClosedForm)
        .resonant()
        .with_initial(InitialState::Subradiant)
        .with_time(30.0, 151);
    let mut eff = base.clone().with_model(ModelKind::EffectiveTwoLevel).with_engine(Engine::Lindblad);
    eff.emission = false;
    for s in [base.clone(), base.clone().with_engine(Engine::Lindblad), eff.clone()] {
        let c = conc(&s);
        assert!(c.iter().all(|v| (v - c[0]).abs() < 1e-8), "{}", s.model.name());
    }
    eff.emission = true;
    let c = conc(&eff);
    assert!(c.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn near_bell_regime_matches_recorded_baseline() {
    let baseline: f64 = include_str!("baselines/near_bell.txt")
        .lines()
        .find(|l| !l.starts_with('#') && !l.trim().is_empty())
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let p = regime_params(100.0, 0.01, 0.46).unwrap();
    let s = Scenario::new("bell", ModelKind::EffectiveTwoLevel, p, Engine::Lindblad).resonant().with_time(40.0, 401);
    let peak = conc(&s).into_iter().fold(0.0, f64::max);
    assert!((peak - baseline).abs() < 1e-3, "{peak} vs {baseline}");
}

#[test]
fn surface_table_layout() {
    let values = vec![0.4, 0.5];
    let res = sweep(&SweepSpec { axis: SweepAxis::R1, values, template: weak(0.5).with_time(10.0, 11) }).unwrap();
    let (header, rows) = surface_rows(&res);
    assert_eq!(&header[..3], ["t_us", "r1", "rho_00_00"]);
    assert_eq!(rows.len(), 22);
    assert_eq!(rows[11][1], 0.5);
    assert!(rows.iter().all(|r| r.len() == header.len()));
}

#[test]
fn scenario_validation() {
    let p = regime_params(10.0, 0.1, 0.46).unwrap();
    let mut s = Scenario::new("v", ModelKind::EffectiveTwoLevel, p, Engine::Lindblad);
    s.n_points = 1;
    assert!(run_scenario(&s).is_err());
    s.n_points = 10;
    s.params.delta_raman = -1.0;
    assert!(run_scenario(&s).is_err());
    assert!(ModelKind::from_name("effective") == Some(ModelKind::EffectiveTwoLevel));
    assert!(SweepAxis::from_name("nope").is_none());
}
