//! Monte Carlo wave-function unraveling of a time-independent
//! [`LindbladSystem`].
//!
//! Trajectory `i` draws from a ChaCha8 stream selected by `i` under the master
//! seed, so every trajectory is a pure function of `(master_seed, i)` and the
//! ensemble does not depend on scheduling.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lindblad::{check_grid, LindbladSystem};
use crate::error::{Error, Result};
use crate::linalg::{c, expm, CMatrix, CVector, I, TWO_PI};
use crate::series::{atomic_block_pure, standard_values, TimeSeriesTable, STANDARD_COLUMNS};
use crate::space::HilbertSpace;

/// Bisection steps used to locate a jump inside a grid interval.
const BISECTION_STEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum JumpScheme {
    /// Draw the decay threshold `r`, evolve the unnormalized state under the
    /// non-Hermitian Hamiltonian and jump when `‖ψ‖² = r` (located by
    /// bisection). Free of time-step bias.
    #[default]
    WaitingTime,
    /// Fixed steps with jump probability `δp = 2π Σ Γ_m ‖C_m ψ‖² δt`; steps are
    /// halved until `δp ≤ p_max`.
    FirstOrder { p_max: f64, max_refinements: u32 },
}

impl JumpScheme {
    pub fn first_order() -> Self {
        JumpScheme::FirstOrder { p_max: 0.01, max_refinements: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McwfOptions {
    pub n_traj: usize,
    pub master_seed: u64,
    pub scheme: JumpScheme,
}

impl McwfOptions {
    pub fn new(n_traj: usize, master_seed: u64) -> Self {
        McwfOptions { n_traj, master_seed, scheme: JumpScheme::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub trajectory: usize,
    pub t: f64,
    pub channel: usize,
}

#[derive(Debug, Clone)]
pub struct TrajectoryEnsemble {
    space: HilbertSpace,
    times: Vec<f64>,
    master_seed: u64,
    n_traj: usize,
    /// Normalized states, trajectory-major.
    states: Vec<CVector>,
    jumps: Vec<JumpEvent>,
    channel_labels: Vec<String>,
}

impl TrajectoryEnsemble {
    /// Assembles an ensemble from explicit trajectories, e.g. ones produced
    /// elsewhere. `trajectories[i][k]` is the state of trajectory `i` at
    /// `times[k]`; states are normalized on entry.
    pub fn from_parts(
        space: HilbertSpace,
        times: Vec<f64>,
        trajectories: Vec<Vec<CVector>>,
        jumps: Vec<JumpEvent>,
        channel_labels: Vec<String>,
    ) -> Result<Self> {
        check_grid(&times)?;
        if trajectories.is_empty() {
            return Err(Error::param("trajectories", "ensemble must be nonempty"));
        }
        let n_traj = trajectories.len();
        let mut states = Vec::with_capacity(n_traj * times.len());
        for traj in trajectories {
            if traj.len() != times.len() {
                return Err(Error::DimensionMismatch { expected: times.len(), found: traj.len() });
            }
            for psi in traj {
                if psi.len() != space.dim() {
                    return Err(Error::DimensionMismatch { expected: space.dim(), found: psi.len() });
                }
                let n = psi.norm();
                if !(n > 0.0) {
                    return Err(Error::param("trajectories", "zero state vector"));
                }
                states.push(psi / c(n, 0.0));
            }
        }
        for j in &jumps {
            if j.trajectory >= n_traj || j.channel >= channel_labels.len() {
                return Err(Error::param("jumps", format!("event {j:?} out of range")));
            }
        }
        Ok(TrajectoryEnsemble { space, times, master_seed: 0, n_traj, states, jumps, channel_labels })
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn state(&self, trajectory: usize, k: usize) -> &CVector {
        &self.states[trajectory * self.times.len() + k]
    }

    pub fn trajectory(&self, trajectory: usize) -> &[CVector] {
        let n = self.times.len();
        &self.states[trajectory * n..(trajectory + 1) * n]
    }

    /// Jumps ordered by trajectory, then time.
    pub fn jumps(&self) -> &[JumpEvent] {
        &self.jumps
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    /// Ensemble-averaged density matrix at grid index `k`.
    pub fn averaged_density(&self, k: usize) -> CMatrix {
        let d = self.space.dim();
        let mut rho = CMatrix::zeros(d, d);
        for i in 0..self.n_traj {
            let psi = self.state(i, k);
            rho += psi * psi.adjoint();
        }
        rho / c(self.n_traj as f64, 0.0)
    }
}

struct Trajectory {
    states: Vec<CVector>,
    jumps: Vec<(f64, usize)>,
}

struct Prepared {
    h_mc: CMatrix,
    ops: Vec<(f64, CMatrix)>,
}

impl Prepared {
    fn propagator(&self, dt: f64) -> CMatrix {
        expm(&(&self.h_mc * (-I * (TWO_PI * dt))))
    }

    /// Jump weights `Γ_m ‖C_m ψ‖²` and the jumped states.
    fn pick_channel(&self, psi: &CVector, u: f64) -> Result<(usize, CVector)> {
        let weights: Vec<f64> = self.ops.iter().map(|(g, op)| g * (op * psi).norm_squared()).collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Numerical("jump requested with zero total jump rate".into()));
        }
        let mut acc = 0.0;
        let target = u * total;
        let mut pick = weights.iter().rposition(|&w| w > 0.0).unwrap();
        for (m, w) in weights.iter().enumerate() {
            acc += w;
            if target < acc && *w > 0.0 {
                pick = m;
                break;
            }
        }
        let next = &self.ops[pick].1 * psi;
        let n = next.norm();
        Ok((pick, next / c(n, 0.0)))
    }
}

/// Runs `opts.n_traj` trajectories from `psi0` and records the normalized
/// state at every grid time.
pub fn run_mcwf(
    system: &LindbladSystem,
    psi0: &CVector,
    t_grid: &[f64],
    opts: &McwfOptions,
) -> Result<TrajectoryEnsemble> {
    check_grid(t_grid)?;
    if !system.is_time_independent() {
        return Err(Error::TimeDependentGenerator("MCWF requires a time-independent Hamiltonian"));
    }
    if psi0.len() != system.dim() {
        return Err(Error::DimensionMismatch { expected: system.dim(), found: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::param("psi0", format!("norm {} is not 1", psi0.norm())));
    }
    if opts.n_traj == 0 {
        return Err(Error::param("n_traj", "ensemble must be nonempty"));
    }
    if let JumpScheme::FirstOrder { p_max, .. } = opts.scheme {
        if !(p_max > 0.0 && p_max < 1.0) {
            return Err(Error::param("p_max", format!("{p_max} outside (0, 1)")));
        }
    }
    let space = HilbertSpace::from_kind(system.kind())?;

    // Restrict to the invariant subspace reachable from psi0.
    let seed: Vec<usize> = (0..psi0.len()).filter(|&i| psi0[i].norm() > 0.0).collect();
    let idx = system.invariant_support(&seed);
    let restrict = |m: &CMatrix| CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]);
    let prepared = Prepared {
        h_mc: restrict(&system.effective_hamiltonian(0.0)),
        ops: system
            .channels()
            .iter()
            .map(|ch| (if ch.rate > 0.0 { ch.rate } else { 0.0 }, restrict(&ch.op.at(0.0))))
            .collect(),
    };
    let psi_sub = CVector::from_fn(idx.len(), |i, _| psi0[idx[i]]);

    let intervals: Vec<f64> = t_grid.windows(2).map(|w| w[1] - w[0]).collect();
    let mut cache: Vec<(f64, CMatrix)> = Vec::new();
    for &dt in &intervals {
        if !cache.iter().any(|(d, _)| *d == dt) {
            cache.push((dt, prepared.propagator(dt)));
        }
    }

    let results: Vec<Result<Trajectory>> = (0..opts.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.master_seed);
            rng.set_stream(i as u64);
            match opts.scheme {
                JumpScheme::WaitingTime => waiting_time(&prepared, &psi_sub, t_grid, &cache, &mut rng),
                JumpScheme::FirstOrder { p_max, max_refinements } => {
                    first_order(&prepared, &psi_sub, t_grid, p_max, max_refinements, &mut rng)
                }
            }
        })
        .collect();

    let dim = system.dim();
    let mut states = Vec::with_capacity(opts.n_traj * t_grid.len());
    let mut jumps = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        let traj = r?;
        for s in traj.states {
            let mut full = CVector::zeros(dim);
            for (l, &g) in idx.iter().enumerate() {
                full[g] = s[l];
            }
            states.push(full);
        }
        jumps.extend(traj.jumps.into_iter().map(|(t, channel)| JumpEvent { trajectory: i, t, channel }));
    }
    Ok(TrajectoryEnsemble {
        space,
        times: t_grid.to_vec(),
        master_seed: opts.master_seed,
        n_traj: opts.n_traj,
        states,
        jumps,
        channel_labels: system.channel_labels(),
    })
}

fn normalized(psi: &CVector) -> CVector {
    psi / c(psi.norm(), 0.0)
}

fn waiting_time(
    p: &Prepared,
    psi0: &CVector,
    t_grid: &[f64],
    cache: &[(f64, CMatrix)],
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let mut out = Trajectory { states: vec![psi0.clone()], jumps: Vec::new() };
    let mut psi = psi0.clone();
    let mut r: f64 = rng.random();
    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let mut t = t0;
        loop {
            let cand = if t == t0 {
                let dt = t1 - t0;
                &cache.iter().find(|(d, _)| *d == dt).expect("propagator cached").1 * &psi
            } else {
                p.propagator(t1 - t) * &psi
            };
            if cand.norm_squared() > r {
                psi = cand;
                break;
            }
            // ‖U(s)ψ‖² decreases in s; find where it crosses r.
            let (mut lo, mut hi) = (0.0, t1 - t);
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                if (p.propagator(mid) * &psi).norm_squared() > r {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-13 * (t1 - t0) {
                    break;
                }
            }
            let at = p.propagator(hi) * &psi;
            let (m, jumped) = p.pick_channel(&at, rng.random())?;
            t += hi;
            out.jumps.push((t, m));
            psi = jumped;
            r = rng.random();
        }
        out.states.push(normalized(&psi));
    }
    Ok(out)
}

fn first_order(
    p: &Prepared,
    psi0: &CVector,
    t_grid: &[f64],
    p_max: f64,
    max_refinements: u32,
    rng: &mut ChaCha8Rng,
) -> Result<Trajectory> {
    let mut out = Trajectory { states: vec![psi0.clone()], jumps: Vec::new() };
    let mut psi = psi0.clone();
    let mut props: Vec<(f64, CMatrix)> = Vec::new();
    for w in t_grid.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let interval = t1 - t0;
        let mut t = t0;
        while t1 - t > 1e-12 * interval {
            let rate: f64 = p.ops.iter().map(|(g, op)| g * (op * &psi).norm_squared()).sum::<f64>() * TWO_PI;
            let mut h = t1 - t;
            let mut refinements = 0;
            while rate * h > p_max {
                if refinements == max_refinements {
                    return Err(Error::JumpCapExceeded { probability: rate * h, cap: p_max, refinements });
                }
                h = interval / 2f64.powi(refinements as i32 + 1);
                refinements += 1;
            }
            h = h.min(t1 - t);
            let dp = rate * h;
            if rng.random::<f64>() < dp {
                let (m, jumped) = p.pick_channel(&psi, rng.random())?;
                out.jumps.push((t + h, m));
                psi = jumped;
            } else {
                let u = match props.iter().find(|(d, _)| *d == h) {
                    Some((_, u)) => u.clone(),
                    None => {
                        let u = p.propagator(h);
                        props.push((h, u.clone()));
                        u
                    }
                };
                psi = normalized(&(u * &psi));
            }
            t += h;
        }
        out.states.push(normalized(&psi));
    }
    Ok(out)
}

/// Sample mean and standard error of `v`. The error is floored at the
/// resolution of a single trajectory, `max|v_i|/N`, so a sample without
/// spread still carries the granularity of a finite ensemble.
pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let floor = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) / n;
    if v.len() < 2 {
        return (mean, floor);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt().max(floor))
}

/// Averaged standard columns with `_se` companions, plus `n_cav` (cavity
/// spaces) and `norm`.
pub fn ensemble_reduce(ens: &TrajectoryEnsemble) -> Result<TimeSeriesTable> {
    let n_t = ens.times.len();
    let n = ens.n_traj;
    let mut means: Vec<Vec<f64>> = vec![Vec::with_capacity(n_t); STANDARD_COLUMNS.len()];
    let mut ses: Vec<Vec<f64>> = vec![Vec::with_capacity(n_t); STANDARD_COLUMNS.len()];
    let mut n_cav = Vec::with_capacity(n_t);
    let mut n_cav_se = Vec::with_capacity(n_t);
    let mut norm = Vec::with_capacity(n_t);
    let has_cavity = ens.space.kind().has_cavity();
    let photons: Vec<f64> = ens.space.states().iter().map(|s| s.photons as f64).collect();

    for k in 0..n_t {
        let blocks: Vec<CMatrix> = (0..n).map(|i| atomic_block_pure(&ens.space, ens.state(i, k))).collect();
        let mut avg = CMatrix::zeros(4, 4);
        for b in &blocks {
            avg += b;
        }
        avg /= c(n as f64, 0.0);
        let vals = standard_values(&avg)?;
        let coh_mean: Complex64 = avg[(crate::space::TQ_01, crate::space::TQ_10)];
        let phase = if coh_mean.norm() > 0.0 { coh_mean.conj() / coh_mean.norm() } else { c(1.0, 0.0) };

        let per_traj = |f: &dyn Fn(&CMatrix) -> f64| -> Vec<f64> { blocks.iter().map(f).collect() };
        let samples: [Vec<f64>; 7] = [
            per_traj(&|b| b[(crate::space::TQ_00, crate::space::TQ_00)].re),
            per_traj(&|b| b[(crate::space::TQ_01, crate::space::TQ_01)].re),
            per_traj(&|b| b[(crate::space::TQ_10, crate::space::TQ_10)].re),
            per_traj(&|b| b[(crate::space::TQ_01, crate::space::TQ_10)].re),
            per_traj(&|b| b[(crate::space::TQ_01, crate::space::TQ_10)].im),
            per_traj(&|b| (b[(crate::space::TQ_01, crate::space::TQ_10)] * phase).re),
            per_traj(&|b| 2.0 * (b[(crate::space::TQ_01, crate::space::TQ_10)] * phase).re),
        ];
        for (col, (s, v)) in samples.iter().zip(vals).enumerate() {
            means[col].push(v);
            ses[col].push(mean_and_se(s).1);
        }
        if has_cavity {
            let nc: Vec<f64> = (0..n)
                .map(|i| {
                    let psi = ens.state(i, k);
                    psi.iter().zip(&photons).map(|(a, p)| a.norm_sqr() * p).sum::<f64>()
                })
                .collect();
            let (m, s) = mean_and_se(&nc);
            n_cav.push(m);
            n_cav_se.push(s);
        }
        norm.push((0..n).map(|i| ens.state(i, k).norm_squared()).sum::<f64>() / n as f64);
    }

    let mut table = TimeSeriesTable::new(ens.times.clone())?;
    for ((name, m), s) in STANDARD_COLUMNS.iter().zip(means).zip(ses) {
        table.push_column(*name, m)?;
        table.push_column(format!("{name}_se"), s)?;
    }
    if has_cavity {
        table.push_column("n_cav", n_cav)?;
        table.push_column("n_cav_se", n_cav_se)?;
    }
    table.push_column("norm", norm)?;
    Ok(table)
}

/// Cumulative jump counts per trajectory, averaged per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpStatistics {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `mean[m][k]`: mean count of channel `m` up to `times[k]`.
    pub mean: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    /// Per-trajectory cumulative counts, `counts[m][i][k]`.
    pub counts: Vec<Vec<Vec<f64>>>,
}

impl JumpStatistics {
    pub fn channel(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn summed(&self, channels: &[usize], i: usize, k: usize) -> f64 {
        channels.iter().map(|&m| self.counts[m][i][k]).sum()
    }

    /// Mean and standard error of `count(a) - count(b)` at every grid time,
    /// from paired per-trajectory differences.
    pub fn difference(&self, a: usize, b: usize) -> (Vec<f64>, Vec<f64>) {
        let n = self.counts[a].len();
        (0..self.times.len())
            .map(|k| {
                let v: Vec<f64> = (0..n).map(|i| self.counts[a][i][k] - self.counts[b][i][k]).collect();
                mean_and_se(&v)
            })
            .unzip()
    }

    /// Ratio of total counts of two channel groups at the final time, with a
    /// first-order (delta method) standard error that includes the covariance.
    pub fn final_ratio(&self, num: &[usize], den: &[usize]) -> Result<(f64, f64)> {
        let k = self.times.len() - 1;
        let n = self.counts.first().map_or(0, |c| c.len());
        let x: Vec<f64> = (0..n).map(|i| self.summed(num, i, k)).collect();
        let y: Vec<f64> = (0..n).map(|i| self.summed(den, i, k)).collect();
        let nf = n as f64;
        let (mx, my) = (x.iter().sum::<f64>() / nf, y.iter().sum::<f64>() / nf);
        if !(my > 0.0) || n < 2 {
            return Err(Error::ZeroDenominator("no jumps in the denominator channels"));
        }
        let cov = |a: &[f64], ma: f64, b: &[f64], mb: f64| {
            a.iter().zip(b).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>() / (nf - 1.0)
        };
        let r = mx / my;
        let var = (cov(&x, mx, &x, mx) - 2.0 * r * cov(&x, mx, &y, my) + r * r * cov(&y, my, &y, my)) / (nf * my * my);
        Ok((r, var.max(0.0).sqrt()))
    }

    pub fn to_table(&self) -> Result<TimeSeriesTable> {
        let mut t = TimeSeriesTable::new(self.times.clone())?;
        for (m, label) in self.labels.iter().enumerate() {
            t.push_column(format!("jumps_{label}"), self.mean[m].clone())?;
            t.push_column(format!("jumps_{label}_se"), self.se[m].clone())?;
        }
        Ok(t)
    }
}

pub fn jump_statistics(ens: &TrajectoryEnsemble) -> JumpStatistics {
    let n_ch = ens.channel_labels.len();
    let n_t = ens.times.len();
    // counts[m][i][k]
    let mut counts = vec![vec![vec![0.0f64; n_t]; ens.n_traj]; n_ch];
    for j in &ens.jumps {
        let first = ens.times.partition_point(|&t| t < j.t);
        for c in &mut counts[j.channel][j.trajectory][first..] {
            *c += 1.0;
        }
    }
    let mut mean = vec![Vec::with_capacity(n_t); n_ch];
    let mut se = vec![Vec::with_capacity(n_t); n_ch];
    for (m, per_traj) in counts.iter().enumerate() {
        for k in 0..n_t {
            let v: Vec<f64> = per_traj.iter().map(|c| c[k]).collect();
            let (mu, s) = mean_and_se(&v);
            mean[m].push(mu);
            se[m].push(s);
        }
    }
    JumpStatistics { times: ens.times.clone(), labels: ens.channel_labels.clone(), mean, se, counts }
}
