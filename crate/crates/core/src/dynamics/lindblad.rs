//! Lindblad master equation
//! `dρ/dt = 2π(−i[H, ρ] + Σ_m Γ_m (C_m ρ C_m† − ½{C_m†C_m, ρ}))`
//! with `H` and `Γ_m` in the stored frequency units and `t` in μs.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{c, expm, hermitian_part, is_hermitian, min_hermitian_eigenvalue, trace, CMatrix, CVector, I, TWO_PI};
use crate::observables::{DensityMatrix, POSITIVITY_TOL};
use crate::operator::HarmonicOp;
use crate::space::{HilbertSpace, SpaceKind};

/// Population allowed in the highest retained Fock layer.
pub const FOCK_LAYER_TOL: f64 = 1e-6;
/// Trace drift allowed per μs of evolution.
pub const TRACE_DRIFT_PER_US: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub label: String,
    pub rate: f64,
    pub op: HarmonicOp,
}

impl Channel {
    pub fn new(label: impl Into<String>, rate: f64, op: HarmonicOp) -> Self {
        Channel { label: label.into(), rate, op }
    }

    pub fn constant(label: impl Into<String>, rate: f64, op: CMatrix) -> Self {
        Channel::new(label, rate, HarmonicOp::constant(op))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LindbladSystem {
    kind: SpaceKind,
    hamiltonian: HarmonicOp,
    channels: Vec<Channel>,
}

impl LindbladSystem {
    pub fn new(kind: SpaceKind, hamiltonian: HarmonicOp, channels: Vec<Channel>) -> Result<Self> {
        let dim = HilbertSpace::from_kind(kind)?.dim();
        if hamiltonian.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: hamiltonian.dim() });
        }
        for t in [0.0, 0.137, 1.9] {
            if !is_hermitian(&hamiltonian.at(t), 1e-12) {
                return Err(Error::param("hamiltonian", "not Hermitian"));
            }
        }
        for ch in &channels {
            if ch.op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: ch.op.dim() });
            }
            if !(ch.rate >= 0.0 && ch.rate.is_finite()) {
                return Err(Error::param("rate", format!("channel {} has rate {}", ch.label, ch.rate)));
            }
        }
        Ok(LindbladSystem { kind, hamiltonian, channels })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HarmonicOp {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel_labels(&self) -> Vec<String> {
        self.channels.iter().map(|c| c.label.clone()).collect()
    }

    pub fn is_time_independent(&self) -> bool {
        self.hamiltonian.is_constant() && self.channels.iter().all(|c| c.op.is_constant())
    }

    /// Keeps only the channels for which `keep` returns true.
    pub fn filter_channels(mut self, keep: impl Fn(&Channel) -> bool) -> Self {
        self.channels.retain(|c| keep(c));
        self
    }

    /// Fastest time scale of the generator, in the stored frequency units.
    pub fn max_rate(&self) -> f64 {
        let h = self.hamiltonian.norm_bound() + self.hamiltonian.max_frequency();
        let d: f64 = self
            .channels
            .iter()
            .map(|c| c.rate * c.op.norm_bound().powi(2) + c.op.max_frequency())
            .sum();
        h + d
    }

    /// `H − (i/2) Σ Γ C†C` at time `t`.
    pub fn effective_hamiltonian(&self, t: f64) -> CMatrix {
        let mut h = self.hamiltonian.at(t);
        for ch in &self.channels {
            if ch.rate > 0.0 {
                let op = ch.op.at(t);
                h -= op.adjoint() * &op * c(0.0, 0.5 * ch.rate);
            }
        }
        h
    }

    /// Smallest index set containing `seed` that the generator cannot leave.
    pub fn invariant_support(&self, seed: &[usize]) -> Vec<usize> {
        let n = self.dim();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for (i, j) in self.hamiltonian.pattern() {
            adj[i].insert(j);
            adj[j].insert(i);
        }
        for ch in self.channels.iter().filter(|c| c.rate > 0.0) {
            let pat = ch.op.pattern();
            for &(row, col) in &pat {
                adj[col].insert(row);
            }
            // C†C couples any two columns that share a row.
            for &(r1, c1) in &pat {
                for &(r2, c2) in &pat {
                    if r1 == r2 {
                        adj[c1].insert(c2);
                    }
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = seed.to_vec();
        while let Some(i) = stack.pop() {
            if seen[i] {
                continue;
            }
            seen[i] = true;
            stack.extend(adj[i].iter().copied().filter(|&j| !seen[j]));
        }
        (0..n).filter(|&i| seen[i]).collect()
    }

    fn restrict(&self, idx: &[usize]) -> LindbladSystem {
        LindbladSystem {
            kind: self.kind,
            hamiltonian: self.hamiltonian.restrict(idx),
            channels: self
                .channels
                .iter()
                .map(|ch| Channel::new(ch.label.clone(), ch.rate, ch.op.restrict(idx)))
                .collect(),
        }
    }

    /// Column-major vectorized generator (time-independent systems only),
    /// including the 2π factor.
    pub fn superoperator(&self) -> Result<CMatrix> {
        if !self.is_time_independent() {
            return Err(Error::TimeDependentGenerator("vectorized generator"));
        }
        let n = self.dim();
        let id = CMatrix::identity(n, n);
        let heff = self.effective_hamiltonian(0.0);
        let mut l = id.kronecker(&heff) * (-I) + heff.map(|z| z.conj()).kronecker(&id) * I;
        for ch in self.channels.iter().filter(|c| c.rate > 0.0) {
            let op = ch.op.at(0.0);
            l += op.map(|z| z.conj()).kronecker(&op) * c(ch.rate, 0.0);
        }
        Ok(l * c(TWO_PI, 0.0))
    }

    /// Right-hand side of the master equation in matrix form.
    fn rhs(&self, t: f64, rho: &CMatrix) -> CMatrix {
        let heff = self.effective_hamiltonian(t);
        let hr = &heff * rho;
        let mut out = (&hr - hr.adjoint()) * (-I);
        for ch in self.channels.iter().filter(|c| c.rate > 0.0) {
            let op = ch.op.at(t);
            out += &op * rho * op.adjoint() * c(ch.rate, 0.0);
        }
        out * c(TWO_PI, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Method {
    /// Exact propagator for time-independent systems, otherwise RK4.
    #[default]
    Auto,
    /// Classic fourth-order Runge-Kutta with the given step in μs, or the
    /// default `min(0.002/max_rate, spacing/10)`.
    Rk4 { step: Option<f64> },
    /// Matrix exponential of the vectorized generator per grid interval.
    Propagator,
}

#[derive(Debug, Clone)]
pub struct LindbladRun {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

pub fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidTimeGrid("empty".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid[0] < 0.0 {
        return Err(Error::InvalidTimeGrid("times must be finite and nonnegative".into()));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidTimeGrid("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Integrates from `rho0` at `t_grid[0]` and returns the state at every grid
/// time. The evolution runs on the smallest invariant subspace containing the
/// support of `rho0`, which is exact.
pub fn integrate_lindblad(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    method: Method,
) -> Result<LindbladRun> {
    check_grid(t_grid)?;
    if rho0.kind() != system.kind {
        return Err(Error::DimensionMismatch { expected: system.dim(), found: rho0.dim() });
    }
    let n = system.dim();
    let m0 = rho0.matrix();
    let seed: Vec<usize> = (0..n).filter(|&i| (0..n).any(|j| m0[(i, j)].norm() > 0.0)).collect();
    let idx = system.invariant_support(&seed);
    let sub = system.restrict(&idx);
    let k = idx.len();
    let rho_sub = CMatrix::from_fn(k, k, |i, j| m0[(idx[i], idx[j])]);

    let method = match method {
        Method::Auto if system.is_time_independent() => Method::Propagator,
        Method::Auto => Method::Rk4 { step: None },
        m => m,
    };
    let sub_states = match method {
        Method::Propagator => propagate_exact(&sub, rho_sub, t_grid)?,
        Method::Rk4 { step } => {
            let h = step.unwrap_or_else(|| default_step(&sub, t_grid));
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::param("step", format!("{h} is not a positive step")));
            }
            if sub.is_time_independent() {
                rk4_vectorized(&sub, rho_sub, t_grid, h)?
            } else {
                rk4_matrix(&sub, rho_sub, t_grid, h)?
            }
        }
        Method::Auto => unreachable!(),
    };

    let fock_top: Vec<usize> = match system.kind {
        SpaceKind::FullLambda { n_max } => {
            let space = HilbertSpace::from_kind(system.kind)?;
            idx.iter()
                .enumerate()
                .filter(|(_, &g)| space.states()[g].photons == n_max)
                .map(|(l, _)| l)
                .collect()
        }
        _ => Vec::new(),
    };

    let mut states = Vec::with_capacity(t_grid.len());
    for (&t, s) in t_grid.iter().zip(sub_states) {
        let elapsed = t - t_grid[0];
        let tr = trace(&s);
        if (tr.re - 1.0).abs() > TRACE_DRIFT_PER_US * elapsed.max(1.0) {
            return Err(Error::TraceDrift { t, trace: tr.re });
        }
        let lo = min_hermitian_eigenvalue(&s);
        if lo < -POSITIVITY_TOL {
            return Err(Error::PositivityViolation { t, eigenvalue: lo });
        }
        if let SpaceKind::FullLambda { n_max } = system.kind {
            let pop: f64 = fock_top.iter().map(|&l| s[(l, l)].re).sum();
            if pop > FOCK_LAYER_TOL {
                return Err(Error::FockTruncation { t, n_max, population: pop });
            }
        }
        let mut full = CMatrix::zeros(n, n);
        for (a, &ga) in idx.iter().enumerate() {
            for (b, &gb) in idx.iter().enumerate() {
                full[(ga, gb)] = s[(a, b)];
            }
        }
        states.push(DensityMatrix::new_unchecked(system.kind, full));
    }
    Ok(LindbladRun { times: t_grid.to_vec(), states })
}

fn default_step(system: &LindbladSystem, t_grid: &[f64]) -> f64 {
    let spacing = t_grid.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let rate = system.max_rate();
    let by_rate = if rate > 0.0 { 0.002 / rate } else { f64::INFINITY };
    let h = by_rate.min(spacing / 10.0);
    if h.is_finite() {
        h
    } else {
        1.0
    }
}

fn vec_of(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

fn mat_of(v: &CVector, n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v.as_slice())
}

fn propagate_exact(system: &LindbladSystem, rho0: CMatrix, t_grid: &[f64]) -> Result<Vec<CMatrix>> {
    let n = rho0.nrows();
    let l = system.superoperator()?;
    let mut cache: Vec<(f64, CMatrix)> = Vec::new();
    let mut out = vec![rho0.clone()];
    let mut v = vec_of(&rho0);
    for w in t_grid.windows(2) {
        let dt = w[1] - w[0];
        let pos = match cache.iter().position(|(d, _)| (d - dt).abs() <= 1e-12 * dt.abs()) {
            Some(p) => p,
            None => {
                cache.push((dt, expm(&(&l * c(dt, 0.0)))));
                cache.len() - 1
            }
        };
        let prop = &cache[pos].1;
        v = prop * &v;
        let m = hermitian_part(&mat_of(&v, n));
        v = vec_of(&m);
        out.push(m);
    }
    Ok(out)
}

fn substeps(interval: f64, h: f64) -> Result<usize> {
    let k = (interval / h).ceil();
    if !k.is_finite() || k > 1e10 {
        return Err(Error::StepUnderflow { step: h, interval });
    }
    Ok((k as usize).max(1))
}

fn rk4_vectorized(system: &LindbladSystem, rho0: CMatrix, t_grid: &[f64], h: f64) -> Result<Vec<CMatrix>> {
    let n = rho0.nrows();
    let l = system.superoperator()?;
    let mut out = vec![rho0.clone()];
    let mut v = vec_of(&rho0);
    for w in t_grid.windows(2) {
        let steps = substeps(w[1] - w[0], h)?;
        let dt = (w[1] - w[0]) / steps as f64;
        let half = c(dt / 2.0, 0.0);
        let full = c(dt, 0.0);
        for _ in 0..steps {
            let k1 = &l * &v;
            let k2 = &l * (&v + &k1 * half);
            let k3 = &l * (&v + &k2 * half);
            let k4 = &l * (&v + &k3 * full);
            v += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
            symmetrize_vec(&mut v, n);
        }
        out.push(mat_of(&v, n));
    }
    Ok(out)
}

fn symmetrize_vec(v: &mut CVector, n: usize) {
    for j in 0..n {
        for i in 0..=j {
            let a = v[i + j * n];
            let b = v[j + i * n];
            let s = (a + b.conj()) * 0.5;
            v[i + j * n] = s;
            v[j + i * n] = s.conj();
        }
    }
}

fn rk4_matrix(system: &LindbladSystem, rho0: CMatrix, t_grid: &[f64], h: f64) -> Result<Vec<CMatrix>> {
    let mut out = vec![rho0.clone()];
    let mut rho = rho0;
    for w in t_grid.windows(2) {
        let steps = substeps(w[1] - w[0], h)?;
        let dt = (w[1] - w[0]) / steps as f64;
        let half = c(dt / 2.0, 0.0);
        for s in 0..steps {
            let t = w[0] + s as f64 * dt;
            let k1 = system.rhs(t, &rho);
            let k2 = system.rhs(t + dt / 2.0, &(&rho + &k1 * half));
            let k3 = system.rhs(t + dt / 2.0, &(&rho + &k2 * half));
            let k4 = system.rhs(t + dt, &(&rho + &k3 * c(dt, 0.0)));
            rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
            rho = hermitian_part(&rho);
        }
        out.push(rho.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::space::{R4_GROUND, R4_PHOTON};

    fn decay_system(kappa: f64) -> LindbladSystem {
        let mut a = CMatrix::zeros(4, 4);
        a[(R4_GROUND, R4_PHOTON)] = ONE;
        LindbladSystem::new(
            SpaceKind::Restricted4,
            CMatrix::zeros(4, 4).into(),
            vec![Channel::constant("a", kappa, a)],
        )
        .unwrap()
    }

    #[test]
    fn photon_decays_exponentially() {
        let sys = decay_system(0.7);
        let rho0 = DensityMatrix::basis(&HilbertSpace::restricted4(), R4_PHOTON).unwrap();
        let grid: Vec<f64> = (0..21).map(|k| k as f64 * 0.1).collect();
        for method in [Method::Propagator, Method::Rk4 { step: None }] {
            let run = integrate_lindblad(&sys, &rho0, &grid, method).unwrap();
            for (t, s) in run.times.iter().zip(&run.states) {
                let want = (-TWO_PI * 0.7 * t).exp();
                assert!((s.get(R4_PHOTON, R4_PHOTON).re - want).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn unitary_evolution_keeps_purity() {
        let mut h = CMatrix::zeros(4, 4);
        h[(1, 3)] = c(0.3, 0.1);
        h[(3, 1)] = c(0.3, -0.1);
        h[(2, 2)] = c(0.2, 0.0);
        h[(1, 2)] = c(0.1, 0.0);
        h[(2, 1)] = c(0.1, 0.0);
        let sys = LindbladSystem::new(SpaceKind::Restricted4, h.into(), vec![]).unwrap();
        let rho0 = DensityMatrix::basis(&HilbertSpace::restricted4(), 3).unwrap();
        let grid: Vec<f64> = (0..11).map(|k| k as f64 * 0.5).collect();
        for method in [Method::Propagator, Method::Rk4 { step: None }] {
            let run = integrate_lindblad(&sys, &rho0, &grid, method).unwrap();
            for s in &run.states {
                assert!((s.purity() - 1.0).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn support_closure_follows_channels() {
        let sys = decay_system(1.0);
        assert_eq!(sys.invariant_support(&[R4_PHOTON]), vec![R4_GROUND, R4_PHOTON]);
        assert_eq!(sys.invariant_support(&[R4_GROUND]), vec![R4_GROUND]);
    }

    #[test]
    fn matrix_and_vector_rk4_agree() {
        // A time-dependent wrapper around a constant generator.
        let mut h = CMatrix::zeros(4, 4);
        h[(1, 3)] = c(0.4, 0.0);
        h[(3, 1)] = c(0.4, 0.0);
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 1)] = ONE;
        let sys = LindbladSystem::new(SpaceKind::Restricted4, h.clone().into(), vec![Channel::constant("a", 0.3, a.clone())]).unwrap();
        let zero = CMatrix::zeros(4, 4);
        let td = LindbladSystem::new(
            SpaceKind::Restricted4,
            HarmonicOp::from_terms(4, [(0.0, h), (0.5, zero.clone())]),
            vec![Channel::new("a", 0.3, HarmonicOp::from_terms(4, [(0.0, a), (0.5, zero)]))],
        )
        .unwrap();
        let rho0 = DensityMatrix::basis(&HilbertSpace::restricted4(), 3).unwrap();
        let grid = [0.0, 0.5, 1.0, 2.0];
        let x = integrate_lindblad(&sys, &rho0, &grid, Method::Rk4 { step: Some(1e-3) }).unwrap();
        let y = integrate_lindblad(&td, &rho0, &grid, Method::Rk4 { step: Some(1e-3) }).unwrap();
        let z = integrate_lindblad(&sys, &rho0, &grid, Method::Propagator).unwrap();
        for ((p, q), r) in x.states.iter().zip(&y.states).zip(&z.states) {
            assert!(crate::linalg::max_abs_diff(p.matrix(), q.matrix()) < 1e-12);
            assert!(crate::linalg::max_abs_diff(p.matrix(), r.matrix()) < 1e-10);
        }
    }

    #[test]
    fn grid_and_system_validation() {
        let sys = decay_system(1.0);
        let rho0 = DensityMatrix::basis(&HilbertSpace::restricted4(), 1).unwrap();
        assert!(integrate_lindblad(&sys, &rho0, &[], Method::Auto).is_err());
        assert!(integrate_lindblad(&sys, &rho0, &[0.0, 0.0], Method::Auto).is_err());
        let mut h = CMatrix::zeros(4, 4);
        h[(0, 1)] = ONE;
        h[(1, 0)] = ZERO;
        assert!(LindbladSystem::new(SpaceKind::Restricted4, h.into(), vec![]).is_err());
        let bad = vec![Channel::constant("a", -1.0, CMatrix::zeros(4, 4))];
        assert!(LindbladSystem::new(SpaceKind::Restricted4, CMatrix::zeros(4, 4).into(), bad).is_err());
    }
}
