//! Elimination of the excited level: from three-level ion parameters to the
//! effective two-level Dicke model, its emission channels and the full
//! three-level reference model.
//!
//! Couplings per ion `j`: laser `g_L = Ω_j`, cavity `g_C = β_j* g`.

use std::fmt;

use num_complex::Complex64;

use crate::analytic::DickeParams;
use crate::dynamics::lindblad::{Channel, LindbladSystem};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ONE, ZERO};
use crate::operator::{build_operator, HarmonicOp, LinearOp, OperatorSpec};
use crate::params::ModelParams;
use crate::space::{HilbertSpace, Level, SpaceKind, R4_GROUND, R4_ION1, R4_ION2, R4_PHOTON};

/// Ratio `max(|Ω|, |βg|)/Δ` above which the elimination is flagged.
pub const VALIDITY_THRESHOLD: f64 = 0.1;

/// Restricted4 index of the state with ion `j` (0-based) excited.
pub const fn ion_index(j: usize) -> usize {
    if j == 0 {
        R4_ION1
    } else {
        R4_ION2
    }
}

/// `β⁽ʲ⁾ = e^{i k_L x⁽ʲ⁾} sin(k_C x⁽ʲ⁾)`.
pub fn beta_from_positions(k_l: f64, k_c: f64, x: &[f64]) -> Result<Vec<Complex64>> {
    if !(k_l > 0.0 && k_c > 0.0) {
        return Err(Error::param("wavenumber", "k_L and k_C must be positive"));
    }
    Ok(x.iter().map(|&xj| Complex64::from_polar(1.0, k_l * xj) * (k_c * xj).sin()).collect())
}

/// Real placements giving relative coupling `r1` on ion 1: the larger of the
/// two is 1.
pub fn beta_from_target_r1(r1: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&r1) {
        return Err(Error::param("r1", format!("{r1} outside [0, 1]")));
    }
    let r2 = (1.0 - r1 * r1).max(0.0).sqrt();
    Ok(if r1 <= r2 { (r1 / r2, 1.0) } else { (1.0, r2 / r1) })
}

/// `ξ = Δ² / (Δ² + (γ_S + γ_D)²/4)`.
pub fn xi_factor(delta_raman: f64, gamma_s: f64, gamma_d: f64) -> f64 {
    let d2 = delta_raman * delta_raman;
    let g = gamma_s + gamma_d;
    d2 / (d2 + g * g / 4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveParams {
    pub xi: f64,
    pub beta_total: f64,
    /// `g_eff = −ξ g Ω/Δ` for the shared laser.
    pub g_eff: Complex64,
    /// `α_eff⁽ʲ⁾ = λ⁽ʲ⁾ = −ξ β⁽ʲ⁾ g Ω_j/Δ`.
    pub alpha_eff: Vec<Complex64>,
    pub omega_c_eff: f64,
    pub omega_a_eff: Vec<f64>,
    /// `ω_A⁽ʲ⁾ − ω_C` per ion.
    pub delta_eff: Vec<f64>,
    pub gamma_s: Vec<f64>,
    pub gamma_d: Vec<f64>,
    pub stark_cavity: f64,
    pub stark_ion: Vec<f64>,
    pub nu: f64,
    pub mu: f64,
    pub kappa: f64,
    /// `max(|Ω|, |β g|)/Δ`.
    pub validity_ratio: f64,
}

impl EffectiveParams {
    pub fn lambda(&self) -> &[Complex64] {
        &self.alpha_eff
    }

    pub fn is_valid_regime(&self) -> bool {
        self.validity_ratio <= VALIDITY_THRESHOLD
    }

    pub fn validity_warning(&self) -> Option<String> {
        (!self.is_valid_regime()).then(|| {
            format!(
                "elimination validity ratio max(|Omega|,|beta g|)/Delta = {:.4} exceeds {VALIDITY_THRESHOLD}",
                self.validity_ratio
            )
        })
    }

    /// `|α_T| = sqrt(Σ|α_eff⁽ʲ⁾|²)`, which equals `|β_T g_eff|` for a shared laser.
    pub fn alpha_total(&self) -> f64 {
        self.alpha_eff.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Lossy Dicke parameters of the effective model (emissions dropped).
    pub fn dicke(&self) -> Result<DickeParams> {
        let at = self.alpha_total();
        if at == 0.0 {
            return Err(Error::ZeroDenominator("effective coupling vanishes"));
        }
        if self.delta_eff.iter().any(|d| (d - self.delta_eff[0]).abs() > 1e-12) {
            return Err(Error::param("delta_laser", "ions have different effective detunings"));
        }
        DickeParams::with_complex_r(at, [self.alpha_eff[0] / at, self.alpha_eff[1] / at], self.delta_eff[0], self.kappa)
    }

    pub fn generalized_rabi(&self) -> Complex64 {
        crate::analytic::generalized_rabi(self.alpha_total(), self.delta_eff[0], self.kappa)
    }

    /// `2π/|Ω_g|` in μs.
    pub fn rabi_period(&self) -> f64 {
        crate::analytic::rabi_period(self.generalized_rabi())
    }

    /// `4|β_T g_eff|/κ`; large values mean strong ion-cavity coupling.
    pub fn coupling_regime_ratio(&self) -> f64 {
        4.0 * self.alpha_total() / self.kappa
    }
}

/// Effective parameters in the rotated frame with `ν = 0`.
pub fn reduce(params: &ModelParams) -> Result<EffectiveParams> {
    reduce_in_frame(params, 0.0)
}

pub fn reduce_in_frame(params: &ModelParams, nu: f64) -> Result<EffectiveParams> {
    params.validate()?;
    if !nu.is_finite() {
        return Err(Error::param("nu", "not finite"));
    }
    let d = params.delta_raman;
    let g = params.g_cavity;
    let xi = xi_factor(d, params.gamma_s, params.gamma_d);
    let n = params.n_ions();
    let lasers: Vec<_> = (0..n).map(|j| params.laser(j)).collect();

    let stark_cavity = -xi * params.beta.iter().map(|b| b.norm_sqr() * g * g).sum::<f64>() / d;
    let stark_ion: Vec<f64> = lasers.iter().map(|l| -xi * l.omega_rabi.norm_sqr() / d).collect();
    let alpha_eff: Vec<Complex64> =
        (0..n).map(|j| -params.beta[j] * g * lasers[j].omega_rabi * (xi / d)).collect();
    let mu = (stark_cavity + nu) / 3.0;
    let omega_c_eff = 2.0 * (stark_cavity + nu) / 3.0;
    let omega_a_eff: Vec<f64> = (0..n)
        .map(|j| lasers[j].delta_laser + stark_ion[j] - stark_cavity / 3.0 + 2.0 * nu / 3.0)
        .collect();
    let delta_eff = omega_a_eff.iter().map(|w| w - omega_c_eff).collect();
    let (gamma_s, gamma_d) = decay_rates(params)?;
    let validity_ratio = (0..n)
        .map(|j| lasers[j].omega_rabi.norm().max(params.beta[j].norm() * g))
        .fold(0.0, f64::max)
        / d;

    Ok(EffectiveParams {
        xi,
        beta_total: params.beta_total(),
        g_eff: c(-xi * g * params.omega_rabi / d, 0.0),
        alpha_eff,
        omega_c_eff,
        omega_a_eff,
        delta_eff,
        gamma_s,
        gamma_d,
        stark_cavity,
        stark_ion,
        nu,
        mu,
        kappa: params.kappa,
        validity_ratio,
    })
}

/// `Γ_m⁽ʲ⁾ = ξ(|Ω_j|² + |β⁽ʲ⁾g|²) γ_m / Δ²` for m = S, D.
pub fn decay_rates(params: &ModelParams) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    let d = params.delta_raman;
    let xi = xi_factor(d, params.gamma_s, params.gamma_d);
    let base: Vec<f64> = (0..params.n_ions())
        .map(|j| {
            let om = params.laser(j).omega_rabi.norm_sqr();
            xi * (om + params.beta[j].norm_sqr() * params.g_cavity * params.g_cavity) / (d * d)
        })
        .collect();
    Ok((
        base.iter().map(|b| b * params.gamma_s).collect(),
        base.iter().map(|b| b * params.gamma_d).collect(),
    ))
}

/// Emission rate per unit coherent coupling for ion `j` (1-based):
/// `(1 + x²)/x · γ_S/Δ` with `x = |β⁽ʲ⁾g/Ω|`.
pub fn decay_vs_coupling(params: &ModelParams, j: usize) -> Result<f64> {
    if j == 0 || j > params.n_ions() {
        return Err(Error::IonIndexOutOfRange { index: j, n_ions: params.n_ions() });
    }
    let om = params.laser(j - 1).omega_rabi.norm();
    if om == 0.0 {
        return Err(Error::ZeroDenominator("Omega = 0"));
    }
    let x = params.beta[j - 1].norm() * params.g_cavity / om;
    if x == 0.0 {
        return Err(Error::ZeroDenominator("beta g = 0"));
    }
    Ok((1.0 + x * x) / x * params.gamma_s / params.delta_raman)
}

/// Laser detuning that cancels the Stark shifts, `δ_eff = 0`.
pub fn resonant_delta_laser(params: &ModelParams) -> f64 {
    let d = params.delta_raman;
    let xi = xi_factor(d, params.gamma_s, params.gamma_d);
    let g2 = params.beta.iter().map(|b| b.norm_sqr()).sum::<f64>() * params.g_cavity * params.g_cavity;
    xi * (params.omega_rabi * params.omega_rabi - g2) / d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelLabel {
    /// Decay back to S: a phase error, no excitation lost.
    EmissionS(usize),
    /// Decay to D: the excitation is lost.
    EmissionD(usize),
    Cavity,
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChannelLabel::EmissionS(j) => write!(f, "C_S{j}"),
            ChannelLabel::EmissionD(j) => write!(f, "C_D{j}"),
            ChannelLabel::Cavity => write!(f, "a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub label: ChannelLabel,
    pub rate: f64,
    pub op: LinearOp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Time-independent frame with free rotation parameter `ν`.
    Rotated { nu: f64 },
    /// Bare Stark-shifted levels with explicit `e^{−iδ_L t}` couplings.
    StarkExplicit,
}

impl Default for Frame {
    fn default() -> Self {
        Frame::Rotated { nu: 0.0 }
    }
}

/// Normalized `⟨Φ_j|` coefficients on (`|1_j⟩`, `|001⟩`), global phase fixed
/// so the laser coefficient is real and positive.
fn phi_bra(params: &ModelParams, j: usize) -> (Complex64, Complex64) {
    let om = params.laser(j).omega_rabi;
    let cav = params.beta[j].conj() * params.g_cavity;
    let norm = (om.norm_sqr() + cav.norm_sqr()).sqrt();
    if norm == 0.0 {
        return (ONE, ZERO);
    }
    let phase = if om.norm() > 0.0 {
        om.conj() / om.norm()
    } else {
        cav.conj() / cav.norm()
    };
    (om * phase / norm, cav * phase / norm)
}

/// Emission channels `C_S⁽¹⁾, C_S⁽²⁾, C_D⁽¹⁾, C_D⁽²⁾` and the cavity channel,
/// in the rotated frame. Each operator has unit norm.
pub fn build_jump_channels(params: &ModelParams) -> Result<Vec<JumpChannel>> {
    let (gs, gd) = decay_rates(params)?;
    let n = params.n_ions();
    let mut out = Vec::with_capacity(2 * n + 1);
    for (is_s, rates) in [(true, &gs), (false, &gd)] {
        for (j, &rate) in rates.iter().enumerate().take(n) {
            let (cl, cc) = phi_bra(params, j);
            let idx = ion_index(j);
            let target = if is_s { idx } else { R4_GROUND };
            let mut m = CMatrix::zeros(4, 4);
            m[(target, idx)] = cl;
            m[(target, R4_PHOTON)] = cc;
            out.push(JumpChannel {
                label: if is_s { ChannelLabel::EmissionS(j + 1) } else { ChannelLabel::EmissionD(j + 1) },
                rate,
                op: LinearOp::new(SpaceKind::Restricted4, m)?,
            });
        }
    }
    out.push(JumpChannel {
        label: ChannelLabel::Cavity,
        rate: params.kappa,
        op: build_operator(&HilbertSpace::restricted4(), OperatorSpec::Annihilate)?,
    });
    Ok(out)
}

/// Effective Hamiltonian on Restricted4 in the requested frame.
pub fn build_effective_hamiltonian(params: &ModelParams, frame: Frame) -> Result<HarmonicOp> {
    let nu = match frame {
        Frame::Rotated { nu } => nu,
        Frame::StarkExplicit => 0.0,
    };
    let eff = reduce_in_frame(params, nu)?;
    let mut diag = CMatrix::zeros(4, 4);
    let mut terms = Vec::new();
    match frame {
        Frame::Rotated { nu } => {
            diag[(R4_GROUND, R4_GROUND)] = c(eff.mu, 0.0);
            diag[(R4_PHOTON, R4_PHOTON)] = c(eff.stark_cavity + nu, 0.0);
            for j in 0..2 {
                let i = ion_index(j);
                diag[(i, i)] = c(params.laser(j).delta_laser + eff.stark_ion[j] + nu, 0.0);
                diag[(R4_PHOTON, i)] = eff.alpha_eff[j];
                diag[(i, R4_PHOTON)] = eff.alpha_eff[j].conj();
            }
        }
        Frame::StarkExplicit => {
            diag[(R4_PHOTON, R4_PHOTON)] = c(eff.stark_cavity, 0.0);
            for j in 0..2 {
                let i = ion_index(j);
                diag[(i, i)] = c(eff.stark_ion[j], 0.0);
                let dl = params.laser(j).delta_laser;
                let mut up = CMatrix::zeros(4, 4);
                up[(R4_PHOTON, i)] = eff.alpha_eff[j];
                let down = up.adjoint();
                terms.push((dl, up));
                terms.push((-dl, down));
            }
        }
    }
    terms.push((0.0, diag));
    Ok(HarmonicOp::from_terms(4, terms))
}

/// Jump channels as engine channels in the requested frame. In the rotated
/// frame the operators do not depend on `ν`.
pub fn channels_in_frame(params: &ModelParams, frame: Frame) -> Result<Vec<Channel>> {
    let chans = build_jump_channels(params)?;
    Ok(chans
        .into_iter()
        .map(|ch| {
            let op = match (frame, ch.label) {
                (Frame::StarkExplicit, ChannelLabel::EmissionS(j) | ChannelLabel::EmissionD(j)) => {
                    let idx = ion_index(j - 1);
                    let mut laser = CMatrix::zeros(4, 4);
                    let mut rest = ch.op.matrix().clone();
                    for r in 0..4 {
                        laser[(r, idx)] = rest[(r, idx)];
                        rest[(r, idx)] = ZERO;
                    }
                    HarmonicOp::from_terms(4, [(0.0, rest), (params.laser(j - 1).delta_laser, laser)])
                }
                _ => HarmonicOp::constant(ch.op.into_matrix()),
            };
            Channel::new(ch.label.to_string(), ch.rate, op)
        })
        .collect())
}

/// Effective master equation; `emission = false` keeps only cavity loss.
pub fn effective_system(params: &ModelParams, frame: Frame, emission: bool) -> Result<LindbladSystem> {
    let h = build_effective_hamiltonian(params, frame)?;
    let mut chans = channels_in_frame(params, frame)?;
    if !emission {
        chans.retain(|c| c.label == ChannelLabel::Cavity.to_string());
    }
    LindbladSystem::new(SpaceKind::Restricted4, h, chans)
}

/// `H − (i/2) Σ_m Γ_m C_m†C_m` in the rotated frame with `ν = 0`.
pub fn build_mc_hamiltonian(params: &ModelParams) -> Result<LinearOp> {
    let sys = effective_system(params, Frame::Rotated { nu: 0.0 }, true)?;
    LinearOp::new(SpaceKind::Restricted4, sys.effective_hamiltonian(0.0))
}

/// Full three-level ions and a truncated cavity mode, in the frame where
/// the laser phase is absorbed into the S energies:
/// `H = Σ_j [Δ A_PP + δ_L A_SS + (Ω A_PS + β* g a A_PD + h.c.)]`,
/// channels `a` (κ), `A_SP` (γ_S), `A_DP` (γ_D).
pub fn full_lambda_system(params: &ModelParams, n_max: usize) -> Result<LindbladSystem> {
    params.validate()?;
    let space = HilbertSpace::full_lambda(n_max)?;
    let kind = space.kind();
    let op = |spec| build_operator(&space, spec).map(LinearOp::into_matrix);
    let a = op(OperatorSpec::Annihilate)?;
    let dim = space.dim();
    let mut h = CMatrix::zeros(dim, dim);
    let mut chans = vec![Channel::constant("a", params.kappa, a.clone())];
    for j in 1..=2 {
        let tr = |to, from| op(OperatorSpec::Transition { ion: j, to, from });
        let laser = params.laser(j - 1);
        h += tr(Level::P, Level::P)? * c(params.delta_raman, 0.0);
        h += tr(Level::S, Level::S)? * c(laser.delta_laser, 0.0);
        let x = tr(Level::P, Level::S)? * laser.omega_rabi
            + &a * tr(Level::P, Level::D)? * (params.beta[j - 1].conj() * params.g_cavity);
        h += &x + x.adjoint();
        chans.push(Channel::constant(format!("A_SP{j}"), params.gamma_s, tr(Level::S, Level::P)?));
        chans.push(Channel::constant(format!("A_DP{j}"), params.gamma_d, tr(Level::D, Level::P)?));
    }
    LindbladSystem::new(kind, h.into(), chans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, operator_norm};
    use crate::params::table1;

    #[test]
    fn beta_positions() {
        let b = beta_from_positions(1.0, 1.0, &[0.0]).unwrap();
        assert_eq!(b[0], ZERO);
        let b = beta_from_positions(1.0, 1.0, &[std::f64::consts::FRAC_PI_2]).unwrap();
        assert!((b[0] - Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2)).norm() < 1e-15);
        // k_C x = π/6, k_L x = π.
        let x = std::f64::consts::PI / 6.0;
        let b = beta_from_positions(6.0, 1.0, &[x]).unwrap();
        assert!((b[0] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!(beta_from_positions(0.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn beta_for_target_r1() {
        let (a, b) = beta_from_target_r1(std::f64::consts::FRAC_1_SQRT_2).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        let (a, b) = beta_from_target_r1(0.55).unwrap();
        assert!((a - 0.55 / (1.0f64 - 0.3025).sqrt()).abs() < 1e-12 && b == 1.0);
        assert!((a - 0.6586).abs() < 1e-4);
        assert_eq!(beta_from_target_r1(0.0).unwrap(), (0.0, 1.0));
        let (a, b) = beta_from_target_r1(0.9).unwrap();
        assert!(a == 1.0 && (0.9 - a / (a * a + b * b).sqrt()).abs() < 1e-12);
        assert!(beta_from_target_r1(1.5).is_err());
    }

    #[test]
    fn xi_values() {
        assert!((xi_factor(20.0, 22.3, 1.7) - 400.0 / 544.0).abs() < 1e-15);
        assert_eq!(xi_factor(5.0, 0.0, 0.0), 1.0);
        assert!((xi_factor(2000.0, 22.3, 1.7) - 0.99996).abs() < 5e-6);
    }

    #[test]
    fn effective_invariants() {
        let p = ModelParams::table1().with_detuning_ratio(10.0).with_r1(0.46).unwrap().with_delta_laser(0.13);
        for nu in [0.0, 0.7] {
            let e = reduce_in_frame(&p, nu).unwrap();
            assert!(e.xi > 0.0 && e.xi <= 1.0);
            for j in 0..2 {
                let ratio = table1::GAMMA_S / table1::GAMMA_D;
                assert!((e.gamma_s[j] / e.gamma_d[j] - ratio).abs() < 1e-14 * ratio);
                assert!((e.delta_eff[j] - (e.omega_a_eff[j] - e.omega_c_eff)).abs() < 1e-12);
                let want = 0.13 - e.xi * (p.omega_rabi.powi(2) - (p.beta_total() * p.g_cavity).powi(2)) / p.delta_raman;
                assert!((e.delta_eff[j] - want).abs() < 1e-12);
            }
            assert!((e.mu - (e.stark_cavity + nu) / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn no_drive_limit() {
        let mut p = ModelParams::table1();
        p.omega_rabi = 0.0;
        let e = reduce(&p).unwrap();
        assert!(e.alpha_eff.iter().all(|a| a.norm() == 0.0));
        let (gs, _) = decay_rates(&p).unwrap();
        let want = e.xi * p.g_cavity.powi(2) * table1::GAMMA_S / p.delta_raman.powi(2);
        assert!((gs[0] - want).abs() < 1e-15);
        let chans = build_jump_channels(&p).unwrap();
        let cs1 = chans[0].op.matrix();
        assert!((cs1[(R4_ION1, R4_PHOTON)] - ONE).norm() < 1e-15);
        assert_eq!(cs1[(R4_ION1, R4_ION1)], ZERO);
    }

    #[test]
    fn decay_rates_without_cavity_coupling() {
        let p = ModelParams::table1().with_beta(vec![ZERO, ZERO]);
        let (gs, _) = decay_rates(&p).unwrap();
        let xi = xi_factor(p.delta_raman, p.gamma_s, p.gamma_d);
        assert!((gs[0] - xi * 81.0 * 22.3 / 400.0).abs() < 1e-12);
    }

    #[test]
    fn decay_vs_coupling_values() {
        let mut p = ModelParams::table1();
        p.omega_rabi = p.g_cavity;
        let base = p.gamma_s / p.delta_raman;
        assert!((decay_vs_coupling(&p, 1).unwrap() - 2.0 * base).abs() < 1e-12);
        p.omega_rabi = p.g_cavity / 2.0;
        assert!((decay_vs_coupling(&p, 1).unwrap() - 2.5 * base).abs() < 1e-12);
        let p0 = ModelParams::table1().with_beta(vec![ZERO, ONE]);
        assert!(matches!(decay_vs_coupling(&p0, 1), Err(Error::ZeroDenominator(_))));
        assert!(decay_vs_coupling(&p0, 3).is_err());
    }

    #[test]
    fn channels_are_normalized_rank_one() {
        let p = ModelParams::table1().with_beta(vec![c(0.3, 0.4), c(-0.9, 0.1)]);
        let chans = build_jump_channels(&p).unwrap();
        assert_eq!(chans.len(), 5);
        let (gs, gd) = decay_rates(&p).unwrap();
        for ch in &chans {
            assert!((operator_norm(ch.op.matrix()) - 1.0).abs() < 1e-12);
            match ch.label {
                ChannelLabel::EmissionS(j) => assert!((ch.rate - gs[j - 1]).abs() < 1e-15),
                ChannelLabel::EmissionD(j) => assert!((ch.rate - gd[j - 1]).abs() < 1e-15),
                ChannelLabel::Cavity => assert_eq!(ch.rate, p.kappa),
            }
            if ch.label != ChannelLabel::Cavity {
                let m = ch.op.matrix();
                // Laser coefficient real positive.
                let col = ion_index(match ch.label {
                    ChannelLabel::EmissionS(j) | ChannelLabel::EmissionD(j) => j - 1,
                    _ => unreachable!(),
                });
                let row = (0..4).find(|&r| m[(r, col)].norm() > 0.0).unwrap();
                assert!(m[(row, col)].im.abs() < 1e-15 && m[(row, col)].re > 0.0);
                let sv = m.clone().singular_values();
                assert_eq!(sv.iter().filter(|s| **s > 1e-12).count(), 1);
            }
        }
    }

    #[test]
    fn jumps_map_phi_to_targets() {
        let p = ModelParams::table1().with_r1(0.55).unwrap();
        let chans = build_jump_channels(&p).unwrap();
        let (cl, cc) = phi_bra(&p, 0);
        let mut phi = crate::linalg::CVector::zeros(4);
        phi[R4_ION1] = cl.conj();
        phi[R4_PHOTON] = cc.conj();
        let s = chans[0].op.matrix() * &phi;
        assert!((s[R4_ION1].norm() - 1.0).abs() < 1e-12);
        let d = chans[2].op.matrix() * &phi;
        assert!((d[R4_GROUND].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_hamiltonian_subradiant_eigenvalue() {
        let p = ModelParams::table1().with_detuning_ratio(10.0).with_r1(0.3).unwrap().with_delta_laser(0.2);
        for nu in [0.0, -0.4] {
            let e = reduce_in_frame(&p, nu).unwrap();
            let h = build_effective_hamiltonian(&p, Frame::Rotated { nu }).unwrap();
            assert!(h.is_constant());
            let h = h.at(0.0);
            let d = e.dicke().unwrap();
            let sub = crate::analytic::AmplitudePair::subradiant(d.r);
            let mut v = crate::linalg::CVector::zeros(4);
            v[R4_ION1] = sub.c10;
            v[R4_ION2] = sub.c01;
            let want = &v * c(e.omega_c_eff / 2.0 + e.omega_a_eff[0], 0.0);
            assert!((&h * &v - want).norm() < 1e-10);
            let hd = crate::analytic::dicke_hamiltonian(e.omega_c_eff, e.omega_a_eff[0], [e.alpha_eff[0], e.alpha_eff[1]]);
            assert!(max_abs_diff(&h, &hd) < 1e-12);
        }
    }

    #[test]
    fn resonance_condition() {
        let p = ModelParams::table1().with_detuning_ratio(10.0);
        let p = p.clone().with_delta_laser(resonant_delta_laser(&p));
        let e = reduce(&p).unwrap();
        assert!(e.delta_eff[0].abs() < 1e-12);
    }

    #[test]
    fn mc_hamiltonian_properties() {
        let mut p = ModelParams::table1().with_r1(0.55).unwrap();
        let h = build_mc_hamiltonian(&p).unwrap();
        let anti = (h.matrix() - h.matrix().adjoint()) * c(0.0, -0.5);
        let ev = anti.symmetric_eigenvalues();
        assert!(ev.iter().all(|&x| x <= 1e-14));

        p.gamma_s = 0.0;
        p.gamma_d = 0.0;
        p.kappa = 0.0;
        let h = build_mc_hamiltonian(&p).unwrap();
        assert!(h.is_hermitian(1e-14));
        let h0 = build_effective_hamiltonian(&p, Frame::default()).unwrap().at(0.0);
        assert!(max_abs_diff(h.matrix(), &h0) < 1e-15);
    }

    #[test]
    fn full_model_is_consistent() {
        let p = ModelParams::table1().with_r1(0.46).unwrap();
        let sys = full_lambda_system(&p, 2).unwrap();
        assert_eq!(sys.dim(), 27);
        assert_eq!(sys.channels().len(), 5);
        let sp = HilbertSpace::full_lambda(2).unwrap();
        let sd0 = sp.index_of(&crate::space::BasisState::new(Level::S, Level::D, 0)).unwrap();
        assert_eq!(sys.invariant_support(&[sd0]).len(), 6);
    }
}
