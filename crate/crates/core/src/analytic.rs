//! Closed-form single-excitation dynamics of two qubits in a single, possibly
//! lossy, cavity mode.
//!
//! Frequencies are in the stored "2π MHz" units and `t` is in μs; every
//! phase below is `2π·ν·t`. The detuning is `δ = ω_A − ω_C`.

use num_complex::Complex64;

use crate::dynamics::lindblad::{Channel, LindbladSystem};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, ONE, TWO_PI, ZERO};
use crate::space::{SpaceKind, R4_GROUND, R4_ION1, R4_ION2, R4_PHOTON};

const SERIES_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeParams {
    /// |α_T|, the collective coupling.
    pub alpha_total: f64,
    /// Relative couplings r⁽ʲ⁾ = α⁽ʲ⁾/|α_T|.
    pub r: [Complex64; 2],
    pub delta: f64,
    pub kappa: f64,
}

impl DickeParams {
    /// Real relative couplings with r⁽²⁾ = sqrt(1 − r⁽¹⁾²).
    pub fn new(alpha_total: f64, r1: f64, delta: f64, kappa: f64) -> Result<Self> {
        DickeParams::with_complex_r(alpha_total, relative_pair(r1)?, delta, kappa)
    }

    pub fn with_complex_r(alpha_total: f64, r: [Complex64; 2], delta: f64, kappa: f64) -> Result<Self> {
        let p = DickeParams { alpha_total, r, delta, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_total >= 0.0 && self.alpha_total.is_finite()) {
            return Err(Error::param("alpha_total", format!("{} must be finite and nonnegative", self.alpha_total)));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::param("kappa", format!("{} must be finite and nonnegative", self.kappa)));
        }
        if !self.delta.is_finite() {
            return Err(Error::param("delta", "not finite"));
        }
        let n = self.r[0].norm_sqr() + self.r[1].norm_sqr();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::param("r", format!("|r1|^2 + |r2|^2 = {n}, expected 1")));
        }
        Ok(())
    }

    /// Per-ion couplings α⁽ʲ⁾ = |α_T| r⁽ʲ⁾.
    pub fn couplings(&self) -> [Complex64; 2] {
        [self.r[0] * self.alpha_total, self.r[1] * self.alpha_total]
    }
}

pub fn relative_pair(r1: f64) -> Result<[Complex64; 2]> {
    if !(0.0..=1.0).contains(&r1) {
        return Err(Error::param("r1", format!("{r1} outside [0, 1]")));
    }
    Ok([c(r1, 0.0), c((1.0 - r1 * r1).max(0.0).sqrt(), 0.0)])
}

/// Amplitudes on |1⁽¹⁾0⁽²⁾⟩ and |0⁽¹⁾1⁽²⁾⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub c10: Complex64,
    pub c01: Complex64,
}

impl AmplitudePair {
    pub const fn new(c10: Complex64, c01: Complex64) -> Self {
        AmplitudePair { c10, c01 }
    }

    pub fn ion1() -> Self {
        AmplitudePair::new(ONE, ZERO)
    }

    pub fn ion2() -> Self {
        AmplitudePair::new(ZERO, ONE)
    }

    /// ψ₋ = r⁽²⁾|10⟩ − r⁽¹⁾|01⟩, decoupled from the cavity.
    pub fn subradiant(r: [Complex64; 2]) -> Self {
        AmplitudePair::new(r[1], -r[0])
    }

    /// ψ₊ = r⁽¹⁾*|10⟩ + r⁽²⁾*|01⟩.
    pub fn superradiant(r: [Complex64; 2]) -> Self {
        AmplitudePair::new(r[0].conj(), r[1].conj())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c10.norm_sqr() + self.c01.norm_sqr()
    }

    /// `2|c10 c01*|`.
    pub fn concurrence(&self) -> f64 {
        2.0 * (self.c10 * self.c01.conj()).norm()
    }

    /// ρ_{01,10} = c01 c10*.
    pub fn coherence(&self) -> Complex64 {
        self.c01 * self.c10.conj()
    }

    pub fn scale(&self, z: Complex64) -> Self {
        AmplitudePair::new(self.c10 * z, self.c01 * z)
    }
}

/// Ω_v = sqrt(4|α_T|² + δ²).
pub fn vacuum_rabi(alpha_total: f64, delta: f64) -> f64 {
    (4.0 * alpha_total * alpha_total + delta * delta).sqrt()
}

/// Ω_g = sqrt(4|α_T|² + δ² + iδκ − κ²/4), principal branch.
pub fn generalized_rabi(alpha_total: f64, delta: f64, kappa: f64) -> Complex64 {
    c(4.0 * alpha_total * alpha_total + delta * delta - kappa * kappa / 4.0, delta * kappa).sqrt()
}

/// Oscillation period 2π/|Ω_g| in μs; infinite at the critical point.
pub fn rabi_period(omega_g: Complex64) -> f64 {
    1.0 / omega_g.norm()
}

/// `cos(Ωτ/2)` and `sin(Ωτ/2)/Ω`, the latter by series near Ω = 0 so the
/// critically damped point is regular.
fn cos_sinc(omega: Complex64, tau: f64) -> (Complex64, Complex64) {
    let x = omega * (tau / 2.0);
    let cosine = x.cos();
    let sinc = if (omega * tau).norm() < SERIES_THRESHOLD {
        let h = tau / 2.0;
        c(h, 0.0) - omega * omega * (h * h * h / 6.0)
    } else {
        x.sin() / omega
    };
    (cosine, sinc)
}

/// Envelope of the superradiant amplitude, E(0) = 1.
pub fn envelope(t: f64, p: &DickeParams) -> Complex64 {
    envelope_with_branch(t, p, generalized_rabi(p.alpha_total, p.delta, p.kappa))
}

fn envelope_with_branch(t: f64, p: &DickeParams, omega_g: Complex64) -> Complex64 {
    let tau = TWO_PI * t;
    let k = c(p.kappa, -2.0 * p.delta);
    let (cosine, sinc) = cos_sinc(omega_g, tau);
    (-k * (tau / 4.0)).exp() * (cosine + k / 2.0 * sinc)
}

pub fn evolve_amplitudes(t: f64, c0: AmplitudePair, p: &DickeParams) -> AmplitudePair {
    evolve_with_envelope(envelope(t, p), c0, p.r)
}

fn evolve_with_envelope(e: Complex64, c0: AmplitudePair, r: [Complex64; 2]) -> AmplitudePair {
    let [r1, r2] = r;
    let c10 = (r2.norm_sqr() + r1.norm_sqr() * e) * c0.c10 - r1.conj() * r2 * (ONE - e) * c0.c01;
    let c01 = -r1 * r2.conj() * (ONE - e) * c0.c10 + (r1.norm_sqr() + r2.norm_sqr() * e) * c0.c01;
    AmplitudePair::new(c10, c01)
}

/// Returns (β₊, β₋) with c0 = β₊ψ₊ + β₋ψ₋.
pub fn sub_super_decompose(c0: AmplitudePair, r: [Complex64; 2]) -> (Complex64, Complex64) {
    let [r1, r2] = r;
    (r1 * c0.c10 + r2 * c0.c01, r2.conj() * c0.c10 - r1.conj() * c0.c01)
}

pub fn sub_super_reconstruct(beta_plus: Complex64, beta_minus: Complex64, r: [Complex64; 2]) -> AmplitudePair {
    let plus = AmplitudePair::superradiant(r);
    let minus = AmplitudePair::subradiant(r);
    AmplitudePair::new(
        beta_plus * plus.c10 + beta_minus * minus.c10,
        beta_plus * plus.c01 + beta_minus * minus.c01,
    )
}

/// Long-time concurrence 2|r⁽¹⁾r⁽²⁾||β₋|² (any κ > 0).
pub fn stationary_concurrence(c0: AmplitudePair, r: [Complex64; 2]) -> f64 {
    let (_, bm) = sub_super_decompose(c0, r);
    2.0 * (r[0] * r[1]).norm() * bm.norm_sqr()
}

/// Tavis-Cummings Hamiltonian on the one-excitation sector:
/// `ω_C(a†a + ½) + ω_A Σσ₊σ₋ + Σ(α⁽ʲ⁾ a†σ₋⁽ʲ⁾ + h.c.)`.
pub fn dicke_hamiltonian(omega_c: f64, omega_a: f64, alpha: [Complex64; 2]) -> CMatrix {
    let mut h = CMatrix::zeros(4, 4);
    h[(R4_GROUND, R4_GROUND)] = c(omega_c / 2.0, 0.0);
    h[(R4_PHOTON, R4_PHOTON)] = c(1.5 * omega_c, 0.0);
    for (idx, a) in [(R4_ION1, alpha[0]), (R4_ION2, alpha[1])] {
        h[(idx, idx)] = c(omega_c / 2.0 + omega_a, 0.0);
        h[(R4_PHOTON, idx)] = a;
        h[(idx, R4_PHOTON)] = a.conj();
    }
    h
}

/// Master equation with cavity loss only, in the frame ω_C = 0, ω_A = δ.
pub fn dicke_system(p: &DickeParams) -> LindbladSystem {
    let h = dicke_hamiltonian(0.0, p.delta, p.couplings());
    let mut a = CMatrix::zeros(4, 4);
    a[(R4_GROUND, R4_PHOTON)] = ONE;
    LindbladSystem::new(SpaceKind::Restricted4, h.into(), vec![Channel::constant("a", p.kappa, a)])
        .expect("dicke system is well formed")
}
