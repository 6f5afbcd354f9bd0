//! Physical inputs of a run, in the "2π MHz" convention: a stored value ν
//! corresponds to the angular frequency 2πν rad/μs.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::c;

/// Reference values of the ion-cavity setup.
pub mod table1 {
    pub const OMEGA_RABI: f64 = 9.0;
    /// Bare cavity coupling including the 1/√3 Clebsch-Gordan factor.
    pub const G_CAVITY: f64 = 6.5 / 1.732_050_807_568_877_2;
    pub const GAMMA_S: f64 = 22.3;
    pub const GAMMA_D: f64 = 1.7;
    pub const DELTA_RAMAN: f64 = 20.0;
    pub const KAPPA: f64 = 1.2;
}

/// A laser addressing a single ion, for setups where the ions are driven
/// separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    pub omega_rabi: Complex64,
    pub delta_laser: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub omega_rabi: f64,
    pub g_cavity: f64,
    pub gamma_s: f64,
    pub gamma_d: f64,
    pub delta_raman: f64,
    pub kappa: f64,
    pub delta_laser: f64,
    /// Placement coefficients, one per ion.
    pub beta: Vec<Complex64>,
    /// Overrides `omega_rabi`/`delta_laser` per ion when set.
    pub per_ion_lasers: Option<Vec<LaserDrive>>,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::table1()
    }
}

impl ModelParams {
    /// Reference constants, both ions at antinodes, zero laser detuning.
    pub fn table1() -> Self {
        ModelParams {
            omega_rabi: table1::OMEGA_RABI,
            g_cavity: table1::G_CAVITY,
            gamma_s: table1::GAMMA_S,
            gamma_d: table1::GAMMA_D,
            delta_raman: table1::DELTA_RAMAN,
            kappa: table1::KAPPA,
            delta_laser: 0.0,
            beta: vec![c(1.0, 0.0), c(1.0, 0.0)],
            per_ion_lasers: None,
        }
    }

    pub fn n_ions(&self) -> usize {
        self.beta.len()
    }

    /// Δ = ratio · Δ₀.
    pub fn with_detuning_ratio(mut self, ratio: f64) -> Self {
        self.delta_raman = ratio * table1::DELTA_RAMAN;
        self
    }

    /// κ = ratio · κ₀.
    pub fn with_kappa_ratio(mut self, ratio: f64) -> Self {
        self.kappa = ratio * table1::KAPPA;
        self
    }

    pub fn with_delta_laser(mut self, delta_laser: f64) -> Self {
        self.delta_laser = delta_laser;
        self
    }

    pub fn with_beta(mut self, beta: Vec<Complex64>) -> Self {
        self.beta = beta;
        self
    }

    /// Places the ions so the relative coupling of ion 1 equals `r1`.
    pub fn with_r1(self, r1: f64) -> Result<Self> {
        let (b1, b2) = crate::reduce::beta_from_target_r1(r1)?;
        Ok(self.with_beta(vec![c(b1, 0.0), c(b2, 0.0)]))
    }

    /// Laser on ion `j` (0-based): Rabi coupling and detuning.
    pub fn laser(&self, j: usize) -> LaserDrive {
        match &self.per_ion_lasers {
            Some(l) => l[j],
            None => LaserDrive { omega_rabi: c(self.omega_rabi, 0.0), delta_laser: self.delta_laser },
        }
    }

    /// |β_T| = sqrt(Σ|β⁽ʲ⁾|²).
    pub fn beta_total(&self) -> f64 {
        self.beta.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Relative couplings r⁽ʲ⁾ = β⁽ʲ⁾/|β_T|.
    pub fn relative_couplings(&self) -> Result<Vec<Complex64>> {
        let bt = self.beta_total();
        if bt == 0.0 {
            return Err(Error::ZeroDenominator("|β_T| = 0: no ion couples to the cavity"));
        }
        Ok(self.beta.iter().map(|b| b / bt).collect())
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("{v} is not finite")))
            }
        };
        let nonneg = |name: &'static str, v: f64| {
            finite(name, v)?;
            if v < 0.0 {
                return Err(Error::param(name, format!("{v} is negative")));
            }
            Ok(())
        };
        nonneg("omega_rabi", self.omega_rabi)?;
        nonneg("g_cavity", self.g_cavity)?;
        nonneg("gamma_s", self.gamma_s)?;
        nonneg("gamma_d", self.gamma_d)?;
        nonneg("kappa", self.kappa)?;
        finite("delta_laser", self.delta_laser)?;
        finite("delta_raman", self.delta_raman)?;
        if self.delta_raman <= 0.0 {
            return Err(Error::param("delta_raman", format!("{} must be strictly positive", self.delta_raman)));
        }
        if self.beta.len() != 2 {
            return Err(Error::param("beta", format!("{} ions given, the models need exactly 2", self.beta.len())));
        }
        for b in &self.beta {
            if !(b.re.is_finite() && b.im.is_finite()) || b.norm() > 1.0 + 1e-12 {
                return Err(Error::param("beta", format!("|{b}| must lie in [0, 1]")));
            }
        }
        if let Some(l) = &self.per_ion_lasers {
            if l.len() != self.beta.len() {
                return Err(Error::param("per_ion_lasers", "one laser per ion required"));
            }
            for d in l {
                finite("per_ion_lasers", d.delta_laser)?;
                finite("per_ion_lasers", d.omega_rabi.norm())?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_defaults_validate() {
        let p = ModelParams::table1();
        p.validate().unwrap();
        assert!((p.g_cavity - 3.752776).abs() < 1e-6);
        assert_eq!(p.n_ions(), 2);
    }

    #[test]
    fn ratios_scale_reference_values() {
        let p = ModelParams::table1().with_detuning_ratio(10.0).with_kappa_ratio(0.1);
        assert_eq!(p.delta_raman, 200.0);
        assert!((p.kappa - 0.12).abs() < 1e-15);
    }

    #[test]
    fn validation_errors() {
        let mut p = ModelParams::table1();
        p.delta_raman = 0.0;
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { name: "delta_raman", .. })));
        let p = ModelParams::table1().with_beta(vec![c(1.2, 0.0), c(0.0, 0.0)]);
        assert!(p.validate().is_err());
        let mut p = ModelParams::table1();
        p.kappa = -1.0;
        assert!(p.validate().is_err());
        let p = ModelParams::table1().with_beta(vec![c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(p.relative_couplings().is_err());
    }
}
