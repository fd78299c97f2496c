//! Coherent packets in a constant uniform magnetic field along +x³.
//!
//! The packet starts centered at the origin with transverse momentum along
//! +x¹. It is expanded in Landau states `(n, ℓ)`, and the energy eigenvalue
//! `E² = 1 + k₃² + Λ(2n + 1 − ℓ + |ℓ|)` depends only on the level
//! `N = n + (|ℓ| − ℓ)/2`. Every observable is a sum over levels of an
//! occupation (or pair) weight times a Gaussian average over `k₃`.
//!
//! The occupations are built from normalized Laguerre amplitudes in the
//! variables `s = (Λ − λ⊥²)/(Λ + λ⊥²)` and `c = 2Λp₁²/(Λ + λ⊥²)²`. Both stay
//! finite when `λ⊥² = Λ`, so matched widths need no special case.

mod field;
mod observables;
mod series;

use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalHelix, HelixDerived};
use crate::error::{Error, Result};

pub use field::{kg_field, kg_field_batch, FieldEvaluator, FieldSeriesReport};
pub use observables::{
    conserved_expectations, free_limit_check, momentum_expectations, nonrel_expectations,
    gyration_center, parallel_motion, transverse_position, x3_uncertainty, ConservedExpectations,
    FreeLimit,
    LandauSeries, MomentumExpectations, NonrelExpectations, ParallelMotion, PositionVariant,
};
pub use series::{landau_distribution, LandauDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticCoherentState {
    /// Field strength Λ.
    #[serde(rename = "Lambda")]
    pub lambda_field: f64,
    pub lambda_perp: f64,
    pub lambda3: f64,
    pub p1_mean: f64,
    pub p3_mean: f64,
}

impl MagneticCoherentState {
    pub fn new(
        lambda_field: f64,
        lambda_perp: f64,
        lambda3: f64,
        p1_mean: f64,
        p3_mean: f64,
    ) -> Result<Self> {
        for (name, v) in [
            ("Lambda", lambda_field),
            ("lambda_perp", lambda_perp),
            ("lambda3", lambda3),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(p1_mean >= 0.0) || !p1_mean.is_finite() || !p3_mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite p1_mean >= 0 and finite p3_mean, got {p1_mean}, {p3_mean}"
            )));
        }
        Ok(Self {
            lambda_field,
            lambda_perp,
            lambda3,
            p1_mean,
            p3_mean,
        })
    }

    /// Splits a total mean momentum `Π` into `p₁ = Π cos θ`, `p₃ = Π sin θ`.
    pub fn with_total_momentum(
        lambda_field: f64,
        lambda_perp: f64,
        lambda3: f64,
        total: f64,
        p1_fraction: f64,
    ) -> Result<Self> {
        let p1 = total * p1_fraction;
        let p3 = total * (1.0 - p1_fraction * p1_fraction).max(0.0).sqrt();
        Self::new(lambda_field, lambda_perp, lambda3, p1, p3)
    }

    pub fn helix(&self) -> ClassicalHelix {
        ClassicalHelix {
            lambda_field: self.lambda_field,
            p_perp: self.p1_mean,
            p3: self.p3_mean,
        }
    }

    pub fn helix_derived(&self) -> HelixDerived {
        crate::classical::helix_derived(&self.helix()).expect("validated state")
    }

    /// Classical energy `√(1 + p₁² + p₃²)`.
    pub fn classical_energy(&self) -> f64 {
        self.helix().energy()
    }

    /// Classical radius `p₁/Λ`.
    pub fn classical_radius(&self) -> f64 {
        self.p1_mean / self.lambda_field
    }

    /// Classical precession period `2πγ/Λ`.
    pub fn classical_period(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.classical_energy() / self.lambda_field
    }

    /// Classical parallel velocity `p₃/γ`.
    pub fn classical_parallel_velocity(&self) -> f64 {
        self.p3_mean / self.classical_energy()
    }

    /// True when `|λ⊥² − Λ| < 1e-12 Λ`.
    pub fn is_matched_width(&self) -> bool {
        (self.lambda_perp * self.lambda_perp - self.lambda_field).abs() < 1e-12 * self.lambda_field
    }
}

/// Constants of the Landau series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesConstants {
    pub s: f64,
    /// `u = 2Λp₁²/(Λ² − λ⊥⁴)`; infinite at matched width when `p₁ ≠ 0`.
    pub u: f64,
    /// `s·u = 2Λp₁²/(Λ + λ⊥²)²`, always finite.
    pub su: f64,
    pub f_amp: f64,
    pub e_amp: f64,
    /// `ln(4λ⊥²Λ/(Λ+λ⊥²)²) − 2p₁²/(Λ+λ⊥²)`: log of the occupation prefactor.
    pub ln_pref: f64,
    pub matched_width: bool,
}

pub fn series_constants(st: &MagneticCoherentState) -> SeriesConstants {
    let lam = st.lambda_field;
    let l2 = st.lambda_perp * st.lambda_perp;
    let sum = lam + l2;
    let p1 = st.p1_mean;
    let matched = st.is_matched_width();
    let s = if matched { 0.0 } else { (lam - l2) / sum };
    let su = 2.0 * lam * p1 * p1 / (sum * sum);
    let u = if p1 == 0.0 {
        0.0
    } else if matched {
        f64::INFINITY
    } else {
        2.0 * lam * p1 * p1 / ((lam - l2) * sum)
    };
    let gauss = (-2.0 * p1 * p1 / sum).exp();
    let root = (2.0 / std::f64::consts::PI).sqrt() / st.lambda3;
    SeriesConstants {
        s,
        u,
        su,
        f_amp: root * 8.0 * l2 * lam * p1 / sum.powi(3) * gauss,
        e_amp: root * 4.0 * l2 * lam / (sum * sum) * gauss,
        ln_pref: (4.0 * l2 * lam / (sum * sum)).ln() - 2.0 * p1 * p1 / sum,
        matched_width: matched,
    }
}

/// Truncation controls for the Landau double series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SeriesSpec {
    pub n_max: usize,
    pub ell_max: usize,
    pub tail_tol: f64,
    pub consecutive_below: usize,
}

impl Default for SeriesSpec {
    fn default() -> Self {
        Self {
            n_max: 2_000_000,
            ell_max: 200_000,
            tail_tol: 1e-12,
            consecutive_below: 3,
        }
    }
}

impl SeriesSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_max == 0 || self.ell_max == 0 || self.consecutive_below == 0 {
            return Err(Error::InvalidParameter(
                "series caps and consecutive_below must be positive".into(),
            ));
        }
        if !(self.tail_tol > 0.0) || self.tail_tol >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "tail_tol must lie in (0, 1), got {}",
                self.tail_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LandauMode {
    pub n: u64,
    pub ell: i64,
    pub k3: f64,
}

impl LandauMode {
    /// `2n + 1 − ℓ + |ℓ|`.
    pub fn multiplier(&self) -> f64 {
        (2 * self.n + 1) as f64 + (self.ell.abs() - self.ell) as f64
    }

    /// Level `N` with multiplier `2N + 1`.
    pub fn level(&self) -> u64 {
        self.n + ((self.ell.abs() - self.ell) / 2) as u64
    }
}

/// Squared energy eigenvalue `1 + k₃² + Λ(2n + 1 − ℓ + |ℓ|)`.
pub fn landau_energy(m: &LandauMode, lambda_field: f64) -> f64 {
    1.0 + m.k3 * m.k3 + lambda_field * m.multiplier()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_at_matched_width() {
        let st = MagneticCoherentState::new(0.01, 0.1, 1e-3, 1.2, 1.6).unwrap();
        let c = series_constants(&st);
        assert!(c.matched_width);
        assert_eq!(c.s, 0.0);
        assert!((c.su - 1.44 / 0.02).abs() < 1e-12);
        assert!(c.u.is_infinite());
    }

    #[test]
    fn constants_off_matched_width() {
        let st = MagneticCoherentState::new(0.01, 0.5, 1e-3, 1.2, 1.6).unwrap();
        let c = series_constants(&st);
        assert!((c.s - (0.01 - 0.25) / 0.26).abs() < 1e-15);
        assert!((c.s + 0.923077).abs() < 1e-6);
        assert!((c.s * c.u - c.su).abs() < 1e-12 * c.su);
        let rest = MagneticCoherentState::new(0.01, 0.5, 1e-3, 0.0, 1.6).unwrap();
        let c = series_constants(&rest);
        assert_eq!((c.u, c.su, c.f_amp), (0.0, 0.0, 0.0));
    }

    #[test]
    fn landau_energies() {
        let lam = 0.3;
        let e = |n, ell| landau_energy(&LandauMode { n, ell, k3: 0.0 }, lam);
        assert!((e(0, 0) - 1.3).abs() < 1e-15);
        assert!((e(0, 5) - 1.3).abs() < 1e-15);
        assert!((e(0, -1) - 1.9).abs() < 1e-15);
        assert!((landau_energy(&LandauMode { n: 3, ell: -2, k3: 0.4 }, 0.0) - 1.16).abs() < 1e-15);
        assert_eq!(LandauMode { n: 3, ell: -2, k3: 0.0 }.level(), 5);
        assert_eq!(LandauMode { n: 3, ell: 2, k3: 0.0 }.level(), 3);
    }

    #[test]
    fn state_validation() {
        assert!(MagneticCoherentState::new(0.0, 0.5, 0.5, 1.0, 1.0).is_err());
        assert!(MagneticCoherentState::new(0.1, 0.5, 0.5, -1.0, 1.0).is_err());
        let st = MagneticCoherentState::with_total_momentum(0.1, 0.25, 0.25, 2.0, 0.6).unwrap();
        assert!((st.p1_mean - 1.2).abs() < 1e-15 && (st.p3_mean - 1.6).abs() < 1e-15);
        assert!(SeriesSpec::default().validate().is_ok());
    }
}
