//! Charged coherent Klein-Gordon packets in 1+1 dimensions.
//!
//! A state is fixed by the inverse width `λ`, the initial mean position
//! `α`, the mean momentum `p_mean` and the charge parity `ε = ±1`.
//! Expectation values use the momentum weight `exp(−2(p − p_mean)²/λ²)`;
//! amplitudes use `exp(−(p − p_mean)²/λ²)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gaussian_average, integrate_gaussian, GaussianWeight, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeCoherentState {
    pub lambda: f64,
    pub alpha: f64,
    pub p_mean: f64,
    pub epsilon: i8,
}

impl FreeCoherentState {
    pub fn new(lambda: f64, alpha: f64, p_mean: f64, epsilon: i8) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::InvalidParameter(format!(
                "charge parity must be +1 or -1, got {epsilon}"
            )));
        }
        if !alpha.is_finite() || !p_mean.is_finite() {
            return Err(Error::InvalidParameter("alpha and p_mean must be finite".into()));
        }
        Ok(Self {
            lambda,
            alpha,
            p_mean,
            epsilon,
        })
    }

    /// Particle (ε = +1) packet.
    pub fn particle(lambda: f64, alpha: f64, p_mean: f64) -> Result<Self> {
        Self::new(lambda, alpha, p_mean, 1)
    }

    /// λ > 1 localizes the packet below a Compton wavelength.
    pub fn is_sub_compton(&self) -> bool {
        self.lambda > 1.0
    }

    pub fn eps(&self) -> f64 {
        f64::from(self.epsilon)
    }

    fn expectation_weight(&self) -> GaussianWeight {
        GaussianWeight::expectation(self.p_mean, self.lambda).expect("validated state")
    }

    fn amplitude_weight(&self) -> GaussianWeight {
        GaussianWeight::amplitude(self.p_mean, self.lambda).expect("validated state")
    }
}

/// The product `κ(1 + εa)` that divides `|ψ|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationConvention {
    pub kappa_times_one_plus_eps_a: f64,
}

impl Default for NormalizationConvention {
    fn default() -> Self {
        Self {
            kappa_times_one_plus_eps_a: 1.0,
        }
    }
}

impl NormalizationConvention {
    pub fn new(value: f64) -> Result<Self> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "normalization product must be positive, got {value}"
            )));
        }
        Ok(Self {
            kappa_times_one_plus_eps_a: value,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.kappa_times_one_plus_eps_a == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Moment {
    XMean,
    XVar,
    PMean,
    PVar,
    VMean,
    VVar,
    EMean,
    EVar,
    UncertaintyProduct,
}

impl Moment {
    pub const ALL: [Moment; 9] = [
        Moment::XMean,
        Moment::XVar,
        Moment::PMean,
        Moment::PVar,
        Moment::VMean,
        Moment::VVar,
        Moment::EMean,
        Moment::EVar,
        Moment::UncertaintyProduct,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Moment::XMean => "x_mean",
            Moment::XVar => "x_var",
            Moment::PMean => "p_mean",
            Moment::PVar => "p_var",
            Moment::VMean => "v_mean",
            Moment::VVar => "v_var",
            Moment::EMean => "E_mean",
            Moment::EVar => "E_var",
            Moment::UncertaintyProduct => "uncertainty_product",
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Expectation values and dispersions at one time `τ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentSet {
    pub tau: f64,
    pub values: BTreeMap<Moment, f64>,
}

impl MomentSet {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            values: BTreeMap::new(),
        }
    }

    pub fn with(mut self, m: Moment, v: f64) -> Self {
        self.values.insert(m, v);
        self
    }

    pub fn get(&self, m: Moment) -> Option<f64> {
        self.values.get(&m).copied()
    }

    /// Like [`get`](Self::get) but panics on a missing entry.
    pub fn value(&self, m: Moment) -> f64 {
        self.get(m)
            .unwrap_or_else(|| panic!("moment {m} not present in this set"))
    }

    /// Checks that variances are non-negative and ΔxΔp ≥ 1/2.
    pub fn is_physical(&self) -> bool {
        let var_ok = [Moment::XVar, Moment::PVar, Moment::VVar, Moment::EVar]
            .iter()
            .all(|m| self.get(*m).map_or(true, |v| v >= -1e-12));
        let unc_ok = self
            .get(Moment::UncertaintyProduct)
            .map_or(true, |u| u >= 0.5 - 1e-12);
        var_ok && unc_ok
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityMoments {
    pub mean: f64,
    pub sq_mean: f64,
    pub var: f64,
}

/// Position-space wavefunction at `τ = 0`.
pub fn wavefn_x(s: &FreeCoherentState, x: f64) -> Complex64 {
    let l2 = s.lambda * s.lambda;
    let amp = (l2 / (2.0 * PI)).powf(0.25) * (-l2 * (x - s.alpha).powi(2) / 4.0).exp();
    let phase = s.p_mean * x - 0.5 * s.p_mean * s.alpha;
    Complex64::from_polar(amp, phase)
}

/// Momentum-space wavefunction.
pub fn wavefn_p(s: &FreeCoherentState, p: f64) -> Complex64 {
    let l2 = s.lambda * s.lambda;
    let amp = (2.0 / (PI * l2)).powf(0.25) * (-(p - s.p_mean).powi(2) / l2).exp();
    let phase = 0.5 * s.p_mean * s.alpha - s.alpha * p;
    Complex64::from_polar(amp, phase)
}

/// Moments at `τ = 0`: the packet saturates ΔxΔp = 1/2.
pub fn static_moments(s: &FreeCoherentState) -> MomentSet {
    let l2 = s.lambda * s.lambda;
    MomentSet::new(0.0)
        .with(Moment::XMean, s.alpha)
        .with(Moment::PMean, s.p_mean)
        .with(Moment::XVar, 1.0 / l2)
        .with(Moment::PVar, l2 / 4.0)
        .with(Moment::UncertaintyProduct, 0.5)
}

/// `⟨ẋ⟩ = ε⟨p/√(1+p²)⟩`, `⟨ẋ²⟩ = ⟨p²/(1+p²)⟩`.
pub fn velocity_moments(s: &FreeCoherentState, spec: &QuadratureSpec) -> Result<VelocityMoments> {
    let [v, v2] = gaussian_average(
        s.expectation_weight(),
        |p| {
            let e2 = 1.0 + p * p;
            [p / e2.sqrt(), p * p / e2]
        },
        spec,
    )?;
    let mean = s.eps() * v;
    Ok(VelocityMoments {
        mean,
        sq_mean: v2,
        var: (v2 - mean * mean).max(0.0),
    })
}

/// `⟨E⟩ = ⟨√(1+p²)⟩`; the variance uses the exact `⟨E²⟩ = 1 + p_mean² + λ²/4`.
pub fn energy_moments(s: &FreeCoherentState, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let mean = gaussian_average(s.expectation_weight(), |p| (1.0 + p * p).sqrt(), spec)?;
    let sq = 1.0 + s.p_mean * s.p_mean + s.lambda * s.lambda / 4.0;
    Ok((mean, (sq - mean * mean).max(0.0)))
}

/// Full moment set at time `τ`.
pub fn evolved_moments(
    s: &FreeCoherentState,
    tau: f64,
    spec: &QuadratureSpec,
) -> Result<MomentSet> {
    let v = velocity_moments(s, spec)?;
    let (e_mean, e_var) = energy_moments(s, spec)?;
    let l2 = s.lambda * s.lambda;
    let growth = 1.0 + l2 * v.var * tau * tau;
    Ok(MomentSet::new(tau)
        .with(Moment::XMean, s.alpha + v.mean * tau)
        .with(Moment::XVar, growth / l2)
        .with(Moment::PMean, s.p_mean)
        .with(Moment::PVar, l2 / 4.0)
        .with(Moment::VMean, v.mean)
        .with(Moment::VVar, v.var)
        .with(Moment::EMean, e_mean)
        .with(Moment::EVar, e_var)
        .with(Moment::UncertaintyProduct, 0.5 * growth.sqrt()))
}

/// Nonrelativistic counterparts of [`evolved_moments`].
pub fn nonrel_moments(s: &FreeCoherentState, tau: f64) -> MomentSet {
    let l2 = s.lambda * s.lambda;
    let growth = 1.0 + l2 * l2 * tau * tau / 4.0;
    MomentSet::new(tau)
        .with(Moment::XMean, s.alpha + s.eps() * s.p_mean * tau)
        .with(Moment::XVar, growth / l2)
        .with(Moment::PMean, s.p_mean)
        .with(Moment::PVar, l2 / 4.0)
        .with(Moment::VMean, s.eps() * s.p_mean)
        .with(Moment::VVar, l2 / 4.0)
        .with(Moment::EMean, 1.0 + l2 / 8.0 + s.p_mean * s.p_mean / 2.0)
        .with(Moment::UncertaintyProduct, 0.5 * growth.sqrt())
}

/// `∫ e^{i(p(x−α) − ετ√(1+p²))} g(p) e^{−(p−p_mean)²/λ²} dp`.
fn phase_integral(
    s: &FreeCoherentState,
    tau: f64,
    x: f64,
    with_root: bool,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let shift = x - s.alpha;
    let et = s.eps() * tau;
    integrate_gaussian(
        s.amplitude_weight(),
        |p| {
            let e2 = 1.0 + p * p;
            let z = Complex64::from_polar(1.0, p * shift - et * e2.sqrt());
            if with_root {
                z / e2.sqrt().sqrt()
            } else {
                z
            }
        },
        spec,
    )
    .into_result()
}

/// Probability density ρ(τ, x) = (S² + T²)/(λπ√(2π)).
pub fn probability_density(
    s: &FreeCoherentState,
    tau: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let z = phase_integral(s, tau, x, false, spec)?;
    Ok(z.norm_sqr() / (s.lambda * PI * (2.0 * PI).sqrt()))
}

/// Coherent KG field value ψ(τ, x).
pub fn kg_field(
    s: &FreeCoherentState,
    tau: f64,
    x: f64,
    norm: &NormalizationConvention,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let z = phase_integral(s, tau, x, true, spec)?;
    let amp = (2.0 / (PI * s.lambda * s.lambda)).powf(0.25)
        / (2.0 * PI * norm.kappa_times_one_plus_eps_a).sqrt();
    Ok(z * Complex64::from_polar(amp, 0.5 * s.p_mean * s.alpha))
}

/// `|ψ(τ, x)|² = (U² + V²)/(λπκ(1+εa)√(2π))`.
pub fn kg_density(
    s: &FreeCoherentState,
    tau: f64,
    x: f64,
    norm: &NormalizationConvention,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let z = phase_integral(s, tau, x, true, spec)?;
    Ok(z.norm_sqr() / (s.lambda * PI * norm.kappa_times_one_plus_eps_a * (2.0 * PI).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn state_validation() {
        assert!(FreeCoherentState::new(0.0, 0.0, 0.0, 1).is_err());
        assert!(FreeCoherentState::new(1.0, 0.0, 0.0, 0).is_err());
        assert!(FreeCoherentState::particle(2.0, 0.0, 0.0).unwrap().is_sub_compton());
        assert!(NormalizationConvention::new(-1.0).is_err());
    }

    #[test]
    fn wavefunction_peak_and_phase() {
        let s = FreeCoherentState::particle(0.8, 1.5, 0.7).unwrap();
        let psi = wavefn_x(&s, s.alpha);
        assert!((psi.norm() - (0.64 / (2.0 * PI)).powf(0.25)).abs() < 1e-15);
        assert!((psi.arg() - 0.7 * 1.5 / 2.0).abs() < 1e-15);
        assert!((wavefn_p(&s, 0.7).norm() - (2.0 / (PI * 0.64)).powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn static_set() {
        let s = FreeCoherentState::particle(2.0, 0.0, 0.3).unwrap();
        let m = static_moments(&s);
        assert_eq!(m.value(Moment::UncertaintyProduct), 0.5);
        assert_eq!(m.value(Moment::XVar).sqrt(), 0.5);
        let s = FreeCoherentState::particle(0.25, 0.0, 0.3).unwrap();
        assert_eq!(static_moments(&s).value(Moment::PVar), 0.015625);
    }

    #[test]
    fn velocity_sign_and_symmetry() {
        let s = FreeCoherentState::particle(0.6, 0.0, 0.0).unwrap();
        assert!(velocity_moments(&s, &spec()).unwrap().mean.abs() < 1e-15);
        let p = FreeCoherentState::new(0.6, 0.0, 1.1, 1).unwrap();
        let a = FreeCoherentState::new(0.6, 0.0, 1.1, -1).unwrap();
        let vp = velocity_moments(&p, &spec()).unwrap();
        let va = velocity_moments(&a, &spec()).unwrap();
        assert_eq!(vp.mean, -va.mean);
        assert_eq!(vp.sq_mean, va.sq_mean);
    }

    #[test]
    fn evolved_reduces_to_static() {
        let s = FreeCoherentState::particle(0.5, 2.0, 1.0).unwrap();
        let m = evolved_moments(&s, 0.0, &spec()).unwrap();
        let st = static_moments(&s);
        for k in [Moment::XMean, Moment::XVar, Moment::PVar, Moment::UncertaintyProduct] {
            assert_eq!(m.value(k), st.value(k));
        }
        assert!(m.is_physical());
    }

    #[test]
    fn energy_exceeds_classical() {
        for (l, p) in [(0.25, 0.1), (1.0, 2.0), (2.0, 0.0)] {
            let s = FreeCoherentState::particle(l, 0.0, p).unwrap();
            let (e, var) = energy_moments(&s, &spec()).unwrap();
            assert!(e >= (1.0 + p * p).sqrt());
            assert!(var >= 0.0);
        }
    }

    #[test]
    fn initial_density_is_gaussian() {
        let s = FreeCoherentState::particle(0.7, 0.5, 1.3).unwrap();
        for x in [-2.0, 0.5, 1.0, 4.0] {
            let rho = probability_density(&s, 0.0, x, &spec()).unwrap();
            let expect =
                s.lambda / (2.0 * PI).sqrt() * (-s.lambda.powi(2) * (x - s.alpha).powi(2) / 2.0).exp();
            assert!((rho - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn field_modulus_matches_density() {
        let s = FreeCoherentState::particle(0.9, -0.3, 0.8).unwrap();
        let norm = NormalizationConvention::default();
        for (tau, x) in [(0.0, 0.0), (3.0, 2.0), (10.0, 5.5)] {
            let psi = kg_field(&s, tau, x, &norm, &spec()).unwrap();
            let d = kg_density(&s, tau, x, &norm, &spec()).unwrap();
            assert!((psi.norm_sqr() - d).abs() < 1e-14);
        }
    }
}
