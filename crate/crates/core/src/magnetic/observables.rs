//! Expectation values of a packet in a uniform field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::{landau_distribution, neumaier, LandauDistribution};
use super::{series_constants, MagneticCoherentState, SeriesConstants, SeriesSpec};
use crate::error::{Error, Result};
use crate::freefield::{Moment, MomentSet};
use crate::quadrature::{gaussian_average, integrate_gaussian, GaussianWeight, QuadratureSpec};

/// Which level the second transverse sum is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionVariant {
    /// Second sum driven by `Θ_{n0}`.
    #[default]
    Printed,
    /// Second sum driven by `Θ_{nℓ}`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedExpectations {
    pub energy: f64,
    pub l3: f64,
    pub r_mean: f64,
    pub r_sq_mean: f64,
    pub r_var: f64,
    /// `⟨R_gc²⟩` from the same series.
    pub r_gc_sq_mean: f64,
    /// Closed form of `⟨R²⟩` with `⟨p₁²⟩` read as `p1_mean²`.
    pub r_sq_closed: f64,
    /// Closed form with `⟨p₁²⟩` read as the full second moment `p1_mean² + λ⊥²/4`.
    pub r_sq_closed_second_moment: f64,
    pub total_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelMotion {
    pub x3_mean: f64,
    pub x3dot_mean: f64,
    pub x3dot_sq_mean: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentumExpectations {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub pi1: f64,
    pub pi2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonrelExpectations {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub p1: f64,
    pub p2: f64,
    pub x3dot: f64,
    pub r_sq: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreeLimit {
    /// From the Λ → 0 integrals.
    pub quoted: MomentSet,
    /// From the Landau series at the state's (small) Λ.
    pub series: MomentSet,
    pub x1_mean: f64,
    pub x2_mean: f64,
}

/// Landau series of one state with its per-level `k₃` averages.
///
/// Building it does all the series work; the observables are then cheap
/// sums over levels.
#[derive(Debug, Clone)]
pub struct LandauSeries {
    pub state: MagneticCoherentState,
    pub constants: SeriesConstants,
    pub distribution: LandauDistribution,
    quad: QuadratureSpec,
    /// `⟨√D⟩, ⟨k/√D⟩, ⟨k²/D⟩` per level, `D = Λ(2N+1) + 1 + k²`.
    level_avgs: Vec<[f64; 3]>,
}

impl LandauSeries {
    pub fn new(
        state: &MagneticCoherentState,
        series: &SeriesSpec,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        let distribution = landau_distribution(state, series)?;
        let w = GaussianWeight::expectation(state.p3_mean, state.lambda3)?;
        let lam = state.lambda_field;
        let mut level_avgs = vec![[0.0; 3]; distribution.levels()];
        for (n, p) in distribution.level_prob.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let m = lam * (2 * n + 1) as f64 + 1.0;
            level_avgs[n] = gaussian_average(
                w,
                |k| {
                    let d = m + k * k;
                    let r = d.sqrt();
                    [r, k / r, k * k / d]
                },
                quad,
            )?;
        }
        Ok(Self {
            state: *state,
            constants: series_constants(state),
            distribution,
            quad: *quad,
            level_avgs,
        })
    }

    fn level_weighted(&self, idx: usize) -> f64 {
        neumaier(
            self.distribution
                .level_prob
                .iter()
                .zip(&self.level_avgs)
                .map(|(p, a)| p * a[idx]),
        )
    }

    pub fn conserved(&self) -> ConservedExpectations {
        let st = &self.state;
        let lam = st.lambda_field;
        let d = &self.distribution;
        let energy = self.level_weighted(0);
        let r_mean = d.level_sum(|n| (((2 * n + 1) as f64) / lam).sqrt());
        let r_sq_mean = d.level_sum(|n| (2 * n + 1) as f64 / lam);
        let l2 = st.lambda_perp * st.lambda_perp;
        let spread = (lam * lam + l2 * l2) / (2.0 * lam * lam * l2);
        let p1 = st.p1_mean;
        ConservedExpectations {
            energy,
            l3: d.ell_moment,
            r_mean,
            r_sq_mean,
            r_var: (r_sq_mean - r_mean * r_mean).max(0.0),
            r_gc_sq_mean: r_sq_mean + d.gc_shift / lam,
            r_sq_closed: p1 * p1 / (lam * lam) + spread,
            r_sq_closed_second_moment: (p1 * p1 + l2 / 4.0) / (lam * lam) + spread,
            total_mass: d.total_mass,
        }
    }

    pub fn parallel(&self, tau: f64) -> ParallelMotion {
        let v = self.level_weighted(1);
        ParallelMotion {
            x3_mean: tau * v,
            x3dot_mean: v,
            x3dot_sq_mean: self.level_weighted(2),
        }
    }

    /// `½√(1 + λ₃² var(ẋ³) τ²)`.
    pub fn x3_uncertainty(&self, tau: f64) -> f64 {
        let p = self.parallel(tau);
        let var = (p.x3dot_sq_mean - p.x3dot_mean * p.x3dot_mean).max(0.0);
        let l3 = self.state.lambda3;
        0.5 * (1.0 + l3 * l3 * var * tau * tau).sqrt()
    }

    /// `(⟨x¹(τ)⟩, ⟨x²(τ)⟩)`.
    pub fn transverse(&self, tau: f64, variant: PositionVariant) -> Result<[f64; 2]> {
        let st = &self.state;
        let lam = st.lambda_field;
        if st.p1_mean == 0.0 {
            return Ok([0.0, 0.0]);
        }
        let weights = match variant {
            PositionVariant::Printed => &self.distribution.pair_weight,
            PositionVariant::Symmetric => &self.distribution.pair_weight_symmetric,
        };
        let w = GaussianWeight::expectation(st.p3_mean, st.lambda3)?;
        let mut sin_terms = Vec::with_capacity(weights.len());
        let mut cos_terms = Vec::with_capacity(weights.len());
        // neighbouring levels have nearly the same integrand, so each rule
        // search starts just below the size the previous level needed
        let mut spec = self.quad;
        for (n, wt) in weights.iter().enumerate() {
            if *wt == 0.0 {
                continue;
            }
            let lo = lam * (2 * n + 1) as f64 + 1.0;
            let hi = lo + 2.0 * lam;
            let z: Complex64 = if tau == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                let est = integrate_gaussian(
                    w,
                    |k| {
                        let k2 = k * k;
                        // difference of roots without cancellation
                        let theta = tau * 2.0 * lam / ((hi + k2).sqrt() + (lo + k2).sqrt());
                        Complex64::from_polar(1.0, theta)
                    },
                    &spec,
                );
                spec.initial_nodes = (est.nodes / 2).clamp(8, self.quad.initial_nodes);
                est.into_result()? * w.normalizer()
            };
            sin_terms.push(wt * z.im);
            cos_terms.push(wt * z.re);
        }
        let scale = (2.0 / lam).sqrt();
        let x1 = scale * neumaier(sin_terms.into_iter());
        let x2 = -st.p1_mean / lam + scale * neumaier(cos_terms.into_iter());
        Ok([x1, x2])
    }

    pub fn momenta(&self, tau: f64, variant: PositionVariant) -> Result<MomentumExpectations> {
        Ok(self.momenta_at(self.transverse(tau, variant)?))
    }

    /// Momenta from already computed transverse positions.
    pub fn momenta_at(&self, x: [f64; 2]) -> MomentumExpectations {
        momenta_from_positions(&self.state, x[0], x[1])
    }
}

fn momenta_from_positions(st: &MagneticCoherentState, x1: f64, x2: f64) -> MomentumExpectations {
    let half = 0.5 * st.lambda_field;
    let p1 = st.p1_mean + half * x2;
    let p2 = -half * x1;
    MomentumExpectations {
        p1,
        p2,
        p3: st.p3_mean,
        pi1: p1 + half * x2,
        pi2: p2 - half * x1,
    }
}

/// Gyration center `(x¹/2 + p₂/Λ, x²/2 − p₁/Λ)` of expectation values.
pub fn gyration_center(st: &MagneticCoherentState, x: [f64; 2], m: &MomentumExpectations) -> [f64; 2] {
    [
        0.5 * x[0] + m.p2 / st.lambda_field,
        0.5 * x[1] - m.p1 / st.lambda_field,
    ]
}

pub fn transverse_position(
    st: &MagneticCoherentState,
    tau: f64,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<[f64; 2]> {
    LandauSeries::new(st, series, quad)?.transverse(tau, PositionVariant::Printed)
}

pub fn parallel_motion(
    st: &MagneticCoherentState,
    tau: f64,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<ParallelMotion> {
    Ok(LandauSeries::new(st, series, quad)?.parallel(tau))
}

pub fn momentum_expectations(
    st: &MagneticCoherentState,
    tau: f64,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<MomentumExpectations> {
    LandauSeries::new(st, series, quad)?.momenta(tau, PositionVariant::Printed)
}

pub fn conserved_expectations(
    st: &MagneticCoherentState,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<ConservedExpectations> {
    Ok(LandauSeries::new(st, series, quad)?.conserved())
}

pub fn x3_uncertainty(
    st: &MagneticCoherentState,
    tau: f64,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<f64> {
    Ok(LandauSeries::new(st, series, quad)?.x3_uncertainty(tau))
}

/// Closed-form nonrelativistic expectation values.
pub fn nonrel_expectations(st: &MagneticCoherentState, tau: f64) -> NonrelExpectations {
    let lam = st.lambda_field;
    let p1 = st.p1_mean;
    let (sn, cs) = (lam * tau).sin_cos();
    let l2 = st.lambda_perp * st.lambda_perp;
    let r_sq = p1 * p1 / (lam * lam) + (lam * lam + l2 * l2) / (2.0 * lam * lam * l2);
    NonrelExpectations {
        x1: p1 / lam * sn,
        x2: p1 / lam * (cs - 1.0),
        x3: st.p3_mean * tau,
        p1: 0.5 * p1 * (cs + 1.0),
        p2: -0.5 * p1 * sn,
        x3dot: st.p3_mean,
        r_sq,
        energy: 1.0
            + st.lambda3 * st.lambda3 / 8.0
            + st.p3_mean * st.p3_mean / 2.0
            + lam * lam * r_sq / 2.0,
    }
}

/// Free motion along x³ for a packet without transverse momentum.
///
/// The series side is evaluated at the state's own Λ; choose
/// `λ⊥ = √Λ` there to keep the series to a single term.
pub fn free_limit_check(
    st: &MagneticCoherentState,
    tau: f64,
    quad: &QuadratureSpec,
    series: &SeriesSpec,
) -> Result<FreeLimit> {
    if st.p1_mean != 0.0 {
        return Err(Error::InvalidParameter(
            "the free limit needs p1_mean = 0".into(),
        ));
    }
    let w = GaussianWeight::expectation(st.p3_mean, st.lambda3)?;
    let [e, v] = gaussian_average(
        w,
        |k| {
            let r = (1.0 + k * k).sqrt();
            [r, k / r]
        },
        quad,
    )?;
    let quoted = MomentSet::new(tau)
        .with(Moment::XMean, tau * v)
        .with(Moment::VMean, v)
        .with(Moment::EMean, e);
    let ls = LandauSeries::new(st, series, quad)?;
    let par = ls.parallel(tau);
    let [x1, x2] = ls.transverse(tau, PositionVariant::Printed)?;
    let series_set = MomentSet::new(tau)
        .with(Moment::XMean, par.x3_mean)
        .with(Moment::VMean, par.x3dot_mean)
        .with(Moment::EMean, ls.conserved().energy);
    Ok(FreeLimit {
        quoted,
        series: series_set,
        x1_mean: x1,
        x2_mean: x2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_row1() -> MagneticCoherentState {
        MagneticCoherentState::new(0.01, 0.1, 1e-3, 1.2, 1.6).unwrap()
    }

    #[test]
    fn table2_first_row() {
        let st = table2_row1();
        let ls = LandauSeries::new(&st, &SeriesSpec::default(), &QuadratureSpec::default()).unwrap();
        let c = ls.conserved();
        let r = st.classical_radius();
        assert!((c.energy / st.classical_energy() - 1.00086).abs() < 1e-5);
        assert!((c.r_mean / r - 1.00174).abs() < 1e-5);
        assert!((c.r_sq_mean / (r * r) - 1.00694).abs() < 1e-5);
        assert!((c.r_var.sqrt() / r - 0.05887).abs() < 1e-5);
        let v = ls.parallel(0.0).x3dot_mean / st.classical_parallel_velocity();
        assert!((v - 0.99943).abs() < 1e-5);
        assert!((c.r_sq_mean / c.r_sq_closed - 1.0).abs() < 1e-10);
    }

    #[test]
    fn starts_at_origin_with_initial_momenta() {
        let st = MagneticCoherentState::new(0.05, 0.4, 0.3, 0.8, 0.5).unwrap();
        let ls = LandauSeries::new(&st, &SeriesSpec::default(), &QuadratureSpec::default()).unwrap();
        let [x1, x2] = ls.transverse(0.0, PositionVariant::Printed).unwrap();
        assert!(x1 == 0.0 && x2.abs() < 1e-10 * st.classical_radius());
        let m = ls.momenta(0.0, PositionVariant::Printed).unwrap();
        assert!((m.p1 - 0.8).abs() < 1e-10 && m.p2 == 0.0 && (m.pi1 - 0.8).abs() < 1e-10);
        assert_eq!(ls.x3_uncertainty(0.0), 0.5);
    }

    #[test]
    fn nonrel_closed_forms() {
        let st = MagneticCoherentState::new(0.1, 0.25, 0.25, 6e-4, 8e-4).unwrap();
        let nr = nonrel_expectations(&st, 0.0);
        assert!((nr.energy / (1.0f64 + 1e-6).sqrt() - 1.06344).abs() < 1e-5);
        let back = nonrel_expectations(&st, 2.0 * std::f64::consts::PI / 0.1);
        assert!(back.x1.abs() < 1e-15 && back.x2.abs() < 1e-15);
    }

    #[test]
    fn free_limit_requires_rest() {
        let st = MagneticCoherentState::new(0.1, 0.25, 0.25, 0.1, 0.0).unwrap();
        assert!(free_limit_check(&st, 1.0, &QuadratureSpec::default(), &SeriesSpec::default()).is_err());
    }
}
