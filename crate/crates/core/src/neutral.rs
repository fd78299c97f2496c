//! Neutral (real) fields built from a particle packet and its ε = −1
//! partner with the same position and opposite momentum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freefield::{kg_field, FreeCoherentState, NormalizationConvention};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeutralCoherentState {
    pub base: FreeCoherentState,
}

impl NeutralCoherentState {
    pub fn new(base: FreeCoherentState) -> Result<Self> {
        if base.epsilon != 1 {
            return Err(Error::InvalidParameter(
                "the base of a neutral state must have charge parity +1".into(),
            ));
        }
        Ok(Self { base })
    }

    pub fn from_params(lambda: f64, alpha: f64, p_mean: f64) -> Result<Self> {
        Self::new(FreeCoherentState::particle(lambda, alpha, p_mean)?)
    }
}

/// The ε = −1 component: same λ and α, momentum reversed.
pub fn partner(s: &NeutralCoherentState) -> FreeCoherentState {
    FreeCoherentState {
        epsilon: -1,
        p_mean: -s.base.p_mean,
        ..s.base
    }
}

/// Physical momentum `ε·p_mean` of one charge-parity component.
pub fn physical_momentum(component: &FreeCoherentState) -> f64 {
    component.eps() * component.p_mean
}

/// `(ψ₊ + ψ₋)/√2`, real up to rounding under the symmetric normalization.
pub fn neutral_field(
    s: &NeutralCoherentState,
    tau: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    neutral_field_with(s, tau, x, &NormalizationConvention::default(), spec)
}

/// As [`neutral_field`] with an explicit normalization; a non-unit product
/// is applied to both components and the result is no longer guaranteed
/// to be real.
pub fn neutral_field_with(
    s: &NeutralCoherentState,
    tau: f64,
    x: f64,
    norm: &NormalizationConvention,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    let plus = kg_field(&s.base, tau, x, norm, spec)?;
    let minus = kg_field(&partner(s), tau, x, norm, spec)?;
    Ok((plus + minus) / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freefield::wavefn_x;

    #[test]
    fn partner_flips_momentum_only() {
        let s = NeutralCoherentState::from_params(0.5, 1.0, 1.0).unwrap();
        let p = partner(&s);
        assert_eq!(p.p_mean, -1.0);
        assert_eq!(p.epsilon, -1);
        assert_eq!((p.lambda, p.alpha), (0.5, 1.0));
        assert_eq!(physical_momentum(&p), physical_momentum(&s.base));
    }

    #[test]
    fn partner_wavefunction_is_conjugate() {
        let s = NeutralCoherentState::from_params(0.7, -0.4, 1.3).unwrap();
        let p = partner(&s);
        for x in [-3.0, 0.0, 0.2, 2.5] {
            let a = wavefn_x(&s.base, x);
            let b = wavefn_x(&p, x);
            assert!((a.conj() - b).norm() < 1e-15);
        }
    }

    #[test]
    fn base_must_be_particle() {
        let a = FreeCoherentState::new(1.0, 0.0, 0.0, -1).unwrap();
        assert!(NeutralCoherentState::new(a).is_err());
    }

    #[test]
    fn at_rest_initial_value() {
        let s = NeutralCoherentState::from_params(0.8, 0.0, 0.0).unwrap();
        let spec = QuadratureSpec::default();
        let f = neutral_field(&s, 0.0, 0.7, &spec).unwrap();
        let plus = kg_field(&s.base, 0.0, 0.7, &NormalizationConvention::default(), &spec).unwrap();
        assert!((f.re - std::f64::consts::SQRT_2 * plus.re).abs() < 1e-14);
        assert!(f.im.abs() < 1e-14);
    }
}
