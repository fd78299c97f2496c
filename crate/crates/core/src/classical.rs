//! Classical relativistic motion: free particles and the helix in a
//! uniform magnetic field along +x³.
//!
//! The helix starts at the origin with transverse momentum along +x¹, so
//! for positive charge the gyration center sits at `(0, −R)`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

/// Velocity and energy of a free particle of momentum `p`.
pub fn free_classical(p: f64) -> (f64, f64) {
    let e = (1.0 + p * p).sqrt();
    (p / e, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassicalHelix {
    #[serde(rename = "Lambda")]
    pub lambda_field: f64,
    pub p_perp: f64,
    pub p3: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HelixDerived {
    /// γ = √(1 + p⊥² + p₃²)
    pub energy: f64,
    pub omega_b: f64,
    pub radius: f64,
    pub period: f64,
    pub pitch_angle: f64,
}

impl ClassicalHelix {
    pub fn new(lambda_field: f64, p_perp: f64, p3: f64) -> Result<Self> {
        if !(lambda_field > 0.0) || !lambda_field.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "field strength must be positive, got {lambda_field}"
            )));
        }
        if !(p_perp >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transverse momentum must be non-negative, got {p_perp}"
            )));
        }
        Ok(Self {
            lambda_field,
            p_perp,
            p3,
        })
    }

    /// Parallel velocity p₃/γ.
    pub fn parallel_velocity(&self) -> f64 {
        self.p3 / self.energy()
    }

    pub fn energy(&self) -> f64 {
        (1.0 + self.p_perp * self.p_perp + self.p3 * self.p3).sqrt()
    }
}

pub fn helix_derived(h: &ClassicalHelix) -> Result<HelixDerived> {
    if !(h.lambda_field > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "field strength must be positive, got {}",
            h.lambda_field
        )));
    }
    let energy = h.energy();
    let omega_b = h.lambda_field / energy;
    Ok(HelixDerived {
        energy,
        omega_b,
        radius: h.p_perp / h.lambda_field,
        period: 2.0 * PI / omega_b,
        pitch_angle: h.p3.atan2(h.p_perp),
    })
}

/// Position at time `τ` on the helix about `gyration_center`.
///
/// Transverse part `center + R(sin ωτ, cos ωτ)`: the particle starts at the
/// top of the circle moving along +x¹ and turns clockwise in the x¹x² plane,
/// which is counterclockwise when viewed along B.
pub fn helix_position(h: &ClassicalHelix, tau: f64, gyration_center: [f64; 2]) -> [f64; 3] {
    let energy = h.energy();
    let omega = h.lambda_field / energy;
    let r = h.p_perp / h.lambda_field;
    let (sn, cs) = (omega * tau).sin_cos();
    [
        gyration_center[0] + r * sn,
        gyration_center[1] + r * cs,
        h.p3 / energy * tau,
    ]
}

/// Velocity along [`helix_position`].
pub fn helix_velocity(h: &ClassicalHelix, tau: f64) -> [f64; 3] {
    let energy = h.energy();
    let omega = h.lambda_field / energy;
    let v_perp = h.p_perp / energy;
    let (sn, cs) = (omega * tau).sin_cos();
    [v_perp * cs, -v_perp * sn, h.p3 / energy]
}

/// Gyration center of the trajectory starting at the origin.
pub fn default_gyration_center(h: &ClassicalHelix) -> [f64; 2] {
    [0.0, -h.p_perp / h.lambda_field]
}

/// Canonical momenta `(p₁, p₂)` from position and kinetic momenta in the
/// symmetric gauge: `p₁ = Π₁ − (Λ/2)x²`, `p₂ = Π₂ + (Λ/2)x¹`.
pub fn canonical_momenta(lambda_field: f64, x: [f64; 2], kinetic: [f64; 2]) -> [f64; 2] {
    [
        kinetic[0] - 0.5 * lambda_field * x[1],
        kinetic[1] + 0.5 * lambda_field * x[0],
    ]
}

/// Gyration center from position and canonical momenta:
/// `x¹_gc = x¹/2 + p₂/Λ`, `x²_gc = x²/2 − p₁/Λ`.
pub fn gyration_center(lambda_field: f64, x: [f64; 2], canonical: [f64; 2]) -> [f64; 2] {
    [
        0.5 * x[0] + canonical[1] / lambda_field,
        0.5 * x[1] - canonical[0] / lambda_field,
    ]
}

/// `L₃ = x¹p₂ − x²p₁`.
pub fn angular_momentum(x: [f64; 2], canonical: [f64; 2]) -> f64 {
    x[0] * canonical[1] - x[1] * canonical[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_values() {
        assert_eq!(free_classical(0.0), (0.0, 1.0));
        let (v, e) = free_classical(1.0);
        assert!((v - 0.5f64.sqrt()).abs() < 1e-15 && (e - 2f64.sqrt()).abs() < 1e-15);
        let (v, e) = free_classical(2.0);
        assert!((v - 0.8944).abs() < 5e-5 && (e - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn derived_quantities() {
        let h = ClassicalHelix::new(0.01, 1.2, 1.6).unwrap();
        let d = helix_derived(&h).unwrap();
        assert!((d.radius - 120.0).abs() < 1e-12);
        let h = ClassicalHelix::new(0.001, 1.2, 1.6).unwrap();
        let d = helix_derived(&h).unwrap();
        assert!((d.energy - 5f64.sqrt()).abs() < 1e-15);
        assert!((d.omega_b - 0.001 / 5f64.sqrt()).abs() < 1e-18);
        assert!(d.radius * d.omega_b <= 1.0);
        assert!((d.pitch_angle - (1.6f64 / 1.2).atan()).abs() < 1e-15);
        let flat = ClassicalHelix::new(0.5, 0.0, 1.0).unwrap();
        assert_eq!(helix_derived(&flat).unwrap().radius, 0.0);
        assert!(ClassicalHelix::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn starts_at_origin_and_is_periodic() {
        let h = ClassicalHelix::new(0.1, 0.8, 0.3).unwrap();
        let d = helix_derived(&h).unwrap();
        let c = default_gyration_center(&h);
        let x0 = helix_position(&h, 0.0, c);
        assert!(x0.iter().all(|v| v.abs() < 1e-14));
        let xp = helix_position(&h, d.period, c);
        assert!(xp[0].abs() < 1e-9 && xp[1].abs() < 1e-9);
        assert!((xp[2] - h.parallel_velocity() * d.period).abs() < 1e-9);
    }

    #[test]
    fn gyration_center_and_angular_momentum_along_orbit() {
        let h = ClassicalHelix::new(0.05, 1.1, 0.4).unwrap();
        let c = default_gyration_center(&h);
        let e = h.energy();
        let r = h.p_perp / h.lambda_field;
        for k in 0..50 {
            let tau = k as f64 * 7.3;
            let x = helix_position(&h, tau, c);
            let v = helix_velocity(&h, tau);
            let kin = [e * v[0], e * v[1]];
            let p = canonical_momenta(h.lambda_field, [x[0], x[1]], kin);
            let gc = gyration_center(h.lambda_field, [x[0], x[1]], p);
            assert!((gc[0] - c[0]).abs() < 1e-12 * r && (gc[1] - c[1]).abs() < 1e-12 * r);
            let l3 = angular_momentum([x[0], x[1]], p);
            let rgc2 = c[0] * c[0] + c[1] * c[1];
            let expect = 0.5 * h.lambda_field * (rgc2 - r * r);
            assert!((l3 - expect).abs() < 1e-10);
        }
    }
}
