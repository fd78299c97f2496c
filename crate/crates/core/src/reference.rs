//! Published reference values and the parameter sets they belong to.
//!
//! All magnetic packets start with `p₁ = 0.6⟨Π⟩`, `p₃ = 0.8⟨Π⟩` unless a
//! row says otherwise.

use serde::Serialize;

use crate::error::Result;
use crate::magnetic::MagneticCoherentState;

/// Fraction of `⟨Π⟩` carried by `p₁` in the standard split.
pub const P1_FRACTION: f64 = 0.6;

/// One column of the free-particle energy table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCell {
    pub p_mean: f64,
    pub lambda: f64,
    /// `⟨E⟩/E_cl`.
    pub energy_ratio: f64,
    /// `⟨E⟩_nr/E_cl`.
    pub nonrel_ratio: f64,
}

pub const TABLE1: [EnergyCell; 6] = [
    EnergyCell { p_mean: 0.1, lambda: 0.25, energy_ratio: 1.00758, nonrel_ratio: 1.00777 },
    EnergyCell { p_mean: 0.1, lambda: 0.5, energy_ratio: 1.02944, nonrel_ratio: 1.03109 },
    EnergyCell { p_mean: 0.1, lambda: 2.0, energy_ratio: 1.35062, nonrel_ratio: 1.49751 },
    EnergyCell { p_mean: 0.001, lambda: 0.25, energy_ratio: 1.00772, nonrel_ratio: 1.00781 },
    EnergyCell { p_mean: 0.001, lambda: 0.5, energy_ratio: 1.02997, nonrel_ratio: 1.03125 },
    EnergyCell { p_mean: 0.001, lambda: 2.0, energy_ratio: 1.35453, nonrel_ratio: 1.50000 },
];

/// Mean velocity of a free packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VelocityDatum {
    pub lambda: f64,
    pub p_mean: f64,
    pub v_mean: f64,
}

pub const FREE_VELOCITIES: [VelocityDatum; 3] = [
    VelocityDatum { lambda: 1.0, p_mean: 1.0, v_mean: 0.6421 },
    VelocityDatum { lambda: 0.5, p_mean: 1.0, v_mean: 0.6903 },
    VelocityDatum { lambda: 1.0, p_mean: 2.0, v_mean: 0.8786 },
];

/// Classical `(v, E)` at `p = 1` and `p = 2`, four decimals.
#[allow(clippy::approx_constant)] // rounded published values, not constants
pub const FREE_CLASSICAL: [(f64, f64, f64); 2] = [(1.0, 0.7071, 1.4142), (2.0, 0.8944, 2.2361)];

/// Positions of the successive density maxima for `λ = 1`, `⟨p⟩ = 1`.
pub const DENSITY_MAXIMA: [f64; 5] = [0.0, 7.4, 15.5, 23.7, 31.8];

/// Transverse width of a tabulated packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PerpWidth {
    /// `λ⊥ = √Λ`.
    Matched,
    Value(f64),
}

impl PerpWidth {
    pub fn resolve(&self, lambda_field: f64) -> f64 {
        match self {
            PerpWidth::Matched => lambda_field.sqrt(),
            PerpWidth::Value(v) => *v,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PerpWidth::Matched => "sqrt(Lambda)".into(),
            PerpWidth::Value(v) => format!("{v}"),
        }
    }
}

/// A row of conserved-quantity ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConservedRow {
    pub lambda_field: f64,
    pub total: f64,
    pub p1: f64,
    pub p3: f64,
    pub lambda_perp: PerpWidth,
    pub lambda3: f64,
    /// `⟨E⟩/E_cl`, `⟨ẋ³⟩/ẋ³_cl`, `⟨R⟩/R_cl`, `⟨R²⟩/R_cl²`, `ΔR/R_cl`.
    pub values: [f64; 5],
}

impl ConservedRow {
    pub fn state(&self) -> Result<MagneticCoherentState> {
        MagneticCoherentState::new(
            self.lambda_field,
            self.lambda_perp.resolve(self.lambda_field),
            self.lambda3,
            self.p1,
            self.p3,
        )
    }
}

pub const CONSERVED_COLUMNS: [&str; 5] = ["E/E_cl", "x3dot/x3dot_cl", "R/R_cl", "R2/R_cl2", "dR/R_cl"];

const fn row(
    lambda_field: f64,
    total: f64,
    p1: f64,
    p3: f64,
    lambda_perp: PerpWidth,
    lambda3: f64,
    values: [f64; 5],
) -> ConservedRow {
    ConservedRow { lambda_field, total, p1, p3, lambda_perp, lambda3, values }
}

use PerpWidth::{Matched, Value};

/// `Λ = 0.01`.
pub const TABLE2: [ConservedRow; 12] = [
    row(0.01, 2.0, 1.2, 1.6, Matched, 1e-3, [1.00086, 0.99943, 1.00174, 1.00694, 0.05887]),
    row(0.01, 2.0, 1.2, 1.6, Matched, 0.5, [1.00394, 0.99022, 1.00174, 1.00694, 0.05887]),
    row(0.01, 2.0, 1.2, 1.6, Value(0.5), 1e-3, [1.01067, 0.99286, 1.02199, 1.08694, 0.20611]),
    row(0.01, 2.0, 1.2, 1.6, Value(0.5), 0.5, [1.01375, 0.98383, 1.02199, 1.08694, 0.20611]),
    row(0.01, 2.0, 1.6, 1.2, Matched, 1e-3, [1.00074, 0.99976, 1.00097, 1.00391, 0.04417]),
    row(0.01, 2.0, 1.6, 1.2, Matched, 0.5, [1.00521, 0.98663, 1.00097, 1.00391, 0.04417]),
    row(0.01, 2.0, 1.6, 1.2, Value(0.5), 1e-3, [1.00932, 0.99691, 1.01230, 1.04891, 0.15539]),
    row(0.01, 2.0, 1.6, 1.2, Value(0.5), 0.5, [1.01375, 0.98383, 1.01230, 1.04891, 0.15539]),
    row(0.01, 5.0, 3.0, 4.0, Value(0.25), 0.25, [1.00063, 0.99936, 1.00089, 1.00356, 0.04218]),
    row(0.01, 5.0, 3.0, 4.0, Value(0.5), 0.5, [1.00245, 0.99745, 1.00348, 1.01391, 0.08325]),
    row(0.01, 5.0, 3.0, 4.0, Value(0.5), 0.25, [1.00211, 0.99849, 1.00348, 1.01391, 0.08325]),
    row(0.01, 5.0, 3.0, 4.0, Value(0.25), 0.5, [1.00097, 0.99831, 1.00089, 1.00356, 0.04218]),
];

/// `⟨Π⟩ = 2`, `p₁ = 1.2`, `p₃ = 1.6`, `λ⊥ = λ₃`.
pub const TABLE3: [ConservedRow; 4] = [
    row(0.1, 2.0, 1.2, 1.6, Value(0.25), 0.25, [1.01029, 0.99133, 1.01952, 1.07725, 0.19453]),
    row(1e-4, 2.0, 1.2, 1.6, Value(0.25), 0.25, [1.00344, 0.99594, 1.00544, 1.02171, 0.10385]),
    row(0.1, 2.0, 1.2, 1.6, Value(0.5), 0.5, [1.01547, 0.98264, 1.02553, 1.10069, 0.22128]),
    row(1e-4, 2.0, 1.2, 1.6, Value(0.5), 0.5, [1.01372, 0.98385, 1.02195, 1.08681, 0.20595]),
];

/// Slow packets, `⟨Π⟩ = 10⁻³` in the standard split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlowRow {
    pub lambda_field: f64,
    pub lambda_perp: f64,
    pub lambda3: f64,
    pub energy_ratio: f64,
    pub nonrel_energy_ratio: f64,
    pub x3dot_ratio: f64,
}

impl SlowRow {
    pub const TOTAL: f64 = 1e-3;

    pub fn state(&self) -> Result<MagneticCoherentState> {
        MagneticCoherentState::with_total_momentum(
            self.lambda_field,
            self.lambda_perp,
            self.lambda3,
            Self::TOTAL,
            P1_FRACTION,
        )
    }
}

pub const TABLE4: [SlowRow; 4] = [
    SlowRow { lambda_field: 0.1, lambda_perp: 0.25, lambda3: 0.25, energy_ratio: 1.06127, nonrel_energy_ratio: 1.06344, x3dot_ratio: 0.93013 },
    SlowRow { lambda_field: 1e-4, lambda_perp: 0.25, lambda3: 0.25, energy_ratio: 1.02300, nonrel_energy_ratio: 1.02344, x3dot_ratio: 0.96381 },
    SlowRow { lambda_field: 0.1, lambda_perp: 0.5, lambda3: 0.5, energy_ratio: 1.09724, nonrel_energy_ratio: 1.10375, x3dot_ratio: 0.87193 },
    SlowRow { lambda_field: 1e-4, lambda_perp: 0.5, lambda3: 0.5, energy_ratio: 1.08764, nonrel_energy_ratio: 1.09375, x3dot_ratio: 0.87959 },
];

/// Helix figure: `Λ = 10⁻³`, `⟨Π⟩ = 2`, `p₃ = 1.6`, with `(λ⊥, λ₃)` as listed.
pub const HELIX_LAMBDA: f64 = 1e-3;
pub const HELIX_WIDTHS: [(PerpWidth, f64); 2] = [(Matched, 1e-3), (Value(0.25), 0.25)];

/// Field-independence figure: `λ⊥ = λ₃ = 0.25`, `⟨Π⟩ = 1`.
pub const FIELD_INDEPENDENCE_LAMBDAS: [f64; 3] = [0.1, 1e-3, 1e-6];
