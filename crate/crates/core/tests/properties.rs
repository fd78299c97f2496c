use proptest::prelude::*;

use kgcoherent::freefield::{
    energy_moments, evolved_moments, nonrel_moments, probability_density, static_moments,
    velocity_moments, FreeCoherentState, Moment,
};
use kgcoherent::magnetic::{LandauSeries, MagneticCoherentState, PositionVariant, SeriesSpec};
use kgcoherent::neutral::{neutral_field, NeutralCoherentState};
use kgcoherent::quadrature::QuadratureSpec;
use kgcoherent::validate::density_norm;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packets_start_at_minimum_uncertainty(lambda in 0.01f64..1.0, p in -5.0f64..5.0, alpha in -10.0f64..10.0) {
        let s = FreeCoherentState::particle(lambda, alpha, p).unwrap();
        prop_assert_eq!(static_moments(&s).value(Moment::UncertaintyProduct), 0.5);
        let m = evolved_moments(&s, 0.0, &QuadratureSpec::default()).unwrap();
        prop_assert!((m.value(Moment::UncertaintyProduct) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relativistic_spreading_is_bounded(lambda in 0.05f64..2.0, p in -4.0f64..4.0, tau in 0.0f64..100.0) {
        let s = FreeCoherentState::particle(lambda, 0.0, p).unwrap();
        let q = QuadratureSpec::default();
        let rel = evolved_moments(&s, tau, &q).unwrap();
        let nr = nonrel_moments(&s, tau);
        prop_assert!(rel.value(Moment::XVar) <= nr.value(Moment::XVar) * (1.0 + 1e-12));
        prop_assert!(rel.value(Moment::UncertaintyProduct) >= 0.5 - 1e-12);
        let v = velocity_moments(&s, &q).unwrap();
        prop_assert!(v.mean.abs() < 1.0 && v.var >= 0.0);
        // Jensen: ⟨√(1+p²)⟩ ≥ √(1+⟨p⟩²)
        let (e, var) = energy_moments(&s, &q).unwrap();
        prop_assert!(e >= (1.0 + p * p).sqrt() - 1e-14);
        prop_assert!(var >= 0.0);
    }

    #[test]
    fn charge_parity_reverses_time(lambda in 0.25f64..2.0, p in -2.0f64..2.0, tau in -10.0f64..10.0, x in -15.0f64..15.0) {
        let q = QuadratureSpec::default();
        let plus = FreeCoherentState::new(lambda, 0.0, p, 1).unwrap();
        let minus = FreeCoherentState::new(lambda, 0.0, p, -1).unwrap();
        let a = probability_density(&minus, tau, x, &q).unwrap();
        let b = probability_density(&plus, -tau, x, &q).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn neutral_fields_are_real(lambda in 0.25f64..2.0, alpha in -3.0f64..3.0, p in -2.0f64..2.0, tau in 0.0f64..10.0, x in -10.0f64..10.0) {
        let s = NeutralCoherentState::from_params(lambda, alpha, p).unwrap();
        let z = neutral_field(&s, tau, x, &QuadratureSpec::default()).unwrap();
        prop_assert!(z.im.abs() < 1e-10, "{}", z.im);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn density_is_normalized(lambda in 0.5f64..2.0, p in -2.0f64..2.0, tau in 0.0f64..20.0) {
        let s = FreeCoherentState::particle(lambda, 0.0, p).unwrap();
        let n = density_norm(&s, tau, &QuadratureSpec::default()).unwrap();
        prop_assert!((n - 1.0).abs() < 1e-6, "{}", n);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn landau_series_invariants(
        lam in 0.005f64..0.5,
        width in 0.3f64..3.0,
        l3 in 0.05f64..1.0,
        p1 in 0.0f64..2.0,
        p3 in -2.0f64..2.0,
    ) {
        // transverse width as a multiple of the matched one
        let st = MagneticCoherentState::new(lam, width * lam.sqrt(), l3, p1, p3).unwrap();
        let ls = LandauSeries::new(&st, &SeriesSpec::default(), &QuadratureSpec::default()).unwrap();
        let c = ls.conserved();
        prop_assert!((c.total_mass - 1.0).abs() < 1e-9);
        prop_assert!(c.l3.abs() < 1e-12);
        prop_assert!(c.r_var >= -1e-12 * c.r_sq_mean.max(1.0));
        prop_assert!((c.r_sq_mean - c.r_sq_closed).abs() <= 1e-10 * c.r_sq_closed.max(1.0));
        prop_assert!(c.energy >= (1.0 + lam + p3 * p3).sqrt() - 1e-12);
        let r = st.classical_radius().max(1.0);
        let x = ls.transverse(0.0, PositionVariant::Printed).unwrap();
        prop_assert!(x[0].abs() < 1e-9 * r && x[1].abs() < 1e-9 * r, "{:?}", x);
        prop_assert!((ls.x3_uncertainty(0.0) - 0.5).abs() < 1e-15);
        // the symmetric reading agrees at τ = 0
        let xs = ls.transverse(0.0, PositionVariant::Symmetric).unwrap();
        prop_assert!((xs[1] - x[1]).abs() < 1e-9 * r);
    }
}
