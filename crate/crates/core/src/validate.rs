//! Invariant suites and comparisons against published tables.
//!
//! Every check records the measured value, the reference (when there is
//! one), the deviation and the tolerance it is held to.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use crate::classical::free_classical;
use crate::error::Result;
use crate::freefield::{
    energy_moments, evolved_moments, nonrel_moments, probability_density, static_moments,
    velocity_moments, FreeCoherentState, Moment,
};
use crate::magnetic::{
    free_limit_check, gyration_center, nonrel_expectations, LandauSeries, MagneticCoherentState,
    PositionVariant, SeriesSpec,
};
use crate::neutral::{neutral_field, NeutralCoherentState};
use crate::quadrature::QuadratureSpec;
use crate::reference::{
    ConservedRow, FREE_CLASSICAL, FREE_VELOCITIES, TABLE1, TABLE2, TABLE3, TABLE4,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// `|value − reference| ≤ tolerance`.
    pub fn against(suite: &str, name: impl Into<String>, value: f64, reference: f64, tolerance: f64) -> Self {
        let deviation = (value - reference).abs();
        Self {
            suite: suite.into(),
            name: name.into(),
            value,
            reference: Some(reference),
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }

    /// A deviation measured directly, e.g. a maximum over a grid.
    pub fn bound(suite: &str, name: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Self {
            suite: suite.into(),
            name: name.into(),
            value: deviation,
            reference: None,
            deviation,
            tolerance,
            passed: deviation <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = write!(
                out,
                "{} {}/{} value={:.9e}",
                if c.passed { "PASS" } else { "FAIL" },
                c.suite,
                c.name,
                c.value
            );
            if let Some(r) = c.reference {
                let _ = write!(out, " ref={r:.9e}");
            }
            let _ = writeln!(out, " dev={:.3e} tol={:.1e}", c.deviation, c.tolerance);
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed",
            self.checks.len(),
            self.failures()
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ValidateOptions {
    pub quad: QuadratureSpec,
    pub series: SeriesSpec,
    pub variant: PositionVariant,
}

/// Cells of all four tables.
pub fn table_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for cell in TABLE1 {
        let s = FreeCoherentState::particle(cell.lambda, 0.0, cell.p_mean)?;
        let e_cl = free_classical(cell.p_mean).1;
        let (e, _) = energy_moments(&s, &o.quad)?;
        let e_nr = nonrel_moments(&s, 0.0).value(Moment::EMean);
        let tag = format!("p={} lambda={}", cell.p_mean, cell.lambda);
        out.push(Check::against("table1", format!("{tag} E/E_cl"), e / e_cl, cell.energy_ratio, 1e-4));
        out.push(Check::against("table1", format!("{tag} E_nr/E_cl"), e_nr / e_cl, cell.nonrel_ratio, 1e-4));
    }
    for (label, rows) in [("table2", &TABLE2[..]), ("table3", &TABLE3[..])] {
        for (i, row) in rows.iter().enumerate() {
            let got = conserved_ratios(row, o)?;
            for (j, name) in crate::reference::CONSERVED_COLUMNS.iter().enumerate() {
                out.push(Check::against(
                    label,
                    format!("row{} {name}", i + 1),
                    got[j],
                    row.values[j],
                    2e-3,
                ));
            }
        }
    }
    for (i, row) in TABLE4.iter().enumerate() {
        let st = row.state()?;
        let ls = LandauSeries::new(&st, &o.series, &o.quad)?;
        let e_cl = st.classical_energy();
        let e = ls.conserved().energy / e_cl;
        let v = ls.parallel(0.0).x3dot_mean / st.classical_parallel_velocity();
        let e_nr = nonrel_expectations(&st, 0.0).energy / e_cl;
        out.push(Check::against("table4", format!("row{} E/E_cl", i + 1), e, row.energy_ratio, 2e-3));
        out.push(Check::against("table4", format!("row{} E_nr/E_cl", i + 1), e_nr, row.nonrel_energy_ratio, 1e-5));
        out.push(Check::against("table4", format!("row{} x3dot/x3dot_cl", i + 1), v, row.x3dot_ratio, 2e-3));
    }
    Ok(out)
}

/// `⟨E⟩/E_cl, ⟨ẋ³⟩/ẋ³_cl, ⟨R⟩/R_cl, ⟨R²⟩/R_cl², ΔR/R_cl` of a table row.
pub fn conserved_ratios(row: &ConservedRow, o: &ValidateOptions) -> Result<[f64; 5]> {
    let st = row.state()?;
    let ls = LandauSeries::new(&st, &o.series, &o.quad)?;
    let c = ls.conserved();
    let r = st.classical_radius();
    Ok([
        c.energy / st.classical_energy(),
        ls.parallel(0.0).x3dot_mean / st.classical_parallel_velocity(),
        c.r_mean / r,
        c.r_sq_mean / (r * r),
        c.r_var.sqrt() / r,
    ])
}

/// `∫ρ dx` by the trapezoid rule over the light cone `|x − α| ≤ |τ|`
/// widened by twelve initial widths on each side. Slow components trail
/// far behind the mean, so a window around `⟨x⟩` is not enough.
pub fn density_norm(s: &FreeCoherentState, tau: f64, quad: &QuadratureSpec) -> Result<f64> {
    let half = tau.abs() + 12.0 / s.lambda;
    let n = ((2.0 * half / 0.01).ceil() as usize).max(2000);
    let h = 2.0 * half / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let x = s.alpha - half + h * i as f64;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        sum += w * probability_density(s, tau, x, quad)?;
    }
    Ok(sum * h)
}

/// Position of the maximum of `f` on `[lo, hi]`, refined by golden section.
pub fn argmax(f: impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    let h = (hi - lo) / samples as f64;
    let mut best = (lo, f(lo)?);
    for i in 1..=samples {
        let x = lo + h * i as f64;
        let y = f(x)?;
        if y > best.1 {
            best = (x, y);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-6 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c)? > f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(0.5 * (a + b))
}

fn free_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let q = &o.quad;
    let mut out = Vec::new();
    for d in FREE_VELOCITIES {
        let s = FreeCoherentState::particle(d.lambda, 0.0, d.p_mean)?;
        let v = velocity_moments(&s, q)?.mean;
        out.push(Check::against("free", format!("v_mean lambda={} p={}", d.lambda, d.p_mean), v, d.v_mean, 5e-4));
    }
    for (p, v_ref, e_ref) in FREE_CLASSICAL {
        let (v, e) = free_classical(p);
        out.push(Check::against("free", format!("classical v p={p}"), v, v_ref, 5e-5));
        out.push(Check::against("free", format!("classical E p={p}"), e, e_ref, 5e-5));
    }
    let mut worst = 0.0f64;
    for (lambda, p) in [(0.1, -3.0), (0.5, 0.0), (1.0, 1.0), (0.25, 4.5)] {
        let m = static_moments(&FreeCoherentState::particle(lambda, 0.3, p)?);
        worst = worst.max((m.value(Moment::UncertaintyProduct) - 0.5).abs());
    }
    out.push(Check::bound("free", "dx*dp(0) - 1/2", worst, 1e-15));
    for (lambda, p) in [(1.0, 1.0), (0.5, 1.0), (1.0, 2.0)] {
        let s = FreeCoherentState::particle(lambda, 0.0, p)?;
        for tau in [0.0, 5.0, 20.0] {
            let norm = density_norm(&s, tau, q)?;
            out.push(Check::against("free", format!("int rho lambda={lambda} p={p} tau={tau}"), norm, 1.0, 1e-6));
        }
        let anti = FreeCoherentState::new(lambda, 0.0, p, -1)?;
        let mut dev = 0.0f64;
        for tau in [0.0, 3.0, 11.0] {
            for i in 0..21 {
                let x = -20.0 + 2.0 * i as f64;
                let a = probability_density(&anti, tau, x, q)?;
                let b = probability_density(&s, -tau, x, q)?;
                dev = dev.max((a - b).abs());
            }
        }
        out.push(Check::bound("free", format!("rho(-eps,tau) - rho(+eps,-tau) lambda={lambda} p={p}"), dev, 1e-10));
    }
    // relativistic spreading never exceeds the nonrelativistic one
    let mut excess = 0.0f64;
    for (lambda, p) in [(0.25, 0.5), (1.0, 1.0), (2.0, 0.0)] {
        let s = FreeCoherentState::particle(lambda, 0.0, p)?;
        for i in 0..=20 {
            let tau = 2.5 * i as f64;
            let rel = evolved_moments(&s, tau, q)?.value(Moment::XVar);
            let nr = nonrel_moments(&s, tau).value(Moment::XVar);
            excess = excess.max(rel - nr);
        }
    }
    out.push(Check::bound("free", "dx_rel - dx_nr", excess.max(0.0), 0.0));
    Ok(out)
}

/// Largest drift of the gyration center over `periods` classical periods,
/// in units of `R_cl`.
pub fn gyration_center_drift(ls: &LandauSeries, periods: f64, samples: usize, variant: PositionVariant) -> Result<f64> {
    let st = &ls.state;
    let r = st.classical_radius();
    let t_cl = st.classical_period();
    let at = |tau: f64| -> Result<[f64; 2]> {
        let x = ls.transverse(tau, variant)?;
        Ok(gyration_center(st, x, &ls.momenta_at(x)))
    };
    let g0 = at(0.0)?;
    let mut dev = 0.0f64;
    for i in 1..=samples {
        let g = at(periods * t_cl * i as f64 / samples as f64)?;
        dev = dev.max((g[0] - g0[0]).abs()).max((g[1] - g0[1]).abs());
    }
    Ok(dev / r)
}

fn magnetic_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let states = [
        ("table2 row1", TABLE2[0].state()?),
        ("table2 row4", TABLE2[3].state()?),
        ("table3 row1", TABLE3[0].state()?),
        ("Lambda=0.3", MagneticCoherentState::new(0.3, 0.2, 0.4, 0.7, 0.2)?),
    ];
    for (tag, st) in states {
        let ls = LandauSeries::new(&st, &o.series, &o.quad)?;
        let c = ls.conserved();
        let r = st.classical_radius();
        out.push(Check::against("magnetic", format!("{tag} sum P"), c.total_mass, 1.0, 1e-9));
        out.push(Check::bound("magnetic", format!("{tag} |<L3>|"), c.l3.abs(), 1e-12));
        out.push(Check::against("magnetic", format!("{tag} <R2>/<Rgc2>"), c.r_sq_mean / c.r_gc_sq_mean, 1.0, 1e-10));
        out.push(Check::against("magnetic", format!("{tag} <R2>/closed form"), c.r_sq_mean / c.r_sq_closed, 1.0, 1e-10));
        out.push(Check::bound("magnetic", format!("{tag} -(dR^2)"), (-c.r_var).max(0.0), 0.0));
        let floor = (1.0 + st.lambda_field + st.p3_mean * st.p3_mean).sqrt();
        out.push(Check::bound("magnetic", format!("{tag} E floor - <E>"), (floor - c.energy).max(0.0), 0.0));
        let [x1, x2] = ls.transverse(0.0, o.variant)?;
        out.push(Check::bound("magnetic", format!("{tag} |x(0)|/R_cl"), x1.abs().max(x2.abs()) / r, 1e-10));
        out.push(Check::against("magnetic", format!("{tag} dx3*dp3(0)"), ls.x3_uncertainty(0.0), 0.5, 1e-15));
        let drift = gyration_center_drift(&ls, 5.0, 40, o.variant)?;
        out.push(Check::bound("magnetic", format!("{tag} gyration center drift/R_cl"), drift, 1e-10));
        let mut spread = 0.0f64;
        for l3 in [1e-3, 0.25, 0.5] {
            let other = MagneticCoherentState { lambda3: l3, ..st };
            let co = LandauSeries::new(&other, &o.series, &o.quad)?.conserved();
            spread = spread
                .max((co.r_mean - c.r_mean).abs() / c.r_mean)
                .max((co.r_sq_mean - c.r_sq_mean).abs() / c.r_sq_mean)
                .max((co.l3 - c.l3).abs());
        }
        out.push(Check::bound("magnetic", format!("{tag} lambda3 dependence of R, R2, L3"), spread, 1e-12));
    }
    Ok(out)
}

fn neutral_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (lambda, alpha, p) in [(1.0, 0.0, 1.0), (0.5, 2.0, -0.7)] {
        let s = NeutralCoherentState::from_params(lambda, alpha, p)?;
        let dev = neutral_max_imag(&s, &[0.0, 2.0, 7.5], -15.0, 15.0, 31, &o.quad)?;
        out.push(Check::bound("neutral", format!("max |Im psi| lambda={lambda} p={p}"), dev, 1e-10));
    }
    Ok(out)
}

/// Largest `|Im ψ|` of a neutral field over a `(τ, x)` grid.
pub fn neutral_max_imag(
    s: &NeutralCoherentState,
    taus: &[f64],
    x_lo: f64,
    x_hi: f64,
    nx: usize,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let mut dev = 0.0f64;
    for &tau in taus {
        for i in 0..nx {
            let x = if nx == 1 { x_lo } else { x_lo + (x_hi - x_lo) * i as f64 / (nx - 1) as f64 };
            dev = dev.max(neutral_field(s, tau, x, quad)?.im.abs());
        }
    }
    Ok(dev)
}

/// Largest distance between the series trajectory and the closed-form
/// nonrelativistic one over `periods` periods of `2π/Λ`, in units of `R_cl`.
pub fn nonrel_trajectory_gap(ls: &LandauSeries, periods: f64, samples: usize, variant: PositionVariant) -> Result<f64> {
    let st = &ls.state;
    let mut dev = 0.0f64;
    for i in 0..=samples {
        let tau = periods * 2.0 * PI / st.lambda_field * i as f64 / samples as f64;
        let [x1, x2] = ls.transverse(tau, variant)?;
        let nr = nonrel_expectations(st, tau);
        dev = dev.max((x1 - nr.x1).abs()).max((x2 - nr.x2).abs());
    }
    Ok(dev / st.classical_radius())
}

fn limit_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let lam = 1e-8;
    let st = MagneticCoherentState::new(lam, lam.sqrt(), 0.5, 0.0, 1.0)?;
    let fl = free_limit_check(&st, 10.0, &o.quad, &o.series)?;
    let free = FreeCoherentState::particle(0.5, 0.0, 1.0)?;
    let v = velocity_moments(&free, &o.quad)?.mean;
    let (e, _) = energy_moments(&free, &o.quad)?;
    out.push(Check::against("limits", "free limit series E", fl.series.value(Moment::EMean), e, 1e-6));
    out.push(Check::against("limits", "free limit series x3dot", fl.series.value(Moment::VMean), v, 1e-6));
    out.push(Check::against("limits", "free limit quoted E", fl.quoted.value(Moment::EMean), e, 1e-12));
    out.push(Check::against("limits", "free limit quoted x3dot", fl.quoted.value(Moment::VMean), v, 1e-12));
    out.push(Check::bound("limits", "free limit |x1|+|x2|", fl.x1_mean.abs() + fl.x2_mean.abs(), 1e-12));
    let ls = LandauSeries::new(&st, &o.series, &o.quad)?;
    let x3u = ls.x3_uncertainty(10.0);
    let free_u = evolved_moments(&free, 10.0, &o.quad)?.value(Moment::UncertaintyProduct);
    out.push(Check::against("limits", "free limit dx3*dp3(10)", x3u, free_u, 1e-6));

    // the relativistic Landau frequency sits below Λ by about Λ²(2N+1)/2, so
    // the gap grows by roughly πΛ R_cl per period
    for (lam, periods) in [(1e-4, 1.0), (1e-6, 5.0)] {
        let slow = MagneticCoherentState::with_total_momentum(lam, lam.sqrt(), 1e-3, 1e-3, 0.6)?;
        let ls = LandauSeries::new(&slow, &o.series, &o.quad)?;
        let gap = nonrel_trajectory_gap(&ls, periods, 64, o.variant)?;
        out.push(Check::bound(
            "limits",
            format!("nonrel trajectory gap/R_cl Lambda={lam} periods={periods}"),
            gap,
            1e-3,
        ));
    }
    Ok(out)
}

/// Every invariant suite.
pub fn invariant_checks(o: &ValidateOptions) -> Result<Vec<Check>> {
    let mut out = free_checks(o)?;
    out.extend(magnetic_checks(o)?);
    out.extend(neutral_checks(o)?);
    out.extend(limit_checks(o)?);
    Ok(out)
}

pub fn run(o: &ValidateOptions, tables: bool, invariants: bool) -> Result<Report> {
    let mut checks = Vec::new();
    if tables {
        checks.extend(table_checks(o)?);
    }
    if invariants {
        checks.extend(invariant_checks(o)?);
    }
    Ok(Report { checks })
}
