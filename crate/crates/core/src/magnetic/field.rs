//! The coherent Klein-Gordon field of a packet in a uniform field.
//!
//! In cylindrical coordinates `(ρ, φ, x³)`:
//!
//! `ψ = K Σ_{n,ℓ} (−1)ⁿ i^{|ℓ|} e^{iℓφ} a_n^{|ℓ|} b_n^{|ℓ|}(v) I_N(τ, x³)`
//!
//! with `v = Λρ²/2`, `a` the normalized amplitude of the occupations, `b`
//! the normalized Laguerre function, `N` the Landau level of `(n, ℓ)` and
//! `I_N = ∫ e^{−(k−p₃)²/λ₃²} e^{ikx³ − iτ√D} D^{−1/4} dk`,
//! `D = Λ(2N+1) + 1 + k²`.
//!
//! Odd powers `((−s)·u·v)^{|ℓ|/2}` are taken on the principal branch, which
//! gives the factor `i^{|ℓ|}` when `s·u·v > 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{series_constants, MagneticCoherentState, SeriesSpec};
use crate::error::{Error, Result};
use crate::freefield::NormalizationConvention;
use crate::quadrature::{integrate_gaussian, GaussianWeight, QuadratureSpec};
use crate::specfun::ln_factorial;

const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;
/// Consecutive small amplitudes needed before a column is closed.
const COLUMN_RUN: usize = 16;
/// Terms with `|a_n| < SKIP` are dropped; `|b| ≤ 1` and `|I_N|` is bounded,
/// so even a million of them stay far below the field's resolution.
const SKIP: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSeriesReport {
    /// Number of `|ℓ|` columns summed.
    pub columns: usize,
    /// Largest `n` reached in any column.
    pub max_n: usize,
    /// Number of level integrals evaluated.
    pub levels: usize,
}

/// Scaled three-term state shared by both Laguerre columns.
#[derive(Clone, Copy)]
struct Scaled {
    prev: f64,
    cur: f64,
    log_scale: f64,
    factor: f64,
}

impl Scaled {
    fn seed(log_value: f64) -> Self {
        Self {
            prev: 0.0,
            cur: 1.0,
            log_scale: log_value,
            factor: log_value.exp(),
        }
    }

    #[inline]
    fn value(&self) -> f64 {
        self.cur * self.factor
    }

    /// `next = (diag·cur − off·prev)·inv_r`
    #[inline]
    fn step(&mut self, diag: f64, off: f64, inv_r: f64) {
        let next = (diag * self.cur - off * self.prev) * inv_r;
        self.prev = self.cur;
        self.cur = next;
        let big = self.cur.abs().max(self.prev.abs());
        if big > RESCALE_HIGH || (big < RESCALE_LOW && big > 0.0) {
            self.prev /= big;
            self.cur /= big;
            self.log_scale += big.ln();
            self.factor = self.log_scale.exp();
        }
    }
}

/// Field values at fixed `(τ, x³)` with a cache of level integrals.
pub struct FieldEvaluator {
    state: MagneticCoherentState,
    tau: f64,
    x3: f64,
    quad: QuadratureSpec,
    series: SeriesSpec,
    prefactor: f64,
    levels: Vec<Option<Complex64>>,
    computed: usize,
    /// Converged node count of the last level integral.
    last_nodes: usize,
}

impl FieldEvaluator {
    pub fn new(
        state: &MagneticCoherentState,
        tau: f64,
        x3: f64,
        norm: &NormalizationConvention,
        series: &SeriesSpec,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        series.validate()?;
        let prefactor = (state.lambda_field * (2.0 / PI).sqrt() / state.lambda3).sqrt()
            / (2.0 * PI * norm.kappa_times_one_plus_eps_a.sqrt());
        Ok(Self {
            state: *state,
            tau,
            x3,
            quad: *quad,
            series: *series,
            prefactor,
            levels: Vec::new(),
            computed: 0,
            last_nodes: 2 * quad.initial_nodes,
        })
    }

    /// Level integral `I_N`, computed on first use.
    fn level(&mut self, n: usize) -> Result<Complex64> {
        if n >= self.levels.len() {
            self.levels.resize((n + 1).max(2 * self.levels.len()), None);
        }
        if let Some(z) = self.levels[n] {
            return Ok(z);
        }
        let st = self.state;
        let w = GaussianWeight::amplitude(st.p3_mean, st.lambda3)?;
        let (tau, x3) = (self.tau, self.x3);
        let m = st.lambda_field * (2 * n + 1) as f64 + 1.0;
        // neighbouring levels have nearly the same integrand, so doubling
        // starts one step below the count that converged last time
        let spec = QuadratureSpec {
            initial_nodes: (self.last_nodes / 2).clamp(8, self.quad.initial_nodes),
            ..self.quad
        };
        let est = integrate_gaussian(
            w,
            |k| {
                let d = m + k * k;
                let root = d.sqrt();
                Complex64::from_polar(1.0 / root.sqrt(), k * x3 - tau * root)
            },
            &spec,
        );
        self.last_nodes = est.nodes;
        let z = est.into_result()?;
        self.levels[n] = Some(z);
        self.computed += 1;
        Ok(z)
    }

    /// `ψ` at each `(ρ, φ)` in `points`.
    pub fn evaluate(&mut self, points: &[(f64, f64)]) -> Result<(Vec<Complex64>, FieldSeriesReport)> {
        for &(rho, phi) in points {
            if !(rho >= 0.0) || !phi.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "field point needs rho >= 0 and finite phi, got ({rho}, {phi})"
                )));
            }
        }
        let st = self.state;
        let k = series_constants(&st);
        let (s, c, ln_pref) = (k.s, k.su, k.ln_pref);
        let lam = st.lambda_field;
        let vs: Vec<f64> = points.iter().map(|(r, _)| 0.5 * lam * r * r).collect();
        let np = points.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); np];
        let n_tol = self.series.tail_tol * (1.0 - s * s).max(1e-300);
        let col_tol = self.series.tail_tol.sqrt();
        let mut below = 0usize;
        let mut report = FieldSeriesReport {
            columns: 0,
            max_n: 0,
            levels: 0,
        };
        let mut best_bound = 0.0f64;

        for alpha in 0..=self.series.ell_max {
            if alpha > 0 && c == 0.0 {
                break;
            }
            let af = alpha as f64;
            let lnfa = ln_factorial(alpha as u64);
            let c_term = if alpha == 0 { 0.0 } else { af * c.ln() };
            let mut a = Scaled::seed(0.5 * (ln_pref + c_term - lnfa));
            let mut bs: Vec<Option<Scaled>> = vs
                .iter()
                .map(|&v| {
                    if alpha > 0 && v == 0.0 {
                        None
                    } else {
                        let v_term = if alpha == 0 { 0.0 } else { af * v.ln() };
                        Some(Scaled::seed(0.5 * (-v + v_term - lnfa)))
                    }
                })
                .collect();
            if bs.iter().all(Option::is_none) {
                break;
            }
            let ia = Complex64::i().powu(alpha as u32);
            let plus: Vec<Complex64> = points
                .iter()
                .map(|(_, phi)| ia * Complex64::from_polar(1.0, af * phi))
                .collect();
            let minus: Vec<Complex64> = points
                .iter()
                .map(|(_, phi)| ia * Complex64::from_polar(1.0, -af * phi))
                .collect();
            let mut bounds = vec![0.0f64; np];
            let mut col_peak = 0.0f64;
            let mut past_peak = false;
            let mut run = 0usize;
            let mut run_start = 0.0f64;
            let mut r_prev = 0.0f64;
            let mut n = 0usize;
            loop {
                let av = a.value();
                let a2 = av * av;
                if av.abs() >= SKIP {
                    let i_plus = self.level(n)?;
                    let i_minus = if alpha > 0 { self.level(n + alpha)? } else { i_plus };
                    let sign = if n % 2 == 0 { av } else { -av };
                    let mag = i_plus.norm() + if alpha > 0 { i_minus.norm() } else { 0.0 };
                    for (p, b) in bs.iter().enumerate() {
                        if let Some(b) = b {
                            let t = sign * b.value();
                            let mut z = plus[p] * i_plus;
                            if alpha > 0 {
                                z += minus[p] * i_minus;
                            }
                            acc[p] += z * t;
                            bounds[p] += t.abs() * mag;
                        }
                    }
                }
                if a2 > col_peak {
                    col_peak = a2;
                    run = 0;
                } else if a2 < col_peak {
                    past_peak = true;
                }
                if past_peak && a2 < n_tol {
                    if run == 0 {
                        run_start = a2;
                    }
                    run += 1;
                    if run >= COLUMN_RUN && a2 <= run_start {
                        break;
                    }
                } else {
                    run = 0;
                }
                if n >= self.series.n_max {
                    return Err(Error::SeriesNonConvergence(format!(
                        "field column |l| = {alpha} still significant at n_max = {}",
                        self.series.n_max
                    )));
                }
                // advance both recurrences to n + 1
                n += 1;
                let nf = n as f64;
                let r = (nf * (nf + af)).sqrt();
                let inv_r = 1.0 / r;
                let diag = 2.0 * nf - 1.0 + af;
                a.step(diag * s - c, s * s * r_prev, inv_r);
                for (b, v) in bs.iter_mut().zip(&vs) {
                    if let Some(b) = b {
                        b.step(diag - v, r_prev, inv_r);
                    }
                }
                r_prev = r;
            }
            report.columns += 1;
            report.max_n = report.max_n.max(n);

            let field_scale = acc.iter().fold(0.0f64, |m, z| m.max(z.norm()));
            let col_bound = bounds.iter().fold(0.0f64, |m, b| m.max(*b));
            best_bound = best_bound.max(col_bound);
            if col_bound <= col_tol * field_scale.max(1e-300) && col_bound <= best_bound {
                below += 1;
                if below >= self.series.consecutive_below {
                    break;
                }
            } else {
                below = 0;
            }
            if alpha == self.series.ell_max {
                return Err(Error::SeriesNonConvergence(format!(
                    "field columns still significant at ell_max = {}",
                    self.series.ell_max
                )));
            }
        }
        report.levels = self.computed;
        let pre = self.prefactor;
        Ok((acc.into_iter().map(|z| z * pre).collect(), report))
    }
}

/// `ψ(τ; ρ, φ, x³)` at a single point.
#[allow(clippy::too_many_arguments)]
pub fn kg_field(
    st: &MagneticCoherentState,
    tau: f64,
    rho: f64,
    phi: f64,
    x3: f64,
    norm: &NormalizationConvention,
    series: &SeriesSpec,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let mut ev = FieldEvaluator::new(st, tau, x3, norm, series, quad)?;
    Ok(ev.evaluate(&[(rho, phi)])?.0[0])
}

/// `ψ` on many `(ρ, φ)` points sharing `(τ, x³)`.
pub fn kg_field_batch(
    st: &MagneticCoherentState,
    tau: f64,
    x3: f64,
    points: &[(f64, f64)],
    norm: &NormalizationConvention,
    series: &SeriesSpec,
    quad: &QuadratureSpec,
) -> Result<(Vec<Complex64>, FieldSeriesReport)> {
    FieldEvaluator::new(st, tau, x3, norm, series, quad)?.evaluate(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_axis_terms_vanish_on_axis() {
        let st = MagneticCoherentState::new(0.1, 0.25, 0.25, 0.6, 0.8).unwrap();
        let (vals, rep) = kg_field_batch(
            &st,
            0.0,
            0.0,
            &[(0.0, 0.0)],
            &NormalizationConvention::default(),
            &SeriesSpec::default(),
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(rep.columns, 1);
        assert!(vals[0].norm() > 0.0);
    }

    #[test]
    fn slow_heavy_packet_is_gaussian() {
        // nonrelativistic widths, no momentum: |ψ|² ≈ λ⊥²λ₃/(2π)^{3/2} e^{−λ⊥²ρ²/2 − λ₃²x₃²/2}
        let (lp, l3) = (0.05, 0.05);
        let st = MagneticCoherentState::new(1e-3, lp, l3, 0.0, 0.0).unwrap();
        let norm = NormalizationConvention::default();
        let peak = lp * lp * l3 / (2.0 * PI).powf(1.5);
        for (rho, x3) in [(0.0, 0.0), (10.0, 0.0), (0.0, 15.0), (20.0, 10.0)] {
            let z = kg_field(&st, 0.0, rho, 0.3, x3, &norm, &SeriesSpec::default(), &QuadratureSpec::default())
                .unwrap();
            let expect = peak * (-(lp * rho).powi(2) / 2.0 - (l3 * x3).powi(2) / 2.0).exp();
            assert!((z.norm_sqr() - expect).abs() < 2e-3 * peak, "{rho} {x3}");
        }
    }
}
