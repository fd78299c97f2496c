//! Gauss-Hermite quadrature for Gaussian-weighted integrals on the real line.
//!
//! Every integral in the crate has the shape `∫ g(p) exp(−a (p − p₀)²) dp`.
//! The substitution `p = p₀ + t/√a` turns it into a Gauss-Hermite sum, and
//! the node count is doubled until two successive estimates agree.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest rule size accepted by [`hermite_nodes`].
pub const MAX_SUPPORTED_NODES: usize = 1 << 16;

/// Weights below this are dropped from a rule; they cannot change any sum.
const NEGLIGIBLE_WEIGHT: f64 = 1e-300;

/// Convergence controls for [`integrate_gaussian`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub initial_nodes: usize,
    pub max_nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            initial_nodes: 64,
            max_nodes: 8192,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
        }
    }
}

impl QuadratureSpec {
    /// Same node schedule with a different relative tolerance.
    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.initial_nodes == 0 || self.initial_nodes > self.max_nodes {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= initial_nodes <= max_nodes, got {} and {}",
                self.initial_nodes, self.max_nodes
            )));
        }
        if self.max_nodes > MAX_SUPPORTED_NODES {
            return Err(Error::InvalidParameter(format!(
                "max_nodes {} exceeds {}",
                self.max_nodes, MAX_SUPPORTED_NODES
            )));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "quadrature tolerances must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The weight `exp(−a (p − center)²)` with `a = inv_width_sq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWeight {
    pub center: f64,
    pub inv_width_sq: f64,
}

impl GaussianWeight {
    pub fn new(center: f64, inv_width_sq: f64) -> Result<Self> {
        if !(inv_width_sq > 0.0) || !inv_width_sq.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Gaussian weight needs a finite center and a > 0, got center {center}, a {inv_width_sq}"
            )));
        }
        Ok(Self {
            center,
            inv_width_sq,
        })
    }

    /// Weight `exp(−2(p − center)²/λ²)` used for expectation values.
    pub fn expectation(center: f64, lambda: f64) -> Result<Self> {
        Self::new(center, 2.0 / (lambda * lambda))
    }

    /// Weight `exp(−(p − center)²/λ²)` used for amplitudes.
    pub fn amplitude(center: f64, lambda: f64) -> Result<Self> {
        Self::new(center, 1.0 / (lambda * lambda))
    }

    /// `√(a/π)`, the inverse of the weight's total mass.
    pub fn normalizer(&self) -> f64 {
        (self.inv_width_sq / PI).sqrt()
    }
}

/// An n-point Gauss-Hermite rule for the weight `exp(−t²)`.
///
/// Nodes whose weight underflows below 1e-300 are left out, so for large
/// `n` the stored vectors are shorter than `n`.
#[derive(Debug, Clone)]
pub struct HermiteRule {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Values that can be accumulated by the quadrature.
pub trait QuadValue: Copy + Send + Sync {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
    fn scale(self, f: f64) -> Self;
    /// Norm used for the convergence test.
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
    fn scale(self, f: f64) -> Self {
        self * f
    }
    fn magnitude(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

impl<const N: usize> QuadValue for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    fn add(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
        self
    }
    fn sub(mut self, other: Self) -> Self {
        for (a, b) in self.iter_mut().zip(other) {
            *a -= b;
        }
        self
    }
    fn scale(mut self, f: f64) -> Self {
        for a in self.iter_mut() {
            *a *= f;
        }
        self
    }
    fn magnitude(&self) -> f64 {
        self.iter().fold(0.0, |m, a| m.max(a.abs()))
    }
}

/// Result of [`integrate_gaussian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    /// Difference between the last two estimates.
    pub error: f64,
    /// Size of the last rule used.
    pub nodes: usize,
    pub converged: bool,
}

impl<T: QuadValue> Estimate<T> {
    /// The value, or a non-convergence error carrying it.
    pub fn into_result(self) -> Result<T> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::QuadratureNonConvergence {
                value: self.value.magnitude(),
                error: self.error,
                nodes: self.nodes,
            })
        }
    }
}

fn rule_cache() -> &'static RwLock<HashMap<usize, Arc<HermiteRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<HermiteRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Cached n-point rule.
pub fn hermite_rule(n: usize) -> Result<Arc<HermiteRule>> {
    if n == 0 || n > MAX_SUPPORTED_NODES {
        return Err(Error::InvalidParameter(format!(
            "Gauss-Hermite rule size {n} outside 1..={MAX_SUPPORTED_NODES}"
        )));
    }
    if let Some(rule) = rule_cache().read().expect("rule cache poisoned").get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(compute_rule(n));
    let mut cache = rule_cache().write().expect("rule cache poisoned");
    Ok(Arc::clone(cache.entry(n).or_insert(rule)))
}

/// Nodes and weights of the n-point Gauss-Hermite rule, in increasing node order.
pub fn hermite_nodes(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = hermite_rule(n)?;
    Ok((rule.nodes.clone(), rule.weights.clone()))
}

/// Normalized Hermite recurrence without the Gaussian factor:
/// q₀ = 1, q₁ = √2 t, q_k = √(2/k) t q_{k−1} − √((k−1)/k) q_{k−2}.
/// Returns (q_n, q_{n−1}).
fn hermite_q(n: usize, t: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 1..=n {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * t * cur - ((kf - 1.0) / kf).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Root of q_n in a bracket with a sign change, by safeguarded Newton.
/// q_n' = √(2n) q_{n−1}.
fn refine_root(n: usize, mut lo: f64, mut hi: f64) -> f64 {
    let scale = (2.0 * n as f64).sqrt();
    let (f_lo, _) = hermite_q(n, lo);
    let lo_sign = f_lo.signum();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..100 {
        let (q, qm) = hermite_q(n, x);
        if q == 0.0 {
            return x;
        }
        if q.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let dq = scale * qm;
        let mut next = x - q / dq;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-300);
        x = next;
        if done || hi - lo <= 4.0 * f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

fn weight_at(n: usize, t: f64) -> f64 {
    let (_, qm) = hermite_q(n, t);
    PI.sqrt() / (n as f64 * qm * qm)
}

/// Positive roots are found outward from the origin. The step is a quarter
/// of the last root spacing; spacings grow with |t|, so no root is skipped.
fn compute_rule(n: usize) -> HermiteRule {
    let mut positive: Vec<(f64, f64)> = Vec::with_capacity(n / 2);
    let wanted = n / 2;
    let mut spacing = PI / (2.0 * n as f64 + 1.0).sqrt();
    let mut last = 0.0;
    let mut left = 0.0;
    let mut left_val = hermite_q(n, 0.0).0;
    if n % 2 == 1 {
        left = 0.5 * spacing * 1e-3;
        left_val = hermite_q(n, left).0;
    }
    while positive.len() < wanted {
        let step = 0.25 * spacing;
        let right = left + step;
        let right_val = hermite_q(n, right).0;
        if right_val == 0.0 || right_val.signum() != left_val.signum() {
            let root = if right_val == 0.0 {
                right
            } else {
                refine_root(n, left, right)
            };
            let w = weight_at(n, root);
            if !(w >= NEGLIGIBLE_WEIGHT) || !w.is_finite() {
                break;
            }
            if !positive.is_empty() || n % 2 == 1 {
                spacing = root - last;
            } else {
                spacing = 2.0 * root;
            }
            last = root;
            positive.push((root, w));
            left = root + 0.05 * spacing;
            left_val = hermite_q(n, left).0;
        } else {
            left = right;
            left_val = right_val;
        }
    }
    let mut nodes = Vec::with_capacity(2 * positive.len() + 1);
    let mut weights = Vec::with_capacity(2 * positive.len() + 1);
    for &(t, w) in positive.iter().rev() {
        nodes.push(-t);
        weights.push(w);
    }
    if n % 2 == 1 {
        nodes.push(0.0);
        weights.push(weight_at(n, 0.0));
    }
    for &(t, w) in &positive {
        nodes.push(t);
        weights.push(w);
    }
    HermiteRule { n, nodes, weights }
}

/// `∫ g(p) w(p) dp` with a single fixed rule.
pub fn apply_rule<T: QuadValue, F: Fn(f64) -> T>(
    rule: &HermiteRule,
    w: GaussianWeight,
    g: &F,
) -> T {
    let inv_sqrt_a = 1.0 / w.inv_width_sq.sqrt();
    let mut acc = T::zero();
    for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
        acc = acc.add(g(w.center + t * inv_sqrt_a).scale(wt));
    }
    acc.scale(inv_sqrt_a)
}

/// `∫ g(p) exp(−a (p − p₀)²) dp`, doubling the node count from
/// `spec.initial_nodes` until successive estimates differ by less than
/// `max(rel_tol·|value|, abs_tol)`.
///
/// With `initial_nodes == max_nodes` a single rule is applied and the
/// result is reported as converged with a zero error estimate.
pub fn integrate_gaussian<T: QuadValue, F: Fn(f64) -> T>(
    w: GaussianWeight,
    g: F,
    spec: &QuadratureSpec,
) -> Estimate<T> {
    let mut n = spec.initial_nodes.max(1);
    let first = hermite_rule(n).expect("validated rule size");
    let mut prev = apply_rule(&first, w, &g);
    if n >= spec.max_nodes {
        return Estimate {
            value: prev,
            error: 0.0,
            nodes: n,
            converged: true,
        };
    }
    loop {
        n = (2 * n).min(spec.max_nodes);
        let rule = hermite_rule(n).expect("validated rule size");
        let cur = apply_rule(&rule, w, &g);
        let diff = cur.sub(prev).magnitude();
        let target = (spec.rel_tol * cur.magnitude()).max(spec.abs_tol);
        if diff <= target {
            return Estimate {
                value: cur,
                error: diff,
                nodes: n,
                converged: true,
            };
        }
        if n >= spec.max_nodes {
            return Estimate {
                value: cur,
                error: diff,
                nodes: n,
                converged: false,
            };
        }
        prev = cur;
    }
}

/// Normalized average `∫ g w / ∫ w`.
pub fn gaussian_average<T: QuadValue, F: Fn(f64) -> T>(
    w: GaussianWeight,
    g: F,
    spec: &QuadratureSpec,
) -> Result<T> {
    integrate_gaussian(w, g, spec)
        .into_result()
        .map(|v| v.scale(w.normalizer()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_and_two_point_rules() {
        let (x, w) = hermite_nodes(1).unwrap();
        assert_eq!(x, vec![0.0]);
        assert!((w[0] - PI.sqrt()).abs() < 1e-15);
        let (x, w) = hermite_nodes(2).unwrap();
        let r = 0.5f64.sqrt();
        assert!((x[0] + r).abs() < 1e-15 && (x[1] - r).abs() < 1e-15);
        assert!((w[0] - PI.sqrt() / 2.0).abs() < 1e-15);
        assert!((w[1] - PI.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rules_have_correct_mass_and_second_moment() {
        for n in [3, 5, 10, 17, 64, 128, 256, 1024, 8192] {
            let rule = hermite_rule(n).unwrap();
            let m0: f64 = rule.weights.iter().sum();
            let m2: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(t, w)| t * t * w)
                .sum();
            assert!((m0 / PI.sqrt() - 1.0).abs() < 1e-13, "n={n} m0={m0}");
            assert!((m2 / (PI.sqrt() / 2.0) - 1.0).abs() < 1e-12, "n={n} m2={m2}");
            assert!(rule.nodes.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn small_rules_keep_all_nodes() {
        for n in [4, 20, 64, 200] {
            assert_eq!(hermite_rule(n).unwrap().nodes.len(), n);
        }
    }

    #[test]
    fn rule_integrates_high_moments_exactly() {
        // ∫ t⁸ e^{−t²} = 105√π/16
        let rule = hermite_rule(5).unwrap();
        let m8: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(t, w)| t.powi(8) * w)
            .sum();
        assert!((m8 - 105.0 * PI.sqrt() / 16.0).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_sizes_are_rejected() {
        assert!(hermite_nodes(0).is_err());
        assert!(hermite_nodes(MAX_SUPPORTED_NODES + 1).is_err());
    }

    #[test]
    fn constant_integrand() {
        let w = GaussianWeight::new(0.0, 1.0).unwrap();
        let est = integrate_gaussian(w, |_| 1.0, &QuadratureSpec::default());
        assert!(est.converged);
        assert!((est.value - PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn shifted_second_moment() {
        let lambda = 0.7;
        let p0 = 1.3;
        let w = GaussianWeight::expectation(p0, lambda).unwrap();
        let m = gaussian_average(w, |p| p * p, &QuadratureSpec::default()).unwrap();
        assert!((m - (p0 * p0 + lambda * lambda / 4.0)).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_integrand_matches_closed_form() {
        // ∫ cos(ωp) e^{−p²} dp = √π e^{−ω²/4}
        let w = GaussianWeight::new(0.0, 1.0).unwrap();
        for omega in [0.0, 3.0, 12.0] {
            let est = integrate_gaussian(w, |p| (omega * p).cos(), &QuadratureSpec::default());
            let exact = PI.sqrt() * (-omega * omega / 4.0).exp();
            assert!((est.value - exact).abs() < 1e-13, "ω={omega}");
        }
    }

    #[test]
    fn complex_and_array_values() {
        let w = GaussianWeight::new(0.5, 2.0).unwrap();
        let spec = QuadratureSpec::default();
        let z = integrate_gaussian(w, |p| Complex64::new(0.0, 2.0 * p).exp(), &spec).value;
        let c = integrate_gaussian(w, |p| (2.0 * p).cos(), &spec).value;
        let s = integrate_gaussian(w, |p| (2.0 * p).sin(), &spec).value;
        assert!((z.re - c).abs() < 1e-15 && (z.im - s).abs() < 1e-15);
        let a = integrate_gaussian(w, |p| [(2.0 * p).cos(), (2.0 * p).sin()], &spec).value;
        assert!((a[0] - c).abs() < 1e-15 && (a[1] - s).abs() < 1e-15);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let spec = QuadratureSpec {
            initial_nodes: 4,
            max_nodes: 16,
            ..Default::default()
        };
        let w = GaussianWeight::new(0.0, 1.0).unwrap();
        let est = integrate_gaussian(w, |p| (40.0 * p).cos(), &spec);
        assert!(!est.converged);
        assert!(matches!(
            est.into_result(),
            Err(Error::QuadratureNonConvergence { nodes: 16, .. })
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::default().validate().is_ok());
        let bad = QuadratureSpec {
            initial_nodes: 128,
            max_nodes: 64,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(GaussianWeight::new(0.0, 0.0).is_err());
    }
}
