//! Reference computations shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

pub fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut sum = 0.5 * (f(lo) + f(hi));
    for i in 1..n {
        sum += f(lo + h * i as f64);
    }
    sum * h
}

pub fn binomial(n: u64, k: u64) -> f64 {
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for j in 0..k {
        num *= n - j;
        den *= j + 1;
    }
    (num / den).to_f64().unwrap()
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, j| acc * j)
}

/// `L_n^α(x) = Σ_k (−1)^k C(n+α, n−k) x^k / k!`.
pub fn laguerre_explicit(n: u64, alpha: u64, x: f64) -> f64 {
    (0..=n)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * binomial(n + alpha, n - k) * x.powi(k as i32) / factorial(k).to_f64().unwrap()
        })
        .sum()
}

/// ln of a big integer from its leading 64 bits.
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigUint = x >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * 2f64.ln()
}

/// Positive test integrand with parameters drawn from `rng`, and its
/// Gaussian weight `(center, a)`.
pub fn random_integrand(rng: &mut impl rand::Rng) -> (impl Fn(f64) -> f64, f64, f64) {
    let center: f64 = rng.gen_range(-4.0..4.0);
    let a: f64 = rng.gen_range(0.5..8.0);
    let b: f64 = rng.gen_range(0.0..2.0);
    let d: f64 = rng.gen_range(-2.0..2.0);
    let om: f64 = rng.gen_range(0.0..3.0);
    let ph: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
    let g = move |p: f64| 1.0 + b * (p - d).powi(2) + 0.5 * (om * p + ph).cos() + (1.0 + p * p).sqrt();
    (g, center, a)
}

/// `∫ g(p) exp(−a(p − center)²) dp` by a 10⁶-point trapezoid over ±12 widths.
pub fn gaussian_trapezoid(g: &impl Fn(f64) -> f64, center: f64, a: f64) -> f64 {
    let half = 12.0 / a.sqrt();
    trapezoid(|p| g(p) * (-a * (p - center).powi(2)).exp(), center - half, center + half, 1_000_000)
}
