//! Associated Laguerre polynomials and the normalized Laguerre amplitudes of
//! the Landau series.

/// `ln Γ(n + 1)` for integer `n`, summed exactly for small `n`.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n).map(|j| (j as f64).ln()).sum();
    }
    // Stirling series; relative error far below 1e-16 at n > 256.
    let x = n as f64 + 1.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// `L_n^α(x)` by upward three-term recurrence.
pub fn laguerre(n: usize, alpha: usize, x: f64) -> f64 {
    let a = alpha as f64;
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 1.0 + a - x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + a - x) * cur - (kf - 1.0 + a) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `L_0^α(x) ..= L_{n_max}^α(x)`.
pub fn laguerre_column(n_max: usize, alpha: usize, x: f64) -> Vec<f64> {
    let a = alpha as f64;
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(1.0);
    if n_max == 0 {
        return out;
    }
    out.push(1.0 + a - x);
    for k in 2..=n_max {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0 + a - x) * out[k - 1] - (kf - 1.0 + a) * out[k - 2]) / kf;
        out.push(next);
    }
    out
}

/// `ln(n!/(n+ℓ)!) = −Σ_{j=1..ℓ} ln(n+j)`.
pub fn log_fact_ratio(n: u64, ell: u64) -> f64 {
    if ell <= 4096 {
        -(1..=ell).map(|j| ((n + j) as f64).ln()).sum::<f64>()
    } else {
        ln_factorial(n) - ln_factorial(n + ell)
    }
}

const RESCALE_HIGH: f64 = 1e100;
const RESCALE_LOW: f64 = 1e-100;

/// Column of normalized Laguerre amplitudes at fixed order `α`:
///
/// `a_n = √(P · n!/(n+α)!) · c^{α/2} · sⁿ L_n^α(c/s)`
///
/// where `P = exp(ln_pref)`. Only the products `s` and `c = s·u` enter, so
/// the column stays finite as `s → 0`. Values are kept as a mantissa times
/// `exp(log_scale)` to survive the range of the Landau series.
///
/// With `s = 1`, `c = v`, `ln_pref = −v` the column is the normalized
/// Laguerre function `√(n!/(n+α)!) v^{α/2} e^{−v/2} L_n^α(v)`.
#[derive(Debug, Clone)]
pub struct LaguerreAmplitudes {
    alpha: f64,
    s: f64,
    c: f64,
    n: usize,
    prev: f64,
    cur: f64,
    log_scale: f64,
    factor: f64,
    r_prev: f64,
    zero: bool,
}

impl LaguerreAmplitudes {
    pub fn new(alpha: usize, s: f64, c: f64, ln_pref: f64) -> Self {
        let a = alpha as f64;
        let zero = alpha > 0 && c == 0.0;
        let log_scale = if zero {
            0.0
        } else {
            let c_term = if alpha == 0 { 0.0 } else { a * c.ln() };
            0.5 * (ln_pref + c_term - ln_factorial(alpha as u64))
        };
        Self {
            alpha: a,
            s,
            c,
            n: 0,
            prev: 0.0,
            cur: if zero { 0.0 } else { 1.0 },
            log_scale,
            factor: log_scale.exp(),
            r_prev: 0.0,
            zero,
        }
    }

    /// Current index `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// True if the whole column vanishes (`c = 0`, `α > 0`).
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn mantissa(&self) -> f64 {
        self.cur
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `a_n` as a plain float (underflows to zero when tiny).
    pub fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.cur * self.factor
        }
    }

    /// `ln |a_n|`, `-inf` for an exact zero.
    pub fn ln_abs(&self) -> f64 {
        self.cur.abs().ln() + self.log_scale
    }

    /// Move from `a_n` to `a_{n+1}`.
    pub fn advance(&mut self) {
        if self.zero {
            self.n += 1;
            return;
        }
        let n = (self.n + 1) as f64;
        let r = (n * (n + self.alpha)).sqrt();
        let next = (((2.0 * n - 1.0 + self.alpha) * self.s - self.c) * self.cur
            - self.s * self.s * self.r_prev * self.prev)
            / r;
        self.prev = self.cur;
        self.cur = next;
        self.r_prev = r;
        self.n += 1;
        let big = self.cur.abs().max(self.prev.abs());
        if big > RESCALE_HIGH || (big < RESCALE_LOW && big > 0.0) {
            self.prev /= big;
            self.cur /= big;
            self.log_scale += big.ln();
            self.factor = self.log_scale.exp();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert_eq!(laguerre(0, 7, 3.2), 1.0);
        assert_eq!(laguerre(1, 0, 2.0), -1.0);
        assert!((laguerre(2, 1, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn column_matches_pointwise() {
        let col = laguerre_column(12, 3, 2.7);
        for (n, v) in col.iter().enumerate() {
            assert_eq!(*v, laguerre(n, 3, 2.7));
        }
        assert_eq!(laguerre_column(0, 2, 1.0), vec![1.0]);
    }

    #[test]
    fn value_at_origin_is_binomial() {
        // L_n^α(0) = C(n+α, n)
        assert_eq!(laguerre(5, 3, 0.0), 56.0);
        assert_eq!(laguerre(10, 0, 0.0), 1.0);
        assert_eq!(laguerre(6, 4, 0.0), 210.0);
    }

    #[test]
    fn log_fact_ratio_small_cases() {
        assert_eq!(log_fact_ratio(0, 0), 0.0);
        assert!((log_fact_ratio(3, 2) + 20f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn ln_factorial_branches_agree() {
        let direct: f64 = (2..=300u64).map(|j| (j as f64).ln()).sum();
        assert!((ln_factorial(300) - direct).abs() < 1e-11);
        assert!((log_fact_ratio(10, 5000) - (ln_factorial(10) - ln_factorial(5010))).abs() < 1e-9);
    }

    #[test]
    fn amplitudes_match_direct_formula() {
        let (alpha, s, c) = (3usize, -0.4f64, 0.9f64);
        let ln_pref = -0.7;
        let mut col = LaguerreAmplitudes::new(alpha, s, c, ln_pref);
        for n in 0..25usize {
            let u = c / s;
            let direct = (0.5 * (ln_pref + log_fact_ratio(n as u64, alpha as u64))).exp()
                * c.powf(alpha as f64 / 2.0)
                * s.powi(n as i32)
                * laguerre(n, alpha, u);
            let got = col.value();
            assert!((got - direct).abs() <= 1e-12 * direct.abs().max(1e-12), "n={n}");
            col.advance();
        }
    }

    #[test]
    fn amplitudes_at_zero_s() {
        // s = 0: sⁿ L_n^α(c/s) → (−c)ⁿ/n!
        let c = 1.7f64;
        let mut col = LaguerreAmplitudes::new(2, 0.0, c, 0.0);
        for n in 0..15usize {
            let direct = (0.5 * log_fact_ratio(n as u64, 2)).exp() * c
                * (-c).powi(n as i32)
                / (ln_factorial(n as u64)).exp();
            assert!((col.value() - direct).abs() < 1e-13 * direct.abs().max(1e-300));
            col.advance();
        }
    }

    #[test]
    fn zero_column() {
        let mut col = LaguerreAmplitudes::new(4, 0.3, 0.0, 0.0);
        assert!(col.is_zero());
        col.advance();
        assert_eq!(col.value(), 0.0);
        let col0 = LaguerreAmplitudes::new(0, 0.3, 0.0, 0.0);
        assert!(!col0.is_zero());
        assert_eq!(col0.value(), 1.0);
    }

    #[test]
    fn normalized_functions_stay_bounded() {
        // |√(n!/(n+α)!) v^{α/2} e^{−v/2} L_n^α(v)| ≤ 1
        let v = 3.5;
        for alpha in [0usize, 1, 5, 20] {
            let mut col = LaguerreAmplitudes::new(alpha, 1.0, v, -v);
            for _ in 0..2000 {
                assert!(col.value().abs() <= 1.0 + 1e-12);
                col.advance();
            }
        }
    }
}
