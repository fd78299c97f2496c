//! Occupations of Landau levels and the pair weights of the transverse
//! position series.
//!
//! The occupation of `(n, ±ℓ)` is `P = (a_n^{|ℓ|})²`, with `a` the normalized
//! Laguerre amplitude in `(s, c)`. The occupations sum to one, so
//! `1 − ΣP` measures what the truncation has dropped.
//!
//! Terms are generated column by column in `|ℓ|`. A column is closed once
//! it is past its peak and a run of amplitudes is small enough that the
//! `s²`-geometric remainder is negligible. Columns stop once
//! `consecutive_below` of them each carry less than `tail_tol`, their
//! ratios bound the remaining tail geometrically below `tail_tol`, and the
//! bulk of the mass has been collected.

use std::collections::VecDeque;

use serde::Serialize;

use super::{series_constants, MagneticCoherentState, SeriesSpec};
use crate::error::{Error, Result};
use crate::specfun::LaguerreAmplitudes;

/// Level-resolved weights of a state.
#[derive(Debug, Clone, Serialize)]
pub struct LandauDistribution {
    /// Occupation of level `N` (multiplier `2N + 1`).
    pub level_prob: Vec<f64>,
    /// Transverse pair weight by level, with the second sum attached to `Θ_{n0}`.
    pub pair_weight: Vec<f64>,
    /// Same with the second sum attached to `Θ_{nℓ}`.
    pub pair_weight_symmetric: Vec<f64>,
    /// `ΣP` over all generated `(n, ℓ ∈ ℤ)`.
    pub total_mass: f64,
    /// `Σ ℓ P` accumulated separately for `+ℓ` and `−ℓ` and subtracted.
    pub ell_moment: f64,
    /// `Σ (2ℓ) P` over `ℓ > 0` minus the same over `ℓ < 0`, the
    /// difference between `R_gc²` and `R²` in units of `1/Λ`.
    pub gc_shift: f64,
    /// Number of `|ℓ|` columns generated.
    pub columns: usize,
    pub tail_bound: f64,
    pub max_n: usize,
    pub max_ell: usize,
}

impl LandauDistribution {
    pub fn levels(&self) -> usize {
        self.level_prob.len()
    }

    /// `Σ_N P_N f(N)` with Neumaier compensation.
    pub fn level_sum(&self, f: impl Fn(usize) -> f64) -> f64 {
        neumaier(
            self.level_prob
                .iter()
                .enumerate()
                .filter(|(_, p)| **p != 0.0)
                .map(|(n, p)| p * f(n)),
        )
    }
}

pub(crate) fn neumaier(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn bump(v: &mut Vec<f64>, idx: usize, x: f64) {
    if idx >= v.len() {
        v.resize(idx + 1, 0.0);
    }
    v[idx] += x;
}

/// Consecutive negligible amplitudes needed before a column is closed.
const COLUMN_RUN: usize = 16;

pub fn landau_distribution(
    st: &MagneticCoherentState,
    spec: &SeriesSpec,
) -> Result<LandauDistribution> {
    spec.validate()?;
    let k = series_constants(st);
    let (s, c, ln_pref) = (k.s, k.su, k.ln_pref);
    let window = spec.consecutive_below;
    // a single amplitude this small, with a geometric tail of ratio s², leaves
    // less than tail_tol behind in its column
    let n_tol = spec.tail_tol * (1.0 - s * s).max(1e-300) * 1e-3;

    let mut level_prob = Vec::new();
    let mut pair = Vec::new();
    let mut pair_sym = Vec::new();
    let mut mass = Vec::new();
    let mut ell_pos = Vec::new();
    let mut ell_neg = Vec::new();
    let mut history: VecDeque<f64> = VecDeque::with_capacity(window + 2);
    let mut prev_col: Vec<f64> = Vec::new();
    let mut cur_col: Vec<f64> = Vec::new();
    let mut max_n = 0usize;
    let mut max_ell = 0usize;

    for ell in 0..=spec.ell_max {
        let mut col = LaguerreAmplitudes::new(ell, s, c, ln_pref);
        cur_col.clear();
        let mut col_mass = 0.0;
        if !col.is_zero() {
            let mut peak = 0.0f64;
            let mut past_peak = false;
            let mut run = 0usize;
            let mut run_start = 0.0f64;
            loop {
                let n = col.n();
                let a = col.value();
                cur_col.push(a);
                let p = a * a;
                if p != 0.0 {
                    max_n = max_n.max(n);
                    max_ell = max_ell.max(ell);
                    bump(&mut level_prob, n, p);
                    if ell > 0 {
                        bump(&mut level_prob, n + ell, p);
                        let lf = ell as f64;
                        ell_pos.push(lf * p);
                        ell_neg.push(lf * p);
                        mass.push(2.0 * p);
                        col_mass += 2.0 * p;
                    } else {
                        mass.push(p);
                        col_mass += p;
                    }
                    if ell >= 1 {
                        if let Some(&left) = prev_col.get(n) {
                            // a_n^{ℓ−1} a_n^{ℓ} √(n+ℓ) couples levels n+ℓ−1 and n+ℓ
                            let w = left * a * ((n + ell) as f64).sqrt();
                            bump(&mut pair, n + ell - 1, w);
                            bump(&mut pair_sym, n + ell - 1, w);
                        }
                        if let Some(&left) = prev_col.get(n + 1) {
                            // a_{n+1}^{ℓ−1} a_n^{ℓ} √(n+1) couples levels n and n+1
                            let w = left * a * ((n + 1) as f64).sqrt();
                            bump(&mut pair, n, -w);
                            bump(&mut pair_sym, n + ell - 1, -w);
                        }
                    }
                }
                if p > peak {
                    peak = p;
                    run = 0;
                } else if p < peak {
                    past_peak = true;
                }
                if past_peak && p < n_tol {
                    if run == 0 {
                        run_start = p;
                    }
                    run += 1;
                    if run >= COLUMN_RUN && p <= run_start {
                        break;
                    }
                } else {
                    run = 0;
                }
                if n >= spec.n_max {
                    return Err(Error::SeriesNonConvergence(format!(
                        "column l = {ell} still significant at n_max = {}",
                        spec.n_max
                    )));
                }
                col.advance();
            }
        }
        std::mem::swap(&mut prev_col, &mut cur_col);

        history.push_back(col_mass);
        if history.len() > window + 1 {
            history.pop_front();
        }
        if history.len() == window + 1 {
            let recent: Vec<f64> = history.iter().copied().collect();
            if recent[1..].iter().all(|d| *d < spec.tail_tol) {
                let mut q = 0.0f64;
                for w in recent.windows(2) {
                    if w[0] > 0.0 {
                        q = q.max(w[1] / w[0]);
                    } else if w[1] > 0.0 {
                        q = f64::INFINITY;
                    }
                }
                let last = recent[window];
                let tail = if last == 0.0 {
                    0.0
                } else if q < 1.0 {
                    last * q / (1.0 - q)
                } else {
                    f64::INFINITY
                };
                if tail < spec.tail_tol {
                    let total = neumaier(mass.iter().copied());
                    if (1.0 - total).abs() < 1e-6 {
                        return Ok(LandauDistribution {
                            level_prob,
                            pair_weight: pair,
                            pair_weight_symmetric: pair_sym,
                            total_mass: total,
                            ell_moment: neumaier(ell_pos.iter().copied())
                                - neumaier(ell_neg.iter().copied()),
                            gc_shift: 2.0
                                * (neumaier(ell_pos.iter().copied())
                                    - neumaier(ell_neg.iter().copied())),
                            columns: ell + 1,
                            tail_bound: tail,
                            max_n,
                            max_ell,
                        });
                    }
                    if total > 0.0 {
                        return Err(Error::SeriesNonConvergence(format!(
                            "tail is negligible after {} columns but the occupations sum to {total:.12}",
                            ell + 1
                        )));
                    }
                }
            }
        }
    }
    Err(Error::SeriesNonConvergence(format!(
        "columns still significant at ell_max = {}",
        spec.ell_max
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn occupations_sum_to_one() {
        for (lam, lp, p1) in [(0.01, 0.1, 1.2), (0.01, 0.5, 1.2), (0.1, 0.25, 3.0), (0.3, 0.2, 0.0)] {
            let st = MagneticCoherentState::new(lam, lp, 0.5, p1, 1.0).unwrap();
            let d = landau_distribution(&st, &SeriesSpec::default()).unwrap();
            assert!((d.total_mass - 1.0).abs() < 1e-11, "{lam} {lp} {p1}: {}", d.total_mass);
            assert_eq!(d.ell_moment, 0.0);
            assert!(d.tail_bound < 1e-12);
        }
    }

    #[test]
    fn ground_state_at_rest() {
        // matched width, no transverse momentum: only (0, 0) is occupied
        let st = MagneticCoherentState::new(0.04, 0.2, 0.5, 0.0, 0.0).unwrap();
        let d = landau_distribution(&st, &SeriesSpec::default()).unwrap();
        assert!((d.level_prob[0] - 1.0).abs() < 1e-15);
        assert!(d.level_prob.iter().skip(1).all(|p| *p == 0.0));
    }

    #[test]
    fn transverse_weights_cancel_offset_at_start() {
        // x² at τ = 0 is −p₁/Λ + √(2/Λ) ΣW = 0
        let st = MagneticCoherentState::new(0.05, 0.3, 0.5, 0.9, 0.0).unwrap();
        let d = landau_distribution(&st, &SeriesSpec::default()).unwrap();
        let sum: f64 = d.pair_weight.iter().sum();
        let x2 = -st.p1_mean / st.lambda_field + (2.0 / st.lambda_field).sqrt() * sum;
        assert!(x2.abs() < 1e-10 * st.classical_radius(), "{x2}");
        let sym: f64 = d.pair_weight_symmetric.iter().sum();
        assert!((sym - sum).abs() < 1e-12);
    }

    #[test]
    fn caps_are_reported() {
        let st = MagneticCoherentState::new(0.01, 0.5, 0.5, 1.2, 1.0).unwrap();
        let spec = SeriesSpec {
            n_max: 40,
            ell_max: 40,
            ..Default::default()
        };
        assert!(matches!(
            landau_distribution(&st, &spec),
            Err(Error::SeriesNonConvergence(_))
        ));
    }
}
