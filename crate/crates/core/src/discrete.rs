//! Exact two-sided discrete tests and their null p-value cdfs.
//!
//! Two-sided p-values use the minimum-likelihood rule: sum the probabilities
//! of all outcomes no more likely than the observed one. Probabilities are
//! exact integer ratios while the binomial coefficients fit in `u128`, and
//! log-space with a relative tie tolerance of `1e-12` beyond that.

use serde::{Deserialize, Serialize};

use crate::cdf::StepCdf;
use crate::error::{Error, Result};
use crate::family::sort_dedup;

/// Largest population size handled with exact integer weights.
const EXACT_LIMIT: u64 = 120;

/// Relative tolerance for grouping likelihood ties in log space.
const TIE_TOL: f64 = 1e-12;

/// A p-value with its null cdf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteTest {
    pub pvalue: f64,
    pub cdf: StepCdf,
}

/// 2x2 table: group one successes/failures, group two successes/failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl Table2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Table2x2 { a, b, c, d }
    }
}

fn binomial_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
    }
    acc
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|j| (j as f64).ln()).sum()
}

/// Minimum-likelihood p-values of every outcome from its weight.
///
/// `exact` weights are compared exactly; `log` weights with a relative tolerance.
enum Weights {
    Exact(Vec<u128>),
    Log(Vec<f64>),
}

fn two_sided_pvalues(weights: &Weights) -> Vec<f64> {
    match weights {
        Weights::Exact(w) => {
            let total: u128 = w.iter().sum();
            w.iter()
                .map(|&wx| {
                    let s: u128 = w.iter().filter(|&&wy| wy <= wx).sum();
                    if s == total {
                        1.0
                    } else {
                        s as f64 / total as f64
                    }
                })
                .collect()
        }
        Weights::Log(lw) => {
            let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let probs: Vec<f64> = lw.iter().map(|&l| (l - max).exp()).collect();
            let total: f64 = probs.iter().sum();
            lw.iter()
                .map(|&lx| {
                    let s: f64 = lw
                        .iter()
                        .zip(&probs)
                        .filter(|(&ly, _)| ly <= lx + TIE_TOL * lx.abs().max(1.0))
                        .map(|(_, &p)| p)
                        .sum();
                    (s / total).min(1.0)
                })
                .collect()
        }
    }
}

/// Distribution of the two-sided p-value: support of achievable values with
/// `F(s) = P(p <= s)`, computed from the outcome probabilities.
fn null_cdf(pvalues: &[f64]) -> Result<StepCdf> {
    let mut support = pvalues.to_vec();
    sort_dedup(&mut support);
    // the minimum-likelihood p-value satisfies P(p <= s) = s for achievable s
    StepCdf::identity_on(support)
}

/// Exact two-sided binomial test of `x` successes in `n` trials against `1/2`.
pub fn binom_test(n: u64, x: u64) -> Result<DiscreteTest> {
    if x > n {
        return Err(Error::invalid("x", format!("{x} exceeds n = {n}")));
    }
    let weights = if n <= EXACT_LIMIT {
        Weights::Exact((0..=n).map(|k| binomial_u128(n, k)).collect())
    } else {
        Weights::Log((0..=n).map(|k| ln_binomial(n, k)).collect())
    };
    let pvalues = two_sided_pvalues(&weights);
    Ok(DiscreteTest { pvalue: pvalues[x as usize], cdf: null_cdf(&pvalues)? })
}

/// Fisher's exact two-sided test conditional on both margins.
///
/// Tables with an empty row or column give `p = 1` with a point mass at 1.
pub fn fisher_test(table: Table2x2) -> Result<DiscreteTest> {
    let Table2x2 { a, b, c, d } = table;
    let r1 = a + b;
    let r2 = c + d;
    let c1 = a + c;
    let c2 = b + d;
    if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
        return Ok(DiscreteTest { pvalue: 1.0, cdf: StepCdf::new(vec![1.0], vec![1.0])? });
    }
    let n = r1 + r2;
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let weights = if n <= EXACT_LIMIT {
        Weights::Exact((lo..=hi).map(|x| binomial_u128(r1, x) * binomial_u128(r2, c1 - x)).collect())
    } else {
        Weights::Log((lo..=hi).map(|x| ln_binomial(r1, x) + ln_binomial(r2, c1 - x)).collect())
    };
    let pvalues = two_sided_pvalues(&weights);
    Ok(DiscreteTest { pvalue: pvalues[(a - lo) as usize], cdf: null_cdf(&pvalues)? })
}

/// Randomized uniformization `F(y-) + u (F(y) - F(y-))`.
pub fn uniformize(y: f64, cdf: &StepCdf, u: f64) -> f64 {
    let lo = cdf.left_limit(y);
    lo + u * (cdf.eval(y) - lo)
}
