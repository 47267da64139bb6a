//! Bounds for families whose null p-values share the uniform cdf.

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::family::PValueFamily;
use crate::num::{clamp_count, floor_within, left_floor, wellner_h_inverse, within};
use crate::reference::regularize_zetas;

/// Upper level accepted for the Kahale–Rozenholc bound.
pub const KR_ALPHA_MAX: f64 = 0.31;

/// `pi^2 / 6`, the union-bound constant of the Wellner bound.
pub const WELLNER_KAPPA: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HomogeneousMethod {
    Dkw,
    Wellner,
    Simes,
    Kr,
}

/// `sqrt(ln(1/alpha) / 2)`.
pub fn dkw_lambda(alpha: f64) -> f64 {
    ((1.0 / alpha).ln() / 2.0).sqrt()
}

/// `ln(1/delta) / ln(1 + ln(1/delta))`, defined for `delta` in `(0, 0.31)`.
pub fn kr_constant(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < KR_ALPHA_MAX) {
        return Err(Error::InvalidAlpha { alpha: delta, range: "(0, 0.31)" });
    }
    let l = (1.0 / delta).ln();
    Ok(l / (1.0 + l).ln())
}

/// Simes-type critical value `ell_{i:n} = i alpha / n`, with `ell_{0:n} = -1`.
#[inline]
pub fn simes_ell(i: i64, n: usize, alpha: f64) -> f64 {
    if i <= 0 || n == 0 {
        -1.0
    } else {
        (i as f64 * alpha) / n as f64
    }
}

/// Largest `c >= 0` with `ell_{c:n} < p`.
pub fn simes_count_below(p: f64, n: usize, alpha: f64) -> i64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    let mut c = left_floor(n as f64 * p / alpha).max(0);
    while simes_ell(c + 1, n, alpha) < p {
        c += 1;
    }
    while c > 0 && simes_ell(c, n, alpha) >= p {
        c -= 1;
    }
    c
}

/// Pointwise bound `f_n(t)` on the number of nulls at or below `t` among `n`
/// uniform nulls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousBound {
    method: HomogeneousMethod,
    alpha: f64,
    constant: f64,
}

impl HomogeneousBound {
    pub fn new(method: HomogeneousMethod, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let constant = match method {
            HomogeneousMethod::Dkw => dkw_lambda(alpha),
            HomogeneousMethod::Kr => kr_constant(alpha)?,
            HomogeneousMethod::Wellner | HomogeneousMethod::Simes => 0.0,
        };
        Ok(HomogeneousBound { method, alpha, constant })
    }

    pub fn method(&self) -> HomogeneousMethod {
        self.method
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Integer bound on `i_A(t)` for `|A| = n`, before the zero indicator.
    pub fn raw(&self, n: usize, t: f64) -> i64 {
        let nf = n as f64;
        match self.method {
            HomogeneousMethod::Dkw => floor_within(nf * t + nf.sqrt() * self.constant),
            HomogeneousMethod::Kr => left_floor(self.constant * (1.0 + t * nf)),
            HomogeneousMethod::Simes => simes_count_below(t, n, self.alpha),
            HomogeneousMethod::Wellner => {
                if n == 0 || t <= 0.0 {
                    return 0;
                }
                let nt = nf * t;
                let arg = (2.0 * (WELLNER_KAPPA / self.alpha).ln() + 4.0 * (1.0 + (1.0 / t).log2()).ln()) / nt;
                floor_within(nt * wellner_h_inverse(arg))
            }
        }
    }

    /// `1{t > 0} * raw(n, t)`.
    pub fn zeta(&self, n: usize, t: f64) -> i64 {
        if t > 0.0 {
            self.raw(n, t)
        } else {
            0
        }
    }

    /// Local-test acceptance of `i_A(t) = count` for `|A| = n`.
    pub fn accepts(&self, count: usize, n: usize, t: f64) -> bool {
        let nf = n as f64;
        let c = count as f64;
        match self.method {
            HomogeneousMethod::Dkw => within(c, nf * t + nf.sqrt() * self.constant),
            HomogeneousMethod::Kr => c < self.constant * (1.0 + t * nf),
            HomogeneousMethod::Simes | HomogeneousMethod::Wellner => count as i64 <= self.raw(n, t),
        }
    }
}

/// Top-k `zeta_k = 1{p_(k) > 0} f_n(p_(k)) ∧ k ∧ n`, regularized to be nondecreasing.
///
/// `n = m` gives the non-adaptive family; a plug-in `n <= m` gives the adaptive one.
pub fn topk_zeta_homogeneous(
    method: HomogeneousMethod,
    fam: &PValueFamily,
    alpha: f64,
    n: usize,
) -> Result<Vec<usize>> {
    let bound = HomogeneousBound::new(method, alpha)?;
    let sorted = fam.sorted_pvalues();
    let z: Vec<usize> =
        sorted.iter().enumerate().map(|(k, &p)| clamp_count(bound.zeta(n, p), (k + 1).min(n))).collect();
    Ok(regularize_zetas(z))
}

/// Top-k family of the adaptive DKW bound at plug-in `n`:
/// `zeta_k = k ∧ n ∧ floor(n p_(k) + sqrt(n) lambda)`, without the zero indicator.
pub fn dkw_adaptive_zeta(fam: &PValueFamily, alpha: f64, n: usize) -> Result<Vec<usize>> {
    adaptive_functional_zeta(HomogeneousMethod::Dkw, fam, alpha, n)
}

/// Same construction for the Kahale–Rozenholc bound.
pub fn kr_adaptive_zeta(fam: &PValueFamily, alpha: f64, n: usize) -> Result<Vec<usize>> {
    adaptive_functional_zeta(HomogeneousMethod::Kr, fam, alpha, n)
}

fn adaptive_functional_zeta(method: HomogeneousMethod, fam: &PValueFamily, alpha: f64, n: usize) -> Result<Vec<usize>> {
    let bound = HomogeneousBound::new(method, alpha)?;
    let z =
        fam.sorted_pvalues().iter().enumerate().map(|(k, &p)| clamp_count(bound.raw(n, p), (k + 1).min(n))).collect();
    Ok(regularize_zetas(z))
}

/// Plug-in estimate of the number of nulls from the shortcut of the method's
/// local tests. Wellner has no such estimate.
pub fn m0_hat_homogeneous(method: HomogeneousMethod, fam: &PValueFamily, alpha: f64) -> Result<usize> {
    let bound = HomogeneousBound::new(method, alpha)?;
    let m = fam.m();
    let sorted = fam.sorted_pvalues();
    let grid = fam.pvalue_grid();
    let mut best = m;
    let mut idx = 0;
    for &t in &grid {
        while idx < m && sorted[idx] <= t {
            idx += 1;
        }
        let i = idx;
        let b = match method {
            HomogeneousMethod::Dkw => {
                if t >= 1.0 {
                    continue;
                }
                let lam = bound.constant;
                let a = 1.0 - t;
                let x = lam / (2.0 * a) + (lam * lam / (4.0 * a * a) + (m - i) as f64 / a).sqrt();
                polish_accept(clamp_count((x * x).floor() as i64, m), m, |n| dkw_accept_full(&bound, m, i, n, t))
            }
            HomogeneousMethod::Simes => {
                if t == 0.0 {
                    m - i
                } else {
                    // past alpha only t == alpha with every p-value at or below it can reject
                    let cand = if t < alpha { left_floor((m - i) as f64 / (1.0 - t / alpha)) } else { m as i64 };
                    polish_accept(clamp_count(cand, m), m, |n| {
                        n + i <= m || t > simes_ell((n + i) as i64 - m as i64, n, alpha)
                    })
                }
            }
            HomogeneousMethod::Kr => {
                let c = bound.constant;
                if t * c >= 1.0 {
                    continue;
                }
                let cand = left_floor(((m - i) as f64 + c) / (1.0 - t * c));
                polish_accept(clamp_count(cand, m), m, |n| {
                    n + i <= m || (((n + i - m) as f64) < c * (1.0 + t * n as f64))
                })
            }
            HomogeneousMethod::Wellner => {
                return Err(Error::Contract("no plug-in null-count estimate for the Wellner bound".into()))
            }
        };
        best = best.min(b);
    }
    Ok(best)
}

fn dkw_accept_full(bound: &HomogeneousBound, m: usize, i: usize, n: usize, t: f64) -> bool {
    n + i <= m || bound.accepts(n + i - m, n, t)
}

/// Moves `start` to the largest accepted `n` of a downward-closed predicate.
fn polish_accept(start: usize, m: usize, accept: impl Fn(usize) -> bool) -> usize {
    let mut n = start.min(m);
    while n < m && accept(n + 1) {
        n += 1;
    }
    while n > 0 && !accept(n) {
        n -= 1;
    }
    n
}

/// Thresholds of the homogeneous k-FWER reference families.
///
/// `Simes` gives `alpha k / m`. `Hommel` multiplies these by the harmonic sum
/// `H_m`; see the crate README for the caveat on this variant.
pub fn kfwer_thresholds_homogeneous(kind: KFwerTemplate, m: usize, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let scale = match kind {
        KFwerTemplate::Simes => 1.0,
        KFwerTemplate::Hommel => (1..=m).map(|i| 1.0 / i as f64).sum(),
    };
    Ok((1..=m).map(|k| simes_ell(k as i64, m, alpha) * scale).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KFwerTemplate {
    Simes,
    Hommel,
}

/// DKW bound for a data-independent region among `regions` reference regions:
/// the null-count estimate of the region at level `alpha / regions`.
pub fn dkw_deterministic_zeta(region_pvalues: &[f64], alpha: f64, regions: usize) -> Result<usize> {
    check_alpha(alpha)?;
    if regions == 0 {
        return Err(Error::invalid("regions", "must be positive"));
    }
    if region_pvalues.is_empty() {
        return Ok(0);
    }
    let level = alpha / regions as f64;
    let fam = PValueFamily::uniform(region_pvalues.to_vec())?;
    let bound = HomogeneousBound { method: HomogeneousMethod::Dkw, alpha: level, constant: dkw_lambda(level) };
    let m = fam.m();
    let sorted = fam.sorted_pvalues();
    let mut best = m;
    let mut idx = 0;
    for &t in &fam.pvalue_grid() {
        while idx < m && sorted[idx] <= t {
            idx += 1;
        }
        if t >= 1.0 {
            continue;
        }
        let lam = bound.constant;
        let a = 1.0 - t;
        let x = lam / (2.0 * a) + (lam * lam / (4.0 * a * a) + (m - idx) as f64 / a).sqrt();
        let b = polish_accept(clamp_count((x * x).floor() as i64, m), m, |n| dkw_accept_full(&bound, m, idx, n, t));
        best = best.min(b);
    }
    Ok(best)
}
