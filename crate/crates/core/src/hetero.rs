//! Bounds for families with heterogeneous (typically discrete) null cdfs.

use crate::error::{check_alpha, Error, Result};
use crate::family::PValueFamily;
use crate::local_tests::LocalTests;
use crate::num::{floor_within, lambert_w0, prefix_sums, sorted_desc, within};
use crate::reference::{regularize_zetas, ReferenceFamily};

/// Bretagnolle constant `sqrt((1 + ln(1/alpha)) / 2)` for `alpha` in `(0, 1]`.
pub fn bret_lambda(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidAlpha { alpha, range: "(0, 1]" });
    }
    Ok(((1.0 + (1.0 / alpha).ln()) / 2.0).sqrt())
}

/// `G_i(t) = 1{p_i <= t} - F_i(t)`.
pub fn centered_counts(fam: &PValueFamily, t: f64) -> Vec<f64> {
    fam.pvalues().iter().zip(fam.cdfs()).map(|(&p, c)| if p <= t { 1.0 } else { 0.0 } - c.eval(t)).collect()
}

/// Largest `n` such that, on every grid threshold, the `n` smallest centered
/// counts sum to at most `lambda sqrt(n)`.
pub fn bret_m0(fam: &PValueFamily, alpha: f64) -> Result<usize> {
    Ok(LocalTests::bretagnolle(fam, alpha)?.m0_hat())
}

/// `floor(sum of the n largest F_i(t) + sqrt(n) lambda) ∧ n`.
pub fn bret_bound(fam: &PValueFamily, alpha: f64, n: usize) -> Result<impl Fn(f64) -> i64 + '_> {
    let lambda = bret_lambda(alpha)?;
    Ok(move |t: f64| {
        let top = sorted_desc(fam.cdfs().iter().map(|c| c.eval(t)));
        let s: f64 = top[..n].iter().sum();
        floor_within(s + (n as f64).sqrt() * lambda).min(n as i64)
    })
}

/// Top-k bounds `zeta_k = k ∧ n ∧ floor(sum of the n largest F_i(p_(k)) + sqrt(n) lambda)`.
/// `n = m` gives the non-adaptive family.
pub fn bret_topk_zeta(fam: &PValueFamily, alpha: f64, n: usize) -> Result<Vec<usize>> {
    check_alpha(alpha)?;
    let f = bret_bound(fam, alpha, n.min(fam.m()))?;
    let z = fam.sorted_pvalues().iter().enumerate().map(|(k, &p)| f(p).clamp(0, k as i64 + 1) as usize).collect();
    Ok(regularize_zetas(z))
}

/// Data-independent regions with Bretagnolle bounds at level `alpha / K`.
pub fn bret_deterministic_family(fam: &PValueFamily, regions: &[Vec<usize>], alpha: f64) -> Result<ReferenceFamily> {
    check_alpha(alpha)?;
    if regions.is_empty() {
        return Err(Error::invalid("regions", "at least one region required"));
    }
    let level = alpha / regions.len() as f64;
    let mut zetas = Vec::with_capacity(regions.len());
    for (k, r) in regions.iter().enumerate() {
        if r.is_empty() {
            zetas.push(0);
            continue;
        }
        let sub = fam.subset(r).map_err(|e| match e {
            Error::IndexOutOfRange { index, .. } => {
                Error::invalid(format!("regions[{k}]"), format!("index {index} out of range"))
            }
            other => other,
        })?;
        zetas.push(bret_m0(&sub, level)?);
    }
    ReferenceFamily::explicit(fam.m(), regions.to_vec(), zetas)
}

/// `H_i(s, t) = F_i(t) / (1 - F_i(s))`; fails when some `F_i(s) = 1`.
pub fn ratio_vector(fam: &PValueFamily, s: f64, t: f64) -> Result<Vec<f64>> {
    fam.cdfs()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let fs = c.eval(s);
            if fs >= 1.0 {
                Err(Error::DegenerateRatio { index: i, at: s })
            } else {
                Ok(c.eval(t) / (1.0 - fs))
            }
        })
        .collect()
}

/// Why a threshold sequence fails the heterogeneous Simes condition.
#[derive(Debug, Clone, PartialEq)]
pub enum C1Violation {
    Degenerate { index: usize },
    Sum { k: usize, sum: f64, bound: f64 },
}

/// Checks the heterogeneous Simes condition for `taus` on the index set `u`:
/// `F_i(tau_|U|) < 1` on `U` and, for each `k <= |U|`, the `|U| - k + 1`
/// largest `H_i(tau_|U|, tau_k)` over `U` sum to at most `k alpha`.
pub fn check_c1(fam: &PValueFamily, taus: &[f64], u: &[usize], alpha: f64) -> std::result::Result<(), C1Violation> {
    let size = u.len();
    if size == 0 {
        return Ok(());
    }
    assert!(taus.len() >= size, "need at least |U| thresholds");
    let top = taus[size - 1];
    for &i in u {
        if fam.cdf(i).eval(top) >= 1.0 {
            return Err(C1Violation::Degenerate { index: i });
        }
    }
    for k in 1..=size {
        let h = sorted_desc(u.iter().map(|&i| {
            let c = fam.cdf(i);
            c.eval(taus[k - 1]) / (1.0 - c.eval(top))
        }));
        let sum: f64 = h[..size - k + 1].iter().sum();
        let bound = k as f64 * alpha;
        if !within(sum, bound) {
            return Err(C1Violation::Sum { k, sum, bound });
        }
    }
    Ok(())
}

fn all_below_one(fam: &PValueFamily, t: f64) -> bool {
    fam.cdfs().iter().all(|c| c.eval(t) < 1.0)
}

/// Largest grid point `t` with `F_i(t) < 1` for all `i` and
/// `sum_i H_i(t, t) <= m alpha`.
pub fn ahsu_lambda_default(fam: &PValueFamily, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let m = fam.m() as f64;
    fam.threshold_grid()
        .into_iter()
        .rev()
        .find(|&t| {
            all_below_one(fam, t) && {
                let s: f64 = fam.cdfs().iter().map(|c| c.eval(t) / (1.0 - c.eval(t))).sum();
                within(s, m * alpha)
            }
        })
        .ok_or_else(|| Error::Contract("no admissible lambda on the threshold grid".into()))
}

/// Largest grid point `t` with `F_i(t) < 1` for all `i` and `max_i H_i(t, t) <= alpha`.
pub fn hsimes_lambda_default(fam: &PValueFamily, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    fam.threshold_grid()
        .into_iter()
        .rev()
        .find(|&t| hsimes_lambda_ok(fam, alpha, t))
        .ok_or_else(|| Error::Contract("no admissible lambda on the threshold grid".into()))
}

fn hsimes_lambda_ok(fam: &PValueFamily, alpha: f64, t: f64) -> bool {
    fam.cdfs().iter().all(|c| {
        let f = c.eval(t);
        f < 1.0 && within(f / (1.0 - f), alpha)
    })
}

pub(crate) fn check_hsimes_lambda(fam: &PValueFamily, alpha: f64, lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) || !hsimes_lambda_ok(fam, alpha, lambda) {
        return Err(Error::invalid("lambda", format!("{lambda} is not admissible at level {alpha}")));
    }
    Ok(())
}

/// For each `k < n0`, the largest grid `t <= lambda` with the `n0 - k + 1`
/// largest `H_i(lambda, t)` summing to at most `k alpha`.
fn step_thresholds(fam: &PValueFamily, alpha: f64, n0: usize, lambda: f64) -> Result<Vec<f64>> {
    ratio_vector(fam, lambda, lambda)?;
    let grid: Vec<f64> = fam.threshold_grid().into_iter().filter(|&t| t <= lambda).collect();
    let mut taus = vec![f64::NAN; n0.saturating_sub(1)];
    // thresholds are nondecreasing in k: walk k downwards with a falling grid pointer
    let mut pos = grid.len();
    let mut cached: Option<(usize, Vec<f64>)> = None;
    for k in (1..n0).rev() {
        loop {
            if pos == 0 {
                return Err(Error::Contract(format!("no feasible threshold for k = {k}")));
            }
            let t = grid[pos - 1];
            if cached.as_ref().map(|c| c.0) != Some(pos) {
                let h = ratio_vector(fam, lambda, t)?;
                cached = Some((pos, prefix_sums(&sorted_desc(h))));
            }
            let sums = &cached.as_ref().unwrap().1;
            if within(sums[n0 - k + 1], k as f64 * alpha) {
                taus[k - 1] = t;
                break;
            }
            pos -= 1;
        }
    }
    Ok(taus)
}

/// Heterogeneous step-up thresholds `tau_1 <= ... <= tau_m`, with `tau_m = lambda`.
pub fn ahsu_thresholds(fam: &PValueFamily, alpha: f64, lambda: Option<f64>) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let lambda = match lambda {
        Some(l) => l,
        None => ahsu_lambda_default(fam, alpha)?,
    };
    let mut taus = step_thresholds(fam, alpha, fam.m(), lambda)?;
    taus.push(lambda);
    Ok(taus)
}

/// Thresholds with the null count replaced by the plug-in `m0`: `tau_{m0} = lambda`
/// and every `tau_k`, `k > m0`, padded with the top of the threshold grid.
pub fn adaptive_thresholds(fam: &PValueFamily, alpha: f64, m0: usize, lambda: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let m = fam.m();
    if m0 == 0 || m0 > m {
        return Err(Error::invalid("m0", format!("{m0} not in [1, {m}]")));
    }
    let mut taus = step_thresholds(fam, alpha, m0, lambda)?;
    taus.push(lambda);
    let top = *fam.threshold_grid().last().expect("grid is nonempty");
    taus.resize(m, top);
    Ok(taus)
}

/// `min_k (#{i : p_i > tau_k} + k - 1) ∧ m`.
pub fn m0_jer(fam: &PValueFamily, taus: &[f64]) -> usize {
    let sorted = fam.sorted_pvalues();
    let m = sorted.len();
    taus.iter().enumerate().map(|(k, &t)| m - sorted.partition_point(|&p| p <= t) + k).min().unwrap_or(m).min(m)
}

/// Null-count estimate of the heterogeneous Simes shortcut at `lambda`.
pub fn hetero_simes_m0(fam: &PValueFamily, alpha: f64, lambda: Option<f64>) -> Result<usize> {
    Ok(LocalTests::hetero_simes(fam, alpha, lambda)?.m0_hat())
}

/// Variants of the heterogeneous Simes envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HSimesVariant {
    NonAdaptive,
    /// Plug-in from the non-adaptive envelope, iterated while it decreases.
    AdaptiveJer,
    /// Plug-in from the hetero-Simes local-test shortcut.
    AdaptiveSc1,
}

/// A reference family with the null-count estimate it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFamily {
    pub family: ReferenceFamily,
    pub m0_hat: Option<usize>,
}

fn truncated_kfwer(fam: &PValueFamily, taus: &[f64], m0: usize) -> ReferenceFamily {
    let mut t: Vec<f64> = taus[..m0].to_vec();
    t.push(f64::INFINITY);
    ReferenceFamily::k_fwer(fam.pvalues().to_vec(), t)
}

/// Heterogeneous Simes reference family. Adaptive variants keep the first
/// `m0_hat` thresholds and close the chain with the full index set.
pub fn hetero_simes_envelope(fam: &PValueFamily, alpha: f64, variant: HSimesVariant) -> Result<AdaptiveFamily> {
    let m = fam.m();
    match variant {
        HSimesVariant::NonAdaptive => {
            let taus = ahsu_thresholds(fam, alpha, None)?;
            Ok(AdaptiveFamily { family: ReferenceFamily::k_fwer(fam.pvalues().to_vec(), taus), m0_hat: None })
        }
        HSimesVariant::AdaptiveJer => {
            let base = ahsu_thresholds(fam, alpha, None)?;
            let mut m0 = m0_jer(fam, &base);
            let mut taus = base.clone();
            for _ in 0..m {
                if m0 == 0 {
                    break;
                }
                let next = adaptive_thresholds(fam, alpha, m0, base[m0 - 1])?;
                let next_m0 = m0_jer(fam, &next[..(m0 + 1).min(m)]);
                taus = next;
                if next_m0 >= m0 {
                    break;
                }
                m0 = next_m0;
            }
            Ok(AdaptiveFamily { family: truncated_kfwer(fam, &taus, m0), m0_hat: Some(m0) })
        }
        HSimesVariant::AdaptiveSc1 => {
            let lambda = hsimes_lambda_default(fam, alpha)?;
            let m0 = hetero_simes_m0(fam, alpha, Some(lambda))?;
            let taus = if m0 == 0 { Vec::new() } else { adaptive_thresholds(fam, alpha, m0, lambda)? };
            Ok(AdaptiveFamily { family: truncated_kfwer(fam, &taus, m0), m0_hat: Some(m0) })
        }
    }
}

/// `1 / (-W_0(-delta / (e (1 + delta))))`.
pub fn van_zuijlen_multiplier(delta: f64) -> Result<f64> {
    check_alpha(delta)?;
    let x = -delta / (std::f64::consts::E * (1.0 + delta));
    Ok(1.0 / -lambert_w0(x))
}

/// Top-k bounds `zeta_k = k ∧ floor(m c mean_i F_i(p_(k)))` with the Van Zuijlen multiplier `c`.
pub fn van_zuijlen_zeta(fam: &PValueFamily, delta: f64) -> Result<Vec<usize>> {
    let c = van_zuijlen_multiplier(delta)?;
    let z = fam
        .sorted_pvalues()
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let total: f64 = fam.cdfs().iter().map(|f| f.eval(p)).sum();
            floor_within(c * total).clamp(0, k as i64 + 1) as usize
        })
        .collect();
    Ok(regularize_zetas(z))
}
