//! Reference families `(R_k, zeta_k)` and the envelopes they induce.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::PValueFamily;

/// How the regions of a reference family are described.
#[derive(Debug, Clone, PartialEq)]
pub enum Regions {
    /// `R_k` holds the first `k` entries of `order`, `k = 1..=K`.
    TopK { order: Vec<usize> },
    /// `R_k = { i : p_i <= taus[k] }`.
    Thresholds { pvalues: Vec<f64>, taus: Vec<f64> },
    /// Arbitrary index sets.
    Explicit(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Structure {
    TopK,
    KFwer,
    Deterministic,
}

/// Regions paired with integer bounds on the number of nulls they contain.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceFamily {
    m: usize,
    regions: Regions,
    zetas: Vec<usize>,
}

impl ReferenceFamily {
    pub fn top_k(order: Vec<usize>, zetas: Vec<usize>) -> Result<Self> {
        if zetas.len() > order.len() {
            return Err(Error::invalid("zetas", "more bounds than regions"));
        }
        let m = order.len();
        check_permutation(&order, m)?;
        Ok(ReferenceFamily { m, regions: Regions::TopK { order }, zetas })
    }

    pub fn thresholds(pvalues: Vec<f64>, taus: Vec<f64>, zetas: Vec<usize>) -> Result<Self> {
        if taus.len() != zetas.len() {
            return Err(Error::invalid("zetas", "one bound per threshold required"));
        }
        Ok(ReferenceFamily { m: pvalues.len(), regions: Regions::Thresholds { pvalues, taus }, zetas })
    }

    /// k-FWER family: `R_k = { p_i <= taus[k] }` with `zeta_k = k - 1`.
    pub fn k_fwer(pvalues: Vec<f64>, taus: Vec<f64>) -> Self {
        let zetas = (0..taus.len()).collect();
        ReferenceFamily { m: pvalues.len(), regions: Regions::Thresholds { pvalues, taus }, zetas }
    }

    pub fn explicit(m: usize, regions: Vec<Vec<usize>>, zetas: Vec<usize>) -> Result<Self> {
        if regions.len() != zetas.len() {
            return Err(Error::invalid("zetas", "one bound per region required"));
        }
        let mut normalized = Vec::with_capacity(regions.len());
        for (k, mut r) in regions.into_iter().enumerate() {
            r.sort_unstable();
            r.dedup();
            if let Some(&i) = r.iter().find(|&&i| i >= m) {
                return Err(Error::invalid(format!("regions[{k}]"), format!("index {i} out of range")));
            }
            normalized.push(r);
        }
        Ok(ReferenceFamily { m, regions: Regions::Explicit(normalized), zetas })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zetas.is_empty()
    }

    pub fn zetas(&self) -> &[usize] {
        &self.zetas
    }

    pub fn regions(&self) -> &Regions {
        &self.regions
    }

    pub fn structure(&self) -> Structure {
        match self.regions {
            Regions::TopK { .. } => Structure::TopK,
            Regions::Thresholds { .. } => Structure::KFwer,
            Regions::Explicit(_) => Structure::Deterministic,
        }
    }

    /// Members of region `k` (0-based), sorted.
    pub fn region(&self, k: usize) -> Vec<usize> {
        let mut r = match &self.regions {
            Regions::TopK { order } => order[..=k].to_vec(),
            Regions::Thresholds { pvalues, taus } => (0..pvalues.len()).filter(|&i| pvalues[i] <= taus[k]).collect(),
            Regions::Explicit(rs) => rs[k].clone(),
        };
        r.sort_unstable();
        r
    }

    pub fn region_size(&self, k: usize) -> usize {
        match &self.regions {
            Regions::TopK { .. } => k + 1,
            Regions::Thresholds { pvalues, taus } => pvalues.iter().filter(|&&p| p <= taus[k]).count(),
            Regions::Explicit(rs) => rs[k].len(),
        }
    }

    /// For a chain of regions, the position in the chain (by size) at which each
    /// index first appears, together with the chain's bounds; `None` when the
    /// regions are not nested.
    fn chain(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let k = self.len();
        let mut ranks: Vec<usize> = (0..k).collect();
        ranks.sort_by_key(|&r| (self.region_size(r), r));
        let mut entry = vec![usize::MAX; self.m];
        let mut seen = 0usize;
        for (pos, &r) in ranks.iter().enumerate() {
            let members = self.region(r);
            let mut inside_previous = 0usize;
            for &i in &members {
                if entry[i] == usize::MAX {
                    entry[i] = pos;
                } else {
                    inside_previous += 1;
                }
            }
            if inside_previous != seen {
                return None;
            }
            seen = members.len();
        }
        let zetas = ranks.iter().map(|&r| self.zetas[r]).collect();
        Some((entry, zetas))
    }

    pub fn is_nested(&self) -> bool {
        match self.regions {
            Regions::TopK { .. } | Regions::Thresholds { .. } => true,
            Regions::Explicit(_) => self.chain().is_some(),
        }
    }

    /// `min_k (zeta_k + |S \ R_k|) ∧ |S|`, valid for any family.
    pub fn upper_bound(&self, selection: &[usize]) -> usize {
        let s = dedup(selection);
        let mut best = s.len();
        for k in 0..self.len() {
            let mut inside = vec![false; self.m];
            for i in self.region(k) {
                inside[i] = true;
            }
            let outside = s.iter().filter(|&&i| !inside[i]).count();
            best = best.min(self.zetas[k] + outside);
        }
        best
    }
}

fn check_permutation(order: &[usize], m: usize) -> Result<()> {
    let mut seen = vec![false; m];
    for &i in order {
        if i >= m || seen[i] {
            return Err(Error::invalid("order", "must be a permutation of 0..m"));
        }
        seen[i] = true;
    }
    Ok(())
}

fn dedup(selection: &[usize]) -> Vec<usize> {
    let mut s = selection.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Suffix minima, making a bound sequence nondecreasing without loosening it.
pub fn regularize_zetas(mut zetas: Vec<usize>) -> Vec<usize> {
    for k in (0..zetas.len().saturating_sub(1)).rev() {
        zetas[k] = zetas[k].min(zetas[k + 1]);
    }
    zetas
}

/// Envelope `V(S) = min_k (zeta_k + |S \ R_k|) ∧ |S|` of a nested family,
/// answering queries in `O(|S| + K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedEnvelope {
    entry: Vec<usize>,
    zetas: Vec<usize>,
}

impl InterpolatedEnvelope {
    pub fn new(family: &ReferenceFamily) -> Result<Self> {
        let (entry, zetas) = family.chain().ok_or(Error::NotNested)?;
        Ok(InterpolatedEnvelope { entry, zetas })
    }

    pub fn m(&self) -> usize {
        self.entry.len()
    }

    /// Bound on the number of nulls in `selection`; duplicates are ignored.
    pub fn bound(&self, selection: &[usize]) -> Result<usize> {
        let k = self.zetas.len();
        let mut counts = vec![0usize; k + 1];
        let mut seen = vec![false; self.m()];
        let mut size = 0;
        for &i in selection {
            if i >= self.m() {
                return Err(Error::IndexOutOfRange { index: i, m: self.m() });
            }
            if !seen[i] {
                seen[i] = true;
                size += 1;
                counts[self.entry[i].min(k)] += 1;
            }
        }
        let mut best = size;
        let mut covered = 0;
        for (pos, &z) in self.zetas.iter().enumerate() {
            covered += counts[pos];
            best = best.min(z + size - covered);
        }
        Ok(best)
    }

    /// Bounds for the prefixes `order[..1], order[..2], ...`.
    pub fn path(&self, order: &[usize]) -> Result<Vec<usize>> {
        let k = self.zetas.len();
        let mut totals: Vec<usize> = self.zetas.clone();
        let mut out = Vec::with_capacity(order.len());
        for (j, &i) in order.iter().enumerate() {
            if i >= self.m() {
                return Err(Error::IndexOutOfRange { index: i, m: self.m() });
            }
            for t in totals.iter_mut().take(self.entry[i].min(k)) {
                *t += 1;
            }
            let best = totals.iter().copied().min().unwrap_or(usize::MAX).min(j + 1);
            out.push(best);
        }
        Ok(out)
    }
}

/// `V(S)` for a nested family.
pub fn interpolate_nested(family: &ReferenceFamily, selection: &[usize]) -> Result<usize> {
    InterpolatedEnvelope::new(family)?.bound(selection)
}

/// `max { |S ∩ A| : |A ∩ R_k| <= zeta_k for all k }` by enumerating every `A`.
/// Intended as an oracle for `m <= 20`.
pub fn brute_vstar(family: &ReferenceFamily, selection: &[usize]) -> Result<usize> {
    let m = family.m();
    if m > 20 {
        return Err(Error::Contract(format!("exhaustive enumeration needs m <= 20, got {m}")));
    }
    let masks: Vec<(u32, u32)> = (0..family.len())
        .map(|k| (family.region(k).iter().fold(0u32, |acc, &i| acc | (1 << i)), family.zetas()[k] as u32))
        .collect();
    let mut s_mask = 0u32;
    for &i in selection {
        if i >= m {
            return Err(Error::IndexOutOfRange { index: i, m });
        }
        s_mask |= 1 << i;
    }
    let mut best = 0;
    for a in 0u32..(1u32 << m) {
        let hit = (a & s_mask).count_ones();
        if hit <= best {
            continue;
        }
        if masks.iter().all(|&(r, z)| (a & r).count_ones() <= z) {
            best = hit;
        }
    }
    Ok(best as usize)
}

/// Result of the top-k path recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKPath {
    /// Envelope on the prefixes of the sorted order, `k = 1..=m`.
    pub bounds: Vec<usize>,
    /// Number of loop iterations, each evaluating `f` once.
    pub visits: usize,
}

/// Envelope on the top-k path for `zeta_k = f(p_(k)) ∧ k`, where `f` is
/// nondecreasing and integer valued. Runs of forced increments skip `f`.
pub fn topk_path_dp(sorted_pvalues: &[f64], mut f: impl FnMut(f64) -> i64) -> Result<TopKPath> {
    let m = sorted_pvalues.len();
    let mut bounds = vec![0usize; m];
    let mut prev = 0usize;
    let mut k = 1usize;
    let mut visits = 0;
    let mut last: Option<(f64, i64)> = None;
    while k <= m {
        visits += 1;
        let p = sorted_pvalues[k - 1];
        let raw = f(p);
        if let Some((lp, lv)) = last {
            if p < lp || raw < lv {
                return Err(Error::Contract(format!("bound is not nondecreasing at p = {p}")));
            }
        }
        last = Some((p, raw));
        let z = raw.clamp(0, k as i64) as usize;
        if z > prev {
            let j = (z - prev).min(m - k + 1);
            for i in 1..=j {
                bounds[k + i - 2] = prev + i;
            }
            prev += j;
            k += j;
        } else {
            bounds[k - 1] = prev;
            k += 1;
        }
    }
    Ok(TopKPath { bounds, visits })
}

/// Envelope values `V(R_k)` of a top-k family on its own regions.
pub fn topk_path_values(zetas: &[usize]) -> Vec<usize> {
    let z = regularize_zetas(zetas.to_vec());
    let mut out = Vec::with_capacity(z.len());
    let mut prev = 0usize;
    for (k, &zk) in z.iter().enumerate() {
        let v = (prev + 1).min(zk).min(k + 1);
        out.push(v);
        prev = v;
    }
    out
}

/// Top-k family with the same envelope as a k-FWER family with nondecreasing
/// thresholds `t_1 <= ... <= t_K`.
pub fn kfwer_to_topk(family: &ReferenceFamily) -> Result<ReferenceFamily> {
    let Regions::Thresholds { pvalues, taus } = family.regions() else {
        return Err(Error::Contract("expected a threshold family".into()));
    };
    if family.zetas().iter().enumerate().any(|(k, &z)| z != k) {
        return Err(Error::Contract("k-FWER family must have zeta_k = k - 1".into()));
    }
    if taus.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Contract("thresholds must be nondecreasing".into()));
    }
    let m = pvalues.len();
    let fam_order = order_of(pvalues);
    let sorted: Vec<f64> = fam_order.iter().map(|&i| pvalues[i]).collect();
    let mut zetas = vec![m; m];
    let mut prev_end = 0usize;
    for (k, &t) in taus.iter().enumerate() {
        let end = sorted.partition_point(|&p| p <= t);
        for z in zetas.iter_mut().take(end).skip(prev_end) {
            *z = k;
        }
        prev_end = prev_end.max(end);
    }
    ReferenceFamily::top_k(fam_order, zetas)
}

/// k-FWER family with the same envelope as the top-k family
/// `zeta_k = f(p_(k)) ∧ k`, given `f_values[k-1] = f(p_(k))`.
pub fn topk_to_kfwer(fam: &PValueFamily, f_values: &[i64]) -> Result<ReferenceFamily> {
    let m = fam.m();
    if f_values.len() != m {
        return Err(Error::invalid("f_values", format!("expected {m} values")));
    }
    let sorted = fam.sorted_pvalues();
    for k in 1..m {
        if f_values[k] < f_values[k - 1] {
            return Err(Error::Contract("bound is not nondecreasing".into()));
        }
        if sorted[k] == sorted[k - 1] && f_values[k] != f_values[k - 1] {
            return Err(Error::Contract("bound must agree on tied p-values".into()));
        }
    }
    let mut taus = Vec::with_capacity(m);
    for s in 1..=m {
        let nu = f_values.partition_point(|&v| v < s as i64);
        taus.push(if nu == 0 { -1.0 } else { sorted[nu - 1] });
    }
    Ok(ReferenceFamily::k_fwer(fam.pvalues().to_vec(), taus))
}

fn order_of(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]).then(a.cmp(&b)));
    order
}

/// Largest `k` with `vhat[k-1] / max(k, 1) <= gamma`, or 0.
pub fn fdx_select(vhat: &[usize], gamma: f64) -> usize {
    (1..=vhat.len()).rev().find(|&k| vhat[k - 1] as f64 / k as f64 <= gamma).unwrap_or(0)
}
