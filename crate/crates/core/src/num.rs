//! Numeric helpers shared by the bounds.
//!
//! Statistic comparisons (sums of cdf values against a bound) go through
//! [`within`], which accepts a relative slack of [`REL_TOL`]. Brute-force
//! oracles use the same predicate, so closed forms and enumerations agree
//! on boundary cases that are exact in real arithmetic.

/// Relative slack for statistic-vs-bound comparisons.
pub const REL_TOL: f64 = 1e-12;

/// `lhs <= rhs` up to [`REL_TOL`].
#[inline]
pub fn within(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs().max(1.0)
}

/// Largest integer `v` with `within(v, x)`.
#[inline]
pub fn floor_within(x: f64) -> i64 {
    if x == f64::INFINITY {
        return i64::MAX;
    }
    let mut v = x.floor() as i64;
    if within((v + 1) as f64, x) {
        v += 1;
    }
    v
}

/// Largest integer `v` with `v < x` (strictly), e.g. `ceil(x) - 1`.
#[inline]
pub fn left_floor(x: f64) -> i64 {
    if x == f64::INFINITY {
        return i64::MAX;
    }
    let c = x.ceil() as i64;
    c - 1
}

/// Clamps a possibly negative count to `[0, cap]`.
#[inline]
pub fn clamp_count(v: i64, cap: usize) -> usize {
    if v <= 0 {
        0
    } else {
        (v as u64).min(cap as u64) as usize
    }
}

/// `h(x) = x (ln x - 1) + 1` on `x >= 1`.
pub fn wellner_h(x: f64) -> f64 {
    x * (x.ln() - 1.0) + 1.0
}

/// Inverse of [`wellner_h`] on `[1, inf)`; returns the root `x >= 1` of `h(x) = y`.
pub fn wellner_h_inverse(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y <= 0.0 {
        return 1.0;
    }
    if y == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut lo = 1.0;
    let mut hi = 2.0;
    while wellner_h(hi) < y {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if wellner_h(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Principal branch of the Lambert W function, defined on `x >= -1/e`.
pub fn lambert_w0(x: f64) -> f64 {
    let branch = -(-1.0f64).exp();
    if x.is_nan() || x < branch {
        return f64::NAN;
    }
    if x == branch {
        return -1.0;
    }
    if x == 0.0 {
        return 0.0;
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        (1.0 + x).ln() * 0.75
    } else {
        let l = x.ln();
        l - l.ln()
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-300 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 1e-15 * (1.0 + w.abs()) {
            break;
        }
    }
    w
}

/// Sum of the `k` largest values of `values`; `+inf` when `k > values.len()`.
pub fn sum_of_largest(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return f64::INFINITY;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    sorted[..k].iter().sum()
}

/// Descending sort, returned as a new vector.
pub fn sorted_desc(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Ascending sort, returned as a new vector.
pub fn sorted_asc(values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Prefix sums with a leading zero: `out[k] = v[0] + ... + v[k-1]`.
pub fn prefix_sums(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for x in v {
        acc += x;
        out.push(acc);
    }
    out
}
