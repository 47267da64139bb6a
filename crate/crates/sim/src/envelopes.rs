use std::fmt::Write;

use fdenvelope_core::{EnvelopeCurve, Method, MethodFit, PValueFamily};
use serde::Serialize;

use crate::error::{SimError, SimResult};

/// Envelope curve of one method with the true-discovery count along the same path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodCurve {
    pub curve: EnvelopeCurve,
    /// `|R_k ∩ H1|` for the `k` smallest p-values.
    pub true_discoveries: Vec<usize>,
}

/// Curves of every requested method along the p-value order, with the
/// oracle true-discovery column taken from `is_null`.
pub fn run_envelopes(
    fam: &PValueFamily,
    is_null: &[bool],
    methods: &[Method],
    alpha: f64,
) -> SimResult<Vec<MethodCurve>> {
    if methods.is_empty() {
        return Err(SimError::config("methods", "at least one method required"));
    }
    if is_null.len() != fam.m() {
        return Err(SimError::config("truth", format!("expected {} labels, got {}", fam.m(), is_null.len())));
    }
    let order = fam.sort_order();
    let true_discoveries: Vec<usize> = order
        .iter()
        .scan(0, |acc, &i| {
            *acc += usize::from(!is_null[i]);
            Some(*acc)
        })
        .collect();
    methods
        .iter()
        .map(|&method| {
            let curve = MethodFit::new(method, fam, alpha)
                .and_then(|fit| fit.curve())
                .map_err(|source| SimError::Method { method: method.to_string(), source })?;
            Ok(MethodCurve { curve, true_discoveries: true_discoveries.clone() })
        })
        .collect()
}

pub const CURVES_HEADER: &str = "replicate,method,k,p_k,vhat,dhat,true_discoveries";

/// Appends the rows of `curves` for one replicate under [`CURVES_HEADER`].
pub fn write_curve_rows(out: &mut String, replicate: usize, curves: &[MethodCurve]) {
    for c in curves {
        for (row, td) in c.curve.rows.iter().zip(&c.true_discoveries) {
            writeln!(out, "{replicate},{},{},{},{},{},{td}", c.curve.method, row.k, row.p_k, row.vhat, row.dhat)
                .expect("writing to a string");
        }
    }
}

pub const MEDIANS_HEADER: &str = "method,k,vhat,dhat,true_discoveries";

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Pointwise medians across replicates, per method and rank `k`.
pub fn median_rows(replicates: &[Vec<MethodCurve>]) -> String {
    let mut out = String::from(MEDIANS_HEADER);
    out.push('\n');
    let Some(first) = replicates.first() else { return out };
    for (j, c) in first.iter().enumerate() {
        let m = c.curve.rows.len();
        for k in 0..m {
            let mut v: Vec<f64> = replicates.iter().map(|r| r[j].curve.rows[k].vhat as f64).collect();
            let mut d: Vec<f64> = replicates.iter().map(|r| r[j].curve.rows[k].dhat as f64).collect();
            let mut t: Vec<f64> = replicates.iter().map(|r| r[j].true_discoveries[k] as f64).collect();
            writeln!(out, "{},{},{},{},{}", c.curve.method, k + 1, median(&mut v), median(&mut d), median(&mut t))
                .expect("writing to a string");
        }
    }
    out
}
