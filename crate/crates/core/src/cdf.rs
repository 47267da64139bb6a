//! Right-continuous step cdfs of p-values under the null.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Null cdf of one p-value: either the uniform cdf or a finite step function.
///
/// A step cdf jumps to `values[j]` at `support[j]` and is 0 left of the first
/// support point. Evaluation uses exact comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CdfRepr", into = "CdfRepr")]
pub struct StepCdf {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    Step { support: Vec<f64>, values: Vec<f64> },
}

impl StepCdf {
    pub fn identity() -> Self {
        StepCdf { kind: Kind::Identity }
    }

    /// Builds a step cdf; support must be strictly increasing within `[0, 1]`
    /// and values nondecreasing within `[0, 1]`.
    pub fn new(support: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::invalid("support", "must be nonempty"));
        }
        if support.len() != values.len() {
            return Err(Error::invalid(
                "values",
                format!("length {} differs from support length {}", values.len(), support.len()),
            ));
        }
        for (j, &s) in support.iter().enumerate() {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::invalid(format!("support[{j}]"), format!("{s} not in [0, 1]")));
            }
            if j > 0 && s <= support[j - 1] {
                return Err(Error::invalid(format!("support[{j}]"), "support must be strictly increasing"));
            }
        }
        for (j, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("values[{j}]"), format!("{v} not in [0, 1]")));
            }
            if j > 0 && v < values[j - 1] {
                return Err(Error::invalid(format!("values[{j}]"), "values must be nondecreasing"));
            }
        }
        Ok(StepCdf { kind: Kind::Step { support, values } })
    }

    /// Step cdf equal to the identity on `support` (a super-uniform discrete law).
    pub fn identity_on(support: Vec<f64>) -> Result<Self> {
        let values = support.clone();
        Self::new(support, values)
    }

    /// Uniform cdf sampled on the grid `{1/n, 2/n, ..., 1}`.
    pub fn uniform_grid(n: usize) -> Self {
        let support: Vec<f64> = (1..=n).map(|j| j as f64 / n as f64).collect();
        StepCdf { kind: Kind::Step { values: support.clone(), support } }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    /// Finite support points (empty for the identity cdf).
    pub fn support(&self) -> &[f64] {
        match &self.kind {
            Kind::Identity => &[],
            Kind::Step { support, .. } => support,
        }
    }

    /// Cdf values at the support points (empty for the identity cdf).
    pub fn values(&self) -> &[f64] {
        match &self.kind {
            Kind::Identity => &[],
            Kind::Step { values, .. } => values,
        }
    }

    /// `F(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Identity => t.clamp(0.0, 1.0),
            Kind::Step { support, values } => {
                let j = support.partition_point(|&s| s <= t);
                if j == 0 {
                    0.0
                } else {
                    values[j - 1]
                }
            }
        }
    }

    /// `F(t-) = sup { F(s) : s < t }`.
    pub fn left_limit(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Identity => t.clamp(0.0, 1.0),
            Kind::Step { support, values } => {
                let j = support.partition_point(|&s| s < t);
                if j == 0 {
                    0.0
                } else {
                    values[j - 1]
                }
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CdfRepr {
    Identity { identity: bool },
    Step { support: Vec<f64>, values: Vec<f64> },
}

impl TryFrom<CdfRepr> for StepCdf {
    type Error = Error;

    fn try_from(repr: CdfRepr) -> Result<Self> {
        match repr {
            CdfRepr::Identity { identity: true } => Ok(StepCdf::identity()),
            CdfRepr::Identity { identity: false } => {
                Err(Error::invalid("identity", "use support/values for non-identity cdfs"))
            }
            CdfRepr::Step { support, values } => StepCdf::new(support, values),
        }
    }
}

impl From<StepCdf> for CdfRepr {
    fn from(cdf: StepCdf) -> Self {
        match cdf.kind {
            Kind::Identity => CdfRepr::Identity { identity: true },
            Kind::Step { support, values } => CdfRepr::Step { support, values },
        }
    }
}
