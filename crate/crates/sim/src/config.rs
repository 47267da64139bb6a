use fdenvelope_core::Method;
use serde::{Deserialize, Serialize};

use crate::error::{SimError, SimResult};

/// Data-generating design of a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Design {
    /// Two groups of `subjects` Bernoulli draws per hypothesis, compared with
    /// Fisher's exact test. Hypotheses fall into three blocks with success
    /// probabilities `(low, low)`, `(high, high)` and `(high, q)`.
    TwoGroup,
    /// Exact binomial tests of `x ~ Bin(n, 1/2)` against `1/2`; hypothesis
    /// `i` uses `trials[i % trials.len()]`. Every hypothesis is null.
    BinomialNull { trials: Vec<u64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub m: usize,
    /// Subjects per group in the two-group design.
    pub subjects: u64,
    pub pi0: f64,
    /// Share of the nulls in the low-probability block.
    pub pi0_prime: f64,
    /// Success probability of the second group in the signal block.
    pub q: f64,
    pub beta_low: f64,
    pub beta_high: f64,
    pub alpha: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub replicates: usize,
    pub design: Design,
}

/// Methods whose curves stay cheap at any `m`.
pub const DEFAULT_METHODS: [Method; 8] = [
    Method::Dkw,
    Method::DkwAdaptive,
    Method::Bretagnolle,
    Method::BretagnolleAdaptive,
    Method::Hsimes,
    Method::HsimesAdaptiveJer,
    Method::Simes,
    Method::SimesAdaptive,
];

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            m: 200,
            subjects: 50,
            pi0: 0.2,
            pi0_prime: 0.5,
            q: 0.4,
            beta_low: 0.01,
            beta_high: 0.1,
            alpha: 0.2,
            seed: 1,
            methods: DEFAULT_METHODS.to_vec(),
            replicates: 500,
            design: Design::TwoGroup,
        }
    }
}

fn unit(field: &'static str, v: f64) -> SimResult<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(SimError::config(field, format!("{v} not in [0, 1]")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> SimResult<()> {
        if self.m == 0 {
            return Err(SimError::config("m", "must be positive"));
        }
        if self.replicates == 0 {
            return Err(SimError::config("replicates", "must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(SimError::config("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        for m in &self.methods {
            m.check_alpha(self.alpha).map_err(|e| SimError::config("alpha", format!("{m}: {e}")))?;
        }
        match &self.design {
            Design::TwoGroup => {
                if self.subjects == 0 {
                    return Err(SimError::config("subjects", "must be positive"));
                }
                unit("pi0", self.pi0)?;
                unit("pi0_prime", self.pi0_prime)?;
                unit("q", self.q)?;
                unit("beta_low", self.beta_low)?;
                unit("beta_high", self.beta_high)?;
            }
            Design::BinomialNull { trials } => {
                if trials.is_empty() || trials.contains(&0) {
                    return Err(SimError::config("design.trials", "need at least one positive trial count"));
                }
            }
        }
        Ok(())
    }

    /// Sizes of the low-null, high-null and signal blocks.
    ///
    /// `m0 = floor(m pi0)` nulls, `floor(m0 pi0')` of them in the first block
    /// and the remainder in the second.
    pub fn block_sizes(&self) -> (usize, usize, usize) {
        if let Design::BinomialNull { .. } = self.design {
            return (self.m, 0, 0);
        }
        let m0 = ((self.m as f64 * self.pi0 + 1e-9).floor() as usize).min(self.m);
        let low = ((m0 as f64 * self.pi0_prime + 1e-9).floor() as usize).min(m0);
        (low, m0 - low, self.m - m0)
    }
}
