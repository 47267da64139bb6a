use std::collections::HashMap;
use std::sync::OnceLock;

use fdenvelope_core::{binom_test, fisher_test, DiscreteTest, PValueFamily, Table2x2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::config::{Design, SimConfig};
use crate::error::{SimError, SimResult};

/// One simulated data set.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedData {
    pub family: PValueFamily,
    /// `true` where the hypothesis is null.
    pub is_null: Vec<bool>,
}

impl SimulatedData {
    pub fn null_indices(&self) -> Vec<usize> {
        (0..self.is_null.len()).filter(|&i| self.is_null[i]).collect()
    }
}

/// Generator keyed by `(seed, replicate, hypothesis)`, so draws do not depend
/// on evaluation order.
fn hypothesis_rng(seed: u64, replicate: u64, hypothesis: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&replicate.to_le_bytes());
    key[16..24].copy_from_slice(&hypothesis.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Draws data sets for a validated configuration, memoizing the test for
/// every possible outcome.
pub struct Simulator {
    cfg: SimConfig,
    probabilities: Vec<(f64, f64)>,
    fisher: Vec<OnceLock<DiscreteTest>>,
    binomial: HashMap<u64, Vec<DiscreteTest>>,
}

impl Simulator {
    pub fn new(cfg: &SimConfig) -> SimResult<Self> {
        cfg.validate()?;
        let mut probabilities = Vec::new();
        let mut fisher = Vec::new();
        let mut binomial = HashMap::new();
        match &cfg.design {
            Design::TwoGroup => {
                let (low, high, signal) = cfg.block_sizes();
                probabilities.extend(std::iter::repeat_n((cfg.beta_low, cfg.beta_low), low));
                probabilities.extend(std::iter::repeat_n((cfg.beta_high, cfg.beta_high), high));
                probabilities.extend(std::iter::repeat_n((cfg.beta_high, cfg.q), signal));
                let side = cfg.subjects as usize + 1;
                fisher = (0..side * side).map(|_| OnceLock::new()).collect();
            }
            Design::BinomialNull { trials } => {
                for &n in trials {
                    if let std::collections::hash_map::Entry::Vacant(slot) = binomial.entry(n) {
                        let tests = (0..=n).map(|x| binom_test(n, x)).collect::<Result<Vec<_>, _>>()?;
                        slot.insert(tests);
                    }
                }
            }
        }
        Ok(Simulator { cfg: cfg.clone(), probabilities, fisher, binomial })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    fn fisher_cell(&self, x1: u64, x2: u64) -> SimResult<DiscreteTest> {
        let n = self.cfg.subjects;
        let cell = &self.fisher[x1 as usize * (n as usize + 1) + x2 as usize];
        if let Some(t) = cell.get() {
            return Ok(t.clone());
        }
        let t = fisher_test(Table2x2::new(x1, n - x1, x2, n - x2))?;
        Ok(cell.get_or_init(|| t).clone())
    }

    pub fn draw(&self, replicate: u64) -> SimResult<SimulatedData> {
        let cfg = &self.cfg;
        let mut pvalues = Vec::with_capacity(cfg.m);
        let mut cdfs = Vec::with_capacity(cfg.m);
        let mut is_null = Vec::with_capacity(cfg.m);
        for i in 0..cfg.m {
            let mut rng = hypothesis_rng(cfg.seed, replicate, i as u64);
            let (test, null) = match &cfg.design {
                Design::TwoGroup => {
                    let (p1, p2) = self.probabilities[i];
                    let x1 = sample_binomial(cfg.subjects, p1, &mut rng)?;
                    let x2 = sample_binomial(cfg.subjects, p2, &mut rng)?;
                    (self.fisher_cell(x1, x2)?, p1 == p2)
                }
                Design::BinomialNull { trials } => {
                    let n = trials[i % trials.len()];
                    let x = sample_binomial(n, 0.5, &mut rng)?;
                    (self.binomial[&n][x as usize].clone(), true)
                }
            };
            pvalues.push(test.pvalue);
            cdfs.push(test.cdf);
            is_null.push(null);
        }
        Ok(SimulatedData { family: PValueFamily::new(pvalues, cdfs)?, is_null })
    }
}

fn sample_binomial(n: u64, p: f64, rng: &mut ChaCha8Rng) -> SimResult<u64> {
    let dist = Binomial::new(n, p).map_err(|e| SimError::config("probability", e.to_string()))?;
    Ok(dist.sample(rng))
}

/// Draws replicate `replicate` of the configured design.
pub fn simulate(cfg: &SimConfig, replicate: u64) -> SimResult<SimulatedData> {
    Simulator::new(cfg)?.draw(replicate)
}
