use fdenvelope_core::{Method, MethodFit, Result as CoreResult};
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::config::SimConfig;
use crate::error::{SimError, SimResult};
use crate::generate::Simulator;
use crate::parallel::thread_pool;

/// Smallest replicate count accepted by [`coverage_mc`].
pub const MIN_REPLICATES: usize = 100;

/// Whether a bound undercounts the true nulls of some selection.
///
/// Bounds that are monotone and grow by at most one per added index fail on
/// some selection exactly when they fail on the full null set, so only that
/// set is checked.
pub fn violates(bound: impl Fn(&[usize]) -> CoreResult<usize>, is_null: &[bool]) -> CoreResult<bool> {
    let nulls: Vec<usize> = (0..is_null.len()).filter(|&i| is_null[i]).collect();
    Ok(bound(&nulls)? < nulls.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageRow {
    pub method: Method,
    pub violations: usize,
    pub replicates: usize,
    pub rate: f64,
}

impl CoverageRow {
    /// `rate <= alpha + 3 sqrt(alpha (1 - alpha) / B)`.
    pub fn within_tolerance(&self, alpha: f64) -> bool {
        self.rate <= alpha + monte_carlo_slack(alpha, self.replicates)
    }
}

/// Three binomial standard errors of a frequency with mean `alpha`.
pub fn monte_carlo_slack(alpha: f64, replicates: usize) -> f64 {
    3.0 * (alpha * (1.0 - alpha) / replicates as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub alpha: f64,
    pub replicates: usize,
    pub rows: Vec<CoverageRow>,
}

/// Empirical frequency, per method, of replicates whose envelope undercounts
/// the true nulls. Replicates run in parallel; results do not depend on the
/// number of workers.
pub fn coverage_mc(cfg: &SimConfig) -> SimResult<CoverageReport> {
    coverage_mc_in(&thread_pool(), cfg)
}

/// [`coverage_mc`] on a caller-provided pool.
pub fn coverage_mc_in(pool: &ThreadPool, cfg: &SimConfig) -> SimResult<CoverageReport> {
    if cfg.replicates < MIN_REPLICATES {
        return Err(SimError::config("replicates", format!("coverage needs at least {MIN_REPLICATES}")));
    }
    if cfg.methods.is_empty() {
        return Err(SimError::config("methods", "at least one method required"));
    }
    let sim = Simulator::new(cfg)?;
    let per_replicate: Vec<Vec<bool>> = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let data = sim.draw(r as u64)?;
                cfg.methods
                    .iter()
                    .map(|&method| {
                        let fit = MethodFit::new(method, &data.family, cfg.alpha)
                            .map_err(|source| SimError::Method { method: method.to_string(), source })?;
                        violates(|s| fit.bound(s), &data.is_null).map_err(SimError::from)
                    })
                    .collect()
            })
            .collect::<SimResult<_>>()
    })?;
    let rows = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let violations = per_replicate.iter().filter(|r| r[j]).count();
            CoverageRow {
                method,
                violations,
                replicates: cfg.replicates,
                rate: violations as f64 / cfg.replicates as f64,
            }
        })
        .collect();
    Ok(CoverageReport { alpha: cfg.alpha, replicates: cfg.replicates, rows })
}
