use fdenvelope_core::Method;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::config::SimConfig;
use crate::envelopes::{median_rows, run_envelopes, write_curve_rows, MethodCurve, CURVES_HEADER};
use crate::error::SimResult;
use crate::generate::Simulator;
use crate::parallel::thread_pool;

/// Curves of every configured method on every replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRuns {
    pub methods: Vec<Method>,
    pub replicates: Vec<Vec<MethodCurve>>,
}

impl SimulationRuns {
    pub fn curves_csv(&self) -> String {
        let mut out = String::from(CURVES_HEADER);
        out.push('\n');
        for (r, curves) in self.replicates.iter().enumerate() {
            write_curve_rows(&mut out, r, curves);
        }
        out
    }

    pub fn medians_csv(&self) -> String {
        median_rows(&self.replicates)
    }
}

pub fn run_simulation(cfg: &SimConfig) -> SimResult<SimulationRuns> {
    run_simulation_in(&thread_pool(), cfg)
}

/// [`run_simulation`] on a caller-provided pool.
pub fn run_simulation_in(pool: &ThreadPool, cfg: &SimConfig) -> SimResult<SimulationRuns> {
    let sim = Simulator::new(cfg)?;
    let replicates = pool.install(|| {
        (0..cfg.replicates)
            .into_par_iter()
            .map(|r| {
                let data = sim.draw(r as u64)?;
                run_envelopes(&data.family, &data.is_null, &cfg.methods, cfg.alpha)
            })
            .collect::<SimResult<Vec<_>>>()
    })?;
    Ok(SimulationRuns { methods: cfg.methods.clone(), replicates })
}
