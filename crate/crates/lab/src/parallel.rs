//! Multithreaded Monte Carlo runs.
//!
//! Replicates are independent (each owns its random streams), so they are
//! farmed out to a rayon pool and then reduced in replicate order. The
//! results are bit-identical for every thread count.

use rayon::prelude::*;
use spillover_core::simulator::{
    figure4_configs, ReplicateOutcome, Simulation, SimulationConfig, SimulationSummary,
};

use crate::error::{LabError, Result};

pub const THREADS_ENV: &str = "SPILLOVER_LAB_THREADS";

/// Worker count: `SPILLOVER_LAB_THREADS` if set to a positive integer,
/// otherwise the available parallelism.
pub fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(LabError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| LabError::Usage(format!("cannot start {threads} worker threads: {e}")))
}

/// All replicate outcomes of `config`, in replicate order.
pub fn replicate_outcomes(config: &SimulationConfig, threads: usize) -> Result<Vec<ReplicateOutcome>> {
    run(&Simulation::new(config)?, threads)
}

fn run(sim: &Simulation, threads: usize) -> Result<Vec<ReplicateOutcome>> {
    let results: Vec<_> = pool(threads)?.install(|| {
        (0..sim.config().n_reps as u64)
            .into_par_iter()
            .map(|r| sim.replicate(r))
            .collect()
    });
    // Report the lowest failing replicate regardless of scheduling.
    results
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(LabError::from)
}

pub fn monte_carlo(config: &SimulationConfig, threads: usize) -> Result<SimulationSummary> {
    let sim = Simulation::new(config)?;
    let outcomes = run(&sim, threads)?;
    Ok(sim.summarize(&outcomes))
}

/// The nine-model study, one summary per preset in display order.
pub fn figure4(
    n_obs: usize,
    n_reps: usize,
    master_seed: u64,
    confidence_level: f64,
    threads: usize,
) -> Result<Vec<SimulationSummary>> {
    figure4_configs(n_obs, n_reps, master_seed)
        .into_iter()
        .map(|mut config| {
            config.confidence_level = confidence_level;
            monte_carlo(&config, threads)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use spillover_core::simulator;
    use spillover_core::Preset;

    #[test]
    fn matches_the_sequential_runner() {
        let config = SimulationConfig::for_preset(Preset::Fig2C)
            .with_sizes(300, 24)
            .with_seed(77);
        let sequential = simulator::monte_carlo(&config).unwrap();
        for threads in [1, 3, 8] {
            assert_eq!(monte_carlo(&config, threads).unwrap(), sequential);
        }
    }
}
