//! Multi-threaded campaigns over the deterministic block layout.

use oris_link_core::mc::sim::{CampaignPlan, Simulator, Tally};
use serde::Serialize;

pub const THREADS_ENV: &str = "ORIS_LINK_THREADS";

/// Worker count: explicit flag, else `ORIS_LINK_THREADS`, else the number
/// of available cores.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    if let Some(w) = flag {
        return w.max(1);
    }
    if let Some(w) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        return w.max(1);
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Worker `w` runs blocks `w, w + W, w + 2W, …`; tallies are summed, so the
/// result does not depend on `workers`.
pub fn run_parallel(plan: &CampaignPlan, sim: &Simulator, gamma_th: f64, workers: usize) -> Tally {
    let blocks = plan.blocks();
    let workers = (workers.max(1) as u64).min(blocks.max(1));
    if workers == 1 {
        return plan.run(sim, gamma_th);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    plan.run_blocks(sim, gamma_th, (w..blocks).step_by(workers as usize))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("campaign worker panicked"))
            .fold(Tally::default(), Tally::merge)
    })
}

/// Serialized campaign result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub metric: String,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub trials: u64,
    pub seed: u64,
    pub config_digest: String,
}
