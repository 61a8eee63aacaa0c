use rayon::prelude::*;

use crate::flow::{run_flow, FlowConfig, FlowRun, RunFailure};
use crate::geometry::RegionBoundary;

#[derive(Clone, Debug)]
pub struct SweepJob {
    pub label: String,
    pub initial: RegionBoundary,
    pub cfg: FlowConfig,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub label: String,
    pub result: Result<FlowRun, Box<RunFailure>>,
}

/// Runs independent flows concurrently. Outcomes come back in job order.
pub fn run_sweep(jobs: &[SweepJob]) -> Vec<SweepOutcome> {
    jobs.par_iter()
        .map(|job| SweepOutcome {
            label: job.label.clone(),
            result: run_flow(&job.initial, &job.cfg),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowKind;
    use crate::geometry::{shapes, Vec2};

    #[test]
    fn outcomes_in_job_order_and_independent() {
        let jobs: Vec<SweepJob> = [0.15, 0.2, 0.25]
            .iter()
            .map(|&r| {
                let e = shapes::disk(Vec2::new(0.5, 0.5), r, 300).unwrap();
                let mut cfg = FlowConfig::new(FlowKind::Mcf, 1e-3, e.area());
                cfg.max_time = 3e-3;
                SweepJob {
                    label: format!("r={r}"),
                    initial: e,
                    cfg,
                }
            })
            .collect();
        let out = run_sweep(&jobs);
        let labels: Vec<&str> = out.iter().map(|o| o.label.as_str()).collect();
        assert_eq!(labels, ["r=0.15", "r=0.2", "r=0.25"]);
        let solo = run_flow(&jobs[1].initial, &jobs[1].cfg).unwrap();
        assert_eq!(out[1].result.as_ref().unwrap(), &solo);
    }
}
