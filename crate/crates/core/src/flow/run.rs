use super::maintenance::maintain_spacing;
use super::{project_area, step, FlowConfig, FlowError, FlowState, StepReport};
use crate::geometry::RegionBoundary;

/// Consecutive quiet steps required by the stopping rule.
const QUIET_STEPS: usize = 10;

/// Output of [`run_flow`].
#[derive(Clone, Debug, PartialEq)]
pub struct FlowRun {
    pub reports: Vec<StepReport>,
    /// the initial state, every `sample_every`-th state and the last state
    pub samples: Vec<FlowState>,
    pub final_state: FlowState,
}

/// A run that stopped on an error, with everything computed before it.
#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    /// index of the step that failed
    pub step: usize,
    pub error: FlowError,
    pub partial: FlowRun,
}

/// Checks the area, resamples curves whose spacing is far from the target
/// and projects the area exactly onto the target.
pub fn prepare_initial(initial: &RegionBoundary, cfg: &FlowConfig) -> Result<FlowState, FlowError> {
    cfg.validate()?;
    if (initial.area() - cfg.area).abs() > 1e-4 {
        return Err(FlowError::InitialArea {
            area: initial.area(),
            target: cfg.area,
        });
    }
    let resampled = maintain_spacing(initial, cfg.target_spacing())?;
    Ok(FlowState {
        region: project_area(resampled.as_ref().unwrap_or(initial), cfg.area)?,
        time: 0.0,
        step: 0,
    })
}

/// Steps the flow until `max_time` or until the residual at the start of a
/// step stays at or below `stop_tolerance` for ten consecutive steps.
pub fn run_flow(initial: &RegionBoundary, cfg: &FlowConfig) -> Result<FlowRun, Box<RunFailure>> {
    let fail = |step: usize, error: FlowError, partial: FlowRun| {
        Box::new(RunFailure {
            step,
            error,
            partial,
        })
    };
    let start = match prepare_initial(initial, cfg) {
        Ok(s) => s,
        Err(e) => {
            let s = FlowState {
                region: initial.clone(),
                time: 0.0,
                step: 0,
            };
            return Err(fail(
                0,
                e,
                FlowRun {
                    reports: Vec::new(),
                    samples: vec![s.clone()],
                    final_state: s,
                },
            ));
        }
    };
    let steps = (cfg.max_time / cfg.h - 1e-9).ceil().max(0.0) as usize;
    let mut reports = Vec::with_capacity(steps);
    let mut samples = vec![start.clone()];
    let mut state = start;
    let mut quiet = 0usize;
    for k in 0..steps {
        match step(&state, cfg) {
            Ok((next, report)) => {
                let stop = match cfg.stop_tolerance {
                    Some(tol) if report.el_residual_start <= tol => {
                        quiet += 1;
                        quiet >= QUIET_STEPS
                    }
                    _ => {
                        quiet = 0;
                        false
                    }
                };
                reports.push(report);
                state = next;
                if state.step % cfg.sample_every == 0 {
                    samples.push(state.clone());
                }
                if stop {
                    break;
                }
            }
            Err(e) => {
                if samples.last().map(|s| s.step) != Some(state.step) {
                    samples.push(state.clone());
                }
                return Err(fail(
                    k + 1,
                    e,
                    FlowRun {
                        reports,
                        samples,
                        final_state: state,
                    },
                ));
            }
        }
    }
    if samples.last().map(|s| s.step) != Some(state.step) {
        samples.push(state.clone());
    }
    Ok(FlowRun {
        reports,
        samples,
        final_state: state,
    })
}
