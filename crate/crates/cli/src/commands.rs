use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use flatflow_core::analysis::{
    alexandrov_scaling, detect_limit, fit_decay, persistence_sweep, run_sweep,
    verify_alexandrov_along_flow, verify_flow_invariants, AlexandrovReport, AnalysisError,
    RateFit, SweepJob, TimeSeries, VerificationReport,
};
use flatflow_core::catalog::{
    classify, enumerate_catalog, ClassificationResult, PerimeterCatalog, ReferenceConfig,
    StripBand, Verdict,
};
use flatflow_core::flow::{project_area, run_flow, FlowConfig, FlowKind, FlowRun, RunFailure};
use flatflow_core::geometry::{snapshot, PeriodVector, RegionBoundary};
use serde::Serialize;

use crate::config::{ExperimentConfig, InitialShape};
use crate::output::{num, write_json, write_snapshots, write_steps_csv, write_table};
use crate::CliError;

/// Samples kept within this factor of a series' final value are treated as
/// its plateau and left out of rate fits.
const PLATEAU_FACTOR: f64 = 10.0;
/// Fraction of the decaying part used for rate fits.
const TAIL_FRACTION: f64 = 0.5;

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitOutcome {
    Fit(RateFit),
    Error(String),
}

impl From<Result<RateFit, AnalysisError>> for FitOutcome {
    fn from(r: Result<RateFit, AnalysisError>) -> Self {
        match r {
            Ok(f) => FitOutcome::Fit(f),
            Err(e) => FitOutcome::Error(e.to_string()),
        }
    }
}

fn fit(series: &TimeSeries) -> FitOutcome {
    fit_decay(series, PLATEAU_FACTOR, TAIL_FRACTION).into()
}

fn last_value(s: &TimeSeries) -> f64 {
    s.last().map_or(f64::NAN, |(_, v)| v)
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitSummary {
    pub verdict: Verdict,
    pub reference: ReferenceConfig,
    pub final_symmetric_difference: f64,
    pub final_hausdorff: f64,
    pub final_perimeter_gap: f64,
    pub final_deviation: f64,
    pub component_areas: Vec<f64>,
    pub min_separation: Option<f64>,
    pub zero_width_suspected: bool,
    pub symmetric_difference_fit: FitOutcome,
    pub deviation_fit: FitOutcome,
    pub perimeter_gap_fit: FitOutcome,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct FailureInfo {
    pub step: usize,
    pub error: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: ExperimentConfig,
    pub flow: FlowConfig,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureInfo>,
    pub steps: usize,
    pub final_time: f64,
    pub final_perimeter: f64,
    pub final_area: f64,
    pub invariants: VerificationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit: Option<LimitSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_error: Option<String>,
    pub alexandrov: AlexandrovReport,
}

impl RunReport {
    /// Exit classification: solver failure first, then failed checks.
    pub fn outcome(&self) -> Result<(), CliError> {
        if let Some(f) = &self.failure {
            return Err(CliError::Solver(format!("step {}: {}", f.step, f.error)));
        }
        let failed: Vec<&str> = self.invariants.failed().map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(CliError::Verification(failed.join(", ")));
        }
        Ok(())
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.limit.as_ref().map(|l| l.verdict)
    }
}

fn catalog_for(cfg: &ExperimentConfig, area: f64) -> Result<PerimeterCatalog, CliError> {
    Ok(enumerate_catalog(area, cfg.max_perimeter)?)
}

/// Measures a finished (or failed) run.
fn analyze(
    command: &str,
    cfg: &ExperimentConfig,
    flow: &FlowConfig,
    result: &Result<FlowRun, Box<RunFailure>>,
) -> Result<RunReport, CliError> {
    let (run, failure) = match result {
        Ok(r) => (r, None),
        Err(f) => (
            &f.partial,
            Some(FailureInfo {
                step: f.step,
                error: f.error.to_string(),
            }),
        ),
    };
    let catalog = catalog_for(cfg, flow.area)?;
    let (limit, limit_error) = match detect_limit(&run.samples, &catalog, cfg.epsilon0, flow.grid) {
        Ok(l) => (
            Some(LimitSummary {
                verdict: l.verdict,
                final_symmetric_difference: last_value(&l.symmetric_difference),
                final_hausdorff: last_value(&l.hausdorff),
                final_perimeter_gap: last_value(&l.perimeter_gap),
                final_deviation: last_value(&l.deviation),
                symmetric_difference_fit: fit(&l.symmetric_difference),
                deviation_fit: fit(&l.deviation),
                perimeter_gap_fit: fit(&l.perimeter_gap),
                reference: l.reference,
                component_areas: l.component_areas,
                min_separation: l.min_separation,
                zero_width_suspected: l.zero_width_suspected,
                report: l.report,
            }),
            None,
        ),
        Err(e) => (None, Some(e.to_string())),
    };
    let last = &run.final_state;
    Ok(RunReport {
        command: command.to_string(),
        config: cfg.clone(),
        flow: flow.clone(),
        status: if failure.is_some() { "failed" } else { "completed" }.to_string(),
        failure,
        steps: run.reports.len(),
        final_time: last.time,
        final_perimeter: last.region.perimeter(),
        final_area: last.region.area(),
        invariants: verify_flow_invariants(&run.reports, flow),
        limit,
        limit_error,
        alexandrov: verify_alexandrov_along_flow(&run.samples, &catalog, cfg.epsilon0),
    })
}

fn write_run(dir: &Path, result: &Result<FlowRun, Box<RunFailure>>, report: &RunReport) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let run = match result {
        Ok(r) => r,
        Err(f) => &f.partial,
    };
    write_steps_csv(&dir.join("steps.csv"), &run.reports)?;
    write_snapshots(dir, &run.samples)?;
    write_json(&dir.join("report.json"), report)
}

/// Runs the configured flow and writes `steps.csv`, `snapshots/` and
/// `report.json` into `out`. Artifacts are written even when the run fails.
pub fn simulate(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, CliError> {
    let initial = cfg.build_initial()?;
    let flow = cfg.flow_config(&initial);
    flow.validate()?;
    let result = run_flow(&initial, &flow);
    let report = analyze("simulate", cfg, &flow, &result)?;
    write_run(out, &result, &report)?;
    Ok(report)
}

/// Classification of a snapshot file against the catalog of its own area
/// (or `m`).
pub fn classify_snapshot(
    path: &Path,
    m: Option<f64>,
    epsilon0: f64,
    max_perimeter: f64,
) -> Result<ClassificationResult, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let region = snapshot::read_region(&text)?;
    let catalog = enumerate_catalog(m.unwrap_or_else(|| region.area()), max_perimeter)?;
    Ok(classify(&region, epsilon0, &catalog)?)
}

pub fn catalog_text(m: f64, max_perimeter: f64) -> Result<String, CliError> {
    Ok(enumerate_catalog(m, max_perimeter)?.to_text())
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingOutput {
    pub eps: Vec<f64>,
    pub slope: f64,
    pub r_squared: f64,
    pub report: VerificationReport,
}

/// Perimeter gap against curvature deviation over the amplitudes
/// `family_eps` of a perturbed disk or strip. Writes `alexandrov.csv` and
/// `report.json`.
pub fn verify_alexandrov(cfg: &ExperimentConfig, out: &Path) -> Result<ScalingOutput, CliError> {
    let (m, family) = match &cfg.initial {
        InitialShape::PerturbedDisk { r, .. } => {
            let m = cfg.m.unwrap_or(PI * r * r);
            let fam = cfg
                .family_eps
                .iter()
                .map(|&e| {
                    let e = cfg.build_shape(&with_amplitude(&cfg.initial, e))?;
                    Ok(project_area(&e, m)?)
                })
                .collect::<Result<Vec<RegionBoundary>, CliError>>()?;
            (m, fam)
        }
        InitialShape::PerturbedStrip { width, .. } => {
            let fam = cfg
                .family_eps
                .iter()
                .map(|&e| cfg.build_shape(&with_amplitude(&cfg.initial, e)))
                .collect::<Result<Vec<RegionBoundary>, CliError>>()?;
            (*width, fam)
        }
        _ => {
            return Err(CliError::Config(
                "verify-alexandrov needs a perturbedDisk or perturbedStrip initial shape".into(),
            ))
        }
    };
    let catalog = catalog_for(cfg, m)?;
    let s = alexandrov_scaling(&family, &catalog, cfg.epsilon0)?;
    fs::create_dir_all(out)?;
    let rows: Vec<Vec<String>> = cfg
        .family_eps
        .iter()
        .zip(&s.samples)
        .map(|(e, x)| {
            vec![
                num(*e),
                num(x.deviation),
                num(x.gap),
                num(x.ratio),
                num(x.perimeter),
                num(x.reference_perimeter),
            ]
        })
        .collect();
    write_table(
        &out.join("alexandrov.csv"),
        &["eps", "deviation", "gap", "ratio", "perimeter", "reference_perimeter"],
        &rows,
    )?;
    let output = ScalingOutput {
        eps: cfg.family_eps.clone(),
        slope: s.fit.slope,
        r_squared: s.fit.r_squared,
        report: s.report,
    };
    write_json(&out.join("report.json"), &output)?;
    check(&output.report)?;
    Ok(output)
}

fn with_amplitude(shape: &InitialShape, eps: f64) -> InitialShape {
    let mut s = shape.clone();
    match &mut s {
        InitialShape::PerturbedDisk { amplitude, .. } | InitialShape::PerturbedStrip { amplitude, .. } => {
            *amplitude = eps
        }
        _ => {}
    }
    s
}

fn check(report: &VerificationReport) -> Result<(), CliError> {
    let failed: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// Distance-persistence sweep around the unperturbed strip of a
/// `perturbedStrip` config; a plain `strip` config runs the `eps = 0` check.
/// Writes `persistence.csv` and `report.json`.
pub fn persistence(cfg: &ExperimentConfig, out: &Path) -> Result<VerificationReport, CliError> {
    if cfg.flow != FlowKind::Mcf {
        return Err(CliError::Config("persistence runs the curvature flow (flow = MCF)".into()));
    }
    let (period, offset, width) = match &cfg.initial {
        InitialShape::PerturbedStrip { offset, width, .. } => ([1, 0], *offset, *width),
        InitialShape::Strip { period, offset, width } => (*period, *offset, *width),
        _ => {
            return Err(CliError::Config(
                "persistence needs a strip or perturbedStrip initial shape".into(),
            ))
        }
    };
    let strip = ReferenceConfig::strips(
        PeriodVector::new(period[0], period[1]),
        vec![StripBand { offset, width }],
    )?;
    let f0 = cfg.build_initial()?;
    let mut flow = cfg.flow_config(&f0);
    fs::create_dir_all(out)?;
    let header = ["eps", "h", "steps", "initial_sup", "max_sup", "c_emp"];
    let row = |r: &flatflow_core::analysis::PersistenceReport| {
        vec![
            num(r.eps),
            num(r.h),
            r.steps.to_string(),
            num(r.initial_sup),
            num(r.max_sup),
            r.c_emp.map_or(String::new(), num),
        ]
    };
    let report = if matches!(cfg.initial, InitialShape::Strip { .. }) {
        let r = flatflow_core::analysis::distance_persistence_check(&f0, &strip, &flow, 0.0)?;
        write_table(&out.join("persistence.csv"), &header, &[row(&r)])?;
        write_json(&out.join("report.json"), &r)?;
        r.report
    } else {
        flow.h = cfg.persistence_h_cap;
        let sweep = persistence_sweep(
            &cfg.persistence_eps,
            |e| {
                cfg.build_shape(&with_amplitude(&cfg.initial, e))
                    .map_err(|err| AnalysisError::Precondition(err.to_string()))
            },
            &strip,
            &flow,
        )?;
        let rows: Vec<Vec<String>> = sweep.runs.iter().map(row).collect();
        write_table(&out.join("persistence.csv"), &header, &rows)?;
        write_json(&out.join("report.json"), &sweep)?;
        sweep.report
    };
    check(&report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub verdicts: Vec<Option<Verdict>>,
    pub verdicts_agree: bool,
}

/// One run per entry of `sweep`, executed concurrently; each writes its
/// artifacts into `out/run_<i>/`, and `aggregate.csv` gets one row per run.
pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepSummary, CliError> {
    if cfg.sweep.is_empty() {
        return Err(CliError::Config("field `sweep`: no sweep points".into()));
    }
    let configs: Vec<ExperimentConfig> = cfg.sweep.iter().map(|p| cfg.with_overrides(p)).collect();
    let mut jobs = Vec::with_capacity(configs.len());
    for (i, c) in configs.iter().enumerate() {
        c.validate()?;
        let initial = c.build_initial()?;
        let flow = c.flow_config(&initial);
        flow.validate()?;
        jobs.push(SweepJob {
            label: format!("run_{i}"),
            initial,
            cfg: flow,
        });
    }
    let outcomes = run_sweep(&jobs);
    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut first_error: Option<CliError> = None;
    for ((o, c), job) in outcomes.iter().zip(&configs).zip(&jobs) {
        let report = analyze("sweep", c, &job.cfg, &o.result)?;
        write_run(&out.join(&o.label), &o.result, &report)?;
        verdicts.push(report.verdict());
        rows.push(vec![
            o.label.clone(),
            num(c.h),
            c.grid.to_string(),
            c.seed.to_string(),
            report.steps.to_string(),
            num(report.final_time),
            num(report.final_perimeter),
            num(report.final_area),
            report
                .verdict()
                .map_or("unclassified".to_string(), |v| serde_json::to_string(&v).unwrap_or_default()),
            report
                .limit
                .as_ref()
                .map_or(String::new(), |l| num(l.final_symmetric_difference)),
            report.status.clone(),
        ]);
        if let Err(e) = report.outcome() {
            let worse = match &first_error {
                None => true,
                Some(prev) => e.exit_code() == 4 && prev.exit_code() != 4,
            };
            if worse {
                first_error = Some(e);
            }
        }
    }
    write_table(
        &out.join("aggregate.csv"),
        &[
            "run",
            "h",
            "grid",
            "seed",
            "steps",
            "final_time",
            "final_perimeter",
            "final_area",
            "verdict",
            "final_symmetric_difference",
            "status",
        ],
        &rows,
    )?;
    let verdicts_agree = verdicts.windows(2).all(|w| w[0] == w[1]);
    let summary = SweepSummary {
        runs: outcomes.len(),
        verdicts,
        verdicts_agree,
    };
    write_json(&out.join("report.json"), &summary)?;
    if let Some(e) = first_error {
        return Err(e);
    }
    if !summary.verdicts_agree {
        return Err(CliError::Verification("limit verdicts differ across the sweep".into()));
    }
    Ok(summary)
}
