use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flatflow::commands;
use flatflow::config::{load_config, ExperimentConfig};
use flatflow::output::{to_json, write_json};
use flatflow::CliError;

#[derive(Parser)]
#[command(name = "flatflow", version, about = "Flat-flow experiments on the flat torus")]
struct Cli {
    /// experiment config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory; overrides `out`
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Poisson grid size; overrides `grid`
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// time step; overrides `h`
    #[arg(long, global = true)]
    h: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one flow and write steps.csv, snapshots/ and report.json
    Simulate,
    /// Classify a snapshot curve file against the critical catalog
    Classify {
        snapshot: PathBuf,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long, default_value_t = flatflow_core::catalog::DEFAULT_EPSILON0)]
        epsilon0: f64,
        #[arg(long, default_value_t = 6.0)]
        max_perimeter: f64,
    },
    /// List the critical configurations of area m with perimeter at most M
    Catalog {
        #[arg(long)]
        m: Option<f64>,
        #[arg(long = "max-perimeter")]
        max_perimeter: Option<f64>,
        /// `m=<area>` and `M=<cap>` pairs
        params: Vec<String>,
    },
    /// Perimeter gap against curvature deviation over a perturbation family
    VerifyAlexandrov,
    /// Distance persistence near a strip
    Persistence,
    /// Run every entry of `sweep` and aggregate
    Sweep,
}

impl Cli {
    fn experiment(&self) -> Result<ExperimentConfig, CliError> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
        let mut cfg = load_config(path)?;
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn catalog_params(
    m: Option<f64>,
    cap: Option<f64>,
    params: &[String],
) -> Result<(f64, f64), CliError> {
    let (mut m, mut cap) = (m, cap);
    for p in params {
        let (k, v) = p
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{p}`")))?;
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::Config(format!("field `{k}`: `{v}` is not a number")))?;
        match k {
            "m" => m = Some(v),
            "M" => cap = Some(v),
            _ => return Err(CliError::Config(format!("unknown parameter `{k}`"))),
        }
    }
    let m = m.ok_or_else(|| CliError::Config("field `m`: missing".into()))?;
    if !(m > 0.0 && m < 1.0) {
        return Err(CliError::Config(format!("field `m`: {m} is not in (0, 1)")));
    }
    Ok((m, cap.unwrap_or(6.0)))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate => {
            let cfg = cli.experiment()?;
            let report = commands::simulate(&cfg, &cfg.out)?;
            println!(
                "{} steps, final perimeter {:.6}, verdict {}",
                report.steps,
                report.final_perimeter,
                report
                    .verdict()
                    .map_or("unclassified".to_string(), |v| format!("{v:?}"))
            );
            report.outcome()
        }
        Command::Classify {
            snapshot,
            m,
            epsilon0,
            max_perimeter,
        } => {
            let r = commands::classify_snapshot(snapshot, *m, *epsilon0, *max_perimeter)?;
            let text = to_json(&r)?;
            print!("{text}");
            if let Some(o) = &cli.out {
                std::fs::create_dir_all(o)?;
                write_json(&o.join("classification.json"), &r)?;
            }
            Ok(())
        }
        Command::Catalog {
            m,
            max_perimeter,
            params,
        } => {
            let (m, cap) = catalog_params(*m, *max_perimeter, params)?;
            let text = commands::catalog_text(m, cap)?;
            let out = cli.out_dir();
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("catalog.txt"), &text)?;
            print!("{text}");
            Ok(())
        }
        Command::VerifyAlexandrov => {
            let cfg = cli.experiment()?;
            let s = commands::verify_alexandrov(&cfg, &cfg.out)?;
            println!("slope {:.4} (r² {:.4})", s.slope, s.r_squared);
            Ok(())
        }
        Command::Persistence => {
            let cfg = cli.experiment()?;
            let r = commands::persistence(&cfg, &cfg.out)?;
            println!("{} checks passed", r.passed().count());
            Ok(())
        }
        Command::Sweep => {
            let cfg = cli.experiment()?;
            let s = commands::sweep(&cfg, &cfg.out)?;
            println!("{} runs, verdicts agree: {}", s.runs, s.verdicts_agree);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
