//! Batch driver for simulation and estimation experiments.
//!
//! Every subcommand reads a JSON study configuration and writes CSV/JSON
//! outputs under `--out`. Exit codes: 0 success, 2 configuration error,
//! 3 numerical/runtime error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use levydecon::estimate::{decay_diagnostic, run_pipeline, write_estimate_csv};
use levydecon::levy_model::{triplet_pushforward, LevyTriplet};
use levydecon::multiplier::{
    check_injectivity, check_simple_condition, check_uniform_bound, default_probe_grid,
    fit_lower_bound, multiplier_closed_form,
};
use levydecon::simulate::{derive_replication_seed, simulate_field};
use levydecon::studyctl::{run_study, truth_on_grid, write_study_outputs, StudyConfig, StudyError};

#[derive(Parser)]
#[command(name = "levydecon", version, about = "Lévy density recovery for moving-average random fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Study configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Override the config's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one field realization and write it as field.csv.
    Simulate(CommonArgs),
    /// Simulate one replication and run the full estimation pipeline.
    Estimate(CommonArgs),
    /// Run the replicated study and write summary tables and plot data.
    Study {
        #[command(flatten)]
        common: CommonArgs,
        /// Use the full-scale 2D setting (100x100 lattice, 100 replications)
        /// instead of the desk-scale default.
        #[arg(long)]
        full: bool,
    },
    /// Evaluate the kernel's multiplier and its solvability reports.
    Multiplier(CommonArgs),
    /// Decay diagnostic of the model's exact weighted field density.
    Diagnose(CommonArgs),
}

enum CliError {
    Config(String),
    Numerical(String),
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Config(msg) => CliError::Config(msg),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<StudyConfig, CliError> {
    let mut cfg = StudyConfig::load(&args.config).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    Ok(cfg)
}

fn ensure_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Numerical(format!("creating {}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Numerical(format!("writing {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(&args)?;
            ensure_out(&args.out)?;
            let seed = derive_replication_seed(cfg.base_seed, 0);
            let sample = simulate_field(&cfg.model.kernel, &cfg.model.v0.density(), &cfg.grid, seed)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let mut buf = Vec::new();
            sample.write_csv(&mut buf).map_err(|e| CliError::Numerical(e.to_string()))?;
            write_text(&args.out.join("field.csv"), &String::from_utf8(buf).expect("utf-8"))?;
            println!("simulated {} sites with seed {seed}", sample.values.len());
            Ok(())
        }
        Command::Estimate(args) => {
            let cfg = load_config(&args)?;
            ensure_out(&args.out)?;
            let grid = cfg.log_grid.build()?;
            let mu = multiplier_closed_form(&cfg.model.kernel, cfg.estimator.u, cfg.estimator.c)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let seed = derive_replication_seed(cfg.base_seed, 0);
            let sample = simulate_field(&cfg.model.kernel, &cfg.model.v0.density(), &cfg.grid, seed)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let result = run_pipeline(&sample, &mu, &cfg.estimator, grid)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let truth = truth_on_grid(&cfg.model.v0.density(), &cfg.estimator.u, grid);
            let mut buf = Vec::new();
            write_estimate_csv(&result, Some(&truth), &mut buf)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            write_text(&args.out.join("estimate.csv"), &String::from_utf8(buf).expect("utf-8"))?;
            let diagnostics = serde_json::json!({
                "seed": seed,
                "n": sample.values.len(),
                "diagnostics": result.diagnostics,
            });
            write_text(
                &args.out.join("diagnostics.json"),
                &serde_json::to_string_pretty(&diagnostics).expect("json"),
            )?;
            println!("estimate written (a_n = {})", result.diagnostics.a_n);
            Ok(())
        }
        Command::Study { common, full } => {
            let mut cfg = load_config(&common)?;
            if full && cfg.grid.dimension == 2 {
                cfg.grid.shape = vec![100, 100];
                cfg.grid.origin = vec![-50, -50];
                cfg.replications = 100;
            }
            ensure_out(&common.out)?;
            let output = run_study(&cfg)?;
            let files = write_study_outputs(&output, &common.out)?;
            for row in &output.result.rows {
                println!(
                    "{:>5} l={} mean_mse={:.6e} sd={:.6e}",
                    row.estimator.as_str(),
                    row.l,
                    row.mean_mse,
                    row.sd_mse
                );
            }
            println!("wrote {} files to {}", files.len(), common.out.display());
            Ok(())
        }
        Command::Multiplier(args) => {
            let cfg = load_config(&args)?;
            ensure_out(&args.out)?;
            let mu = multiplier_closed_form(&cfg.model.kernel, cfg.estimator.u, cfg.estimator.c)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let probe = default_probe_grid();
            let mut csv = String::from("x,re_plus,im_plus,abs_plus,re_minus,im_minus,abs_minus\n");
            for &x in probe.iter().step_by(16) {
                let p = mu.eval_plus(x);
                let m = mu.eval_minus(x);
                csv.push_str(&format!(
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    x,
                    p.re,
                    p.im,
                    p.norm(),
                    m.re,
                    m.im,
                    m.norm()
                ));
            }
            write_text(&args.out.join("multiplier.csv"), &csv)?;
            let injectivity = check_injectivity(&mu, &probe);
            let uniform = check_uniform_bound(&mu, &probe);
            let certificate = fit_lower_bound(&mu, 1.0, &probe).ok();
            let simple_condition = match &cfg.model.kernel {
                levydecon::levy_model::KernelSpec::Simple { steps } => {
                    let values: Vec<f64> = steps.iter().map(|s| s.value).collect();
                    let measures: Vec<f64> = steps.iter().map(|s| s.measure).collect();
                    check_simple_condition(&values, &measures, cfg.estimator.u, cfg.estimator.c)
                        .ok()
                }
                _ => None,
            };
            let report = serde_json::json!({
                "kernel": cfg.model.kernel.id(),
                "bound_constant": mu.bound_constant(),
                "injectivity": injectivity,
                "uniform_bound": uniform,
                "lower_bound_alpha1_1": certificate,
                "simple_condition": simple_condition,
            });
            write_text(
                &args.out.join("report.json"),
                &serde_json::to_string_pretty(&report).expect("json"),
            )?;
            println!(
                "multiplier report: ae_nonvanishing={} bounded_below={}",
                injectivity.ae_nonvanishing, uniform.bounded_below
            );
            Ok(())
        }
        Command::Diagnose(args) => {
            let cfg = load_config(&args)?;
            ensure_out(&args.out)?;
            let grid = cfg.log_grid.build()?;
            let v0 = cfg.model.v0.density();
            let t0 = match cfg.model.triplet {
                Some(t) => LevyTriplet::new(t.a0, t.b0, v0)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                None => LevyTriplet::pure_jump(v0),
            };
            let t1 = triplet_pushforward(&t0, &cfg.model.kernel)
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let u = cfg.estimator.u;
            let uv1 = levydecon::logfourier::SignedGridFunction::from_real_fn(grid, |x| {
                u.eval(x) * t1.v.eval(x)
            });
            let diag = decay_diagnostic(&uv1, 1e5);
            let mut csv = String::from("x,integral\n");
            for (x, i) in &diag.curve {
                csv.push_str(&format!("{:.16e},{:.16e}\n", x, i));
            }
            write_text(&args.out.join("decay.csv"), &csv)?;
            let report = serde_json::json!({
                "fitted_b": diag.fitted_b,
                "fitted_b_se": diag.fitted_b_se,
                "bounded": diag.bounded,
                "curve_end": diag.curve.last(),
            });
            write_text(
                &args.out.join("report.json"),
                &serde_json::to_string_pretty(&report).expect("json"),
            )?;
            println!("decay diagnostic: fitted_b={:.4} bounded={}", diag.fitted_b, diag.bounded);
            Ok(())
        }
    }
}
