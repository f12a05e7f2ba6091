use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ensemble_planner::planner::{plan, Outcome};
use ensemble_planner::report::{export_report, ReportFormat, RunReport};
use ensemble_planner::scenario::builtin::{builtin, builtin_scenarios};
use ensemble_planner::scenario::{load_scenario_file, Scenario};
use ensemble_planner::Result;

#[derive(Parser)]
#[command(name = "ensemble-planner", version, about = "Cooperative trajectory-ensemble planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a scenario file or a built-in scenario and write the reports.
    Run {
        /// Path to a scenario file, or the name of a built-in scenario.
        scenario: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Profiles sampled per vehicle.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::All)]
        format: Format,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// List the built-in scenarios.
    ListBuiltins,
    /// Load and validate a scenario file.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    All,
}

fn resolve(scenario: &str) -> Result<Scenario> {
    let path = PathBuf::from(scenario);
    if path.exists() {
        load_scenario_file(&path)
    } else {
        builtin(scenario)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::ListBuiltins => {
            for s in builtin_scenarios() {
                let row: Vec<String> = s.right_of_way.iter().map(|(a, b)| format!("{a}>{b}")).collect();
                println!("{}\tego={}\tright_of_way=[{}]", s.name, s.ego, row.join(","));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { file } => {
            let s = load_scenario_file(&file)?;
            println!("{}: ok ({} vehicles)", s.name, s.vehicles.len());
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            scenario,
            seed,
            samples,
            dt,
            horizon,
            format,
            out_dir,
        } => {
            let s = resolve(&scenario)?;
            let mut config = s.sampling.clone();
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(n) = samples {
                config.profiles_per_vehicle = n;
            }
            if let Some(dt) = dt {
                config.dt = dt;
            }
            if let Some(h) = horizon {
                config.horizon = h;
            }
            let result = plan(&s, &config)?;
            let formats: &[ReportFormat] = match format {
                Format::Csv => &[ReportFormat::Csv],
                Format::Json => &[ReportFormat::Json],
                Format::All => &[ReportFormat::Csv, ReportFormat::Json],
            };
            let report = RunReport {
                scenario: &s,
                config: &config,
                result: &result,
            };
            for path in export_report(&report, formats, &out_dir)? {
                eprintln!("wrote {}", path.display());
            }
            match result.outcome {
                Outcome::Selected => {
                    println!(
                        "{}: selected, cost {:.6}, {} candidates, {} plan-B checks",
                        s.name,
                        result.total_cost.unwrap_or(f64::NAN),
                        result.candidates_evaluated,
                        result.plan_b_checks
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Outcome::EmergencyBrake => {
                    println!(
                        "{}: emergency_brake after {} candidates",
                        s.name, result.candidates_evaluated
                    );
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
