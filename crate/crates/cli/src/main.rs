use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stationary_light_cli::{parse_config, run_scenario, Overrides, ScenarioName};

#[derive(Parser)]
#[command(name = "slp", version, about = "Stationary light pulse scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its data files.
    Run {
        #[arg(long)]
        scenario: String,
        /// key=value file; flags override its entries
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        nz: Option<usize>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long = "kappa-plus-sq")]
        kappa_plus_sq: Option<f64>,
        #[arg(long)]
        la: Option<f64>,
        #[arg(long = "gamma-bc")]
        gamma_bc: Option<f64>,
    },
    /// Print the scenario catalog.
    List,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for s in ScenarioName::ALL {
                println!("{:<24} {:<15} {}", s.as_str(), s.figure(), s.description());
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            scenario,
            config,
            out,
            nz,
            tmax,
            kappa_plus_sq,
            la,
            gamma_bc,
        } => {
            let overrides = Overrides {
                scenario: Some(scenario),
                out,
                nz,
                t_max: tmax,
                kappa_plus_sq,
                l_a: la,
                gamma_bc,
            };
            let cfg = match parse_config(config.as_deref(), &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match run_scenario(&cfg) {
                Ok(art) => {
                    for f in &art.files {
                        println!("wrote {}", f.display());
                    }
                    for (k, v) in &art.metrics {
                        println!("{k} = {v:.6e}");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
