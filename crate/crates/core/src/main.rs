use clap::{Parser, Subcommand};
use eulerflow::{presets, reproduce, scenario};
use std::path::PathBuf;
use std::process::ExitCode;

/// Geodesic completeness of left-invariant Lorentzian metrics on SL2(R) and SL2(C).
#[derive(Parser)]
#[command(name = "eulerflow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario and write report.json plus CSV artifacts.
    Analyze {
        scenario: PathBuf,
        /// Output directory, overriding the scenario's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the reference checks and print one line per criterion.
    ReproducePaper {
        /// Only criteria whose id, name or tag matches.
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for reproduce.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in metric presets.
    Presets,
}

fn init_threads() {
    let Ok(v) = std::env::var("EULERFLOW_THREADS") else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("warning: cannot configure {n} threads: {e}");
            }
        }
        _ => eprintln!("warning: ignoring EULERFLOW_THREADS={v:?}"),
    }
}

fn main() -> ExitCode {
    init_threads();
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Analyze { scenario: path, out } => scenario::execute(&path, out.as_deref()),
        Command::ReproducePaper { filter, seed, out } => {
            let report = reproduce::run(seed, filter.as_deref());
            print!("{}", report.table());
            if let Some(dir) = out {
                let json = serde_json::to_string_pretty(&report).expect("report is serializable") + "\n";
                let written = std::fs::create_dir_all(&dir)
                    .and_then(|_| scenario::write_atomic(&dir.join("reproduce.json"), json.as_bytes()));
                if let Err(e) = written {
                    eprintln!("error: cannot write to {}: {e}", dir.display());
                    return ExitCode::from(scenario::EXIT_NUMERIC as u8);
                }
            }
            if report.all_passed() {
                scenario::EXIT_OK
            } else {
                scenario::EXIT_NUMERIC
            }
        }
        Command::Presets => {
            for p in presets::PRESETS {
                println!("{:<28} {:?}  {}", p.name, p.kind, p.description);
            }
            scenario::EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}
