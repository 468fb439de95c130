use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use proxilift::proximality::Budget;
use proxilift_cli::analyze::{analyze, exit_code, parse_epsilon, Mode, Options};
use proxilift_cli::demo::{demo_sl, summary_text, to_csv, DemoConfig};

/// Exact proximality analysis of finite actions and their measure lifts.
#[derive(Parser)]
#[command(name = "proxilift", version)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "PROXILIFT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a JSON spec file.
    Analyze {
        spec: PathBuf,
        #[arg(long, default_value_t = 2, env = "PROXILIFT_GRID")]
        grid: usize,
        #[arg(long, default_value_t = 64, env = "PROXILIFT_MAX_WORD_LEN")]
        max_word_len: usize,
        #[arg(long, default_value_t = 100_000, env = "PROXILIFT_MAX_CLOSURE")]
        max_closure: usize,
        #[arg(long, default_value = "1/1000", env = "PROXILIFT_EPSILON")]
        epsilon: String,
        #[arg(long, value_enum, default_value = "base", env = "PROXILIFT_MODE")]
        mode: Mode,
        #[arg(long, value_enum, default_value = "json", env = "PROXILIFT_FORMAT")]
        format: Format,
        #[arg(long, default_value_t = 0, env = "PROXILIFT_SEED")]
        seed: u64,
        /// Random trials for the law checks (psi, affine modes).
        #[arg(long, default_value_t = 200, env = "PROXILIFT_TRIALS")]
        trials: usize,
        /// Replay every witness word and record the result.
        #[arg(long, env = "PROXILIFT_VERIFY")]
        verify: bool,
        /// Write the report here instead of stdout.
        #[arg(long, short, env = "PROXILIFT_OUTPUT")]
        output: Option<PathBuf>,
    },
    /// Tabulate the special linear group demonstration as CSV.
    DemoSl {
        #[arg(long, default_value_t = 2000, env = "PROXILIFT_STEPS")]
        steps: usize,
        /// Cells per axis of the discretized initial measure.
        #[arg(long, default_value_t = 16, env = "PROXILIFT_CELLS")]
        cells: usize,
        #[arg(long, default_value_t = 0.1, env = "PROXILIFT_RADIUS")]
        radius: f64,
        /// Half-widths of the nested cubes.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8", env = "PROXILIFT_CUBES")]
        cubes: Vec<f64>,
        /// Write the CSV here instead of stdout; the summary goes to stderr.
        #[arg(long, short, env = "PROXILIFT_OUTPUT")]
        output: Option<PathBuf>,
    },
}

fn emit(text: &str, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("thread pool")?;
    }
    match cli.command {
        Command::Analyze {
            spec, grid, max_word_len, max_closure, epsilon, mode, format, seed, trials, verify, output,
        } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let budget = Budget::new(max_word_len, max_closure, parse_epsilon(&epsilon)?)?;
            let opts = Options { mode, grid, budget, seed, trials, verify };
            let report = analyze(&text, &opts).with_context(|| spec.display().to_string())?;
            let rendered = match format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            emit(&rendered, output.as_ref())?;
            Ok(exit_code(&report))
        }
        Command::DemoSl { steps, cells, radius, cubes, output } => {
            anyhow::ensure!(cells > 0 && radius > 0.0, "--cells and --radius must be positive");
            let cfg = DemoConfig { steps, cells, radius, cubes };
            let (rows, summary) = demo_sl(&cfg);
            emit(&to_csv(&cfg, &rows), output.as_ref())?;
            eprint!("{}", summary_text(&cfg, &summary));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
