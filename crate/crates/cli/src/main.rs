//! Command-line driver: load a circuit and a hardware config, run the
//! hybrid mapper, write the program and metrics artifacts.
//!
//! Exit codes: 0 ok, 2 parse error, 3 capacity error, 4 routing failure,
//! 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use atomap::error::MapError;
use atomap::hardware::parse_hardware;
use atomap::pipeline::{self, Mode, ReportFormat, RunConfig};
use atomap::{presets, Hardware};

#[derive(Parser, Debug)]
#[command(
    name = "atomap",
    about = "Hybrid gate/shuttling circuit mapper for neutral-atom hardware"
)]
struct Args {
    /// Circuit source file (QASM-2 subset).
    #[arg(long)]
    circuit: PathBuf,

    /// Hardware config: a preset name (shuttling, gate, mixed) or a path
    /// to a key-value config file.
    #[arg(long)]
    hardware: String,

    /// Mapping mode.
    #[arg(long, default_value = "hybrid")]
    mode: String,

    /// Decision ratio alpha_g/alpha_s ("inf" forces gate-based decisions).
    #[arg(long, default_value = "1")]
    alpha: String,

    /// Comma-separated alpha values; runs each and keeps the best.
    #[arg(long)]
    sweep: Option<String>,

    /// Lookahead depth in DAG layers.
    #[arg(long, default_value_t = 5)]
    lookahead: usize,

    /// Decay rate of the SWAP cost.
    #[arg(long, default_value_t = 0.0)]
    lambda_t: f64,

    /// Lookahead weight in both cost functions.
    #[arg(long, default_value_t = 0.1)]
    w_l: f64,

    /// Parallelism weight in the shuttle cost.
    #[arg(long, default_value_t = 0.1)]
    w_t: f64,

    /// Recent-move window for grouping and the parallel term.
    #[arg(long, default_value_t = 4)]
    window: usize,

    /// Seed for optional randomized stress shuffling (unused by default).
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory for program.txt / metrics.txt (and sweep.txt).
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Metrics file format.
    #[arg(long, default_value = "kv", value_parser = ["kv", "table"])]
    report_format: String,
}

fn parse_alpha(text: &str) -> Result<f64, MapError> {
    match text.trim() {
        "inf" | "Inf" | "INF" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|a| *a >= 0.0)
            .ok_or_else(|| MapError::Config(format!("bad alpha value '{other}'"))),
    }
}

fn load_hardware(arg: &str) -> Result<Hardware, MapError> {
    if presets::NAMES.contains(&arg) {
        return presets::by_name(arg);
    }
    let path = Path::new(arg);
    let text = std::fs::read_to_string(path)
        .map_err(|e| MapError::Config(format!("cannot read hardware config '{arg}': {e}")))?;
    parse_hardware(&text)
}

fn run(args: &Args) -> Result<(), MapError> {
    let source = std::fs::read_to_string(&args.circuit)?;
    let spec = load_hardware(&args.hardware)?;
    let mode: Mode = args.mode.parse()?;
    let report_format: ReportFormat = args.report_format.parse()?;
    let config = RunConfig {
        mode,
        alpha: parse_alpha(&args.alpha)?,
        lambda_t: args.lambda_t,
        w_l: args.w_l,
        w_t: args.w_t,
        window: args.window,
        lookahead: args.lookahead,
        seed: args.seed,
        report_format,
    };

    std::fs::create_dir_all(&args.out)?;

    let result = if let Some(sweep_arg) = &args.sweep {
        if mode != Mode::Hybrid {
            return Err(MapError::Config("--sweep requires --mode hybrid".into()));
        }
        let alphas: Vec<f64> = sweep_arg
            .split(',')
            .map(parse_alpha)
            .collect::<Result<_, _>>()?;
        let circuit = atomap::circuit::parse_circuit(&source)?;
        let swept = pipeline::sweep(&circuit, &spec, &config, &alphas)?;
        std::fs::write(args.out.join("sweep.txt"), &swept.table_text)?;
        print!("{}", swept.table_text);
        swept.best
    } else {
        pipeline::run_source(&source, &spec, &config)?
    };

    std::fs::write(args.out.join("program.txt"), &result.program_text)?;
    std::fs::write(args.out.join("metrics.txt"), &result.report_text)?;

    print!("{}", result.report_text);
    println!("RT_s = {:.3}", result.metrics.runtime_s);
    println!(
        "swaps = {}, moves = {}, aod_ops = {}",
        result.swap_count,
        result.move_count,
        result.mapped.aod_op_count()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                MapError::Parse { .. } => 2,
                MapError::Capacity(_) => 3,
                MapError::Routing(_) => 4,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
