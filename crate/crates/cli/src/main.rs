use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use pdcris_cli::{parse_problem, run, validate, CliError, Overrides, SideSpec};

/// Exact crystalline cohomology from a problem file; JSON report on stdout.
#[derive(Parser, Debug)]
#[command(name = "pdcris", version)]
struct Args {
    /// Problem file; `-` or absent reads stdin.
    file: Option<PathBuf>,
    #[arg(long)]
    weight_cutoff: Option<u32>,
    /// Truncation level n.
    #[arg(long)]
    level: Option<u32>,
    #[arg(long)]
    nu_max: Option<usize>,
    #[arg(long)]
    kmax: Option<u32>,
    /// ca, de-rham or both.
    #[arg(long, value_parser = parse_side)]
    side: Option<SideSpec>,
    /// Compact JSON (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON.
    #[arg(long)]
    pretty: bool,
    /// Wall-clock time on stderr; never part of the report.
    #[arg(long)]
    timing: bool,
}

fn parse_side(s: &str) -> Result<SideSpec, String> {
    SideSpec::parse(s).ok_or_else(|| format!("unknown side '{s}' (expected ca, de-rham or both)"))
}

fn read_input(path: &Option<PathBuf>) -> Result<String, CliError> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => return std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        _ => std::io::stdin().read_to_string(&mut text).map_err(|e| CliError::Io(e.to_string()))?,
    };
    Ok(text)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let overrides = Overrides { weight_cutoff: args.weight_cutoff, level: args.level, nu_max: args.nu_max, kmax: args.kmax, side: args.side };
    let outcome = read_input(&args.file).and_then(|text| {
        let mut file = parse_problem(&text)?;
        overrides.apply(&mut file);
        run(&validate(&file)?)
    });
    if args.timing {
        eprintln!("elapsed: {:.3} s", start.elapsed().as_secs_f64());
    }
    match outcome {
        Ok(report) => {
            let text = if args.pretty { serde_json::to_string_pretty(&report) } else { serde_json::to_string(&report) };
            println!("{}", text.expect("JSON values serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
