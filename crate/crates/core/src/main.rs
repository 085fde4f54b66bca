use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use dampwave::io::apply_config_text;
use dampwave::presets::{run_preset, Preset};

fn usage() -> String {
    let mut s = String::from(
        "usage: dampwave <preset> [--config FILE] [--out DIR] [--seed N] [--section.key VALUE]...\n\npresets:\n",
    );
    for p in Preset::ALL {
        s.push_str(&format!("  {:<10} {}\n", p.name(), p.describe()));
    }
    s.push_str("\nconfig keys may be given on the command line, e.g. --grid.n 401\n");
    s
}

struct Args {
    preset: Preset,
    config: Option<PathBuf>,
    out: PathBuf,
    overrides: Vec<(String, String)>,
}

enum ArgError {
    Help,
    Usage(String),
    Runtime(String),
}

fn parse_args() -> Result<Args, ArgError> {
    use lexopt::prelude::*;
    let mut parser = lexopt::Parser::from_env();
    let mut preset = None;
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut overrides = Vec::new();
    let bad = |e: lexopt::Error| ArgError::Usage(e.to_string());
    while let Some(arg) = parser.next().map_err(bad)? {
        match arg {
            Long("help") | Short('h') => return Err(ArgError::Help),
            Long("config") => config = Some(PathBuf::from(parser.value().map_err(bad)?)),
            Long("out") => out = PathBuf::from(parser.value().map_err(bad)?),
            Long("seed") => {
                let v = parser.value().map_err(bad)?.string().map_err(bad)?;
                overrides.push(("seeds.rng".to_string(), v));
            }
            Long(key) => {
                let key = key.to_string();
                let v = parser.value().map_err(bad)?.string().map_err(bad)?;
                overrides.push((key, v));
            }
            Value(v) if preset.is_none() => {
                let name = v.string().map_err(bad)?;
                preset = Some(name.parse::<Preset>().map_err(|e| ArgError::Usage(e.to_string()))?);
            }
            other => return Err(ArgError::Usage(other.unexpected().to_string())),
        }
    }
    let preset = preset.ok_or_else(|| ArgError::Usage("missing preset".into()))?;
    Ok(Args {
        preset,
        config,
        out,
        overrides,
    })
}

fn execute(args: Args) -> Result<bool, ArgError> {
    let runtime = |e: dampwave::Error| ArgError::Runtime(e.to_string());
    let mut cfg = args.preset.config();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path).map_err(|e| ArgError::Runtime(format!("{}: {e}", path.display())))?;
        apply_config_text(&mut cfg, &text, path).map_err(runtime)?;
    }
    for (key, value) in &args.overrides {
        cfg.set(key, value).map_err(runtime)?;
    }
    args.preset.enforce(&mut cfg);
    cfg.validate().map_err(runtime)?;
    let report = run_preset(args.preset, &cfg, &args.out).map_err(runtime)?;
    print!("{}", report.table());
    if !report.passed() {
        for c in report.failing() {
            eprintln!("failed: {}", c.claim);
        }
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let result = parse_args().and_then(execute);
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(ArgError::Help) => {
            print!("{}", usage());
            ExitCode::SUCCESS
        }
        Err(ArgError::Usage(msg)) => {
            eprintln!("error: {msg}\n");
            eprint!("{}", usage());
            ExitCode::from(2)
        }
        Err(ArgError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
