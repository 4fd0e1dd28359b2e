mod args;
mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, GlobalArgs};
use config::Config;
use io::{CliError, CliResult};

fn build_config(g: &GlobalArgs) -> CliResult<Config> {
    let mut cfg: Config = match &g.config {
        Some(path) => io::load(path)?,
        None => Config::default(),
    };
    if let Some(v) = g.tol {
        cfg.tol = v;
    }
    if let Some(v) = g.cauchy_tol {
        cfg.cauchy_tol = v;
    }
    if let Some(v) = g.divergence_threshold {
        cfg.divergence_threshold = v;
    }
    if let Some(v) = g.limit_tol {
        cfg.limit_tol = v;
    }
    if let Some(v) = g.window {
        cfg.window = v;
    }
    if let Some(v) = g.seed {
        cfg.seed = v;
    }
    if let Some(v) = g.model {
        cfg.model = v;
    }
    if let Some(v) = g.kernel {
        cfg.kernel = v;
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = build_config(&cli.global)?;
    let out = cli.global.out.as_deref();
    let format = cli.global.format;
    let output = match &cli.command {
        Command::Decompose { input } => commands::decompose(input)?,
        Command::Realize { input } => commands::realize_cmd(input)?,
        Command::Radius { x, y } => commands::radius(x, y)?,
        Command::Face { input } => commands::face(input)?,
        Command::Classify { input } => commands::classify_cmd(input, &cfg)?,
        Command::Equiv { p, q } => commands::equiv(p, q, &cfg)?,
        Command::Act { rotation, point } => commands::act(rotation, point)?,
        Command::Intersections(a) => commands::intersections(a, &cfg)?,
        Command::Fundamental { input } => commands::fundamental(input, &cfg)?,
        Command::Limit { input } => commands::limit(input, &cfg)?,
        Command::Refine(a) => commands::refine(a, &cfg)?,
        Command::Kernel(k) => commands::kernel(k, &cfg)?,
        Command::Busemann(b) => commands::busemann(b, &cfg)?,
        Command::Verify(v) => {
            let (output, passed) = commands::verify(v, &cfg)?;
            output.emit(format, out)?;
            if !passed {
                return Err(CliError::Failed(format!("property {:?} did not hold", v.property)));
            }
            return Ok(());
        }
    };
    output.emit(format, out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("weylcomp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
