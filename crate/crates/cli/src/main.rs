mod commands;
mod output;
mod params;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Map, Value};

use params::{Cli, Command, ConfigFile, Format};

const EXIT_USAGE: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config or parameters; nothing was computed.
    Usage(String),
    Compute(gaplab::Error),
    Output(String),
}

impl CliError {
    fn io(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }

    fn diagnostic(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({ "kind": "usage", "message": m }),
            CliError::Output(m) => json!({ "kind": "output", "message": m }),
            CliError::Compute(e) => {
                let debug = format!("{e:?}");
                let variant = debug.split([' ', '(', '{']).next().unwrap_or("").to_string();
                json!({ "kind": "computation", "variant": variant, "message": e.to_string() })
            }
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_COMPUTE,
        }
    }
}

impl From<gaplab::Error> for CliError {
    fn from(e: gaplab::Error) -> Self {
        CliError::Compute(e)
    }
}

fn default_format(cmd: &Command, out: Option<&PathBuf>) -> Format {
    if matches!(cmd, Command::Theorem(_)) {
        return Format::Json;
    }
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let name = cli.command.name();
    if let Some(c) = file.command.as_deref().filter(|c| *c != name) {
        return Err(CliError::Usage(format!("config is for `{c}`, but `{name}` was requested")));
    }
    let out = cli.out.clone().or(file.output_path.clone());
    let format = cli
        .format
        .or(file.format)
        .unwrap_or_else(|| default_format(&cli.command, out.as_ref()));
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let meta = |config: Value| output::Meta { command: name, config };
    let echo = |p: &dyn erased::Echo| p.echo();
    let fp: &Map<String, Value> = &file.parameters;
    let outcome = match &cli.command {
        Command::AiryTable(a) => {
            let p: params::AiryTableParams = params::merge(fp, a)?;
            commands::airy(&p, format, &meta(echo(&p)))?
        }
        Command::Eigen(a) => {
            let p: params::EigenParams = params::merge(fp, a)?;
            commands::eigen(&p, format, &meta(echo(&p)))?
        }
        Command::RescaleSweep(a) => {
            let p: params::RescaleSweepParams = params::merge(fp, a)?;
            commands::rescale(&p, format, &meta(echo(&p)))?
        }
        Command::CorollarySweep(a) => {
            let p: params::CorollarySweepParams = params::merge(fp, a)?;
            commands::corollary(&p, format, &meta(echo(&p)))?
        }
        Command::PerturbBattery(a) => {
            let p: params::PerturbBatteryParams = params::merge(fp, a)?;
            commands::battery(&p, format, &meta(echo(&p)))?
        }
        Command::Theorem(a) => {
            let p: params::TheoremParams = params::merge(fp, a)?;
            commands::theorem(&p, format, &meta(echo(&p)))?
        }
    };
    output::emit(&outcome.bytes, out.as_deref())?;
    Ok(outcome.passed)
}

mod erased {
    use serde::Serialize;
    use serde_json::Value;

    /// Config echo for the metadata header.
    pub trait Echo {
        fn echo(&self) -> Value;
    }

    impl<T: Serialize> Echo for T {
        fn echo(&self) -> Value {
            serde_json::to_value(self).unwrap_or(Value::Null)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}", json!({ "error": { "kind": "check_failed", "message": "the run completed but its checks did not all pass" } }));
            ExitCode::from(EXIT_COMPUTE)
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.diagnostic() }));
            ExitCode::from(e.exit_code())
        }
    }
}
