//! Batch front end for the `discrete-embedding` library.
//!
//! Each subcommand takes `--key value` flags and an optional `--config FILE`
//! of `key = value` lines with the same keys. Flags win over the file.

mod config;
mod run;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::error::{ContextKind, ContextValue, ErrorKind};
use clap::{Arg, ArgAction};

pub use config::{
    command_spec, parse_config, parse_file, Command, CommandSpec, ConfigError, Key, RunConfig,
    SchemeConfig, COMMANDS,
};
pub use run::{num, run, RunError};

pub fn cli() -> clap::Command {
    let mut app = clap::Command::new("dembed")
        .about("Discrete embeddings of classical and fractional Lagrangian systems")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for spec in COMMANDS {
        let mut sub = clap::Command::new(spec.name).about(spec.about).arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .help("read `key = value` lines; flags override them"),
        );
        for k in spec.keys {
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .help(k.help)
                    .action(ArgAction::Set)
                    .allow_hyphen_values(true),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

/// Parses arguments (including the program name) into a [`RunConfig`].
pub fn parse_args<I, T>(args: I) -> Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = cli()
        .try_get_matches_from(args)
        .map_err(ParseOutcome::Clap)?;
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let spec = command_spec(name).expect("subcommands come from the table");

    let mut map = BTreeMap::new();
    if let Some(path) = sub.get_one::<String>("config") {
        let text = fs::read_to_string(path).map_err(|e| {
            ParseOutcome::Run(RunError::Io {
                path: path.clone(),
                source: e,
            })
        })?;
        map = parse_file(&text).map_err(|e| ParseOutcome::Run(e.into()))?;
    }
    for k in spec.keys {
        if let Some(v) = sub.get_one::<String>(k.name) {
            map.insert(k.name.to_string(), v.clone());
        }
    }
    parse_config(name, &map).map_err(|e| ParseOutcome::Run(e.into()))
}

#[derive(Debug)]
pub enum ParseOutcome {
    Clap(clap::Error),
    Run(RunError),
}

/// Full program: parse, run, report. Returns the process exit status.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = match parse_args(args) {
        Ok(cfg) => run(&cfg, stdout),
        Err(ParseOutcome::Run(e)) => Err(e),
        Err(ParseOutcome::Clap(e)) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion)
                || e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            {
                let _ = write!(stdout, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    2
                } else {
                    0
                };
            }
            let _ = writeln!(stderr, "{}", clap_line(&e));
            return 2;
        }
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.status()
        }
    }
}

fn clap_line(e: &clap::Error) -> String {
    let field = match e.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => Some(s.trim_start_matches('-').to_string()),
        _ => None,
    };
    let message = e
        .render()
        .to_string()
        .lines()
        .next()
        .unwrap_or("")
        .trim_start_matches("error: ")
        .to_string();
    let mut s = "error status=2 kind=invalid-config".to_string();
    if let Some(f) = field {
        s.push_str(&format!(" field={f}"));
    }
    s.push_str(&format!(" message={message:?}"));
    s
}
