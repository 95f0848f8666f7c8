//! `lcu` command-line front end. Every option maps to one harness key; the
//! harness resolves flags over `--config` file values over defaults.

use std::process::ExitCode;

use clap::{Arg, ArgAction, ArgMatches};
use lcu_core::error::{Error, Result};
use lcu_core::harness::{parse_config, run, write_outputs, Command, KeySpec, KEYS};

/// Keys accepted before or after the subcommand.
const GLOBAL: [&str; 6] = ["seed", "eps", "delta", "mode", "out", "trace"];

fn key_arg(order: usize, spec: &KeySpec) -> Arg {
    let arg = Arg::new(spec.name).long(spec.flag()).help(spec.help).display_order(order);
    if spec.name == "trace" {
        arg.action(ArgAction::SetTrue)
    } else {
        arg.action(ArgAction::Append).value_name(spec.name.to_uppercase()).allow_hyphen_values(true)
    }
}

fn cli() -> clap::Command {
    let mut app = clap::Command::new("lcu")
        .version(lcu_core::harness::VERSION)
        .about("Randomized linear-combination-of-unitaries experiments")
        .subcommand_required(true)
        .after_help("Exit codes: 0 success, 2 configuration error, 3 precondition violation, 4 convergence failure.")
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("flat key=value file; '#' starts a comment"));
    for (i, spec) in KEYS.iter().enumerate().filter(|(_, s)| GLOBAL.contains(&s.name)) {
        app = app.arg(key_arg(i, spec).global(true));
    }
    for cmd in Command::ALL {
        let mut sub = clap::Command::new(cmd.name()).about(cmd.about());
        for (i, spec) in KEYS.iter().enumerate().filter(|(_, s)| !GLOBAL.contains(&s.name)) {
            if cmd == Command::Sweep || spec.applies_to(cmd) {
                sub = sub.arg(key_arg(i, spec));
            }
        }
        app = app.subcommand(sub);
    }
    app
}

fn collect_flags(m: &ArgMatches) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for spec in KEYS {
        if spec.name == "trace" {
            if m.try_get_one::<bool>("trace").ok().flatten().copied().unwrap_or(false) {
                out.push(("trace".to_string(), "true".to_string()));
            }
            continue;
        }
        if let Ok(Some(values)) = m.try_get_many::<String>(spec.name) {
            out.extend(values.map(|v| (spec.name.to_string(), v.clone())));
        }
    }
    out
}

fn execute(m: &ArgMatches) -> Result<()> {
    let (name, sub) = m.subcommand().expect("subcommand is required");
    let command: Command = name.parse()?;
    let file = match sub.get_one::<String>("config") {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?),
        None => None,
    };
    let config = parse_config(command, &collect_flags(sub), file.as_deref())?;
    let output = run(&config)?;
    if let Some(body) = write_outputs(&config, &output)? {
        print!("{body}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let matches = cli().get_matches();
    match execute(&matches) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
