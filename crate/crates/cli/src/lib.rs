//! `hokdv` command-line runner.
//!
//! Exit status: 0 on success, 1 when a run completes but its check fails (or
//! a numerical/IO error stops it), 2 for configuration errors.

pub mod config;
pub mod output;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Arg, ArgAction, ArgMatches};
use thiserror::Error;

use crate::commands::{Command, Outcome, COMMANDS};
use crate::config::{ConfigError, Default as D, Resolved};
use crate::output::{now, OutDir, RunManifest, DEFAULT_OUT, MANIFEST, OUT_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] hokdv_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        use hokdv_core::Error as E;
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core(
                E::InvalidGrid(_)
                | E::GridMismatch(_)
                | E::LengthMismatch { .. }
                | E::DerivativeOrder(_)
                | E::InvalidArgument(_)
                | E::Snapshot(_),
            ) => EXIT_CONFIG,
            _ => EXIT_FAILED,
        }
    }
}

/// Subcommand names paired with their configuration schemas.
pub fn schemas() -> impl Iterator<Item = (&'static str, config::Schema)> {
    COMMANDS.iter().map(|c| (c.name, c.schema))
}

fn placeholder(kind: config::Kind) -> &'static str {
    match kind {
        config::Kind::Int => "INT",
        config::Kind::Float => "NUM",
        config::Kind::Bool => "BOOL",
        config::Kind::Str => "TEXT",
        config::Kind::IntList => "INT,INT,...",
        config::Kind::Pair => "NUM,NUM",
    }
}

pub fn cli() -> clap::Command {
    let mut app = clap::Command::new("hokdv")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Spectral experiments for periodic higher-order KdV-type equations")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for c in COMMANDS {
        let mut sub = clap::Command::new(c.name)
            .about(c.about)
            .arg(Arg::new("config").long("config").value_name("FILE").help("flat TOML file of key = value pairs"))
            .arg(
                Arg::new("out")
                    .long("out")
                    .value_name("DIR")
                    .help(format!("output directory [env {OUT_ENV}, default {DEFAULT_OUT}]")),
            )
            .arg(
                Arg::new("threads")
                    .long("threads")
                    .value_name("N")
                    .value_parser(clap::value_parser!(usize))
                    .help("cap on worker threads"),
            );
        for k in c.schema {
            let mut help = k.help.to_string();
            match k.default {
                D::Required => help.push_str(" [required]"),
                D::Value(v) => help.push_str(&format!(" [default {v}]")),
                D::Optional => {}
            }
            sub = sub.arg(
                Arg::new(k.name)
                    .long(k.name)
                    .value_name(placeholder(k.kind))
                    .allow_hyphen_values(true)
                    .action(ArgAction::Set)
                    .help(help),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

fn flags_of(c: &Command, m: &ArgMatches) -> Vec<(String, String)> {
    c.schema
        .iter()
        .filter_map(|k| m.get_one::<String>(k.name).map(|v| (k.name.to_string(), v.clone())))
        .collect()
}

fn out_dir(m: &ArgMatches) -> PathBuf {
    m.get_one::<String>("out")
        .cloned()
        .or_else(|| std::env::var(OUT_ENV).ok().filter(|s| !s.is_empty()))
        .unwrap_or_else(|| DEFAULT_OUT.to_string())
        .into()
}

/// Parses arguments, runs the subcommand and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let command = COMMANDS.iter().find(|c| c.name == name).expect("registered subcommand");
    let started = now();

    let mut out = match OutDir::create(&out_dir(sub)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: output directory {}: {e}", out_dir(sub).display());
            return EXIT_FAILED;
        }
    };
    let config_path = sub.get_one::<String>("config").map(PathBuf::from);
    let resolved = Resolved::from_file(command.schema, config_path.as_deref(), &flags_of(command, sub));

    let result: Result<Outcome, RunError> = match &resolved {
        Err(e) => Err(RunError::Config(e.clone())),
        Ok(r) => {
            let threads = sub.get_one::<usize>("threads").copied().unwrap_or(0);
            match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
                Ok(pool) => pool.install(|| (command.run)(r, &mut out)),
                Err(e) => Err(RunError::Io(std::io::Error::other(e))),
            }
        }
    };

    let (status, code, summary, error) = match result {
        Ok(Outcome { summary, failure: None }) => ("ok", EXIT_OK, summary, None),
        Ok(Outcome { summary, failure: Some(f) }) => ("check-failed", EXIT_FAILED, summary, Some(f)),
        Err(e) => {
            let code = e.exit_code();
            let status = if code == EXIT_CONFIG { "config-error" } else { "error" };
            (status, code, serde_json::Value::Null, Some(e.to_string()))
        }
    };
    if let Some(e) = &error {
        eprintln!("error: {e}");
    }
    let manifest = RunManifest {
        command: name.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: status.to_string(),
        exit_code: code,
        config_hash: resolved.as_ref().ok().map(Resolved::hash),
        seed: resolved.as_ref().ok().and_then(Resolved::seed),
        config: resolved
            .as_ref()
            .map(|r| r.values.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
            .unwrap_or_default(),
        started,
        finished: now(),
        outputs: out.written().to_vec(),
        summary,
        error,
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises") + "\n";
    if let Err(e) = out.write(MANIFEST, text.as_bytes()) {
        eprintln!("error: writing manifest: {e}");
        return EXIT_FAILED;
    }
    code
}
