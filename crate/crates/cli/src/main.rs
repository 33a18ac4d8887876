mod args;
mod config;
mod output;
mod run;

use std::io::Write;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, FromArgMatches};

use args::Cli;
use output::{manifest_path, usage, write_file, UsageError};

const WORKERS_ENV: &str = "ERGODIC_SE_WORKERS";

fn main() -> ExitCode {
    let argv = match config::expand_argv(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    let cmd = Cli::command().args_override_self(true);
    let matches = match cmd.clone().try_get_matches_from(argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = Cli::from_arg_matches(&matches)
        .map_err(anyhow::Error::from)
        .and_then(|cli| execute(&cli, &cmd, &matches));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}

fn execute(cli: &Cli, cmd: &clap::Command, matches: &clap::ArgMatches) -> Result<()> {
    set_workers(cli.workers)?;
    let out = run::run(&cli.command)?;
    let csv = out.table.to_csv();
    match cli.command.out() {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&manifest_path(path), &config::manifest(cmd, matches))?;
            for line in &out.summary {
                println!("{line}");
            }
        }
        None => {
            std::io::stdout()
                .write_all(csv.as_bytes())
                .context("writing to stdout")?;
            for line in &out.summary {
                eprintln!("{line}");
            }
        }
    }
    Ok(())
}

fn set_workers(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| usage(format!("{WORKERS_ENV}='{v}' is not a count")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting the worker pool")?;
    }
    Ok(())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.downcast_ref::<UsageError>().is_some()
            || cause.downcast_ref::<clap::Error>().is_some()
        {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<ergodic_se::Error>() {
            return if err.is_budget() {
                4
            } else if err.is_numerical() {
                3
            } else {
                2
            };
        }
    }
    1
}

// Library errors already print their sources, so repeated causes are dropped.
fn fail(e: &anyhow::Error) -> ExitCode {
    let mut msg = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    eprintln!("error: {msg}");
    ExitCode::from(exit_code(e))
}
