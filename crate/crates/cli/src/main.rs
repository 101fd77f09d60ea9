//! `sievekit`: sieve bounds, smooth numbers, semigroups and sumset
//! decompositions from the command line.
//!
//! Exit codes: 0 success, 1 error or failed check, 2 hypotheses not met.

mod commands;
mod input;
mod report;

use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;
use sievekit::irreducibility::ConstantsProfile;
use sievekit::Exec;

use commands::Ctx;
use input::Config;
use report::{emit, error_object, Format, Outcome, Report, SCHEMA};

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "sievekit", version, about, args_override_self = true)]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// `strict`, `scaled`, or `scaled:key=value,...`.
    #[arg(long, global = true, default_value = "strict")]
    profile: ConstantsProfile,
    /// Seed for randomised batches.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// key=value file of default flags.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Run every loop on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(untagged)]
enum Command {
    /// Count and sum the primes of a subset in an interval.
    Primes(commands::PrimesArgs),
    /// Upper bound on a set or sifted set from one of the sieve lemmas.
    SieveBound(commands::SieveBoundArgs),
    /// Lower bound on the residue classes a set occupies in a prime window.
    InverseSieve(commands::InverseSieveArgs),
    /// Count y-smooth integers up to x.
    SmoothCount(commands::SmoothCountArgs),
    /// Dickman's function.
    Dickman(commands::DickmanArgs),
    /// Count n <= x with every n + a_i y-smooth.
    TupleCount(commands::TupleCountArgs),
    /// Weighted discrepancy of smooth numbers in progressions.
    BvSum(commands::BvSumArgs),
    /// Integers built from a prime subset: count, exponent fit, hypotheses.
    Semigroup(commands::SemigroupArgs),
    /// Sumset of two or three sets.
    Sumset(commands::SumsetArgs),
    /// Decide whether a set is A + B with both parts of size >= 2.
    Decompose(commands::DecomposeArgs),
    /// Check |A+B+C|² <= |A+B||A+C||B+C|.
    Ruzsa(commands::RuzsaArgs),
    /// Evaluate the conditions of the general irreducibility theorem.
    CheckGenthm(commands::CheckGenthmArgs),
    /// Occupancy deviations from p/2 and the derived sums.
    OstmannDiag(commands::OstmannDiagArgs),
    /// Run every randomised invariant batch.
    VerifyAll(commands::VerifyAllArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Primes(_) => "primes",
            Command::SieveBound(_) => "sieve-bound",
            Command::InverseSieve(_) => "inverse-sieve",
            Command::SmoothCount(_) => "smooth-count",
            Command::Dickman(_) => "dickman",
            Command::TupleCount(_) => "tuple-count",
            Command::BvSum(_) => "bv-sum",
            Command::Semigroup(_) => "semigroup",
            Command::Sumset(_) => "sumset",
            Command::Decompose(_) => "decompose",
            Command::Ruzsa(_) => "ruzsa",
            Command::CheckGenthm(_) => "check-genthm",
            Command::OstmannDiag(_) => "ostmann-diag",
            Command::VerifyAll(_) => "verify-all",
        }
    }

    fn run(&self, ctx: &Ctx) -> anyhow::Result<Outcome> {
        match self {
            Command::Primes(a) => commands::primes(a, ctx),
            Command::SieveBound(a) => commands::sieve_bound(a, ctx),
            Command::InverseSieve(a) => commands::inverse_sieve(a, ctx),
            Command::SmoothCount(a) => commands::smooth_count(a, ctx),
            Command::Dickman(a) => commands::dickman(a, ctx),
            Command::TupleCount(a) => commands::tuple_count(a, ctx),
            Command::BvSum(a) => commands::bv_sum(a, ctx),
            Command::Semigroup(a) => commands::semigroup(a, ctx),
            Command::Sumset(a) => commands::sumset_cmd(a, ctx),
            Command::Decompose(a) => commands::decompose(a, ctx),
            Command::Ruzsa(a) => commands::ruzsa(a, ctx),
            Command::CheckGenthm(a) => commands::check_genthm(a, ctx),
            Command::OstmannDiag(a) => commands::ostmann_diag(a, ctx),
            Command::VerifyAll(a) => commands::verify_all(a, ctx),
        }
    }
}

fn subcommand_names() -> Vec<String> {
    Cli::command()
        .get_subcommands()
        .map(|c| c.get_name().to_string())
        .collect()
}

fn print_error(command: Option<&str>, err: &anyhow::Error) -> ExitCode {
    let obj = error_object(command, err);
    let text = serde_json::to_string_pretty(&obj).unwrap_or_else(|_| err.to_string());
    println!("{text}");
    let msg = format!("{err:#}");
    match msg.strip_prefix("error: ") {
        Some(rest) => eprintln!("error: {rest}"),
        None => eprintln!("error: {msg}"),
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let mut argv: Vec<String> = std::env::args().collect();
    let mut config_echo = Value::Null;
    if let Some(path) = input::config_path(&argv) {
        let cfg = match Config::load(Path::new(&path)) {
            Ok(c) => c,
            Err(e) => return print_error(None, &e),
        };
        config_echo = serde_json::to_value(&cfg.entries).unwrap_or(Value::Null);
        let names = subcommand_names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        argv = input::merge_config(argv, &cfg, &names);
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return print_error(None, &anyhow::Error::new(e)),
    };
    let name = cli.command.name();
    let ctx = Ctx {
        profile: cli.profile,
        seed: cli.seed,
        exec: if cli.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        },
    };

    let start = Instant::now();
    let outcome = match cli.command.run(&ctx) {
        Ok(o) => o,
        Err(e) => return print_error(Some(name), &e),
    };
    let elapsed_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;

    let mut params = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    if let Value::Object(m) = &mut params {
        m.insert("seed".into(), cli.seed.into());
        m.insert("sequential".into(), cli.sequential.into());
        if !config_echo.is_null() {
            m.insert("config".into(), config_echo);
        }
    }
    let report = Report {
        schema: SCHEMA,
        command: name,
        params,
        profile: cli.profile.to_string(),
        result: &outcome.result,
        diagnostics: &outcome.diagnostics,
        elapsed_ms,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if let Err(e) =
        emit(&mut out, cli.format, &report, &outcome.table).and_then(|_| Ok(out.flush()?))
    {
        return print_error(Some(name), &e);
    }
    ExitCode::from(outcome.status.code() as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_has_help() {
        let names = subcommand_names();
        assert_eq!(names.len(), 14);
        for n in &names {
            let cli = Cli::try_parse_from(["sievekit", n.as_str(), "--help"]);
            assert!(matches!(cli, Err(e) if e.kind() == ErrorKind::DisplayHelp));
        }
    }
}
