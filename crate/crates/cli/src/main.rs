//! `ptower`: build partition towers, analyse their spans and check congruences.

mod commands;
mod job;
mod output;
mod selftest;

use std::panic;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptower::Error;

use job::Target;

#[derive(Parser, Debug)]
#[command(name = "ptower", version, about = "Exact computations with l-adic partition towers")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for cached tower levels.
    #[arg(long, global = true, env = "PTOWER_CACHE")]
    cache: Option<PathBuf>,
    /// Number of independent jobs run in parallel.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute tower levels L(b) for b up to --bmax.
    Tower {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 4)]
        bmax: u32,
        /// Number of q-coefficients per level.
        #[arg(long, default_value_t = 40)]
        prec: i64,
    },
    /// Extract P(b) from level b and list its coefficients with their arguments.
    Extract {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        b: u32,
        #[arg(long, default_value_t = 25)]
        nmax: usize,
    },
    /// Find where the spans of one parity stop shrinking and report the stable module.
    Stabilize {
        #[command(flatten)]
        target: Target,
        /// odd or even; both when omitted.
        #[arg(long)]
        parity: Option<String>,
        #[arg(long, default_value_t = 12)]
        bmax: u32,
        /// Minimum coefficient window for membership tests.
        #[arg(long, default_value_t = 0)]
        prec: usize,
    },
    /// The d-invariants controlling the stabilization index.
    Dinv {
        #[command(flatten)]
        target: Target,
    },
    /// Eigenvalue of T(c^2) on P(spt, b; 24z).
    Hecke {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        b: u32,
        #[arg(long)]
        c: u32,
        /// Number of image coefficients to compare.
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Check a built-in congruence family by direct evaluation.
    Verify(VerifyArgs),
    /// Run the built-in example suite.
    Selftest,
    /// Inspect or clean the cache directory.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Preset name, or a comma-separated list.
    #[arg(long, value_delimiter = ',', required = true)]
    preset: Vec<String>,
    /// Primes for the garvan presets.
    #[arg(long, value_delimiter = ',')]
    ell: Vec<u32>,
    /// Power b in the progression ℓᵇn + δ for the garvan presets.
    #[arg(long)]
    b: Option<u32>,
    /// Last n checked.
    #[arg(long)]
    nmax: Option<i64>,
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    Ls,
    Gc,
}

/// Outcome of a command besides its report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fails,
    Insufficient,
    /// A job inside a batch raised an error with this exit code.
    Error(u8),
}

impl Status {
    pub fn of_error(e: &Error) -> Status {
        match error_code(e) {
            3 => Status::Insufficient,
            c => Status::Error(c),
        }
    }

    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Fails => 1,
            Status::Insufficient => 3,
            Status::Error(c) => c,
        }
    }

    fn severity(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Insufficient => 1,
            Status::Fails => 2,
            Status::Error(c) => 2 + c,
        }
    }

    /// The more severe of two statuses; a failure outranks missing precision.
    pub fn join(self, other: Status) -> Status {
        if other.severity() > self.severity() {
            other
        } else {
            self
        }
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::NotPrime(_)
        | Error::PrimeTooSmall { .. }
        | Error::ModulusTooLarge { .. }
        | Error::ZeroPower
        | Error::OddWeight(_)
        | Error::Invalid(_) => 2,
        Error::InsufficientPrecision { .. } | Error::NotStabilized(_) => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> Result<Status, Error> {
    let ctx = commands::Ctx { format: cli.format, out: cli.out, cache: cli.cache, jobs: cli.jobs.max(1) };
    match cli.cmd {
        Cmd::Tower { target, bmax, prec } => commands::tower(&ctx, &target, bmax, prec),
        Cmd::Extract { target, b, nmax } => commands::extract(&ctx, &target, b, nmax),
        Cmd::Stabilize { target, parity, bmax, prec } => commands::stabilize(&ctx, &target, parity.as_deref(), bmax, prec),
        Cmd::Dinv { target } => commands::dinv(&ctx, &target),
        Cmd::Hecke { target, b, c, nmax } => commands::hecke(&ctx, &target, b, c, nmax),
        Cmd::Verify(v) => commands::verify(&ctx, &v.preset, &v.ell, v.b, v.nmax),
        Cmd::Selftest => commands::selftest(&ctx),
        Cmd::Cache { action: CacheAction::Ls } => commands::cache_ls(&ctx),
        Cmd::Cache { action: CacheAction::Gc } => commands::cache_gc(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    panic::set_hook(Box::new(|info| eprintln!("internal error: {info}")));
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(status)) => ExitCode::from(status.code()),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
        Err(_) => ExitCode::from(4),
    }
}
