//! Command-line driver: `classify`, `bound`, `verify` and `sweep` over JSON
//! channel specs.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 no certified regime,
//! 3 verification violation.

// `!(x >= 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ic_capacity::discrete::SearchConfig;
use ic_capacity::Exec;
use serde::Serialize;

mod bound;
mod classify;
pub mod spec;
mod sweep;
mod verify;

pub use spec::{Channel, ChannelSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_REGIME: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

/// Worker-count override for the rayon pool.
pub const THREADS_ENV: &str = "IC_CAPACITY_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "ic-capacity",
    version,
    about = "Sum-capacity bounds and regime checks for interference channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Channel spec (JSON)
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Falsification and sampling budget
    #[arg(long, global = true, default_value_t = 10_000)]
    pub samples: usize,
    /// Restarts of the discrete input search
    #[arg(long, global = true, default_value_t = 64)]
    pub restarts: usize,
    /// Time-sharing alphabet size for min-type discrete bounds
    #[arg(long = "q-card", global = true)]
    pub q_card: Option<usize>,
    /// Convergence tolerance of the discrete input search
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Also write the report as JSON
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Also write the report as CSV
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Gaussian capacity regimes
    Classify,
    /// Evaluate a single-letter outer bound
    Bound(BoundArgs),
    /// Run the numerical verification suites
    Verify(VerifyArgs),
    /// Classify a Gaussian channel over a parameter grid (CSV)
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// 1: nested chain, 3: permutation with cuts, 4: output groups
    #[arg(long)]
    pub theorem: u8,
    /// Permutation of users, 1-based, e.g. 2,1,3
    #[arg(long)]
    pub perm: Option<String>,
    /// Increasing cut positions ending at K, e.g. 2,3
    #[arg(long)]
    pub cuts: Option<String>,
    /// Receiver groups, 1-based, e.g. "1,2|3"
    #[arg(long)]
    pub groups: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    All,
    Ck,
    Degradation,
    Conditioning,
    Nletter,
    Falsify,
    Sign,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Largest blocklength of the telescoping-identity suite
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Reverse the receiver roles so that counterexamples must appear
    #[arg(long)]
    pub adversarial: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// name=min:max:steps where name is aJI (gain to receiver J from
    /// transmitter I) or pI; repeat for a product grid
    #[arg(long = "param", required = true)]
    pub params: Vec<String>,
}

/// Run settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub samples: usize,
    pub restarts: usize,
    pub q_card: Option<usize>,
    pub tolerance: f64,
}

impl RunConfig {
    pub fn from_common(c: &Common) -> Result<Self> {
        if c.samples == 0 || c.restarts == 0 || c.q_card == Some(0) {
            bail!("--samples, --restarts and --q-card must be at least 1");
        }
        if !(c.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(RunConfig {
            seed: c.seed,
            samples: c.samples,
            restarts: c.restarts,
            q_card: c.q_card,
            tolerance: c.tol,
        })
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            restarts: self.restarts,
            tol: self.tolerance,
            q_card: self.q_card,
            seed: self.seed,
            exec: Exec::default(),
            samples: self.samples,
            ..Default::default()
        }
    }
}

pub(crate) struct Io<'a> {
    pub out: &'a mut Vec<u8>,
    pub err: &'a mut Vec<u8>,
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn require_spec(common: &Common, io: &mut Io) -> Result<Channel> {
    let path = common.spec.as_deref().context("--spec is required")?;
    let (ch, warnings) = spec::load(path)?;
    for w in warnings {
        writeln!(io.err, "warning: {w}")?;
    }
    Ok(ch)
}

fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("{THREADS_ENV} must be a positive integer, got {v:?}"),
        },
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: &Cli, io: &mut Io) -> Result<i32> {
    let cfg = RunConfig::from_common(&cli.common)?;
    match &cli.command {
        Command::Classify => classify::run(&cli.common, &cfg, io),
        Command::Bound(b) => bound::run(&cli.common, &cfg, b, io),
        Command::Verify(v) => verify::run(&cli.common, &cfg, v, io),
        Command::Sweep(s) => sweep::run(&cli.common, s, io),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    // commands write into buffers so they can run inside a Send closure
    let (mut obuf, mut ebuf) = (Vec::new(), Vec::new());
    let result = {
        let mut io = Io {
            out: &mut obuf,
            err: &mut ebuf,
        };
        thread_count().and_then(|threads| match threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building the worker pool")?
                .install(move || dispatch(&cli, &mut io)),
            None => dispatch(&cli, &mut io),
        })
    };
    let _ = out.write_all(&obuf);
    let _ = err.write_all(&ebuf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_INPUT
        }
    }
}
