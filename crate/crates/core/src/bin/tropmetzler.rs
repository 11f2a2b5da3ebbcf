use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tropmetzler::harness::{self, Outcome, SampleOptions, TransformKind};
use tropmetzler::rational::parse_rational;
use tropmetzler::Error;

#[derive(Parser)]
#[command(
    name = "tropmetzler",
    version,
    about = "Exact tropical Metzler pencils for stochastic games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Seed of the sampling streams.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of sampled points.
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Half-width of the sampling box [-b, b]^n.
    #[arg(
        long = "box",
        global = true,
        default_value = "10",
        allow_hyphen_values = true
    )]
    bound: String,
    /// Largest denominator of sampled coordinates.
    #[arg(long, global = true, default_value_t = 64)]
    denom: u32,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game graph and print the validation report.
    Validate { graph: PathBuf },
    /// Evaluate the encoded operator at a point.
    Eval {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Test x <= F(x).
    Subfixed {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Rewrite a graph and print it with its witness descriptor.
    Transform {
        #[arg(value_enum)]
        kind: TransformArg,
        input: PathBuf,
        /// Edge to split (t2 only).
        #[arg(long)]
        edge: Option<u32>,
    },
    /// Build the projected pencil of a graph.
    Synthesize {
        input: PathBuf,
        /// Treat the input as compliant and emit only its cone pencil.
        #[arg(long)]
        cone_only: bool,
    },
    /// Test membership of a point (all pencil variables; `-inf` allowed).
    Member {
        pencil: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Lift a point to the variables of the graph's pencil.
    Lift {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Compare x <= F(x) with lifted pencil membership on sampled points.
    Verify {
        input: PathBuf,
        /// Name recorded in the report (defaults to the file name).
        #[arg(long)]
        instance: Option<String>,
        /// Include wall time in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Membership grid of a two-dimensional section as CSV.
    Section {
        input: PathBuf,
        /// Pinned coordinate, 1-based: `--fix 3=0`.
        #[arg(long, allow_hyphen_values = true)]
        fix: Vec<String>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<String>,
        #[arg(long, default_value = "1/4")]
        step: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Zp,
    T1,
    T2,
    Pipeline,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: &Cli) -> Result<Outcome> {
    let c = &cli.common;
    let outcome = match &cli.command {
        Command::Validate { graph } => harness::cmd_validate(&read(graph)?)?,
        Command::Eval { input, point } => {
            harness::cmd_eval(&read(input)?, &harness::parse_point(point)?)?
        }
        Command::Subfixed { input, point } => {
            harness::cmd_subfixed(&read(input)?, &harness::parse_point(point)?)?
        }
        Command::Transform { kind, input, edge } => {
            let kind = match kind {
                TransformArg::Zp => TransformKind::CoinFlip,
                TransformArg::T1 => TransformKind::First,
                TransformArg::T2 => TransformKind::Second,
                TransformArg::Pipeline => TransformKind::Pipeline,
            };
            harness::cmd_transform(&read(input)?, kind, *edge)?
        }
        Command::Synthesize { input, cone_only } => {
            harness::cmd_synthesize(&read(input)?, *cone_only)?
        }
        Command::Member { pencil, point } => {
            harness::cmd_member(&read(pencil)?, &harness::parse_trop_point(point)?)?
        }
        Command::Lift { input, point } => {
            harness::cmd_lift(&read(input)?, &harness::parse_point(point)?)?
        }
        Command::Verify {
            input,
            instance,
            timing,
        } => {
            let opts = SampleOptions {
                samples: c.samples,
                seed: c.seed,
                bound: parse_rational(&c.bound)?,
                denom: c.denom,
                timing: *timing,
            };
            let name = instance.clone().unwrap_or_else(|| {
                input
                    .file_stem()
                    .map_or_else(String::new, |s| s.to_string_lossy().into_owned())
            });
            harness::cmd_verify(&name, &read(input)?, &opts)?
        }
        Command::Section {
            input,
            fix,
            lo,
            hi,
            step,
        } => {
            let bound = parse_rational(&c.bound)?;
            let lo = lo
                .as_deref()
                .map(parse_rational)
                .transpose()?
                .unwrap_or(-bound.clone());
            let hi = hi
                .as_deref()
                .map(parse_rational)
                .transpose()?
                .unwrap_or(bound);
            let fixed = fix
                .iter()
                .map(|f| harness::parse_fix(f))
                .collect::<tropmetzler::Result<Vec<_>>>()?;
            harness::cmd_section(&read(input)?, &fixed, &lo, &hi, &parse_rational(step)?)?
        }
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => {
            let written = match &cli.common.out {
                Some(path) => fs::write(path, &outcome.text)
                    .with_context(|| format!("writing {}", path.display())),
                None => {
                    let mut out = io::stdout().lock();
                    match out.write_all(outcome.text.as_bytes()).and_then(|_| out.flush()) {
                        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                        r => r.context("writing to stdout"),
                    }
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            ExitCode::from(if outcome.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(err) => harness::exit_code(err),
                None => 2,
            };
            ExitCode::from(code as u8)
        }
    }
}
