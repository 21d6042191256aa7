//! `conelab`: cone and operator-system computations with JSON reports.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 usage or input
//! error, 3 no failures but some checks undecided.

mod cones;
mod input;
mod report;
mod systems;
mod tp;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use conelab::selfdual::Strategy;

use cones::{ConeKind, DualityArgs, Outcome, SelfdualArgs};
use input::{CliError, CliResult, Inputs};
use report::Report;
use systems::{PArgs, SandwichArgs, SystemKind, SystemSelfdualArgs};
use tp::TpArgs;

#[derive(Parser)]
#[command(name = "conelab", version, about = "Tensor products of cones and operator systems")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Record wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Dual of a polyhedral cone.
    Dual {
        #[arg(short, long)]
        input: String,
    },
    /// Tensor product of two polyhedral cones.
    Tensor {
        #[arg(short = 'a', long)]
        left: String,
        #[arg(short = 'b', long)]
        right: String,
        #[arg(long, value_enum, default_value_t = ConeKind::Min)]
        kind: ConeKind,
        /// Family JSON for `--kind constructed`.
        #[arg(long)]
        family: Option<String>,
    },
    /// Enlarge a cone inside its dual to a self-dual one.
    Selfdualize {
        #[arg(short, long)]
        input: String,
        #[arg(long, default_value = "greedy", value_parser = parse_strategy)]
        strategy: Strategy,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 64)]
        ray_cap: usize,
    },
    /// Check that the dual of the minimal product is the maximal product of the duals.
    VerifyDuality {
        /// Number of random pairs.
        #[arg(long, default_value_t = 50)]
        random: usize,
        /// Largest factor dimension.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[arg(long, default_value_t = 6)]
        max_gens: usize,
        /// Check one given pair instead of random ones.
        #[arg(short = 'a', long, requires = "right")]
        left: Option<String>,
        #[arg(short = 'b', long, requires = "left")]
        right: Option<String>,
    },
    /// Separable ⊊ psd ⊊ block-positive on C^m ⊗ C^n.
    VerifySandwich {
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        restarts: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Generators of systems inside their dual lie in P, and P is closed under compressions.
    VerifyP {
        /// Check one generated system instead of random ones.
        #[arg(short, long)]
        input: Option<String>,
        #[arg(long, default_value_t = 100)]
        random: usize,
        /// Matrix size of the ambient matrix system.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Largest generator level.
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Most generators per random system.
        #[arg(long, default_value_t = 3)]
        generators: usize,
        #[arg(long, default_value_t = 50)]
        compressions: usize,
    },
    /// Build a tensor product from a family and check it.
    ConstructTp {
        #[arg(short, long)]
        family: String,
        /// Left factor (cone or system, matching the family's stem).
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        h: Option<String>,
        /// Element to test for membership.
        #[arg(short, long)]
        x: Option<String>,
        /// Override the family's clamp to the maximal product.
        #[arg(long)]
        clamp: Option<bool>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
    },
    /// Operator systems.
    Osys {
        #[command(subcommand)]
        action: Osys,
    },
}

#[derive(Subcommand)]
enum Osys {
    /// Dual system, with a biduality check on sampled elements.
    Dual {
        #[arg(short, long)]
        system: String,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        levels: usize,
    },
    /// Membership of an element in its level cone.
    Member {
        #[arg(short, long)]
        system: String,
        #[arg(short, long)]
        x: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Minimal or maximal tensor product.
    Tensor {
        #[arg(short = 'a', long)]
        left: String,
        #[arg(short = 'b', long)]
        right: String,
        #[arg(long, value_enum, default_value_t = SystemKind::Min)]
        kind: SystemKind,
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(short, long)]
        x: Option<String>,
    },
    /// Enlarge a generated system inside its dual towards self-duality.
    Selfdualize {
        #[arg(short, long)]
        system: String,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 20)]
        max_iter: usize,
        #[arg(long, default_value_t = 24)]
        samples: usize,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: conelab::Error| e.to_string())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dual { .. } => "dual",
            Command::Tensor { .. } => "tensor",
            Command::Selfdualize { .. } => "selfdualize",
            Command::VerifyDuality { .. } => "verify-duality",
            Command::VerifySandwich { .. } => "verify-sandwich",
            Command::VerifyP { .. } => "verify-p",
            Command::ConstructTp { .. } => "construct-tp",
            Command::Osys { action } => match action {
                Osys::Dual { .. } => "osys dual",
                Osys::Member { .. } => "osys member",
                Osys::Tensor { .. } => "osys tensor",
                Osys::Selfdualize { .. } => "osys selfdualize",
            },
        }
    }
}

fn run(cmd: &Command, seed: u64, inputs: &mut Inputs) -> CliResult<Outcome> {
    match cmd {
        Command::Dual { input } => cones::dual(inputs, input),
        Command::Tensor {
            left,
            right,
            kind,
            family,
        } => cones::tensor_cmd(inputs, left, right, *kind, family.as_deref()),
        Command::Selfdualize {
            input,
            strategy,
            eps,
            max_iter,
            ray_cap,
        } => cones::selfdualize(
            inputs,
            input,
            &SelfdualArgs {
                strategy: *strategy,
                eps: *eps,
                max_iter: *max_iter,
                ray_cap: *ray_cap,
                seed,
            },
        ),
        Command::VerifyDuality {
            random,
            dim,
            max_gens,
            left,
            right,
        } => {
            let pair = left.as_deref().zip(right.as_deref());
            let args = DualityArgs {
                random: *random,
                dim: *dim,
                max_gens: *max_gens,
                seed,
            };
            cones::verify_duality(inputs, pair, &args)
        }
        Command::VerifySandwich {
            m,
            n,
            restarts,
            samples,
        } => systems::verify_sandwich(
            inputs,
            &SandwichArgs {
                m: *m,
                n: *n,
                restarts: *restarts,
                samples: *samples,
                seed,
            },
        ),
        Command::VerifyP {
            input,
            random,
            k,
            level,
            generators,
            compressions,
        } => systems::verify_p(
            inputs,
            input.as_deref(),
            &PArgs {
                random: *random,
                k: *k,
                level: *level,
                generators: *generators,
                compressions: *compressions,
                seed,
            },
        ),
        Command::ConstructTp {
            family,
            g,
            h,
            x,
            clamp,
            samples,
            restarts,
        } => tp::construct_tp(
            inputs,
            &TpArgs {
                family,
                g: g.as_deref(),
                h: h.as_deref(),
                x: x.as_deref(),
                clamp: *clamp,
                samples: *samples,
                restarts: *restarts,
                seed,
            },
        ),
        Command::Osys { action } => match action {
            Osys::Dual {
                system,
                samples,
                levels,
            } => systems::osys_dual(inputs, system, *samples, *levels, seed),
            Osys::Member { system, x, tol } => systems::osys_member(inputs, system, x, *tol),
            Osys::Tensor {
                left,
                right,
                kind,
                truncation,
                x,
            } => systems::osys_tensor(inputs, left, right, *kind, *truncation, x.as_deref()),
            Osys::Selfdualize {
                system,
                eps,
                levels,
                max_iter,
                samples,
            } => systems::osys_selfdualize(
                inputs,
                system,
                &SystemSelfdualArgs {
                    eps: *eps,
                    levels: *levels,
                    max_iter: *max_iter,
                    samples: *samples,
                    seed,
                },
            ),
        },
    }
}

/// Command-line arguments minus the ones that only affect presentation.
fn normalized_args() -> Vec<String> {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        match a.as_str() {
            "--out" | "--format" => {
                args.next();
            }
            "--timing" => {}
            s if s.starts_with("--out=") || s.starts_with("--format=") => {}
            _ => out.push(a),
        }
    }
    out
}

fn emit(text: &str, out: Option<&str>) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError(format!("{path}: {e}"))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError(format!("stdout: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    let start = Instant::now();
    let result = Inputs::new().and_then(|mut inputs| {
        let outcome = run(&cli.command, cli.common.seed, &mut inputs)?;
        Ok((inputs, outcome))
    });
    let (inputs, (checks, output)) = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("conelab: {e}");
            return ExitCode::from(2);
        }
    };
    let name = cli.command.name();
    let digest = report::digest(name, &normalized_args(), &inputs.files);
    let mut rep = Report::new(name, digest, cli.common.seed, checks, output);
    if cli.common.timing {
        rep.elapsed = Some(start.elapsed().as_secs_f64());
    }
    let text = match cli.common.format {
        Format::Json => rep.to_json(),
        Format::Text => rep.to_text(),
    };
    if let Err(e) = emit(&text, cli.common.out.as_deref()) {
        eprintln!("conelab: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(rep.exit_code() as u8)
}
