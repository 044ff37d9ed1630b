use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::Value;

use threesum_lab::butterfly_reduction::GroupKind;
use threesum_lab::refuter::{RefutationCertificate, TwoProbeScheme};
use threesum_lab_cli::{
    adversary_build, butterfly_check, lsd_check, lsd_protocol, parse_group, read_json, refute, scheme_gen,
    verify_cert, write_json, CliError, CliResult, Outcome, StructureKind, EXIT_OK, EXIT_PARSE,
};

/// Reductions, adversarial inputs and bit-probe refutation for 3SUM-Indexing.
#[derive(Parser)]
#[command(name = "threesum-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cyclic,
    Xor,
}

#[derive(Clone, Copy, ValueEnum)]
enum StructureArg {
    Bitvector,
    Sorted,
}

#[derive(Subcommand)]
enum Command {
    /// Compare butterfly reachability against the reduced instance for all pairs.
    ButterflyCheck {
        #[arg(long = "B")]
        degree: u64,
        #[arg(long = "d")]
        depth: u32,
        #[arg(long, value_enum, default_value = "cyclic")]
        group: KindArg,
        #[arg(long, default_value_t = 20)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare set disjointness against the reduced instance.
    LsdCheck {
        #[arg(long = "N")]
        indices: u64,
        #[arg(long = "B")]
        block_width: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long, conflicts_with = "trials")]
        exhaustive: bool,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the round-by-round protocol on a seeded instance.
    LsdProtocol {
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long = "N")]
        indices: u64,
        #[arg(long = "B")]
        block_width: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a weakness in a 2-probe scheme and write a certificate.
    Refute {
        #[arg(long)]
        scheme: PathBuf,
        /// `cyclic:M`, `xor:K`, or JSON such as {"cyclic": M}.
        #[arg(long)]
        group: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Re-check a certificate; exits 0 iff it holds.
    VerifyCert {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Build an input whose sumset meets the queries exactly in a pattern.
    AdversaryBuild {
        #[arg(long)]
        group: String,
        /// Comma-separated query elements.
        #[arg(long)]
        q: String,
        /// One 0/1 character per query.
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a random or bit-vector 2-probe scheme.
    SchemeGen {
        #[arg(long)]
        group: String,
        #[arg(long)]
        cells: Option<u64>,
        #[arg(long)]
        bitvector: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(value: &Value, out: Option<&PathBuf>) -> CliResult<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
            Ok(())
        }
    }
}

fn run(command: Command) -> CliResult<i32> {
    let outcome = match command {
        Command::ButterflyCheck {
            degree,
            depth,
            group,
            trials,
            seed,
            out,
        } => {
            let kind = match group {
                KindArg::Cyclic => GroupKind::Cyclic,
                KindArg::Xor => GroupKind::Xor,
            };
            let o = butterfly_check(degree, depth, kind, trials, seed)?;
            emit(&o.output, out.as_ref())?;
            o
        }
        Command::LsdCheck {
            indices,
            block_width,
            ell,
            exhaustive,
            trials,
            seed,
            out,
        } => {
            let o = lsd_check(indices, block_width, ell, exhaustive, trials, seed)?;
            emit(&o.output, out.as_ref())?;
            o
        }
        Command::LsdProtocol {
            structure,
            indices,
            block_width,
            ell,
            seed,
            out,
        } => {
            let kind = match structure {
                StructureArg::Bitvector => StructureKind::Bitvector,
                StructureArg::Sorted => StructureKind::Sorted,
            };
            let o = lsd_protocol(kind, indices, block_width, ell, seed)?;
            emit(&o.output, out.as_ref())?;
            o
        }
        Command::Refute {
            scheme,
            group,
            out,
            seed,
        } => {
            let group = parse_group(&group)?;
            let scheme: TwoProbeScheme = read_json(&scheme)?;
            let (cert, summary) = refute(&scheme, group, seed)?;
            match out {
                Some(path) => {
                    write_json(&path, &cert)?;
                    emit(&summary, None)?;
                }
                None => emit(&serde_json::to_value(&cert).expect("certificate serializes"), None)?,
            }
            Outcome {
                output: summary,
                code: EXIT_OK,
            }
        }
        Command::VerifyCert { scheme, cert } => {
            let scheme: TwoProbeScheme = read_json(&scheme)?;
            let cert: RefutationCertificate = read_json(&cert)?;
            let o = verify_cert(&scheme, &cert);
            emit(&o.output, None)?;
            o
        }
        Command::AdversaryBuild {
            group,
            q,
            pattern,
            n,
            seed,
            out,
        } => {
            let o = adversary_build(parse_group(&group)?, &q, &pattern, n, seed)?;
            emit(&o.output, out.as_ref())?;
            o
        }
        Command::SchemeGen {
            group,
            cells,
            bitvector,
            seed,
            out,
        } => {
            let scheme = scheme_gen(parse_group(&group)?, cells, bitvector, seed)?;
            let value = serde_json::to_value(&scheme).expect("scheme serializes");
            emit(&value, out.as_ref())?;
            Outcome {
                output: value,
                code: EXIT_OK,
            }
        }
    };
    Ok(outcome.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_PARSE as u8),
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code as u8)
        }
    }
}
