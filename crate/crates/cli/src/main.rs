use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qhide_cli::{emit, parse_config_file, run, CliError, Command, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "qhide", version, about = "Quantum data hiding experiments and reports")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct GlobalArgs {
    /// Seed for every randomized routine.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance of the reported checks; below 1e-12 the run is an expected failure.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat `key = value` file; flags override it.
    #[arg(long, global = true)]
    config: Option<String>,
}

#[derive(Subcommand)]
enum Sub {
    /// Ricochet, twirl, Bell expansion and ± decomposition identities, plus trace-norm properties.
    VerifyIdentities {
        /// Qubit counts, e.g. `1,2`.
        #[arg(long)]
        n: Option<String>,
        /// Random instances of the trace-norm sweep.
        #[arg(long)]
        instances: Option<usize>,
    },
    /// Qubit hiding scheme from a bit scheme, optionally written as JSON.
    BuildQscheme {
        /// `werner:d=3`, `oracle:k=2` or `tensor:werner:d=2*werner:d=2`.
        #[arg(long)]
        bit_scheme: Option<String>,
        /// Hidden qubits; one-bit selectors are repeated 2n times.
        #[arg(long)]
        n: Option<usize>,
        /// Write the scheme JSON here.
        #[arg(long)]
        emit: Option<String>,
    },
    /// One distinguishability estimator on a scheme's Pauli eigenspace encodings.
    Security {
        /// Scheme JSON from `build-qscheme --emit`; otherwise built from `--bit-scheme`.
        #[arg(long)]
        scheme: Option<String>,
        /// Bit scheme used when no `--scheme` is given.
        #[arg(long)]
        bit_scheme: Option<String>,
        /// Hidden qubits when building from `--bit-scheme`.
        #[arg(long)]
        n: Option<usize>,
        /// ppt | seesaw | tomo | global
        #[arg(long)]
        estimator: Option<String>,
        /// Parties on each side, e.g. `A:B`.
        #[arg(long)]
        cut: Option<String>,
        /// Write the bare estimator report here.
        #[arg(long)]
        report: Option<String>,
    },
    /// Werner pair estimators over local dimensions.
    Sweep {
        /// Dimensions, e.g. `2,3,4`.
        #[arg(long)]
        dims: Option<String>,
    },
    /// Bound chains for both conversions and the multiparty stand-in.
    Chains {
        /// werner | oracle
        #[arg(long)]
        mode: Option<String>,
        /// Hidden qubits of the two conversion chains.
        #[arg(long)]
        n: Option<usize>,
        /// Multiparty share counts, e.g. `1,2`.
        #[arg(long)]
        k: Option<String>,
    },
    /// Secret-sharing demos on the five-qubit code.
    Multiparty {
        /// five-qubit | trivial | split:<k>
        #[arg(long)]
        code: Option<String>,
        /// Coalition, e.g. `1,2,3`.
        #[arg(long)]
        authorized: Option<String>,
        /// Access structure JSON replacing the code's default.
        #[arg(long)]
        access: Option<String>,
        /// reconstruct | marginals | access
        #[arg(long)]
        demo: Option<String>,
    },
    /// Pauli pad as a private quantum channel.
    Pqc {
        /// Message qubits (1 or 2).
        #[arg(long)]
        n: Option<usize>,
        /// Include the entropy audit.
        #[arg(long)]
        audit: bool,
    },
}

fn push<T: ToString>(flags: &mut Vec<(&'static str, String)>, key: &'static str, value: Option<T>) {
    if let Some(v) = value {
        flags.push((key, v.to_string()));
    }
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::VerifyIdentities { .. } => Command::VerifyIdentities,
            Sub::BuildQscheme { .. } => Command::BuildQscheme,
            Sub::Security { .. } => Command::Security,
            Sub::Sweep { .. } => Command::Sweep,
            Sub::Chains { .. } => Command::Chains,
            Sub::Multiparty { .. } => Command::Multiparty,
            Sub::Pqc { .. } => Command::Pqc,
        }
    }

    fn flags(self, flags: &mut Vec<(&'static str, String)>) {
        match self {
            Sub::VerifyIdentities { n, instances } => {
                push(flags, "n", n);
                push(flags, "instances", instances);
            }
            Sub::BuildQscheme { bit_scheme, n, emit } => {
                push(flags, "bit-scheme", bit_scheme);
                push(flags, "n", n);
                push(flags, "emit", emit);
            }
            Sub::Security {
                scheme,
                bit_scheme,
                n,
                estimator,
                cut,
                report,
            } => {
                push(flags, "scheme", scheme);
                push(flags, "bit-scheme", bit_scheme);
                push(flags, "n", n);
                push(flags, "estimator", estimator);
                push(flags, "cut", cut);
                push(flags, "report", report);
            }
            Sub::Sweep { dims } => push(flags, "dims", dims),
            Sub::Chains { mode, n, k } => {
                push(flags, "mode", mode);
                push(flags, "n", n);
                push(flags, "k", k);
            }
            Sub::Multiparty {
                code,
                authorized,
                access,
                demo,
            } => {
                push(flags, "code", code);
                push(flags, "authorized", authorized);
                push(flags, "access", access);
                push(flags, "demo", demo);
            }
            Sub::Pqc { n, audit } => {
                push(flags, "n", n);
                push(flags, "audit", audit.then_some(true));
            }
        }
    }
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let command = cli.command.command();
    let file = match &cli.global.config {
        Some(path) => Some(parse_config_file(&std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?)?),
        None => None,
    };
    let mut flags = Vec::new();
    push(&mut flags, "seed", cli.global.seed);
    push(&mut flags, "tol", cli.global.tol);
    push(&mut flags, "out", cli.global.out);
    push(
        &mut flags,
        "format",
        cli.global.format.map(|f| match f {
            Format::Json => "json",
            Format::Csv => "csv",
        }),
    );
    cli.command.flags(&mut flags);
    let config = ExperimentConfig::resolve(command, file.as_ref(), &flags)?;
    let report = run(&config)?;
    let text = emit(&report, config.format()?, config.out())?;
    if config.out().is_none() {
        print!("{text}");
    }
    for c in report.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAILED {}: value {:e}, limit {:e}", c.name, c.value, c.limit);
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (CliError::Usage(_) | CliError::Config(_))) => {
            eprintln!("qhide: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("qhide: {e}");
            ExitCode::from(3)
        }
    }
}
