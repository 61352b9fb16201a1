mod cmds;
mod selftest;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mubkit::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "mubkit", version, about = "Mutually unbiased bases, Hadamard matrices and related tools")]
struct Cli {
    /// Seed for stochastic subcommands.
    #[arg(long, global = true, env = "MUBKIT_SEED", default_value_t = 7)]
    seed: u64,
    /// Worker threads for parallel loops (0 = library default).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output format; JSON unless the subcommand is naturally tabular.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the main artifact to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run the subcommand's invariant suite instead of its normal action.
    #[arg(long, global = true)]
    selftest: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Ascii,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Extension degree.
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    /// Override for the defining polynomial coefficients mu_0..mu_{m-1}.
    #[arg(long, value_delimiter = ',')]
    pub mu: Option<Vec<u32>>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Finite field tables and axiom check.
    Field(FieldArgs),
    /// Build the MUB set of GF(p^m).
    Mub {
        #[command(flatten)]
        field: FieldArgs,
        /// Emit every basis as an exact JSON matrix.
        #[arg(long)]
        export: bool,
        /// Emit only this basis (0..=N).
        #[arg(long)]
        basis: Option<usize>,
        /// Use the non-symmetric phase table (odd p).
        #[arg(long)]
        nonsymmetric: bool,
    },
    /// Exact unbiasedness and eigenvalue checks.
    Verify(FieldArgs),
    /// Dense coding over all messages.
    Bell(FieldArgs),
    /// Teleport a seeded random state.
    Teleport(FieldArgs),
    /// Cloning machine with seeded random amplitudes.
    Clone(FieldArgs),
    /// Entanglement swapping for one input pair.
    Swap {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long = "bm", default_value_t = 0)]
        bm: u32,
        #[arg(long = "bn", default_value_t = 0)]
        bn: u32,
    },
    /// Mean King protocol.
    Meanking {
        /// Prime-power dimension.
        #[arg(long, default_value_t = 2)]
        n: u32,
        /// Print the (m, n) grids of k values.
        #[arg(long)]
        grids: bool,
        /// Random protocol rounds.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Wigner basis criteria.
    Wigner {
        #[command(flatten)]
        field: FieldArgs,
        /// Phase twist b_0..b_{N-1}, as field elements.
        #[arg(long, value_delimiter = ',')]
        twist: Option<Vec<u32>>,
    },
    /// Tomography round trip on seeded random density matrices.
    Tomo {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
    /// Complex Hadamard matrix tools.
    Hadamard {
        #[command(subcommand)]
        action: Option<HadamardCmd>,
    },
    /// Numerical searches.
    Search {
        #[command(subcommand)]
        action: Option<SearchCmd>,
    },
    /// The prime-distinguishing function g(N).
    Gnum {
        #[arg(long, default_value_t = 2000)]
        max: u64,
        /// Emit the per-N table as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Write the MUB set and Wigner basis of GF(p^m) as JSON.
    Export(FieldArgs),
}

/// A Hadamard matrix given as `family:p1,p2,...` or a path to a JSON file.
#[derive(Args, Debug, Clone)]
pub struct MatrixArg {
    /// `family:params` such as `F6:0.1,0.2`, or a `.json` file.
    pub spec: String,
}

#[derive(Subcommand, Debug)]
pub enum HadamardCmd {
    /// List the catalog families.
    List,
    /// Build a family member.
    Build(MatrixArg),
    /// Check H H^dagger = N 1.
    Check {
        #[command(flatten)]
        matrix: MatrixArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Equivalence test with invariants and a witness search.
    Equiv {
        left: String,
        right: String,
        #[arg(long, default_value_t = mubkit::hadamard::DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Defect (dimension of the first-order phase space).
    Defect(MatrixArg),
    /// Standard set of mutually unbiased Hadamard matrices for odd N.
    Muhm {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum SearchCmd {
    /// Catalog of vectors unbiased to the identity and a Hadamard matrix.
    Unbiased {
        #[arg(long)]
        family: String,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
        /// Full parameter list; overrides --a/--b.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        params: Option<Vec<f64>>,
        #[arg(long, default_value_t = 200_000)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        saturation: usize,
        /// Also run the extendability probe on the catalog.
        #[arg(long)]
        probe: bool,
    },
    /// Sets of orthonormal vectors, different sets unbiased.
    Constellation {
        /// Set sizes, such as 5,5,5,5.
        #[arg(long, value_delimiter = ',')]
        shape: Vec<usize>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
    },
    /// Mean squared distance between Haar-random bases.
    Haar {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

/// Errors surfaced to the user.
pub enum Failure {
    /// A check ran and did not hold (exit 1).
    Verification(String),
    /// Bad input (exit 2).
    Usage(String),
    /// Library error while running (exit 1).
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPrime(_)
            | Error::ReduciblePolynomial(..)
            | Error::BadParameter(_)
            | Error::Parse(_)
            | Error::DimensionMismatch(_)
            | Error::DegenerateMobiusPoint(..) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: cannot set thread count: {e}");
            return ExitCode::from(2);
        }
    }
    let ctx = cmds::Ctx { seed: cli.seed, format: cli.format, out: cli.out.clone() };
    let result = if cli.selftest { selftest::run(&cli.cmd, &ctx) } else { cmds::run(&cli.cmd, &ctx) };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg} (see `mubkit --help`)");
            ExitCode::from(2)
        }
    }
}
