use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fast rectangular matrix multiplication: validation, execution, CDAG
/// structure, expansion, simulated communication and bounds.
///
/// ALG is a catalog name (`hk-323`), an expression (`hk-323*bini-232-encB`,
/// `strassen@r.t`, `classical(2,3,2)`) or a path to an algorithm file.
#[derive(Debug, Parser)]
#[command(name = "rectcomm", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the report (CSV, or JSON for `.json` paths).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SubArg {
    #[value(name = "EncA", alias = "enca")]
    EncA,
    #[value(name = "EncB", alias = "encb")]
    EncB,
    #[value(name = "DecC", alias = "decc")]
    DecC,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LayoutArg {
    RecursiveBlocked,
    RowMajor,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Brent equations exactly.
    Validate {
        /// Omit to validate the whole catalog.
        alg: Option<String>,
    },
    /// The six transpose/rotation images of an algorithm.
    Variants { alg: String },
    /// Tensor product or power; prints the algorithm file.
    Tensor {
        alg: String,
        /// Tensor power instead of the expression itself.
        #[arg(long)]
        power: Option<usize>,
    },
    /// Multiply random integer matrices recursively and compare.
    Multiply {
        alg: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Value of λ, e.g. `1/64` or `2^-6`.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Switch to classical multiplication at this depth.
        #[arg(long, default_value_t = 0)]
        cutoff: usize,
        /// Use f64 arithmetic instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
    /// Error against the exact product as λ shrinks.
    ErrorScan {
        alg: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// List or power range, e.g. `2^-4..2^-8` or `1/16,1/32`.
        #[arg(long, default_value = "2^-4..2^-8")]
        lambdas: String,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Level sizes, degrees and components of the CDAG parts.
    CdagStats {
        alg: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Split reused vertices into per-level copies.
        #[arg(long)]
        relaxed: bool,
        /// Write the undirected edge list here.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Restrict the edge list to one part.
        #[arg(long, value_enum)]
        sub: Option<SubArg>,
    },
    /// Edge expansion of one CDAG part or of an edge-list file.
    Expansion {
        /// Algorithm, unless `--graph` is given.
        alg: Option<String>,
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long, value_enum, default_value_t = SubArg::DecC)]
        sub: SubArg,
        #[arg(long)]
        relaxed: bool,
        /// Largest set size (default: half the graph).
        #[arg(long)]
        s_max: Option<usize>,
        #[arg(long, default_value_t = 22)]
        exhaustive: usize,
        #[arg(long, default_value_t = 8)]
        small_set: usize,
        /// Only the spectral bounds.
        #[arg(long)]
        spectral: bool,
    },
    /// Trace-driven LRU simulation of the recursive schedule.
    Simulate {
        alg: String,
        #[arg(long, default_value_t = 3)]
        t: usize,
        /// Fast memory sizes: `256..8192` (doubling) or `256,1024`.
        #[arg(long = "M", short = 'M', default_value = "256..8192")]
        mem: String,
        #[arg(long, value_enum, default_value_t = LayoutArg::RecursiveBlocked)]
        layout: LayoutArg,
        #[arg(long, default_value_t = 0)]
        cutoff: usize,
        /// Fit the slope of log W against log M.
        #[arg(long)]
        fit: bool,
        /// Allowed distance of the slope from the decoder-bound exponent.
        #[arg(long, default_value_t = 0.08)]
        tolerance: f64,
    },
    /// Exact words-moved recurrence.
    Recurrence {
        alg: String,
        /// Depths: `4`, `1..6` or `2,4`.
        #[arg(long, default_value = "1..6")]
        t: String,
        #[arg(long = "M", short = 'M', default_value = "256..8192")]
        mem: String,
    },
    /// All applicable lower bounds and the matching upper bound.
    Bounds {
        alg: String,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long = "M", short = 'M', default_value_t = 1024.0)]
        mem: f64,
    },
    /// Lower-bound table for the Bini and Hopcroft-Kerr variants and their products.
    Table1,
    /// Versus splitting into square products done by an ω0 algorithm.
    Blackbox {
        alg: String,
        /// Exponent of the square method, e.g. `2.81` or `log2(7)`.
        #[arg(long, default_value = "log2(7)")]
        omega0: String,
        #[arg(long, default_value_t = 4)]
        t: usize,
        #[arg(long = "M", short = 'M', default_value_t = 1024.0)]
        mem: f64,
    },
}
