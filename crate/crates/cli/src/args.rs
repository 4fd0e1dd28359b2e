use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use weylcomp_core::{Family, Model};

use crate::io::Format;

/// Weyl chamber compactifications of SL(n,R)/SO(n).
///
/// Exit codes: 0 success, 1 a verified property failed, 2 usage or parse error,
/// 3 input violating an invariant (not symmetric, not positive definite, det != 1, ...).
#[derive(Debug, Parser)]
#[command(name = "weylcomp", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Exact-data tolerance [default: 1e-8].
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Trailing-window Cauchy tolerance [default: 1e-4].
    #[arg(long, global = true)]
    pub cauchy_tol: Option<f64>,
    /// Escape threshold for divergence detection [default: 1e3].
    #[arg(long, global = true)]
    pub divergence_threshold: Option<f64>,
    /// Tolerance for snapping and comparing limits [default: 1e-3].
    #[arg(long, global = true)]
    pub limit_tol: Option<f64>,
    /// Trailing window length [default: 10].
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Top-level seed; task i of a command uses seed + i [default: 0].
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Boundary model: visual, dualcell, martin or iterated [default: visual].
    #[arg(long, global = true)]
    pub model: Option<Model>,
    /// Kernel family: F, M or K [default: F].
    #[arg(long, global = true)]
    pub kernel: Option<Family>,
    /// Output file, written atomically; standard output if absent.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cartan decomposition of an SPD matrix: frame, radius, face and root values.
    Decompose { input: PathBuf },
    /// Matrix `k exp(2H) kᵀ` from a decomposition (the output of `decompose`).
    Realize { input: PathBuf },
    /// Generalized radius r(x, y) and distance.
    Radius { x: PathBuf, y: PathBuf },
    /// Face, root values and stabilizer blocks of a chamber vector.
    Face { input: PathBuf },
    /// Classify a sequence in the chosen model and compute its quotient limit.
    Classify { input: PathBuf },
    /// Equivalence of two quotient points.
    Equiv { p: PathBuf, q: PathBuf },
    /// Left action of a rotation on a quotient point.
    Act { rotation: PathBuf, point: PathBuf },
    /// Intersection property for one frame pair, or the rank-one demonstration.
    Intersections(IntersectionArgs),
    /// Polar decomposition of a sequence and fundamentality in every model.
    Fundamental { input: PathBuf },
    /// Limit of a sequence in the quotient compactification.
    Limit { input: PathBuf },
    /// Refinement report between two models on generated sequence pairs.
    Refine(RefineArgs),
    /// Generalized Busemann kernels and their condition harnesses.
    #[command(subcommand)]
    Kernel(KernelCommand),
    /// Normalized Busemann functions and the limit-function experiment.
    #[command(subcommand)]
    Busemann(BusemannCommand),
    /// Run an invariant suite; exits 1 if a hard invariant fails.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct IntersectionArgs {
    /// Rotation `k` [default: identity].
    #[arg(long)]
    pub k: Option<PathBuf>,
    /// Rotation `r` [default: rotation by 0.7 in the (2,3) plane].
    #[arg(long)]
    pub r: Option<PathBuf>,
    /// Matrix size when no rotation files are given.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Emit the rank-one report instead.
    #[arg(long)]
    pub rank_one: bool,
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    /// Models as `a:b`, checking "equal in a implies equal in b".
    #[arg(long, default_value = "martin:visual")]
    pub pair: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long)]
    pub pairs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampling {
    Random,
    Ray,
    TwoDirection,
}

#[derive(Debug, Subcommand)]
pub enum KernelCommand {
    /// δ(x, y) component by component.
    Eval { x: PathBuf, y: PathBuf },
    /// Estimate sup ‖δ(x,y)‖ / d(x,y).
    Lipschitz {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Search for pairs where ‖δ(·, x)‖ fails to grow with distance.
    Condition1 {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, value_enum, default_value_t = Sampling::TwoDirection)]
        sampling: Sampling,
        /// Centre point [default: identity].
        #[arg(long)]
        center: Option<PathBuf>,
    },
    /// Estimate the Lipschitz constant of δ(x, ·).
    Condition3 {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        samples: Option<usize>,
        /// Bound by d(x, z) instead of d(z, z').
        #[arg(long)]
        literal: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum BusemannCommand {
    /// b_x on a probe set.
    Eval {
        x: PathBuf,
        /// Probe file from `busemann probes`; generated from the seed if absent.
        #[arg(long)]
        probes: Option<PathBuf>,
        /// Base point o [default: identity].
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Write a seeded probe set.
    Probes {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Compare equality of model limits with equality of Busemann limit functions.
    Conjecture {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        probes: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Property {
    Stratified,
    Intersections,
    Refinement,
    KernelConditions,
    ClassStructure,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub property: Property,
    /// Model pair for `refinement`.
    #[arg(long, default_value = "martin:visual")]
    pub pair: String,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Rotation files for `intersections`.
    #[arg(long)]
    pub k: Option<PathBuf>,
    #[arg(long)]
    pub r: Option<PathBuf>,
}
