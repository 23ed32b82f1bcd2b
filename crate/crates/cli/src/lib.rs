//! Command-line driver for the spectral graph filter bank library.
//!
//! Exit codes: 0 success, 1 usage, 2 I/O, 3 validation (including failed
//! reconstruction checks), 4 numeric (eigendecomposition failure).

mod cache;
mod formats;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sgfb_core::bank::FilterBank;
use sgfb_core::denoise::{run_experiment, DenoiseConfig, Method, SignalKind};
use sgfb_core::design::{
    build_alpha_map, convert_filter_set, ideal_kernels, AlphaBase, ClassicalFilterSet, KernelSet,
};
use sgfb_core::graph::{Graph, VariationKind};
use sgfb_core::spectral::SpectralBasis;

pub(crate) enum CliError {
    Io(String),
    Core(sgfb_core::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 2,
            CliError::Core(sgfb_core::Error::Eigen(_)) => 4,
            CliError::Core(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<sgfb_core::Error> for CliError {
    fn from(e: sgfb_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub(crate) type CliResult<T> = Result<T, CliError>;

fn io_error(path: &Path, err: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {err}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "sgfb",
    version,
    about = "M-channel critically sampled spectral graph filter banks",
    long_about = "Builds graph filter banks whose downsampling happens in the graph frequency \
                  domain, verifies perfect reconstruction to machine precision, and runs \
                  seeded denoising experiments."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph and write it as an edge list
    GenGraph(GenGraphArgs),
    /// Eigendecompose the variation operator and write the eigenvalues
    Eigs(EigsArgs),
    /// Design filter kernels and write them as CSV (one row per channel)
    DesignFilters(DesignFiltersArgs),
    /// Check perfect reconstruction; non-zero exit on violation
    VerifyPr(VerifyPrArgs),
    /// Split a signal into subband coefficients
    Analyze(AnalyzeArgs),
    /// Rebuild a signal from subband coefficients
    Synthesize(SynthesizeArgs),
    /// Run the seeded denoising experiment and print an SNR table
    Denoise(DenoiseArgs),
    /// Export per-eigenvalue kernel responses as plot-ready CSV
    PlotFilters(PlotFiltersArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VariationArg {
    /// Combinatorial Laplacian D − A
    Comb,
    /// Symmetrically normalized Laplacian
    Norm,
    /// Adjacency matrix
    Adj,
}

impl From<VariationArg> for VariationKind {
    fn from(v: VariationArg) -> Self {
        match v {
            VariationArg::Comb => VariationKind::CombinatorialLaplacian,
            VariationArg::Norm => VariationKind::NormalizedLaplacian,
            VariationArg::Adj => VariationKind::Adjacency,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FiltersArg {
    /// Brick-wall spectral indicators
    Ideal,
    /// Warped cosine-transform kernels
    Dct,
    /// Warped lapped-orthogonal kernels (M ≥ 4)
    Lot,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaArg {
    /// One eigenvalue rescaling across the whole spectrum
    Global,
    /// Per-block eigenvalue rescaling (default)
    TiledEig,
    /// Per-block rank positions, eigenvalue-agnostic
    TiledRank,
}

impl From<AlphaArg> for AlphaBase {
    fn from(a: AlphaArg) -> Self {
        match a {
            AlphaArg::Global => AlphaBase::GlobalEigenvalue,
            AlphaArg::TiledEig => AlphaBase::TiledEigenvalue,
            AlphaArg::TiledRank => AlphaBase::TiledRank,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SignalArg {
    /// Random-sign exponentially decaying spectrum
    LowpassRandom,
    /// Seeded cluster levels on eigenvector coordinates
    Piecewise,
}

impl From<SignalArg> for SignalKind {
    fn from(s: SignalArg) -> Self {
        match s {
            SignalArg::LowpassRandom => SignalKind::LowpassRandom,
            SignalArg::Piecewise => SignalKind::Piecewise,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    /// Soft-threshold the whole spectrum as one block
    GftBaseline,
    /// M-channel bank with brick-wall kernels
    BankIdeal,
    /// M-channel bank with warped cosine kernels
    BankDct,
    /// M-channel bank with warped lapped kernels
    BankLot,
    /// Two-channel octave cascade
    BankOctave2,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::GftBaseline => Method::GftBaseline,
            MethodArg::BankIdeal => Method::BankIdeal,
            MethodArg::BankDct => Method::BankDct,
            MethodArg::BankLot => Method::BankLot,
            MethodArg::BankOctave2 => Method::BankOctave2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphKindArg {
    /// Unweighted path graph
    Path,
    /// Random sensor network (k-nearest neighbors, Gaussian weights)
    Sensor,
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list graph file
    #[arg(long)]
    graph: PathBuf,
    /// Variation operator
    #[arg(long, value_enum, default_value_t = VariationArg::Comb)]
    variation: VariationArg,
    /// Eigendecomposition cache directory (SGFB_CACHE_DIR overrides)
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl GraphArgs {
    fn load(&self) -> CliResult<Graph> {
        let text = std::fs::read_to_string(&self.graph).map_err(|e| io_error(&self.graph, e))?;
        Ok(Graph::parse(&text)?)
    }

    fn basis(&self) -> CliResult<Arc<SpectralBasis>> {
        let graph = self.load()?;
        let dir = cache::resolve_dir(self.cache.clone());
        Ok(Arc::new(cache::load_or_compute(
            &graph,
            self.variation.into(),
            dir.as_deref(),
        )?))
    }
}

#[derive(Args)]
struct KernelArgs {
    /// Number of channels M (even)
    #[arg(long, default_value_t = 8)]
    channels: usize,
    /// Kernel family to design
    #[arg(long, value_enum, default_value_t = FiltersArg::Ideal)]
    filters: FiltersArg,
    /// Eigenvalue warp for dct/lot conversion
    #[arg(long, value_enum, default_value_t = AlphaArg::TiledEig)]
    alpha_base: AlphaArg,
    /// Load kernels from CSV instead of designing (overrides --filters)
    #[arg(long)]
    kernels: Option<PathBuf>,
}

impl KernelArgs {
    fn build(&self, basis: &SpectralBasis) -> CliResult<KernelSet> {
        if let Some(path) = &self.kernels {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            let set = formats::parse_kernels(&text)?;
            if set.n() != basis.n() {
                return Err(sgfb_core::Error::DimensionMismatch {
                    expected: basis.n(),
                    got: set.n(),
                }
                .into());
            }
            return Ok(set);
        }
        let n = basis.n();
        let set = match self.filters {
            FiltersArg::Ideal => ideal_kernels(n, self.channels)?,
            FiltersArg::Dct => {
                let warp = build_alpha_map(
                    basis.lambdas().view(),
                    self.channels,
                    self.alpha_base.into(),
                )?;
                convert_filter_set(&ClassicalFilterSet::dct(self.channels)?, &warp)?
            }
            FiltersArg::Lot => {
                let warp = build_alpha_map(
                    basis.lambdas().view(),
                    self.channels,
                    self.alpha_base.into(),
                )?;
                convert_filter_set(&ClassicalFilterSet::lot(self.channels)?, &warp)?
            }
        };
        Ok(set)
    }
}

#[derive(Args)]
struct GenGraphArgs {
    /// Graph family
    #[arg(long, value_enum)]
    kind: GraphKindArg,
    /// Vertex count
    #[arg(long)]
    n: usize,
    /// Neighbors per vertex (sensor graphs)
    #[arg(long, default_value_t = 6)]
    k: usize,
    /// Placement seed (sensor graphs)
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EigsArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Output file for eigenvalues (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DesignFiltersArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kernels: KernelArgs,
    /// Output kernel CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyPrArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kernels: KernelArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kernels: KernelArgs,
    /// Input signal CSV (one value per line)
    #[arg(long)]
    signal: PathBuf,
    /// Output coefficient CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kernels: KernelArgs,
    /// Input coefficient CSV (channel,index,value rows)
    #[arg(long)]
    coeffs: PathBuf,
    /// Output signal CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DenoiseArgs {
    #[command(flatten)]
    graph: GraphArgs,
    /// Channel count for bank methods
    #[arg(long, default_value_t = 8)]
    channels: usize,
    /// Clean test signal family
    #[arg(long, value_enum, default_value_t = SignalArg::LowpassRandom)]
    signal: SignalArg,
    /// Seed for the clean signal
    #[arg(long, default_value_t = 7)]
    signal_seed: u64,
    /// Noise levels relative to signal RMS, comma-separated
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125])]
    sigma: Vec<f64>,
    /// Noise draws per σ
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Base noise seed (trial t uses seed + t)
    #[arg(long, default_value_t = 1000)]
    seed: u64,
    /// Methods to compare, comma-separated (all when omitted)
    #[arg(long, value_enum, value_delimiter = ',')]
    methods: Option<Vec<MethodArg>>,
    /// Eigenvalue warp for dct/lot methods
    #[arg(long, value_enum, default_value_t = AlphaArg::TiledEig)]
    alpha_base: AlphaArg,
    /// Cascade depth for bank-octave2
    #[arg(long, default_value_t = 3)]
    levels: usize,
    /// Write the result table as CSV here (text table always on stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotFiltersArgs {
    #[command(flatten)]
    graph: GraphArgs,
    #[command(flatten)]
    kernels: KernelArgs,
    /// Output CSV of (λ, per-channel responses) rows (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` and runs the selected command, returning the process exit
/// code. All output goes to stdout/stderr; nothing panics on bad input.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::GenGraph(args) => gen_graph(args),
        Command::Eigs(args) => eigs(args),
        Command::DesignFilters(args) => design_filters(args),
        Command::VerifyPr(args) => verify_pr(args),
        Command::Analyze(args) => analyze(args),
        Command::Synthesize(args) => synthesize(args),
        Command::Denoise(args) => denoise(args),
        Command::PlotFilters(args) => plot_filters(args),
    }
}

fn write_out(out: Option<&Path>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| io_error(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn gen_graph(args: GenGraphArgs) -> CliResult<()> {
    let graph = match args.kind {
        GraphKindArg::Path => Graph::path(args.n)?,
        GraphKindArg::Sensor => Graph::random_sensor(args.n, args.k, args.seed)?,
    };
    write_out(args.out.as_deref(), &graph.to_edge_list())
}

fn eigs(args: EigsArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    write_out(
        args.out.as_deref(),
        &formats::render_values(basis.lambdas()),
    )
}

fn design_filters(args: DesignFiltersArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    let kernels = args.kernels.build(&basis)?;
    write_out(args.out.as_deref(), &formats::render_kernels(&kernels))
}

fn verify_pr(args: VerifyPrArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    let kernels = args.kernels.build(&basis)?;
    let bank = FilterBank::new(basis, kernels)?;
    let report = bank.verify_pr()?;
    let tol = sgfb_core::bank::PR_REL_TOL * report.c_sq;
    println!("c² = {:.12}", report.c_sq);
    println!(
        "max |diag(T) − c²|   = {:.3e}  (tolerance {:.1e})",
        report.max_diag_dev, tol
    );
    println!(
        "max |offdiag(T)|     = {:.3e}  (tolerance {:.1e})",
        report.max_offdiag, tol
    );
    println!(
        "scalar distortion     = {:.3e}",
        report.scalar.max_distortion_residual
    );
    println!(
        "scalar alias          = {:.3e}",
        report.scalar.max_alias_residual
    );
    if report.is_pr() {
        println!("verdict: PASS");
        Ok(())
    } else {
        println!("verdict: FAIL");
        Err(
            sgfb_core::Error::Validation("perfect reconstruction violated beyond tolerance".into())
                .into(),
        )
    }
}

fn analyze(args: AnalyzeArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    let kernels = args.kernels.build(&basis)?;
    let bank = FilterBank::new(basis, kernels)?;
    let text = std::fs::read_to_string(&args.signal).map_err(|e| io_error(&args.signal, e))?;
    let signal = formats::parse_signal(&text)?;
    let coeffs = bank.analyze(&signal)?;
    write_out(args.out.as_deref(), &formats::render_coeffs(&coeffs))
}

fn synthesize(args: SynthesizeArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    let kernels = args.kernels.build(&basis)?;
    let bank = FilterBank::new(basis, kernels)?;
    let text = std::fs::read_to_string(&args.coeffs).map_err(|e| io_error(&args.coeffs, e))?;
    let coeffs = formats::parse_coeffs(&text)?;
    let signal = bank.synthesize(&coeffs)?;
    write_out(
        args.out.as_deref(),
        &formats::render_values(signal.values()),
    )
}

fn denoise(args: DenoiseArgs) -> CliResult<()> {
    let graph = args.graph.load()?;
    let methods = match args.methods {
        Some(list) => list.into_iter().map(Method::from).collect(),
        None => Method::ALL.to_vec(),
    };
    let config = DenoiseConfig {
        variation: args.graph.variation.into(),
        signal: args.signal.into(),
        signal_seed: args.signal_seed,
        sigma_list: args.sigma,
        trials: args.trials,
        base_seed: args.seed,
        methods,
        channels: args.channels,
        alpha_base: args.alpha_base.into(),
        octave_levels: args.levels,
    };
    let result = run_experiment(&graph, &config)?;
    print!("{}", result.render_text());
    if let Some(path) = &args.out {
        std::fs::write(path, result.render_csv()).map_err(|e| io_error(path, e))?;
    }
    Ok(())
}

fn plot_filters(args: PlotFiltersArgs) -> CliResult<()> {
    let basis = args.graph.basis()?;
    let kernels = args.kernels.build(&basis)?;
    write_out(
        args.out.as_deref(),
        &formats::render_plot(basis.lambdas(), &kernels),
    )
}
