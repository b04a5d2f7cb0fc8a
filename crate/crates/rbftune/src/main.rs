use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbftune::bench::{self, BenchConfig, PointKind};
use rbftune::pipeline::{self, select_centers, Method, TuneParams, TuneRequest};
use rbftune::real::{self, RealConfig};
use rbftune::{dataio, Error, Result};
use rbftune_core::data::TestFunction;
use rbftune_core::kernels::KernelFamily;

/// Tune the shape parameter of radial basis function fits by grid LOOCV,
/// optimizer LOOCV or Bayesian optimization.
#[derive(Debug, Parser)]
#[command(name = "rbftune", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Tune one configuration on synthetic data and print a JSON report.
    Tune(TuneArgs),
    /// Run the benchmark matrix and write CSV tables plus results.md.
    Bench(BenchArgs),
    /// Tune on a measured data file (x1,…,xd,f per line).
    Real(RealArgs),
    /// Write a synthetic data set as CSV.
    GenData(GenArgs),
}

#[derive(Debug, Args)]
struct TunerArgs {
    /// Upper end of the search interval (0, eps-max].
    #[arg(long, default_value_t = 20.0)]
    eps_max: f64,
    /// Number of grid values for loocv.
    #[arg(long, default_value_t = 500)]
    grid: usize,
    /// Starting value for loocv-star [default: eps-max / 2].
    #[arg(long)]
    start: Option<f64>,
    /// Random initial evaluations for bo.
    #[arg(long, default_value_t = 5)]
    nstart: usize,
    /// Surrogate-guided evaluations for bo.
    #[arg(long, default_value_t = 25)]
    niter: usize,
}

impl TunerArgs {
    fn params(&self, xi: f64) -> TuneParams {
        TuneParams {
            eps_max: self.eps_max,
            grid_size: self.grid,
            start: self.start,
            nstart: self.nstart,
            niter: self.niter,
            xi,
            ..TuneParams::default()
        }
    }
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long, default_value = "bo")]
    method: Method,
    #[arg(long, default_value = "ga")]
    kernel: KernelFamily,
    #[arg(long, default_value = "f1")]
    function: TestFunction,
    #[arg(long, default_value = "halton")]
    points: PointKind,
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Fraction of data locations used as centers (1 = interpolation).
    #[arg(long, default_value_t = 1.0)]
    centers: f64,
    #[arg(long, default_value_t = 0.01)]
    xi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Size of the seeded random test set.
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    #[command(flatten)]
    tuner: TunerArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<PointKind>>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    kernel: Option<Vec<KernelFamily>>,
    #[arg(long, value_delimiter = ',')]
    function: Option<Vec<TestFunction>>,
    #[arg(long, value_delimiter = ',')]
    method: Option<Vec<Method>>,
    #[arg(long, value_delimiter = ',')]
    xi: Option<Vec<f64>>,
    /// Center fractions for the approximation sweeps.
    #[arg(long, value_delimiter = ',')]
    fractions: Option<Vec<f64>>,
    /// ξ for the approximation sweeps.
    #[arg(long, default_value_t = 0.01)]
    sweep_xi: f64,
    #[arg(long, default_value_t = 1000)]
    test_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent runs executed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record wall-clock seconds in the CSVs (breaks byte-for-byte reproducibility).
    #[arg(long)]
    csv_timings: bool,
    #[command(flatten)]
    tuner: TunerArgs,
}

fn parse_real_kernel(s: &str) -> std::result::Result<KernelFamily, String> {
    match s.parse::<KernelFamily>().map_err(|e| e.to_string())? {
        KernelFamily::Gaussian => {
            Err("ga is not available for measured data; use m2 and/or w2".into())
        }
        k => Ok(k),
    }
}

#[derive(Debug, Args)]
struct RealArgs {
    /// CSV file with one `x1,…,xd,f` record per line.
    path: PathBuf,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Skip the first line of the file.
    #[arg(long)]
    header: bool,
    /// Train and test sizes.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1000,500")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_real_kernel, default_value = "m2,w2")]
    kernel: Vec<KernelFamily>,
    #[arg(long, value_delimiter = ',', default_value = "loocv,bo")]
    method: Vec<Method>,
    #[arg(long, default_value_t = 0.01)]
    xi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the coordinates as given instead of mapping them onto [0,1]^dim.
    #[arg(long)]
    no_rescale: bool,
    #[command(flatten)]
    tuner: TunerArgs,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value = "f1")]
    function: TestFunction,
    #[arg(long, default_value = "halton")]
    points: PointKind,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write an `x1,x2,f` header line.
    #[arg(long)]
    header: bool,
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out).map_err(|e| Error::io("<stdout>", e))
}

fn tune(args: TuneArgs) -> Result<()> {
    let data = args
        .function
        .sample(args.points.generate(args.n, 2, args.seed)?)?;
    let test = bench::synthetic_test_set(args.function, args.test_size, args.seed)?;
    let centers = select_centers(&data, args.centers, args.seed)?;
    let req = TuneRequest {
        method: args.method,
        family: args.kernel,
        data,
        centers,
        test,
        params: args.tuner.params(args.xi),
        seed: args.seed,
        report_rmae: false,
    };
    print_json(&pipeline::run(&req)?)
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let d = BenchConfig::default();
    let config = BenchConfig {
        point_kinds: args.points.unwrap_or(d.point_kinds),
        sizes: args.sizes.unwrap_or(d.sizes),
        kernels: args.kernel.unwrap_or(d.kernels),
        functions: args.function.unwrap_or(d.functions),
        methods: args.method.unwrap_or(d.methods),
        xis: args.xi.unwrap_or(d.xis),
        fractions: args.fractions.unwrap_or(d.fractions),
        sweep_xi: args.sweep_xi,
        test_size: args.test_size,
        seed: args.seed,
        params: args.tuner.params(args.sweep_xi),
        jobs: args.jobs,
        csv_timings: args.csv_timings,
    };
    let output = bench::run_bench(&config, &args.out, |msg| eprintln!("{msg}"))?;
    for path in output.csv_files.iter().chain([&output.markdown]) {
        println!("{}", path.display());
    }
    Ok(())
}

fn run_real(args: RealArgs) -> Result<()> {
    let [train_size, test_size] = args.sizes[..] else {
        return Err(Error::Config(
            "--sizes takes exactly two values: train,test".into(),
        ));
    };
    let data = dataio::load_csv(&args.path, args.dim, args.header)?;
    let config = RealConfig {
        train_size,
        test_size,
        kernels: args.kernel,
        methods: args.method,
        params: args.tuner.params(args.xi),
        seed: args.seed,
        rescale: !args.no_rescale,
    };
    print_json(&real::run_real(&data, &config)?)
}

fn gen_data(args: GenArgs) -> Result<()> {
    let data = args
        .function
        .sample(args.points.generate(args.n, 2, args.seed)?)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            dataio::write_records(std::io::BufWriter::new(file), &data, args.header)
        }
        None => dataio::write_records(std::io::stdout().lock(), &data, args.header),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Tune(a) => tune(a),
        Command::Bench(a) => run_bench(a),
        Command::Real(a) => run_real(a),
        Command::GenData(a) => gen_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rbftune: {e}");
            ExitCode::from(1)
        }
    }
}
