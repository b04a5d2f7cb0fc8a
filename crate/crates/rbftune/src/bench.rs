//! The benchmark matrix: interpolation tables per (function, point kind) and
//! approximation sweeps per kernel, written as CSV plus a Markdown summary.
//!
//! Table CSVs contain no wall-clock data unless asked for, so reruns with the
//! same seed are byte-identical; timings always go to the Markdown summary.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rbftune_core::data::{halton_points, random_points, DataSet, PointSet, TestFunction};
use rbftune_core::kernels::KernelFamily;
use serde::{Deserialize, Serialize};

use crate::pipeline::{self, select_centers, Method, TuneParams, TuneReport, TuneRequest};
use crate::{derive_seed, Error, Result};

const TEST_STREAM: u64 = 0x7e57;
const DATA_STREAM: u64 = 0xda7a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    Random,
    Halton,
}

impl PointKind {
    pub const ALL: [PointKind; 2] = [PointKind::Random, PointKind::Halton];

    pub fn token(self) -> &'static str {
        match self {
            PointKind::Random => "random",
            PointKind::Halton => "halton",
        }
    }

    /// `n` points in `[0,1]^dim`; the seed only matters for random points.
    pub fn generate(self, n: usize, dim: usize, seed: u64) -> Result<PointSet> {
        Ok(match self {
            PointKind::Random => random_points(n, dim, seed)?,
            PointKind::Halton => halton_points(n, dim)?,
        })
    }
}

impl FromStr for PointKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(PointKind::Random),
            "halton" => Ok(PointKind::Halton),
            other => Err(format!(
                "unknown point kind `{other}` (expected random or halton)"
            )),
        }
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub point_kinds: Vec<PointKind>,
    pub sizes: Vec<usize>,
    pub kernels: Vec<KernelFamily>,
    pub functions: Vec<TestFunction>,
    pub methods: Vec<Method>,
    /// One BO row per value in the interpolation tables.
    pub xis: Vec<f64>,
    pub fractions: Vec<f64>,
    /// ξ used by every row of the approximation sweeps.
    pub sweep_xi: f64,
    pub test_size: usize,
    pub seed: u64,
    pub params: TuneParams,
    pub jobs: usize,
    /// Add measured seconds to the CSVs (which then differ between runs).
    pub csv_timings: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            point_kinds: PointKind::ALL.to_vec(),
            sizes: vec![250, 500, 1000],
            kernels: KernelFamily::ALL.to_vec(),
            functions: vec![TestFunction::F1, TestFunction::F2],
            methods: Method::ALL.to_vec(),
            xis: vec![0.1, 0.01, 0.001],
            fractions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            sweep_xi: 0.01,
            test_size: 1000,
            seed: 0,
            params: TuneParams::default(),
            jobs: 1,
            csv_timings: false,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("point kinds", self.point_kinds.is_empty()),
            ("sizes", self.sizes.is_empty()),
            ("kernels", self.kernels.is_empty()),
            ("functions", self.functions.is_empty()),
            ("methods", self.methods.is_empty()),
            ("xi values", self.xis.is_empty()),
            ("center fractions", self.fractions.is_empty()),
        ];
        if let Some((what, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!(
                "bench needs at least one entry in {what}"
            )));
        }
        if let Some(n) = self.sizes.iter().find(|&&n| n < 10) {
            return Err(Error::Config(format!(
                "size {n} is below the minimum of 10"
            )));
        }
        if let Some(f) = self.fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::Config(format!(
                "center fraction {f} is outside (0, 1]"
            )));
        }
        if let Some(x) = self
            .xis
            .iter()
            .chain([&self.sweep_xi])
            .find(|&&x| !(x >= 0.0 && x.is_finite()))
        {
            return Err(Error::Config(format!(
                "xi {x} must be a nonnegative number"
            )));
        }
        if self.test_size == 0 {
            return Err(Error::Config("test size must be positive".into()));
        }
        Ok(())
    }
}

/// One CSV record; shared by every table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(with = "crate::token")]
    pub function: TestFunction,
    #[serde(with = "crate::token")]
    pub points: PointKind,
    #[serde(with = "crate::token")]
    pub kernel: KernelFamily,
    pub n: usize,
    #[serde(with = "crate::token")]
    pub method: Method,
    pub xi: Option<f64>,
    pub centers_pct: Option<f64>,
    pub time_s: Option<f64>,
    pub mae: f64,
    pub epsilon_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Cell {
    function: TestFunction,
    points: PointKind,
    kernel: KernelFamily,
    n: usize,
    method: Method,
    xi: Option<f64>,
    fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    cells: Vec<Cell>,
}

impl Table {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn method_rows(config: &BenchConfig) -> Vec<(Method, Option<f64>)> {
    config
        .methods
        .iter()
        .flat_map(|&m| match m {
            Method::Bo => config.xis.iter().map(|&x| (m, Some(x))).collect::<Vec<_>>(),
            _ => vec![(m, None)],
        })
        .collect()
}

/// The table inventory for a configuration, in output order:
/// `interp_<f>_<points>_m2-ga` for each function and point kind,
/// `interp_w2_<points>` for each point kind, and `sweep_<kernel>_f1` for
/// each kernel.
pub fn plan(config: &BenchConfig) -> Vec<Table> {
    let mut tables = Vec::new();
    let methods = method_rows(config);
    let smooth: Vec<KernelFamily> = [KernelFamily::Matern2, KernelFamily::Gaussian]
        .into_iter()
        .filter(|k| config.kernels.contains(k))
        .collect();

    let interp = |function, points, kernel, n, (method, xi)| Cell {
        function,
        points,
        kernel,
        n,
        method,
        xi,
        fraction: None,
    };

    if !smooth.is_empty() {
        for &f in &config.functions {
            for &p in &config.point_kinds {
                let mut cells = Vec::new();
                for &n in &config.sizes {
                    for &k in &smooth {
                        cells.extend(methods.iter().map(|&m| interp(f, p, k, n, m)));
                    }
                }
                tables.push(Table {
                    name: format!("interp_{f}_{p}_m2-ga"),
                    cells,
                });
            }
        }
    }
    if config.kernels.contains(&KernelFamily::Wendland2) {
        for &p in &config.point_kinds {
            let mut cells = Vec::new();
            for &n in &config.sizes {
                for &f in &config.functions {
                    cells.extend(
                        methods
                            .iter()
                            .map(|&m| interp(f, p, KernelFamily::Wendland2, n, m)),
                    );
                }
            }
            tables.push(Table {
                name: format!("interp_w2_{p}"),
                cells,
            });
        }
    }
    if config.functions.contains(&TestFunction::F1) && config.methods.contains(&Method::Bo) {
        for &k in &config.kernels {
            let mut cells = Vec::new();
            for &n in &config.sizes {
                for &fraction in &config.fractions {
                    for &p in &config.point_kinds {
                        cells.push(Cell {
                            function: TestFunction::F1,
                            points: p,
                            kernel: k,
                            n,
                            method: Method::Bo,
                            xi: Some(config.sweep_xi),
                            fraction: Some(fraction),
                        });
                    }
                }
            }
            tables.push(Table {
                name: format!("sweep_{k}_f1"),
                cells,
            });
        }
    }
    tables
}

/// `size` seeded random points in `[0,1]²` with their function values; the
/// seed is decorrelated from the one used for random data locations.
pub fn synthetic_test_set(function: TestFunction, size: usize, seed: u64) -> Result<DataSet> {
    let locs = random_points(size, 2, derive_seed(seed, TEST_STREAM))?;
    Ok(function.sample(locs)?)
}

fn test_set(config: &BenchConfig, function: TestFunction) -> Result<DataSet> {
    synthetic_test_set(function, config.test_size, config.seed)
}

/// Data set for one (function, point kind, size); the same locations are
/// used for every kernel and method.
pub fn data_set(
    config: &BenchConfig,
    function: TestFunction,
    points: PointKind,
    n: usize,
) -> Result<DataSet> {
    let seed = derive_seed(config.seed, DATA_STREAM ^ n as u64);
    Ok(function.sample(points.generate(n, 2, seed)?)?)
}

fn run_cell(config: &BenchConfig, cell: &Cell) -> Result<BenchRow> {
    let data = data_set(config, cell.function, cell.points, cell.n)?;
    let test = test_set(config, cell.function)?;
    let seed = derive_seed(config.seed, cell.n as u64);
    let mut params = config.params;
    if let Some(xi) = cell.xi {
        params.xi = xi;
    }
    let centers = match cell.fraction {
        Some(f) => select_centers(&data, f, seed)?,
        None => data.locations().clone(),
    };
    let req = TuneRequest {
        method: cell.method,
        family: cell.kernel,
        data,
        centers,
        test,
        params,
        seed,
        report_rmae: false,
    };
    let report: TuneReport = pipeline::run(&req)?;
    Ok(BenchRow {
        function: cell.function,
        points: cell.points,
        kernel: cell.kernel,
        n: cell.n,
        method: cell.method,
        xi: cell.xi,
        centers_pct: cell.fraction.map(|f| 100.0 * f),
        time_s: Some(report.elapsed),
        mae: report.mae_test,
        epsilon_star: report.epsilon_star,
    })
}

/// Runs cells on up to `jobs` threads; results come back in cell order.
fn run_cells(config: &BenchConfig, cells: &[Cell]) -> Vec<Result<BenchRow>> {
    let jobs = config.jobs.clamp(1, cells.len().max(1));
    if jobs == 1 {
        return cells.iter().map(|c| run_cell(config, c)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<BenchRow>>>> =
        Mutex::new((0..cells.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let r = run_cell(config, &cells[i]);
                slots.lock().expect("bench worker panicked")[i] = Some(r);
            });
        }
    });
    slots
        .into_inner()
        .expect("bench worker panicked")
        .into_iter()
        .map(|r| r.expect("every cell runs"))
        .collect()
}

/// Writes rows as CSV; `time_s` is left empty unless `timings` is set.
pub fn write_table<W: Write>(writer: W, rows: &[BenchRow], timings: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        if timings {
            w.serialize(row)?;
        } else {
            w.serialize(BenchRow {
                time_s: None,
                ..row.clone()
            })?;
        }
    }
    w.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}

pub fn read_table<R: std::io::Read>(reader: R) -> Result<Vec<BenchRow>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

fn fmt_opt(v: Option<f64>, f: impl Fn(f64) -> String) -> String {
    v.map(f).unwrap_or_else(|| "–".into())
}

/// A Markdown section per table, with timings and six significant digits.
pub fn render_markdown(tables: &[(String, Vec<BenchRow>)]) -> String {
    let mut out = String::from("# rbftune benchmark results\n");
    for (name, rows) in tables {
        out.push_str(&format!("\n## {name}\n\n"));
        out.push_str(
            "| function | points | kernel | n | method | ξ | centers (%) | time (s) | MAE | ε* |\n",
        );
        out.push_str("|---|---|---|---:|---|---:|---:|---:|---:|---:|\n");
        for r in rows {
            out.push_str(&format!(
                "| {} | {} | {} | {} | {} | {} | {} | {} | {:.5e} | {:.6} |\n",
                r.function,
                r.points,
                r.kernel,
                r.n,
                r.method,
                fmt_opt(r.xi, |x| format!("{x}")),
                fmt_opt(r.centers_pct, |c| format!("{c}")),
                fmt_opt(r.time_s, |t| format!("{t:.5e}")),
                r.mae,
                r.epsilon_star
            ));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutput {
    pub csv_files: Vec<PathBuf>,
    pub markdown: PathBuf,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Runs every table and writes `<name>.csv` into `out_dir` as each table
/// completes, then `results.md`. On a failing cell the tables finished so
/// far (and their Markdown) stay on disk and the error is returned.
pub fn run_bench(
    config: &BenchConfig,
    out_dir: &Path,
    mut progress: impl FnMut(&str),
) -> Result<BenchOutput> {
    config.validate()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let markdown = out_dir.join("results.md");
    let mut done: Vec<(String, Vec<BenchRow>)> = Vec::new();
    let mut csv_files = Vec::new();

    for table in plan(config) {
        progress(&format!("{}: {} runs", table.name, table.len()));
        let mut rows = Vec::with_capacity(table.len());
        let mut failure = None;
        for (cell, r) in table.cells.iter().zip(run_cells(config, &table.cells)) {
            match r {
                Ok(row) => rows.push(row),
                Err(e) => {
                    failure = Some(Error::Config(format!(
                        "{} (f={} points={} kernel={} n={} method={}): {e}",
                        table.name, cell.function, cell.points, cell.kernel, cell.n, cell.method
                    )));
                    break;
                }
            }
        }
        if let Some(e) = failure {
            write_file(&markdown, render_markdown(&done).as_bytes())?;
            return Err(e);
        }
        let path = out_dir.join(format!("{}.csv", table.name));
        let mut buf = Vec::new();
        write_table(&mut buf, &rows, config.csv_timings)?;
        write_file(&path, &buf)?;
        csv_files.push(path);
        done.push((table.name, rows));
    }
    write_file(&markdown, render_markdown(&done).as_bytes())?;
    Ok(BenchOutput {
        csv_files,
        markdown,
    })
}
