use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gpd_sparsify::error::{Error, Result};
use gpd_sparsify::geometry::{grid_domain, GridSpec, SampleRange};
use gpd_sparsify::io::{self, AxisMap};
use gpd_sparsify::optim::{optimize, Init, OptimConfig};
use gpd_sparsify::oracle::{run_suite, Suite};
use gpd_sparsify::pipeline::{fit_ranges, histogram_vectorize, time_delay_embed, EMBED_DIM};
use gpd_sparsify::{
    build_loss_graph, dhat, epsilon_matrix, gpd_points, gri, mobius_inversion,
    sparse_erosion_distance, Barcode,
};

#[derive(Parser)]
#[command(
    name = "gpd-sparsify",
    version,
    about = "Sparse interval domains for generalized persistence diagrams"
)]
struct Cli {
    /// Random seed (used by `optimize` and `oracle-check`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "GPD_SPARSIFY_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Domain distance between two domain files.
    Distance(DistanceArgs),
    /// Sparsify a full domain by subgradient descent.
    Optimize(OptimizeArgs),
    /// Diagram of a barcode over a domain, written as CSV.
    Gpd(GpdArgs),
    /// Sparse erosion distance between two (barcode, domain) pairs.
    Sed(SedArgs),
    /// Smoothed histogram features of diagram CSV files.
    Vectorize(VectorizeArgs),
    /// Time-delay embedding of the series in a CSV file.
    Embed(EmbedArgs),
    /// Compare fast computations against brute-force references.
    OracleCheck(OracleArgs),
    /// Write a grid domain.
    Grid(GridArgs),
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    domain_a: PathBuf,
    #[arg(long)]
    domain_b: PathBuf,
    /// Write the pairwise matrix as `r,s,eps` CSV.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Write the active path of the loss graph (rows from A) as DOT.
    #[arg(long)]
    dump_active_path: Option<PathBuf>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    full: PathBuf,
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    momentum: Option<f64>,
    #[arg(long)]
    decay: Option<f64>,
    /// Start from this domain instead of a random subset.
    #[arg(long)]
    init: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct GpdArgs {
    #[arg(long)]
    barcode: PathBuf,
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Rescale the barcode so its bounding box is the unit square.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct SedArgs {
    #[arg(long)]
    barcode_a: PathBuf,
    #[arg(long)]
    domain_a: PathBuf,
    #[arg(long)]
    barcode_b: PathBuf,
    #[arg(long)]
    domain_b: PathBuf,
    /// Rescale each barcode so its bounding box is the unit square.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct VectorizeArgs {
    /// Diagram CSV files; one output row each, on shared axis ranges.
    #[arg(long, num_args = 1.., required = true)]
    gpd: Vec<PathBuf>,
    #[arg(long, default_value_t = 4)]
    bins: usize,
    /// Gaussian width in bins; 0 disables smoothing.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long)]
    series: PathBuf,
    #[arg(long, default_value_t = EMBED_DIM)]
    dim: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    nxy: usize,
    #[arg(long)]
    nsides: usize,
    /// Range of corner coordinates, `lo,hi`.
    #[arg(long, default_value = "0,1", value_parser = parse_range)]
    xy_range: SampleRange,
    /// Range of side lengths, `lo,hi`.
    #[arg(long, default_value = "0.1,0.5", value_parser = parse_range)]
    side_range: SampleRange,
    #[arg(long)]
    out: PathBuf,
}

fn parse_range(s: &str) -> std::result::Result<SampleRange, String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(SampleRange::new(lo, hi))
}

/// Twelve significant digits in positional notation.
fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let decimals = (11 - v.abs().log10().floor() as i64).max(0) as usize;
    format!("{v:.decimals$}")
}

fn barcode(path: &Path, normalize: bool) -> Result<Barcode> {
    let b = io::read_barcode(path)?;
    if normalize && !b.bars().is_empty() {
        AxisMap::for_barcode(&b)?.barcode(&b)
    } else {
        Ok(b)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Distance(a) => {
            let da = io::read_domain(&a.domain_a)?;
            let db = io::read_domain(&a.domain_b)?;
            println!("{}", sig12(dhat(&da, &db)?));
            if let Some(path) = &a.matrix {
                io::write_matrix(path, &epsilon_matrix(&da, &db)?)?;
            }
            if let Some(path) = &a.dump_active_path {
                let graph = build_loss_graph(&da, db.len())?;
                let dot = graph.active_path_dot(&db.to_vector()?)?;
                fs::write(path, dot)?;
            }
        }
        Command::Optimize(a) => {
            let full = io::read_domain(&a.full)?;
            let mut cfg = match &a.config {
                Some(p) => serde_json::from_slice(&fs::read(p)?)?,
                None => OptimConfig::default(),
            };
            if let Some(v) = a.m {
                cfg.m = v;
            }
            if let Some(v) = a.epochs {
                cfg.epochs = v;
            }
            if let Some(v) = a.lr {
                cfg.learning_rate = v;
            }
            if let Some(v) = a.momentum {
                cfg.momentum = v;
            }
            if let Some(v) = a.decay {
                cfg.lr_decay = v;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(p) = &a.init {
                let start = io::read_domain(p)?;
                cfg.m = start.len();
                cfg.init = Init::Explicit {
                    coords: start.to_vector()?.coords().to_vec(),
                };
            }
            let res = optimize(&full, &cfg)?;
            io::write_domain(&a.out, &res.domain)?;
            if let Some(p) = &a.trace {
                io::write_trace(p, &res.trace)?;
            }
            println!("{}", sig12(res.best_loss));
            eprintln!(
                "initial loss {}, best loss {} at epoch {}",
                sig12(res.trace.losses[0]),
                sig12(res.best_loss),
                res.best_epoch
            );
        }
        Command::Gpd(a) => {
            let module = barcode(&a.barcode, a.normalize)?;
            let domain = io::read_domain(&a.domain)?;
            let dgm = mobius_inversion(&gri(&module, &domain)?)?;
            let cloud = gpd_points(&dgm)?;
            io::write_gpd(&a.out, &cloud)?;
            eprintln!(
                "{} nonzero entries over {} intervals ({} duplicates merged)",
                cloud.points.len(),
                dgm.domain().len(),
                dgm.merged_duplicates()
            );
        }
        Command::Sed(a) => {
            let ma = barcode(&a.barcode_a, a.normalize)?;
            let mb = barcode(&a.barcode_b, a.normalize)?;
            let da = io::read_domain(&a.domain_a)?;
            let db = io::read_domain(&a.domain_b)?;
            println!("{}", sig12(sparse_erosion_distance(&ma, &da, &mb, &db)?));
        }
        Command::Vectorize(a) => {
            if a.bins == 0 {
                return Err(Error::InvalidConfig("--bins must be >= 1".into()));
            }
            let clouds = a.gpd.iter().map(io::read_gpd).collect::<Result<Vec<_>>>()?;
            let ranges = fit_ranges(&clouds);
            let mut out = csv::Writer::from_path(&a.out)?;
            for (path, cloud) in a.gpd.iter().zip(&clouds) {
                let h = histogram_vectorize(cloud, [a.bins; 6], ranges, a.sigma)?;
                let mut row = vec![path.display().to_string()];
                row.extend(h.counts.iter().map(f64::to_string));
                out.write_record(&row)?;
            }
            out.flush()?;
        }
        Command::Embed(a) => {
            let series = io::read_time_series(&a.series)?;
            let mut out = csv::Writer::from_path(&a.out)?;
            let mut header = vec!["label".to_string(), "index".to_string()];
            header.extend((0..a.dim).map(|k| format!("v{k}")));
            out.write_record(&header)?;
            for s in &series {
                for (k, p) in time_delay_embed(&s.samples, a.dim)?.iter().enumerate() {
                    let mut row = vec![s.label.clone(), k.to_string()];
                    row.extend(p.iter().map(f64::to_string));
                    out.write_record(&row)?;
                }
            }
            out.flush()?;
        }
        Command::OracleCheck(a) => {
            let suite: Suite = a.suite.parse()?;
            let records = run_suite(suite, a.cases, seed)?;
            if let Some(path) = &a.report {
                let mut out = csv::Writer::from_path(path)?;
                out.write_record(["suite", "case", "computed", "oracle", "tolerance", "pass"])?;
                for r in &records {
                    out.write_record([
                        suite.to_string(),
                        r.case.to_string(),
                        r.computed.to_string(),
                        r.oracle.to_string(),
                        r.tolerance.to_string(),
                        r.pass.to_string(),
                    ])?;
                }
                out.flush()?;
            }
            let passed = records.iter().filter(|r| r.pass).count();
            println!("{suite}: {passed}/{} agree", records.len());
            if passed != records.len() {
                return Ok(ExitCode::from(4));
            }
        }
        Command::Grid(a) => {
            let spec = GridSpec {
                x: a.xy_range,
                y: a.xy_range,
                sides: [a.side_range; 4],
                n_xy: a.nxy,
                n_sides: a.nsides,
            };
            let domain = grid_domain(&spec)?;
            io::write_domain(&a.out, &domain)?;
            eprintln!("{} intervals", domain.len());
        }
    }
    std::io::stdout().flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
