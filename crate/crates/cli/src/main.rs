use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use zigrips::metric::MetricKind;
use zigrips_cli::commands::{
    self, BenchConfig, CompareCheck, CompareConfig, InputFormat, KChoice, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "zigrips",
    version,
    about = "Approximate Vietoris-Rips persistence via sparse zigzag filtrations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Points,
    Matrix,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Euclidean,
    Manhattan,
    Chebyshev,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Points => InputFormat::Points,
            FormatArg::Matrix => InputFormat::Matrix,
        }
    }
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Euclidean => MetricKind::Euclidean,
            MetricArg::Manhattan => MetricKind::Manhattan,
            MetricArg::Chebyshev => MetricKind::Chebyshev,
        }
    }
}

fn parse_k(value: &str) -> Result<KChoice, String> {
    if value == "auto" {
        Ok(KChoice::Auto)
    } else {
        value
            .parse::<usize>()
            .map(KChoice::Fixed)
            .map_err(|_| format!("expected a count or 'auto', got '{value}'"))
    }
}

#[derive(Args)]
struct PipelineArgs {
    /// Input file with one comma-separated point per line, or a distance
    /// matrix with --format matrix.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Points)]
    format: FormatArg,
    /// Norm for point inputs.
    #[arg(long, value_enum, default_value_t = MetricArg::Euclidean)]
    metric: MetricArg,
    /// Approximation parameter in (0, 1/3).
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Number of points to select, or 'auto' for n^0.727.
    #[arg(long, value_parser = parse_k, default_value = "auto")]
    k: KChoice,
    /// Highest homology dimension to report; simplices are materialized one
    /// dimension higher.
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Index of the first traversal point.
    #[arg(long, default_value_t = 0)]
    start: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl PipelineArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            epsilon: self.epsilon,
            k: self.k,
            max_dim: self.max_dim,
            start: self.start,
            out_dir: self.out.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Farthest-first traversal: emits index,rad,time rows.
    Greedy {
        #[command(flatten)]
        args: PipelineArgs,
        /// Continue a previously saved traversal instead of restarting.
        #[arg(long)]
        extend: Option<PathBuf>,
    },
    /// Sparse zigzag event stream plus the critical-value log.
    Sparsify {
        #[command(flatten)]
        args: PipelineArgs,
    },
    /// Persistence diagram of the sparse pipeline (or the exact one).
    Persist {
        #[command(flatten)]
        args: PipelineArgs,
        /// Run the exact Vietoris-Rips pipeline instead of the sparse one.
        #[arg(long)]
        exact: bool,
        /// Point-count cap for the exact pipeline.
        #[arg(long, default_value_t = 25)]
        exact_cap: usize,
        /// Also write an SVG plot of the diagram.
        #[arg(long)]
        svg: bool,
    },
    /// Compare two diagram files; exits 1 when the requested check fails.
    Compare {
        diagram_a: PathBuf,
        diagram_b: PathBuf,
        /// Offset containment in both directions at this radius.
        #[arg(long, conflicts_with_all = ["multiplicative", "bottleneck"])]
        additive: Option<f64>,
        /// Band matching for the given approximation parameter.
        #[arg(long, conflicts_with = "bottleneck")]
        multiplicative: Option<f64>,
        /// Report the bottleneck distance.
        #[arg(long)]
        bottleneck: bool,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Time the sparse pipeline over seeded random planar clouds.
    Bench {
        /// Strictly ascending point counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        /// Seed for the generated point clouds.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Render a diagram file as an SVG scatter plot.
    Plot {
        diagram: PathBuf,
        #[arg(long, default_value = "diagram.svg")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Greedy { args, extend } => {
            let space = commands::load_space(&args.input, args.format.into(), args.metric.into())?;
            let summary = commands::cmd_greedy(&space, &args.config(), extend.as_deref())?;
            println!(
                "selected {} points, last radius {}, traversal written to {}",
                summary.k,
                summary.last_radius,
                summary.path.display()
            );
            Ok(true)
        }
        Command::Sparsify { args } => {
            let space = commands::load_space(&args.input, args.format.into(), args.metric.into())?;
            let cfg = args.config();
            let s = commands::cmd_sparsify(&space, &cfg)?;
            println!(
                "k = {}, updates = {}, max neighbor set = {}, epsilon = {} (1-2eps = {}, eps(1-2eps) = {})",
                s.k,
                s.updates,
                s.max_neighbor_set,
                cfg.epsilon,
                1.0 - 2.0 * cfg.epsilon,
                zigrips::greedy::time_scale(cfg.epsilon),
            );
            println!(
                "predicted error radius 2 rad(p_k)/(1-2eps) = {}",
                s.predicted_error_radius
            );
            println!(
                "events written to {}, critical values to {}",
                s.events_path.display(),
                s.critical_path.display()
            );
            Ok(true)
        }
        Command::Persist {
            args,
            exact,
            exact_cap,
            svg,
        } => {
            let space = commands::load_space(&args.input, args.format.into(), args.metric.into())?;
            let cfg = args.config();
            let s = commands::cmd_persist(&space, &cfg, exact, exact_cap, svg)?;
            let max_dim = s.diagram.max_dim().unwrap_or(0);
            for dim in 0..=max_dim.max(cfg.max_dim) {
                let total = s.diagram.points_in_dim(dim).count();
                let infinite = s
                    .diagram
                    .points_in_dim(dim)
                    .filter(|p| p.is_infinite())
                    .count();
                println!("H{dim}: {total} points ({infinite} infinite)");
            }
            println!(
                "{} updates, {} zero-length intervals dropped, diagram written to {}",
                s.updates,
                s.dropped_zero_length,
                s.diagram_path.display()
            );
            if let Some(p) = s.svg_path {
                println!("plot written to {}", p.display());
            }
            Ok(true)
        }
        Command::Compare {
            diagram_a,
            diagram_b,
            additive,
            multiplicative,
            bottleneck,
            out,
        } => {
            let check = match (additive, multiplicative, bottleneck) {
                (Some(r), None, false) => CompareCheck::Additive(r),
                (None, Some(eps), false) => CompareCheck::Multiplicative(eps),
                (None, None, true) => CompareCheck::Bottleneck,
                _ => anyhow::bail!(
                    "exactly one of --additive, --multiplicative, --bottleneck is required"
                ),
            };
            let (report, path) = commands::cmd_compare(&CompareConfig {
                diagram_a,
                diagram_b,
                check,
                out_dir: out,
            })?;
            print!("{}", report.to_text());
            println!("report written to {}", path.display());
            Ok(report.passed())
        }
        Command::Bench {
            sizes,
            reps,
            epsilon,
            max_dim,
            seed,
            out,
        } => {
            let outcome = commands::cmd_bench(&BenchConfig {
                sizes,
                reps,
                epsilon,
                max_dim,
                seed,
                out_dir: out,
            })?;
            println!("n,k,u,u/k,greedy_ms,sparsify_ms,persist_ms,total_ms");
            for r in &outcome.rows {
                println!(
                    "{},{},{},{:.1},{:.3},{:.3},{:.3},{:.3}",
                    r.n,
                    r.k,
                    r.updates,
                    r.updates_per_k(),
                    r.greedy_ms,
                    r.sparsify_ms,
                    r.persist_ms,
                    r.total_ms
                );
            }
            match outcome.slope {
                Some(s) => println!("fitted log-log slope of total time: {s:.4}"),
                None => println!("fitted log-log slope of total time: n/a"),
            }
            println!("rows written to {}", outcome.csv_path.display());
            Ok(true)
        }
        Command::Plot { diagram, out } => {
            let path = commands::cmd_plot(&diagram, &out)?;
            println!("plot written to {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
