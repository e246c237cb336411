//! The pipeline commands: ingest, traverse, sparsify, solve, compare,
//! benchmark, plot. Each command writes its artifacts under the configured
//! output directory and returns a summary for the caller to print.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};

use zigrips::complex::{sparse_zigzag_events, vr_filtration_events, ZigzagEventStream};
use zigrips::diagram::ComparisonReport;
use zigrips::greedy::{farthest_first, farthest_first_extend, schedule, GreedyPermutation};
use zigrips::metric::{parse_matrix, parse_points, FiniteMetricSpace, MetricKind};
use zigrips::persistence::{reduce_standard, zigzag_persistence, PersistenceDiagram};
use zigrips::sparse::{critical_events, neighbor_set_sizes, CriticalKind};
use zigrips::textio;

use crate::plot::render_svg;
use crate::synth::uniform_square;

/// How many selected points to take: the balancing exponent keeps the whole
/// pipeline subquadratic, so `auto` is `ceil(n^0.727)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

impl KChoice {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KChoice::Auto => ((n as f64).powf(0.727).ceil() as usize).clamp(1, n),
            KChoice::Fixed(k) => k,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub epsilon: f64,
    pub k: KChoice,
    pub max_dim: usize,
    pub start: usize,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            epsilon: 0.1,
            k: KChoice::Auto,
            max_dim: 1,
            start: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Points,
    Matrix,
}

/// Reads a space from a point or matrix file.
pub fn load_space(
    path: &Path,
    format: InputFormat,
    metric: MetricKind,
) -> Result<FiniteMetricSpace> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    let space = match format {
        InputFormat::Points => FiniteMetricSpace::from_points(parse_points(&text, metric)?),
        InputFormat::Matrix => parse_matrix(&text)?,
    };
    Ok(space)
}

fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn traversal_csv(perm: &GreedyPermutation, epsilon: f64) -> String {
    let scale = zigrips::greedy::time_scale(epsilon);
    let mut out = String::from("index,rad,time\n");
    for (pos, &point) in perm.order.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{}\n",
            point,
            textio::format_f64(perm.rad[pos]),
            textio::format_f64(perm.rad[pos] / scale)
        ));
    }
    out
}

fn parse_traversal_order(text: &str) -> Result<Vec<usize>> {
    let mut order = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("index,") || line.starts_with('#') {
            continue;
        }
        let first = line
            .split(',')
            .next()
            .with_context(|| format!("line {}: empty row", lineno + 1))?;
        order.push(
            first
                .trim()
                .parse::<usize>()
                .with_context(|| format!("line {}: bad index '{first}'", lineno + 1))?,
        );
    }
    if order.is_empty() {
        bail!("saved traversal contains no rows");
    }
    Ok(order)
}

#[derive(Debug)]
pub struct GreedySummary {
    pub k: usize,
    pub last_radius: f64,
    pub path: PathBuf,
}

/// Farthest-first traversal, optionally continuing a saved one, written as
/// `index,rad,time` rows.
pub fn cmd_greedy(
    space: &FiniteMetricSpace,
    cfg: &RunConfig,
    extend_from: Option<&Path>,
) -> Result<GreedySummary> {
    let k = cfg.k.resolve(space.len());
    let perm = match extend_from {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read saved traversal {}", path.display()))?;
            let order = parse_traversal_order(&text)?;
            farthest_first_extend(space, &order, k)?
        }
        None => farthest_first(space, k, cfg.start)?,
    };
    // Reject out-of-range epsilon now rather than in a later stage.
    schedule(&perm, cfg.epsilon)?;
    ensure_out_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("traversal.csv");
    fs::write(&path, traversal_csv(&perm, cfg.epsilon))?;
    Ok(GreedySummary {
        k,
        last_radius: *perm.rad.last().expect("k >= 1"),
        path,
    })
}

fn critical_csv(events: &[zigrips::sparse::CriticalEvent], perm: &GreedyPermutation) -> String {
    let mut out = String::from("alpha,kind,i,j\n");
    for e in events {
        match e.kind {
            CriticalKind::EdgeInsertion { later, earlier } => {
                out.push_str(&format!(
                    "{},EDGE,{},{}\n",
                    textio::format_f64(e.alpha),
                    perm.order[later],
                    perm.order[earlier]
                ));
            }
            CriticalKind::VertexDeletion { pos } => {
                out.push_str(&format!(
                    "{},DEL,{}\n",
                    textio::format_f64(e.alpha),
                    perm.order[pos]
                ));
            }
        }
    }
    out
}

#[derive(Debug)]
pub struct SparsifySummary {
    pub k: usize,
    pub updates: usize,
    pub max_neighbor_set: usize,
    pub predicted_error_radius: f64,
    pub events_path: PathBuf,
    pub critical_path: PathBuf,
}

/// Builds the sparse zigzag event stream, writing both the single-simplex
/// stream and the critical-value log, and reports the update count together
/// with the predicted approximation radius `2 rad(p_k) / (1 - 2 eps)`.
pub fn cmd_sparsify(space: &FiniteMetricSpace, cfg: &RunConfig) -> Result<SparsifySummary> {
    let k = cfg.k.resolve(space.len());
    let perm = farthest_first(space, k, cfg.start)?;
    let sched = schedule(&perm, cfg.epsilon)?;
    let crit = critical_events(space, &perm, &sched);
    let stream = sparse_zigzag_events(space, &perm, &sched, cfg.max_dim);
    ensure_out_dir(&cfg.out_dir)?;
    let events_path = cfg.out_dir.join("events.csv");
    fs::write(&events_path, stream.to_csv())?;
    let critical_path = cfg.out_dir.join("critical.csv");
    fs::write(&critical_path, critical_csv(&crit, &perm))?;
    let max_neighbor_set = neighbor_set_sizes(&crit, k).into_iter().max().unwrap_or(0);
    let last_radius = *perm.rad.last().expect("k >= 1");
    Ok(SparsifySummary {
        k,
        updates: stream.len(),
        max_neighbor_set,
        predicted_error_radius: 2.0 * last_radius / (1.0 - 2.0 * cfg.epsilon),
        events_path,
        critical_path,
    })
}

#[derive(Debug)]
pub struct PersistSummary {
    pub diagram: PersistenceDiagram,
    pub updates: usize,
    pub dropped_zero_length: usize,
    pub diagram_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

/// Runs the full sparse pipeline (traversal, event stream, zigzag solver),
/// or the exact pipeline (full Rips filtration, standard reduction) when
/// `exact` is set, and writes the diagram.
pub fn cmd_persist(
    space: &FiniteMetricSpace,
    cfg: &RunConfig,
    exact: bool,
    exact_cap: usize,
    svg: bool,
) -> Result<PersistSummary> {
    let (intervals, updates) = if exact {
        let stream = vr_filtration_events(space, cfg.max_dim + 1, exact_cap)?;
        let updates = stream.len();
        (reduce_standard(&stream, cfg.max_dim)?, updates)
    } else {
        let k = cfg.k.resolve(space.len());
        let perm = farthest_first(space, k, cfg.start)?;
        let sched = schedule(&perm, cfg.epsilon)?;
        let stream = sparse_zigzag_events(space, &perm, &sched, cfg.max_dim);
        let updates = stream.len();
        (zigzag_persistence(&stream, cfg.max_dim)?, updates)
    };
    let (diagram, dropped) = PersistenceDiagram::from_intervals_verbose(&intervals);
    ensure_out_dir(&cfg.out_dir)?;
    let diagram_path = cfg.out_dir.join("diagram.csv");
    fs::write(&diagram_path, diagram.to_csv())?;
    let svg_path = if svg {
        let p = cfg.out_dir.join("diagram.svg");
        fs::write(&p, render_svg(&diagram))?;
        Some(p)
    } else {
        None
    };
    Ok(PersistSummary {
        diagram,
        updates,
        dropped_zero_length: dropped,
        diagram_path,
        svg_path,
    })
}

#[derive(Debug, Clone, Copy)]
pub enum CompareCheck {
    Additive(f64),
    Multiplicative(f64),
    Bottleneck,
}

#[derive(Debug)]
pub struct CompareConfig {
    pub diagram_a: PathBuf,
    pub diagram_b: PathBuf,
    pub check: CompareCheck,
    pub out_dir: PathBuf,
}

/// Compares two diagram files with the requested check; the report carries
/// a pass flag per line.
pub fn cmd_compare(cfg: &CompareConfig) -> Result<(ComparisonReport, PathBuf)> {
    let read = |path: &Path| -> Result<PersistenceDiagram> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read diagram {}", path.display()))?;
        Ok(PersistenceDiagram::from_csv(&text)?)
    };
    let a = read(&cfg.diagram_a)?;
    let b = read(&cfg.diagram_b)?;
    let report = match cfg.check {
        CompareCheck::Additive(r) => ComparisonReport::additive(&a, &b, r),
        CompareCheck::Multiplicative(eps) => {
            if !(eps > 0.0 && eps < 1.0 / 3.0) {
                bail!("epsilon = {eps} outside the open interval (0, 1/3)");
            }
            ComparisonReport::multiplicative(&a, &b, eps)
        }
        CompareCheck::Bottleneck => ComparisonReport::bottleneck(&a, &b),
    };
    ensure_out_dir(&cfg.out_dir)?;
    let path = cfg.out_dir.join("report.txt");
    let mut text = report.to_text();
    text.push('\n');
    text.push_str(&report.to_csv_block());
    fs::write(&path, text)?;
    Ok((report, path))
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub epsilon: f64,
    pub max_dim: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub updates: usize,
    pub max_neighbor_set: usize,
    pub greedy_ms: f64,
    pub sparsify_ms: f64,
    pub persist_ms: f64,
    pub total_ms: f64,
}

impl BenchRow {
    pub fn updates_per_k(&self) -> f64 {
        self.updates as f64 / self.k as f64
    }
}

#[derive(Debug)]
pub struct BenchOutcome {
    pub rows: Vec<BenchRow>,
    /// Least-squares slope of log total time against log n; `None` for a
    /// single size.
    pub slope: Option<f64>,
    pub csv_path: PathBuf,
}

/// Runs the sparse pipeline on seeded uniform planar clouds of the given
/// sizes with `k = auto`, timing each stage with a monotonic clock.
pub fn cmd_bench(cfg: &BenchConfig) -> Result<BenchOutcome> {
    if cfg.sizes.is_empty() {
        bail!("no sizes given");
    }
    if cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        bail!("sizes must be strictly ascending");
    }
    if cfg.reps == 0 {
        bail!("reps must be positive");
    }
    let mut rows = Vec::new();
    for &n in &cfg.sizes {
        let mut greedy_ms = 0.0;
        let mut sparsify_ms = 0.0;
        let mut persist_ms = 0.0;
        let mut updates = 0usize;
        let mut k = 0usize;
        let mut max_neighbor_set = 0usize;
        for rep in 0..cfg.reps {
            let seed = cfg
                .seed
                .wrapping_add(n as u64)
                .wrapping_add((rep as u64) << 32);
            let cloud = uniform_square(n, seed);
            let space = FiniteMetricSpace::from_points(cloud);
            k = KChoice::Auto.resolve(n);

            let t = Instant::now();
            let perm = farthest_first(&space, k, 0)?;
            greedy_ms += t.elapsed().as_secs_f64() * 1e3;

            let sched = schedule(&perm, cfg.epsilon)?;
            let t = Instant::now();
            let crit = critical_events(&space, &perm, &sched);
            let stream = sparse_zigzag_events(&space, &perm, &sched, cfg.max_dim);
            sparsify_ms += t.elapsed().as_secs_f64() * 1e3;

            let t = Instant::now();
            let intervals = zigzag_persistence(&stream, cfg.max_dim)?;
            persist_ms += t.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(&intervals);

            if rep == 0 {
                updates = stream.len();
                max_neighbor_set = neighbor_set_sizes(&crit, k).into_iter().max().unwrap_or(0);
            }
        }
        let reps = cfg.reps as f64;
        let (greedy_ms, sparsify_ms, persist_ms) =
            (greedy_ms / reps, sparsify_ms / reps, persist_ms / reps);
        rows.push(BenchRow {
            n,
            k,
            updates,
            max_neighbor_set,
            greedy_ms,
            sparsify_ms,
            persist_ms,
            total_ms: greedy_ms + sparsify_ms + persist_ms,
        });
    }
    let slope = fit_loglog_slope(
        &rows
            .iter()
            .map(|r| (r.n as f64, r.total_ms))
            .collect::<Vec<_>>(),
    );
    ensure_out_dir(&cfg.out_dir)?;
    let csv_path = cfg.out_dir.join("bench.csv");
    let mut csv =
        String::from("n,k,u,u_over_k,max_neighbor_set,greedy_ms,sparsify_ms,persist_ms,total_ms\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:.3},{},{:.3},{:.3},{:.3},{:.3}\n",
            r.n,
            r.k,
            r.updates,
            r.updates_per_k(),
            r.max_neighbor_set,
            r.greedy_ms,
            r.sparsify_ms,
            r.persist_ms,
            r.total_ms
        ));
    }
    csv.push_str(&format!(
        "# fitted log-log slope of total time: {}\n",
        slope.map_or("n/a".to_string(), |s| format!("{s:.4}"))
    ));
    fs::write(&csv_path, csv)?;
    Ok(BenchOutcome {
        rows,
        slope,
        csv_path,
    })
}

/// Least-squares slope of `ln y` against `ln x`; `None` with fewer than two
/// points.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Renders a diagram file as an SVG scatter plot.
pub fn cmd_plot(diagram_path: &Path, out_file: &Path) -> Result<PathBuf> {
    let text = fs::read_to_string(diagram_path)
        .with_context(|| format!("cannot read diagram {}", diagram_path.display()))?;
    let diagram = PersistenceDiagram::from_csv(&text)?;
    if let Some(parent) = out_file.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(out_file, render_svg(&diagram))?;
    Ok(out_file.to_path_buf())
}

/// Replays the persist pipeline on an event-stream file; used to check that
/// the CLI adds nothing on top of the library composition.
pub fn solve_stream_file(path: &Path, max_dim: usize) -> Result<PersistenceDiagram> {
    let text = fs::read_to_string(path)?;
    let stream = ZigzagEventStream::from_csv(&text)?;
    Ok(PersistenceDiagram::from_intervals(&zigzag_persistence(
        &stream, max_dim,
    )?))
}
