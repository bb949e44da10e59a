//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::cluster::{cluster_and_score, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::distances::{build_distance_matrix, MetricKind};
use crate::error::{Error, Result};
use crate::hyperbolicity::{exact_delta, sample_delta, DeltaFormula};
use crate::io::{self, CsvOptions, FileFormat};
use crate::neighbor_joining::nj_scores;
use crate::preprocess::{pca_fit_transform, rescale_to_ball, DEFAULT_BALL_NORM};
use crate::report::{
    write_report, ClusterSection, GeometryReport, InputKind, InputRecord, PcaRecord,
    PreprocessingRecord, RescaleRecord,
};
use crate::synthetic::{self, Synthetic, SyntheticKind, SyntheticSpec};
use crate::types::{DistanceMatrix, EmbeddingSet, MetricTag, Seed};
use crate::ultrametricity::{exact_ultrametricity, sample_ultrametricity};

pub const DEFAULT_SAMPLES: u64 = 100_000;
pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(name = "treelike", version, about = "Tree-likeness of embeddings and distance matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Delta-hyperbolicity, ultrametricity and neighbor-joining statistics.
    Analyze(AnalyzeArgs),
    /// Exact four-point delta over every quadruple (small n).
    ExactDelta(ExactArgs),
    /// Exact ultrametricity over every triple (small n).
    ExactUltra(ExactArgs),
    /// Generate a synthetic space.
    Synth(SynthArgs),
    /// Exact delta of sphere, dense graph and Poincare disk over several seeds.
    CompareSynthetic(CompareArgs),
    /// k-means with silhouette, Calinski-Harabasz and Davies-Bouldin scores.
    Cluster(ClusterArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_from_str::<FileFormat>)]
    pub format: FileFormat,
    /// Input is a precomputed distance matrix rather than embeddings.
    #[arg(long)]
    pub distance_matrix: bool,
    /// Symmetrize a matrix that fails validation instead of rejecting it.
    #[arg(long)]
    pub force: bool,
    /// CSV has a header line.
    #[arg(long)]
    pub header: bool,
    /// First CSV column holds an identifier.
    #[arg(long)]
    pub id_column: bool,
    /// Next CSV column holds a class label.
    #[arg(long)]
    pub label_column: bool,
    /// Zero-pad ragged CSV rows to the longest row.
    #[arg(long)]
    pub pad: bool,
    #[arg(long, default_value = "euclidean", value_parser = parse_from_str::<MetricKind>)]
    pub metric: MetricKind,
    /// Reduce with PCA to this fraction of variance.
    #[arg(long, value_name = "VAR")]
    pub pca: Option<f64>,
    /// Largest row norm after rescaling into the unit ball (Poincare metric).
    #[arg(long, default_value_t = DEFAULT_BALL_NORM)]
    pub ball_norm: f64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Record wall-clock seconds per analysis (makes reports run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Comma-separated subset of delta, ultra, nj.
    #[arg(long, default_value = "delta,ultra,nj")]
    pub analyses: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Enumerate every quadruple and triple instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// four_point or slack.
    #[arg(long, default_value = "four_point", value_parser = parse_from_str::<DeltaFormula>)]
    pub formula: DeltaFormula,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value = "four_point", value_parser = parse_from_str::<DeltaFormula>)]
    pub formula: DeltaFormula,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// sphere, graph, disk, tree or ultra.
    #[arg(value_parser = parse_from_str::<SyntheticKind>)]
    pub kind: SyntheticKind,
    #[arg(long, default_value_t = synthetic::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = synthetic::DEFAULT_SPHERE_DIM)]
    pub dim: usize,
    #[arg(long, default_value_t = synthetic::DEFAULT_EDGE_PROBABILITY)]
    pub p: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = "csv", value_parser = parse_from_str::<FileFormat>)]
    pub format: FileFormat,
    /// Write the distance matrix even for point-cloud kinds.
    #[arg(long)]
    pub matrix: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value_t = synthetic::DEFAULT_N)]
    pub n: usize,
    #[arg(long, default_value_t = synthetic::DEFAULT_SPHERE_DIM)]
    pub dim: usize,
    #[arg(long, default_value_t = synthetic::DEFAULT_EDGE_PROBABILITY)]
    pub p: f64,
    /// Number of consecutive seeds starting at --seed.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Analysis {
    Delta,
    Ultra,
    Nj,
}

fn parse_analyses(s: &str) -> Result<Vec<Analysis>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let a = match part {
            "delta" => Analysis::Delta,
            "ultra" => Analysis::Ultra,
            "nj" => Analysis::Nj,
            other => return Err(Error::InvalidArgument(format!("unknown analysis {other:?}"))),
        };
        if !out.contains(&a) {
            out.push(a);
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no analyses requested".into()));
    }
    Ok(out)
}

/// Data ready for the metrics, with the report skeleton describing how it was obtained.
struct Prepared {
    embeddings: Option<EmbeddingSet>,
    matrix: DistanceMatrix,
    report: GeometryReport,
}

fn prepare(args: &InputArgs) -> Result<Prepared> {
    let path = args.input.display().to_string();
    if args.distance_matrix {
        if args.pca.is_some() {
            return Err(Error::InvalidArgument("--pca applies to embeddings, not distance matrices".into()));
        }
        let loaded = io::load_distance_matrix(&args.input, args.format, args.force)?;
        let input = InputRecord {
            path,
            format: Some(args.format),
            kind: InputKind::DistanceMatrix,
            n: loaded.matrix.n(),
            dim: None,
        };
        let mut report = GeometryReport::new(input, MetricTag::External);
        report.preprocessing.symmetrized = loaded.symmetrized;
        if loaded.symmetrized {
            report.notes.push(format!(
                "input failed validation with {} violation(s); replaced by (D + D^T) / 2",
                loaded.violations.len()
            ));
        }
        return Ok(Prepared { embeddings: None, matrix: loaded.matrix, report });
    }

    let options = CsvOptions {
        header: args.header,
        id_column: args.id_column,
        label_column: args.label_column,
        pad: args.pad,
    };
    let raw = io::load_embeddings(&args.input, args.format, options)?;
    let input = InputRecord {
        path,
        format: Some(args.format),
        kind: InputKind::Embeddings,
        n: raw.n(),
        dim: Some(raw.dim()),
    };
    let mut pre = PreprocessingRecord { pad: args.pad, ..Default::default() };
    let set = match args.pca {
        Some(target) => {
            let (projected, model) = pca_fit_transform(&raw, target)?;
            pre.pca = PcaRecord {
                enabled: true,
                variance_target: Some(target),
                out_dim: Some(model.out_dim()),
                retained_fraction: Some(model.retained_fraction),
            };
            projected
        }
        None => raw,
    };
    let (matrix, embeddings) = match args.metric {
        MetricKind::Euclidean => (build_distance_matrix(&set, MetricKind::Euclidean)?, set),
        MetricKind::Poincare => {
            let (scaled, scalar) = rescale_to_ball(&set, args.ball_norm)?;
            pre.rescale = RescaleRecord {
                enabled: true,
                scalar: Some(scalar),
                target_max_norm: Some(args.ball_norm),
            };
            (build_distance_matrix(&scaled, MetricKind::Poincare)?, scaled)
        }
    };
    let mut report = GeometryReport::new(input, matrix.tag());
    report.preprocessing = pre;
    Ok(Prepared { embeddings: Some(embeddings), matrix, report })
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        None => f(),
        Some(0) => Err(Error::InvalidArgument("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot start {w} workers: {e}")))?
            .install(f),
    }
}

fn emit(report: &GeometryReport, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => write_report(report, path),
        None => {
            print!("{}", report.to_json()?);
            Ok(())
        }
    }
}

struct Clock {
    enabled: bool,
    times: BTreeMap<String, f64>,
}

impl Clock {
    fn time<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f()?;
        if self.enabled {
            self.times.insert(name.to_string(), start.elapsed().as_secs_f64());
        }
        Ok(out)
    }

    fn finish(self, report: &mut GeometryReport) {
        if self.enabled {
            report.timings = Some(self.times);
        }
    }
}

fn slack_note(formula: DeltaFormula, report: &mut GeometryReport) {
    if formula == DeltaFormula::Slack {
        report.notes.push(
            "delta formula 'slack' reports max(0, min([a,b]_w, [b,c]_w) - [a,c]_w) per labelled \
             quadruple, the smallest delta satisfying [a,c]_w >= min([a,b]_w, [b,c]_w) - delta; \
             the opposite sign would be negative for most quadruples"
                .into(),
        );
    }
}

pub fn analyze(args: &AnalyzeArgs) -> Result<GeometryReport> {
    let analyses = parse_analyses(&args.analyses)?;
    let seed = Seed(args.input.seed);
    with_workers(args.input.workers, || {
        let Prepared { matrix, mut report, .. } = prepare(&args.input)?;
        let mut clock = Clock { enabled: args.input.timings, times: BTreeMap::new() };
        for a in &analyses {
            match a {
                Analysis::Delta => {
                    let stats = clock.time("delta", || {
                        if args.exact {
                            exact_delta(&matrix, args.formula)
                        } else {
                            sample_delta(&matrix, args.samples, seed, args.formula)
                        }
                    })?;
                    slack_note(args.formula, &mut report);
                    report.delta = Some(stats);
                }
                Analysis::Ultra => {
                    let stats = clock.time("ultra", || {
                        if args.exact {
                            exact_ultrametricity(&matrix, args.epsilon)
                        } else {
                            sample_ultrametricity(&matrix, args.samples, args.epsilon, seed)
                        }
                    })?;
                    report.ultra = Some(stats);
                }
                Analysis::Nj => {
                    report.nj = Some(clock.time("nj", || Ok(nj_scores(&matrix)))?);
                }
            }
        }
        clock.finish(&mut report);
        Ok(report)
    })
}

pub fn exact_delta_report(args: &ExactArgs) -> Result<GeometryReport> {
    with_workers(args.input.workers, || {
        let Prepared { matrix, mut report, .. } = prepare(&args.input)?;
        let mut clock = Clock { enabled: args.input.timings, times: BTreeMap::new() };
        report.delta = Some(clock.time("delta", || exact_delta(&matrix, args.formula))?);
        slack_note(args.formula, &mut report);
        clock.finish(&mut report);
        Ok(report)
    })
}

pub fn exact_ultra_report(args: &ExactArgs) -> Result<GeometryReport> {
    with_workers(args.input.workers, || {
        let Prepared { matrix, mut report, .. } = prepare(&args.input)?;
        let mut clock = Clock { enabled: args.input.timings, times: BTreeMap::new() };
        report.ultra = Some(clock.time("ultra", || exact_ultrametricity(&matrix, args.epsilon))?);
        clock.finish(&mut report);
        Ok(report)
    })
}

pub fn cluster_report(args: &ClusterArgs) -> Result<GeometryReport> {
    if args.input.distance_matrix {
        return Err(Error::InvalidArgument("cluster needs embeddings, not a distance matrix".into()));
    }
    with_workers(args.input.workers, || {
        let Prepared { embeddings, matrix, mut report } = prepare(&args.input)?;
        let set = embeddings.expect("embedding input");
        let mut clock = Clock { enabled: args.input.timings, times: BTreeMap::new() };
        let result = clock.time("cluster", || {
            cluster_and_score(&set, &matrix, args.k, Seed(args.input.seed), args.max_iter, args.tol)
        })?;
        report.cluster = Some(ClusterSection { kmeans: result, kmodes: None, agglomerative: None });
        clock.finish(&mut report);
        Ok(report)
    })
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let spec = SyntheticSpec { kind: args.kind, n: args.n, dim: args.dim, p: args.p, seed: Seed(args.seed) };
    if args.matrix {
        return io::write_distance_matrix(&spec.distance_matrix()?, &args.out, args.format);
    }
    match spec.generate()? {
        Synthetic::Embeddings(set) => io::write_embeddings(&set, &args.out, args.format),
        Synthetic::Matrix(d) => io::write_distance_matrix(&d, &args.out, args.format),
    }
}

pub fn compare(args: &CompareArgs) -> Result<String> {
    let seeds: Vec<Seed> = (0..args.seeds).map(|i| Seed(args.seed.wrapping_add(i))).collect();
    let table = with_workers(args.workers, || {
        synthetic::compare_synthetic_spaces(args.n, args.dim, args.p, &seeds)
    })?;
    let mut json = serde_json::to_string_pretty(&table)
        .map_err(|e| Error::Format(format!("cannot serialize comparison: {e}")))?;
    json.push('\n');
    Ok(json)
}

pub fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze(args) => emit(&analyze(args)?, args.input.out.as_ref()),
        Command::ExactDelta(args) => emit(&exact_delta_report(args)?, args.input.out.as_ref()),
        Command::ExactUltra(args) => emit(&exact_ultra_report(args)?, args.input.out.as_ref()),
        Command::Cluster(args) => emit(&cluster_report(args)?, args.input.out.as_ref()),
        Command::Synth(args) => synth(args),
        Command::CompareSynthetic(args) => {
            let json = compare(args)?;
            match &args.out {
                Some(path) => std::fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e)),
                None => {
                    print!("{json}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    run(cli)
}
