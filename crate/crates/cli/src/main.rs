//! `nls`: segment points drawn from a union of subspaces, generate synthetic
//! scenes, score labelings, and batch-benchmark track directories.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 algorithmic
//! degeneracy. Timings go to standard error only, so output files are
//! byte-identical across reruns with identical flags.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use nls_cli::error::{CliError, Result};
use nls_cli::formats;
use nls_cli::report::{
    to_json_string, AggregateSection, BenchConfigReport, BenchReport, NeighborSweepReport,
    ReferenceCheck, ReferenceTargets, SequenceReport, SweepSection, TargetCheck,
    ThresholdSweepReport,
};
use nls_core::datagen::{
    random_motion_scene, sample_union, synth_affine_motion, trajectory_matrix, MotionSceneSpec,
    UnionSpec,
};
use nls_core::eval::{
    aggregate, format_percent, misclassification_rate, sweep_neighbors, sweep_threshold, Group,
    SequenceResult,
};
use nls_core::{segment, Labeling, Matrix, NlsConfig, RankMode};

/// Threshold factors benchmarked by `--sweep-threshold`.
const SWEEP_FACTORS: [f64; 7] = [0.8, 0.9, 0.95, 1.0, 1.05, 1.1, 1.2];
/// Neighbor counts benchmarked by `--sweep-k`.
const SWEEP_KS: [usize; 3] = [3, 4, 5];

#[derive(Parser)]
#[command(name = "nls", version, about = "Subspace segmentation by nearness to local subspaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic ground-truthed data.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
    /// Segment a matrix or tracks file.
    Segment(SegmentArgs),
    /// Score a predicted labeling against ground truth.
    Eval(EvalArgs),
    /// Segment every sequence in a directory and aggregate the errors.
    Bench(BenchArgs),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Points from a union of random subspaces -> points.csv + points.labels.
    Union(SynthUnionArgs),
    /// Rigid-motion feature tracks -> seq.tracks + seq.labels + seq.meta.
    Motion(SynthMotionArgs),
}

#[derive(Args)]
struct SynthUnionArgs {
    /// Ambient dimension.
    #[arg(long, default_value_t = 30)]
    ambient: usize,
    /// Dimension of every subspace.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Number of subspaces.
    #[arg(long, default_value_t = 2)]
    subspaces: usize,
    /// Points per subspace.
    #[arg(long, default_value_t = 40)]
    points: usize,
    /// Noise standard deviation per coordinate.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Smallest allowed pairwise principal angle, in degrees (90 = exactly
    /// orthogonal subspaces).
    #[arg(long)]
    min_angle_deg: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthMotionArgs {
    /// Number of frames.
    #[arg(long, default_value_t = 30)]
    frames: usize,
    /// Independently moving rigid objects.
    #[arg(long, default_value_t = 2)]
    objects: usize,
    /// Tracked points per object.
    #[arg(long, default_value_t = 20)]
    points: usize,
    /// Noise standard deviation per image coordinate.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SegmentArgs {
    /// Input file: a matrix (.csv) or feature tracks (.tracks).
    input: PathBuf,
    /// Local subspace dimension d.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Number of clusters n.
    #[arg(long)]
    clusters: usize,
    /// Neighbors per point k (k >= d - 1).
    #[arg(long, default_value_t = 3)]
    neighbors: usize,
    /// Working rank: "auto" for data-driven estimation, or a number.
    #[arg(long, default_value = "auto", value_parser = parse_rank)]
    rank: RankArg,
    /// Rank-penalty constant for auto rank estimation.
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// The p of the p-norm used for normalization and distances.
    #[arg(long, default_value_t = 2.0)]
    norm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the labels; prints to stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Where to write the JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted labels, one per line.
    #[arg(long)]
    pred: PathBuf,
    /// True labels, one per line.
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of sequences (*.tracks with optional .labels and .meta).
    dir: PathBuf,
    /// Restrict to sequences with this many motions: "2", "3", or "all".
    #[arg(long, default_value = "all", value_parser = parse_motion_filter)]
    motions: MotionFilter,
    /// Local subspace dimension d.
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Neighbors per point k.
    #[arg(long, default_value_t = 3)]
    neighbors: usize,
    /// Working rank: "per-motion" (4 per motion), "auto", or a number.
    #[arg(long, default_value = "per-motion", value_parser = parse_bench_rank)]
    rank: BenchRankArg,
    /// Rank-penalty constant for auto rank estimation.
    #[arg(long, default_value_t = 0.1)]
    kappa: f64,
    /// The p of the p-norm used for normalization and distances.
    #[arg(long, default_value_t = 2.0)]
    norm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the JSON benchmark report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Rerun each sequence across threshold factors.
    #[arg(long)]
    sweep_threshold: bool,
    /// Rerun each sequence across neighbor counts.
    #[arg(long)]
    sweep_k: bool,
    /// Compare aggregate errors against the published reference targets.
    #[arg(long)]
    check_reference: bool,
}

#[derive(Debug, Clone, Copy)]
enum RankArg {
    Auto,
    Fixed(usize),
}

fn parse_rank(s: &str) -> std::result::Result<RankArg, String> {
    if s == "auto" {
        return Ok(RankArg::Auto);
    }
    s.parse::<usize>()
        .map(RankArg::Fixed)
        .map_err(|_| format!("expected 'auto' or a positive integer, got '{s}'"))
}

#[derive(Debug, Clone, Copy)]
enum BenchRankArg {
    PerMotion,
    Auto,
    Fixed(usize),
}

fn parse_bench_rank(s: &str) -> std::result::Result<BenchRankArg, String> {
    match s {
        "per-motion" => Ok(BenchRankArg::PerMotion),
        "auto" => Ok(BenchRankArg::Auto),
        other => other
            .parse::<usize>()
            .map(BenchRankArg::Fixed)
            .map_err(|_| format!("expected 'per-motion', 'auto', or an integer, got '{other}'")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum MotionFilter {
    Two,
    Three,
    All,
}

fn parse_motion_filter(s: &str) -> std::result::Result<MotionFilter, String> {
    match s {
        "2" => Ok(MotionFilter::Two),
        "3" => Ok(MotionFilter::Three),
        "all" => Ok(MotionFilter::All),
        other => Err(format!("expected '2', '3', or 'all', got '{other}'")),
    }
}

impl MotionFilter {
    fn admits(self, motions: usize) -> bool {
        match self {
            MotionFilter::Two => motions == 2,
            MotionFilter::Three => motions == 3,
            MotionFilter::All => true,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            MotionFilter::Two => "2",
            MotionFilter::Three => "3",
            MotionFilter::All => "all",
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            eprint!("{err}");
            std::process::exit(1);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { what: SynthCommand::Union(args) } => synth_union(args),
        Command::Synth { what: SynthCommand::Motion(args) } => synth_motion(args),
        Command::Segment(args) => run_segment(args),
        Command::Eval(args) => run_eval(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

fn synth_union(args: SynthUnionArgs) -> Result<()> {
    let spec = UnionSpec {
        ambient_dim: args.ambient,
        subspace_dim: args.dim,
        num_subspaces: args.subspaces,
        points_per_subspace: vec![args.points; args.subspaces],
        noise_sigma: args.noise,
        min_principal_angle: args.min_angle_deg.map(f64::to_radians),
        seed: args.seed,
    };
    let (w, labels) = sample_union(&spec)?;
    create_out_dir(&args.out)?;
    formats::write_matrix(&args.out.join("points.csv"), &w)?;
    formats::write_labels(&args.out.join("points.labels"), &labels)?;
    eprintln!(
        "wrote {} points in ambient dimension {} to {}",
        w.cols(),
        w.rows(),
        args.out.display()
    );
    Ok(())
}

fn synth_motion(args: SynthMotionArgs) -> Result<()> {
    let spec = MotionSceneSpec {
        frames: args.frames,
        num_objects: args.objects,
        points_per_object: args.points,
        seed: args.seed,
    };
    let (objects, camera) = random_motion_scene(&spec)?;
    let tracks = synth_affine_motion(args.frames, &objects, &camera, args.noise, args.seed)?;
    create_out_dir(&args.out)?;
    formats::write_tracks(&args.out.join("seq.tracks"), &tracks)?;
    std::fs::write(
        args.out.join("seq.meta"),
        format!("group=synthetic\nmotions={}\n", args.objects),
    )
    .map_err(|e| CliError::Data(format!("{}: {e}", args.out.display())))?;
    eprintln!(
        "wrote {} tracks over {} frames to {}",
        tracks.num_tracks(),
        tracks.num_frames,
        args.out.display()
    );
    Ok(())
}

fn build_config(
    dim: usize,
    clusters: usize,
    neighbors: usize,
    rank: RankArg,
    kappa: f64,
    norm: f64,
    seed: u64,
) -> NlsConfig {
    let mut cfg = NlsConfig::new(dim, clusters);
    cfg.neighbors = neighbors;
    cfg.norm_p = norm;
    cfg.seed = seed;
    cfg.rank_mode = match rank {
        RankArg::Auto => RankMode::Estimate { kappa },
        RankArg::Fixed(r) => RankMode::Known(r),
    };
    cfg
}

/// Heuristic dataset grouping by sequence name, used when no `.meta` file
/// overrides it: traffic and articulated sequences of the standard motion
/// benchmark follow recognizable naming stems; everything else is assumed
/// to be a checkerboard sequence.
fn infer_group(name: &str) -> Group {
    let lower = name.to_lowercase();
    const TRAFFIC: [&str; 3] = ["cars", "truck", "kanatani"];
    const ARTICULATED: [&str; 5] = ["arm", "articulated", "head", "people", "two_cranes"];
    if TRAFFIC.iter().any(|p| lower.starts_with(p)) {
        Group::Traffic
    } else if ARTICULATED.iter().any(|p| lower.starts_with(p)) {
        Group::Articulated
    } else if lower.starts_with("synth") || lower.starts_with("seq") {
        Group::Synthetic
    } else {
        Group::Checker
    }
}

fn sequence_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

/// Loads a segmentation input: a tracks file (stacked into the 2F x N
/// measurement matrix) or a matrix file. Ground truth comes from the
/// companion `.labels` file when one exists.
fn load_input(path: &Path) -> Result<(Matrix, Option<Labeling>)> {
    if path.extension().is_some_and(|e| e == "tracks") {
        let tracks = formats::load_tracks(path)?;
        let w = trajectory_matrix(&tracks)?;
        return Ok((w, tracks.labels));
    }
    let w = formats::read_matrix(path)?;
    let labels_path = path.with_extension("labels");
    let truth = if labels_path.exists() {
        let labels = formats::read_labels(&labels_path)?;
        if labels.len() != w.cols() {
            return Err(CliError::Data(format!(
                "{}: {} labels for {} points",
                labels_path.display(),
                labels.len(),
                w.cols()
            )));
        }
        Some(labels)
    } else {
        None
    };
    Ok((w, truth))
}

fn run_segment(args: SegmentArgs) -> Result<()> {
    let started = Instant::now();
    let (w, truth) = load_input(&args.input)?;
    let cfg = build_config(
        args.dim,
        args.clusters,
        args.neighbors,
        args.rank,
        args.kappa,
        args.norm,
        args.seed,
    );
    let (labels, diagnostics) = segment(&w, &cfg)?;
    let error = match &truth {
        Some(truth) => Some(misclassification_rate(&labels, truth)?),
        None => None,
    };

    match &args.out {
        Some(path) => formats::write_labels(path, &labels)?,
        None => {
            for label in &labels {
                println!("{label}");
            }
        }
    }

    if let Some(report_path) = &args.report {
        let name = sequence_stem(&args.input);
        let meta = formats::load_meta(&args.input.with_extension("meta"))?;
        let group = match &meta.group {
            Some(name) => Group::parse(name)?,
            None => infer_group(&name),
        };
        let report = SequenceReport {
            sequence: name,
            group: group.as_str().to_string(),
            motions: args.clusters,
            error,
            r: diagnostics.rank,
            t_d: diagnostics.threshold_index,
            eta: diagnostics.eta,
            seed: args.seed,
        };
        std::fs::write(report_path, to_json_string(&report))
            .map_err(|e| CliError::Data(format!("{}: {e}", report_path.display())))?;
    }

    eprintln!(
        "segmented {} points (rank {}) in {:.3} s",
        w.cols(),
        diagnostics.rank,
        started.elapsed().as_secs_f64()
    );
    if let Some(error) = error {
        eprintln!("misclassification vs. ground truth: {}", format_percent(error));
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<()> {
    let pred = formats::read_labels(&args.pred)?;
    let truth = formats::read_labels(&args.truth)?;
    let rate = misclassification_rate(&pred, &truth)?;
    println!("{}", format_percent(rate));
    Ok(())
}

struct SequenceJob {
    name: String,
    group: Group,
    motions: usize,
    w: Matrix,
    truth: Option<Labeling>,
}

struct SequenceOutcome {
    report: SequenceReport,
    scored: Option<SequenceResult>,
    threshold_sweep: Option<Vec<nls_core::eval::ThresholdSweepPoint>>,
    neighbor_sweep: Option<Vec<nls_core::eval::NeighborSweepPoint>>,
}

fn worker_count(jobs: usize) -> Result<usize> {
    let requested = match std::env::var("NLS_THREADS") {
        Err(_) => 0,
        Ok(text) => text.parse::<usize>().map_err(|_| {
            CliError::Usage(format!("NLS_THREADS must be a non-negative integer, got '{text}'"))
        })?,
    };
    let auto = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let count = if requested == 0 { auto } else { requested };
    Ok(count.max(1).min(jobs.max(1)))
}

fn collect_jobs(args: &BenchArgs) -> Result<Vec<SequenceJob>> {
    let entries = std::fs::read_dir(&args.dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", args.dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "tracks"))
        .collect();
    paths.sort();

    let mut jobs = Vec::new();
    for path in paths {
        let name = sequence_stem(&path);
        let tracks = formats::load_tracks(&path)?;
        let meta = formats::load_meta(&path.with_extension("meta"))?;
        let motions = match meta.motions {
            Some(m) => m,
            None => match &tracks.labels {
                Some(labels) => labels.iter().collect::<BTreeSet<_>>().len(),
                None => {
                    eprintln!(
                        "skipping {name}: no .labels or .meta to determine the motion count"
                    );
                    continue;
                }
            },
        };
        if !args.motions.admits(motions) {
            continue;
        }
        let group = match &meta.group {
            Some(text) => Group::parse(text)?,
            None => infer_group(&name),
        };
        let w = trajectory_matrix(&tracks)?;
        jobs.push(SequenceJob { name, group, motions, w, truth: tracks.labels });
    }
    Ok(jobs)
}

fn process_sequence(job: &SequenceJob, args: &BenchArgs) -> Result<SequenceOutcome> {
    let rank = match args.rank {
        BenchRankArg::PerMotion => RankArg::Fixed(4 * job.motions),
        BenchRankArg::Auto => RankArg::Auto,
        BenchRankArg::Fixed(r) => RankArg::Fixed(r),
    };
    let cfg = build_config(
        args.dim,
        job.motions,
        args.neighbors,
        rank,
        args.kappa,
        args.norm,
        args.seed,
    );
    let started = Instant::now();
    let (labels, diagnostics) = segment(&job.w, &cfg)?;
    let error = match &job.truth {
        Some(truth) => Some(misclassification_rate(&labels, truth)?),
        None => None,
    };
    let scored = match error {
        Some(rate) => Some(SequenceResult::new(job.name.clone(), job.group, job.motions, rate)?),
        None => None,
    };

    let threshold_sweep = match (&job.truth, args.sweep_threshold) {
        (Some(truth), true) => Some(sweep_threshold(&job.w, &cfg, truth, &SWEEP_FACTORS)?),
        _ => None,
    };
    let neighbor_sweep = match (&job.truth, args.sweep_k) {
        (Some(truth), true) => Some(sweep_neighbors(&job.w, &cfg, truth, &SWEEP_KS)?),
        _ => None,
    };

    eprintln!(
        "{}: {} points, {} motions, {:.3} s{}",
        job.name,
        job.w.cols(),
        job.motions,
        started.elapsed().as_secs_f64(),
        match error {
            Some(e) => format!(", error {}", format_percent(e)),
            None => String::new(),
        }
    );

    Ok(SequenceOutcome {
        report: SequenceReport {
            sequence: job.name.clone(),
            group: job.group.as_str().to_string(),
            motions: job.motions,
            error,
            r: diagnostics.rank,
            t_d: diagnostics.threshold_index,
            eta: diagnostics.eta,
            seed: args.seed,
        },
        scored,
        threshold_sweep,
        neighbor_sweep,
    })
}

/// Mean and midpoint median of a nonempty rate list.
fn mean_median(rates: &[f64]) -> (f64, f64) {
    let mut sorted = rates.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    (sorted.iter().sum::<f64>() / n as f64, median)
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let started = Instant::now();
    let jobs = collect_jobs(&args)?;
    if jobs.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no usable .tracks sequences match the filter",
            args.dir.display()
        )));
    }

    // Fixed-slot work queue: workers race over an atomic cursor but write
    // each outcome to its own slot, so results are ordered by sequence name
    // regardless of scheduling.
    let threads = worker_count(jobs.len())?;
    let slots: Vec<OnceLock<Result<SequenceOutcome>>> =
        (0..jobs.len()).map(|_| OnceLock::new()).collect();
    let cursor = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let outcome = process_sequence(&jobs[i], &args);
                let _ = slots[i].set(outcome);
            });
        }
    });

    let mut outcomes = Vec::with_capacity(jobs.len());
    for slot in slots {
        match slot.into_inner().expect("every slot is filled before the scope ends") {
            Ok(outcome) => outcomes.push(outcome),
            Err(err) => return Err(err),
        }
    }

    let scored: Vec<SequenceResult> =
        outcomes.iter().filter_map(|o| o.scored.clone()).collect();
    let aggregate_section = if scored.is_empty() {
        None
    } else {
        let report = aggregate(&scored)?;
        for (group, stats) in &report.groups {
            println!(
                "{}: mean {} median {} ({} sequences)",
                group.as_str(),
                format_percent(stats.mean),
                format_percent(stats.median),
                stats.count
            );
        }
        println!(
            "overall: mean {} median {} ({} sequences)",
            format_percent(report.overall.mean),
            format_percent(report.overall.median),
            report.overall.count
        );
        Some(AggregateSection::from_report(&report))
    };

    let sweeps = build_sweep_section(&outcomes);
    let reference_check = if args.check_reference {
        Some(check_reference(&scored)?)
    } else {
        None
    };

    if let Some(report_path) = &args.report {
        let report = BenchReport {
            config: BenchConfigReport {
                dim: args.dim,
                neighbors: args.neighbors,
                rank: match args.rank {
                    BenchRankArg::PerMotion => "per-motion".to_string(),
                    BenchRankArg::Auto => "auto".to_string(),
                    BenchRankArg::Fixed(r) => r.to_string(),
                },
                kappa: args.kappa,
                norm: args.norm,
                seed: args.seed,
                motions: args.motions.as_str().to_string(),
            },
            sequences: outcomes.iter().map(|o| o.report.clone()).collect(),
            aggregate: aggregate_section,
            sweeps,
            reference_targets: ReferenceTargets::default(),
            reference_check,
        };
        std::fs::write(report_path, to_json_string(&report))
            .map_err(|e| CliError::Data(format!("{}: {e}", report_path.display())))?;
    }

    eprintln!(
        "benchmarked {} sequences on {} thread(s) in {:.3} s",
        outcomes.len(),
        threads,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn build_sweep_section(outcomes: &[SequenceOutcome]) -> Option<SweepSection> {
    let mut section = SweepSection::default();

    let threshold_runs: Vec<_> =
        outcomes.iter().filter_map(|o| o.threshold_sweep.as_ref()).collect();
    if !threshold_runs.is_empty() {
        let mut rows = Vec::with_capacity(SWEEP_FACTORS.len());
        for (i, &factor) in SWEEP_FACTORS.iter().enumerate() {
            let rates: Vec<f64> = threshold_runs.iter().map(|run| run[i].error_rate).collect();
            let (mean, median) = mean_median(&rates);
            rows.push(ThresholdSweepReport { factor, mean, median });
        }
        section.threshold = Some(rows);
    }

    let neighbor_runs: Vec<_> = outcomes.iter().filter_map(|o| o.neighbor_sweep.as_ref()).collect();
    if !neighbor_runs.is_empty() {
        let mut rows = Vec::with_capacity(SWEEP_KS.len());
        for (i, &k) in SWEEP_KS.iter().enumerate() {
            let rates: Vec<f64> = neighbor_runs.iter().map(|run| run[i].error_rate).collect();
            let (mean, median) = mean_median(&rates);
            rows.push(NeighborSweepReport { k, mean, median });
        }
        section.neighbors = Some(rows);
    }

    if section.threshold.is_none() && section.neighbors.is_none() {
        None
    } else {
        Some(section)
    }
}

fn check_reference(scored: &[SequenceResult]) -> Result<ReferenceCheck> {
    if scored.is_empty() {
        return Err(CliError::Usage(
            "--check-reference needs sequences with ground-truth labels".into(),
        ));
    }
    let targets = ReferenceTargets::default();
    let subset = |motions: Option<usize>| -> Option<f64> {
        let rates: Vec<f64> = scored
            .iter()
            .filter(|s| motions.is_none_or(|m| s.num_motions == m))
            .map(|s| s.error_rate)
            .collect();
        if rates.is_empty() {
            None
        } else {
            Some(mean_median(&rates).0)
        }
    };
    let two = subset(Some(2)).map(|mean| TargetCheck::new(targets.two_motion, mean, targets.tolerance));
    let three =
        subset(Some(3)).map(|mean| TargetCheck::new(targets.three_motion, mean, targets.tolerance));
    let overall = subset(None).map(|mean| TargetCheck::new(targets.overall, mean, targets.tolerance));
    let all_ok = [&two, &three, &overall]
        .into_iter()
        .flatten()
        .all(|check| check.within_tolerance);
    Ok(ReferenceCheck {
        two_motion: two,
        three_motion: three,
        overall,
        all_within_tolerance: all_ok,
    })
}
