//! Implementations of the `gen`, `run`, `validate` and `bench` commands.
//! The `kdt` binary is a thin argument parser over these functions, and
//! the crate examples call them directly.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::kinetics::{KineticConfig, KineticState, Mode, Repartition};
use crate::metrics::StepMetrics;
use crate::oracle;
use crate::partition::Routing;
use crate::points_io::{read_points_file, write_points_file};
use crate::runtime::{resolve_workers, Runtime};
use crate::triangulation::{MeshDump, Triangulation, ValidationReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// The fully resolved configuration of a command invocation, echoed into
/// every output file so any output is reproducible from its header alone.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub kdt_version: String,
    pub command: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distribution: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_neighbors: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub repartition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routing: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dump_every: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl RunManifest {
    fn new(command: &str, seed: u64) -> Self {
        RunManifest {
            kdt_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            points: None,
            n: None,
            distribution: None,
            steps: None,
            n_neighbors: None,
            threshold: None,
            mode: None,
            workers: None,
            repartition: None,
            routing: None,
            dump_every: None,
            oracle: None,
            metrics: None,
            out: None,
        }
    }
}

/// A triangulation dump file: the manifest plus the mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DumpFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    #[serde(flatten)]
    pub mesh: MeshDump,
}

// ----------------------------------------------------------------------
// gen
// ----------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distribution {
    Uniform,
    Clustered,
}

impl std::str::FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Distribution::Uniform),
            "clustered" => Ok(Distribution::Clustered),
            other => Err(Error::InvalidConfig(format!(
                "unknown distribution '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Distribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Distribution::Uniform => "uniform",
            Distribution::Clustered => "clustered",
        })
    }
}

pub struct GenArgs {
    pub n: usize,
    pub seed: u64,
    pub distribution: Distribution,
    pub out: PathBuf,
}

/// Generate a point file: uniform on the unit square, or clustered into
/// ⌈√n/4⌉ Gaussian blobs (σ = 0.02) clipped to the unit square.
/// Duplicate positions are regenerated.
pub fn cmd_gen(args: &GenArgs) -> Result<Vec<Point>> {
    if args.n < 3 {
        return Err(Error::TooFewPoints {
            need: 3,
            got: args.n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut seen: HashSet<(u64, u64)> = HashSet::with_capacity(args.n);
    let mut points = Vec::with_capacity(args.n);

    let centers: Vec<Point> = match args.distribution {
        Distribution::Uniform => Vec::new(),
        Distribution::Clustered => {
            let k = ((args.n as f64).sqrt() / 4.0).ceil().max(1.0) as usize;
            (0..k)
                .map(|_| Point::new(rng.gen::<f64>(), rng.gen::<f64>()))
                .collect()
        }
    };

    while points.len() < args.n {
        let p = match args.distribution {
            Distribution::Uniform => Point::new(rng.gen::<f64>(), rng.gen::<f64>()),
            Distribution::Clustered => {
                let c = centers[rng.gen_range(0..centers.len())];
                let normal = rand_distr::Normal::new(0.0, 0.02).expect("valid sigma");
                let x: f64 = c.x + rng.sample::<f64, _>(normal);
                let y: f64 = c.y + rng.sample::<f64, _>(normal);
                Point::new(x.clamp(0.0, 1.0), y.clamp(0.0, 1.0))
            }
        };
        if seen.insert(p.bits()) {
            points.push(p);
        }
    }

    let mut manifest = RunManifest::new("gen", args.seed);
    manifest.n = Some(args.n);
    manifest.distribution = Some(args.distribution.to_string());
    manifest.out = Some(args.out.display().to_string());
    let manifest_json = serde_json::to_value(&manifest)?;
    write_points_file(&args.out, &points, Some(&manifest_json))?;
    Ok(points)
}

// ----------------------------------------------------------------------
// run
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct RunArgs {
    pub points: PathBuf,
    pub steps: u64,
    pub n_neighbors: usize,
    pub threshold: usize,
    pub mode: Mode,
    pub seed: u64,
    pub workers: Option<usize>,
    pub repartition: Repartition,
    pub routing: Routing,
    /// Metrics file (JSON lines; first line is the manifest).
    pub metrics: Option<PathBuf>,
    /// Dump the triangulation every k steps (0 = never).
    pub dump_every: u64,
    /// Directory for dump files; required when `dump_every > 0`.
    pub out: Option<PathBuf>,
    /// Full Delaunay validation after every step.
    pub validate_each_step: bool,
}

impl RunArgs {
    pub fn new(points: impl Into<PathBuf>) -> Self {
        let defaults = KineticConfig::default();
        RunArgs {
            points: points.into(),
            steps: 100,
            n_neighbors: defaults.n_neighbors,
            threshold: defaults.threshold,
            mode: defaults.mode,
            seed: defaults.seed,
            workers: None,
            repartition: defaults.repartition,
            routing: defaults.routing,
            metrics: None,
            dump_every: 0,
            out: None,
            validate_each_step: false,
        }
    }

    fn manifest(&self, workers: usize) -> RunManifest {
        let mut m = RunManifest::new("run", self.seed);
        m.points = Some(self.points.display().to_string());
        m.steps = Some(self.steps);
        m.n_neighbors = Some(self.n_neighbors);
        m.threshold = Some(self.threshold);
        m.mode = Some(self.mode.to_string());
        m.workers = Some(workers);
        m.repartition = Some(self.repartition.to_string());
        m.routing = Some(self.routing.to_string());
        m.dump_every = Some(self.dump_every);
        m.metrics = self.metrics.as_ref().map(|p| p.display().to_string());
        m.out = self.out.as_ref().map(|p| p.display().to_string());
        m
    }
}

pub struct RunOutcome {
    pub state: KineticState,
    pub metrics: Vec<StepMetrics>,
    pub manifest: RunManifest,
    pub wall_ms: f64,
}

/// Simulate `steps` time steps in the configured mode, writing metrics as
/// JSON lines and triangulation dumps every `dump_every` steps.
pub fn cmd_run(args: &RunArgs) -> Result<RunOutcome> {
    let file = read_points_file(&args.points)?;
    let workers = match args.mode {
        Mode::SerialKinetic => 1,
        _ => resolve_workers(args.workers),
    };
    let rt = Runtime::new(workers)?;
    let config = KineticConfig {
        n_neighbors: args.n_neighbors,
        threshold: args.threshold,
        seed: args.seed,
        mode: args.mode,
        repartition: args.repartition,
        routing: args.routing,
        validate_each_step: args.validate_each_step,
    };
    let manifest = args.manifest(workers);

    let mut metrics_file = match &args.metrics {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            writeln!(f, "{}", serde_json::to_string(&manifest)?)?;
            Some(f)
        }
        None => None,
    };
    let dump_dir = if args.dump_every > 0 {
        let dir = args.out.clone().ok_or_else(|| {
            Error::InvalidConfig("--out directory is required with --dump-every".into())
        })?;
        std::fs::create_dir_all(&dir)?;
        Some(dir)
    } else {
        None
    };

    let started = Instant::now();
    let mut state = KineticState::new(&file.points, config, &rt)?;
    let mut all_metrics = Vec::with_capacity(args.steps as usize);

    let write_dump = |state: &KineticState, dir: &Path| -> Result<()> {
        let dump = DumpFile {
            manifest: Some(manifest.clone()),
            mesh: state.tri.to_dump(),
        };
        let path = dir.join(format!("dump-{:06}.json", state.t));
        std::fs::write(path, serde_json::to_string(&dump)?)?;
        Ok(())
    };

    if args.steps == 0 {
        // Degenerate run: dump the initial state so a zero-step run still
        // round-trips through the dump format.
        if let Some(dir) = &dump_dir {
            write_dump(&state, dir)?;
        }
    }
    for _ in 0..args.steps {
        let m = state.step(&rt)?;
        if let Some(f) = &mut metrics_file {
            writeln!(f, "{}", serde_json::to_string(&m)?)?;
        }
        all_metrics.push(m);
        if let Some(dir) = &dump_dir {
            if state.t % args.dump_every == 0 {
                write_dump(&state, dir)?;
            }
        }
    }

    Ok(RunOutcome {
        state,
        metrics: all_metrics,
        manifest,
        wall_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

// ----------------------------------------------------------------------
// validate
// ----------------------------------------------------------------------

pub struct ValidateArgs {
    pub input: PathBuf,
    pub oracle: bool,
}

pub struct ValidateOutcome {
    pub report: ValidationReport,
    /// Some(true/false) when the oracle comparison ran; None when it was
    /// skipped (flag off, too many points, or degenerate configuration).
    pub oracle_match: Option<bool>,
    pub oracle_note: Option<String>,
    pub vertex_count: usize,
}

/// Check a points file or a triangulation dump. Points files are
/// triangulated first; dumps are verified as-is. With `oracle` set and at
/// most 128 points, the edge set is also compared against the exhaustive
/// brute-force construction.
pub fn cmd_validate(args: &ValidateArgs) -> Result<ValidateOutcome> {
    let raw = std::fs::read_to_string(&args.input)?;
    let tri = if raw.trim_start().starts_with('{') {
        let dump: DumpFile = serde_json::from_str(&raw)?;
        Triangulation::from_dump(&dump.mesh)?
    } else {
        let file = read_points_file(&args.input)?;
        Triangulation::build_initial(&file.points, 0)?
    };

    let report = tri.is_delaunay();
    let mut oracle_match = None;
    let mut oracle_note = None;
    if args.oracle {
        let points = tri.alive_points();
        if points.len() > oracle::ORACLE_MAX_POINTS {
            oracle_note = Some(format!(
                "oracle skipped: {} points exceed the {}-point cap",
                points.len(),
                oracle::ORACLE_MAX_POINTS
            ));
        } else {
            match oracle::brute_force_delaunay(&points) {
                Ok(set) => {
                    let ours: Vec<(usize, usize)> = tri
                        .canonical_edge_set()
                        .into_iter()
                        .map(|(a, b)| (a.index(), b.index()))
                        .collect();
                    oracle_match = Some(ours == set.edges());
                }
                Err(Error::DegenerateConfiguration(msg)) => {
                    oracle_note = Some(format!("oracle skipped: {msg}"));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(ValidateOutcome {
        vertex_count: tri.vertex_count(),
        report,
        oracle_match,
        oracle_note,
    })
}

// ----------------------------------------------------------------------
// bench
// ----------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BenchArgs {
    pub points: PathBuf,
    pub steps: u64,
    pub n_neighbors: usize,
    pub threshold: usize,
    pub modes: Vec<Mode>,
    pub workers: Vec<usize>,
    pub seed: u64,
    pub repartition: Repartition,
    pub routing: Routing,
    pub reps: usize,
    pub out: Option<PathBuf>,
}

impl BenchArgs {
    pub fn new(points: impl Into<PathBuf>) -> Self {
        BenchArgs {
            points: points.into(),
            steps: 100,
            n_neighbors: 5,
            threshold: 32,
            modes: vec![Mode::Rebuild, Mode::SerialKinetic, Mode::ParallelKinetic],
            workers: vec![resolve_workers(None)],
            seed: 0,
            repartition: Repartition::Lazy,
            routing: Routing::Tree,
            reps: 5,
            out: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: String,
    pub workers: usize,
    pub median_ms: f64,
    pub runs_ms: Vec<f64>,
    pub mean_edge_churn_per_step: f64,
    pub max_n_spread: f64,
    pub repartitions: u64,
    /// Digest of the final canonical edge set; equal digests mean equal
    /// final meshes.
    pub result_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup_vs_rebuild: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speedup_vs_serial: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub manifest: RunManifest,
    pub rows: Vec<BenchRow>,
}

fn median(sorted: &mut [f64]) -> f64 {
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[sorted.len() / 2]
}

fn edge_digest(state: &KineticState) -> String {
    // FNV-1a over the canonical edge list.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (a, b) in state.tri.canonical_edge_set() {
        for v in [a.0, b.0] {
            for byte in v.to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    format!("{h:016x}")
}

/// Time every (mode × workers) configuration `reps` times over the same
/// point file and seed, and report medians plus speedups against the
/// rebuild and serial-kinetic baselines.
pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport> {
    if args.reps == 0 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    let mut configs: Vec<(Mode, usize)> = Vec::new();
    for &mode in &args.modes {
        match mode {
            Mode::SerialKinetic => {
                if !configs.contains(&(mode, 1)) {
                    configs.push((mode, 1));
                }
            }
            _ => {
                for &w in &args.workers {
                    if !configs.contains(&(mode, w)) {
                        configs.push((mode, w));
                    }
                }
            }
        }
    }

    let mut rows = Vec::new();
    for (mode, workers) in configs {
        let run_args = RunArgs {
            points: args.points.clone(),
            steps: args.steps,
            n_neighbors: args.n_neighbors,
            threshold: args.threshold,
            mode,
            seed: args.seed,
            workers: Some(workers),
            repartition: args.repartition,
            routing: args.routing,
            metrics: None,
            dump_every: 0,
            out: None,
            validate_each_step: false,
        };
        let mut runs_ms = Vec::with_capacity(args.reps);
        let mut last: Option<RunOutcome> = None;
        for _ in 0..args.reps {
            let outcome = cmd_run(&run_args)?;
            runs_ms.push(outcome.wall_ms);
            last = Some(outcome);
        }
        let outcome = last.expect("at least one rep");
        let churn: u64 = outcome
            .metrics
            .iter()
            .map(|m| m.edges_deleted + m.edges_inserted)
            .sum();
        let max_n_spread = outcome
            .state
            .stats
            .iter()
            .map(|s| s.n_spread_max)
            .fold(0.0, f64::max);
        let median_ms = median(&mut runs_ms.clone());
        rows.push(BenchRow {
            mode: mode.to_string(),
            workers,
            median_ms,
            runs_ms,
            mean_edge_churn_per_step: churn as f64 / args.steps.max(1) as f64,
            max_n_spread,
            repartitions: outcome.state.repartitions,
            result_digest: edge_digest(&outcome.state),
            speedup_vs_rebuild: None,
            speedup_vs_serial: None,
        });
    }

    let rebuild_ms = rows
        .iter()
        .filter(|r| r.mode == Mode::Rebuild.to_string())
        .map(|r| r.median_ms)
        .fold(f64::NAN, |a, b| if a.is_nan() { b } else { a.min(b) });
    let serial_ms = rows
        .iter()
        .filter(|r| r.mode == Mode::SerialKinetic.to_string())
        .map(|r| r.median_ms)
        .fold(f64::NAN, |a, b| if a.is_nan() { b } else { a.min(b) });
    for row in &mut rows {
        if rebuild_ms.is_finite() {
            row.speedup_vs_rebuild = Some(rebuild_ms / row.median_ms);
        }
        if serial_ms.is_finite() {
            row.speedup_vs_serial = Some(serial_ms / row.median_ms);
        }
    }

    let mut manifest = RunManifest::new("bench", args.seed);
    manifest.points = Some(args.points.display().to_string());
    manifest.steps = Some(args.steps);
    manifest.n_neighbors = Some(args.n_neighbors);
    manifest.threshold = Some(args.threshold);
    manifest.mode = Some(
        args.modes
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.repartition = Some(args.repartition.to_string());
    manifest.routing = Some(args.routing.to_string());
    manifest.out = args.out.as_ref().map(|p| p.display().to_string());

    let report = BenchReport { manifest, rows };
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    }
    Ok(report)
}

/// Human-readable table for a bench report.
pub fn render_bench_table(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<18} {:>7} {:>12} {:>14} {:>14} {:>12} {:>16}\n",
        "mode", "workers", "median ms", "vs rebuild", "vs serial", "churn/step", "digest"
    ));
    for r in &report.rows {
        out.push_str(&format!(
            "{:<18} {:>7} {:>12.1} {:>14} {:>14} {:>12.1} {:>16}\n",
            r.mode,
            r.workers,
            r.median_ms,
            r.speedup_vs_rebuild
                .map_or("-".to_string(), |s| format!("{s:.2}x")),
            r.speedup_vs_serial
                .map_or("-".to_string(), |s| format!("{s:.2}x")),
            r.mean_edge_churn_per_step,
            r.result_digest,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn gen_small_file_in_unit_square() {
        let dir = tmp();
        let out = dir.path().join("p.csv");
        let points = cmd_gen(&GenArgs {
            n: 3,
            seed: 1,
            distribution: Distribution::Uniform,
            out: out.clone(),
        })
        .unwrap();
        assert_eq!(points.len(), 3);
        for p in &points {
            assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        }
        let text = std::fs::read_to_string(&out).unwrap();
        let data_lines = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .count();
        assert_eq!(data_lines, 3);
    }

    #[test]
    fn gen_is_deterministic_byte_for_byte() {
        let dir = tmp();
        let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        for out in [&a, &b] {
            cmd_gen(&GenArgs {
                n: 200,
                seed: 7,
                distribution: Distribution::Clustered,
                out: out.clone(),
            })
            .unwrap();
        }
        let bytes_a = std::fs::read(&a).unwrap();
        let mut bytes_b = std::fs::read(&b).unwrap();
        // The manifests embed the output path, the only expected delta.
        let (sa, sb) = (String::from_utf8(bytes_a).unwrap(), String::from_utf8(bytes_b.clone()).unwrap());
        let strip = |s: &str| {
            s.lines()
                .filter(|l| !l.starts_with("# manifest"))
                .collect::<Vec<_>>()
                .join("\n")
        };
        assert_eq!(strip(&sa), strip(&sb));
        // And identical paths give identical bytes.
        cmd_gen(&GenArgs {
            n: 200,
            seed: 7,
            distribution: Distribution::Clustered,
            out: b.clone(),
        })
        .unwrap();
        bytes_b = std::fs::read(&b).unwrap();
        assert_eq!(std::fs::read(&b).unwrap(), bytes_b);
    }

    #[test]
    fn gen_large_uniform_has_no_duplicate_rows() {
        let dir = tmp();
        let out = dir.path().join("big.csv");
        cmd_gen(&GenArgs {
            n: 100_000,
            seed: 3,
            distribution: Distribution::Uniform,
            out: out.clone(),
        })
        .unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let mut rows: Vec<&str> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.is_empty())
            .collect();
        let n = rows.len();
        rows.sort_unstable();
        rows.dedup();
        assert_eq!(rows.len(), n);
        assert_eq!(n, 100_000);
    }

    #[test]
    fn run_zero_steps_writes_manifest_only() {
        let dir = tmp();
        let points = dir.path().join("p.csv");
        cmd_gen(&GenArgs {
            n: 50,
            seed: 2,
            distribution: Distribution::Uniform,
            out: points.clone(),
        })
        .unwrap();
        let metrics = dir.path().join("m.jsonl");
        let mut args = RunArgs::new(&points);
        args.steps = 0;
        args.metrics = Some(metrics.clone());
        cmd_run(&args).unwrap();
        let text = std::fs::read_to_string(&metrics).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1);
        let manifest: RunManifest = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(manifest.command, "run");
    }

    #[test]
    fn run_dump_every_counts_files() {
        let dir = tmp();
        let points = dir.path().join("p.csv");
        cmd_gen(&GenArgs {
            n: 60,
            seed: 4,
            distribution: Distribution::Uniform,
            out: points.clone(),
        })
        .unwrap();
        let dumps = dir.path().join("dumps");
        let mut args = RunArgs::new(&points);
        args.steps = 30;
        args.n_neighbors = 3;
        args.threshold = 16;
        args.dump_every = 10;
        args.out = Some(dumps.clone());
        cmd_run(&args).unwrap();
        let mut files: Vec<_> = std::fs::read_dir(&dumps)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        files.sort();
        assert_eq!(
            files,
            vec!["dump-000010.json", "dump-000020.json", "dump-000030.json"]
        );
    }

    #[test]
    fn gen_run_dump_round_trip_recovers_points() {
        let dir = tmp();
        let points_path = dir.path().join("p.csv");
        let generated = cmd_gen(&GenArgs {
            n: 40,
            seed: 9,
            distribution: Distribution::Uniform,
            out: points_path.clone(),
        })
        .unwrap();
        let dumps = dir.path().join("dumps");
        let mut args = RunArgs::new(&points_path);
        args.steps = 0;
        args.dump_every = 1;
        args.out = Some(dumps.clone());
        cmd_run(&args).unwrap();
        let raw = std::fs::read_to_string(dumps.join("dump-000000.json")).unwrap();
        let dump: DumpFile = serde_json::from_str(&raw).unwrap();
        let mut original: Vec<(u64, u64)> = generated.iter().map(|p| p.bits()).collect();
        let mut recovered: Vec<(u64, u64)> = dump
            .mesh
            .vertices
            .iter()
            .map(|c| Point::new(c[0], c[1]).bits())
            .collect();
        original.sort_unstable();
        recovered.sort_unstable();
        assert_eq!(original, recovered);
    }

    #[test]
    fn validate_good_dump_and_flipped_dump() {
        let dir = tmp();
        // A strictly non-cocircular convex quad.
        let dump_ok = MeshDump {
            vertices: vec![[0.0, 0.0], [4.0, 0.0], [3.0, 3.0], [0.0, 2.0]],
            triangles: vec![[0, 1, 3], [1, 2, 3]],
        };
        let tri = Triangulation::from_dump(&dump_ok).unwrap();
        let good = tri.is_delaunay();
        assert!(good.ok, "expected valid: {:?}", good);

        let good_path = dir.path().join("good.json");
        std::fs::write(
            &good_path,
            serde_json::to_string(&DumpFile {
                manifest: None,
                mesh: dump_ok,
            })
            .unwrap(),
        )
        .unwrap();
        let outcome = cmd_validate(&ValidateArgs {
            input: good_path,
            oracle: true,
        })
        .unwrap();
        assert!(outcome.report.ok);
        assert_eq!(outcome.oracle_match, Some(true));

        // Flip the diagonal; both triangles now violate the circle test.
        let dump_bad = MeshDump {
            vertices: vec![[0.0, 0.0], [4.0, 0.0], [3.0, 3.0], [0.0, 2.0]],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        };
        let bad_path = dir.path().join("bad.json");
        std::fs::write(
            &bad_path,
            serde_json::to_string(&DumpFile {
                manifest: None,
                mesh: dump_bad,
            })
            .unwrap(),
        )
        .unwrap();
        let outcome = cmd_validate(&ValidateArgs {
            input: bad_path,
            oracle: false,
        })
        .unwrap();
        assert!(!outcome.report.ok);
        assert_eq!(outcome.report.violations.len(), 2);
    }

    #[test]
    fn validate_points_file_with_oracle() {
        let dir = tmp();
        let points = dir.path().join("p.csv");
        cmd_gen(&GenArgs {
            n: 30,
            seed: 11,
            distribution: Distribution::Uniform,
            out: points.clone(),
        })
        .unwrap();
        let outcome = cmd_validate(&ValidateArgs {
            input: points,
            oracle: true,
        })
        .unwrap();
        assert!(outcome.report.ok);
        assert_eq!(outcome.oracle_match, Some(true));
    }

    #[test]
    fn bench_single_config_single_row() {
        let dir = tmp();
        let points = dir.path().join("p.csv");
        cmd_gen(&GenArgs {
            n: 80,
            seed: 5,
            distribution: Distribution::Uniform,
            out: points.clone(),
        })
        .unwrap();
        let mut args = BenchArgs::new(&points);
        args.steps = 5;
        args.n_neighbors = 2;
        args.threshold = 16;
        args.modes = vec![Mode::SerialKinetic];
        args.workers = vec![1];
        args.reps = 1;
        let report = cmd_bench(&args).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].speedup_vs_serial.is_some());
    }

    #[test]
    fn bench_parallel_one_worker_matches_serial_results() {
        let dir = tmp();
        let points = dir.path().join("p.csv");
        cmd_gen(&GenArgs {
            n: 120,
            seed: 6,
            distribution: Distribution::Uniform,
            out: points.clone(),
        })
        .unwrap();
        let mut args = BenchArgs::new(&points);
        args.steps = 10;
        args.n_neighbors = 2;
        args.threshold = 16;
        args.modes = vec![Mode::SerialKinetic, Mode::ParallelKinetic];
        args.workers = vec![1];
        args.reps = 1;
        let report = cmd_bench(&args).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.rows[0].result_digest, report.rows[1].result_digest);
    }
}
