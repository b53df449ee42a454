//! Command-line interface: `segment`, `phantom`, and `sweep` subcommands.
//!
//! Conventions shared by all subcommands:
//! - stdout carries exactly one line, the path of the primary artifact
//!   (report, sweep table, or phantom image); diagnostics go to stderr.
//! - the output directory comes from `--out`, falling back to the
//!   `CONVSEG_OUT` environment variable, then the working directory.
//! - exit codes: 0 success, 1 invalid flags or options, 2 unreadable input
//!   file, 3 solver divergence.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Palette};
use crate::io;
use crate::operators::{cost_field, energy, EnergyBreakdown};
use crate::pipeline::{
    add_gaussian_noise, make_phantom, segment, segmentation_accuracy, NoiseSpec, PhantomKind,
    SegmentOptions,
};
use crate::solver::{SolveReport, SolverConfig};

/// Convex multi-phase color image segmentation.
#[derive(Debug, Parser)]
#[command(name = "convseg", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment an image (or a generated phantom) into K flat color regions.
    Segment(SegmentArgs),
    /// Generate a synthetic phantom with ground truth and palette.
    Phantom(PhantomArgs),
    /// Run `segment` over a grid of lambda values and noise seeds.
    Sweep(SweepArgs),
}

const DEFAULT_STEP: f64 = 0.35355339059327373; // 1/sqrt(8)

#[derive(Debug, Args)]
pub struct SegmentArgs {
    /// Input image (PNG or binary PPM), or the literal `phantom` to segment
    /// a generated phantom (see --kind, --size, --noise-var).
    pub input: String,

    /// TV regularization weight.
    #[arg(long, default_value_t = 0.1)]
    pub lambda: f64,

    /// Squared-gradient regularization weight (0 disables smoothing).
    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,

    /// Number of phases; palette then comes from K-means. Omit both --k and
    /// --palette to detect K from histogram peaks.
    #[arg(long, conflicts_with = "palette")]
    pub k: Option<usize>,

    /// Palette file (one `r,g,b` line per color); bypasses clustering.
    #[arg(long)]
    pub palette: Option<PathBuf>,

    /// Histogram bins per channel for K detection.
    #[arg(long, default_value_t = 16)]
    pub bins: usize,

    /// Dual step size (sigma * tau * 8 <= 1 must hold).
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub sigma: f64,

    /// Primal step size.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub tau: f64,

    /// Iteration cap for the primal-dual solve.
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,

    /// Relative-change stopping threshold.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,

    /// Gaussian noise variance added to the input before segmenting.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,

    /// Gaussian noise mean.
    #[arg(long, default_value_t = 0.0)]
    pub noise_mean: f64,

    /// Seed for noise and K-means initialization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (default: $CONVSEG_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Ground-truth label map (.csv or graymap) for SA scoring. With a
    /// phantom input, bare `--truth` (or `--truth auto`) scores against the
    /// generated truth.
    #[arg(long, num_args = 0..=1, default_missing_value = "auto")]
    pub truth: Option<PathBuf>,

    /// Phantom kind when input is `phantom`.
    #[arg(long, default_value = "three-phase")]
    pub kind: String,

    /// Phantom size when input is `phantom`.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Phantom kind: three-phase or six-phase.
    #[arg(long, default_value = "three-phase")]
    pub kind: String,

    /// Image side length in pixels.
    #[arg(long, default_value_t = 128)]
    pub size: usize,

    /// Gaussian noise variance to bake into the written image.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,

    /// Gaussian noise mean.
    #[arg(long, default_value_t = 0.0)]
    pub noise_mean: f64,

    /// Noise seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory (default: $CONVSEG_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Input image path or the literal `phantom`.
    pub input: String,

    /// Comma-separated lambda values, e.g. `0.05,0.1,0.2`.
    #[arg(long)]
    pub lambdas: String,

    /// Noise/K-means seeds per lambda: runs seeds `--seed .. --seed+N-1`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,

    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,

    /// Number of phases (see `segment --k`).
    #[arg(long, conflicts_with = "palette")]
    pub k: Option<usize>,

    /// Palette file; bypasses clustering in every cell.
    #[arg(long)]
    pub palette: Option<PathBuf>,

    #[arg(long, default_value_t = 16)]
    pub bins: usize,

    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub sigma: f64,

    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub tau: f64,

    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,

    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,

    /// Gaussian noise variance applied per seed.
    #[arg(long, default_value_t = 0.0)]
    pub noise_var: f64,

    #[arg(long, default_value_t = 0.0)]
    pub noise_mean: f64,

    /// Worker threads for sweep cells (0 = one per core).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,

    /// Output directory (default: $CONVSEG_OUT, then `.`).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Ground-truth label map for SA scoring (bare `--truth` with phantom
    /// input scores against the generated truth).
    #[arg(long, num_args = 0..=1, default_missing_value = "auto")]
    pub truth: Option<PathBuf>,

    /// Phantom kind when input is `phantom`.
    #[arg(long, default_value = "three-phase")]
    pub kind: String,

    /// Phantom size when input is `phantom`.
    #[arg(long, default_value_t = 128)]
    pub size: usize,
}

/// Everything one `segment` run produced, serialized as `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Input path or `phantom:<kind>:<size>`.
    pub input: String,
    pub height: usize,
    pub width: usize,
    /// Noise applied to the input before segmenting, if any.
    pub noise: Option<NoiseSpec>,
    /// Resolved phase count.
    pub k: usize,
    /// Resolved palette (given, K-means, or detected + K-means).
    pub palette: Vec<[f64; 3]>,
    /// How the palette was resolved: "file", "kmeans", or "detected".
    pub palette_source: String,
    pub bins: usize,
    pub seed: u64,
    pub solver: SolverConfig,
    pub solve: SolveReport,
    /// Energy of the final relaxed iterate.
    pub energy: EnergyBreakdown,
    /// SA against ground truth, when truth was supplied.
    pub sa: Option<SaSummary>,
    /// Wall-clock milliseconds for the whole run (load to harden).
    pub wall_ms: u64,
    pub outputs: OutputPaths,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaSummary {
    pub value: f64,
    /// (predicted label, truth label) pairs used by the score.
    pub matching: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputPaths {
    pub segmented: String,
    pub labels_csv: String,
    pub labels_pgm: String,
    pub report: String,
}

/// One sweep cell result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub sa: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub energy_total: f64,
    pub wall_ms: u64,
}

/// Per-lambda aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub lambda: f64,
    pub mean_sa: Option<f64>,
    pub mean_wall_ms: f64,
}

/// The sweep table, serialized as `sweep.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub input: String,
    pub noise_var: f64,
    pub noise_mean: f64,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummaryRow>,
}

/// Dispatches a parsed command line; returns the path printed to stdout.
pub fn run(cli: Cli) -> Result<PathBuf> {
    match cli.command {
        Command::Segment(args) => cmd_segment(&args),
        Command::Phantom(args) => cmd_phantom(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    }
}

fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("CONVSEG_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|e| Error::FileWrite {
        path: dir.clone(),
        reason: e.to_string(),
    })?;
    Ok(dir)
}

/// The resolved input of a run: the image to segment plus phantom truth when
/// the input was generated.
struct ResolvedInput {
    image: Image,
    truth: Option<Array2<usize>>,
    name: String,
    /// Preferred extension for the segmented output (matches the input).
    image_ext: &'static str,
    noise: Option<NoiseSpec>,
}

fn resolve_input(
    input: &str,
    kind: &str,
    size: usize,
    noise_var: f64,
    noise_mean: f64,
    seed: u64,
) -> Result<ResolvedInput> {
    let noise = (noise_var > 0.0 || noise_mean != 0.0).then_some(NoiseSpec {
        mean: noise_mean,
        variance: noise_var,
        seed,
    });
    if input == "phantom" {
        let kind: PhantomKind = kind.parse()?;
        let (clean, truth, _) = make_phantom(kind, size)?;
        let image = match &noise {
            Some(spec) => add_gaussian_noise(&clean, spec)?,
            None => clean,
        };
        Ok(ResolvedInput {
            image,
            truth: Some(truth),
            name: format!("phantom:{kind}:{size}"),
            image_ext: "png",
            noise,
        })
    } else {
        let path = Path::new(input);
        let clean = io::load_image(path)?;
        let image = match &noise {
            Some(spec) => add_gaussian_noise(&clean, spec)?,
            None => clean,
        };
        let ext = match path.extension().and_then(|e| e.to_str()) {
            Some("ppm") | Some("pnm") => "ppm",
            _ => "png",
        };
        Ok(ResolvedInput {
            image,
            truth: None,
            name: input.to_string(),
            image_ext: ext,
            noise,
        })
    }
}

/// Loads the truth referenced by `--truth`: a label-map path, or the literal
/// `auto` (what the bare flag expands to) meaning "use the generated phantom
/// truth". A real file named `auto` can be passed as `./auto`.
fn resolve_truth(
    flag: &Option<PathBuf>,
    generated: &Option<Array2<usize>>,
) -> Result<Option<Array2<usize>>> {
    match flag {
        None => Ok(None),
        Some(p) if p.as_os_str() == "auto" => match generated {
            Some(t) => Ok(Some(t.clone())),
            None => Err(Error::InvalidParameter {
                what: "--truth",
                why: "bare --truth needs a phantom input; pass a label-map path".to_string(),
            }),
        },
        Some(p) => Ok(Some(io::load_labels(p)?)),
    }
}

pub fn cmd_segment(args: &SegmentArgs) -> Result<PathBuf> {
    let start = Instant::now();
    let dir = out_dir(&args.out)?;
    let resolved = resolve_input(
        &args.input,
        &args.kind,
        args.size,
        args.noise_var,
        args.noise_mean,
        args.seed,
    )?;
    let truth = resolve_truth(&args.truth, &resolved.truth)?;

    let solver = SolverConfig {
        lambda: args.lambda,
        mu: args.mu,
        sigma: args.sigma,
        tau: args.tau,
        max_iter: args.max_iter,
        tol: args.tol,
        record_energy_every: 0,
    };
    let (palette_override, palette_source) = match &args.palette {
        Some(path) => (Some(io::load_palette(path)?), "file"),
        None => (None, if args.k.is_some() { "kmeans" } else { "detected" }),
    };
    let options = SegmentOptions {
        k: args.k,
        palette: palette_override,
        solver,
        bins: args.bins,
        seed: args.seed,
        ..Default::default()
    };

    let (seg, solve_report) = segment(&resolved.image, &options)?;
    let w = cost_field(&resolved.image, &seg.palette);
    let final_energy = energy(seg.relaxed_z.data(), &w, args.lambda, args.mu)?;
    let sa = match &truth {
        Some(t) => {
            let score = segmentation_accuracy(&seg.labels, t)?;
            Some(SaSummary {
                value: score.value,
                matching: score.matching,
            })
        }
        None => None,
    };

    let segmented_path = dir.join(format!("segmented.{}", resolved.image_ext));
    let labels_csv = dir.join("labels.csv");
    let labels_pgm = dir.join("labels.pgm");
    let report_path = dir.join("report.json");
    io::save_image(&segmented_path, &seg.render())?;
    io::save_labels_csv(&labels_csv, &seg.labels)?;
    io::save_labels_pgm(&labels_pgm, &seg.labels)?;

    let report = RunReport {
        input: resolved.name,
        height: resolved.image.height(),
        width: resolved.image.width(),
        noise: resolved.noise,
        k: seg.palette.k(),
        palette: seg.palette.colors().to_vec(),
        palette_source: palette_source.to_string(),
        bins: args.bins,
        seed: args.seed,
        solver,
        solve: solve_report,
        energy: final_energy,
        sa,
        wall_ms: start.elapsed().as_millis() as u64,
        outputs: OutputPaths {
            segmented: segmented_path.display().to_string(),
            labels_csv: labels_csv.display().to_string(),
            labels_pgm: labels_pgm.display().to_string(),
            report: report_path.display().to_string(),
        },
    };
    write_json(&report_path, &report)?;
    Ok(report_path)
}

pub fn cmd_phantom(args: &PhantomArgs) -> Result<PathBuf> {
    let dir = out_dir(&args.out)?;
    let kind: PhantomKind = args.kind.parse()?;
    let (clean, truth, palette) = make_phantom(kind, args.size)?;
    let image = if args.noise_var > 0.0 || args.noise_mean != 0.0 {
        add_gaussian_noise(
            &clean,
            &NoiseSpec {
                mean: args.noise_mean,
                variance: args.noise_var,
                seed: args.seed,
            },
        )?
    } else {
        clean
    };
    let image_path = dir.join("phantom.png");
    io::save_image(&image_path, &image)?;
    io::save_labels_csv(&dir.join("truth.csv"), &truth)?;
    io::save_labels_pgm(&dir.join("truth.pgm"), &truth)?;
    io::save_palette(&dir.join("palette.txt"), &palette)?;
    Ok(image_path)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<PathBuf> {
    let dir = out_dir(&args.out)?;
    let lambdas: Vec<f64> = args
        .lambdas
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| Error::InvalidParameter {
                what: "--lambdas",
                why: format!("{t:?}: {e}"),
            })
        })
        .collect::<Result<_>>()?;
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter {
            what: "--lambdas",
            why: "empty sweep".to_string(),
        });
    }
    if args.seeds == 0 {
        return Err(Error::InvalidParameter {
            what: "--seeds",
            why: "must be at least 1".to_string(),
        });
    }
    let palette_override = match &args.palette {
        Some(path) => Some(io::load_palette(path)?),
        None => None,
    };

    // One (lambda, seed) cell per row; cells are independent and run on a
    // bounded pool, collected in deterministic order.
    let cells: Vec<(f64, u64)> = lambdas
        .iter()
        .flat_map(|&l| (args.seed..args.seed + args.seeds).map(move |s| (l, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::InvalidParameter {
            what: "--jobs",
            why: e.to_string(),
        })?;
    let rows: Vec<SweepRow> = {
        use rayon::prelude::*;
        pool.install(|| {
            cells
                .par_iter()
                .map(|&(lambda, seed)| sweep_cell(args, &palette_override, lambda, seed))
                .collect::<Result<Vec<_>>>()
        })?
    };

    let summary: Vec<SweepSummaryRow> = lambdas
        .iter()
        .map(|&lambda| {
            let group: Vec<&SweepRow> = rows.iter().filter(|r| r.lambda == lambda).collect();
            let n = group.len() as f64;
            let mean_sa = group
                .iter()
                .map(|r| r.sa)
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.iter().sum::<f64>() / n);
            SweepSummaryRow {
                lambda,
                mean_sa,
                mean_wall_ms: group.iter().map(|r| r.wall_ms as f64).sum::<f64>() / n,
            }
        })
        .collect();

    let report = SweepReport {
        input: args.input.clone(),
        noise_var: args.noise_var,
        noise_mean: args.noise_mean,
        rows,
        summary,
    };
    let path = dir.join("sweep.json");
    write_json(&path, &report)?;
    Ok(path)
}

fn sweep_cell(
    args: &SweepArgs,
    palette_override: &Option<Palette>,
    lambda: f64,
    seed: u64,
) -> Result<SweepRow> {
    let start = Instant::now();
    let resolved = resolve_input(
        &args.input,
        &args.kind,
        args.size,
        args.noise_var,
        args.noise_mean,
        seed,
    )?;
    let truth = resolve_truth(&args.truth, &resolved.truth)?;
    let options = SegmentOptions {
        k: args.k,
        palette: palette_override.clone(),
        solver: SolverConfig {
            lambda,
            mu: args.mu,
            sigma: args.sigma,
            tau: args.tau,
            max_iter: args.max_iter,
            tol: args.tol,
            record_energy_every: 0,
        },
        bins: args.bins,
        seed,
        ..Default::default()
    };
    let (seg, solve_report) = segment(&resolved.image, &options)?;
    let w = cost_field(&resolved.image, &seg.palette);
    let final_energy = energy(seg.relaxed_z.data(), &w, lambda, args.mu)?;
    let sa = match &truth {
        Some(t) => Some(segmentation_accuracy(&seg.labels, t)?.value),
        None => None,
    };
    Ok(SweepRow {
        lambda,
        seed,
        sa,
        iterations: solve_report.iterations_run,
        converged: solve_report.converged,
        energy_total: final_energy.total,
        wall_ms: start.elapsed().as_millis() as u64,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::FileWrite {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    std::fs::write(path, text + "\n").map_err(|e| Error::FileWrite {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Maps an error to the documented process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::FileRead { .. } => 2,
        Error::Divergence { .. } => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::SolveReport;

    #[test]
    fn report_json_round_trip() {
        let report = RunReport {
            input: "phantom:three-phase:32".to_string(),
            height: 32,
            width: 32,
            noise: Some(NoiseSpec {
                mean: 0.0,
                variance: 0.1,
                seed: 3,
            }),
            k: 4,
            palette: vec![[1.0, 1.0, 1.0], [1.0, 0.0, 0.0]],
            palette_source: "detected".to_string(),
            bins: 16,
            seed: 3,
            solver: SolverConfig::default(),
            solve: SolveReport {
                iterations_run: 120,
                converged: true,
                final_rel_change: 8.3e-6,
                energy_trace: vec![],
            },
            energy: EnergyBreakdown {
                tv_term: 1.25,
                smooth_term: 0.03,
                data_term: 10.5,
                total: 11.78,
            },
            sa: Some(SaSummary {
                value: 0.9975,
                matching: vec![(0, 0), (1, 1)],
            }),
            wall_ms: 412,
            outputs: OutputPaths {
                segmented: "out/segmented.png".to_string(),
                labels_csv: "out/labels.csv".to_string(),
                labels_pgm: "out/labels.pgm".to_string(),
                report: "out/report.json".to_string(),
            },
        };
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: RunReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }

    #[test]
    fn exit_codes_stable() {
        assert_eq!(
            exit_code(&Error::FileRead {
                path: "x".into(),
                reason: "gone".into()
            }),
            2
        );
        assert_eq!(exit_code(&Error::Divergence { iter: 7 }), 3);
        assert_eq!(
            exit_code(&Error::InvalidParameter {
                what: "k",
                why: "zero".into()
            }),
            1
        );
    }

    #[test]
    fn cli_parses_documented_flags() {
        let cli = Cli::try_parse_from([
            "convseg", "segment", "in.png", "--lambda", "0.2", "--mu", "0.01", "--k", "4",
            "--bins", "8", "--sigma", "0.3", "--tau", "0.3", "--max-iter", "500", "--tol",
            "1e-6", "--noise-var", "0.1", "--noise-mean", "0.0", "--seed", "7", "--out", "o",
        ])
        .unwrap();
        match cli.command {
            Command::Segment(a) => {
                assert_eq!(a.input, "in.png");
                assert_eq!(a.lambda, 0.2);
                assert_eq!(a.k, Some(4));
                assert_eq!(a.max_iter, 500);
                assert_eq!(a.seed, 7);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn cli_defaults_match_module_defaults() {
        let cli = Cli::try_parse_from(["convseg", "segment", "in.png"]).unwrap();
        match cli.command {
            Command::Segment(a) => {
                let d = SolverConfig::default();
                assert_eq!(a.lambda, d.lambda);
                assert_eq!(a.mu, d.mu);
                assert_eq!(a.sigma, d.sigma);
                assert_eq!(a.tau, d.tau);
                assert_eq!(a.max_iter, d.max_iter);
                assert_eq!(a.tol, d.tol);
                assert_eq!(a.bins, 16);
            }
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn truth_flag_value_is_optional() {
        let bare = Cli::try_parse_from(["convseg", "segment", "phantom", "--truth"]).unwrap();
        match bare.command {
            Command::Segment(a) => assert_eq!(a.truth, Some(PathBuf::from("auto"))),
            _ => panic!("wrong subcommand"),
        }
        let with_path =
            Cli::try_parse_from(["convseg", "segment", "in.png", "--truth", "t.csv"]).unwrap();
        match with_path.command {
            Command::Segment(a) => assert_eq!(a.truth, Some(PathBuf::from("t.csv"))),
            _ => panic!("wrong subcommand"),
        }
        let absent = Cli::try_parse_from(["convseg", "segment", "in.png"]).unwrap();
        match absent.command {
            Command::Segment(a) => assert_eq!(a.truth, None),
            _ => panic!("wrong subcommand"),
        }
    }

    #[test]
    fn k_conflicts_with_palette() {
        assert!(Cli::try_parse_from([
            "convseg", "segment", "in.png", "--k", "3", "--palette", "p.txt"
        ])
        .is_err());
    }

    #[test]
    fn bare_truth_needs_phantom() {
        let args = SegmentArgs {
            input: "file.png".into(),
            lambda: 0.1,
            mu: 0.01,
            k: None,
            palette: None,
            bins: 16,
            sigma: DEFAULT_STEP,
            tau: DEFAULT_STEP,
            max_iter: 10,
            tol: 1e-5,
            noise_var: 0.0,
            noise_mean: 0.0,
            seed: 0,
            out: None,
            truth: Some(PathBuf::from("auto")),
            kind: "three-phase".into(),
            size: 32,
        };
        // resolve_truth fails before any file access because the generated
        // truth is absent for file inputs.
        let err = resolve_truth(&args.truth, &None).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
    }
}
