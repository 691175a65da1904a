//! `nst` — texture analysis command line.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O or file-format error,
//! 4 numeric failure. Every error path prints one machine-parsable line
//! `error[<class>]: <message>` to stderr.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nst_core::composite::{make_composite, StructureKind};
use nst_core::diffusion::separate;
use nst_core::fbm::{synth_field, FbmParams};
use nst_core::glcm::{diagonal_sweep, glcm_mi_profile, horizontal_sweep};
use nst_core::io::{load_image, save_image, SaveFormat};
use nst_core::mi::{mi_patches, mi_scales, HistogramSpec, PATCH_HISTOGRAM_BINS};
use nst_core::report::{aggregate, run_report, ReportDocument};
use nst_core::stats::{
    gaussianity_report, haar_detail, ks_test_uniform_phase, kurtosis, randomize_phase,
};
use nst_core::{Error, ErrorClass, GrayImage, Result, RngSeed};

use config::{merge_diffusion, merge_report, FileConfig};

/// Environment variable supplying the default batch worker count.
const WORKERS_ENV: &str = "NST_WORKERS";

#[derive(Parser)]
#[command(
    name = "nst",
    version,
    about = "Self-similarity analysis of natural stochastic textures"
)]
struct Cli {
    /// TOML config file supplying defaults for omitted flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatsKind {
    Gaussianity,
    Phase,
    Kurtosis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Horizontal,
    Diagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StructureArg {
    Step,
    Disk,
    Checker,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize an exact fractional Brownian field.
    ///
    /// `.txf` outputs hold the raw field; `.pgm` outputs are affinely
    /// mapped to [0, 1] first.
    SynthFbm {
        #[arg(long)]
        hurst: f64,
        /// Base variance of the process.
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Field side in pixels (exact synthesis, capped at 128).
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Split an image into structure and texture layers.
    Separate {
        input: PathBuf,
        /// Diffusion iterations.
        #[arg(long)]
        iters: Option<usize>,
        /// Edge threshold: a number or 'auto'.
        #[arg(long)]
        kappa: Option<String>,
        /// Time step in (0, 0.25].
        #[arg(long)]
        dt: Option<f64>,
        /// Conductance: 'exp' or 'rat'.
        #[arg(long)]
        cond: Option<String>,
        /// Structure output (.pgm is 8-bit, anything else TXF).
        #[arg(long, value_name = "PATH")]
        out_structure: PathBuf,
        /// Texture output; always TXF, the layer is signed.
        #[arg(long, value_name = "PATH")]
        out_texture: PathBuf,
    },
    /// Distributional tests of an image.
    Stats {
        kind: StatsKind,
        input: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        /// Judge Gaussianity against Lilliefors critical values.
        #[arg(long)]
        lilliefors: bool,
        /// Emit JSON instead of text.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Replace spectral phases with uniform draws, keeping magnitudes.
    PhaseRandomize {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, value_name = "PATH")]
        out: PathBuf,
    },
    /// Mutual information between consecutive pyramid levels.
    MiScales {
        input: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        /// Emit CSV instead of JSON.
        #[arg(long, conflicts_with = "json")]
        csv: bool,
        /// Emit JSON (the default).
        #[arg(long)]
        json: bool,
    },
    /// Normalized mutual information between non-overlapping patches;
    /// writes matrix and histogram CSV files per level.
    MiPatches {
        input: PathBuf,
        #[arg(long)]
        patch: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        bins: Option<usize>,
        /// CSV file output (the only mode; accepted for symmetry).
        #[arg(long)]
        csv: bool,
        /// Directory for per-level matrix and histogram CSV files.
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
    },
    /// Mutual information of gray-level co-occurrence matrices over an
    /// offset sweep.
    GlcmMi {
        input: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_enum, default_value_t = SweepKind::Horizontal)]
        sweep: SweepKind,
        #[arg(long)]
        d_max: Option<i32>,
        /// CSV on stdout (the only mode; accepted for symmetry).
        #[arg(long)]
        csv: bool,
    },
    /// Full analysis of one image as a JSON document.
    Report {
        input: PathBuf,
        /// Output file (stdout if omitted).
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        lilliefors: bool,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        patch: Option<usize>,
        #[arg(long)]
        patch_levels: Option<usize>,
        #[arg(long)]
        glcm_levels: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Run reports over every image in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Worker count (default: NST_WORKERS or the CPU count).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        lilliefors: bool,
        #[arg(long)]
        bins: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        kappa: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        cond: Option<String>,
    },
    /// Build a texture + structure composite test image.
    MakeComposite {
        #[arg(long)]
        hurst: f64,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum)]
        structure: StructureArg,
        #[arg(long, default_value_t = 0.5)]
        amplitude: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("error[usage]: {}", e.kind());
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (class, code) = match e.class() {
                ErrorClass::Usage => ("usage", 2),
                ErrorClass::Io => ("io", 3),
                ErrorClass::Numeric => ("numeric", 4),
            };
            eprintln!("error[{class}]: {e}");
            ExitCode::from(code)
        }
    }
}

fn save_by_extension(img: &GrayImage, path: &Path) -> Result<()> {
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("pgm") => SaveFormat::Pgm8,
        _ => SaveFormat::Txf,
    };
    save_image(img, path, format)
}

fn print_or_write(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("serialize: {e}")))
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::SynthFbm {
            hurst,
            sigma2,
            size,
            seed,
            out,
        } => {
            let params = FbmParams::new(hurst, sigma2)?;
            let field = synth_field(params, size, RngSeed(seed))?;
            let img = if out.extension().and_then(|e| e.to_str()) == Some("pgm") {
                field.grid.normalized_unit()
            } else {
                field.grid
            };
            save_by_extension(&img, &out)
        }
        Command::Separate {
            input,
            iters,
            kappa,
            dt,
            cond,
            out_structure,
            out_texture,
        } => {
            let settings = merge_diffusion(&file, iters, kappa.as_deref(), dt, cond.as_deref())?;
            let img = load_image(&input)?;
            let sep = separate(&img, &settings)?;
            save_by_extension(&sep.structure, &out_structure)?;
            save_image(&sep.texture, &out_texture, SaveFormat::Txf)?;
            eprintln!(
                "separated with iters={} kappa={:.6} dt={} conductance={:?}",
                sep.settings.iterations, sep.settings.kappa, sep.settings.dt, sep.settings.conductance
            );
            Ok(())
        }
        Command::Stats {
            kind,
            input,
            alpha,
            lilliefors,
            json,
            iters,
            kappa,
            dt,
            cond,
        } => {
            let alpha = alpha.or(file.alpha).unwrap_or(0.05);
            let lilliefors = lilliefors || file.lilliefors.unwrap_or(false);
            let img = load_image(&input)?;
            match kind {
                StatsKind::Gaussianity => {
                    let settings =
                        merge_diffusion(&file, iters, kappa.as_deref(), dt, cond.as_deref())?;
                    let rep = gaussianity_report(&img, &settings, alpha, lilliefors)?;
                    if json {
                        println!("{}", to_json(&rep)?);
                    } else {
                        println!("raw detail:     {}", describe(&rep.raw));
                        println!("texture detail: {}", describe(&rep.texture));
                        println!("texture phase:  {}", describe(&rep.texture_phase));
                        if let (Some(r), Some(t)) = (rep.raw_kurtosis, rep.texture_kurtosis) {
                            println!("kurtosis raw={:.3} texture={:.3}", r.plain, t.plain);
                        }
                    }
                }
                StatsKind::Phase => {
                    let outcome = ks_test_uniform_phase(&img, alpha)?;
                    if json {
                        println!("{}", to_json(&outcome)?);
                    } else {
                        println!(
                            "phase uniformity: D={:.5} critical={:.5} n={} -> {}",
                            outcome.statistic,
                            outcome.critical,
                            outcome.n,
                            if outcome.accepted { "accepted" } else { "rejected" }
                        );
                    }
                }
                StatsKind::Kurtosis => {
                    let k = kurtosis(haar_detail(&img)?.coefficients())?;
                    if json {
                        println!("{}", to_json(&k)?);
                    } else {
                        println!("kurtosis plain={:.4} excess={:.4}", k.plain, k.excess);
                    }
                }
            }
            Ok(())
        }
        Command::PhaseRandomize { input, seed, out } => {
            let img = load_image(&input)?;
            let surrogate = randomize_phase(&img, RngSeed(seed));
            save_by_extension(&surrogate, &out)
        }
        Command::MiScales {
            input,
            levels,
            bins,
            csv,
            json: _,
        } => {
            let levels = levels.or(file.levels).unwrap_or(4);
            let spec = HistogramSpec::new(bins.or(file.bins).unwrap_or(256))?;
            let img = load_image(&input)?;
            let rep = mi_scales(&img, levels, &spec)?;
            if csv {
                println!("n,fine_width,fine_height,mi_bits,h_fine_bits,h_cond_bits");
                for p in &rep.pairs {
                    println!(
                        "{},{},{},{},{},{}",
                        p.n, p.fine_width, p.fine_height, p.mi, p.h_fine, p.h_cond
                    );
                }
            } else {
                println!("{}", to_json(&rep)?);
            }
            Ok(())
        }
        Command::MiPatches {
            input,
            patch,
            levels,
            bins,
            csv: _,
            out_dir,
        } => {
            let patch = patch.or(file.patch).unwrap_or(32);
            let levels = levels.or(file.patch_levels).unwrap_or(3);
            let spec = HistogramSpec::new(bins.or(file.bins).unwrap_or(256))?;
            let img = load_image(&input)?;
            let rep = mi_patches(&img, patch, levels, &spec)?;
            std::fs::create_dir_all(&out_dir)?;
            for level in &rep.levels {
                let n = level.patches_x * level.patches_y;
                let mut matrix = String::new();
                for i in 0..n {
                    let row: Vec<String> = (0..n)
                        .map(|j| match level.matrix[i * n + j] {
                            Some(v) => v.to_string(),
                            None => String::new(),
                        })
                        .collect();
                    matrix.push_str(&row.join(","));
                    matrix.push('\n');
                }
                std::fs::write(out_dir.join(format!("matrix_level{}.csv", level.level)), matrix)?;

                let mut hist = String::from("bin_lo,bin_hi,count\n");
                for (b, &c) in level.histogram.iter().enumerate() {
                    if b + 1 < PATCH_HISTOGRAM_BINS {
                        hist.push_str(&format!("{},{},{c}\n", b as f64 / 20.0, (b + 1) as f64 / 20.0));
                    } else {
                        hist.push_str(&format!("1.0,inf,{c}\n"));
                    }
                }
                std::fs::write(
                    out_dir.join(format!("histogram_level{}.csv", level.level)),
                    hist,
                )?;
            }
            // Summary (medians per level) on stdout.
            let summary: Vec<_> = rep
                .levels
                .iter()
                .map(|l| (l.level, l.off_diagonal))
                .collect();
            for (level, off) in summary {
                println!(
                    "level {level}: pairs={} median={} iqr={}",
                    off.count,
                    off.median.map_or("n/a".into(), |v| format!("{v:.4}")),
                    off.iqr.map_or("n/a".into(), |v| format!("{v:.4}")),
                );
            }
            Ok(())
        }
        Command::GlcmMi {
            input,
            levels,
            sweep,
            d_max,
            csv: _,
        } => {
            let levels = levels.or(file.glcm_levels).unwrap_or(32);
            let d_max = d_max.or(file.d_max).unwrap_or(30);
            if d_max < 1 {
                return Err(Error::InvalidParameter("d-max must be >= 1".into()));
            }
            let img = load_image(&input)?;
            let offsets = match sweep {
                SweepKind::Horizontal => horizontal_sweep(d_max),
                SweepKind::Diagonal => diagonal_sweep(d_max),
            };
            let profile = glcm_mi_profile(&img, levels, &offsets)?;
            println!("dx,dy,mi_bits");
            for o in profile {
                println!("{},{},{}", o.dx, o.dy, o.mi);
            }
            Ok(())
        }
        Command::Report {
            input,
            out,
            alpha,
            lilliefors,
            bins,
            levels,
            patch,
            patch_levels,
            glcm_levels,
            iters,
            kappa,
            dt,
            cond,
        } => {
            let diffusion = merge_diffusion(&file, iters, kappa.as_deref(), dt, cond.as_deref())?;
            let cfg = merge_report(
                &file, diffusion, alpha, lilliefors, bins, levels, patch, patch_levels,
                glcm_levels,
            );
            let doc = run_report(&input, &cfg)?;
            print_or_write(&to_json(&doc)?, out.as_deref())
        }
        Command::Batch {
            dir,
            out_dir,
            workers,
            alpha,
            lilliefors,
            bins,
            iters,
            kappa,
            dt,
            cond,
        } => {
            let diffusion = merge_diffusion(&file, iters, kappa.as_deref(), dt, cond.as_deref())?;
            let cfg = merge_report(
                &file, diffusion, alpha, lilliefors, bins, None, None, None, None,
            );
            let workers = workers
                .or_else(|| {
                    std::env::var(WORKERS_ENV)
                        .ok()
                        .and_then(|v| v.parse().ok())
                })
                .or(file.workers)
                .unwrap_or_else(|| {
                    std::thread::available_parallelism().map_or(1, |n| n.get())
                });
            run_batch(&dir, &out_dir, workers, &cfg)
        }
        Command::MakeComposite {
            hurst,
            size,
            structure,
            amplitude,
            seed,
            out,
        } => {
            let kind = match structure {
                StructureArg::Step => StructureKind::Step,
                StructureArg::Disk => StructureKind::Disk,
                StructureArg::Checker => StructureKind::Checker,
            };
            let c = make_composite(hurst, size, kind, amplitude, RngSeed(seed))?;
            save_by_extension(&c.image, &out)
        }
    }
}

fn describe(t: &nst_core::stats::DistTest) -> String {
    match t {
        nst_core::stats::DistTest::Tested(o) => format!(
            "D={:.5} critical={:.5} n={} -> {}",
            o.statistic,
            o.critical,
            o.n,
            if o.accepted { "accepted" } else { "rejected" }
        ),
        nst_core::stats::DistTest::Degenerate { reason } => format!("skipped ({reason})"),
    }
}

fn run_batch(
    dir: &Path,
    out_dir: &Path,
    workers: usize,
    cfg: &nst_core::report::ReportConfig,
) -> Result<()> {
    let mut inputs: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            matches!(
                p.extension().and_then(|e| e.to_str()),
                Some("pgm") | Some("png") | Some("txf")
            )
        })
        .collect();
    inputs.sort();
    if inputs.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no .pgm/.png/.txf images in {}",
            dir.display()
        )));
    }
    std::fs::create_dir_all(out_dir)?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
    let results: Vec<(PathBuf, Result<ReportDocument>)> = pool.install(|| {
        use rayon::prelude::*;
        inputs
            .par_iter()
            .map(|p| (p.clone(), run_report(p, cfg)))
            .collect()
    });

    let mut reports = Vec::new();
    let mut failures = 0usize;
    for (path, result) in results {
        match result {
            Ok(doc) => {
                let stem = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("image");
                std::fs::write(
                    out_dir.join(format!("{stem}.report.json")),
                    to_json(&doc)?,
                )?;
                reports.push(doc);
            }
            Err(e) => {
                failures += 1;
                eprintln!("error[batch]: {}: {e}", path.display());
            }
        }
    }
    let agg = aggregate(&reports);
    std::fs::write(out_dir.join("aggregate.json"), to_json(&agg)?)?;
    eprintln!(
        "batch: {} reports, {} failures; gaussian raw {:.1}% texture {:.1}% phase {:.1}%",
        agg.images,
        failures,
        agg.gaussian_raw_pass_pct,
        agg.gaussian_texture_pass_pct,
        agg.uniform_phase_pass_pct
    );
    if failures > 0 {
        return Err(Error::InvalidParameter(format!(
            "{failures} image(s) failed"
        )));
    }
    Ok(())
}
