//! `polsmooth` command-line front end.
//!
//! Exit status is 0 on success, 1 when the input data or computation fails
//! and 2 on usage errors. Failures print a single line to stderr:
//!
//! ```text
//! error: <Kind>: <message>
//! ```

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use polsmooth::filter::{self, FilterConfig, OverlapMode, MASK_SET_ID};
use polsmooth::io::{self, RunMetadata};
use polsmooth::sim::{self, SceneSpec};
use polsmooth::viz::{self, Decomposition, RenderOptions};
use polsmooth::{Error, TestConfig};

#[derive(Parser, Debug)]
#[command(name = "polsmooth", version = polsmooth::VERSION, about = "Speckle smoothing for polarimetric SAR covariance images")]
struct Cli {
    /// Worker threads [default: all cores]. Outputs do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic Wishart scene from a JSON scene description.
    Simulate {
        spec: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Hellinger-test filter over Nagao-Matsuyama regions of a 5x5 window.
    Filter(FilterArgs),
    /// Plain moving-average filter, for comparison.
    Boxcar {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Odd window side [implementation choice, same support as the filter]
        #[arg(long, default_value_t = 5, value_parser = odd_window)]
        window: usize,
    },
    /// False-colour PPM rendering.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Decomposition used for the RGB channels
        #[arg(long, value_parser = ["pauli", "sinclair"])]
        mode: String,
        /// Per-channel clipping quantile in (0.5, 1] [implementation choice]
        #[arg(long, default_value_t = viz::DEFAULT_CLIP_QUANTILE, value_parser = clip_quantile)]
        clip: f64,
        /// Display gamma; values are raised to 1/gamma [default: linear]
        #[arg(long, value_parser = positive)]
        gamma: Option<f64>,
    },
    /// Score an image against the scene it was simulated from.
    Metrics {
        input: PathBuf,
        #[arg(long)]
        scene: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the header of a covariance file.
    Info { input: PathBuf },
}

#[derive(Args, Debug)]
struct FilterArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Family-wise significance level [reference configuration]
    #[arg(long, default_value_t = polsmooth::stats::DEFAULT_ALPHA, value_parser = unit_interval)]
    alpha: f64,
    /// Number of simultaneous tests for the Sidak correction [reference configuration: 8 directional regions]
    #[arg(long, default_value_t = polsmooth::stats::DEFAULT_NUM_TESTS, value_parser = count)]
    tests: usize,
    /// Chi-squared degrees of freedom [9 real parameters of a 3x3 Hermitian matrix]
    #[arg(long, default_value_t = polsmooth::stats::WISHART_DOF, value_parser = count)]
    dof: usize,
    /// How accepted regions are pooled [implementation choice: per-region]
    #[arg(long, default_value = "per-region", value_parser = ["per-region", "set-union"])]
    overlap: String,
    /// Number of passes; values above 1 are experimental [reference configuration: 1]
    #[arg(long, default_value_t = 1, value_parser = count)]
    iterations: usize,
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0, 1)"))
    }
}

fn clip_quantile(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.5 && v <= 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not in (0.5, 1]"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = parse_f64(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not positive"))
    }
}

fn count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        Ok(v) => Err(format!("{v} must be at least 1")),
        Err(e) => Err(format!("`{s}`: {e}")),
    }
}

fn odd_window(s: &str) -> Result<usize, String> {
    let v: usize = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if v >= 3 && v % 2 == 1 {
        Ok(v)
    } else {
        Err(format!("{v} is not an odd number >= 3"))
    }
}

fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

struct Run {
    meta: RunMetadata,
}

impl Run {
    fn new(command: &str, threads: Option<u32>, input: Option<&Path>, output: &Path) -> Self {
        Self {
            meta: RunMetadata {
                command: command.into(),
                command_line: std::env::args().collect(),
                software_version: polsmooth::VERSION.into(),
                input: input.map(|p| p.display().to_string()),
                output: output.display().to_string(),
                threads: threads.map(|t| t as usize),
                started_unix: unix_now(),
                ..RunMetadata::default()
            },
        }
    }

    fn finish(mut self) -> polsmooth::Result<()> {
        self.meta.finished_unix = unix_now();
        io::write_metadata(Path::new(&self.meta.output), &self.meta)?;
        Ok(())
    }
}

fn read_scene(path: &Path) -> polsmooth::Result<SceneSpec> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn run(cli: Cli) -> polsmooth::Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Simulate { spec, output } => {
            let mut run = Run::new("simulate", threads, Some(&spec), &output);
            let scene = read_scene(&spec)?;
            let image =
                filter::with_threads(threads.map(|t| t as usize), || sim::generate_scene(&scene))??;
            io::write_cov(&image, &output)?;
            run.meta.seed = Some(scene.seed);
            println!(
                "wrote {} ({}x{}, looks {}, seed {})",
                output.display(),
                image.height(),
                image.width(),
                image.looks(),
                scene.seed
            );
            run.finish()
        }
        Command::Filter(args) => {
            let mut run = Run::new("filter", threads, Some(&args.input), &args.output);
            let image = io::read_cov(&args.input)?;
            let overlap: OverlapMode = args.overlap.parse().map_err(Error::InvalidImage)?;
            let config = FilterConfig {
                test: TestConfig::new(args.alpha, args.tests, args.dof)?,
                overlap,
            };
            let (out, reports) = filter::with_threads(threads.map(|t| t as usize), || {
                filter::filter_image_repeated(&image, &config, args.iterations)
            })??;
            io::write_cov(&out, &args.output)?;
            let means: Vec<f64> = reports.iter().map(|r| r.mean_accepted()).collect();
            let m = &mut run.meta;
            m.alpha = Some(args.alpha);
            m.eta = Some(config.test.corrected_level()?);
            m.num_tests = Some(args.tests);
            m.dof = Some(args.dof);
            m.statistic = Some("hellinger".into());
            m.mask_set = Some(MASK_SET_ID.into());
            m.overlap = Some(overlap.as_str().into());
            m.iterations = Some(args.iterations);
            m.mean_accepted_regions = Some(means.clone());
            println!(
                "wrote {} ({}x{}, mean accepted regions per pass {:?})",
                args.output.display(),
                out.height(),
                out.width(),
                means
            );
            run.finish()
        }
        Command::Boxcar {
            input,
            output,
            window,
        } => {
            let mut run = Run::new("boxcar", threads, Some(&input), &output);
            let image = io::read_cov(&input)?;
            let out = filter::with_threads(threads.map(|t| t as usize), || {
                filter::boxcar_filter(&image, window)
            })??;
            io::write_cov(&out, &output)?;
            run.meta.window = Some(window);
            println!(
                "wrote {} ({}x{}, window {window})",
                output.display(),
                out.height(),
                out.width()
            );
            run.finish()
        }
        Command::Render {
            input,
            output,
            mode,
            clip,
            gamma,
        } => {
            let mut run = Run::new("render", threads, Some(&input), &output);
            let image = io::read_cov(&input)?;
            let mode: Decomposition = mode.parse().map_err(Error::InvalidImage)?;
            let options = RenderOptions {
                mode,
                clip_quantile: clip,
                gamma,
            };
            let (rgb, stats) = filter::with_threads(threads.map(|t| t as usize), || {
                viz::render_with(&image, &options)
            })??;
            rgb.write_ppm(&output)?;
            let m = &mut run.meta;
            m.mode = Some(mode.as_str().into());
            m.clip_quantile = Some(clip);
            m.clip_high = Some(stats.clip_high);
            m.gamma = gamma;
            println!(
                "wrote {} ({}x{}, {})",
                output.display(),
                rgb.height,
                rgb.width,
                mode.as_str()
            );
            run.finish()
        }
        Command::Metrics {
            input,
            scene,
            output,
        } => {
            let mut run = Run::new("metrics", threads, Some(&input), &output);
            let image = io::read_cov(&input)?;
            let spec = read_scene(&scene)?;
            let report = sim::evaluate(&image, &spec)?;
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            std::fs::write(&output, text)?;
            run.meta.seed = Some(spec.seed);
            println!("wrote {}", output.display());
            run.finish()
        }
        Command::Info { input } => {
            let image = io::read_cov(&input)?;
            println!(
                "height={} width={} looks={}",
                image.height(),
                image.width(),
                image.looks()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid usage");
            eprintln!("error: Usage: {}", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", e.kind());
            ExitCode::from(1)
        }
    }
}
