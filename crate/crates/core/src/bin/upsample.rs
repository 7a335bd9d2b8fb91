use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lidar_upsample::eval::{d1_metrics, format_table, render_error_map, OutlierRule};
use lidar_upsample::io;
use lidar_upsample::pipeline::{run_pipeline, run_sweep, Method, RunConfig};
use lidar_upsample::projection::RangeMode;
use lidar_upsample::synth::{gen_synthetic, write_frame, SyntheticScene};
use lidar_upsample::Result;

#[derive(Parser)]
#[command(name = "upsample", version, about = "Dense depth maps from sparse LIDAR scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Upsample every frame with one method and evaluate against ground truth.
    Run(RunArgs),
    /// Evaluate several methods over a range of mask sizes.
    Sweep(SweepArgs),
    /// Write synthetic frames with exact ground truth.
    Synth(SynthArgs),
    /// Score a depth PNG against a ground-truth disparity PNG.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset root with velodyne/, calib/, disp_noc_0/ and obj_map/.
    #[arg(long)]
    frames_dir: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Mask side length (odd).
    #[arg(long)]
    mr: Option<usize>,
    #[arg(long)]
    thr: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    min_pts: Option<usize>,
    #[arg(long)]
    idw_p: Option<f64>,
    /// Stereo baseline in meters.
    #[arg(long)]
    baseline: Option<f64>,
    /// KITTI camera index (2 or 3).
    #[arg(long)]
    camera: Option<u8>,
    #[arg(long, value_enum)]
    range: Option<RangeArg>,
    /// Copy single-sample pixels instead of re-estimating them.
    #[arg(long)]
    passthrough: bool,
    /// Frame-level worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Seed recorded in the run manifest.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RangeArg {
    Depth,
    Euclidean,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: ConfigArgs,
    #[arg(long)]
    method: Option<Method>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: ConfigArgs,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', default_value = "ave,min,max,med,nea,idw,kri,bf,bfstar")]
    methods: Vec<Method>,
    /// Comma-separated mask sizes; an empty value gives an empty table.
    #[arg(long, value_delimiter = ',', default_value = "3,5,7,9,11,13,15,17,19,21")]
    mr_values: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SceneKind {
    Street,
    StepEdge,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "street")]
    scene: SceneKind,
    #[arg(long, default_value_t = 1)]
    frames: usize,
    /// Foreground boxes in the street scene.
    #[arg(long, default_value_t = 2)]
    boxes: usize,
    /// Fraction of non-sky pixels that receive a sample.
    #[arg(long, default_value_t = 0.07)]
    rate: f64,
    /// Seed of the first frame; frame i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EvalArgs {
    /// Estimated depth, 16-bit PNG.
    #[arg(long)]
    est: PathBuf,
    /// Ground-truth disparity, 16-bit PNG.
    #[arg(long)]
    gt: PathBuf,
    /// Calibration file providing the focal length (and baseline via P3).
    #[arg(long)]
    calib: PathBuf,
    #[arg(long)]
    fg_mask: Option<PathBuf>,
    #[arg(long)]
    baseline: Option<f64>,
    /// Optional color error image.
    #[arg(long)]
    error_map: Option<PathBuf>,
}

fn build_config(c: &ConfigArgs) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &c.frames_dir {
        cfg.frames_dir = Some(v.clone());
    }
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    if let Some(v) = c.mr {
        cfg.mr = v;
    }
    if let Some(v) = c.thr {
        cfg.params.thr = v;
    }
    if let Some(v) = c.epsilon {
        cfg.params.epsilon = v;
    }
    if let Some(v) = c.min_pts {
        cfg.params.min_pts = v;
    }
    if let Some(v) = c.idw_p {
        cfg.params.idw_p = v;
    }
    if c.baseline.is_some() {
        cfg.baseline = c.baseline;
    }
    if let Some(v) = c.camera {
        cfg.camera = v;
    }
    if let Some(r) = c.range {
        cfg.range = match r {
            RangeArg::Depth => RangeMode::Depth,
            RangeArg::Euclidean => RangeMode::Euclidean,
        };
    }
    cfg.params.passthrough_case1 |= c.passthrough;
    if c.jobs.is_some() {
        cfg.jobs = c.jobs;
    }
    if c.seed.is_some() {
        cfg.seed = c.seed;
    }
    Ok(cfg)
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = build_config(&args.common)?;
    if let Some(m) = args.method {
        cfg.method = m;
    }
    let summary = run_pipeline(&cfg)?;
    for (id, msg) in summary.failures() {
        eprintln!("frame {id} skipped: {msg}");
    }
    let rows: Vec<(String, _)> = summary
        .frames
        .iter()
        .filter_map(|f| f.result.as_ref().ok().and_then(|r| r.map(|r| (f.id.clone(), r))))
        .chain(summary.report.map(|r| ("all".to_string(), r)))
        .collect();
    if !rows.is_empty() {
        print!("{}", format_table(&rows));
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = build_config(&args.common)?;
    let mr_values = args
        .mr_values
        .iter()
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| lidar_upsample::Error::InvalidArgument(format!("bad mask size {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let table = run_sweep(&cfg, &args.methods, &mr_values)?;
    for (id, msg) in &table.failures {
        eprintln!("frame {id} skipped: {msg}");
    }
    println!("{:<8} {:>4} {:>8} {:>8} {:>8} {:>8}", "method", "mr", "D1-fg", "D1-bg", "D1-all", "density");
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for row in &table.rows {
        let r = row.report.as_ref();
        println!(
            "{:<8} {:>4} {:>8} {:>8} {:>8} {:>8}",
            row.method.name(),
            row.mr,
            opt(r.and_then(|r| r.d1_fg())),
            opt(r.and_then(|r| r.d1_bg())),
            opt(r.map(|r| r.d1_all())),
            opt(r.map(|r| r.density())),
        );
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    for i in 0..args.frames {
        let seed = args.seed.wrapping_add(i as u64);
        let scene = match args.scene {
            SceneKind::Street => SyntheticScene::street(args.boxes, args.rate, seed),
            SceneKind::StepEdge => SyntheticScene::step_edge(args.rate, seed),
        };
        let frame = gen_synthetic(&scene)?;
        write_frame(&scene, &frame, &args.out, &format!("{i:06}"))?;
    }
    println!("wrote {} frame(s) to {}", args.frames, args.out.display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let est = io::load_depth_image(&args.est)?;
    let gt = io::load_groundtruth_disparity(&args.gt)?;
    let fg = args.fg_mask.as_ref().map(io::load_fg_mask).transpose()?;
    let mut calib = io::load_calibration(&args.calib)?;
    if let Some(b) = args.baseline {
        calib = calib.with_baseline(b)?;
    }
    let baseline = calib.require_baseline()?;
    let rule = OutlierRule::default();
    let report = d1_metrics(&est, &gt, fg.as_ref(), baseline, calib.focal(), &rule)?;
    let id = args.est.file_stem().map_or_else(|| "frame".into(), |s| s.to_string_lossy().into_owned());
    print!("{}", format_table(&[(id, report)]));
    if let Some(path) = &args.error_map {
        render_error_map(&est, &gt, baseline, calib.focal(), &rule, path)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Synth(a) => synth(a),
        Command::Eval(a) => eval(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
