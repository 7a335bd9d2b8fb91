//! Per-frame orchestration, mask-size sweeps and run artifacts.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bfstar::{BfStar, BfStarParams};
use crate::delaunay::{interpolate_delaunay, DelaunayMode, Triangulation};
use crate::error::{Error, Result};
use crate::eval::{self, d1_metrics, EvalReport, FgMask, OutlierRule, ReportRow};
use crate::interp::{BasicOp, Bilateral, Idw, IdwParams, Kriging, VariogramParams};
use crate::io::{self, Camera, DisparityMap};
use crate::projection::{compute_horizon_line, project, RangeMode, SparseDepthMap};
use crate::window::{check_mask_size, density_stats, upsample_with, DenseDepthMap, DensityStats, UpsampleOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ave,
    Min,
    Max,
    Med,
    Nea,
    Idw,
    Kri,
    Bf,
    BfStar,
    DelLin,
    DelNea,
    DelNat,
}

impl Method {
    pub const ALL: [Method; 12] = [
        Method::Ave,
        Method::Min,
        Method::Max,
        Method::Med,
        Method::Nea,
        Method::Idw,
        Method::Kri,
        Method::Bf,
        Method::BfStar,
        Method::DelLin,
        Method::DelNea,
        Method::DelNat,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ave => "ave",
            Method::Min => "min",
            Method::Max => "max",
            Method::Med => "med",
            Method::Nea => "nea",
            Method::Idw => "idw",
            Method::Kri => "kri",
            Method::Bf => "bf",
            Method::BfStar => "bfstar",
            Method::DelLin => "del_lin",
            Method::DelNea => "del_nea",
            Method::DelNat => "del_nat",
        }
    }

    /// Triangulation methods ignore the mask size.
    pub fn delaunay_mode(self) -> Option<DelaunayMode> {
        match self {
            Method::DelLin => Some(DelaunayMode::Linear),
            Method::DelNea => Some(DelaunayMode::Nearest),
            Method::DelNat => Some(DelaunayMode::Natural),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!("unknown method {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Tunables shared by all window methods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodParams {
    pub idw_p: f64,
    /// Fixed variogram for Kriging; per-window parameters when absent.
    pub variogram: Option<VariogramParams>,
    pub epsilon: f64,
    pub min_pts: usize,
    pub thr: f64,
    pub passthrough_case1: bool,
}

impl Default for MethodParams {
    fn default() -> Self {
        let bf = BfStarParams::default();
        MethodParams {
            idw_p: 2.0,
            variogram: None,
            epsilon: bf.epsilon,
            min_pts: bf.min_pts,
            thr: bf.thr,
            passthrough_case1: false,
        }
    }
}

impl MethodParams {
    pub fn validate(&self) -> Result<()> {
        IdwParams::new(self.idw_p)?;
        self.bfstar()?;
        if let Some(v) = self.variogram {
            VariogramParams::new(v.nugget, v.sill, v.range_len)?;
        }
        Ok(())
    }

    pub fn bfstar(&self) -> Result<BfStarParams> {
        BfStarParams::new(self.epsilon, self.min_pts, self.thr)
    }
}

/// Dense estimate of `map` with one method. The map must carry a horizon.
pub fn estimate_dense(map: &SparseDepthMap, method: Method, mr: usize, params: &MethodParams) -> Result<DenseDepthMap> {
    let horizon = map.horizon_row().ok_or_else(|| Error::InvalidArgument("sparse map has no horizon row".into()))?;
    if let Some(mode) = method.delaunay_mode() {
        let tri = Triangulation::from_sparse_map(map)?;
        return Ok(interpolate_delaunay(&tri, mode, map.width(), map.height(), horizon));
    }
    let options = UpsampleOptions {
        passthrough_case1: params.passthrough_case1,
    };
    match method {
        Method::Ave => upsample_with(map, &BasicOp::Average, mr, options),
        Method::Min => upsample_with(map, &BasicOp::Min, mr, options),
        Method::Max => upsample_with(map, &BasicOp::Max, mr, options),
        Method::Med => upsample_with(map, &BasicOp::Median, mr, options),
        Method::Nea => upsample_with(map, &BasicOp::Nearest, mr, options),
        Method::Idw => upsample_with(map, &Idw(IdwParams::new(params.idw_p)?), mr, options),
        Method::Kri => upsample_with(map, &Kriging { variogram: params.variogram }, mr, options),
        Method::Bf => upsample_with(map, &Bilateral, mr, options),
        Method::BfStar => upsample_with(map, &BfStar(params.bfstar()?), mr, options),
        Method::DelLin | Method::DelNea | Method::DelNat => unreachable!("handled above"),
    }
}

/// Input files of one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    pub id: String,
    pub scan: PathBuf,
    pub calib: PathBuf,
    #[serde(default)]
    pub disparity: Option<PathBuf>,
    #[serde(default)]
    pub fg_mask: Option<PathBuf>,
}

/// Everything a run needs. Loadable from TOML; CLI flags override fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Root laid out as `velodyne/ID.bin`, `calib/ID.txt`, and optionally
    /// `disp_noc_0/ID_10.png` and `obj_map/ID_10.png`.
    pub frames_dir: Option<PathBuf>,
    pub frames: Vec<FrameSpec>,
    pub method: Method,
    pub mr: usize,
    pub params: MethodParams,
    /// Overrides the baseline derived from the calibration.
    pub baseline: Option<f64>,
    /// KITTI camera index, 2 or 3.
    pub camera: u8,
    pub range: RangeMode,
    /// Image size when a frame has no ground truth to take it from.
    pub image_width: usize,
    pub image_height: usize,
    pub outlier: OutlierRule,
    pub out: PathBuf,
    /// Frame-level worker threads; all cores when absent.
    pub jobs: Option<usize>,
    /// Seed of the data the run consumes, echoed into the manifest.
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            frames_dir: None,
            frames: Vec::new(),
            method: Method::BfStar,
            mr: 13,
            params: MethodParams::default(),
            baseline: None,
            camera: 2,
            range: RangeMode::Depth,
            image_width: 1242,
            image_height: 375,
            outlier: OutlierRule::default(),
            out: PathBuf::from("out"),
            jobs: None,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Checks everything that does not need the file system.
    pub fn validate(&self) -> Result<()> {
        check_mask_size(self.mr)?;
        self.params.validate()?;
        Camera::from_index(self.camera)?;
        if let Some(b) = self.baseline {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!("baseline must be positive, got {b}")));
            }
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("jobs must be at least 1".into()));
        }
        if self.image_width == 0 || self.image_height == 0 {
            return Err(Error::InvalidArgument("image size must be positive".into()));
        }
        Ok(())
    }

    /// Explicit frames followed by those discovered under `frames_dir`,
    /// after checking that every referenced file exists.
    pub fn resolve_frames(&self) -> Result<Vec<FrameSpec>> {
        let mut frames = self.frames.clone();
        if let Some(dir) = &self.frames_dir {
            frames.extend(discover_frames(dir)?);
        }
        for f in &frames {
            let paths = [Some(&f.scan), Some(&f.calib), f.disparity.as_ref(), f.fg_mask.as_ref()];
            for p in paths.into_iter().flatten() {
                if !p.is_file() {
                    return Err(Error::InvalidArgument(format!("frame {}: missing file {}", f.id, p.display())));
                }
            }
        }
        Ok(frames)
    }
}

/// Lists the frames of a directory laid out as described on
/// [`RunConfig::frames_dir`], sorted by id.
pub fn discover_frames(root: &Path) -> Result<Vec<FrameSpec>> {
    let scans = root.join("velodyne");
    let entries = fs::read_dir(&scans).map_err(|e| Error::io(&scans, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&scans, e))?.path();
        if path.extension().is_some_and(|e| e == "bin") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    Ok(ids
        .into_iter()
        .map(|id| {
            let p = crate::synth::frame_paths(root, &id);
            FrameSpec {
                scan: p.scan,
                calib: p.calib,
                disparity: p.disparity.is_file().then_some(p.disparity),
                fg_mask: p.fg_mask.is_file().then_some(p.fg_mask),
                id,
            }
        })
        .collect())
}

/// A frame projected and ready for estimation.
#[derive(Debug, Clone)]
pub struct LoadedFrame {
    pub id: String,
    pub sparse: SparseDepthMap,
    pub baseline: Option<f64>,
    pub focal: f64,
    pub disparity: Option<DisparityMap>,
    pub fg: Option<FgMask>,
}

pub fn load_frame(spec: &FrameSpec, cfg: &RunConfig) -> Result<LoadedFrame> {
    let cloud = io::load_point_cloud(&spec.scan)?;
    let mut calib = io::load_calibration(&spec.calib)?.with_camera(Camera::from_index(cfg.camera)?)?;
    if let Some(b) = cfg.baseline {
        calib = calib.with_baseline(b)?;
    }
    let disparity = spec.disparity.as_ref().map(io::load_groundtruth_disparity).transpose()?;
    let fg = spec.fg_mask.as_ref().map(io::load_fg_mask).transpose()?;
    let (w, h) = disparity
        .as_ref()
        .map_or((cfg.image_width, cfg.image_height), |d| (d.width(), d.height()));
    let mut sparse = project(&cloud, &calib, w, h, cfg.range);
    let horizon = compute_horizon_line(&sparse)?;
    sparse.set_horizon_row(horizon);
    Ok(LoadedFrame {
        id: spec.id.clone(),
        sparse,
        baseline: calib.baseline,
        focal: calib.focal(),
        disparity,
        fg,
    })
}

impl LoadedFrame {
    pub fn evaluate(&self, est: &DenseDepthMap, rule: &OutlierRule) -> Result<Option<EvalReport>> {
        let Some(gt) = &self.disparity else { return Ok(None) };
        let baseline = self.require_baseline()?;
        d1_metrics(est, gt, self.fg.as_ref(), baseline, self.focal, rule).map(Some)
    }

    fn require_baseline(&self) -> Result<f64> {
        self.baseline.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "frame {}: stereo baseline unknown; set `baseline` or provide P3 in the calibration",
                self.id
            ))
        })
    }
}

/// Result of one frame in a run.
#[derive(Debug, Clone)]
pub struct FrameOutcome {
    pub id: String,
    /// Metrics when ground truth was available, or the failure message.
    pub result: std::result::Result<Option<EvalReport>, String>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub frames: Vec<FrameOutcome>,
    /// Pixel-weighted aggregate over frames with ground truth.
    pub report: Option<EvalReport>,
}

impl RunSummary {
    pub fn failures(&self) -> impl Iterator<Item = (&str, &str)> {
        self.frames
            .iter()
            .filter_map(|f| f.result.as_ref().err().map(|e| (f.id.as_str(), e.as_str())))
    }
}

struct FrameArtifacts {
    depth: DenseDepthMap,
    report: Option<EvalReport>,
    error_image: Option<image::RgbImage>,
}

fn process_frame(spec: &FrameSpec, cfg: &RunConfig) -> Result<FrameArtifacts> {
    let frame = load_frame(spec, cfg)?;
    let depth = estimate_dense(&frame.sparse, cfg.method, cfg.mr, &cfg.params)?;
    let report = frame.evaluate(&depth, &cfg.outlier)?;
    let error_image = match (&frame.disparity, report) {
        (Some(gt), Some(_)) => Some(eval::error_image(&depth, gt, frame.require_baseline()?, frame.focal, &cfg.outlier)?),
        _ => None,
    };
    Ok(FrameArtifacts { depth, report, error_image })
}

fn thread_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn save_rgb(img: &image::RgbImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: Option<u64>,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepEcho<'a>>,
    frames: Vec<ManifestFrame<'a>>,
}

#[derive(Serialize)]
struct SweepEcho<'a> {
    methods: Vec<&'static str>,
    mr_values: &'a [usize],
}

#[derive(Serialize)]
struct ManifestFrame<'a> {
    id: &'a str,
    ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
}

fn write_manifest(path: &Path, m: &Manifest<'_>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(m).map_err(|e| Error::Config(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn flush_csv(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs one method over every frame. Writes `depth/ID.png`,
/// `error/ID.png` and `report.csv` (one row per evaluated frame plus an
/// `all` row) and `manifest.json` under `cfg.out`.
///
/// A failing frame is recorded and skipped; the run fails only when every
/// frame fails.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let frames = cfg.resolve_frames()?;
    if frames.is_empty() {
        return Err(Error::InvalidArgument("no frames to process".into()));
    }
    let pool = thread_pool(cfg.jobs)?;
    let depth_dir = cfg.out.join("depth");
    let error_dir = cfg.out.join("error");
    create_dir(&depth_dir)?;

    let csv_path = cfg.out.join("report.csv");
    let mut csv = csv_writer(&csv_path)?;
    let mut outcomes = Vec::with_capacity(frames.len());
    let mut reports = Vec::new();
    let chunk = 2 * pool.current_num_threads().max(1);
    for batch in frames.chunks(chunk) {
        let results: Vec<Result<FrameArtifacts>> = pool.install(|| batch.par_iter().map(|f| process_frame(f, cfg)).collect());
        // Single ordered writer.
        for (spec, res) in batch.iter().zip(results) {
            let written = res.and_then(|a| {
                io::write_depth_image(&a.depth, depth_dir.join(format!("{}.png", spec.id)))?;
                if let Some(img) = &a.error_image {
                    create_dir(&error_dir)?;
                    save_rgb(img, &error_dir.join(format!("{}.png", spec.id)))?;
                }
                if let Some(r) = &a.report {
                    csv.serialize(ReportRow::new(&spec.id, r))?;
                }
                Ok(a.report)
            });
            if let Ok(Some(r)) = &written {
                reports.push(*r);
            }
            outcomes.push(FrameOutcome {
                id: spec.id.clone(),
                result: written.map_err(|e| e.to_string()),
            });
        }
    }
    let report = (!reports.is_empty()).then(|| EvalReport::aggregate(&reports));
    if let Some(r) = &report {
        csv.serialize(ReportRow::new("all", r))?;
    }
    flush_csv(csv, &csv_path)?;

    let manifest = Manifest {
        tool: "upsample",
        version: env!("CARGO_PKG_VERSION"),
        command: "run",
        seed: cfg.seed,
        config: cfg,
        sweep: None,
        frames: outcomes
            .iter()
            .map(|o| ManifestFrame { id: &o.id, ok: o.result.is_ok(), error: o.result.as_ref().err().map(String::as_str) })
            .collect(),
    };
    write_manifest(&cfg.out.join("manifest.json"), &manifest)?;

    let summary = RunSummary { frames: outcomes, report };
    if summary.failures().count() == summary.frames.len() {
        let (id, msg) = summary.failures().next().expect("at least one frame");
        return Err(Error::Degenerate(format!("all frames failed; first failure ({id}): {msg}")));
    }
    Ok(summary)
}

/// Aggregated metrics of one (method, mask size) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub mr: usize,
    /// Absent when no frame had ground truth.
    pub report: Option<EvalReport>,
}

/// Window statistics of one mask size, averaged over frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepDensity {
    pub mr: usize,
    pub n_max: usize,
    pub n_ave: f64,
    pub d_ens: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub density: Vec<SweepDensity>,
    pub failures: Vec<(String, String)>,
}

#[derive(Default)]
struct FrameSweep {
    reports: BTreeMap<(Method, usize), EvalReport>,
    density: Vec<DensityStats>,
}

fn sweep_frame(spec: &FrameSpec, cfg: &RunConfig, methods: &[Method], mr_values: &[usize]) -> Result<FrameSweep> {
    let frame = load_frame(spec, cfg)?;
    let mut out = FrameSweep::default();
    for &mr in mr_values {
        out.density.push(density_stats(&frame.sparse, mr)?);
    }
    for &method in methods {
        if method.delaunay_mode().is_some() {
            let dense = estimate_dense(&frame.sparse, method, 1, &cfg.params)?;
            if let Some(r) = frame.evaluate(&dense, &cfg.outlier)? {
                for &mr in mr_values {
                    out.reports.insert((method, mr), r);
                }
            }
            continue;
        }
        for &mr in mr_values {
            let dense = estimate_dense(&frame.sparse, method, mr, &cfg.params)?;
            if let Some(r) = frame.evaluate(&dense, &cfg.outlier)? {
                out.reports.insert((method, mr), r);
            }
        }
    }
    Ok(out)
}

/// Evaluates every (method, mr) pair over all frames. Writes `sweep.csv`
/// (one row per pair), `density.csv` (one row per mr) and `manifest.json`.
pub fn run_sweep(cfg: &RunConfig, methods: &[Method], mr_values: &[usize]) -> Result<SweepTable> {
    cfg.validate()?;
    for &mr in mr_values {
        check_mask_size(mr)?;
    }
    create_dir(&cfg.out)?;
    let mut table = SweepTable::default();
    let mut frame_ids = Vec::new();
    if !mr_values.is_empty() && !methods.is_empty() {
        let frames = cfg.resolve_frames()?;
        if frames.is_empty() {
            return Err(Error::InvalidArgument("no frames to process".into()));
        }
        let pool = thread_pool(cfg.jobs)?;
        let results: Vec<Result<FrameSweep>> =
            pool.install(|| frames.par_iter().map(|f| sweep_frame(f, cfg, methods, mr_values)).collect());
        let mut ok = Vec::new();
        for (spec, res) in frames.iter().zip(results) {
            frame_ids.push((spec.id.clone(), res.as_ref().err().map(|e| e.to_string())));
            match res {
                Ok(s) => ok.push(s),
                Err(e) => table.failures.push((spec.id.clone(), e.to_string())),
            }
        }
        if ok.is_empty() {
            let (id, msg) = &table.failures[0];
            return Err(Error::Degenerate(format!("all frames failed; first failure ({id}): {msg}")));
        }
        for &method in methods {
            for &mr in mr_values {
                let reports: Vec<&EvalReport> = ok.iter().filter_map(|s| s.reports.get(&(method, mr))).collect();
                table.rows.push(SweepRow {
                    method,
                    mr,
                    report: (!reports.is_empty()).then(|| EvalReport::aggregate(reports)),
                });
            }
        }
        for (k, &mr) in mr_values.iter().enumerate() {
            let n = ok.len() as f64;
            table.density.push(SweepDensity {
                mr,
                n_max: ok.iter().map(|s| s.density[k].n_max).max().unwrap_or(0),
                n_ave: ok.iter().map(|s| s.density[k].n_ave).sum::<f64>() / n,
                d_ens: ok.iter().map(|s| s.density[k].d_ens).sum::<f64>() / n,
            });
        }
    }

    let sweep_path = cfg.out.join("sweep.csv");
    let mut w = csv_writer(&sweep_path)?;
    w.write_record(["method", "mr", "d1_fg", "d1_bg", "d1_all", "density"])?;
    for row in &table.rows {
        let opt = |x: Option<f64>| x.map(eval::fmt_pct).unwrap_or_default();
        let r = row.report.as_ref();
        w.write_record([
            row.method.name().to_string(),
            row.mr.to_string(),
            opt(r.and_then(EvalReport::d1_fg)),
            opt(r.and_then(EvalReport::d1_bg)),
            opt(r.map(EvalReport::d1_all)),
            opt(r.map(EvalReport::density)),
        ])?;
    }
    flush_csv(w, &sweep_path)?;

    let density_path = cfg.out.join("density.csv");
    let mut w = csv_writer(&density_path)?;
    w.write_record(["mr", "n_max", "n_ave", "d_ens"])?;
    for d in &table.density {
        w.write_record([d.mr.to_string(), d.n_max.to_string(), format!("{:.4}", d.n_ave), eval::fmt_pct(d.d_ens)])?;
    }
    flush_csv(w, &density_path)?;

    let manifest = Manifest {
        tool: "upsample",
        version: env!("CARGO_PKG_VERSION"),
        command: "sweep",
        seed: cfg.seed,
        config: cfg,
        sweep: Some(SweepEcho { methods: methods.iter().map(|m| m.name()).collect(), mr_values }),
        frames: frame_ids
            .iter()
            .map(|(id, err)| ManifestFrame { id, ok: err.is_none(), error: err.as_deref() })
            .collect(),
    };
    write_manifest(&cfg.out.join("manifest.json"), &manifest)?;
    Ok(table)
}
