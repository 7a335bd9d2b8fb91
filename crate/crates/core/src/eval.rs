//! KITTI-style evaluation: disparity/depth conversion, D1 outlier rates,
//! density, and color error maps.

use std::path::Path;

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::DisparityMap;
use crate::window::DenseDepthMap;

/// Foreground (object) membership per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FgMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl FgMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "mask has {} values for a {width}x{height} image",
                mask.len()
            )));
        }
        Ok(FgMask { width, height, mask })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.mask[v * self.width + u]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }
}

fn check_stereo(baseline: f64, focal: f64) -> Result<()> {
    if !(baseline > 0.0 && focal > 0.0 && baseline.is_finite() && focal.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "baseline and focal length must be positive, got B={baseline} f={focal}"
        )));
    }
    Ok(())
}

/// `depth = B * f / disparity`, pixel by pixel.
pub fn disparity_to_depth(d: &DisparityMap, baseline: f64, focal: f64) -> Result<DenseDepthMap> {
    check_stereo(baseline, focal)?;
    let bf = baseline * focal;
    let values: Vec<Option<f64>> = d.values().iter().map(|x| x.map(|disp| bf / disp)).collect();
    let horizon = values
        .iter()
        .position(Option::is_some)
        .map_or(d.height(), |i| i / d.width().max(1));
    DenseDepthMap::from_values(d.width(), d.height(), horizon, values)
}

/// `disparity = B * f / depth`, pixel by pixel.
pub fn depth_to_disparity(m: &DenseDepthMap, baseline: f64, focal: f64) -> Result<DisparityMap> {
    check_stereo(baseline, focal)?;
    let bf = baseline * focal;
    DisparityMap::new(
        m.width(),
        m.height(),
        m.values().iter().map(|x| x.map(|depth| bf / depth)).collect(),
    )
}

/// A pixel is an outlier when its disparity error exceeds both thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierRule {
    /// Pixels.
    pub abs_px: f64,
    /// Fraction of the true disparity.
    pub rel: f64,
}

impl Default for OutlierRule {
    fn default() -> Self {
        OutlierRule { abs_px: 3.0, rel: 0.05 }
    }
}

impl OutlierRule {
    pub fn is_outlier(&self, d_est: f64, d_gt: f64) -> bool {
        let err = (d_est - d_gt).abs();
        err > self.abs_px && err > self.rel * d_gt
    }

    /// Error normalized so that 1.0 sits on the outlier boundary.
    pub fn normalized_error(&self, d_est: f64, d_gt: f64) -> f64 {
        let err = (d_est - d_gt).abs();
        (err / self.abs_px).min(err / d_gt.abs() / self.rel)
    }
}

/// Raw pixel tallies behind an [`EvalReport`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PixelCounts {
    pub fg_total: u64,
    pub fg_outliers: u64,
    pub bg_total: u64,
    pub bg_outliers: u64,
    pub all_total: u64,
    pub all_outliers: u64,
    /// Valid ground-truth pixels carrying an estimate.
    pub estimated: u64,
}

/// D1 outlier rates and density, in percent, for one frame or a set of
/// frames. Aggregation weights every ground-truth pixel equally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport {
    pub counts: PixelCounts,
    /// Whether foreground masks were available for every frame.
    pub has_fg: bool,
    pub frame_count: usize,
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn d1_fg(&self) -> Option<f64> {
        self.has_fg.then(|| pct(self.counts.fg_outliers, self.counts.fg_total))
    }

    pub fn d1_bg(&self) -> Option<f64> {
        self.has_fg.then(|| pct(self.counts.bg_outliers, self.counts.bg_total))
    }

    pub fn d1_all(&self) -> f64 {
        pct(self.counts.all_outliers, self.counts.all_total)
    }

    pub fn density(&self) -> f64 {
        pct(self.counts.estimated, self.counts.all_total)
    }

    /// Pixel-weighted combination of several reports.
    pub fn aggregate<'a>(reports: impl IntoIterator<Item = &'a EvalReport>) -> EvalReport {
        let mut out = EvalReport {
            counts: PixelCounts::default(),
            has_fg: true,
            frame_count: 0,
        };
        for r in reports {
            let (c, o) = (&r.counts, &mut out.counts);
            o.fg_total += c.fg_total;
            o.fg_outliers += c.fg_outliers;
            o.bg_total += c.bg_total;
            o.bg_outliers += c.bg_outliers;
            o.all_total += c.all_total;
            o.all_outliers += c.all_outliers;
            o.estimated += c.estimated;
            out.has_fg &= r.has_fg;
            out.frame_count += r.frame_count;
        }
        if out.frame_count == 0 {
            out.has_fg = false;
        }
        out
    }
}

/// Scores `est` (meters) against ground-truth disparity. Ground-truth pixels
/// without an estimate count as outliers.
pub fn d1_metrics(
    est: &DenseDepthMap,
    gt: &DisparityMap,
    fg: Option<&FgMask>,
    baseline: f64,
    focal: f64,
    rule: &OutlierRule,
) -> Result<EvalReport> {
    check_stereo(baseline, focal)?;
    if (est.width(), est.height()) != (gt.width(), gt.height()) {
        return Err(Error::InvalidArgument(format!(
            "estimate is {}x{} but ground truth is {}x{}",
            est.width(),
            est.height(),
            gt.width(),
            gt.height()
        )));
    }
    if let Some(m) = fg {
        if (m.width(), m.height()) != (gt.width(), gt.height()) {
            return Err(Error::InvalidArgument(format!(
                "foreground mask is {}x{} but ground truth is {}x{}",
                m.width(),
                m.height(),
                gt.width(),
                gt.height()
            )));
        }
    }
    let bf = baseline * focal;
    let mut c = PixelCounts::default();
    for (i, (d_gt, depth)) in gt.values().iter().zip(est.values()).enumerate() {
        let Some(d_gt) = *d_gt else { continue };
        let outlier = match depth {
            Some(z) => {
                c.estimated += 1;
                rule.is_outlier(bf / z, d_gt)
            }
            None => true,
        };
        let o = u64::from(outlier);
        c.all_total += 1;
        c.all_outliers += o;
        if let Some(m) = fg {
            if m.as_slice()[i] {
                c.fg_total += 1;
                c.fg_outliers += o;
            } else {
                c.bg_total += 1;
                c.bg_outliers += o;
            }
        }
    }
    Ok(EvalReport {
        counts: c,
        has_fg: fg.is_some(),
        frame_count: 1,
    })
}

/// Color ramp of the KITTI stereo dev-kit, keyed by normalized error.
const ERROR_RAMP: [(f64, [u8; 3]); 10] = [
    (0.0625, [49, 54, 149]),
    (0.125, [69, 117, 180]),
    (0.25, [116, 173, 209]),
    (0.5, [171, 217, 233]),
    (1.0, [224, 243, 248]),
    (2.0, [254, 224, 144]),
    (4.0, [253, 174, 97]),
    (8.0, [244, 109, 67]),
    (16.0, [215, 48, 39]),
    (f64::INFINITY, [165, 0, 38]),
];

/// Ground-truth pixels with no estimate.
pub const MISSING_ESTIMATE_COLOR: [u8; 3] = [255, 0, 255];

pub fn error_color(normalized_error: f64) -> [u8; 3] {
    ERROR_RAMP
        .iter()
        .find(|(upper, _)| normalized_error < *upper)
        .map_or(ERROR_RAMP[9].1, |(_, c)| *c)
}

/// Renders the per-pixel disparity error. Pixels without ground truth are
/// black.
pub fn error_image(
    est: &DenseDepthMap,
    gt: &DisparityMap,
    baseline: f64,
    focal: f64,
    rule: &OutlierRule,
) -> Result<RgbImage> {
    check_stereo(baseline, focal)?;
    if (est.width(), est.height()) != (gt.width(), gt.height()) {
        return Err(Error::InvalidArgument("estimate and ground truth differ in size".into()));
    }
    let bf = baseline * focal;
    let mut img = RgbImage::new(gt.width() as u32, gt.height() as u32);
    for v in 0..gt.height() {
        for u in 0..gt.width() {
            let color = match (gt.get(u, v), est.get(u, v)) {
                (None, _) => [0, 0, 0],
                (Some(_), None) => MISSING_ESTIMATE_COLOR,
                (Some(d_gt), Some(z)) => error_color(rule.normalized_error(bf / z, d_gt)),
            };
            img.put_pixel(u as u32, v as u32, Rgb(color));
        }
    }
    Ok(img)
}

pub fn render_error_map(
    est: &DenseDepthMap,
    gt: &DisparityMap,
    baseline: f64,
    focal: f64,
    rule: &OutlierRule,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    error_image(est, gt, baseline, focal, rule)?
        .save(path)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Image(other),
        })
}

/// One CSV row per frame.
#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub frame_id: String,
    pub d1_fg: Option<String>,
    pub d1_bg: Option<String>,
    pub d1_all: String,
    pub density: String,
}

pub(crate) fn fmt_pct(x: f64) -> String {
    format!("{x:.4}")
}

impl ReportRow {
    pub fn new(frame_id: impl Into<String>, r: &EvalReport) -> Self {
        ReportRow {
            frame_id: frame_id.into(),
            d1_fg: r.d1_fg().map(fmt_pct),
            d1_bg: r.d1_bg().map(fmt_pct),
            d1_all: fmt_pct(r.d1_all()),
            density: fmt_pct(r.density()),
        }
    }
}

/// Fixed-width table of reports for terminal output.
pub fn format_table(rows: &[(String, EvalReport)]) -> String {
    let opt = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    let mut out = format!(
        "{:<16} {:>8} {:>8} {:>8} {:>8}\n",
        "frame", "D1-fg", "D1-bg", "D1-all", "density"
    );
    for (id, r) in rows {
        out.push_str(&format!(
            "{:<16} {:>8} {:>8} {:>8.2} {:>8.2}\n",
            id,
            opt(r.d1_fg()),
            opt(r.d1_bg()),
            r.d1_all(),
            r.density()
        ));
    }
    out
}
