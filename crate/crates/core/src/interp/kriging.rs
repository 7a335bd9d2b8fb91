//! Ordinary Kriging with a spherical semivariogram.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::idw::idw_points;
use super::IdwParams;
use crate::error::{Error, Result};
use crate::window::{Interpolator, WindowPoint, WindowSample};

/// Systems whose 1-norm condition estimate exceeds this fall back to IDW.
pub const MAX_CONDITION: f64 = 1e12;

const MIN_SILL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariogramModel {
    #[default]
    Spherical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariogramParams {
    /// Squared meters.
    pub nugget: f64,
    /// Squared meters.
    pub sill: f64,
    /// Lag at which the sill is reached, in pixels.
    pub range_len: f64,
    #[serde(default)]
    pub model: VariogramModel,
}

impl VariogramParams {
    pub fn new(nugget: f64, sill: f64, range_len: f64) -> Result<Self> {
        if !(nugget >= 0.0 && sill >= nugget && range_len > 0.0) || !sill.is_finite() || !range_len.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "variogram needs 0 <= nugget <= sill and range > 0, got nugget={nugget} sill={sill} range={range_len}"
            )));
        }
        Ok(VariogramParams {
            nugget,
            sill,
            range_len,
            model: VariogramModel::Spherical,
        })
    }

    /// Zero nugget, sill from the sample variance of the window ranges and
    /// range half the mask size.
    pub fn for_window(w: &WindowSample) -> Self {
        let n = w.len();
        let sill = if n > 1 {
            let mean = w.ranges().sum::<f64>() / n as f64;
            w.ranges().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        VariogramParams {
            nugget: 0.0,
            sill: sill.max(MIN_SILL),
            range_len: w.mr as f64 / 2.0,
            model: VariogramModel::Spherical,
        }
    }
}

pub fn semivariogram(h: f64, params: &VariogramParams) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    match params.model {
        VariogramModel::Spherical => {
            if h >= params.range_len {
                params.sill
            } else {
                let x = h / params.range_len;
                params.nugget + (params.sill - params.nugget) * (1.5 * x - 0.5 * x.powi(3))
            }
        }
    }
}

fn lag(a: &WindowPoint, b: &WindowPoint) -> f64 {
    f64::from(a.du - b.du).hypot(f64::from(a.dv - b.dv))
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Solves the ordinary Kriging system and returns the sample weights, or
/// `None` when it is singular or too badly conditioned.
pub fn kriging_weights(w: &WindowSample, params: &VariogramParams) -> Option<Vec<f64>> {
    let n = w.len();
    if n == 0 {
        return None;
    }
    let pts = &w.points;
    let a = DMatrix::from_fn(n + 1, n + 1, |i, j| match (i == n, j == n) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => semivariogram(lag(&pts[i], &pts[j]), params),
    });
    let center = WindowPoint { du: 0, dv: 0, r: 0.0 };
    let b = DVector::from_fn(n + 1, |i, _| {
        if i == n {
            1.0
        } else {
            semivariogram(lag(&pts[i], &center), params)
        }
    });
    let inv = a.clone().lu().try_inverse()?;
    let cond = norm1(&a) * norm1(&inv);
    if !(cond.is_finite() && cond <= MAX_CONDITION) {
        return None;
    }
    let x = inv * b;
    Some(x.iter().take(n).copied().collect())
}

/// Ordinary Kriging estimate. Falls back to IDW (`p = 2`) when the system
/// cannot be solved reliably, e.g. for co-located samples.
pub fn kriging(w: &WindowSample, params: &VariogramParams) -> Option<f64> {
    match w.points.as_slice() {
        [] => None,
        [only] => Some(only.r),
        pts => match kriging_weights(w, params) {
            Some(lambda) => Some(lambda.iter().zip(pts).map(|(l, p)| l * p.r).sum()),
            None => idw_points(pts, IdwParams::default()),
        },
    }
}

/// Kriging interpolator. Without an explicit variogram, parameters are
/// derived per window with [`VariogramParams::for_window`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Kriging {
    pub variogram: Option<VariogramParams>,
}

impl Interpolator for Kriging {
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        let params = self.variogram.unwrap_or_else(|| VariogramParams::for_window(window));
        kriging(window, &params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(points: &[(i32, i32, f64)]) -> WindowSample {
        WindowSample::new(
            (5, 5),
            7,
            points.iter().map(|&(du, dv, r)| WindowPoint { du, dv, r }).collect(),
        )
    }

    #[test]
    fn spherical_model_values() {
        let p = VariogramParams::new(0.0, 1.0, 4.0).unwrap();
        assert_eq!(semivariogram(0.0, &p), 0.0);
        assert_eq!(semivariogram(4.0, &p), 1.0);
        assert_eq!(semivariogram(9.0, &p), 1.0);
        assert!((semivariogram(2.0, &p) - 0.6875).abs() < 1e-15);
    }

    #[test]
    fn nugget_jumps_at_origin() {
        let p = VariogramParams::new(0.5, 2.0, 4.0).unwrap();
        assert_eq!(semivariogram(0.0, &p), 0.0);
        assert!(semivariogram(1e-9, &p) > 0.5);
    }

    #[test]
    fn invalid_variogram() {
        assert!(VariogramParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(VariogramParams::new(2.0, 1.0, 1.0).is_err());
        assert!(VariogramParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn singleton() {
        let w = window(&[(2, 1, 17.0)]);
        assert_eq!(kriging(&w, &VariogramParams::for_window(&w)), Some(17.0));
    }

    #[test]
    fn symmetric_pure_sill_pair_is_mean() {
        let w = window(&[(2, 0, 10.0), (-2, 0, 20.0)]);
        let pure_sill = VariogramParams::new(1.0, 1.0, 0.5).unwrap();
        let r = kriging(&w, &pure_sill).unwrap();
        assert!((r - 15.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn weights_sum_to_one() {
        let w = window(&[(1, 0, 10.0), (-2, 1, 12.0), (0, 3, 11.0), (3, -3, 15.0)]);
        let lambda = kriging_weights(&w, &VariogramParams::for_window(&w)).unwrap();
        assert!((lambda.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn colocated_samples_fall_back_to_idw() {
        let w = window(&[(1, 0, 10.0), (1, 0, 14.0), (0, 2, 20.0)]);
        let params = VariogramParams::for_window(&w);
        assert!(kriging_weights(&w, &params).is_none());
        assert_eq!(kriging(&w, &params), idw_points(&w.points, IdwParams::default()));
    }

    #[test]
    fn sample_at_center_is_reproduced() {
        let w = window(&[(0, 0, 10.0), (2, 0, 14.0), (0, -2, 20.0)]);
        let r = kriging(&w, &VariogramParams::for_window(&w)).unwrap();
        assert!((r - 10.0).abs() < 1e-9, "{r}");
    }
}
