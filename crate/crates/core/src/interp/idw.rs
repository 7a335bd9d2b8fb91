use serde::{Deserialize, Serialize};

use super::convex_combination;
use crate::error::{Error, Result};
use crate::window::{Interpolator, WindowPoint, WindowSample};

/// Inverse distance weighting, weights `d^-p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdwParams {
    pub p: f64,
}

impl IdwParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("IDW power must be positive, got {p}")));
        }
        Ok(IdwParams { p })
    }
}

impl Default for IdwParams {
    fn default() -> Self {
        IdwParams { p: 2.0 }
    }
}

pub(crate) fn idw_points(points: &[WindowPoint], params: IdwParams) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    // Samples on the center pixel are the limit of the weighting.
    if points.iter().any(|p| p.du == 0 && p.dv == 0) {
        return convex_combination(points.iter().filter(|p| p.du == 0 && p.dv == 0).map(|p| (1.0, p.r)));
    }
    convex_combination(points.iter().map(|p| (p.offset_norm().powf(-params.p), p.r)))
}

pub fn idw(w: &WindowSample, params: IdwParams) -> Option<f64> {
    idw_points(&w.points, params)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Idw(pub IdwParams);

impl Interpolator for Idw {
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        idw(window, self.0)
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
    fn symmetric_pair_gives_mean() {
        let w = window(&[(1, 0, 2.0), (0, -1, 4.0)]);
        assert_eq!(idw(&w, IdwParams::default()), Some(3.0));
    }

    #[test]
    fn inverse_square_weights() {
        // (10 * 1 + 20 * 0.25) / 1.25
        let w = window(&[(1, 0, 10.0), (0, 2, 20.0)]);
        let r = idw(&w, IdwParams::new(2.0).unwrap()).unwrap();
        assert!((r - 12.0).abs() < 1e-12, "{r}");
    }

    #[test]
    fn center_sample_short_circuits() {
        let w = window(&[(1, 0, 10.0), (0, 0, 20.0), (0, 0, 30.0)]);
        assert_eq!(idw(&w, IdwParams::default()), Some(25.0));
    }

    #[test]
    fn rejects_non_positive_power() {
        assert!(IdwParams::new(0.0).is_err());
        assert!(IdwParams::new(-1.0).is_err());
    }

    #[test]
    fn empty() {
        assert_eq!(idw(&window(&[]), IdwParams::default()), None);
    }
}
