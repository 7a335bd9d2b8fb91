//! Bilateral filter with rational spatial and range kernels.
//!
//! Each sample is weighted by `1 / (1 + |x0 - xi|)` times
//! `1 / (1 + |r0 - ri|)`, where `r0` is the smallest range in the point set:
//! the center pixel is usually unsampled, so the nearest return stands in
//! for its range.

use super::convex_combination;
use crate::window::{Interpolator, WindowPoint, WindowSample};

#[inline]
pub(crate) fn spatial_kernel(p: &WindowPoint) -> f64 {
    1.0 / (1.0 + p.offset_norm())
}

#[inline]
pub(crate) fn range_kernel(r0: f64, r: f64) -> f64 {
    1.0 / (1.0 + (r0 - r).abs())
}

/// Bilateral estimate over an arbitrary point set.
pub fn bilateral_points(points: &[WindowPoint]) -> Option<f64> {
    let r0 = points.iter().map(|p| p.r).reduce(f64::min)?;
    convex_combination(points.iter().map(|p| (spatial_kernel(p) * range_kernel(r0, p.r), p.r)))
}

pub fn bilateral(w: &WindowSample) -> Option<f64> {
    bilateral_points(&w.points)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bilateral;

impl Interpolator for Bilateral {
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        bilateral(window)
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
    fn singleton_anywhere() {
        assert_eq!(bilateral(&window(&[(3, -2, 8.5)])), Some(8.5));
    }

    #[test]
    fn constant_field() {
        let w = window(&[(1, 0, 10.0), (-3, 2, 10.0), (0, 0, 10.0)]);
        assert_eq!(bilateral(&w), Some(10.0));
    }

    #[test]
    fn two_point_hand_value() {
        // r0 = 10; w1 = 1/2 * 1, w2 = 1/3 * 1/21 = 1/63.
        let w = window(&[(1, 0, 10.0), (2, 0, 30.0)]);
        let expected = (0.5 * 10.0 + 30.0 / 63.0) / (0.5 + 1.0 / 63.0);
        let got = bilateral(&w).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 10.615).abs() < 1e-3, "{got}");
    }

    #[test]
    fn equidistant_points_reduce_to_range_weighting() {
        let w = window(&[(2, 0, 10.0), (0, 2, 12.0), (-2, 0, 20.0)]);
        let rw: Vec<f64> = [10.0, 12.0, 20.0].iter().map(|&r| range_kernel(10.0, r)).collect();
        let expected = (rw[0] * 10.0 + rw[1] * 12.0 + rw[2] * 20.0) / rw.iter().sum::<f64>();
        assert!((bilateral(&w).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn empty() {
        assert_eq!(bilateral(&window(&[])), None);
    }
}
