use std::cmp::Ordering;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::convex_combination;
use crate::error::Error;
use crate::window::{Interpolator, WindowSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasicOp {
    Average,
    Min,
    Max,
    Median,
    /// Range of the sample closest to the window center. Ties go to the
    /// smaller range.
    Nearest,
}

impl FromStr for BasicOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "average" | "ave" => BasicOp::Average,
            "min" => BasicOp::Min,
            "max" => BasicOp::Max,
            "median" | "med" => BasicOp::Median,
            "nearest" | "nea" => BasicOp::Nearest,
            other => return Err(Error::InvalidArgument(format!("unknown operator '{other}'"))),
        })
    }
}

pub fn op_basic(kind: BasicOp, w: &WindowSample) -> Option<f64> {
    if w.is_empty() {
        return None;
    }
    match kind {
        BasicOp::Average => convex_combination(w.ranges().map(|r| (1.0, r))),
        BasicOp::Min => w.min_range(),
        BasicOp::Max => w.max_range(),
        BasicOp::Median => {
            let mut r: Vec<f64> = w.ranges().collect();
            r.sort_by(f64::total_cmp);
            let n = r.len();
            Some(if n % 2 == 1 {
                r[n / 2]
            } else {
                0.5 * (r[n / 2 - 1] + r[n / 2])
            })
        }
        BasicOp::Nearest => w
            .points
            .iter()
            .min_by(|a, b| {
                a.offset_norm_sq()
                    .cmp(&b.offset_norm_sq())
                    .then_with(|| a.r.partial_cmp(&b.r).unwrap_or(Ordering::Equal))
            })
            .map(|p| p.r),
    }
}

impl Interpolator for BasicOp {
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        op_basic(*self, window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::WindowPoint;

    fn window(points: &[(i32, i32, f64)]) -> WindowSample {
        WindowSample::new(
            (10, 10),
            5,
            points.iter().map(|&(du, dv, r)| WindowPoint { du, dv, r }).collect(),
        )
    }

    #[test]
    fn singleton() {
        let w = window(&[(1, -2, 4.0)]);
        for op in [BasicOp::Average, BasicOp::Min, BasicOp::Max, BasicOp::Median, BasicOp::Nearest] {
            assert_eq!(op_basic(op, &w), Some(4.0));
        }
    }

    #[test]
    fn order_statistics() {
        let w = window(&[(0, 1, 9.0), (1, 1, 2.0), (-1, 0, 4.0)]);
        assert_eq!(op_basic(BasicOp::Min, &w), Some(2.0));
        assert_eq!(op_basic(BasicOp::Max, &w), Some(9.0));
        assert_eq!(op_basic(BasicOp::Average, &w), Some(5.0));
        assert_eq!(op_basic(BasicOp::Median, &w), Some(4.0));
    }

    #[test]
    fn even_median_averages_middle_pair() {
        let w = window(&[(0, 0, 1.0), (0, 1, 3.0), (0, 2, 5.0), (1, 0, 100.0)]);
        assert_eq!(op_basic(BasicOp::Median, &w), Some(4.0));
    }

    #[test]
    fn nearest_by_offset_then_smaller_range() {
        let w = window(&[(1, 0, 10.0), (2, 2, 3.0)]);
        assert_eq!(op_basic(BasicOp::Nearest, &w), Some(10.0));
        let tie = window(&[(0, 1, 10.0), (-1, 0, 6.0), (1, 0, 8.0)]);
        assert_eq!(op_basic(BasicOp::Nearest, &tie), Some(6.0));
    }

    #[test]
    fn empty_window_has_no_estimate() {
        assert_eq!(op_basic(BasicOp::Average, &window(&[])), None);
    }
}
