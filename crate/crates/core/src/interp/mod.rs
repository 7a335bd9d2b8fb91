//! Window-local range estimators.

mod basic;
mod bilateral;
mod idw;
mod kriging;

pub use basic::{op_basic, BasicOp};
pub use bilateral::{bilateral, bilateral_points, Bilateral};
pub use idw::{idw, Idw, IdwParams};
pub use kriging::{kriging, kriging_weights, semivariogram, Kriging, VariogramModel, VariogramParams};

/// `sum(w * r) / sum(w)` over positive weights, clamped to the sample range
/// so rounding never leaves the convex hull of the inputs.
pub(crate) fn convex_combination(items: impl IntoIterator<Item = (f64, f64)>) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (w, r) in items {
        num += w * r;
        den += w;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo <= hi).then(|| (num / den).clamp(lo, hi))
}
