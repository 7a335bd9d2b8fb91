//! Edge-preserving bilateral filter (BF*).
//!
//! Window ranges are clustered with DBSCAN under the normalized gap
//! `DF(a, b) = |a - b| / (a + b)`. A window with a single cluster is filtered
//! with the plain bilateral filter. Otherwise the foreground cluster `s1`
//! (smallest mean range) competes with the most populous other cluster `s2`:
//! if `np1 / np2 >= thr` only `s1` is filtered, else only `s2`.
//!
//! In one dimension `DF` grows monotonically with the gap between sorted
//! values, so with `min_pts = 2` DBSCAN reduces to cutting the sorted ranges
//! wherever consecutive values are more than `epsilon` apart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::bilateral_points;
use crate::window::{Interpolator, WindowPoint, WindowSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BfStarParams {
    pub epsilon: f64,
    pub min_pts: usize,
    pub thr: f64,
}

impl Default for BfStarParams {
    fn default() -> Self {
        BfStarParams {
            epsilon: 0.08,
            min_pts: 2,
            thr: 1.0,
        }
    }
}

impl BfStarParams {
    pub fn new(epsilon: f64, min_pts: usize, thr: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidArgument(format!("epsilon must be in (0, 1), got {epsilon}")));
        }
        if min_pts < 2 {
            return Err(Error::InvalidArgument(format!("min_pts must be at least 2, got {min_pts}")));
        }
        if !(thr > 0.0 && thr.is_finite()) {
            return Err(Error::InvalidArgument(format!("thr must be positive, got {thr}")));
        }
        Ok(BfStarParams { epsilon, min_pts, thr })
    }
}

#[inline]
pub(crate) fn df(a: f64, b: f64) -> f64 {
    ((a - b) / (a + b)).abs()
}

/// Normalized range gap between two returns.
pub fn df_distance(r_a: f64, r_b: f64) -> Result<f64> {
    if !(r_a > 0.0 && r_b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "ranges must be positive, got {r_a} and {r_b}"
        )));
    }
    Ok(df(r_a, r_b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Indices into the window's points, ascending.
    pub members: Vec<usize>,
    pub mean_range: f64,
}

impl Cluster {
    pub fn np(&self) -> usize {
        self.members.len()
    }

    fn points(&self, w: &WindowSample) -> Vec<WindowPoint> {
        self.members.iter().map(|&i| w.points[i]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RangeClusterSet {
    /// Ordered by ascending range.
    pub clusters: Vec<Cluster>,
    /// Indices of points in runs shorter than `min_pts`, ascending.
    pub noise: Vec<usize>,
}

impl RangeClusterSet {
    pub fn nc(&self) -> usize {
        self.clusters.len()
    }
}

/// Partitions the window's points into range clusters and noise.
pub fn cluster_ranges(w: &WindowSample, params: &BfStarParams) -> RangeClusterSet {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w.points[a].r.total_cmp(&w.points[b].r).then(a.cmp(&b)));

    let mut out = RangeClusterSet::default();
    let flush = |run: &[usize], out: &mut RangeClusterSet| {
        if run.len() >= params.min_pts {
            let mut members = run.to_vec();
            members.sort_unstable();
            let mean_range = members.iter().map(|&i| w.points[i].r).sum::<f64>() / members.len() as f64;
            out.clusters.push(Cluster { members, mean_range });
        } else {
            out.noise.extend_from_slice(run);
        }
    };
    let mut start = 0;
    for k in 1..=order.len() {
        let cut = k == order.len() || df(w.points[order[k - 1]].r, w.points[order[k]].r) > params.epsilon;
        if cut {
            flush(&order[start..k], &mut out);
            start = k;
        }
    }
    out.noise.sort_unstable();
    out
}

/// Picks the foreground cluster `s1` and its competitor `s2`.
pub fn select_cluster_pair(cs: &RangeClusterSet) -> Result<(&Cluster, &Cluster)> {
    if cs.nc() < 2 {
        return Err(Error::InvalidArgument(format!(
            "cluster pair needs at least two clusters, got {}",
            cs.nc()
        )));
    }
    let (i1, s1) = cs
        .clusters
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.mean_range.total_cmp(&b.mean_range))
        .unwrap();
    let s2 = cs
        .clusters
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != i1)
        .map(|(_, c)| c)
        .max_by(|a, b| a.np().cmp(&b.np()).then(b.mean_range.total_cmp(&a.mean_range)))
        .unwrap();
    Ok((s1, s2))
}

/// Which point set BF* filtered.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    /// At most one cluster: every point.
    All,
    Foreground,
    Competitor,
}

pub fn bf_star_explained(w: &WindowSample, params: &BfStarParams) -> Option<(f64, Selection)> {
    if w.is_empty() {
        return None;
    }
    let clusters = cluster_ranges(w, params);
    if clusters.nc() <= 1 {
        return bilateral_points(&w.points).map(|r| (r, Selection::All));
    }
    let (s1, s2) = select_cluster_pair(&clusters).expect("nc >= 2");
    let lambda = s1.np() as f64 / s2.np() as f64;
    let (chosen, sel) = if lambda >= params.thr {
        (s1, Selection::Foreground)
    } else {
        (s2, Selection::Competitor)
    };
    bilateral_points(&chosen.points(w)).map(|r| (r, sel))
}

pub fn bf_star(w: &WindowSample, params: &BfStarParams) -> Option<f64> {
    bf_star_explained(w, params).map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BfStar(pub BfStarParams);

impl Interpolator for BfStar {
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        bf_star(window, &self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::bilateral;

    fn ranges_window(ranges: &[f64]) -> WindowSample {
        WindowSample::new(
            (6, 6),
            13,
            ranges
                .iter()
                .enumerate()
                .map(|(i, &r)| WindowPoint { du: (i % 5) as i32 - 2, dv: (i / 5) as i32 - 2, r })
                .collect(),
        )
    }

    fn cluster_ranges_of(w: &WindowSample, c: &Cluster) -> Vec<f64> {
        c.members.iter().map(|&i| w.points[i].r).collect()
    }

    #[test]
    fn df_values() {
        assert_eq!(df_distance(10.0, 10.0).unwrap(), 0.0);
        assert_eq!(df_distance(10.0, 30.0).unwrap(), 0.5);
        assert!((df_distance(10.0, 10.5).unwrap() - 0.5 / 20.5).abs() < 1e-15);
        assert!((df_distance(10.0, 10.5).unwrap() - 0.0244).abs() < 1e-4);
        assert!(df_distance(0.0, 1.0).is_err());
        assert!(df_distance(-1.0, 1.0).is_err());
    }

    #[test]
    fn constant_ranges_form_one_cluster() {
        let cs = cluster_ranges(&ranges_window(&[10.0, 10.0, 10.0]), &BfStarParams::default());
        assert_eq!(cs.nc(), 1);
        assert!(cs.noise.is_empty());
    }

    #[test]
    fn two_separated_clusters() {
        let w = ranges_window(&[29.0, 10.0, 30.0, 10.4]);
        let cs = cluster_ranges(&w, &BfStarParams::default());
        assert_eq!(cs.nc(), 2);
        assert_eq!(cluster_ranges_of(&w, &cs.clusters[0]), [10.0, 10.4]);
        assert_eq!(cluster_ranges_of(&w, &cs.clusters[1]), [29.0, 30.0]);
        assert!(cs.noise.is_empty());
    }

    #[test]
    fn lone_far_return_is_noise() {
        let w = ranges_window(&[10.0, 10.5, 30.0]);
        let cs = cluster_ranges(&w, &BfStarParams::default());
        assert_eq!(cs.nc(), 1);
        assert_eq!(cs.noise, vec![2]);
    }

    fn cluster(mean: f64, np: usize) -> Cluster {
        Cluster { members: (0..np).collect(), mean_range: mean }
    }

    #[test]
    fn pair_selection_rules() {
        let two = RangeClusterSet { clusters: vec![cluster(40.0, 5), cluster(8.0, 3)], noise: vec![] };
        let (s1, s2) = select_cluster_pair(&two).unwrap();
        assert_eq!((s1.mean_range, s2.mean_range), (8.0, 40.0));

        let tie = RangeClusterSet {
            clusters: vec![cluster(8.0, 2), cluster(60.0, 4), cluster(40.0, 4)],
            noise: vec![],
        };
        let (s1, s2) = select_cluster_pair(&tie).unwrap();
        assert_eq!((s1.mean_range, s2.mean_range), (8.0, 40.0));

        let strict = RangeClusterSet {
            clusters: vec![cluster(8.0, 2), cluster(40.0, 3), cluster(60.0, 5)],
            noise: vec![],
        };
        let (s1, s2) = select_cluster_pair(&strict).unwrap();
        assert_eq!((s1.mean_range, s2.mean_range), (8.0, 60.0));

        let one = RangeClusterSet { clusters: vec![cluster(8.0, 2)], noise: vec![] };
        assert!(select_cluster_pair(&one).is_err());
    }

    #[test]
    fn single_cluster_is_plain_bilateral() {
        let w = ranges_window(&[10.0, 10.3, 10.1, 10.7, 30.0]);
        assert_eq!(bf_star(&w, &BfStarParams::default()), bilateral(&w));
    }

    #[test]
    fn populous_foreground_is_kept() {
        let w = ranges_window(&[30.0, 10.0, 30.5, 10.2, 10.4]);
        let (r, sel) = bf_star_explained(&w, &BfStarParams::default()).unwrap();
        assert_eq!(sel, Selection::Foreground);
        assert!((10.0..=10.4).contains(&r), "{r}");
    }

    #[test]
    fn sparse_foreground_yields_to_background() {
        let w = ranges_window(&[30.0, 10.0, 30.5, 10.2, 30.2]);
        let (r, sel) = bf_star_explained(&w, &BfStarParams::default()).unwrap();
        assert_eq!(sel, Selection::Competitor);
        assert!((30.0..=30.5).contains(&r), "{r}");
    }

    #[test]
    fn threshold_moves_the_decision() {
        let w = ranges_window(&[30.0, 10.0, 30.5, 10.2, 30.2]);
        let lenient = BfStarParams::new(0.08, 2, 0.5).unwrap();
        assert_eq!(bf_star_explained(&w, &lenient).unwrap().1, Selection::Foreground);
    }

    #[test]
    fn param_validation() {
        assert!(BfStarParams::new(0.0, 2, 1.0).is_err());
        assert!(BfStarParams::new(1.0, 2, 1.0).is_err());
        assert!(BfStarParams::new(0.08, 1, 1.0).is_err());
        assert!(BfStarParams::new(0.08, 2, 0.0).is_err());
    }

    #[test]
    fn empty_window() {
        assert_eq!(bf_star(&ranges_window(&[]), &BfStarParams::default()), None);
    }
}
