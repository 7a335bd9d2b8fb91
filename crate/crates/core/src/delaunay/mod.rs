//! Delaunay triangulation of the sampled pixels and the triangulation-based
//! interpolators (linear, nearest vertex, Sibson natural neighbor).
//!
//! The triangulation is built incrementally with Bowyer-Watson. Hull edges
//! are closed by ghost triangles that share a vertex at infinity, so no
//! bounding super-triangle is needed and the result always covers the exact
//! convex hull. Orientation and in-circle tests use exact predicates.

mod build;
mod interpolate;

pub use interpolate::{interpolate_delaunay, DelaunayMode};

use robust::Coord;

use crate::error::Result;
use crate::projection::{ProjectedPoint, SparseDepthMap};

/// Neighbor slot value for edges on the convex hull.
pub const NO_NEIGHBOR: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

impl Vertex {
    #[inline]
    pub(crate) fn coord(&self) -> Coord<f64> {
        Coord { x: self.u, y: self.v }
    }
}

/// A finished triangulation. Triangles are counterclockwise in `(u, v)`;
/// `neighbors[t][i]` is the triangle across the edge opposite vertex `i`.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<Vertex>,
    triangles: Vec<[u32; 3]>,
    neighbors: Vec<[u32; 3]>,
    /// CSR adjacency between vertices.
    adj_offsets: Vec<u32>,
    adj: Vec<u32>,
}

impl Triangulation {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self) -> &[[u32; 3]] {
        &self.neighbors
    }

    pub fn vertex_neighbors(&self, v: usize) -> &[u32] {
        &self.adj[self.adj_offsets[v] as usize..self.adj_offsets[v + 1] as usize]
    }

    pub(crate) fn tri_coords(&self, t: usize) -> [Coord<f64>; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize].coord())
    }

    /// Triangulates the sampled cells of a sparse map at their integer
    /// pixel positions, keeping the smallest range of multi-sample cells.
    pub fn from_sparse_map(map: &SparseDepthMap) -> Result<Self> {
        let mut points = Vec::new();
        for v in 0..map.height() {
            for u in 0..map.width() {
                if let Some(r) = map.cell(u, v).iter().map(|p| p.r).reduce(f64::min) {
                    points.push(ProjectedPoint { u: u as f64, v: v as f64, r });
                }
            }
        }
        triangulate(&points)
    }
}

/// Delaunay triangulation of `points`. Exact duplicate locations are merged
/// first, keeping the smallest range.
pub fn triangulate(points: &[ProjectedPoint]) -> Result<Triangulation> {
    let mut sorted: Vec<Vertex> = points.iter().map(|p| Vertex { u: p.u, v: p.v, r: p.r }).collect();
    sorted.sort_by(|a, b| a.u.total_cmp(&b.u).then(a.v.total_cmp(&b.v)).then(a.r.total_cmp(&b.r)));
    sorted.dedup_by(|later, kept| later.u == kept.u && later.v == kept.v);
    build::build(sorted)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xy: &[(f64, f64)]) -> Vec<ProjectedPoint> {
        xy.iter().map(|&(u, v)| ProjectedPoint { u, v, r: 1.0 }).collect()
    }

    #[test]
    fn three_points_one_triangle() {
        let t = triangulate(&pts(&[(0.0, 0.0), (4.0, 0.0), (0.0, 3.0)])).unwrap();
        assert_eq!(t.triangles().len(), 1);
        assert_eq!(t.neighbors()[0], [NO_NEIGHBOR; 3]);
        let [a, b, c] = t.tri_coords(0);
        assert!(robust::orient2d(a, b, c) > 0.0);
    }

    #[test]
    fn convex_quad_picks_delaunay_diagonal() {
        // The circle through (0,0), (4,0), (0,1) has center (2, 0.5) and
        // radius^2 4.25; (4,1) lies on it, so nudge it out to (4.5, 1).
        let t = triangulate(&pts(&[(0.0, 0.0), (4.0, 0.0), (0.0, 1.0), (4.5, 1.0)])).unwrap();
        assert_eq!(t.triangles().len(), 2);
        // Diagonal (0,1)-(4,0) is Delaunay: neither triangle uses both (0,0) and (4.5,1).
        for tri in t.triangles() {
            let has = |x: f64, y: f64| tri.iter().any(|&i| t.vertices()[i as usize].u == x && t.vertices()[i as usize].v == y);
            assert!(!(has(0.0, 0.0) && has(4.5, 1.0)));
        }
    }

    #[test]
    fn degenerate_inputs() {
        assert!(triangulate(&pts(&[(0.0, 0.0), (1.0, 1.0)])).is_err());
        assert!(triangulate(&pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (3.0, 3.0)])).is_err());
        assert!(triangulate(&pts(&[(0.0, 0.0), (0.0, 0.0), (1.0, 1.0)])).is_err());
    }

    #[test]
    fn duplicates_keep_min_range() {
        let mut p = pts(&[(0.0, 0.0), (2.0, 0.0), (0.0, 2.0)]);
        p.push(ProjectedPoint { u: 2.0, v: 0.0, r: 0.25 });
        let t = triangulate(&p).unwrap();
        assert_eq!(t.vertices().len(), 3);
        assert!(t.vertices().iter().any(|v| v.u == 2.0 && v.r == 0.25));
    }

    #[test]
    fn grid_is_fully_triangulated() {
        let mut p = Vec::new();
        for v in 0..10 {
            for u in 0..12 {
                p.push(ProjectedPoint { u: f64::from(u), v: f64::from(v), r: 1.0 });
            }
        }
        let t = triangulate(&p).unwrap();
        // A triangulated convex grid with no interior holes: 2 * cells.
        assert_eq!(t.triangles().len(), 2 * 11 * 9);
    }
}
