use std::str::FromStr;

use rayon::prelude::*;
use robust::{incircle, orient2d, Coord};
use serde::{Deserialize, Serialize};

use super::{Triangulation, NO_NEIGHBOR};
use crate::error::Error;
use crate::window::DenseDepthMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DelaunayMode {
    /// Barycentric interpolation inside the enclosing triangle.
    Linear,
    /// Range of the closest vertex, ties to the smaller range.
    Nearest,
    /// Sibson natural-neighbor coordinates.
    Natural,
}

impl FromStr for DelaunayMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "linear" | "lin" => Ok(DelaunayMode::Linear),
            "nearest" | "nea" => Ok(DelaunayMode::Nearest),
            "natural" | "nat" => Ok(DelaunayMode::Natural),
            other => Err(Error::InvalidArgument(format!("unknown Delaunay mode '{other}'"))),
        }
    }
}

fn dist_sq(a: Coord<f64>, b: Coord<f64>) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

fn circumcenter(a: Coord<f64>, b: Coord<f64>, c: Coord<f64>) -> Coord<f64> {
    let (bx, by) = (b.x - a.x, b.y - a.y);
    let (cx, cy) = (c.x - a.x, c.y - a.y);
    let d = 2.0 * (bx * cy - by * cx);
    let (b2, c2) = (bx * bx + by * by, cx * cx + cy * cy);
    Coord {
        x: a.x + (cy * b2 - by * c2) / d,
        y: a.y + (bx * c2 - cx * b2) / d,
    }
}

/// Area of the convex polygon spanned by `pts`, in any order.
fn convex_area(pts: &mut [Coord<f64>]) -> f64 {
    if pts.len() < 3 {
        return 0.0;
    }
    // Canonical order first so the centroid does not depend on input order.
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    pts.sort_by(|a, b| (a.y - cy).atan2(a.x - cx).total_cmp(&(b.y - cy).atan2(b.x - cx)));
    let mut twice = 0.0;
    for i in 0..pts.len() {
        let (p, q) = (pts[i], pts[(i + 1) % pts.len()]);
        twice += (p.x - cx) * (q.y - cy) - (q.x - cx) * (p.y - cy);
    }
    0.5 * twice.abs()
}

impl Triangulation {
    /// Finds a triangle containing `p` (closed), walking from `hint`.
    /// Returns `None` outside the convex hull.
    pub fn locate(&self, p: Coord<f64>, hint: &mut u32) -> Option<u32> {
        let mut t = if (*hint as usize) < self.triangles.len() { *hint } else { 0 };
        let limit = 4 * self.triangles.len() + 64;
        let mut turn = 0usize;
        'walk: for _ in 0..limit {
            turn += 1;
            let tri = self.triangles[t as usize];
            for k in 0..3 {
                let i = (turn + k) % 3;
                let (e0, e1) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let (c0, c1) = (self.vertices[e0 as usize].coord(), self.vertices[e1 as usize].coord());
                if orient2d(c0, c1, p) < 0.0 {
                    let n = self.neighbors[t as usize][i];
                    if n == NO_NEIGHBOR {
                        return None;
                    }
                    t = n;
                    continue 'walk;
                }
            }
            *hint = t;
            return Some(t);
        }
        let found = (0..self.triangles.len()).find(|&t| {
            let [a, b, c] = self.tri_coords(t);
            orient2d(a, b, p) >= 0.0 && orient2d(b, c, p) >= 0.0 && orient2d(c, a, p) >= 0.0
        })?;
        *hint = found as u32;
        Some(found as u32)
    }

    fn linear_at(&self, t: u32, p: Coord<f64>) -> f64 {
        let tri = self.triangles[t as usize];
        let [a, b, c] = self.tri_coords(t as usize);
        let w = [orient2d(p, b, c), orient2d(a, p, c), orient2d(a, b, p)].map(|x| x.max(0.0));
        // On a shared edge either adjacent triangle may be located, so the
        // edge is interpolated from its endpoints alone, in index order.
        for &i in &tri {
            let v = &self.vertices[i as usize];
            if v.u == p.x && v.v == p.y {
                return v.r;
            }
        }
        if let Some(k) = w.iter().position(|&x| x == 0.0) {
            let (i, j) = (tri[(k + 1) % 3].min(tri[(k + 2) % 3]), tri[(k + 1) % 3].max(tri[(k + 2) % 3]));
            let (vi, vj) = (&self.vertices[i as usize], &self.vertices[j as usize]);
            let (wi, wj) = (dist_sq(p, vj.coord()).sqrt(), dist_sq(p, vi.coord()).sqrt());
            return (wi * vi.r + wj * vj.r) / (wi + wj);
        }
        let total: f64 = w.iter().sum();
        tri.iter()
            .zip(w)
            .map(|(&i, wi)| wi * self.vertices[i as usize].r)
            .sum::<f64>()
            / total
    }

    fn nearest_at(&self, t: u32, p: Coord<f64>) -> f64 {
        let key = |i: u32| {
            let v = &self.vertices[i as usize];
            (dist_sq(v.coord(), p), v.r)
        };
        let less = |a: (f64, f64), b: (f64, f64)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        let mut best = self.triangles[t as usize][0];
        for &i in &self.triangles[t as usize][1..] {
            if less(key(i), key(best)) {
                best = i;
            }
        }
        // Greedy descent over Delaunay edges reaches the nearest vertex.
        loop {
            let mut next = best;
            for &n in self.vertex_neighbors(best as usize) {
                if less(key(n), key(next)) {
                    next = n;
                }
            }
            if next == best {
                break;
            }
            best = next;
        }
        // Vertices tied for nearest share an empty circle around `p`, so
        // they are linked by Delaunay edges; scan them all for the tie-break.
        let d = key(best).0;
        let mut tied = vec![best];
        let mut k = 0;
        while k < tied.len() {
            for &n in self.vertex_neighbors(tied[k] as usize) {
                if key(n).0 == d && !tied.contains(&n) {
                    tied.push(n);
                }
            }
            k += 1;
        }
        tied.into_iter()
            .map(|i| self.vertices[i as usize].r)
            .fold(f64::INFINITY, f64::min)
    }

    /// Sibson coordinates by area stealing: each natural neighbor's weight is
    /// the area its Voronoi cell would lose to `p` if `p` were inserted.
    fn natural_at(&self, t0: u32, p: Coord<f64>) -> Option<f64> {
        for &i in &self.triangles[t0 as usize] {
            let v = &self.vertices[i as usize];
            if v.u == p.x && v.v == p.y {
                return Some(v.r);
            }
        }
        let mut cavity = vec![t0];
        let mut boundary = Vec::new();
        let mut k = 0;
        while k < cavity.len() {
            let t = cavity[k];
            k += 1;
            let tri = self.triangles[t as usize];
            for i in 0..3 {
                let (e0, e1) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                let n = self.neighbors[t as usize][i];
                if n == NO_NEIGHBOR {
                    let (c0, c1) = (self.vertices[e0 as usize].coord(), self.vertices[e1 as usize].coord());
                    if orient2d(c0, c1, p) == 0.0 {
                        // On the hull the Voronoi cell of p is unbounded.
                        return None;
                    }
                    boundary.push((e0, e1));
                    continue;
                }
                if cavity.contains(&n) {
                    continue;
                }
                let [a, b, c] = self.tri_coords(n as usize);
                if incircle(a, b, c, p) > 0.0 {
                    cavity.push(n);
                } else {
                    boundary.push((e0, e1));
                }
            }
        }

        let mut cells: Vec<(u32, Vec<Coord<f64>>)> = Vec::new();
        let cell = |v: u32, c: Coord<f64>, cells: &mut Vec<(u32, Vec<Coord<f64>>)>| {
            match cells.iter_mut().find(|(id, _)| *id == v) {
                Some((_, pts)) => pts.push(c),
                None => cells.push((v, vec![c])),
            }
        };
        for &(e0, e1) in &boundary {
            let c = circumcenter(
                p,
                self.vertices[e0 as usize].coord(),
                self.vertices[e1 as usize].coord(),
            );
            cell(e0, c, &mut cells);
            cell(e1, c, &mut cells);
        }
        for &t in &cavity {
            let [a, b, c] = self.tri_coords(t as usize);
            let cc = circumcenter(a, b, c);
            for &v in &self.triangles[t as usize] {
                cell(v, cc, &mut cells);
            }
        }
        // Fixed summation order, whatever triangle the walk started from.
        cells.sort_unstable_by_key(|(v, _)| *v);
        let (mut num, mut den) = (0.0, 0.0);
        for (v, mut pts) in cells {
            let area = convex_area(&mut pts);
            num += area * self.vertices[v as usize].r;
            den += area;
        }
        let r = num / den;
        (den > 0.0 && r.is_finite()).then_some(r)
    }

    /// Estimate at one point, or `None` outside the hull.
    pub fn interpolate_at(&self, mode: DelaunayMode, p: Coord<f64>, hint: &mut u32) -> Option<f64> {
        let t = self.locate(p, hint)?;
        Some(match mode {
            DelaunayMode::Linear => self.linear_at(t, p),
            DelaunayMode::Nearest => self.nearest_at(t, p),
            DelaunayMode::Natural => self.natural_at(t, p).unwrap_or_else(|| self.linear_at(t, p)),
        })
    }
}

/// Evaluates the triangulation at every pixel at or below `horizon_row`.
/// Pixels outside the convex hull of the vertices stay invalid.
pub fn interpolate_delaunay(
    tri: &Triangulation,
    mode: DelaunayMode,
    width: usize,
    height: usize,
    horizon_row: usize,
) -> DenseDepthMap {
    let mut out = DenseDepthMap::empty(width, height, horizon_row);
    out.rows_mut().for_each(|(v, row)| {
        let mut hint = 0u32;
        for (u, value) in row.iter_mut().enumerate() {
            let p = Coord { x: u as f64, y: v as f64 };
            *value = tri
                .interpolate_at(mode, p, &mut hint)
                .filter(|r| *r > 0.0 && r.is_finite());
        }
    });
    out
}
