//! Incremental Bowyer-Watson construction.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust::{incircle, orient2d, Coord};

use super::{Triangulation, Vertex, NO_NEIGHBOR};
use crate::error::{Error, Result};

/// The vertex at infinity shared by all ghost triangles.
const GHOST: u32 = u32::MAX;
const NONE: u32 = u32::MAX;
const INSERTION_SEED: u64 = 0x5eed_de1a;

struct Mesh<'a> {
    pts: &'a [Vertex],
    /// Ghost triangles keep the ghost vertex in slot 2.
    tris: Vec<[u32; 3]>,
    nbr: Vec<[u32; 3]>,
    alive: Vec<bool>,
    stamp: Vec<u32>,
    epoch: u32,
    free: Vec<u32>,
    last: u32,
    walk_seed: u32,
}

struct BoundaryEdge {
    e0: u32,
    e1: u32,
    outer: u32,
    outer_slot: usize,
}

impl<'a> Mesh<'a> {
    fn coord(&self, v: u32) -> Coord<f64> {
        self.pts[v as usize].coord()
    }

    fn is_ghost(&self, t: u32) -> bool {
        self.tris[t as usize][2] == GHOST
    }

    fn alloc(&mut self, tri: [u32; 3], nbr: [u32; 3]) -> u32 {
        if let Some(t) = self.free.pop() {
            self.tris[t as usize] = tri;
            self.nbr[t as usize] = nbr;
            self.alive[t as usize] = true;
            t
        } else {
            self.tris.push(tri);
            self.nbr.push(nbr);
            self.alive.push(true);
            self.stamp.push(0);
            (self.tris.len() - 1) as u32
        }
    }

    /// Whether `p` lies strictly inside the circumcircle of `t`. For a ghost
    /// triangle this is the open outer half-plane of its hull edge plus the
    /// open edge itself.
    fn in_circle(&self, t: u32, p: Coord<f64>) -> bool {
        let [a, b, c] = self.tris[t as usize];
        let (ca, cb) = (self.coord(a), self.coord(b));
        if c == GHOST {
            let o = orient2d(ca, cb, p);
            o > 0.0 || (o == 0.0 && strictly_between(ca, cb, p))
        } else {
            incircle(ca, cb, self.coord(c), p) > 0.0
        }
    }

    fn next_rand(&mut self) -> u32 {
        self.walk_seed ^= self.walk_seed << 13;
        self.walk_seed ^= self.walk_seed >> 17;
        self.walk_seed ^= self.walk_seed << 5;
        self.walk_seed
    }

    /// Returns a triangle whose circumcircle contains `p`.
    fn locate(&mut self, p: Coord<f64>) -> u32 {
        let mut t = self.last;
        if !self.alive[t as usize] {
            t = self.alive.iter().position(|&a| a).unwrap() as u32;
        }
        let limit = 4 * self.tris.len() + 64;
        'walk: for _ in 0..limit {
            if self.is_ghost(t) {
                if self.in_circle(t, p) {
                    return t;
                }
                t = self.nbr[t as usize][2];
                continue;
            }
            let start = (self.next_rand() % 3) as usize;
            for k in 0..3 {
                let i = (start + k) % 3;
                let tri = self.tris[t as usize];
                let (e0, e1) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                if orient2d(self.coord(e0), self.coord(e1), p) < 0.0 {
                    t = self.nbr[t as usize][i];
                    continue 'walk;
                }
            }
            return t;
        }
        // The walk is guaranteed to terminate on a Delaunay mesh; this is
        // only reached on numerically hostile input.
        (0..self.tris.len() as u32)
            .find(|&t| self.alive[t as usize] && self.in_circle(t, p))
            .expect("some triangle contains every point")
    }

    fn insert(&mut self, v: u32) {
        let p = self.coord(v);
        let seed = self.locate(p);
        debug_assert!(self.in_circle(seed, p));

        self.epoch += 1;
        let epoch = self.epoch;
        self.stamp[seed as usize] = epoch;
        let mut stack = vec![seed];
        let mut bad = Vec::new();
        let mut boundary = Vec::new();
        while let Some(t) = stack.pop() {
            bad.push(t);
            for i in 0..3 {
                let n = self.nbr[t as usize][i];
                if self.stamp[n as usize] == epoch {
                    continue;
                }
                if self.in_circle(n, p) {
                    self.stamp[n as usize] = epoch;
                    stack.push(n);
                } else {
                    let tri = self.tris[t as usize];
                    let outer_slot = (0..3).find(|&j| self.nbr[n as usize][j] == t).unwrap();
                    boundary.push(BoundaryEdge {
                        e0: tri[(i + 1) % 3],
                        e1: tri[(i + 2) % 3],
                        outer: n,
                        outer_slot,
                    });
                }
            }
        }
        for &t in &bad {
            self.alive[t as usize] = false;
            self.free.push(t);
        }

        let new: Vec<u32> = boundary
            .iter()
            .map(|e| {
                let t = self.alloc([e.e0, e.e1, v], [NONE, NONE, e.outer]);
                self.nbr[e.outer as usize][e.outer_slot] = t;
                t
            })
            .collect();
        for (k, e) in boundary.iter().enumerate() {
            let across_e1_p = boundary.iter().position(|o| o.e0 == e.e1).unwrap();
            let across_p_e0 = boundary.iter().position(|o| o.e1 == e.e0).unwrap();
            self.nbr[new[k] as usize][0] = new[across_e1_p];
            self.nbr[new[k] as usize][1] = new[across_p_e0];
        }
        // Move the ghost vertex of new ghost triangles into slot 2.
        for &t in &new {
            let (tri, nb) = (self.tris[t as usize], self.nbr[t as usize]);
            let shift = if tri[0] == GHOST {
                1
            } else if tri[1] == GHOST {
                2
            } else {
                0
            };
            if shift != 0 {
                self.tris[t as usize] = [tri[shift % 3], tri[(shift + 1) % 3], tri[(shift + 2) % 3]];
                self.nbr[t as usize] = [nb[shift % 3], nb[(shift + 1) % 3], nb[(shift + 2) % 3]];
            }
        }
        self.last = new.iter().copied().find(|&t| !self.is_ghost(t)).unwrap_or(new[0]);
    }
}

fn strictly_between(a: Coord<f64>, b: Coord<f64>, p: Coord<f64>) -> bool {
    let dot = |o: Coord<f64>, q: Coord<f64>, r: Coord<f64>| (q.x - o.x) * (r.x - o.x) + (q.y - o.y) * (r.y - o.y);
    dot(a, p, b) > 0.0 && dot(b, p, a) > 0.0
}

pub(super) fn build(mut pts: Vec<Vertex>) -> Result<Triangulation> {
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!(
            "triangulation needs at least 3 distinct points, got {}",
            pts.len()
        )));
    }
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(INSERTION_SEED));
    let third = (2..pts.len())
        .find(|&k| orient2d(pts[0].coord(), pts[1].coord(), pts[k].coord()) != 0.0)
        .ok_or_else(|| Error::Degenerate("all points are collinear".into()))?;
    pts.swap(2, third);
    if orient2d(pts[0].coord(), pts[1].coord(), pts[2].coord()) < 0.0 {
        pts.swap(1, 2);
    }

    let mut mesh = Mesh {
        pts: &pts,
        tris: Vec::with_capacity(2 * pts.len() + 8),
        nbr: Vec::with_capacity(2 * pts.len() + 8),
        alive: Vec::new(),
        stamp: Vec::new(),
        epoch: 0,
        free: Vec::new(),
        last: 0,
        walk_seed: 0x9e37_79b9,
    };
    // Triangle 0 = (0, 1, 2); ghosts across edges opposite 2, 0, 1.
    mesh.alloc([0, 1, 2], [2, 3, 1]);
    mesh.alloc([1, 0, GHOST], [3, 2, 0]);
    mesh.alloc([2, 1, GHOST], [1, 3, 0]);
    mesh.alloc([0, 2, GHOST], [2, 1, 0]);

    for v in 3..pts.len() as u32 {
        mesh.insert(v);
    }
    Ok(finish(&mesh, &pts))
}

fn finish(mesh: &Mesh<'_>, pts: &[Vertex]) -> Triangulation {
    let mut remap = vec![NONE; mesh.tris.len()];
    let mut triangles = Vec::new();
    for (t, slot) in remap.iter_mut().enumerate() {
        if mesh.alive[t] && mesh.tris[t][2] != GHOST {
            *slot = triangles.len() as u32;
            triangles.push(mesh.tris[t]);
        }
    }
    let neighbors: Vec<[u32; 3]> = (0..mesh.tris.len())
        .filter(|&t| remap[t] != NONE)
        .map(|t| mesh.nbr[t].map(|n| if remap[n as usize] == NONE { NO_NEIGHBOR } else { remap[n as usize] }))
        .collect();

    let n = pts.len();
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(triangles.len() * 6);
    for tri in &triangles {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            edges.push((a, b));
            edges.push((b, a));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    let mut adj_offsets = vec![0u32; n + 1];
    for &(a, _) in &edges {
        adj_offsets[a as usize + 1] += 1;
    }
    for i in 1..=n {
        adj_offsets[i] += adj_offsets[i - 1];
    }
    let adj = edges.into_iter().map(|(_, b)| b).collect();

    Triangulation {
        vertices: pts.to_vec(),
        triangles,
        neighbors,
        adj_offsets,
        adj,
    }
}
