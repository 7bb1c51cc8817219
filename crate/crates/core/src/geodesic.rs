//! Icospheres: recursively subdivided icosahedra with vertices on the unit sphere.
//!
//! Each subdivision splits every triangle 1 -> 4 at its edge midpoints and pushes the
//! midpoints out to the unit sphere. Two ordering rules make the mesh convenient for
//! multi-resolution work:
//!
//! - vertices of order `n - 1` are a prefix of the vertices of order `n`, and new midpoint
//!   vertices follow in ascending order of their sorted parent-edge key;
//! - the children of face `f` at order `n - 1` are faces `4f .. 4f + 4` at order `n`.
//!
//! The midpoint of an edge lies on the great circle through its endpoints, so the radial
//! cones of the four children partition the cone of their parent exactly. Point location
//! exploits this by descending the face hierarchy from the 20 base faces.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::Vec3;
use crate::{Error, Result};

/// Default guard on the subdivision order (order 10 already has ~10.5M vertices).
pub const DEFAULT_MAX_ORDER: u32 = 10;

/// Points within this sine-distance of an edge plane are treated as lying on the edge.
const EDGE_EPS: f64 = 1e-12;

pub const fn vertex_count(order: u32) -> usize {
    10 * (1usize << (2 * order)) + 2
}

pub const fn face_count(order: u32) -> usize {
    20 * (1usize << (2 * order))
}

pub const fn edge_count(order: u32) -> usize {
    30 * (1usize << (2 * order))
}

/// Result of [`Icosphere::locate`]: the containing face and barycentric weights of the
/// radial ray's intersection with the planar face, aligned with `corners`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Location {
    pub face: usize,
    pub corners: [u32; 3],
    pub weights: [f64; 3],
}

/// Compressed per-vertex adjacency lists.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Csr {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Csr {
    fn from_pairs(n: usize, pairs: impl Iterator<Item = (u32, u32)> + Clone) -> Csr {
        let mut offsets = vec![0u32; n + 1];
        for (k, _) in pairs.clone() {
            offsets[k as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0u32; offsets[n] as usize];
        for (k, item) in pairs {
            let slot = &mut fill[k as usize];
            items[*slot as usize] = item;
            *slot += 1;
        }
        Csr { offsets, items }
    }

    fn get(&self, i: usize) -> &[u32] {
        &self.items[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Icosphere {
    order: u32,
    vertices: Vec<Vec3>,
    /// Faces of every order `0..=order`; the last entry is this mesh.
    levels: Vec<Vec<[u32; 3]>>,
    /// Parent edge of every vertex with index `>= coarse_vertex_count`.
    parents: Vec<[u32; 2]>,
    coarse_vertex_count: usize,
    /// Sorted undirected edges `(lo, hi)`.
    edges: Vec<[u32; 2]>,
    neighbors: Csr,
    incident_faces: Csr,
}

fn base_icosahedron() -> (Vec<Vec3>, Vec<[u32; 3]>) {
    // Cyclic permutations of (0, +-1, +-phi). The coordinate axes are 2-fold symmetry
    // axes and the rotations about them are exact sign flips, so the mesh is exactly
    // invariant under them at every order.
    let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
    let s = libm::sqrt(1.0 + phi * phi);
    let (one, phi) = (1.0 / s, phi / s);
    let vertices = vec![
        Vec3::new(-one, phi, 0.0),
        Vec3::new(one, phi, 0.0),
        Vec3::new(-one, -phi, 0.0),
        Vec3::new(one, -phi, 0.0),
        Vec3::new(0.0, -one, phi),
        Vec3::new(0.0, one, phi),
        Vec3::new(0.0, -one, -phi),
        Vec3::new(0.0, one, -phi),
        Vec3::new(phi, 0.0, -one),
        Vec3::new(phi, 0.0, one),
        Vec3::new(-phi, 0.0, -one),
        Vec3::new(-phi, 0.0, one),
    ];
    // Faces are the mutually adjacent triples (edge chord 2 / s) in lexicographic order,
    // wound outward.
    let edge = 2.0 * one;
    let adjacent = |a: usize, b: usize| ((vertices[a] - vertices[b]).norm() - edge).abs() < 1e-9;
    let mut faces = Vec::with_capacity(20);
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if adjacent(a, b) && adjacent(b, c) && adjacent(a, c) {
                    let f = if vertices[a].triple(vertices[b], vertices[c]) > 0.0 {
                        [a, b, c]
                    } else {
                        [a, c, b]
                    };
                    faces.push(f.map(|i| i as u32));
                }
            }
        }
    }
    debug_assert_eq!(faces.len(), 20);
    (vertices, faces)
}

fn sorted_edges(faces: &[[u32; 3]]) -> Vec<[u32; 2]> {
    let mut edges = Vec::with_capacity(faces.len() * 3);
    for f in faces {
        for i in 0..3 {
            let (a, b) = (f[i], f[(i + 1) % 3]);
            edges.push(if a < b { [a, b] } else { [b, a] });
        }
    }
    edges.sort_unstable();
    edges.dedup();
    edges
}

impl Icosphere {
    /// Builds the order-`order` icosphere under [`DEFAULT_MAX_ORDER`].
    pub fn new(order: u32) -> Result<Self> {
        Self::with_max_order(order, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(order: u32, max_order: u32) -> Result<Self> {
        // 20 * 4^n must fit in u32 face ids.
        if order > max_order || order > 14 {
            return Err(Error::Capacity {
                order,
                max_order: max_order.min(14),
            });
        }
        let (mut vertices, base_faces) = base_icosahedron();
        vertices.reserve_exact(vertex_count(order) - vertices.len());
        let mut levels = Vec::with_capacity(order as usize + 1);
        levels.push(base_faces);
        let mut parents = Vec::new();
        let mut coarse_vertex_count = 12;

        for _ in 0..order {
            let coarse = levels.last().expect("level 0 exists");
            let split = sorted_edges(coarse);
            let first_new = vertices.len();
            for &[a, b] in &split {
                let m = vertices[a as usize] + vertices[b as usize];
                vertices.push(m.normalized());
            }
            let midpoint = |a: u32, b: u32| -> u32 {
                let key = if a < b { [a, b] } else { [b, a] };
                let rank = split.binary_search(&key).expect("edge of a coarse face");
                (first_new + rank) as u32
            };
            let mut fine = Vec::with_capacity(coarse.len() * 4);
            for &[a, b, c] in coarse {
                let (ab, bc, ca) = (midpoint(a, b), midpoint(b, c), midpoint(c, a));
                fine.push([a, ab, ca]);
                fine.push([ab, b, bc]);
                fine.push([ca, bc, c]);
                fine.push([ab, bc, ca]);
            }
            coarse_vertex_count = first_new;
            parents = split;
            levels.push(fine);
        }

        let faces = levels.last().expect("at least one level");
        let edges = sorted_edges(faces);
        let n = vertices.len();
        let neighbors = Csr::from_pairs(
            n,
            edges
                .iter()
                .flat_map(|&[a, b]| [(a, b), (b, a)].into_iter()),
        );
        let incident_faces = Csr::from_pairs(
            n,
            faces
                .iter()
                .enumerate()
                .flat_map(|(fi, f)| f.map(|v| (v, fi as u32)).into_iter()),
        );
        if order == 0 {
            coarse_vertex_count = 0;
        }

        Ok(Icosphere {
            order,
            vertices,
            levels,
            parents,
            coarse_vertex_count,
            edges,
            neighbors,
            incident_faces,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Vec3 {
        self.vertices[i]
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        self.levels.last().expect("at least one level")
    }

    /// Faces of the coarser icosphere of order `order <= self.order()`.
    pub fn faces_at(&self, order: u32) -> &[[u32; 3]] {
        &self.levels[order as usize]
    }

    pub fn edges(&self) -> &[[u32; 2]] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces().len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Number of vertices inherited from the order-`n - 1` mesh (0 at order 0).
    pub fn coarse_vertex_count(&self) -> usize {
        self.coarse_vertex_count
    }

    /// Endpoints of the coarse edge vertex `v` was created on, or `None` for inherited
    /// vertices.
    pub fn parent_edge(&self, v: usize) -> Option<[u32; 2]> {
        if self.order == 0 || v < self.coarse_vertex_count {
            None
        } else {
            self.parents.get(v - self.coarse_vertex_count).copied()
        }
    }

    /// Neighbor vertices of `v`, ascending.
    pub fn edge_adjacency(&self, v: usize) -> &[u32] {
        self.neighbors.get(v)
    }

    /// Faces incident to `v`, ascending.
    pub fn face_adjacency(&self, v: usize) -> &[u32] {
        self.incident_faces.get(v)
    }

    pub fn face_vertices(&self, f: usize) -> [Vec3; 3] {
        self.faces()[f].map(|i| self.vertices[i as usize])
    }

    /// Arithmetic mean of the great-circle angle over all undirected edges.
    pub fn mean_edge_angle(&self) -> f64 {
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| self.vertices[a as usize].angle_to(self.vertices[b as usize]))
            .sum();
        total / self.edges.len() as f64
    }

    /// Signed volume of the closed polyhedron; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        self.faces()
            .iter()
            .map(|f| {
                let [a, b, c] = f.map(|i| self.vertices[i as usize]);
                a.triple(b, c) / 6.0
            })
            .sum()
    }

    /// Locates the face whose radial cone contains the unit vector `p`.
    ///
    /// Weights are the barycentric coordinates of the intersection of the ray from the
    /// origin through `p` with the planar face; they are non-negative and sum to 1. When
    /// `p` lies on a shared edge or vertex, the lowest face index among the faces
    /// containing it is returned.
    pub fn locate(&self, p: Vec3) -> Result<Location> {
        let norm = p.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > crate::projection::UNIT_TOLERANCE {
            return Err(Error::NonUnitVector { norm });
        }

        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (f, face) in self.levels[0].iter().enumerate() {
            let s = self.containment(face, p);
            if s > best_score {
                best = f;
                best_score = s;
            }
        }
        for level in &self.levels[1..] {
            let first = best * 4;
            best_score = f64::NEG_INFINITY;
            for (f, face) in level[first..first + 4].iter().enumerate() {
                let s = self.containment(face, p);
                if s > best_score {
                    best = first + f;
                    best_score = s;
                }
            }
        }

        if best_score < EDGE_EPS {
            // On (or numerically near) a boundary: prefer the lowest containing face.
            let faces = self.faces();
            let mut lowest: Option<usize> = None;
            for &corner in &faces[best] {
                for &f in self.face_adjacency(corner as usize) {
                    let f = f as usize;
                    if lowest.is_some_and(|l| l <= f) {
                        continue;
                    }
                    if self.containment(&faces[f], p) >= -EDGE_EPS {
                        lowest = Some(f);
                    }
                }
            }
            if let Some(f) = lowest {
                best = f;
            }
        }

        let corners = self.faces()[best];
        let weights = self.barycentric(&corners, p).ok_or(Error::NotLocated)?;
        Ok(Location {
            face: best,
            corners,
            weights,
        })
    }

    /// Minimum signed sine-distance from `p` to the three edge planes of `face`;
    /// non-negative iff `p` is inside the face's radial cone.
    fn containment(&self, face: &[u32; 3], p: Vec3) -> f64 {
        let [a, b, c] = face.map(|i| self.vertices[i as usize]);
        let mut m = f64::INFINITY;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            let n = u.cross(v);
            m = m.min(n.dot(p) / n.norm());
        }
        m
    }

    /// Barycentric weights of the ray/plane intersection, clamped to be non-negative.
    fn barycentric(&self, face: &[u32; 3], p: Vec3) -> Option<[f64; 3]> {
        let [a, b, c] = face.map(|i| self.vertices[i as usize]);
        let raw = [p.triple(b, c), p.triple(c, a), p.triple(a, b)].map(|w| w.max(0.0));
        let sum = raw[0] + raw[1] + raw[2];
        if sum.is_nan() || sum <= 0.0 {
            return None;
        }
        Some(raw.map(|w| w / sum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_an_icosahedron() {
        let s = Icosphere::new(0).unwrap();
        assert_eq!(
            (s.num_vertices(), s.num_faces(), s.num_edges()),
            (12, 20, 30)
        );
        assert_eq!(s.coarse_vertex_count(), 0);
        for v in 0..12 {
            assert_eq!(s.edge_adjacency(v).len(), 5);
            assert_eq!(s.face_adjacency(v).len(), 5);
        }
        for f in 0..20 {
            let [a, b, c] = s.face_vertices(f);
            assert!(a.triple(b, c) > 0.0, "face {f} is wound clockwise");
        }
        let expected = libm::acos(1.0 / libm::sqrt(5.0));
        assert!((s.mean_edge_angle() - expected).abs() < 1e-14);
    }

    #[test]
    fn capacity_guard() {
        assert_eq!(
            Icosphere::with_max_order(4, 3).unwrap_err(),
            Error::Capacity {
                order: 4,
                max_order: 3
            }
        );
        assert!(Icosphere::new(DEFAULT_MAX_ORDER + 1).is_err());
    }

    #[test]
    fn face_hierarchy_nests() {
        let s = Icosphere::new(3).unwrap();
        for order in 1..=3 {
            let (coarse, fine) = (s.faces_at(order - 1), s.faces_at(order));
            for (f, parent) in coarse.iter().enumerate() {
                for child in &fine[4 * f..4 * f + 4] {
                    // every child corner is a parent corner or a midpoint of a parent edge
                    for &v in child {
                        let ok = parent.contains(&v)
                            || (0..3).any(|i| {
                                let m = s.vertex(parent[i] as usize)
                                    + s.vertex(parent[(i + 1) % 3] as usize);
                                (m.normalized() - s.vertex(v as usize)).norm() < 1e-15
                            });
                        assert!(ok);
                    }
                }
            }
        }
    }

    #[test]
    fn parent_edges_are_recorded() {
        let s = Icosphere::new(2).unwrap();
        assert_eq!(s.coarse_vertex_count(), 42);
        assert_eq!(s.parent_edge(0), None);
        let mut prev = [0, 0];
        for v in 42..s.num_vertices() {
            let [a, b] = s.parent_edge(v).unwrap();
            assert!(a < b && (a as usize) < 42 && (b as usize) < 42);
            assert!([a, b] > prev, "midpoints must follow sorted edge order");
            prev = [a, b];
            let m = (s.vertex(a as usize) + s.vertex(b as usize)).normalized();
            assert_eq!(m, s.vertex(v));
        }
    }

    #[test]
    fn locate_vertices_and_centroids() {
        let s = Icosphere::new(2).unwrap();
        for (f, face) in s.faces().iter().enumerate() {
            let [a, b, c] = s.face_vertices(f);
            let loc = s.locate(((a + b + c) / 3.0).normalized()).unwrap();
            assert_eq!(loc.face, f);
            for w in loc.weights {
                assert!((w - 1.0 / 3.0).abs() < 1e-9);
            }
            for &v in face {
                let loc = s.locate(s.vertex(v as usize)).unwrap();
                let slot = loc.corners.iter().position(|&c| c == v).unwrap();
                assert!((loc.weights[slot] - 1.0).abs() < 1e-12);
                assert_eq!(loc.face as u32, s.face_adjacency(v as usize)[0]);
            }
        }
    }

    #[test]
    fn locate_rejects_non_unit() {
        let s = Icosphere::new(0).unwrap();
        assert!(matches!(
            s.locate(Vec3::new(0.0, 0.0, 2.0)),
            Err(Error::NonUnitVector { .. })
        ));
    }
}
