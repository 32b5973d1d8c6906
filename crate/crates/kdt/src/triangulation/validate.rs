use super::{TriangleId, Triangulation, VertexId};
use crate::geometry::{self, Sign};
use rayon::prelude::*;

/// Outcome of a full mesh check. `violations` lists (triangle, vertex)
/// pairs breaking the empty-circumcircle property; `structural` lists
/// broken orientation, adjacency or bookkeeping invariants.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<(TriangleId, VertexId)>,
    pub structural: Vec<String>,
}

impl Triangulation {
    /// Exhaustive Delaunay check: every real triangle against every other
    /// alive vertex, plus neighbor mutuality, orientation, Euler counts
    /// and hint liveness. Reports, never mutates.
    pub fn is_delaunay(&self) -> ValidationReport {
        let mut structural = Vec::new();

        if !self.euler_consistent() {
            structural.push(format!(
                "Euler counts broken: n={} real={} ghost={}",
                self.alive_verts, self.alive_real, self.alive_ghost
            ));
        }

        let mut in_real_triangle = vec![false; self.verts.len()];
        for t in self.alive_triangle_ids() {
            let rec = &self.tris[t.index()];
            for (i, &u) in rec.v.iter().enumerate() {
                if u.is_ghost() {
                    if i != 2 {
                        structural.push(format!("triangle {} ghost not at index 2", t.0));
                    }
                    continue;
                }
                if !self.is_vertex_alive(u) {
                    structural.push(format!("triangle {} references dead vertex {}", t.0, u.0));
                } else if !rec.is_ghost() {
                    in_real_triangle[u.index()] = true;
                }
            }
            if !rec.is_ghost()
                && geometry::orient2d_sign(
                    self.point(rec.v[0]),
                    self.point(rec.v[1]),
                    self.point(rec.v[2]),
                ) != Sign::CCW
            {
                structural.push(format!("triangle {} is not counter-clockwise", t.0));
            }
            for i in 0..3 {
                let u = rec.n[i];
                if !self.is_triangle_alive(u) {
                    structural.push(format!("triangle {} has dead neighbor slot {}", t.0, i));
                    continue;
                }
                let urec = &self.tris[u.index()];
                let a = rec.v[(i + 1) % 3];
                let b = rec.v[(i + 2) % 3];
                match urec.n.iter().position(|&w| w == t) {
                    Some(j) => {
                        let c = urec.v[(j + 1) % 3];
                        let d = urec.v[(j + 2) % 3];
                        if !((a == c && b == d) || (a == d && b == c)) {
                            structural.push(format!(
                                "triangles {} and {} disagree on their shared edge",
                                t.0, u.0
                            ));
                        }
                    }
                    None => structural.push(format!(
                        "neighbor link {} -> {} is not mutual",
                        t.0, u.0
                    )),
                }
            }
        }
        if self.vertex_count() >= 3 {
            for v in self.alive_vertex_ids() {
                if !in_real_triangle[v.index()] {
                    structural.push(format!("vertex {} is in no real triangle", v.0));
                }
                let h = self.verts[v.index()].hint;
                if !self.is_triangle_alive(h)
                    || self.tris[h.index()].vertex_index(v).is_none()
                {
                    structural.push(format!("vertex {} has a stale hint", v.0));
                }
            }
        }

        let alive: Vec<VertexId> = self.alive_vertex_ids().collect();
        let real: Vec<TriangleId> = self.alive_real_triangle_ids().collect();
        let mut violations: Vec<(TriangleId, VertexId)> = real
            .par_iter()
            .flat_map_iter(|&t| {
                let v = self.triangle_vertices(t);
                let (pa, pb, pc) = (self.point(v[0]), self.point(v[1]), self.point(v[2]));
                alive
                    .iter()
                    .filter(move |&&w| w != v[0] && w != v[1] && w != v[2])
                    .filter_map(move |&w| {
                        if geometry::in_circle_sign(pa, pb, pc, self.point(w)) == Sign::INSIDE {
                            Some((t, w))
                        } else {
                            None
                        }
                    })
                    .collect::<Vec<_>>()
                    .into_iter()
            })
            .collect();
        violations.sort_unstable();

        ValidationReport {
            ok: violations.is_empty() && structural.is_empty(),
            violations,
            structural,
        }
    }
}
