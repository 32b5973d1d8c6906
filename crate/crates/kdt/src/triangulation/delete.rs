use super::insert::with_ring;
use super::{DiffLog, TriangleId, Triangulation, VertexId};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, Sign};

/// One position of the link cycle around a vertex being deleted: the link
/// vertex `w_j` plus the outside triangle across the edge `(w_j, w_{j+1})`.
#[derive(Clone, Copy)]
struct LinkEntry {
    vertex: VertexId,
    outer: TriangleId,
    outer_idx: usize,
}

impl Triangulation {
    /// Alive triangles incident to `v`, counter-clockwise. Hull vertices
    /// include their two ghost triangles.
    pub fn star_triangles(&self, v: VertexId) -> Result<Vec<TriangleId>> {
        Ok(self.collect_star(v)?.0)
    }

    /// Star plus one ring of neighbors; the conservative affected region
    /// of deleting `v`, used by conflict detection.
    pub fn star_region(&self, v: VertexId) -> Vec<TriangleId> {
        let star = self
            .star_triangles(v)
            .expect("star of alive vertex");
        with_ring(self, star)
    }

    fn collect_star(&self, v: VertexId) -> Result<(Vec<TriangleId>, Vec<LinkEntry>)> {
        if !self.is_vertex_alive(v) {
            return Err(Error::InvalidVertex(v.0));
        }
        let t0 = self.verts[v.index()].hint;
        if !self.is_triangle_alive(t0) {
            return Err(Error::Internal(format!(
                "vertex {} has no alive incident triangle",
                v.0
            )));
        }
        let mut star = Vec::new();
        let mut link = Vec::new();
        let mut cur = t0;
        for _ in 0..self.tris.len() + 1 {
            let rec = &self.tris[cur.index()];
            let i = rec
                .vertex_index(v)
                .ok_or_else(|| Error::Internal(format!("stale hint for vertex {}", v.0)))?;
            star.push(cur);
            let outer = rec.n[i];
            let outer_idx = self.tris[outer.index()]
                .n
                .iter()
                .position(|&w| w == cur)
                .ok_or_else(|| Error::Internal("broken mutual neighbor link".to_string()))?;
            link.push(LinkEntry {
                vertex: rec.v[(i + 1) % 3],
                outer,
                outer_idx,
            });
            cur = rec.n[(i + 1) % 3];
            if cur == t0 {
                return Ok((star, link));
            }
        }
        Err(Error::Internal("star traversal did not close".to_string()))
    }

    /// Remove `v` and retriangulate its star polygon by clipping ears
    /// whose circumcircle contains no other remaining link vertex. The
    /// ghost vertex takes part in the cycle for hull vertices, so new hull
    /// edges and their ghosts come out of the same loop.
    pub fn delete(&mut self, v: VertexId) -> Result<DiffLog> {
        let (star, link) = self.collect_star(v)?;
        if self.alive_verts - 1 < 3 {
            return Err(Error::DegenerateResult(v.0));
        }

        // If the link spans every other vertex, deleting v may flatten the
        // mesh; refuse while nothing has been touched yet.
        let real_link: Vec<VertexId> = link
            .iter()
            .map(|e| e.vertex)
            .filter(|w| !w.is_ghost())
            .collect();
        if real_link.len() == self.alive_verts - 1 && all_collinear(self, &real_link) {
            return Err(Error::DegenerateResult(v.0));
        }

        let mut cycle = link;
        let mut created = Vec::new();
        while cycle.len() > 3 {
            let len = cycle.len();
            let mut clipped = false;
            for i in 0..len {
                let prev = cycle[(i + len - 1) % len];
                let apex = cycle[i];
                let next = cycle[(i + 1) % len];
                let rest = || {
                    cycle.iter().enumerate().filter_map(move |(j, e)| {
                        if j == i || j == (i + len - 1) % len || j == (i + 1) % len {
                            None
                        } else {
                            Some(e.vertex)
                        }
                    })
                };
                if !self.ear_clippable(prev.vertex, apex.vertex, next.vertex, rest()) {
                    continue;
                }
                let t = self.alloc_triangle([prev.vertex, apex.vertex, next.vertex]);
                let i1 = self.tris[t.index()]
                    .edge_index(prev.vertex, apex.vertex)
                    .expect("ear edge");
                self.set_mutual(t, i1, prev.outer, prev.outer_idx);
                let i2 = self.tris[t.index()]
                    .edge_index(apex.vertex, next.vertex)
                    .expect("ear edge");
                self.set_mutual(t, i2, apex.outer, apex.outer_idx);
                created.push(t);
                // The chord (prev, next) becomes the cycle edge, bordered
                // by the new triangle from outside the shrunken polygon.
                let chord_idx = self.tris[t.index()]
                    .edge_index(next.vertex, prev.vertex)
                    .expect("chord edge");
                let pi = (i + len - 1) % len;
                cycle[pi].outer = t;
                cycle[pi].outer_idx = chord_idx;
                cycle.remove(i);
                clipped = true;
                break;
            }
            if !clipped {
                return Err(Error::Internal(
                    "no clippable ear in star polygon".to_string(),
                ));
            }
        }

        let t = self.alloc_triangle([cycle[0].vertex, cycle[1].vertex, cycle[2].vertex]);
        for w in 0..3 {
            let e = cycle[w];
            let idx = self.tris[t.index()]
                .edge_index(e.vertex, cycle[(w + 1) % 3].vertex)
                .expect("closing edge");
            self.set_mutual(t, idx, e.outer, e.outer_idx);
        }
        created.push(t);

        for &s in &star {
            self.kill_triangle(s);
        }
        self.verts[v.index()].alive = false;
        self.alive_verts -= 1;

        Ok(self.edge_diff(star, created))
    }

    fn ear_clippable(
        &self,
        a: VertexId,
        b: VertexId,
        c: VertexId,
        rest: impl Iterator<Item = VertexId>,
    ) -> bool {
        if a.is_ghost() || b.is_ghost() || c.is_ghost() {
            // Ghost ear: rotated to [g0, g1, ghost] it proposes the hull
            // edge g1 → g0, valid once every remaining link vertex lies on
            // its closed inner side.
            let (g0, g1) = if c.is_ghost() {
                (a, b)
            } else if b.is_ghost() {
                (c, a)
            } else {
                (b, c)
            };
            let p1 = self.point(g1);
            let p0 = self.point(g0);
            for w in rest {
                if w.is_ghost() {
                    continue;
                }
                let pw = self.point(w);
                match geometry::orient2d_sign(p1, p0, pw) {
                    Sign::Positive => {}
                    Sign::Negative => return false,
                    Sign::Zero => {
                        if within_open_segment(p1, p0, pw) {
                            return false;
                        }
                    }
                }
            }
            true
        } else {
            let (pa, pb, pc) = (self.point(a), self.point(b), self.point(c));
            if geometry::orient2d_sign(pa, pb, pc) != Sign::Positive {
                return false;
            }
            for w in rest {
                if w.is_ghost() {
                    continue;
                }
                if geometry::in_circle_sign(pa, pb, pc, self.point(w)) == Sign::Positive {
                    return false;
                }
            }
            true
        }
    }

    /// Relocate `v` to `q`: exactly delete followed by insert reusing the
    /// identity, with the insertion walk starting next to the old star.
    pub fn move_point(&mut self, v: VertexId, q: Point) -> Result<DiffLog> {
        if !self.is_vertex_alive(v) {
            return Err(Error::InvalidVertex(v.0));
        }
        q.check_finite()?;
        let old = self.point(v);
        let owner = self.owner(v);
        let mut log = self.delete(v)?;
        let hint = log.created_triangles[0];
        match self.insert_existing(v, q, owner, hint) {
            Ok(rest) => {
                log.merge(rest);
                Ok(log)
            }
            Err(e) => {
                // Put the vertex back where it was so the mesh stays valid.
                self.insert_existing(v, old, owner, hint).map_err(|e2| {
                    Error::Internal(format!("failed to restore moved vertex: {e2}"))
                })?;
                Err(e)
            }
        }
    }
}

fn all_collinear(tri: &Triangulation, verts: &[VertexId]) -> bool {
    if verts.len() < 3 {
        return true;
    }
    let a = tri.point(verts[0]);
    let b = tri.point(verts[1]);
    verts[2..]
        .iter()
        .all(|&w| geometry::orient2d_sign(a, b, tri.point(w)) == Sign::Zero)
}

fn within_open_segment(a: Point, b: Point, p: Point) -> bool {
    if a.x != b.x {
        p.x > a.x.min(b.x) && p.x < a.x.max(b.x)
    } else {
        p.y > a.y.min(b.y) && p.y < a.y.max(b.y)
    }
}
