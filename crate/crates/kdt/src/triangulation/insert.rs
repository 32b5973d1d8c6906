use super::{DiffLog, LocateResult, TriangleId, Triangulation, VertexId};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, Sign};
use crate::partition::BlockId;
use std::collections::{HashMap, HashSet};

impl Triangulation {
    /// Whether `t` belongs to the insertion cavity of `p`: a real triangle
    /// whose circumcircle strictly contains `p` (cocircular counts as not
    /// contained, keeping the cavity minimal), or a ghost triangle whose
    /// hull edge strictly sees `p` from outside. A point exactly on a hull
    /// edge pulls in that edge's ghost so the hull splits correctly.
    fn in_cavity(&self, t: TriangleId, p: Point) -> bool {
        let v = self.triangle_vertices(t);
        if v[2].is_ghost() {
            let g0 = self.point(v[0]);
            let g1 = self.point(v[1]);
            match geometry::orient2d_sign(g0, g1, p) {
                Sign::Positive => true,
                Sign::Negative => false,
                Sign::Zero => within_open_segment(g0, g1, p),
            }
        } else {
            geometry::in_circle_sign(self.point(v[0]), self.point(v[1]), self.point(v[2]), p)
                == Sign::Positive
        }
    }

    fn cavity_seeds(&self, loc: LocateResult) -> Result<Vec<TriangleId>> {
        match loc {
            LocateResult::InTriangle(t) => Ok(vec![t]),
            LocateResult::OnEdge(t, i) => Ok(vec![t, self.triangle_neighbors(t)[i]]),
            LocateResult::OutsideHull(g) => Ok(vec![g]),
            LocateResult::OnVertex(v) => {
                let p = self.point(v);
                Err(Error::CoincidentPoint {
                    vertex: v.0,
                    x: p.x,
                    y: p.y,
                })
            }
        }
    }

    fn grow_cavity(&self, seeds: &[TriangleId], p: Point) -> Vec<TriangleId> {
        let mut cavity = Vec::new();
        let mut seen: HashSet<TriangleId> = HashSet::new();
        let mut stack: Vec<TriangleId> = Vec::new();
        for &s in seeds {
            debug_assert!(self.in_cavity(s, p));
            if seen.insert(s) {
                stack.push(s);
            }
        }
        while let Some(t) = stack.pop() {
            cavity.push(t);
            for &u in &self.triangle_neighbors(t) {
                if !seen.contains(&u) && self.in_cavity(u, p) {
                    seen.insert(u);
                    stack.push(u);
                }
            }
        }
        cavity
    }

    /// Insert a new point; allocates a fresh vertex id.
    pub fn insert(
        &mut self,
        p: Point,
        owner: BlockId,
        hint: TriangleId,
    ) -> Result<(VertexId, DiffLog)> {
        p.check_finite()?;
        let v = self.push_vertex(p);
        match self.insert_existing(v, p, owner, hint) {
            Ok(log) => Ok((v, log)),
            Err(e) => {
                self.verts.pop();
                self.alive_verts -= 1;
                Err(e)
            }
        }
    }

    /// Insert with a pre-allocated vertex id (fresh from `build_initial`,
    /// or a dead id being revived by a move).
    pub(crate) fn insert_existing(
        &mut self,
        v: VertexId,
        p: Point,
        owner: BlockId,
        hint: TriangleId,
    ) -> Result<DiffLog> {
        let loc = self.locate(p, hint);
        let seeds = self.cavity_seeds(loc)?;
        let cavity = self.grow_cavity(&seeds, p);
        let cavity_set: HashSet<TriangleId> = cavity.iter().copied().collect();

        // Directed boundary arcs of the cavity, keyed by start vertex.
        struct Arc {
            to: VertexId,
            outer: TriangleId,
            outer_idx: usize,
        }
        let mut arcs: HashMap<VertexId, Arc> = HashMap::new();
        let mut start = VertexId::GHOST;
        for &t in &cavity {
            let tv = self.triangle_vertices(t);
            let tn = self.triangle_neighbors(t);
            for i in 0..3 {
                if cavity_set.contains(&tn[i]) {
                    continue;
                }
                let from = tv[(i + 1) % 3];
                let to = tv[(i + 2) % 3];
                let outer_idx = self.tris[tn[i].index()]
                    .n
                    .iter()
                    .position(|&w| w == t)
                    .expect("mutual neighbor link");
                if arcs
                    .insert(
                        from,
                        Arc {
                            to,
                            outer: tn[i],
                            outer_idx,
                        },
                    )
                    .is_some()
                {
                    return Err(Error::Internal(
                        "insertion cavity boundary is not a simple cycle".to_string(),
                    ));
                }
                if start == VertexId::GHOST || from < start {
                    start = from;
                }
            }
        }
        if arcs.len() < 3 {
            return Err(Error::Internal("insertion cavity too small".to_string()));
        }

        // Walk the cycle read-only first; mutate only once it checks out.
        let mut ordered_arcs = Vec::with_capacity(arcs.len());
        let mut from = start;
        for _ in 0..arcs.len() {
            let arc = arcs
                .get(&from)
                .ok_or_else(|| Error::Internal("open insertion cavity boundary".to_string()))?;
            ordered_arcs.push((from, arc.to, arc.outer, arc.outer_idx));
            from = arc.to;
            if from == start {
                break;
            }
        }
        if ordered_arcs.len() != arcs.len() || from != start {
            return Err(Error::Internal(
                "insertion cavity boundary is not a single cycle".to_string(),
            ));
        }

        for &t in &cavity {
            self.kill_triangle(t);
        }

        {
            let rec = &mut self.verts[v.index()];
            rec.point = p;
            rec.owner = owner;
            if !rec.alive {
                rec.alive = true;
                self.alive_verts += 1;
            }
        }

        // Star the cavity boundary from v.
        let mut created = Vec::with_capacity(ordered_arcs.len());
        for &(s, e, outer, outer_idx) in &ordered_arcs {
            let t = self.alloc_triangle([s, e, v]);
            let idx = self.tris[t.index()]
                .edge_index(s, e)
                .expect("boundary edge in new triangle");
            self.set_mutual(t, idx, outer, outer_idx);
            created.push(t);
        }
        for w in 0..created.len() {
            let e = ordered_arcs[w].1;
            let t = created[w];
            let next = created[(w + 1) % created.len()];
            let i = self.tris[t.index()].edge_index(e, v).expect("fan edge");
            let j = self.tris[next.index()].edge_index(e, v).expect("fan edge");
            self.set_mutual(t, i, next, j);
        }

        Ok(self.edge_diff(cavity, created))
    }

    /// Conservative affected region of inserting `p`: the cavity computed
    /// against the current mesh plus its boundary ring. Read-only; used by
    /// the runtime's conflict detection.
    pub fn cavity_region(&self, p: Point, hint: TriangleId) -> Vec<TriangleId> {
        let loc = self.locate(p, hint);
        let seeds = match self.cavity_seeds(loc) {
            Ok(s) => s,
            // Coincident destination: fall back to the existing vertex's
            // star as the affected region.
            Err(_) => {
                if let LocateResult::OnVertex(v) = loc {
                    return self.star_region(v);
                }
                return Vec::new();
            }
        };
        let cavity = self.grow_cavity(&seeds, p);
        with_ring(self, cavity)
    }
}

pub(super) fn with_ring(tri: &Triangulation, mut region: Vec<TriangleId>) -> Vec<TriangleId> {
    let set: HashSet<TriangleId> = region.iter().copied().collect();
    let mut ring = Vec::new();
    for &t in &region {
        for &u in &tri.triangle_neighbors(t) {
            if u != TriangleId::NONE && !set.contains(&u) && !ring.contains(&u) {
                ring.push(u);
            }
        }
    }
    region.extend(ring);
    region
}

fn within_open_segment(a: Point, b: Point, p: Point) -> bool {
    if a.x != b.x {
        p.x > a.x.min(b.x) && p.x < a.x.max(b.x)
    } else {
        p.y > a.y.min(b.y) && p.y < a.y.max(b.y)
    }
}
