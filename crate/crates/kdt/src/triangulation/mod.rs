//! Triangle-based Delaunay mesh store.
//!
//! Triangles hold three vertex ids in counter-clockwise order and three
//! neighbor ids, `neighbors[i]` being the triangle across the edge opposite
//! `vertices[i]`. The region outside the convex hull is represented by a
//! fan of ghost triangles around a single symbolic ghost vertex, one ghost
//! per hull edge, so hull insertions and deletions run through the same
//! cavity and ear machinery as interior ones.
//!
//! Ghost triangles are stored rotated so the ghost vertex sits at index 2;
//! for a ghost `[g0, g1, GHOST]` the corresponding counter-clockwise hull
//! edge is `g1 → g0`.

mod delete;
mod insert;
mod locate;
mod validate;

pub use locate::LocateResult;
pub use validate::ValidationReport;

use crate::error::{Error, Result};
use crate::geometry::{self, Point, Sign};
use crate::partition::BlockId;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// Dense handle for a vertex. `VertexId::GHOST` is the symbolic vertex at
/// infinity and never indexes the vertex table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub u32);

impl VertexId {
    pub const GHOST: VertexId = VertexId(u32::MAX);

    pub fn is_ghost(self) -> bool {
        self == VertexId::GHOST
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Dense handle for a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriangleId(pub u32);

impl TriangleId {
    pub const NONE: TriangleId = TriangleId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug)]
struct VertexRecord {
    point: Point,
    owner: BlockId,
    alive: bool,
    hint: TriangleId,
}

#[derive(Clone, Debug)]
struct TriangleRecord {
    v: [VertexId; 3],
    n: [TriangleId; 3],
    alive: bool,
}

impl TriangleRecord {
    fn is_ghost(&self) -> bool {
        self.v[2].is_ghost()
    }

    fn vertex_index(&self, v: VertexId) -> Option<usize> {
        self.v.iter().position(|&u| u == v)
    }

    /// Index `i` such that the edge opposite `v[i]` is `{a, b}`.
    fn edge_index(&self, a: VertexId, b: VertexId) -> Option<usize> {
        (0..3).find(|&i| {
            let p = self.v[(i + 1) % 3];
            let q = self.v[(i + 2) % 3];
            (p == a && q == b) || (p == b && q == a)
        })
    }
}

/// Removed/created triangles and the real-edge churn of one mutation.
/// Edge churn is what a move can add or remove: the per-move counts feed
/// the step metrics.
#[derive(Clone, Debug, Default)]
pub struct DiffLog {
    pub removed_triangles: Vec<TriangleId>,
    pub created_triangles: Vec<TriangleId>,
    pub edges_deleted: Vec<(VertexId, VertexId)>,
    pub edges_inserted: Vec<(VertexId, VertexId)>,
}

impl DiffLog {
    pub fn merge(&mut self, other: DiffLog) {
        self.removed_triangles.extend(other.removed_triangles);
        self.created_triangles.extend(other.created_triangles);
        self.edges_deleted.extend(other.edges_deleted);
        self.edges_inserted.extend(other.edges_inserted);
    }
}

/// JSON dump of the real part of a mesh. Triangles are counter-clockwise,
/// rotated so the smallest vertex index comes first, and sorted; vertices
/// are indexed by position.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MeshDump {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Debug)]
pub struct Triangulation {
    verts: Vec<VertexRecord>,
    tris: Vec<TriangleRecord>,
    /// Triangle ids free for reuse.
    free_tris: Vec<TriangleId>,
    /// Triangle ids retired during the current time step; they move to
    /// `free_tris` only at the step boundary so per-step diff logs stay
    /// unambiguous.
    retired_tris: Vec<TriangleId>,
    alive_verts: usize,
    alive_real: usize,
    alive_ghost: usize,
    last_created: TriangleId,
}

impl Triangulation {
    fn empty() -> Self {
        Triangulation {
            verts: Vec::new(),
            tris: Vec::new(),
            free_tris: Vec::new(),
            retired_tris: Vec::new(),
            alive_verts: 0,
            alive_real: 0,
            alive_ghost: 0,
            last_created: TriangleId::NONE,
        }
    }

    /// Build a Delaunay triangulation of `points` by incremental insertion
    /// in an order shuffled from `seed`. Vertex ids equal input positions.
    pub fn build_initial(points: &[Point], seed: u64) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::TooFewPoints {
                need: 3,
                got: points.len(),
            });
        }
        for p in points {
            p.check_finite()?;
        }
        check_duplicates(points)?;

        let mut tri = Triangulation::empty();
        for &p in points {
            tri.push_vertex(p);
        }

        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

        // The first triangle needs three non-collinear points; pull the
        // first one that works into third position.
        let a = points[order[0] as usize];
        let b = points[order[1] as usize];
        let k = (2..order.len())
            .find(|&k| geometry::orient2d_sign(a, b, points[order[k] as usize]) != Sign::Zero)
            .ok_or(Error::CollinearInput)?;
        order.swap(2, k);

        tri.bootstrap_triangle(
            VertexId(order[0]),
            VertexId(order[1]),
            VertexId(order[2]),
        );
        for &id in &order[3..] {
            let hint = tri.last_created;
            let p = tri.verts[id as usize].point;
            tri.insert_existing(VertexId(id), p, BlockId::NONE, hint)?;
        }
        Ok(tri)
    }

    fn push_vertex(&mut self, p: Point) -> VertexId {
        let id = VertexId(self.verts.len() as u32);
        self.verts.push(VertexRecord {
            point: p,
            owner: BlockId::NONE,
            alive: true,
            hint: TriangleId::NONE,
        });
        self.alive_verts += 1;
        id
    }

    /// First real triangle plus the three ghosts closing the hull.
    fn bootstrap_triangle(&mut self, a: VertexId, b: VertexId, c: VertexId) {
        let (a, b, c) =
            if geometry::orient2d_sign(self.point(a), self.point(b), self.point(c)) == Sign::CCW {
                (a, b, c)
            } else {
                (a, c, b)
            };
        let g = VertexId::GHOST;
        let t = self.alloc_triangle([a, b, c]);
        let g_ab = self.alloc_triangle([b, a, g]);
        let g_bc = self.alloc_triangle([c, b, g]);
        let g_ca = self.alloc_triangle([a, c, g]);
        self.tris[t.index()].n = [g_bc, g_ca, g_ab];
        self.tris[g_ab.index()].n = [g_ca, g_bc, t];
        self.tris[g_bc.index()].n = [g_ab, g_ca, t];
        self.tris[g_ca.index()].n = [g_bc, g_ab, t];
    }

    fn alloc_triangle(&mut self, mut v: [VertexId; 3]) -> TriangleId {
        // Ghost vertex canonically at index 2 (cyclic rotation keeps
        // orientation).
        if v[0].is_ghost() {
            v.rotate_left(1);
        } else if v[1].is_ghost() {
            v.rotate_left(2);
        }
        debug_assert!(!v[0].is_ghost() && !v[1].is_ghost());

        let rec = TriangleRecord {
            v,
            n: [TriangleId::NONE; 3],
            alive: true,
        };
        let id = match self.free_tris.pop() {
            Some(id) => {
                self.tris[id.index()] = rec;
                id
            }
            None => {
                let id = TriangleId(self.tris.len() as u32);
                self.tris.push(rec);
                id
            }
        };
        if v[2].is_ghost() {
            self.alive_ghost += 1;
        } else {
            self.alive_real += 1;
        }
        for &u in &v {
            if !u.is_ghost() {
                self.verts[u.index()].hint = id;
            }
        }
        self.last_created = id;
        id
    }

    fn kill_triangle(&mut self, t: TriangleId) {
        let rec = &mut self.tris[t.index()];
        debug_assert!(rec.alive);
        rec.alive = false;
        if rec.is_ghost() {
            self.alive_ghost -= 1;
        } else {
            self.alive_real -= 1;
        }
        self.retired_tris.push(t);
    }

    fn set_mutual(&mut self, t: TriangleId, i: usize, u: TriangleId, j: usize) {
        self.tris[t.index()].n[i] = u;
        self.tris[u.index()].n[j] = t;
    }

    /// Move the step's retired triangle ids to the freelist. Call at time
    /// step boundaries only.
    pub fn recycle_retired(&mut self) {
        self.retired_tris.sort_unstable();
        self.free_tris.append(&mut self.retired_tris);
    }

    // ------------------------------------------------------------------
    // Accessors
    // ------------------------------------------------------------------

    pub fn point(&self, v: VertexId) -> Point {
        self.verts[v.index()].point
    }

    pub fn owner(&self, v: VertexId) -> BlockId {
        self.verts[v.index()].owner
    }

    pub fn set_owner(&mut self, v: VertexId, owner: BlockId) {
        self.verts[v.index()].owner = owner;
    }

    pub fn is_vertex_alive(&self, v: VertexId) -> bool {
        !v.is_ghost() && v.index() < self.verts.len() && self.verts[v.index()].alive
    }

    pub fn is_triangle_alive(&self, t: TriangleId) -> bool {
        t != TriangleId::NONE && t.index() < self.tris.len() && self.tris[t.index()].alive
    }

    pub fn is_ghost_triangle(&self, t: TriangleId) -> bool {
        self.tris[t.index()].is_ghost()
    }

    pub fn triangle_vertices(&self, t: TriangleId) -> [VertexId; 3] {
        self.tris[t.index()].v
    }

    pub fn triangle_neighbors(&self, t: TriangleId) -> [TriangleId; 3] {
        self.tris[t.index()].n
    }

    /// One alive triangle incident to `v`, for O(degree) star traversal.
    pub fn incident_triangle(&self, v: VertexId) -> TriangleId {
        self.verts[v.index()].hint
    }

    pub fn vertex_count(&self) -> usize {
        self.alive_verts
    }

    pub fn real_triangle_count(&self) -> usize {
        self.alive_real
    }

    pub fn ghost_triangle_count(&self) -> usize {
        self.alive_ghost
    }

    /// Hull vertex count; equals the number of ghost triangles.
    pub fn hull_size(&self) -> usize {
        self.alive_ghost
    }

    pub fn alive_vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.verts
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive)
            .map(|(i, _)| VertexId(i as u32))
    }

    pub fn alive_triangle_ids(&self) -> impl Iterator<Item = TriangleId> + '_ {
        self.tris
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive)
            .map(|(i, _)| TriangleId(i as u32))
    }

    pub fn alive_real_triangle_ids(&self) -> impl Iterator<Item = TriangleId> + '_ {
        self.tris
            .iter()
            .enumerate()
            .filter(|(_, r)| r.alive && !r.is_ghost())
            .map(|(i, _)| TriangleId(i as u32))
    }

    /// Positions of alive vertices in ascending id order.
    pub fn alive_points(&self) -> Vec<Point> {
        self.verts
            .iter()
            .filter(|r| r.alive)
            .map(|r| r.point)
            .collect()
    }

    /// `real = 2n − 2 − h` and `ghost = h` for n ≥ 3 alive vertices.
    pub fn euler_consistent(&self) -> bool {
        if self.alive_verts < 3 {
            return false;
        }
        self.alive_real == 2 * self.alive_verts - 2 - self.alive_ghost
    }

    fn first_alive_real(&self) -> Option<TriangleId> {
        self.tris
            .iter()
            .position(|r| r.alive && !r.is_ghost())
            .map(|i| TriangleId(i as u32))
    }

    // ------------------------------------------------------------------
    // Canonical edge set
    // ------------------------------------------------------------------

    /// Each real edge once, endpoints ascending, list sorted. Cocircular
    /// quads are canonicalized to the diagonal incident to the
    /// lexicographically smallest (x, then y) point, so meshes that differ
    /// only in cocircular tie-breaks compare equal.
    pub fn canonical_edge_set(&self) -> Vec<(VertexId, VertexId)> {
        let mut edges: BTreeSet<(VertexId, VertexId)> = BTreeSet::new();
        for (ti, rec) in self.tris.iter().enumerate() {
            if !rec.alive || rec.is_ghost() {
                continue;
            }
            for i in 0..3 {
                let a = rec.v[i];
                let b = rec.v[(i + 1) % 3];
                edges.insert(ordered(a, b));
            }
            let t = TriangleId(ti as u32);
            for i in 0..3 {
                let u = rec.n[i];
                if u == TriangleId::NONE || u <= t {
                    continue;
                }
                let urec = &self.tris[u.index()];
                if !urec.alive || urec.is_ghost() {
                    continue;
                }
                let c = rec.v[i];
                let j = urec
                    .n
                    .iter()
                    .position(|&w| w == t)
                    .expect("mutual neighbor link");
                let d = urec.v[j];
                let (pa, pb, pc) = (
                    self.point(rec.v[0]),
                    self.point(rec.v[1]),
                    self.point(rec.v[2]),
                );
                if geometry::in_circle_sign(pa, pb, pc, self.point(d)) != Sign::Zero {
                    continue;
                }
                // Cocircular quad: diagonal is (s1, s2), anti-diagonal (c, d).
                let s1 = rec.v[(i + 1) % 3];
                let s2 = rec.v[(i + 2) % 3];
                let quad = [s1, s2, c, d];
                let min = quad
                    .iter()
                    .copied()
                    .min_by(|&x, &y| {
                        let (px, py) = (self.point(x), self.point(y));
                        px.x.partial_cmp(&py.x)
                            .unwrap()
                            .then(px.y.partial_cmp(&py.y).unwrap())
                    })
                    .unwrap();
                if min == c || min == d {
                    edges.remove(&ordered(s1, s2));
                    edges.insert(ordered(c, d));
                }
            }
        }
        edges.into_iter().collect()
    }

    /// Real-real undirected edges of the given triangles.
    pub(crate) fn real_edges_of(&self, tris: &[TriangleId]) -> BTreeSet<(VertexId, VertexId)> {
        let mut edges = BTreeSet::new();
        for &t in tris {
            let v = self.tris[t.index()].v;
            for i in 0..3 {
                let a = v[i];
                let b = v[(i + 1) % 3];
                if !a.is_ghost() && !b.is_ghost() {
                    edges.insert(ordered(a, b));
                }
            }
        }
        edges
    }

    pub(crate) fn edge_diff(
        &self,
        removed: Vec<TriangleId>,
        created: Vec<TriangleId>,
    ) -> DiffLog {
        let before = self.real_edges_of(&removed);
        let after = self.real_edges_of(&created);
        DiffLog {
            edges_deleted: before.difference(&after).copied().collect(),
            edges_inserted: after.difference(&before).copied().collect(),
            removed_triangles: removed,
            created_triangles: created,
        }
    }

    // ------------------------------------------------------------------
    // Dump round trip
    // ------------------------------------------------------------------

    pub fn to_dump(&self) -> MeshDump {
        let mut index = HashMap::new();
        let mut vertices = Vec::with_capacity(self.alive_verts);
        for v in self.alive_vertex_ids() {
            index.insert(v, vertices.len());
            let p = self.point(v);
            vertices.push([p.x, p.y]);
        }
        let mut triangles: Vec<[usize; 3]> = self
            .alive_real_triangle_ids()
            .map(|t| {
                let v = self.triangle_vertices(t);
                let mut tri = [index[&v[0]], index[&v[1]], index[&v[2]]];
                let min = (0..3).min_by_key(|&i| tri[i]).unwrap();
                tri.rotate_left(min);
                tri
            })
            .collect();
        triangles.sort_unstable();
        MeshDump {
            vertices,
            triangles,
        }
    }

    /// Reconstruct a mesh from a dump, rebuilding adjacency and the ghost
    /// hull. The dump is validated structurally; the Delaunay property is
    /// not assumed (that is what `is_delaunay` checks afterwards).
    pub fn from_dump(dump: &MeshDump) -> Result<Self> {
        let n = dump.vertices.len();
        if n < 3 {
            return Err(Error::TooFewPoints { need: 3, got: n });
        }
        let points: Vec<Point> = dump.vertices.iter().map(|c| Point::new(c[0], c[1])).collect();
        for p in &points {
            p.check_finite()?;
        }
        check_duplicates(&points)?;

        let mut tri = Triangulation::empty();
        for &p in &points {
            tri.push_vertex(p);
        }

        let invalid = |msg: String| Error::InvalidDump(msg);
        let mut used = vec![false; n];
        let mut ids = Vec::with_capacity(dump.triangles.len());
        for (k, t) in dump.triangles.iter().enumerate() {
            if t.iter().any(|&i| i >= n) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(invalid(format!("triangle {k} has invalid vertex indices")));
            }
            let (a, b, c) = (points[t[0]], points[t[1]], points[t[2]]);
            if geometry::orient2d_sign(a, b, c) != Sign::CCW {
                return Err(invalid(format!("triangle {k} is not counter-clockwise")));
            }
            for &i in t {
                used[i] = true;
            }
            ids.push(tri.alloc_triangle([
                VertexId(t[0] as u32),
                VertexId(t[1] as u32),
                VertexId(t[2] as u32),
            ]));
        }
        if let Some(i) = used.iter().position(|&u| !u) {
            return Err(invalid(format!("vertex {i} is not used by any triangle")));
        }

        let mut edge_map: HashMap<(VertexId, VertexId), Vec<(TriangleId, usize)>> = HashMap::new();
        for &t in &ids {
            let v = tri.tris[t.index()].v;
            for i in 0..3 {
                let key = ordered(v[(i + 1) % 3], v[(i + 2) % 3]);
                edge_map.entry(key).or_default().push((t, i));
            }
        }
        let mut hull_starts: HashMap<VertexId, TriangleId> = HashMap::new();
        let mut hull_ends: HashMap<VertexId, TriangleId> = HashMap::new();
        let mut hull_edges = Vec::new();
        for (key, inc) in &edge_map {
            match inc.as_slice() {
                [(t, i), (u, j)] => {
                    tri.set_mutual(*t, *i, *u, *j);
                }
                [(t, i)] => {
                    // Directed hull edge u → v with the mesh on its left.
                    let rec = &tri.tris[t.index()];
                    let u = rec.v[(*i + 1) % 3];
                    let v = rec.v[(*i + 2) % 3];
                    let g = tri.alloc_triangle([v, u, VertexId::GHOST]);
                    tri.set_mutual(g, 2, *t, *i);
                    if hull_starts.insert(u, g).is_some() || hull_ends.insert(v, g).is_some() {
                        return Err(invalid("non-manifold hull".to_string()));
                    }
                    hull_edges.push((u, v, g));
                }
                _ => {
                    return Err(invalid(format!(
                        "edge ({}, {}) is shared by more than two triangles",
                        key.0 .0, key.1 .0
                    )));
                }
            }
        }
        if hull_edges.len() < 3 {
            return Err(invalid("hull does not close".to_string()));
        }
        for &(u, v, g) in &hull_edges {
            let prev = *hull_ends
                .get(&u)
                .ok_or_else(|| invalid("hull does not close".to_string()))?;
            let next = *hull_starts
                .get(&v)
                .ok_or_else(|| invalid("hull does not close".to_string()))?;
            tri.tris[g.index()].n[0] = prev;
            tri.tris[g.index()].n[1] = next;
        }
        Ok(tri)
    }
}

pub(crate) fn ordered(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

fn check_duplicates(points: &[Point]) -> Result<()> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by_key(|&i| points[i].bits());
    for w in idx.windows(2) {
        if points[w[0]].bits() == points[w[1]].bits() {
            let (first, second) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(Error::DuplicatePoint {
                first,
                second,
                x: points[first].x,
                y: points[first].y,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests;
