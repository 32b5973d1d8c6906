use super::{TriangleId, Triangulation, VertexId};
use crate::geometry::{self, Point, Sign};

/// Exact classification of a query point's position in the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocateResult {
    InTriangle(TriangleId),
    /// On the open interior of the edge opposite `vertices[i]` of the
    /// given real triangle.
    OnEdge(TriangleId, usize),
    OnVertex(VertexId),
    /// Outside the convex hull; the ghost triangle whose hull edge the
    /// walk exited through.
    OutsideHull(TriangleId),
}

impl Triangulation {
    /// Straight-line walk from `hint` using exact orientation tests.
    /// A dead or missing hint falls back to any alive real triangle.
    pub fn locate(&self, p: Point, hint: TriangleId) -> LocateResult {
        let mut cur = if self.is_triangle_alive(hint) {
            hint
        } else if self.is_triangle_alive(self.last_created) {
            self.last_created
        } else {
            self.first_alive_real().expect("non-empty triangulation")
        };
        if self.is_ghost_triangle(cur) {
            cur = self.triangle_neighbors(cur)[2];
        }

        let mut prev = TriangleId::NONE;
        let cap = 4 * self.tris.len() + 16;
        for _ in 0..cap {
            let v = self.triangle_vertices(cur);
            let n = self.triangle_neighbors(cur);
            let mut signs = [Sign::Zero; 3];
            let mut cross = None;
            for i in 0..3 {
                let a = self.point(v[(i + 1) % 3]);
                let b = self.point(v[(i + 2) % 3]);
                signs[i] = geometry::orient2d_sign(a, b, p);
                if signs[i] == Sign::Negative && cross.is_none() && n[i] != prev {
                    cross = Some(i);
                }
            }
            if cross.is_none() {
                // Came-from edge excluded above; accept it if it is the
                // only negative one (cannot happen on a consistent walk,
                // but keeps the loop total).
                cross = (0..3).find(|&i| signs[i] == Sign::Negative);
            }
            match cross {
                Some(i) => {
                    let next = n[i];
                    if self.is_ghost_triangle(next) {
                        return LocateResult::OutsideHull(next);
                    }
                    prev = cur;
                    cur = next;
                }
                None => {
                    let zeros: Vec<usize> = (0..3).filter(|&i| signs[i] == Sign::Zero).collect();
                    return match zeros.len() {
                        0 => LocateResult::InTriangle(cur),
                        1 => LocateResult::OnEdge(cur, zeros[0]),
                        2 => LocateResult::OnVertex(v[3 - zeros[0] - zeros[1]]),
                        _ => unreachable!("degenerate triangle in mesh"),
                    };
                }
            }
        }
        panic!("locate walk did not terminate; mesh is corrupt");
    }
}
