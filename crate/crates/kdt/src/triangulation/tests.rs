use super::*;
use crate::oracle;
use crate::partition::BlockId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn random_points(n: usize, seed: u64) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| pt(rng.gen::<f64>(), rng.gen::<f64>()))
        .collect()
}

fn single_triangle() -> Triangulation {
    Triangulation::build_initial(&[pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)], 0).unwrap()
}

/// Real edges as coordinate-bit pairs, for comparing meshes whose vertex
/// ids differ.
fn edge_coords(tri: &Triangulation) -> BTreeSet<((u64, u64), (u64, u64))> {
    tri.canonical_edge_set()
        .into_iter()
        .map(|(a, b)| {
            let (pa, pb) = (tri.point(a).bits(), tri.point(b).bits());
            if pa <= pb {
                (pa, pb)
            } else {
                (pb, pa)
            }
        })
        .collect()
}

fn real_edge_count(tri: &Triangulation) -> usize {
    (3 * tri.real_triangle_count() + tri.hull_size()) / 2
}

fn triangle_triples(tri: &Triangulation) -> BTreeSet<[u32; 3]> {
    tri.alive_real_triangle_ids()
        .map(|t| {
            let v = tri.triangle_vertices(t);
            let mut tr = [v[0].0, v[1].0, v[2].0];
            tr.sort_unstable();
            tr
        })
        .collect()
}

// ----------------------------------------------------------------------
// build_initial
// ----------------------------------------------------------------------

#[test]
fn build_single_triangle_counts() {
    let tri = single_triangle();
    assert_eq!(tri.real_triangle_count(), 1);
    assert_eq!(tri.ghost_triangle_count(), 3);
    assert!(tri.euler_consistent());
    assert!(tri.is_delaunay().ok);
}

#[test]
fn build_interior_point_splits_into_three() {
    let tri = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(4.0, 0.0), pt(2.0, 3.0), pt(2.0, 1.0)],
        1,
    )
    .unwrap();
    assert_eq!(tri.real_triangle_count(), 3);
    assert_eq!(tri.ghost_triangle_count(), 3);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn build_matches_brute_force_oracle() {
    let points = random_points(20, 42);
    let tri = Triangulation::build_initial(&points, 42).unwrap();
    let set = oracle::brute_force_delaunay(&points).unwrap();
    let ours: BTreeSet<[usize; 3]> = triangle_triples(&tri)
        .into_iter()
        .map(|t| [t[0] as usize, t[1] as usize, t[2] as usize])
        .collect();
    let expected: BTreeSet<[usize; 3]> = set.triples().collect();
    assert_eq!(ours, expected);
}

#[test]
fn build_rejects_duplicates_with_both_indices() {
    let err = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 0.5), pt(1.0, 0.0)],
        0,
    );
    match err {
        Err(Error::DuplicatePoint { first, second, .. }) => {
            assert_eq!((first, second), (1, 3));
        }
        other => panic!("expected duplicate error, got {other:?}"),
    }
}

#[test]
fn build_rejects_collinear_input() {
    let err = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(1.0, 1.0), pt(2.0, 2.0), pt(3.0, 3.0)],
        0,
    );
    assert!(matches!(err, Err(Error::CollinearInput)));
}

#[test]
fn build_rejects_too_few_points() {
    let err = Triangulation::build_initial(&[pt(0.0, 0.0), pt(1.0, 0.0)], 0);
    assert!(matches!(err, Err(Error::TooFewPoints { .. })));
}

#[test]
fn build_is_order_independent_in_canonical_edges() {
    let points = random_points(60, 8);
    let reference = Triangulation::build_initial(&points, 0)
        .unwrap()
        .canonical_edge_set();
    for seed in 1..6u64 {
        let tri = Triangulation::build_initial(&points, seed).unwrap();
        assert_eq!(tri.canonical_edge_set(), reference);
    }
}

// ----------------------------------------------------------------------
// locate
// ----------------------------------------------------------------------

#[test]
fn locate_inside_on_edge_on_vertex_outside() {
    let tri = single_triangle();
    let start = tri.alive_real_triangle_ids().next().unwrap();
    match tri.locate(pt(0.2, 0.2), start) {
        LocateResult::InTriangle(t) => assert!(!tri.is_ghost_triangle(t)),
        other => panic!("expected InTriangle, got {other:?}"),
    }
    match tri.locate(pt(0.5, 0.0), start) {
        LocateResult::OnEdge(t, i) => {
            assert!(!tri.is_ghost_triangle(t));
            let v = tri.triangle_vertices(t);
            let (a, b) = (v[(i + 1) % 3], v[(i + 2) % 3]);
            let ends: BTreeSet<(u64, u64)> =
                [tri.point(a).bits(), tri.point(b).bits()].into_iter().collect();
            let expect: BTreeSet<(u64, u64)> =
                [pt(0.0, 0.0).bits(), pt(1.0, 0.0).bits()].into_iter().collect();
            assert_eq!(ends, expect);
        }
        other => panic!("expected OnEdge, got {other:?}"),
    }
    match tri.locate(pt(0.0, 1.0), start) {
        LocateResult::OnVertex(v) => assert_eq!(tri.point(v).bits(), pt(0.0, 1.0).bits()),
        other => panic!("expected OnVertex, got {other:?}"),
    }
    match tri.locate(pt(5.0, 5.0), start) {
        LocateResult::OutsideHull(g) => assert!(tri.is_ghost_triangle(g)),
        other => panic!("expected OutsideHull, got {other:?}"),
    }
}

#[test]
fn locate_walks_across_a_large_mesh() {
    let points = random_points(300, 19);
    let tri = Triangulation::build_initial(&points, 3).unwrap();
    let start = tri.alive_real_triangle_ids().next().unwrap();
    for &p in points.iter().take(50) {
        match tri.locate(p, start) {
            LocateResult::OnVertex(v) => assert_eq!(tri.point(v).bits(), p.bits()),
            other => panic!("expected OnVertex for an input point, got {other:?}"),
        }
    }
}

// ----------------------------------------------------------------------
// insert
// ----------------------------------------------------------------------

#[test]
fn insert_centroid_stars_the_triangle() {
    let mut tri = single_triangle();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    let (v, log) = tri
        .insert(pt(1.0 / 3.0, 1.0 / 3.0), BlockId::NONE, hint)
        .unwrap();
    assert_eq!(v, VertexId(3));
    assert_eq!(tri.real_triangle_count(), 3);
    assert_eq!(log.removed_triangles.len(), 1);
    assert_eq!(log.created_triangles.len(), 3);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn insert_cocircular_point_keeps_minimal_cavity() {
    let mut tri = single_triangle();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    // (1,1) is the antipode of (0,0) on the circumcircle: on-circle, so
    // the original triangle stays and only the visible hull edge splits.
    tri.insert(pt(1.0, 1.0), BlockId::NONE, hint).unwrap();
    assert_eq!(tri.real_triangle_count(), 2);
    assert!(tri.is_delaunay().ok);
    // The mesh keeps the diagonal it built; the canonical form swaps it to
    // the diagonal at the lexicographically smallest point, (0,0)-(1,1).
    let edges = tri.canonical_edge_set();
    assert_eq!(edges.len(), 5);
    assert!(edges.contains(&(VertexId(0), VertexId(3))));
    assert!(!edges.contains(&(VertexId(1), VertexId(2))));
}

#[test]
fn insert_far_outside_extends_hull() {
    let points = random_points(10, 4);
    let mut tri = Triangulation::build_initial(&points, 4).unwrap();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    let far = pt(10.0, 10.0);
    tri.insert(far, BlockId::NONE, hint).unwrap();
    assert!(tri.is_delaunay().ok);
    let mut with_far = points.clone();
    with_far.push(far);
    let rebuilt = Triangulation::build_initial(&with_far, 9).unwrap();
    assert_eq!(tri.canonical_edge_set(), rebuilt.canonical_edge_set());
}

#[test]
fn insert_coincident_point_is_error() {
    let mut tri = single_triangle();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    let err = tri.insert(pt(1.0, 0.0), BlockId::NONE, hint);
    assert!(matches!(err, Err(Error::CoincidentPoint { vertex: 1, .. })));
    assert_eq!(tri.vertex_count(), 3);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn insert_on_interior_edge_splits_both_triangles() {
    let mut tri = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(2.0, 0.0), pt(1.0, 2.0), pt(1.0, -2.0)],
        0,
    )
    .unwrap();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    // Interior edge (0,0)-(2,0); its midpoint splits two triangles into four.
    tri.insert(pt(1.0, 0.0), BlockId::NONE, hint).unwrap();
    assert_eq!(tri.real_triangle_count(), 4);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn insert_on_hull_edge_becomes_hull_vertex() {
    let mut tri = single_triangle();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    tri.insert(pt(0.5, 0.0), BlockId::NONE, hint).unwrap();
    assert_eq!(tri.vertex_count(), 4);
    assert_eq!(tri.hull_size(), 4);
    assert_eq!(tri.real_triangle_count(), 2);
    assert!(tri.is_delaunay().ok);
}

// ----------------------------------------------------------------------
// delete
// ----------------------------------------------------------------------

#[test]
fn delete_degree3_interior_vertex_leaves_one_triangle() {
    let mut tri = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(4.0, 0.0), pt(2.0, 3.0), pt(2.0, 1.0)],
        1,
    )
    .unwrap();
    let log = tri.delete(VertexId(3)).unwrap();
    assert_eq!(tri.real_triangle_count(), 1);
    assert_eq!(log.removed_triangles.len(), 3);
    assert_eq!(log.created_triangles.len(), 1);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn delete_interior_vertex_of_degree_k_creates_k_minus_2() {
    let points = random_points(40, 15);
    let mut tri = Triangulation::build_initial(&points, 15).unwrap();
    // Find an interior vertex: one whose star has no ghosts.
    let v = tri
        .alive_vertex_ids()
        .find(|&v| {
            tri.star_triangles(v)
                .unwrap()
                .iter()
                .all(|&t| !tri.is_ghost_triangle(t))
        })
        .expect("some interior vertex");
    let k = tri.star_triangles(v).unwrap().len();
    let log = tri.delete(v).unwrap();
    assert_eq!(log.created_triangles.len(), k - 2);
    assert!(tri.is_delaunay().ok);
    assert!(tri.euler_consistent());
}

#[test]
fn delete_hull_vertex_matches_rebuild_without_it() {
    let points = random_points(10, 7);
    let mut tri = Triangulation::build_initial(&points, 7).unwrap();
    let hull_vertex = tri
        .alive_vertex_ids()
        .find(|&v| {
            tri.star_triangles(v)
                .unwrap()
                .iter()
                .any(|&t| tri.is_ghost_triangle(t))
        })
        .expect("some hull vertex");
    tri.delete(hull_vertex).unwrap();
    assert!(tri.is_delaunay().ok);
    let remaining: Vec<Point> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != hull_vertex.index())
        .map(|(_, &p)| p)
        .collect();
    let rebuilt = Triangulation::build_initial(&remaining, 70).unwrap();
    assert_eq!(edge_coords(&tri), edge_coords(&rebuilt));
}

#[test]
fn delete_dead_vertex_is_error() {
    let points = random_points(10, 2);
    let mut tri = Triangulation::build_initial(&points, 2).unwrap();
    tri.delete(VertexId(4)).unwrap();
    assert!(matches!(
        tri.delete(VertexId(4)),
        Err(Error::InvalidVertex(4))
    ));
    assert!(matches!(
        tri.delete(VertexId(99)),
        Err(Error::InvalidVertex(99))
    ));
}

#[test]
fn delete_below_three_vertices_is_error() {
    let mut tri = single_triangle();
    assert!(matches!(
        tri.delete(VertexId(0)),
        Err(Error::DegenerateResult(0))
    ));
}

#[test]
fn delete_leaving_collinear_points_is_error() {
    let mut tri = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0), pt(1.0, 1.0)],
        0,
    )
    .unwrap();
    let err = tri.delete(VertexId(3));
    assert!(matches!(err, Err(Error::DegenerateResult(3))));
    // Nothing was touched.
    assert_eq!(tri.vertex_count(), 4);
    assert!(tri.is_delaunay().ok);
}

#[test]
fn mass_deletion_down_to_three_vertices() {
    let points = random_points(30, 21);
    let mut tri = Triangulation::build_initial(&points, 21).unwrap();
    let mut alive: Vec<VertexId> = tri.alive_vertex_ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    while alive.len() > 3 {
        let pick = rng.gen_range(0..alive.len());
        let v = alive.swap_remove(pick);
        match tri.delete(v) {
            Ok(_) => {
                assert!(tri.is_delaunay().ok);
                tri.recycle_retired();
            }
            Err(Error::DegenerateResult(_)) => alive.push(v),
            Err(e) => panic!("unexpected error: {e}"),
        }
    }
    assert_eq!(tri.vertex_count(), 3);
    assert_eq!(tri.canonical_edge_set().len(), 3);
}

// ----------------------------------------------------------------------
// move_point
// ----------------------------------------------------------------------

#[test]
fn move_to_own_position_keeps_edge_set() {
    let points = random_points(25, 31);
    let mut tri = Triangulation::build_initial(&points, 31).unwrap();
    let before = tri.canonical_edge_set();
    let v = VertexId(7);
    let log = tri.move_point(v, points[7]).unwrap();
    assert_eq!(tri.canonical_edge_set(), before);
    assert!(!log.removed_triangles.is_empty());
    assert!(tri.is_delaunay().ok);
}

#[test]
fn small_move_matches_rebuild() {
    let points = random_points(25, 33);
    let mut tri = Triangulation::build_initial(&points, 33).unwrap();
    let v = VertexId(11);
    let q = pt(points[11].x + 1e-9, points[11].y);
    tri.move_point(v, q).unwrap();
    let mut moved = points.clone();
    moved[11] = q;
    let rebuilt = Triangulation::build_initial(&moved, 12).unwrap();
    assert_eq!(tri.canonical_edge_set(), rebuilt.canonical_edge_set());
}

#[test]
fn long_move_across_neighborhood_matches_rebuild() {
    let points = random_points(30, 3);
    let mut tri = Triangulation::build_initial(&points, 3).unwrap();
    let v = VertexId(4);
    let q = pt(1.0 - points[4].x, 1.0 - points[4].y);
    tri.move_point(v, q).unwrap();
    let mut moved = points.clone();
    moved[4] = q;
    let rebuilt = Triangulation::build_initial(&moved, 30).unwrap();
    assert_eq!(tri.canonical_edge_set(), rebuilt.canonical_edge_set());
    assert!(tri.is_delaunay().ok);
}

#[test]
fn move_onto_other_vertex_fails_and_restores() {
    let points = random_points(15, 44);
    let mut tri = Triangulation::build_initial(&points, 44).unwrap();
    let before = tri.canonical_edge_set();
    let err = tri.move_point(VertexId(2), points[9]);
    assert!(matches!(err, Err(Error::CoincidentPoint { .. })));
    assert_eq!(tri.canonical_edge_set(), before);
    assert!(tri.is_delaunay().ok);
}

// ----------------------------------------------------------------------
// validation and canonical edges
// ----------------------------------------------------------------------

#[test]
fn is_delaunay_accepts_fresh_build() {
    let tri = Triangulation::build_initial(&random_points(50, 1), 1).unwrap();
    let report = tri.is_delaunay();
    assert!(report.ok, "{:?}", report);
}

#[test]
fn is_delaunay_flags_flipped_diagonal_twice() {
    let dump = MeshDump {
        vertices: vec![[0.0, 0.0], [4.0, 0.0], [3.0, 3.0], [0.0, 2.0]],
        triangles: vec![[0, 1, 2], [0, 2, 3]],
    };
    let tri = Triangulation::from_dump(&dump).unwrap();
    let report = tri.is_delaunay();
    assert!(!report.ok);
    assert_eq!(report.violations.len(), 2);
}

#[test]
fn canonical_edges_of_single_triangle() {
    let tri = single_triangle();
    assert_eq!(
        tri.canonical_edge_set(),
        vec![
            (VertexId(0), VertexId(1)),
            (VertexId(0), VertexId(2)),
            (VertexId(1), VertexId(2)),
        ]
    );
}

#[test]
fn canonical_edges_of_cocircular_square() {
    // Both diagonals are Delaunay-valid; the canonical set picks the one
    // at the lexicographically smallest point regardless of build order.
    let points = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
    for seed in 0..8u64 {
        let tri = Triangulation::build_initial(&points, seed).unwrap();
        let edges = tri.canonical_edge_set();
        assert_eq!(edges.len(), 5);
        assert!(edges.contains(&(VertexId(0), VertexId(2))));
        assert!(!edges.contains(&(VertexId(1), VertexId(3))));
    }
}

#[test]
fn delete_after_insert_restores_edge_set() {
    let points = random_points(35, 50);
    let mut tri = Triangulation::build_initial(&points, 50).unwrap();
    let before = tri.canonical_edge_set();
    let hint = tri.alive_real_triangle_ids().next().unwrap();
    let (v, _) = tri.insert(pt(0.123456, 0.654321), BlockId::NONE, hint).unwrap();
    tri.delete(v).unwrap();
    assert_eq!(tri.canonical_edge_set(), before);
}

#[test]
fn difflog_edge_counts_are_consistent() {
    let points = random_points(50, 61);
    let mut tri = Triangulation::build_initial(&points, 61).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..60 {
        let v = VertexId(rng.gen_range(0..50));
        if !tri.is_vertex_alive(v) {
            continue;
        }
        let q = pt(rng.gen(), rng.gen());
        let before = real_edge_count(&tri);
        match tri.move_point(v, q) {
            Ok(log) => {
                let after = real_edge_count(&tri);
                assert_eq!(
                    after as i64,
                    before as i64 - log.edges_deleted.len() as i64
                        + log.edges_inserted.len() as i64
                );
            }
            Err(Error::CoincidentPoint { .. }) => {}
            Err(e) => panic!("unexpected error: {e}"),
        }
        tri.recycle_retired();
    }
}

#[test]
fn randomized_mixed_operations_stay_delaunay() {
    // Smaller inline version; the full 50-seed randomized sweep lives in
    // the integration tests.
    for seed in 0..3u64 {
        let points = random_points(60, 200 + seed);
        let mut tri = Triangulation::build_initial(&points, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let next_coord = |rng: &mut ChaCha8Rng| pt(rng.gen(), rng.gen());
        for op in 0..120 {
            let alive: Vec<VertexId> = tri.alive_vertex_ids().collect();
            match op % 3 {
                0 => {
                    let hint = tri.incident_triangle(alive[0]);
                    let q = next_coord(&mut rng);
                    let _ = tri.insert(q, BlockId::NONE, hint);
                }
                1 => {
                    if alive.len() > 4 {
                        let v = alive[rng.gen_range(0..alive.len())];
                        let _ = tri.delete(v);
                    }
                }
                _ => {
                    let v = alive[rng.gen_range(0..alive.len())];
                    let q = next_coord(&mut rng);
                    let _ = tri.move_point(v, q);
                }
            }
            let report = tri.is_delaunay();
            assert!(report.ok, "seed {seed} op {op}: {report:?}");
            assert!(tri.euler_consistent());
            tri.recycle_retired();
        }
    }
}

// ----------------------------------------------------------------------
// dumps
// ----------------------------------------------------------------------

#[test]
fn dump_round_trip_preserves_mesh() {
    let points = random_points(50, 77);
    let tri = Triangulation::build_initial(&points, 77).unwrap();
    let dump = tri.to_dump();
    let json = serde_json::to_string(&dump).unwrap();
    let parsed: MeshDump = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, dump);
    let back = Triangulation::from_dump(&parsed).unwrap();
    assert!(back.is_delaunay().ok);
    assert_eq!(back.canonical_edge_set(), tri.canonical_edge_set());
    assert_eq!(back.to_dump(), dump);
}

#[test]
fn dump_triangles_are_rotated_and_sorted() {
    let tri = Triangulation::build_initial(
        &[pt(0.0, 0.0), pt(4.0, 0.0), pt(2.0, 3.0), pt(2.0, 1.0)],
        3,
    )
    .unwrap();
    let dump = tri.to_dump();
    let mut sorted = dump.triangles.clone();
    sorted.sort_unstable();
    assert_eq!(dump.triangles, sorted);
    for t in &dump.triangles {
        assert!(t[0] < t[1] && t[0] < t[2]);
    }
}

#[test]
fn from_dump_rejects_broken_structures() {
    let cw = MeshDump {
        vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
        triangles: vec![[0, 2, 1]],
    };
    assert!(matches!(
        Triangulation::from_dump(&cw),
        Err(Error::InvalidDump(_))
    ));
    let unused_vertex = MeshDump {
        vertices: vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [5.0, 5.0]],
        triangles: vec![[0, 1, 2]],
    };
    assert!(matches!(
        Triangulation::from_dump(&unused_vertex),
        Err(Error::InvalidDump(_))
    ));
}
