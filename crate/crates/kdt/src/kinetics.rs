//! The kinetic update machinery: movement-bound computation, per-block
//! move selection, and the per-step delete/transfer/insert pipeline.
//!
//! Each step, every non-empty block picks one uniformly random owned
//! vertex and moves it along one axis by a uniformly random magnitude in
//! (0, d], where d is the running minimum over time of `mindistance`: the
//! smallest Nth-nearest-neighbor distance over all points. Moved vertices
//! are deleted from the mesh, handed to their new blocks where needed, and
//! re-inserted, so the triangulation is valid Delaunay again at the end of
//! every step.

use crate::error::{Error, Result};
use crate::geometry::{self, Point};
use crate::metrics::{MoveRecord, StepMetrics};
use crate::partition::{
    quad_tree_division, quad_tree_division_with_root, BlockId, Dir, QuadTree, Routing, Square,
};
use crate::runtime::{comm_counters, detect_conflicts, reduce_min, run_phase, MoverRegion, Runtime};
use crate::triangulation::{TriangleId, Triangulation, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::time::Instant;

/// How the triangulation is maintained across steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Per-block delete/insert updates with many workers.
    ParallelKinetic,
    /// The same pipeline pinned to one worker.
    SerialKinetic,
    /// Rebuild the whole triangulation from scratch every step (baseline).
    Rebuild,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "parallel-kinetic" => Ok(Mode::ParallelKinetic),
            "serial-kinetic" => Ok(Mode::SerialKinetic),
            "rebuild" => Ok(Mode::Rebuild),
            other => Err(Error::InvalidConfig(format!("unknown mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::ParallelKinetic => "parallel-kinetic",
            Mode::SerialKinetic => "serial-kinetic",
            Mode::Rebuild => "rebuild",
        })
    }
}

/// When the quad-tree is rebuilt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Repartition {
    /// Only when a leaf overflows or a point left its block.
    Lazy,
    /// Every step.
    EveryStep,
}

impl std::str::FromStr for Repartition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lazy" => Ok(Repartition::Lazy),
            "every-step" => Ok(Repartition::EveryStep),
            other => Err(Error::InvalidConfig(format!(
                "unknown repartition policy '{other}'"
            ))),
        }
    }
}

impl std::fmt::Display for Repartition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Repartition::Lazy => "lazy",
            Repartition::EveryStep => "every-step",
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KineticConfig {
    /// N of the Nth-nearest-neighbor distance defining the movement bound.
    pub n_neighbors: usize,
    /// Maximum points per quad-tree leaf.
    pub threshold: usize,
    pub seed: u64,
    pub mode: Mode,
    pub repartition: Repartition,
    pub routing: Routing,
    /// Run a full Delaunay check at the end of every step and fail the
    /// step on any violation.
    pub validate_each_step: bool,
}

impl Default for KineticConfig {
    fn default() -> Self {
        KineticConfig {
            n_neighbors: 5,
            threshold: 32,
            seed: 0,
            mode: Mode::ParallelKinetic,
            repartition: Repartition::Lazy,
            routing: Routing::Tree,
            validate_each_step: false,
        }
    }
}

/// Per-block spread statistics, reset when the block is reborn by a
/// repartition.
#[derive(Clone, Debug, Default)]
pub struct BlockStats {
    pub diameter: f64,
    pub n_spread: f64,
    /// Running maximum of `n_spread` over the block's lifetime.
    pub n_spread_max: f64,
}

/// The single move a block executes this step.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedMove {
    pub from_block: BlockId,
    pub vertex: VertexId,
    pub dir: Dir,
    /// Executed displacement along the axis, after any clamping.
    pub mag: f64,
    pub dest: Point,
    pub to_block: BlockId,
}

pub type MovePlan = Vec<PlannedMove>;

#[derive(Clone, Debug)]
pub struct KineticState {
    pub config: KineticConfig,
    /// Completed time steps.
    pub t: u64,
    /// Movement bound: running minimum of `mindistance` over time.
    pub d: f64,
    /// `mindistance` of the current positions (this step's value).
    pub last_mindistance: f64,
    pub tri: Triangulation,
    pub tree: QuadTree,
    pub stats: Vec<BlockStats>,
    pub repartitions: u64,
    pub skipped_moves: u64,
}

// ----------------------------------------------------------------------
// Distance operations
// ----------------------------------------------------------------------

/// Distance from `p` to its Nth nearest neighbor in `points` (which must
/// contain `p`), by brute force.
pub fn nth_nearest_distance(points: &[Point], p: Point, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be at least 1".into()));
    }
    let me = points
        .iter()
        .position(|q| q.bits() == p.bits())
        .ok_or_else(|| Error::InvalidConfig("query point is not in the collection".into()))?;
    let mut dists: Vec<f64> = points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != me)
        .map(|(_, &q)| geometry::squared_distance(p, q))
        .collect();
    if dists.len() < n {
        return Err(Error::InvalidN {
            n,
            need: n + 1,
            got: points.len(),
        });
    }
    let (_, kth, _) = dists.select_nth_unstable_by(n - 1, |a, b| a.partial_cmp(b).unwrap());
    Ok(kth.sqrt())
}

/// Minimum over all points of the Nth-nearest-neighbor distance, by a
/// single global brute-force pass. This is the reference the per-block
/// computation must match exactly.
pub fn mindistance(points: &[Point], n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidConfig("N must be at least 1".into()));
    }
    if points.len() < n + 1 {
        return Err(Error::InvalidN {
            n,
            need: n + 1,
            got: points.len(),
        });
    }
    let mut best = f64::INFINITY;
    let mut dists: Vec<f64> = Vec::with_capacity(points.len() - 1);
    for (i, &p) in points.iter().enumerate() {
        dists.clear();
        for (j, &q) in points.iter().enumerate() {
            if i != j {
                dists.push(geometry::squared_distance(p, q));
            }
        }
        let (_, kth, _) = dists.select_nth_unstable_by(n - 1, |a, b| a.partial_cmp(b).unwrap());
        best = best.min(*kth);
    }
    Ok(best.sqrt())
}

/// Exact Nth-nearest squared distance via best-first quad-tree descent.
///
/// Subtree pruning keeps a small relative margin so floating-point
/// rounding of square bounds can never drop a true neighbor; the returned
/// value therefore equals the brute-force Nth smallest squared distance
/// bit for bit.
fn knn_nth_squared(
    tree: &QuadTree,
    tri: &Triangulation,
    p: Point,
    exclude: VertexId,
    n: usize,
) -> Option<f64> {
    const PRUNE_MARGIN: f64 = 1.0 + 1e-9;

    fn square_min_d2(sq: &Square, p: Point) -> f64 {
        let dx = (sq.cx - sq.half - p.x).max(p.x - (sq.cx + sq.half)).max(0.0);
        let dy = (sq.cy - sq.half - p.y).max(p.y - (sq.cy + sq.half)).max(0.0);
        dx * dx + dy * dy
    }

    struct Search<'a> {
        tree: &'a QuadTree,
        tri: &'a Triangulation,
        p: Point,
        exclude: VertexId,
        n: usize,
        best: Vec<f64>,
    }

    impl Search<'_> {
        fn offer(&mut self, d2: f64) {
            if self.best.len() == self.n {
                if d2 >= *self.best.last().unwrap() {
                    return;
                }
                self.best.pop();
            }
            let at = self.best.partition_point(|&b| b < d2);
            self.best.insert(at, d2);
        }

        fn visit(&mut self, node: usize) {
            match self.tree.node_children(node) {
                None => {
                    let block = self.tree.node_block(node);
                    for &v in &self.tree.block(block).owned {
                        if v != self.exclude {
                            self.offer(geometry::squared_distance(
                                self.p,
                                self.tri.point(v),
                            ));
                        }
                    }
                }
                Some(children) => {
                    let mut order: [(f64, usize); 4] = [(0.0, 0); 4];
                    for (k, &c) in children.iter().enumerate() {
                        order[k] = (square_min_d2(&self.tree.node_square(c), self.p), c);
                    }
                    order.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    for (min_d2, c) in order {
                        if self.best.len() == self.n
                            && min_d2 > *self.best.last().unwrap() * PRUNE_MARGIN
                        {
                            continue;
                        }
                        self.visit(c);
                    }
                }
            }
        }
    }

    let mut search = Search {
        tree,
        tri,
        p,
        exclude,
        n,
        best: Vec::with_capacity(n),
    };
    search.visit(0);
    if search.best.len() == n {
        Some(search.best[n - 1])
    } else {
        None
    }
}

// ----------------------------------------------------------------------
// Per-block RNG streams
// ----------------------------------------------------------------------

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream for one block at one step, independent of worker scheduling,
/// mode and history.
fn block_rng(seed: u64, t: u64, block: BlockId) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix(
        splitmix(splitmix(seed) ^ t) ^ (block.0 as u64) << 1,
    ))
}

fn rebuild_shuffle_seed(seed: u64, t: u64) -> u64 {
    splitmix(splitmix(seed ^ 0x7265_6275_696c_6421) ^ t)
}

// ----------------------------------------------------------------------
// State construction and the step pipeline
// ----------------------------------------------------------------------

impl KineticState {
    /// Build the initial triangulation and partition, and compute the
    /// initial movement bound d₀. The root square is fixed here for the
    /// whole run: the smallest covering square padded by 2·d₀ per side
    /// (moves are clamped to it).
    pub fn new(points: &[Point], config: KineticConfig, rt: &Runtime) -> Result<Self> {
        if config.threshold == 0 {
            return Err(Error::InvalidConfig("threshold must be at least 1".into()));
        }
        if config.n_neighbors == 0 {
            return Err(Error::InvalidConfig("N must be at least 1".into()));
        }
        if points.len() < config.n_neighbors + 1 {
            return Err(Error::InvalidN {
                n: config.n_neighbors,
                need: config.n_neighbors + 1,
                got: points.len(),
            });
        }
        let tri = Triangulation::build_initial(points, config.seed)?;
        let items: Vec<(VertexId, Point)> = tri
            .alive_vertex_ids()
            .map(|v| (v, tri.point(v)))
            .collect();
        let bootstrap = quad_tree_division(&items, config.threshold)?;

        let mut state = KineticState {
            config,
            t: 0,
            d: f64::INFINITY,
            last_mindistance: f64::INFINITY,
            tri,
            tree: bootstrap,
            stats: Vec::new(),
            repartitions: 0,
            skipped_moves: 0,
        };
        state.assign_owners();
        let d0 = state.recompute_mindistance(rt)?;
        state.d = d0;
        state.last_mindistance = d0;

        let tight = Square::covering(&state.tri.alive_points())?;
        let root = tight.padded(2.0 * d0);
        state.tree = quad_tree_division_with_root(root, &items, state.config.threshold)?;
        state.assign_owners();
        state.refresh_stats(true);
        Ok(state)
    }

    fn assign_owners(&mut self) {
        for block in &self.tree.blocks {
            for &v in &block.owned {
                self.tri.set_owner(v, block.id);
            }
        }
    }

    /// Per-block local minima of the Nth-nearest distances (squared),
    /// min-reduced and broadcast. The per-block candidate search expands
    /// through neighbor subtrees exactly as far as correctness requires,
    /// so the result equals the global single-pass recomputation.
    pub fn recompute_mindistance(&self, rt: &Runtime) -> Result<f64> {
        let n = self.config.n_neighbors;
        let locals = run_phase(rt, &self.tree.blocks, |_, block| {
            let mut local = f64::INFINITY;
            for &v in &block.owned {
                let d2 = knn_nth_squared(&self.tree, &self.tri, self.tri.point(v), v, n)
                    .ok_or(Error::InvalidN {
                        n,
                        need: n + 1,
                        got: self.tri.vertex_count(),
                    })?;
                local = local.min(d2);
            }
            Ok(local)
        })?;
        Ok(reduce_min(&locals)?.sqrt())
    }

    /// d ← min(d, mindistance of current positions). Returns the new d.
    pub fn update_d(&mut self, rt: &Runtime) -> Result<f64> {
        let m = self.recompute_mindistance(rt)?;
        self.last_mindistance = m;
        self.d = self.d.min(m);
        Ok(self.d)
    }

    /// Δ_N of a block: diameter of its owned points over the current
    /// global mindistance; 0 for empty and singleton blocks.
    pub fn n_spread(&self, block: BlockId) -> f64 {
        let owned = &self.tree.block(block).owned;
        if owned.len() < 2 {
            return 0.0;
        }
        let pts: Vec<Point> = owned.iter().map(|&v| self.tri.point(v)).collect();
        geometry::diameter(&pts).expect("non-empty block") / self.last_mindistance
    }

    /// Stored running maximum of Δ_N for a block (current partition epoch).
    pub fn n_spread_max(&self, block: BlockId) -> f64 {
        self.stats[block.index()].n_spread_max
    }

    fn refresh_stats(&mut self, reset: bool) {
        let fresh: Vec<BlockStats> = self
            .tree
            .blocks
            .iter()
            .map(|b| {
                let pts: Vec<Point> = b.owned.iter().map(|&v| self.tri.point(v)).collect();
                let diameter = if pts.is_empty() {
                    0.0
                } else {
                    geometry::diameter(&pts).expect("non-empty")
                };
                let n_spread = if pts.len() < 2 {
                    0.0
                } else {
                    diameter / self.last_mindistance
                };
                BlockStats {
                    diameter,
                    n_spread,
                    n_spread_max: n_spread,
                }
            })
            .collect();
        if reset || fresh.len() != self.stats.len() {
            self.stats = fresh;
        } else {
            for (old, new) in self.stats.iter_mut().zip(fresh) {
                old.diameter = new.diameter;
                old.n_spread = new.n_spread;
                old.n_spread_max = old.n_spread_max.max(new.n_spread);
            }
        }
    }

    /// One uniformly random move per non-empty block: vertex, one of the
    /// four axis directions, magnitude uniform on (0, d]. Destinations are
    /// clamped to the root square (a clamp that would null the move
    /// resamples the direction) and may not collide with any occupied
    /// position (one magnitude resample, then the block skips the step).
    pub fn select_moves(&mut self) -> Result<MovePlan> {
        let d = self.d;
        let root = self.tree.root_square();
        let mut occupied: HashSet<(u64, u64)> = self
            .tri
            .alive_vertex_ids()
            .map(|v| self.tri.point(v).bits())
            .collect();
        let mut plan = Vec::new();
        for bi in 0..self.tree.blocks.len() {
            let block = &self.tree.blocks[bi];
            if block.owned.is_empty() {
                continue;
            }
            let mut rng = block_rng(self.config.seed, self.t, block.id);
            let vertex = block.owned[rng.gen_range(0..block.owned.len())];
            let src = self.tri.point(vertex);
            let mag = sample_magnitude(&mut rng, d);

            let mut chosen = None;
            for _ in 0..64 {
                let dir = Dir::ALL[rng.gen_range(0..4)];
                if let Some(q) = apply_move(src, dir, mag, &root, d) {
                    chosen = Some((dir, q));
                    break;
                }
            }
            let Some((dir, mut dest)) = chosen else {
                self.skipped_moves += 1;
                continue;
            };
            if occupied.contains(&dest.bits()) {
                let mag2 = sample_magnitude(&mut rng, d);
                match apply_move(src, dir, mag2, &root, d) {
                    Some(q) if !occupied.contains(&q.bits()) => dest = q,
                    _ => {
                        self.skipped_moves += 1;
                        continue;
                    }
                }
            }
            let to_block = self.tree.find_block(dest)?;
            occupied.insert(dest.bits());
            let mag = (dest.x - src.x).abs().max((dest.y - src.y).abs());
            plan.push(PlannedMove {
                from_block: block.id,
                vertex,
                dir,
                mag,
                dest,
                to_block,
            });
        }
        Ok(plan)
    }

    /// Execute one full time step and return its metrics. On error the
    /// state is rolled back to the step start.
    pub fn step(&mut self, rt: &Runtime) -> Result<StepMetrics> {
        let started = Instant::now();
        let backup = self.clone();
        match self.step_inner(rt, started) {
            Ok(metrics) => {
                self.t += 1;
                self.tri.recycle_retired();
                Ok(metrics)
            }
            Err(e) => {
                *self = backup;
                Err(e)
            }
        }
    }

    fn step_inner(&mut self, rt: &Runtime, started: Instant) -> Result<StepMetrics> {
        // Phases 1-2: local d + min-reduce + broadcast.
        let d = self.update_d(rt)?;

        // Repartition per policy.
        let repartitioned = match self.config.repartition {
            Repartition::EveryStep => true,
            Repartition::Lazy => self.tree.needs_repartition(|v| self.tri.point(v)),
        };
        if repartitioned {
            let items: Vec<(VertexId, Point)> = self
                .tri
                .alive_vertex_ids()
                .map(|v| (v, self.tri.point(v)))
                .collect();
            self.tree = quad_tree_division_with_root(
                self.tree.root_square(),
                &items,
                self.config.threshold,
            )?;
            self.assign_owners();
            self.repartitions += 1;
        }

        // Phase 3: move selection.
        let plan = self.select_moves()?;

        let (conflicts, edges_deleted, edges_inserted, transfer_list) =
            if self.config.mode == Mode::Rebuild {
                self.apply_rebuild(&plan)?
            } else {
                self.apply_kinetic(rt, &plan)?
            };

        let comm = comm_counters(&self.tree, &transfer_list);
        debug_assert!(comm.contacts.iter().all(|&(_, c)| c <= 1));

        // Phase 8: validation hooks + metrics.
        if !self.tri.euler_consistent() {
            return Err(Error::Internal(format!(
                "Euler counts broken after step {}",
                self.t
            )));
        }
        if self.config.validate_each_step {
            let report = self.tri.is_delaunay();
            if !report.ok {
                return Err(Error::Internal(format!(
                    "step {} left {} Delaunay violations and {} structural problems",
                    self.t,
                    report.violations.len(),
                    report.structural.len()
                )));
            }
        }
        self.refresh_stats(repartitioned);

        let moves = plan
            .iter()
            .map(|m| MoveRecord {
                block: m.from_block.0,
                vertex: m.vertex.0,
                dir: m.dir,
                mag: m.mag,
                to_block: m.to_block.0,
            })
            .collect();
        Ok(StepMetrics {
            t: self.t + 1,
            d,
            moves,
            transfers: transfer_list.iter().filter(|&&(f, t, _)| f != t).count() as u64,
            hops_total: comm.hops_total,
            edges_deleted,
            edges_inserted,
            conflicts,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    }

    /// Phases 4-7 of the kinetic modes. Prefetch and conflict detection
    /// run block-parallel over a frozen mesh; the mutations themselves are
    /// applied in ascending block id (ascending destination for the
    /// insertion sub-phase), one consistent mesh throughout.
    fn apply_kinetic(
        &mut self,
        rt: &Runtime,
        plan: &MovePlan,
    ) -> Result<(u64, u64, u64, Vec<(BlockId, BlockId, u32)>)> {
        // Phase 4: cavity/star prefetch + conflict detection.
        let regions = run_phase(rt, plan, |_, mv| {
            let mut tris = self.tri.star_region(mv.vertex);
            tris.extend(
                self.tri
                    .cavity_region(mv.dest, self.tri.incident_triangle(mv.vertex)),
            );
            let mut vertices: Vec<VertexId> = tris
                .iter()
                .flat_map(|&t| self.tri.triangle_vertices(t))
                .filter(|v| !v.is_ghost())
                .collect();
            vertices.sort_unstable();
            vertices.dedup();
            Ok(MoverRegion {
                block: mv.from_block,
                vertices,
            })
        })?;
        let conflicts = detect_conflicts(&regions).conflict_count() as u64;

        let mut edges_deleted = 0u64;
        let mut edges_inserted = 0u64;

        // Phase 5: deletions, ascending block id.
        let mut hints = Vec::with_capacity(plan.len());
        for mv in plan {
            let log = self.tri.delete(mv.vertex)?;
            hints.push(log.created_triangles[0]);
            edges_deleted += log.edges_deleted.len() as u64;
            edges_inserted += log.edges_inserted.len() as u64;
        }

        // Phase 6: ownership transfers.
        let mut transfer_list = Vec::new();
        for mv in plan {
            let hops =
                self.tree
                    .transfer_point(mv.vertex, mv.from_block, mv.to_block, self.config.routing)?;
            if mv.from_block != mv.to_block {
                transfer_list.push((mv.from_block, mv.to_block, hops));
            }
        }

        // Phase 7: insertions, ascending destination block id.
        let mut order: Vec<usize> = (0..plan.len()).collect();
        order.sort_by_key(|&i| (plan[i].to_block, plan[i].from_block));
        for &i in &order {
            let mv = &plan[i];
            let hint = if self.tri.is_triangle_alive(hints[i]) {
                hints[i]
            } else {
                TriangleId::NONE
            };
            let log = self
                .tri
                .insert_existing(mv.vertex, mv.dest, mv.to_block, hint)?;
            edges_deleted += log.edges_deleted.len() as u64;
            edges_inserted += log.edges_inserted.len() as u64;
        }

        Ok((conflicts, edges_deleted, edges_inserted, transfer_list))
    }

    /// The rebuild baseline: positions advance under the same move plan,
    /// but the mesh is reconstructed from scratch. Edge churn is the
    /// difference between the old and new canonical edge sets.
    fn apply_rebuild(
        &mut self,
        plan: &MovePlan,
    ) -> Result<(u64, u64, u64, Vec<(BlockId, BlockId, u32)>)> {
        let before = self.tri.canonical_edge_set();

        let mut positions = self.tri.alive_points();
        debug_assert_eq!(positions.len(), self.tri.vertex_count());
        for mv in plan {
            positions[mv.vertex.index()] = mv.dest;
        }
        let rebuilt =
            Triangulation::build_initial(&positions, rebuild_shuffle_seed(self.config.seed, self.t))?;
        self.tri = rebuilt;

        let mut transfer_list = Vec::new();
        for mv in plan {
            let hops =
                self.tree
                    .transfer_point(mv.vertex, mv.from_block, mv.to_block, self.config.routing)?;
            if mv.from_block != mv.to_block {
                transfer_list.push((mv.from_block, mv.to_block, hops));
            }
        }
        self.assign_owners();

        let after = self.tri.canonical_edge_set();
        let before_set: HashSet<_> = before.iter().collect();
        let after_set: HashSet<_> = after.iter().collect();
        let deleted = before.iter().filter(|e| !after_set.contains(e)).count() as u64;
        let inserted = after.iter().filter(|e| !before_set.contains(e)).count() as u64;
        Ok((0, deleted, inserted, transfer_list))
    }
}

fn sample_magnitude(rng: &mut ChaCha8Rng, d: f64) -> f64 {
    // gen::<f64>() is uniform on [0, 1), so this lands in (0, d].
    (1.0 - rng.gen::<f64>()) * d
}

/// Axis-displace `src` by `mag`, clamp into the root square, and make sure
/// the executed displacement stays within d even after rounding. Returns
/// None when clamping nulls the move entirely.
fn apply_move(src: Point, dir: Dir, mag: f64, root: &Square, d: f64) -> Option<Point> {
    let (mut x, mut y) = (src.x, src.y);
    match dir {
        Dir::Left => x = src.x - mag,
        Dir::Right => x = src.x + mag,
        Dir::Up => y = src.y + mag,
        Dir::Down => y = src.y - mag,
    }
    x = x.clamp(root.cx - root.half, root.cx + root.half);
    y = y.clamp(root.cy - root.half, root.cy + root.half);
    let mut q = Point::new(x, y);
    while (q.x - src.x).abs().max((q.y - src.y).abs()) > d {
        q = Point::new(toward(q.x, src.x), toward(q.y, src.y));
    }
    if q.bits() == src.bits() {
        None
    } else {
        Some(q)
    }
}

/// The next representable f64 from `x` toward `target` (at most one ulp).
fn toward(x: f64, target: f64) -> f64 {
    if x == target {
        return x;
    }
    let bits = x.to_bits();
    let next = if (x < target) == (x >= 0.0) {
        bits + 1
    } else if x == 0.0 {
        (-f64::MIN_POSITIVE).to_bits()
    } else {
        bits - 1
    };
    f64::from_bits(next)
}
