//! Bulk-synchronous execution of per-block work with deterministic results.
//!
//! A step runs as a fixed sequence of barrier-separated phases. Worker
//! count only changes how read-heavy phases are scheduled, never their
//! results: reductions are order-independent, per-block randomness comes
//! from per-block streams, and mesh mutations are applied in ascending
//! block id after conflict detection has grouped overlapping regions.

use crate::error::{Error, Result};
use crate::partition::{BlockId, QuadTree};
use crate::triangulation::VertexId;
use rayon::prelude::*;
use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

/// The ordered phases of one time step. A phase begins only after every
/// block has completed the previous one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Per-block local minimum of the Nth-nearest-neighbor distances.
    LocalMin,
    /// Min-reduce the local values and broadcast the movement bound d.
    ReduceBroadcast,
    /// Pick one mover per non-empty block.
    MoveSelection,
    /// Read-only prefetch of deletion stars and insertion cavities, then
    /// conflict detection over the affected regions.
    Prefetch,
    Deletions,
    Transfers,
    Insertions,
    /// Validation hooks and metrics assembly.
    Validation,
}

pub const PHASES: [Phase; 8] = [
    Phase::LocalMin,
    Phase::ReduceBroadcast,
    Phase::MoveSelection,
    Phase::Prefetch,
    Phase::Deletions,
    Phase::Transfers,
    Phase::Insertions,
    Phase::Validation,
];

/// Environment variable consulted for the default worker count;
/// `--workers` overrides it.
pub const THREADS_ENV: &str = "KDT_THREADS";

/// Worker pool handle. One per run; states stay plain data.
pub struct Runtime {
    pool: rayon::ThreadPool,
    workers: usize,
}

/// Resolve the effective worker count: explicit flag, else `KDT_THREADS`,
/// else the available hardware parallelism.
pub fn resolve_workers(flag: Option<usize>) -> usize {
    flag.filter(|&w| w > 0)
        .or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&w| w > 0)
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

impl Runtime {
    pub fn new(workers: usize) -> Result<Runtime> {
        if workers == 0 {
            return Err(Error::InvalidConfig("worker count must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        Ok(Runtime { pool, workers })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

/// Apply `work` to every item inside the pool and pass the barrier:
/// all results are available on return, in item order. A worker error or
/// panic aborts the whole phase.
pub fn run_phase<B, R, F>(rt: &Runtime, items: &[B], work: F) -> Result<Vec<R>>
where
    B: Sync,
    R: Send,
    F: Fn(usize, &B) -> Result<R> + Sync,
{
    rt.install(|| {
        items
            .par_iter()
            .enumerate()
            .map(|(i, item)| {
                catch_unwind(AssertUnwindSafe(|| work(i, item))).unwrap_or_else(|panic| {
                    let msg = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "worker panicked".to_string());
                    Err(Error::Internal(format!("worker panic: {msg}")))
                })
            })
            .collect()
    })
}

/// Global minimum of the per-block values. Min is associative and
/// commutative, so the result is identical for any reduction order.
pub fn reduce_min(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Conservative affected region of one mover: every vertex of the
/// triangles its deletion star and insertion cavity may touch, rings
/// included. Disjoint vertex sets imply disjoint triangle sets.
#[derive(Clone, Debug)]
pub struct MoverRegion {
    pub block: BlockId,
    pub vertices: Vec<VertexId>,
}

/// Groups of blocks whose affected regions overlapped this step, and the
/// serialization order applied: within a group, mutations execute in
/// ascending block id; blocks not grouped together touched disjoint
/// regions.
#[derive(Clone, Debug, Default)]
pub struct ConflictReport {
    pub groups: Vec<Vec<BlockId>>,
}

impl ConflictReport {
    /// Number of groups that actually serialize more than one mover.
    pub fn conflict_count(&self) -> usize {
        self.groups.iter().filter(|g| g.len() > 1).count()
    }
}

pub fn detect_conflicts(regions: &[MoverRegion]) -> ConflictReport {
    let mut parent: Vec<usize> = (0..regions.len()).collect();
    fn root(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: HashMap<VertexId, usize> = HashMap::new();
    for (i, region) in regions.iter().enumerate() {
        for &v in &region.vertices {
            match owner.entry(v) {
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
                std::collections::hash_map::Entry::Occupied(e) => {
                    let a = root(&mut parent, *e.get());
                    let b = root(&mut parent, i);
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut by_root: HashMap<usize, Vec<BlockId>> = HashMap::new();
    for i in 0..regions.len() {
        let r = root(&mut parent, i);
        by_root.entry(r).or_default().push(regions[i].block);
    }
    let mut groups: Vec<Vec<BlockId>> = by_root
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    groups.sort();
    ConflictReport { groups }
}

/// Per-step communication counters over the executed transfers.
#[derive(Clone, Debug, Default)]
pub struct CommCounters {
    /// Distinct destination blocks contacted per source block (only
    /// sources that transferred anything appear), ascending block id.
    pub contacts: Vec<(BlockId, usize)>,
    pub hops_total: u64,
    /// Transfers whose destination shares no boundary with the source;
    /// possible when the movement bound exceeds the smallest leaf width.
    pub non_neighbor_transfers: u64,
}

pub fn comm_counters(tree: &QuadTree, transfers: &[(BlockId, BlockId, u32)]) -> CommCounters {
    let mut dests: HashMap<BlockId, Vec<BlockId>> = HashMap::new();
    let mut hops_total = 0u64;
    let mut non_neighbor = 0u64;
    for &(from, to, hops) in transfers {
        hops_total += hops as u64;
        if from == to {
            continue;
        }
        let list = dests.entry(from).or_default();
        if !list.contains(&to) {
            list.push(to);
        }
        if !tree.block(from).is_neighbor(to) {
            non_neighbor += 1;
        }
    }
    let mut contacts: Vec<(BlockId, usize)> =
        dests.into_iter().map(|(b, d)| (b, d.len())).collect();
    contacts.sort_unstable();
    CommCounters {
        contacts,
        hops_total,
        non_neighbor_transfers: non_neighbor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduce_min_single_value() {
        assert_eq!(reduce_min(&[5.0]).unwrap(), 5.0);
    }

    #[test]
    fn reduce_min_small_set() {
        assert_eq!(reduce_min(&[3.0, 1.0, 2.0]).unwrap(), 1.0);
    }

    #[test]
    fn reduce_min_matches_sequential_fold() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let values: Vec<f64> = (0..64).map(|_| rng.gen::<f64>()).collect();
        let sequential = values.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(reduce_min(&values).unwrap(), sequential);
    }

    #[test]
    fn reduce_min_empty_is_error() {
        assert!(matches!(reduce_min(&[]), Err(Error::EmptyInput)));
    }

    #[test]
    fn run_phase_identity_returns_inputs() {
        let rt = Runtime::new(4).unwrap();
        let items: Vec<u32> = (0..100).collect();
        let out = run_phase(&rt, &items, |_, &x| Ok(x)).unwrap();
        assert_eq!(out, items);
    }

    #[test]
    fn run_phase_error_aborts_phase() {
        let rt = Runtime::new(4).unwrap();
        let items: Vec<u32> = (0..8).collect();
        let out = run_phase(&rt, &items, |_, &x| {
            if x == 3 {
                Err(Error::Internal("boom".into()))
            } else {
                Ok(x)
            }
        });
        assert!(matches!(out, Err(Error::Internal(_))));
    }

    #[test]
    fn run_phase_panic_becomes_error() {
        let rt = Runtime::new(2).unwrap();
        let items: Vec<u32> = (0..4).collect();
        let out = run_phase(&rt, &items, |_, &x| {
            if x == 2 {
                panic!("worker blew up");
            }
            Ok(x)
        });
        match out {
            Err(Error::Internal(msg)) => assert!(msg.contains("worker blew up")),
            other => panic!("expected internal error, got {other:?}"),
        }
    }

    fn region(block: u32, verts: &[u32]) -> MoverRegion {
        MoverRegion {
            block: BlockId(block),
            vertices: verts.iter().map(|&v| VertexId(v)).collect(),
        }
    }

    #[test]
    fn disjoint_regions_do_not_conflict() {
        let report = detect_conflicts(&[region(0, &[1, 2, 3]), region(5, &[7, 8, 9])]);
        assert_eq!(report.conflict_count(), 0);
        assert_eq!(report.groups.len(), 2);
    }

    #[test]
    fn overlapping_regions_group_in_block_id_order() {
        let report = detect_conflicts(&[region(4, &[1, 2]), region(2, &[2, 3]), region(9, &[50])]);
        assert_eq!(report.conflict_count(), 1);
        assert!(report.groups.contains(&vec![BlockId(2), BlockId(4)]));
    }

    #[test]
    fn single_mover_never_conflicts() {
        let report = detect_conflicts(&[region(0, &[1, 2, 3])]);
        assert_eq!(report.conflict_count(), 0);
    }
}
