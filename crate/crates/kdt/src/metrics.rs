//! Per-step metrics, serialized as JSON lines (one object per step).

use crate::partition::Dir;
use serde::{Deserialize, Serialize};

/// One executed move.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MoveRecord {
    pub block: u32,
    pub vertex: u32,
    pub dir: Dir,
    pub mag: f64,
    pub to_block: u32,
}

/// Everything observable about one time step. `wall_ms` is the only field
/// expected to differ between identical runs.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StepMetrics {
    pub t: u64,
    pub d: f64,
    pub moves: Vec<MoveRecord>,
    pub transfers: u64,
    pub hops_total: u64,
    pub edges_deleted: u64,
    pub edges_inserted: u64,
    pub conflicts: u64,
    pub wall_ms: f64,
}

impl StepMetrics {
    /// Copy with the wall-time field zeroed, for comparing runs.
    pub fn without_wall_time(&self) -> StepMetrics {
        StepMetrics {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::Dir;

    #[test]
    fn metrics_serialize_with_pinned_field_names() {
        let m = StepMetrics {
            t: 3,
            d: 0.25,
            moves: vec![MoveRecord {
                block: 1,
                vertex: 9,
                dir: Dir::Left,
                mag: 0.1,
                to_block: 2,
            }],
            transfers: 1,
            hops_total: 2,
            edges_deleted: 4,
            edges_inserted: 5,
            conflicts: 0,
            wall_ms: 1.5,
        };
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(
            json,
            "{\"t\":3,\"d\":0.25,\"moves\":[{\"block\":1,\"vertex\":9,\"dir\":\"left\",\
             \"mag\":0.1,\"to_block\":2}],\"transfers\":1,\"hops_total\":2,\
             \"edges_deleted\":4,\"edges_inserted\":5,\"conflicts\":0,\"wall_ms\":1.5}"
        );
        let back: StepMetrics = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }
}
