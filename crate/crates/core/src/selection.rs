//! Relation topology selection by local search.
//!
//! Starting from a connected topology, relations are added, removed or
//! exchanged one at a time; the first neighbor that lowers the score is
//! adopted until no neighbor improves or the evaluation budget runs out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ObjectId;
use crate::topology::{Relation, RelationTopology};

/// Scores a candidate topology; lower is better.
pub trait TopologyObjective {
    fn score(&mut self, topology: &RelationTopology) -> Result<f64>;
}

impl<F: FnMut(&RelationTopology) -> Result<f64>> TopologyObjective for F {
    fn score(&mut self, topology: &RelationTopology) -> Result<f64> {
        self(topology)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchParams {
    /// Maximum number of candidate evaluations, the start included.
    pub max_evaluations: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { max_evaluations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionOutcome {
    pub topology: RelationTopology,
    pub score: f64,
    pub start_score: f64,
    pub evaluations: usize,
    /// Number of adopted moves.
    pub improvements: usize,
}

/// Neighbors of `topology` in search order: additions, then removals that
/// keep the graph connected, then exchanges of one present for one absent
/// relation that keep it connected. Relations are visited in sorted order.
pub fn neighbors(topology: &RelationTopology) -> Vec<RelationTopology> {
    let objects: Vec<&ObjectId> = topology.objects().iter().collect();
    let mut absent = Vec::new();
    for (i, a) in objects.iter().enumerate() {
        for b in &objects[i + 1..] {
            let r = Relation::new((*a).clone(), (*b).clone()).expect("distinct objects");
            if !topology.relations().contains(&r) {
                absent.push(r);
            }
        }
    }
    let present: Vec<&Relation> = topology.relations().iter().collect();

    let mut out: Vec<RelationTopology> = absent.iter().map(|r| topology.with_relation(r.clone())).collect();
    out.extend(present.iter().map(|r| topology.without_relation(r)).filter(RelationTopology::is_connected));
    for r in &present {
        let reduced = topology.without_relation(r);
        for a in &absent {
            let swapped = reduced.with_relation(a.clone());
            if swapped.is_connected() {
                out.push(swapped);
            }
        }
    }
    out
}

/// First-improvement hill climbing from `start`.
pub fn select_topology(start: RelationTopology, objective: &mut dyn TopologyObjective, params: &SearchParams) -> Result<SelectionOutcome> {
    if params.max_evaluations == 0 {
        return Err(Error::BudgetZero);
    }
    if !start.is_connected() {
        return Err(Error::DisconnectedTopology);
    }
    let start_score = objective.score(&start)?;
    let mut current = start;
    let mut score = start_score;
    let mut evaluations = 1;
    let mut improvements = 0;
    'search: loop {
        let mut improved = false;
        for candidate in neighbors(&current) {
            if evaluations >= params.max_evaluations {
                break 'search;
            }
            let s = objective.score(&candidate)?;
            evaluations += 1;
            if s < score {
                current = candidate;
                score = s;
                improvements += 1;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(SelectionOutcome { topology: current, score, start_score, evaluations, improvements })
}
