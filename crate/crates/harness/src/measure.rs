//! The two goodness measures of a relation topology, false positives and
//! recognition time, and the topology search built on them.

use std::time::Instant;

use ism_tree::model::{DemonstrationDataset, LabeledConfiguration};
use ism_tree::recognition::{reaches, RecognitionParams};
use ism_tree::selection::{select_topology, SearchParams, SelectionOutcome, TopologyObjective};
use ism_tree::topology::{partition_into_stars, RelationTopology};
use ism_tree::tree::{assemble_instances, best_confidence, evaluate_isms_in_tree_with_stats, generate_ism_tree, recognize_scene, IsmTree};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Star around the object with the smallest identity.
pub fn star_topology(dataset: &DemonstrationDataset) -> RelationTopology {
    let objects: Vec<_> = dataset.objects().cloned().collect();
    RelationTopology::star(&objects[0], objects[1..].iter().cloned()).expect("datasets hold at least one object")
}

pub fn complete_topology(dataset: &DemonstrationDataset) -> RelationTopology {
    RelationTopology::complete(dataset.objects().cloned())
}

pub fn build_tree(dataset: &DemonstrationDataset, topology: &RelationTopology) -> Result<IsmTree> {
    let (stars, heights) = partition_into_stars(topology)?;
    Ok(generate_ism_tree(&dataset.category, &stars, &heights, dataset)?)
}

/// Percentage of invalid configurations recognized with a confidence of at
/// least the assembly threshold.
pub fn num_fps(tree: &IsmTree, test_set: &[LabeledConfiguration], params: &RecognitionParams) -> Result<f64> {
    let invalid: Vec<&LabeledConfiguration> = test_set.iter().filter(|c| !c.valid).collect();
    if invalid.is_empty() {
        return Err(HarnessError::EmptyTestSet("invalid"));
    }
    let mut hits = 0usize;
    for c in &invalid {
        let instances = recognize_scene(&c.objects, tree, params)?;
        if !instances.is_empty() && reaches(best_confidence(&instances), params.assembly_threshold) {
            hits += 1;
        }
    }
    Ok(100.0 * hits as f64 / invalid.len() as f64)
}

/// Mean wall-clock seconds of one scene recognition over the test set,
/// after two untimed warm-up calls.
pub fn avg_dur(tree: &IsmTree, test_set: &[LabeledConfiguration], params: &RecognitionParams) -> Result<f64> {
    if test_set.is_empty() {
        return Err(HarnessError::EmptyTestSet("test"));
    }
    for k in 0..2 {
        recognize_scene(&test_set[k % test_set.len()].objects, tree, params)?;
    }
    let start = Instant::now();
    for c in test_set {
        std::hint::black_box(recognize_scene(&c.objects, tree, params)?);
    }
    Ok(start.elapsed().as_secs_f64() / test_set.len() as f64)
}

/// Mean number of vote comparisons per recognition, a machine-independent
/// stand-in for the recognition time.
pub fn mean_evaluations(tree: &IsmTree, test_set: &[LabeledConfiguration], params: &RecognitionParams) -> Result<f64> {
    if test_set.is_empty() {
        return Err(HarnessError::EmptyTestSet("test"));
    }
    let mut total = 0usize;
    for c in test_set {
        let (results, stats) = evaluate_isms_in_tree_with_stats(&c.objects, tree, params)?;
        std::hint::black_box(assemble_instances(&results, tree, params.assembly_threshold));
        total += stats.evaluations + stats.votes;
    }
    Ok(total as f64 / test_set.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum CostModel {
    /// Measured seconds per recognition.
    WallClock,
    /// Counted work times a nominal duration per unit; reproducible.
    #[serde(rename_all = "camelCase")]
    Evaluations { seconds_per_evaluation: f64 },
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::Evaluations { seconds_per_evaluation: 1e-7 }
    }
}

/// `lambda_fp * numFPs + duration` of the tree built from a topology.
pub struct TopologyScorer<'a> {
    pub dataset: &'a DemonstrationDataset,
    pub test_set: &'a [LabeledConfiguration],
    pub params: RecognitionParams,
    pub lambda_fp: f64,
    pub cost: CostModel,
}

impl TopologyScorer<'_> {
    pub fn evaluate(&self, topology: &RelationTopology) -> Result<TopologyScore> {
        let tree = build_tree(self.dataset, topology)?;
        let fps = num_fps(&tree, self.test_set, &self.params)?;
        let duration = match self.cost {
            CostModel::WallClock => avg_dur(&tree, self.test_set, &self.params)?,
            CostModel::Evaluations { seconds_per_evaluation } => {
                mean_evaluations(&tree, self.test_set, &self.params)? * seconds_per_evaluation
            }
        };
        Ok(TopologyScore { num_fps: fps, duration, score: self.lambda_fp * fps + duration })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TopologyScore {
    pub num_fps: f64,
    pub duration: f64,
    pub score: f64,
}

impl TopologyObjective for TopologyScorer<'_> {
    fn score(&mut self, topology: &RelationTopology) -> ism_tree::Result<f64> {
        Ok(self.evaluate(topology)?.score)
    }
}

/// Local search from the star topology of the dataset.
pub fn optimize_topology(scorer: &mut TopologyScorer<'_>, search: &SearchParams) -> Result<SelectionOutcome> {
    let start = star_topology(scorer.dataset);
    Ok(select_topology(start, scorer, search)?)
}
