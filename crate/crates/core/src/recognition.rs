//! Scene recognition with a single ISM.
//!
//! Every input object known to the ISM casts one vote per demonstrated
//! relative pose for where the reference should be. Each vote is then tried
//! as a hypothesis for the reference pose: every object contributes its single
//! best-fitting vote to that hypothesis, rated by how well the object pose it
//! implies agrees with the observed one. Votes are bucketed in a sparse cubic
//! grid so that only votes that can possibly agree with a hypothesis are
//! compared against it.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::compliance::linear_falloff;
use crate::error::{Error, Result};
use crate::geometry::{quaternion_angle_deg, Pose};
use crate::ism::SingleIsm;
use crate::model::{ObjectId, ObjectState, ResultToken};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct RecognitionParams {
    /// Accumulator cell edge length in meters.
    pub bin_size: f64,
    /// Position deviation (m) at which an object is excluded.
    pub position_tolerance: f64,
    /// Orientation deviation (degrees) at which an object is excluded.
    pub orientation_tolerance_deg: f64,
    /// Minimum confidence for a sub-ISM result to be passed to its parent.
    pub result_keep_threshold: f64,
    /// Minimum root confidence for a scene instance (ε_R).
    pub assembly_threshold: f64,
    /// Upper bound on results any ISM passes to its parent.
    pub max_results_per_ism: usize,
}

impl Default for RecognitionParams {
    fn default() -> Self {
        Self {
            bin_size: 0.1,
            position_tolerance: 0.1,
            orientation_tolerance_deg: 30.0,
            result_keep_threshold: 0.5,
            assembly_threshold: 0.6,
            max_results_per_ism: 32,
        }
    }
}

impl RecognitionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if !(self.bin_size > 0.0 && self.bin_size.is_finite()) {
            return bad("bin size must be positive");
        }
        if !(self.position_tolerance > 0.0 && self.position_tolerance.is_finite()) {
            return bad("position tolerance must be positive");
        }
        if !(self.orientation_tolerance_deg > 0.0 && self.orientation_tolerance_deg <= 180.0) {
            return bad("orientation tolerance must lie in (0, 180] degrees");
        }
        if !(0.0..=1.0).contains(&self.result_keep_threshold) {
            return bad("result keep threshold must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.assembly_threshold) {
            return bad("assembly threshold must lie in [0, 1]");
        }
        if self.max_results_per_ism == 0 {
            return bad("at least one result per ISM must be kept");
        }
        Ok(())
    }

    /// Farthest a voted reference position may lie from a hypothesis and
    /// still yield a nonzero similarity, given the ISM's longest lever arm.
    pub fn vote_reach(&self, max_lever: f64) -> f64 {
        let half = (self.orientation_tolerance_deg.min(180.0) / 2.0).to_radians();
        self.position_tolerance + max_lever * 2.0 * half.sin()
    }
}

/// An input object's contribution to a recognition result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Participant {
    pub state: ObjectState,
    /// `position_compliance * orientation_compliance`
    pub similarity: f64,
    pub position_compliance: f64,
    pub orientation_compliance: f64,
    pub weight: u32,
    /// Demonstration time step of the vote that matched.
    pub timestep: usize,
}

impl Participant {
    /// Similarity scaled by the confidence of the input state.
    pub fn rating(&self) -> f64 {
        self.similarity * self.state.confidence
    }

    pub fn contribution(&self) -> f64 {
        f64::from(self.weight) * self.rating()
    }
}

/// A consistent combination of votes found by one ISM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RecognitionResult {
    pub ism_label: String,
    /// Hypothesized reference pose `T_F`.
    pub reference_pose: Pose,
    /// Weighted sum of participant ratings.
    pub objective: f64,
    /// `objective / total_weight`, within `[0, 1]`.
    pub confidence: f64,
    pub participants: Vec<Participant>,
    pub token: ResultToken,
}

impl RecognitionResult {
    pub fn participant_ids(&self) -> Vec<&ObjectId> {
        self.participants.iter().map(|p| &p.state.id).collect()
    }
}

/// Work done by one recognition call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecognitionStats {
    pub votes: usize,
    pub hypotheses: usize,
    /// Vote-against-hypothesis comparisons.
    pub evaluations: usize,
}

impl std::ops::AddAssign for RecognitionStats {
    fn add_assign(&mut self, rhs: Self) {
        self.votes += rhs.votes;
        self.hypotheses += rhs.hypotheses;
        self.evaluations += rhs.evaluations;
    }
}

pub fn recognize_single_ism(inputs: &[ObjectState], ism: &SingleIsm, params: &RecognitionParams) -> Vec<RecognitionResult> {
    recognize_single_ism_with_stats(inputs, ism, params).0
}

#[derive(Clone, Copy)]
struct Vote {
    input: usize,
    sample: usize,
    pose: Pose,
}

#[derive(Clone, Copy)]
struct Match {
    rating: f64,
    similarity: f64,
    position: f64,
    orientation: f64,
    input: usize,
    sample: usize,
}

impl Match {
    fn beats(&self, other: &Match) -> bool {
        self.rating > other.rating || (self.rating == other.rating && (self.input, self.sample) < (other.input, other.sample))
    }
}

struct Candidate {
    reference: Pose,
    matches: Vec<Match>,
    objective: f64,
    key: Vec<usize>,
}

type Cell = [i64; 3];

/// Objective differences below this are treated as ties, so that rounding
/// noise does not decide between equally good hypotheses.
const TIE_EPS: f64 = 1e-9;

/// `confidence >= threshold`, up to rounding.
pub fn reaches(confidence: f64, threshold: f64) -> bool {
    confidence >= threshold - TIE_EPS
}

fn cell_of(pose: &Pose, bin: f64) -> Cell {
    let p = pose.position;
    [(p.x / bin).floor() as i64, (p.y / bin).floor() as i64, (p.z / bin).floor() as i64]
}

/// Keeps only inputs the ISM knows and collapses exact duplicates
/// (same identity and pose), preferring the higher confidence.
fn relevant_inputs<'a>(inputs: &'a [ObjectState], ism: &SingleIsm) -> Vec<&'a ObjectState> {
    let mut kept: Vec<&ObjectState> = inputs.iter().filter(|s| ism.contains(&s.id)).collect();
    kept.sort_by(|a, b| {
        a.id.cmp(&b.id)
            .then_with(|| pose_key(&a.pose).cmp(&pose_key(&b.pose)))
            .then_with(|| b.confidence.total_cmp(&a.confidence))
            .then_with(|| a.source.cmp(&b.source))
    });
    kept.dedup_by(|later, earlier| later.id == earlier.id && later.pose.approx_eq(&earlier.pose, 1e-9));
    kept
}

fn pose_key(p: &Pose) -> [u64; 7] {
    p.to_array().map(|v| (v + 0.0).to_bits())
}

/// Single-ISM recognition that also reports how much work was done.
pub fn recognize_single_ism_with_stats(
    inputs: &[ObjectState],
    ism: &SingleIsm,
    params: &RecognitionParams,
) -> (Vec<RecognitionResult>, RecognitionStats) {
    let mut stats = RecognitionStats::default();
    let inputs = relevant_inputs(inputs, ism);
    if inputs.is_empty() {
        return (Vec::new(), stats);
    }

    // Dense index per distinct object identity.
    let mut object_index: HashMap<&ObjectId, usize> = HashMap::new();
    let mut objects: Vec<&ObjectId> = Vec::new();
    let input_object: Vec<usize> = inputs
        .iter()
        .map(|s| {
            *object_index.entry(&s.id).or_insert_with(|| {
                objects.push(&s.id);
                objects.len() - 1
            })
        })
        .collect();
    let samples: Vec<_> = inputs.iter().map(|s| ism.votes_for(&s.id).unwrap_or(&[])).collect();

    let mut votes = Vec::with_capacity(inputs.len() * ism.len());
    for (i, state) in inputs.iter().enumerate() {
        for (k, sample) in samples[i].iter().enumerate() {
            votes.push(Vote { input: i, sample: k, pose: state.pose.compose(&sample.vote_to_reference) });
        }
    }
    stats.votes = votes.len();

    let bin = params.bin_size;
    let mut grid: HashMap<Cell, Vec<u32>> = HashMap::new();
    for (idx, v) in votes.iter().enumerate() {
        grid.entry(cell_of(&v.pose, bin)).or_default().push(idx as u32);
    }
    let mut cells: Vec<Cell> = grid.keys().copied().collect();
    cells.sort_unstable();

    let reach = params.vote_reach(ism.max_lever()) + 1e-9;
    let ring = ((reach / bin).ceil() as i64).max(1);
    let ring_volume = (2 * ring + 1).pow(3) as usize;
    let tau_pos = params.position_tolerance;
    let tau_rot = params.orientation_tolerance_deg;

    let mut seen_hypotheses: HashSet<[u64; 7]> = HashSet::new();
    let mut best: Vec<Option<Match>> = vec![None; objects.len()];
    let mut by_key: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut neighborhood: Vec<u32> = Vec::new();

    for hyp in &votes {
        if !seen_hypotheses.insert(pose_key(&hyp.pose)) {
            continue;
        }
        stats.hypotheses += 1;
        let reference = hyp.pose;
        let center = cell_of(&reference, bin);

        neighborhood.clear();
        if ring_volume <= cells.len() {
            for dx in -ring..=ring {
                for dy in -ring..=ring {
                    for dz in -ring..=ring {
                        if let Some(list) = grid.get(&[center[0] + dx, center[1] + dy, center[2] + dz]) {
                            neighborhood.extend_from_slice(list);
                        }
                    }
                }
            }
        } else {
            for c in &cells {
                if (0..3).all(|d| (c[d] - center[d]).abs() <= ring) {
                    neighborhood.extend_from_slice(&grid[c]);
                }
            }
        }

        best.iter_mut().for_each(|b| *b = None);
        for &vi in &neighborhood {
            let v = &votes[vi as usize];
            if (v.pose.position - reference.position).norm() > reach {
                continue;
            }
            stats.evaluations += 1;
            let state = inputs[v.input];
            let sample = &samples[v.input][v.sample];
            let expected_position = reference.transform_point(&sample.back_to_object.position);
            let position = linear_falloff((expected_position - state.pose.position).norm(), tau_pos);
            if position <= 0.0 {
                continue;
            }
            let expected_orientation = reference.orientation * sample.back_to_object.orientation;
            let orientation = linear_falloff(quaternion_angle_deg(&expected_orientation, &state.pose.orientation), tau_rot);
            if orientation <= 0.0 {
                continue;
            }
            let similarity = position * orientation;
            let m = Match { rating: similarity * state.confidence, similarity, position, orientation, input: v.input, sample: v.sample };
            if m.rating <= 0.0 {
                continue;
            }
            let slot = &mut best[input_object[v.input]];
            if slot.as_ref().is_none_or(|cur| m.beats(cur)) {
                *slot = Some(m);
            }
        }

        let matches: Vec<Match> = best.iter().flatten().copied().collect();
        if matches.is_empty() {
            continue;
        }
        let objective: f64 = matches.iter().map(|m| f64::from(ism.weight(&inputs[m.input].id)) * m.rating).sum();
        let key: Vec<usize> = matches.iter().map(|m| m.input).collect();
        match by_key.get(&key) {
            Some(&idx) => {
                if objective > candidates[idx].objective + TIE_EPS {
                    candidates[idx].reference = reference;
                    candidates[idx].matches = matches;
                    candidates[idx].objective = objective;
                }
            }
            None => {
                by_key.insert(key.clone(), candidates.len());
                candidates.push(Candidate { reference, matches, objective, key });
            }
        }
    }

    // Drop every result whose participants are covered by another result
    // scoring at least as high. Dominators are strictly larger sets, so they
    // are visited first in this order.
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&candidates[a], &candidates[b]);
        cb.key.len().cmp(&ca.key.len()).then_with(|| cb.objective.total_cmp(&ca.objective)).then_with(|| ca.key.cmp(&cb.key))
    });
    let mut kept: Vec<usize> = Vec::new();
    for idx in order {
        let c = &candidates[idx];
        let dominated = kept.iter().any(|&k| {
            let d = &candidates[k];
            d.objective >= c.objective - TIE_EPS && is_subset(&c.key, &d.key)
        });
        if !dominated {
            kept.push(idx);
        }
    }

    let total = f64::from(ism.total_weight());
    let mut results: Vec<RecognitionResult> = kept
        .into_iter()
        .map(|idx| {
            let c = &candidates[idx];
            let participants = c
                .matches
                .iter()
                .map(|m| {
                    let state = inputs[m.input];
                    Participant {
                        state: state.clone(),
                        similarity: m.similarity,
                        position_compliance: m.position,
                        orientation_compliance: m.orientation,
                        weight: ism.weight(&state.id),
                        timestep: samples[m.input][m.sample].timestep,
                    }
                })
                .collect();
            RecognitionResult {
                ism_label: ism.label.clone(),
                reference_pose: c.reference,
                objective: c.objective,
                confidence: (c.objective / total).clamp(0.0, 1.0),
                participants,
                token: ResultToken(0),
            }
        })
        .collect();
    sort_results(&mut results);
    for (i, r) in results.iter_mut().enumerate() {
        r.token = ResultToken(i as u64);
    }
    (results, stats)
}

/// Canonical order: best objective first, then by participant identities.
/// Objectives are compared on a 1e-9 grid.
pub fn sort_results(results: &mut [RecognitionResult]) {
    let grid = |r: &RecognitionResult| (r.objective / TIE_EPS).round() as i64;
    results.sort_by(|a, b| {
        grid(b)
            .cmp(&grid(a))
            .then_with(|| a.participant_ids().cmp(&b.participant_ids()))
            .then_with(|| pose_key(&a.reference_pose).cmp(&pose_key(&b.reference_pose)))
    });
}

/// Both slices sorted ascending.
fn is_subset(small: &[usize], large: &[usize]) -> bool {
    let mut it = large.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ism::learn_single_ism;
    use crate::model::Trajectory;

    fn two_screens(l: usize) -> (Trajectory, Trajectory) {
        let left = Trajectory::new(
            ObjectId::named("LeftScreen"),
            (0..l).map(|t| Pose::from_position_yaw(0.02 * t as f64, 1.0, 0.5, 3.0 * t as f64)).collect(),
        );
        let right = Trajectory::new(
            ObjectId::named("RightScreen"),
            left.poses.iter().map(|p| p.compose(&Pose::from_position_yaw(0.6, 0.0, 0.0, -10.0))).collect(),
        );
        (left, right)
    }

    #[test]
    fn self_recognition_is_complete() {
        let (left, right) = two_screens(6);
        let (ism, _) = learn_single_ism("office_sub0", &left, &[&right]).unwrap();
        let params = RecognitionParams::default();
        for t in 0..6 {
            let inputs = vec![
                ObjectState::detected(left.object_id.clone(), left.poses[t]),
                ObjectState::detected(right.object_id.clone(), right.poses[t]),
            ];
            let results = recognize_single_ism(&inputs, &ism, &params);
            assert_eq!(results.len(), 1, "a full match dominates all partial ones");
            let r = &results[0];
            assert!((r.confidence - 1.0).abs() < 1e-6);
            assert!((r.objective - 2.0).abs() < 1e-6);
            assert_eq!(r.participants.len(), 2);
        }
    }

    #[test]
    fn far_displacement_excludes_object() {
        let (left, right) = two_screens(6);
        let (ism, _) = learn_single_ism("office_sub0", &left, &[&right]).unwrap();
        let params = RecognitionParams::default();
        let lowered = right.poses[2].compose(&Pose::from_translation(0.0, 0.0, -0.25));
        let inputs =
            vec![ObjectState::detected(left.object_id.clone(), left.poses[2]), ObjectState::detected(right.object_id.clone(), lowered)];
        let results = recognize_single_ism(&inputs, &ism, &params);
        assert!((results[0].objective - 1.0).abs() < 1e-9);
        assert_eq!(results[0].participants.len(), 1);
    }

    #[test]
    fn empty_input_gives_nothing() {
        let (left, right) = two_screens(3);
        let (ism, _) = learn_single_ism("s", &left, &[&right]).unwrap();
        assert!(recognize_single_ism(&[], &ism, &RecognitionParams::default()).is_empty());
    }

    #[test]
    fn unknown_objects_do_not_change_results() {
        let (left, right) = two_screens(5);
        let (ism, _) = learn_single_ism("s", &left, &[&right]).unwrap();
        let params = RecognitionParams::default();
        let base = vec![
            ObjectState::detected(left.object_id.clone(), left.poses[1]),
            ObjectState::detected(right.object_id.clone(), right.poses[3]),
        ];
        let mut cluttered = base.clone();
        cluttered.push(ObjectState::detected(ObjectId::named("Mug"), left.poses[1]));
        assert_eq!(recognize_single_ism(&base, &ism, &params), recognize_single_ism(&cluttered, &ism, &params));
    }

    #[test]
    fn exact_duplicates_keep_higher_confidence() {
        let (left, right) = two_screens(3);
        let (ism, _) = learn_single_ism("s", &left, &[&right]).unwrap();
        let mut low = ObjectState::detected(left.object_id.clone(), left.poses[0]);
        low.confidence = 0.3;
        let inputs = vec![
            low,
            ObjectState::detected(left.object_id.clone(), left.poses[0]),
            ObjectState::detected(right.object_id.clone(), right.poses[0]),
        ];
        let results = recognize_single_ism(&inputs, &ism, &RecognitionParams::default());
        assert!((results[0].confidence - 1.0).abs() < 1e-9);
        assert_eq!(results[0].participants.len(), 2);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = RecognitionParams::default();
        assert!(p.validate().is_ok());
        p.bin_size = 0.0;
        assert!(p.validate().is_err());
        p = RecognitionParams { orientation_tolerance_deg: 190.0, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn thresholds_ignore_rounding() {
        assert!(reaches(0.5 - 1e-15, 0.5));
        assert!(reaches(0.6, 0.5));
        assert!(!reaches(0.49, 0.5));
    }

    #[test]
    fn subset_check() {
        assert!(is_subset(&[1, 3], &[0, 1, 2, 3]));
        assert!(!is_subset(&[1, 4], &[0, 1, 2, 3]));
        assert!(is_subset(&[], &[0]));
    }
}
