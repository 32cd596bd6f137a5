//! ISM trees: hierarchies of single ISMs linked through placeholder
//! reference objects, their generation from star topologies and
//! hierarchical scene recognition.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::ism::{learn_weighted_ism, SingleIsm};
use crate::model::{DemonstrationDataset, ObjectId, ObjectState, ResultToken, Trajectory};
use crate::recognition::{reaches, recognize_single_ism_with_stats, RecognitionParams, RecognitionResult, RecognitionStats};
use crate::topology::{HeightFunction, StarTopology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParentLink {
    pub parent: String,
    /// Input identity under which the child's results enter the parent.
    pub placeholder: ObjectId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeDocument", into = "TreeDocument")]
pub struct IsmTree {
    category: String,
    root: String,
    isms: BTreeMap<String, SingleIsm>,
    parents: BTreeMap<String, ParentLink>,
    levels: BTreeMap<String, usize>,
}

impl IsmTree {
    /// Assembles a tree from its parts and checks that they form a proper
    /// hierarchy; levels are derived from the parent links.
    pub fn new(
        category: impl Into<String>,
        root: impl Into<String>,
        isms: impl IntoIterator<Item = SingleIsm>,
        parents: BTreeMap<String, ParentLink>,
    ) -> Result<Self> {
        let category = category.into();
        let root = root.into();
        let isms: BTreeMap<String, SingleIsm> = isms.into_iter().map(|m| (m.label.clone(), m)).collect();
        if !isms.contains_key(&root) {
            return Err(Error::InvalidTree(format!("root {root} is not an ISM of the tree")));
        }
        if parents.contains_key(&root) {
            return Err(Error::InvalidTree("root must not have a parent".into()));
        }
        for (label, ism) in &isms {
            if ism.reference_id != ObjectId::placeholder_for(label) {
                return Err(Error::InvalidTree(format!("ISM {label} has a foreign reference id")));
            }
            if label != &root && !parents.contains_key(label) {
                return Err(Error::InvalidTree(format!("ISM {label} is not linked to a parent")));
            }
        }
        for (child, link) in &parents {
            let parent =
                isms.get(&link.parent).ok_or_else(|| Error::InvalidTree(format!("parent {} of {child} is missing", link.parent)))?;
            let ism = isms.get(child).ok_or_else(|| Error::InvalidTree(format!("linked ISM {child} is missing")))?;
            if link.placeholder != ism.reference_id || !parent.contains(&link.placeholder) {
                return Err(Error::InvalidTree(format!("parent {} has no vote entry for {}", link.parent, link.placeholder)));
            }
            if parent.weight(&link.placeholder) != ism.total_weight() {
                return Err(Error::InvalidTree(format!("placeholder {} does not carry the weight of {child}", link.placeholder)));
            }
        }

        let mut levels = BTreeMap::new();
        for label in isms.keys() {
            let mut depth = 0;
            let mut cur = label;
            while let Some(link) = parents.get(cur) {
                depth += 1;
                if depth > isms.len() {
                    return Err(Error::InvalidTree("parent links form a cycle".into()));
                }
                cur = &link.parent;
            }
            levels.insert(label.clone(), depth);
        }
        Ok(Self { category, root, isms, parents, levels })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn root_label(&self) -> &str {
        &self.root
    }

    pub fn root(&self) -> &SingleIsm {
        &self.isms[&self.root]
    }

    pub fn ism(&self, label: &str) -> Option<&SingleIsm> {
        self.isms.get(label)
    }

    pub fn isms(&self) -> impl Iterator<Item = &SingleIsm> {
        self.isms.values()
    }

    pub fn ism_count(&self) -> usize {
        self.isms.len()
    }

    pub fn parent_of(&self, label: &str) -> Option<&ParentLink> {
        self.parents.get(label)
    }

    pub fn parent_links(&self) -> &BTreeMap<String, ParentLink> {
        &self.parents
    }

    pub fn level_of(&self, label: &str) -> Option<usize> {
        self.levels.get(label).copied()
    }

    pub fn levels(&self) -> &BTreeMap<String, usize> {
        &self.levels
    }

    /// Largest level; 0 for a single ISM.
    pub fn height(&self) -> usize {
        self.levels.values().copied().max().unwrap_or(0)
    }

    /// Child ISM labels of `label`, sorted.
    pub fn children_of(&self, label: &str) -> Vec<&str> {
        self.parents.iter().filter(|(_, link)| link.parent == label).map(|(child, _)| child.as_str()).collect()
    }

    /// Whether `id` stands for an ISM of this tree rather than a real object.
    pub fn is_placeholder(&self, id: &ObjectId) -> bool {
        id.instance_label == "0" && self.isms.contains_key(&id.class_label) && self.parents.contains_key(&id.class_label)
    }

    /// Real objects of `label` that are direct inputs of that ISM.
    pub fn leaves_of(&self, label: &str) -> Vec<&ObjectId> {
        self.isms.get(label).map(|m| m.inputs().filter(|id| !self.is_placeholder(id)).collect()).unwrap_or_default()
    }

    /// Every real object of the scene category.
    pub fn objects(&self) -> BTreeSet<&ObjectId> {
        self.isms.keys().flat_map(|l| self.leaves_of(l)).collect()
    }

    /// ISM labels from the deepest level up to the root; ties by label.
    pub fn evaluation_order(&self) -> Vec<&str> {
        let mut order: Vec<&str> = self.isms.keys().map(String::as_str).collect();
        order.sort_by_key(|l| (Reverse(self.levels[*l]), *l));
        order
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDocument {
    category: String,
    root: String,
    isms: Vec<SingleIsm>,
    parents: Vec<LinkRecord>,
    levels: BTreeMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct LinkRecord {
    child: String,
    parent: String,
    placeholder: ObjectId,
}

impl From<IsmTree> for TreeDocument {
    fn from(tree: IsmTree) -> Self {
        Self {
            category: tree.category,
            root: tree.root,
            isms: tree.isms.into_values().collect(),
            parents: tree
                .parents
                .into_iter()
                .map(|(child, link)| LinkRecord { child, parent: link.parent, placeholder: link.placeholder })
                .collect(),
            levels: tree.levels,
        }
    }
}

impl TryFrom<TreeDocument> for IsmTree {
    type Error = Error;

    fn try_from(doc: TreeDocument) -> Result<Self> {
        let parents = doc.parents.into_iter().map(|r| (r.child, ParentLink { parent: r.parent, placeholder: r.placeholder })).collect();
        let tree = IsmTree::new(doc.category, doc.root, doc.isms, parents)?;
        if tree.levels != doc.levels {
            return Err(Error::InvalidTree("stored levels disagree with parent links".into()));
        }
        Ok(tree)
    }
}

/// Turns every star into one ISM, from the highest star down to the one of
/// height 0, which becomes the root named `category`.
///
/// Each non-root ISM is attached to a not yet processed star sharing an
/// object with it (lowest height first, then earliest extracted), trying the
/// ISM's center before its neighbors. The shared object is replaced there by
/// the ISM's placeholder, whose trajectory is the center's trajectory and
/// whose weight is the ISM's total weight.
pub fn generate_ism_tree(
    category: &str,
    stars: &[StarTopology],
    heights: &HeightFunction,
    dataset: &DemonstrationDataset,
) -> Result<IsmTree> {
    if stars.is_empty() {
        return Err(Error::InvalidTopology("no stars to build a tree from".into()));
    }
    let m = stars.len();
    let height: Vec<usize> = stars
        .iter()
        .map(|s| heights.get(&s.center).copied().ok_or_else(|| Error::InvalidTopology(format!("no height for star center {}", s.center))))
        .collect::<Result<_>>()?;

    let mut trajectories: BTreeMap<ObjectId, Trajectory> = dataset.trajectories().map(|t| (t.object_id.clone(), t.clone())).collect();
    let mut weights: BTreeMap<ObjectId, u32> = dataset.objects().map(|id| (id.clone(), 1)).collect();
    let mut work: Vec<StarTopology> = stars.to_vec();
    for star in &work {
        for id in std::iter::once(&star.center).chain(&star.neighborhood) {
            if !trajectories.contains_key(id) {
                return Err(Error::UnknownObject(id.clone()));
            }
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (Reverse(height[i]), Reverse(i)));

    let mut processed = vec![false; m];
    let mut pending: Vec<Vec<String>> = vec![Vec::new(); m];
    let mut isms = Vec::with_capacity(m);
    let mut parents = BTreeMap::new();

    for (pos, &k) in order.iter().enumerate() {
        let label = if pos + 1 == m { category.to_string() } else { format!("{category}_sub{}", m - 2 - pos) };
        let star = &work[k];
        let neighbors: Vec<(&Trajectory, u32)> = star.neighborhood.iter().map(|id| (&trajectories[id], weights[id])).collect();
        let (ism, reference) = learn_weighted_ism(&label, &trajectories[&star.center], weights[&star.center], &neighbors)?;
        processed[k] = true;
        for child in pending[k].drain(..) {
            parents.insert(child.clone(), ParentLink { parent: label.clone(), placeholder: ObjectId::placeholder_for(&child) });
        }

        if pos + 1 < m {
            let candidates: Vec<ObjectId> = std::iter::once(&star.center).chain(&star.neighborhood).cloned().collect();
            let (hook, target) = candidates
                .iter()
                .find_map(|hook| {
                    (0..m).filter(|&j| !processed[j] && work[j].contains(hook)).min_by_key(|&j| (height[j], j)).map(|j| (hook.clone(), j))
                })
                .ok_or_else(|| Error::NoAttachmentPoint(label.clone()))?;
            let placeholder = reference.object_id.clone();
            if trajectories.contains_key(&placeholder) {
                return Err(Error::InvalidTree(format!("placeholder {placeholder} clashes with an object")));
            }
            let t = &mut work[target];
            if t.center == hook {
                t.center = placeholder.clone();
            } else {
                for n in t.neighborhood.iter_mut().filter(|n| **n == hook) {
                    *n = placeholder.clone();
                }
            }
            weights.insert(placeholder.clone(), ism.total_weight());
            trajectories.insert(placeholder, reference);
            pending[target].push(label);
        }
        isms.push(ism);
    }
    IsmTree::new(category, category, isms, parents)
}

/// Recognizes every ISM of the tree once, children before parents.
///
/// Results of a non-root ISM with confidence at least
/// `result_keep_threshold` (at most `max_results_per_ism`, best first) are
/// handed to the parent as placeholder states. Returns the results of all
/// ISMs; result tokens are unique within the call.
pub fn evaluate_isms_in_tree(inputs: &[ObjectState], tree: &IsmTree, params: &RecognitionParams) -> Result<Vec<RecognitionResult>> {
    Ok(evaluate_isms_in_tree_with_stats(inputs, tree, params)?.0)
}

pub fn evaluate_isms_in_tree_with_stats(
    inputs: &[ObjectState],
    tree: &IsmTree,
    params: &RecognitionParams,
) -> Result<(Vec<RecognitionResult>, RecognitionStats)> {
    params.validate()?;
    let mut stats = RecognitionStats::default();
    let mut pool: Vec<ObjectState> = inputs.iter().filter(|s| !tree.is_placeholder(&s.id)).cloned().collect();
    let mut all = Vec::new();
    let mut next_token = 0u64;
    for label in tree.evaluation_order() {
        let ism = tree.ism(label).expect("label from tree");
        let (mut results, s) = recognize_single_ism_with_stats(&pool, ism, params);
        stats += s;
        for r in &mut results {
            r.token = ResultToken(next_token);
            next_token += 1;
        }
        if label != tree.root_label() {
            pool.extend(
                results
                    .iter()
                    .filter(|r| reaches(r.confidence, params.result_keep_threshold))
                    .take(params.max_results_per_ism)
                    .map(|r| ObjectState::placeholder(ism.reference_id.clone(), r.reference_pose, r.confidence, r.token)),
            );
        }
        all.extend(results);
    }
    Ok((all, stats))
}

/// A recognized occurrence of a scene category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SceneInstance {
    pub category: String,
    pub pose: Pose,
    pub confidence: f64,
    pub root_result: RecognitionResult,
    /// Results of sub-ISMs reachable through placeholder tokens, parents
    /// before children.
    pub sub_results: Vec<RecognitionResult>,
}

impl SceneInstance {
    /// All results making up the instance, root first.
    pub fn results(&self) -> impl Iterator<Item = &RecognitionResult> {
        std::iter::once(&self.root_result).chain(&self.sub_results)
    }

    /// Real (non-placeholder) objects that took part anywhere in the instance.
    pub fn real_participants(&self) -> BTreeSet<&ObjectId> {
        self.results().flat_map(|r| &r.participants).filter(|p| !p.state.is_placeholder).map(|p| &p.state.id).collect()
    }

    /// Real participant states, deduplicated by identity and pose.
    pub fn real_states(&self) -> Vec<&ObjectState> {
        let mut out: Vec<&ObjectState> = Vec::new();
        for p in self.results().flat_map(|r| &r.participants) {
            if !p.state.is_placeholder && !out.iter().any(|s| s.id == p.state.id && s.pose == p.state.pose) {
                out.push(&p.state);
            }
        }
        out
    }
}

/// One instance per root result with confidence at least `assembly_threshold`,
/// together with the sub-results its placeholders were made from.
pub fn assemble_instances(results: &[RecognitionResult], tree: &IsmTree, assembly_threshold: f64) -> Vec<SceneInstance> {
    let by_token: HashMap<ResultToken, &RecognitionResult> = results.iter().map(|r| (r.token, r)).collect();
    results
        .iter()
        .filter(|r| r.ism_label == tree.root_label() && reaches(r.confidence, assembly_threshold))
        .map(|root| {
            let mut subs = Vec::new();
            collect_sub_results(root, &by_token, &mut subs);
            SceneInstance {
                category: tree.category().to_string(),
                pose: root.reference_pose,
                confidence: root.confidence,
                root_result: root.clone(),
                sub_results: subs,
            }
        })
        .collect()
}

fn collect_sub_results(parent: &RecognitionResult, by_token: &HashMap<ResultToken, &RecognitionResult>, out: &mut Vec<RecognitionResult>) {
    for p in &parent.participants {
        if let Some(sub) = p.state.source.and_then(|t| by_token.get(&t)) {
            out.push((*sub).clone());
            collect_sub_results(sub, by_token, out);
        }
    }
}

/// Evaluation followed by assembly.
pub fn recognize_scene(inputs: &[ObjectState], tree: &IsmTree, params: &RecognitionParams) -> Result<Vec<SceneInstance>> {
    let results = evaluate_isms_in_tree(inputs, tree, params)?;
    Ok(assemble_instances(&results, tree, params.assembly_threshold))
}

/// Best instance confidence, 0 when nothing is recognized.
pub fn best_confidence(instances: &[SceneInstance]) -> f64 {
    instances.iter().map(|i| i.confidence).fold(0.0, f64::max)
}
