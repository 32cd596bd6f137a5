//! Relation topologies and their partitioning into star topologies.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ObjectId;

/// Unordered pair of distinct objects, stored with the smaller id first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation(ObjectId, ObjectId);

impl Relation {
    pub fn new(a: ObjectId, b: ObjectId) -> Result<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Ok(Self(a, b)),
            std::cmp::Ordering::Greater => Ok(Self(b, a)),
            std::cmp::Ordering::Equal => Err(Error::InvalidTopology(format!("self-loop on {a}"))),
        }
    }

    pub fn first(&self) -> &ObjectId {
        &self.0
    }

    pub fn second(&self) -> &ObjectId {
        &self.1
    }

    pub fn touches(&self, id: &ObjectId) -> bool {
        &self.0 == id || &self.1 == id
    }

    /// The endpoint that is not `id`, if `id` is an endpoint.
    pub fn other(&self, id: &ObjectId) -> Option<&ObjectId> {
        if &self.0 == id {
            Some(&self.1)
        } else if &self.1 == id {
            Some(&self.0)
        } else {
            None
        }
    }
}

/// Which object pairs of a scene category are linked by a spatial relation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TopologyDocument", into = "TopologyDocument")]
pub struct RelationTopology {
    objects: BTreeSet<ObjectId>,
    relations: BTreeSet<Relation>,
}

impl RelationTopology {
    pub fn new(objects: impl IntoIterator<Item = ObjectId>, relations: impl IntoIterator<Item = Relation>) -> Result<Self> {
        let objects: BTreeSet<ObjectId> = objects.into_iter().collect();
        let relations: BTreeSet<Relation> = relations.into_iter().collect();
        for r in &relations {
            for end in [r.first(), r.second()] {
                if !objects.contains(end) {
                    return Err(Error::InvalidTopology(format!("relation endpoint {end} is not an object")));
                }
            }
        }
        Ok(Self { objects, relations })
    }

    /// Builds a topology from `(a, b)` pairs; objects are the pair endpoints
    /// plus `extra_objects`.
    pub fn from_pairs(
        pairs: impl IntoIterator<Item = (ObjectId, ObjectId)>,
        extra_objects: impl IntoIterator<Item = ObjectId>,
    ) -> Result<Self> {
        let mut objects: BTreeSet<ObjectId> = extra_objects.into_iter().collect();
        let mut relations = BTreeSet::new();
        for (a, b) in pairs {
            objects.insert(a.clone());
            objects.insert(b.clone());
            relations.insert(Relation::new(a, b)?);
        }
        Ok(Self { objects, relations })
    }

    /// Every object related to `center` only.
    pub fn star(center: &ObjectId, objects: impl IntoIterator<Item = ObjectId>) -> Result<Self> {
        let mut all: BTreeSet<ObjectId> = objects.into_iter().collect();
        all.insert(center.clone());
        let relations = all.iter().filter(|o| *o != center).map(|o| Relation::new(center.clone(), o.clone())).collect::<Result<_>>()?;
        Ok(Self { objects: all, relations })
    }

    /// All `n (n - 1) / 2` relations.
    pub fn complete(objects: impl IntoIterator<Item = ObjectId>) -> Self {
        let objects: BTreeSet<ObjectId> = objects.into_iter().collect();
        let list: Vec<&ObjectId> = objects.iter().collect();
        let mut relations = BTreeSet::new();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                relations.insert(Relation((*a).clone(), (*b).clone()));
            }
        }
        Self { objects, relations }
    }

    pub fn objects(&self) -> &BTreeSet<ObjectId> {
        &self.objects
    }

    pub fn relations(&self) -> &BTreeSet<Relation> {
        &self.relations
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn contains(&self, a: &ObjectId, b: &ObjectId) -> bool {
        Relation::new(a.clone(), b.clone()).is_ok_and(|r| self.relations.contains(&r))
    }

    pub fn degree(&self, id: &ObjectId) -> usize {
        self.relations.iter().filter(|r| r.touches(id)).count()
    }

    /// Copy with `relation` added. The endpoints must be objects of the topology.
    pub fn with_relation(&self, relation: Relation) -> Self {
        let mut next = self.clone();
        next.relations.insert(relation);
        next
    }

    pub fn without_relation(&self, relation: &Relation) -> Self {
        let mut next = self.clone();
        next.relations.remove(relation);
        next
    }

    /// Hop distances from `start`; unreachable objects are absent.
    pub fn bfs_depths(&self, start: &ObjectId) -> BTreeMap<ObjectId, usize> {
        let adjacency = self.adjacency();
        let mut depths = BTreeMap::new();
        if !self.objects.contains(start) {
            return depths;
        }
        depths.insert(start.clone(), 0);
        let mut queue = VecDeque::from([start]);
        while let Some(o) = queue.pop_front() {
            let d = depths[o];
            for n in &adjacency[o] {
                if !depths.contains_key(*n) {
                    depths.insert((*n).clone(), d + 1);
                    queue.push_back(*n);
                }
            }
        }
        depths
    }

    pub fn is_connected(&self) -> bool {
        match self.objects.iter().next() {
            None => false,
            Some(first) => self.bfs_depths(first).len() == self.objects.len(),
        }
    }

    fn adjacency(&self) -> BTreeMap<&ObjectId, BTreeSet<&ObjectId>> {
        let mut adj: BTreeMap<&ObjectId, BTreeSet<&ObjectId>> = self.objects.iter().map(|o| (o, BTreeSet::new())).collect();
        for r in &self.relations {
            adj.get_mut(&r.0).expect("endpoint").insert(&r.1);
            adj.get_mut(&r.1).expect("endpoint").insert(&r.0);
        }
        adj
    }
}

#[derive(Serialize, Deserialize)]
struct TopologyDocument {
    objects: Vec<ObjectId>,
    relations: Vec<(ObjectId, ObjectId)>,
}

impl From<RelationTopology> for TopologyDocument {
    fn from(t: RelationTopology) -> Self {
        Self { objects: t.objects.into_iter().collect(), relations: t.relations.into_iter().map(|r| (r.0, r.1)).collect() }
    }
}

impl TryFrom<TopologyDocument> for RelationTopology {
    type Error = Error;

    fn try_from(doc: TopologyDocument) -> Result<Self> {
        let relations = doc.relations.into_iter().map(|(a, b)| Relation::new(a, b)).collect::<Result<Vec<_>>>()?;
        RelationTopology::new(doc.objects, relations)
    }
}

/// One center object related to every member of its neighborhood.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarTopology {
    pub center: ObjectId,
    pub neighborhood: Vec<ObjectId>,
}

impl StarTopology {
    pub fn new(center: ObjectId, neighborhood: Vec<ObjectId>) -> Result<Self> {
        if neighborhood.is_empty() {
            return Err(Error::InvalidTopology(format!("star around {center} has no neighbors")));
        }
        if neighborhood.contains(&center) {
            return Err(Error::InvalidTopology(format!("star center {center} is its own neighbor")));
        }
        Ok(Self { center, neighborhood })
    }

    pub fn contains(&self, id: &ObjectId) -> bool {
        &self.center == id || self.neighborhood.contains(id)
    }

    pub fn relations(&self) -> impl Iterator<Item = Relation> + '_ {
        self.neighborhood.iter().map(|n| Relation::new(self.center.clone(), n.clone()).expect("center is not a neighbor"))
    }
}

/// Breadth-first depth of every object from the first star center.
pub type HeightFunction = BTreeMap<ObjectId, usize>;

/// Splits a connected topology into stars by a depth-first search that
/// always turns the object with the most unassigned relations into the next
/// center, searching the most recently extracted star's neighborhood first.
///
/// Degree ties go to the smallest object id. Heights are hop distances from
/// the first center.
pub fn partition_into_stars(topology: &RelationTopology) -> Result<(Vec<StarTopology>, HeightFunction)> {
    if topology.objects().len() < 2 || topology.relations().is_empty() {
        return Err(Error::InvalidTopology("need at least two related objects".into()));
    }
    if !topology.is_connected() {
        return Err(Error::DisconnectedTopology);
    }

    let mut remaining: BTreeSet<Relation> = topology.relations().clone();
    let degree = |id: &ObjectId, rem: &BTreeSet<Relation>| rem.iter().filter(|r| r.touches(id)).count();
    let pick = |pool: &mut dyn Iterator<Item = &ObjectId>, rem: &BTreeSet<Relation>| -> Option<ObjectId> {
        let mut best: Option<(usize, &ObjectId)> = None;
        for id in pool {
            let d = degree(id, rem);
            if d == 0 {
                continue;
            }
            // Strictly greater keeps the smallest id on ties; pools are sorted.
            if best.is_none_or(|(bd, bid)| d > bd || (d == bd && id < bid)) {
                best = Some((d, id));
            }
        }
        best.map(|(_, id)| id.clone())
    };

    let first = pick(&mut topology.objects().iter(), &remaining).expect("relations exist");
    let heights = topology.bfs_depths(&first);

    let mut stars: Vec<StarTopology> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut next = Some(first);
    while let Some(center) = next.take() {
        let neighborhood: Vec<ObjectId> =
            remaining.iter().filter_map(|r| r.other(&center).cloned()).collect::<BTreeSet<_>>().into_iter().collect();
        remaining.retain(|r| !r.touches(&center));
        stars.push(StarTopology::new(center, neighborhood)?);
        stack.push(stars.len() - 1);
        if remaining.is_empty() {
            break;
        }
        while let Some(&top) = stack.last() {
            if let Some(c) = pick(&mut stars[top].neighborhood.iter(), &remaining) {
                next = Some(c);
                break;
            }
            stack.pop();
        }
        if next.is_none() {
            // Unreachable for connected input: every relation touches an
            // object already covered by some star.
            return Err(Error::DisconnectedTopology);
        }
    }
    Ok((stars, heights))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ObjectId {
        ObjectId::named(s)
    }

    fn pairs(list: &[(&str, &str)]) -> RelationTopology {
        RelationTopology::from_pairs(list.iter().map(|(a, b)| (id(a), id(b))), []).unwrap()
    }

    #[test]
    fn single_relation_gives_single_star() {
        let (stars, h) = partition_into_stars(&pairs(&[("B", "A")])).unwrap();
        assert_eq!(stars, vec![StarTopology::new(id("A"), vec![id("B")]).unwrap()]);
        assert_eq!(h[&id("A")], 0);
        assert_eq!(h[&id("B")], 1);
    }

    #[test]
    fn complete_triangle_gives_two_stars() {
        let (stars, h) = partition_into_stars(&RelationTopology::complete([id("A"), id("B"), id("C")])).unwrap();
        assert_eq!(stars.len(), 2);
        assert_eq!(stars[0].center, id("A"));
        assert_eq!(stars[0].neighborhood, vec![id("B"), id("C")]);
        assert_eq!(stars[1].center, id("B"));
        assert_eq!(stars[1].neighborhood, vec![id("C")]);
        assert_eq!(h.values().copied().collect::<Vec<_>>(), vec![0, 1, 1]);
    }

    #[test]
    fn star_input_is_returned_unchanged() {
        let t = RelationTopology::star(&id("P"), ["A", "B", "C", "D"].map(id)).unwrap();
        let (stars, _) = partition_into_stars(&t).unwrap();
        assert_eq!(stars.len(), 1);
        assert_eq!(stars[0].center, id("P"));
        assert_eq!(stars[0].neighborhood.len(), 4);
    }

    #[test]
    fn disconnected_topology_is_rejected() {
        let t = pairs(&[("A", "B"), ("C", "D")]);
        assert!(matches!(partition_into_stars(&t), Err(Error::DisconnectedTopology)));
        let lonely = RelationTopology::from_pairs([(id("A"), id("B"))], [id("C")]).unwrap();
        assert!(matches!(partition_into_stars(&lonely), Err(Error::DisconnectedTopology)));
    }

    #[test]
    fn self_loops_are_rejected() {
        assert!(Relation::new(id("A"), id("A")).is_err());
    }

    #[test]
    fn relations_are_partitioned_exactly() {
        let t = pairs(&[("A", "B"), ("B", "C"), ("C", "D"), ("D", "A"), ("A", "C"), ("D", "E"), ("E", "F")]);
        let (stars, _) = partition_into_stars(&t).unwrap();
        let mut seen = BTreeSet::new();
        for s in &stars {
            for r in s.relations() {
                assert!(seen.insert(r), "relation covered twice");
            }
        }
        assert_eq!(&seen, t.relations());
    }
}
