//! Hereditary set families, packings, neighborhoods, and the conflict
//! graph used by the analysis-style tests.
//!
//! A hereditary family is stored through its inclusion-wise maximal sets
//! only; the closure under nonempty subsets is implicit. Weights are always
//! `|s| - 1`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A set of ground elements, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ElemSet(Vec<usize>);

impl ElemSet {
    pub fn new(mut elems: Vec<usize>) -> Self {
        elems.sort_unstable();
        elems.dedup();
        ElemSet(elems)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|s| - 1`, the packing objective contribution of this set.
    pub fn weight(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn contains(&self, e: usize) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max_element(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Subset test on the sorted representations.
    pub fn is_subset_of(&self, other: &ElemSet) -> bool {
        let mut it = other.0.iter();
        'outer: for &e in &self.0 {
            for &o in it.by_ref() {
                if o == e {
                    continue 'outer;
                }
                if o > e {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn intersects(&self, other: &ElemSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    pub fn intersection_size(&self, other: &ElemSet) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn difference(&self, other: &ElemSet) -> ElemSet {
        ElemSet(
            self.0
                .iter()
                .copied()
                .filter(|e| !other.contains(*e))
                .collect(),
        )
    }
}

impl FromIterator<usize> for ElemSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ElemSet::new(iter.into_iter().collect())
    }
}

/// Machine-word bitset over the ground elements; the improvement search is
/// intersection-dominated and lives on these.
#[derive(Clone, Debug)]
pub(crate) struct Mask {
    words: Vec<u64>,
}

impl Mask {
    pub fn new(n: usize) -> Self {
        Mask {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn clear(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn clear_all(&mut self, s: &ElemSet) {
        for e in s.iter() {
            self.clear(e);
        }
    }

    pub fn any_of(&self, s: &ElemSet) -> bool {
        s.iter().any(|e| self.get(e))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("element {element} out of range for ground size {ground_size}")]
    ElementOutOfRange { element: usize, ground_size: usize },
    #[error("empty set not allowed in a family")]
    EmptySet,
}

/// A hereditary set family over ground elements `0..ground_size`, stored by
/// its inclusion-wise maximal sets. The maximal sets are kept in a canonical
/// (lexicographic) order, so anything that traverses them is deterministic
/// regardless of how the family was assembled. Immutable and shareable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFamily {
    ground_size: usize,
    maximal_sets: Vec<ElemSet>,
    k_bound: usize,
    // element -> indices of maximal sets containing it
    by_element: Vec<Vec<usize>>,
}

/// Keeps the inclusion-wise maximal members of `raw_sets` (duplicates
/// removed) as the family representation.
pub fn family_from_sets(
    ground_size: usize,
    raw_sets: Vec<ElemSet>,
) -> Result<SetFamily, FamilyError> {
    for s in &raw_sets {
        if s.is_empty() {
            return Err(FamilyError::EmptySet);
        }
        if let Some(e) = s.max_element() {
            if e >= ground_size {
                return Err(FamilyError::ElementOutOfRange {
                    element: e,
                    ground_size,
                });
            }
        }
    }
    // Decreasing cardinality, then lexicographic for determinism. A set can
    // only be contained in an earlier (larger or equal) one, so one pass with
    // an inverted index over the kept sets suffices.
    let mut order: Vec<usize> = (0..raw_sets.len()).collect();
    order.sort_by(|&a, &b| {
        raw_sets[b]
            .len()
            .cmp(&raw_sets[a].len())
            .then_with(|| raw_sets[a].cmp(&raw_sets[b]))
    });
    let mut kept: Vec<ElemSet> = Vec::new();
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); ground_size];
    'sets: for idx in order {
        let s = &raw_sets[idx];
        let first = s.as_slice()[0];
        for &k in &by_element[first] {
            if s.is_subset_of(&kept[k]) {
                continue 'sets;
            }
        }
        let k = kept.len();
        for e in s.iter() {
            by_element[e].push(k);
        }
        kept.push(s.clone());
    }
    // canonical order for the representation itself
    let mut perm: Vec<usize> = (0..kept.len()).collect();
    perm.sort_by(|&a, &b| kept[a].cmp(&kept[b]));
    let maximal_sets: Vec<ElemSet> = perm.iter().map(|&i| kept[i].clone()).collect();
    let mut by_element: Vec<Vec<usize>> = vec![Vec::new(); ground_size];
    for (i, s) in maximal_sets.iter().enumerate() {
        for e in s.iter() {
            by_element[e].push(i);
        }
    }
    let k_bound = maximal_sets.iter().map(|s| s.len()).max().unwrap_or(0);
    Ok(SetFamily {
        ground_size,
        maximal_sets,
        k_bound,
        by_element,
    })
}

impl SetFamily {
    pub fn empty(ground_size: usize) -> Self {
        SetFamily {
            ground_size,
            maximal_sets: Vec::new(),
            k_bound: 0,
            by_element: vec![Vec::new(); ground_size],
        }
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn maximal_sets(&self) -> &[ElemSet] {
        &self.maximal_sets
    }

    /// Largest cardinality among the maximal sets.
    pub fn k_bound(&self) -> usize {
        self.k_bound
    }

    pub fn sets_containing(&self, e: usize) -> &[usize] {
        &self.by_element[e]
    }

    /// Hereditary membership: true iff `s` is nonempty and lies inside some
    /// maximal set.
    pub fn contains(&self, s: &ElemSet) -> bool {
        if s.is_empty() {
            return false;
        }
        let first = s.as_slice()[0];
        if first >= self.ground_size {
            return false;
        }
        self.by_element[first]
            .iter()
            .any(|&i| s.is_subset_of(&self.maximal_sets[i]))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PackingError {
    #[error("element {element} out of range for ground size {ground_size}")]
    ElementOutOfRange { element: usize, ground_size: usize },
    #[error("weight-0 set not allowed in a packing")]
    WeightZeroSet,
    #[error("element {0} already covered")]
    Overlap(usize),
    #[error("set {0:?} not a member of the family")]
    NotInFamily(ElemSet),
    #[error("stored weight {stored} does not match recomputed weight {actual}")]
    WeightMismatch { stored: usize, actual: usize },
}

/// A disjoint collection of sets of size >= 2, with the owner map and the
/// objective caches maintained on every mutation. Single-writer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packing {
    ground_size: usize,
    sets: Vec<ElemSet>,
    owner: Vec<Option<usize>>,
    weight: usize,
    two_count: usize,
}

impl Packing {
    pub fn empty(ground_size: usize) -> Self {
        Packing {
            ground_size,
            sets: Vec::new(),
            owner: vec![None; ground_size],
            weight: 0,
            two_count: 0,
        }
    }

    pub fn from_sets(ground_size: usize, sets: Vec<ElemSet>) -> Result<Self, PackingError> {
        let mut p = Packing::empty(ground_size);
        for s in sets {
            p.insert(s)?;
        }
        Ok(p)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn sets(&self) -> &[ElemSet] {
        &self.sets
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Total weight, `sum(|s| - 1)`.
    pub fn weight(&self) -> usize {
        self.weight
    }

    /// Number of packed sets of weight 2 (cardinality 3).
    pub fn two_count(&self) -> usize {
        self.two_count
    }

    /// Index of the packed set covering `e`, if any.
    pub fn owner(&self, e: usize) -> Option<usize> {
        self.owner[e]
    }

    pub fn insert(&mut self, s: ElemSet) -> Result<usize, PackingError> {
        if s.weight() == 0 {
            return Err(PackingError::WeightZeroSet);
        }
        if let Some(e) = s.max_element() {
            if e >= self.ground_size {
                return Err(PackingError::ElementOutOfRange {
                    element: e,
                    ground_size: self.ground_size,
                });
            }
        }
        if let Some(e) = s.iter().find(|&e| self.owner[e].is_some()) {
            return Err(PackingError::Overlap(e));
        }
        let idx = self.sets.len();
        for e in s.iter() {
            self.owner[e] = Some(idx);
        }
        self.weight += s.weight();
        if s.len() == 3 {
            self.two_count += 1;
        }
        self.sets.push(s);
        Ok(idx)
    }

    /// Removes the set at `idx` (swap-remove; the last set takes its index).
    pub fn remove(&mut self, idx: usize) -> ElemSet {
        let s = self.sets.swap_remove(idx);
        for e in s.iter() {
            self.owner[e] = None;
        }
        self.weight -= s.weight();
        if s.len() == 3 {
            self.two_count -= 1;
        }
        if idx < self.sets.len() {
            for e in self.sets[idx].iter() {
                self.owner[e] = Some(idx);
            }
        }
        s
    }

    /// Checks that every packed set is a member of `f`.
    pub fn feasible_for(&self, f: &SetFamily) -> Result<(), PackingError> {
        for s in &self.sets {
            if !f.contains(s) {
                return Err(PackingError::NotInFamily(s.clone()));
            }
        }
        Ok(())
    }

    /// Recomputes the caches from scratch and compares; used by tests after
    /// mutation sequences.
    pub fn caches_consistent(&self) -> bool {
        let weight: usize = self.sets.iter().map(|s| s.weight()).sum();
        let two_count = self.sets.iter().filter(|s| s.len() == 3).count();
        let mut owner = vec![None; self.ground_size];
        for (i, s) in self.sets.iter().enumerate() {
            for e in s.iter() {
                if owner[e].is_some() {
                    return false;
                }
                owner[e] = Some(i);
            }
        }
        weight == self.weight && two_count == self.two_count && owner == self.owner
    }
}

/// `N(X, A)`: indices of the packed sets of `a` that intersect the union of
/// `x`. Computed through the owner map in time linear in `sum |x|`.
pub fn neighborhood(x: &[ElemSet], a: &Packing) -> Vec<usize> {
    let mut hit: Vec<usize> = x
        .iter()
        .flat_map(|s| s.iter())
        .filter_map(|e| a.owner(e))
        .collect();
    hit.sort_unstable();
    hit.dedup();
    hit
}

/// Bipartite multigraph between two packings: `|a_i ∩ b_j|` parallel edges
/// for each pair. A test fixture for the charging-style checks.
#[derive(Clone, Debug)]
pub struct ConflictGraph {
    pub a_side: Packing,
    pub b_side: Packing,
    /// `(a_index, b_index)`, repeated with multiplicity.
    pub edges: Vec<(usize, usize)>,
}

pub fn build_conflict_graph(a: &Packing, b: &Packing) -> ConflictGraph {
    let mut edges = Vec::new();
    for (j, bs) in b.sets().iter().enumerate() {
        for e in bs.iter() {
            if let Some(i) = a.owner(e) {
                edges.push((i, j));
            }
        }
    }
    edges.sort_unstable();
    ConflictGraph {
        a_side: a.clone(),
        b_side: b.clone(),
        edges,
    }
}

impl ConflictGraph {
    pub fn a_degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(x, _)| x == i).count()
    }

    pub fn b_degree(&self, j: usize) -> usize {
        self.edges.iter().filter(|&&(_, y)| y == j).count()
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    ground_size: usize,
    maximal_sets: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct PackingJson {
    sets: Vec<Vec<usize>>,
    weight: usize,
}

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Packing(#[from] PackingError),
}

pub fn family_to_json(f: &SetFamily) -> String {
    let dto = FamilyJson {
        ground_size: f.ground_size(),
        maximal_sets: f
            .maximal_sets()
            .iter()
            .map(|s| s.as_slice().to_vec())
            .collect(),
    };
    serde_json::to_string_pretty(&dto).unwrap()
}

pub fn family_from_json(text: &str) -> Result<SetFamily, JsonError> {
    let dto: FamilyJson = serde_json::from_str(text)?;
    let sets = dto.maximal_sets.into_iter().map(ElemSet::new).collect();
    Ok(family_from_sets(dto.ground_size, sets)?)
}

pub fn packing_to_json(p: &Packing) -> String {
    let dto = PackingJson {
        sets: p.sets().iter().map(|s| s.as_slice().to_vec()).collect(),
        weight: p.weight(),
    };
    serde_json::to_string_pretty(&dto).unwrap()
}

/// Loads a packing over a ground set of the given size; the stored weight is
/// recomputed and checked.
pub fn packing_from_json(text: &str, ground_size: usize) -> Result<Packing, JsonError> {
    let dto: PackingJson = serde_json::from_str(text)?;
    let p = Packing::from_sets(
        ground_size,
        dto.sets.into_iter().map(ElemSet::new).collect(),
    )?;
    if p.weight() != dto.weight {
        return Err(JsonError::Packing(PackingError::WeightMismatch {
            stored: dto.weight,
            actual: p.weight(),
        }));
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn es(elems: &[usize]) -> ElemSet {
        ElemSet::new(elems.to_vec())
    }

    fn sets(raw: &[&[usize]]) -> Vec<ElemSet> {
        raw.iter().map(|s| es(s)).collect()
    }

    #[test]
    fn family_absorbs_subsets() {
        let f = family_from_sets(4, sets(&[&[0, 1], &[0, 1, 2], &[3]])).unwrap();
        assert_eq!(f.maximal_sets(), &[es(&[0, 1, 2]), es(&[3])]);
        assert_eq!(f.k_bound(), 3);
    }

    #[test]
    fn family_keeps_incomparable_sets() {
        let f = family_from_sets(2, sets(&[&[0], &[1]])).unwrap();
        assert_eq!(f.maximal_sets(), &[es(&[0]), es(&[1])]);
    }

    #[test]
    fn family_dedups() {
        let f = family_from_sets(3, sets(&[&[0, 1], &[1, 0], &[2]])).unwrap();
        assert_eq!(f.maximal_sets(), &[es(&[0, 1]), es(&[2])]);
    }

    #[test]
    fn family_broadcast_tree_graph_out_neighborhoods() {
        // out-neighborhoods of the 12-vertex tree arcs
        let raw = sets(&[&[1, 2], &[3, 4, 5], &[6, 7], &[8, 9], &[10], &[11]]);
        let f = family_from_sets(12, raw).unwrap();
        assert_eq!(f.maximal_sets().len(), 6);
    }

    #[test]
    fn family_rejects_out_of_range() {
        assert_eq!(
            family_from_sets(2, sets(&[&[0, 5]])),
            Err(FamilyError::ElementOutOfRange {
                element: 5,
                ground_size: 2
            })
        );
        assert_eq!(
            family_from_sets(2, sets(&[&[]])),
            Err(FamilyError::EmptySet)
        );
    }

    #[test]
    fn contains_is_hereditary() {
        let f = family_from_sets(4, sets(&[&[0, 1, 2]])).unwrap();
        assert!(f.contains(&es(&[0, 2])));
        assert!(!f.contains(&es(&[0, 3])));
        let f = family_from_sets(3, sets(&[&[0, 1], &[1, 2]])).unwrap();
        assert!(!f.contains(&es(&[0, 2])));
        assert!(!f.contains(&es(&[])));
    }

    #[test]
    fn neighborhood_examples() {
        let a = Packing::from_sets(6, sets(&[&[0, 1], &[2, 3]])).unwrap();
        assert_eq!(neighborhood(&[], &a), Vec::<usize>::new());
        assert_eq!(neighborhood(&sets(&[&[1, 2]]), &a), vec![0, 1]);
        assert_eq!(neighborhood(&sets(&[&[4, 5]]), &a), Vec::<usize>::new());
    }

    #[test]
    fn conflict_graph_parallel_edges() {
        let a = Packing::from_sets(4, sets(&[&[0, 1, 2]])).unwrap();
        let b = Packing::from_sets(4, sets(&[&[0, 1], &[2, 3]])).unwrap();
        let cg = build_conflict_graph(&a, &b);
        assert_eq!(cg.edges, vec![(0, 0), (0, 0), (0, 1)]);

        let empty = Packing::empty(0);
        assert!(build_conflict_graph(&empty, &empty).edges.is_empty());

        let a = Packing::from_sets(4, sets(&[&[0, 1]])).unwrap();
        let b = Packing::from_sets(4, sets(&[&[2, 3]])).unwrap();
        assert!(build_conflict_graph(&a, &b).edges.is_empty());
    }

    #[test]
    fn conflict_graph_degree_bounded_by_cardinality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let ground = rng.gen_range(4..20);
            let a = random_packing(ground, &mut rng);
            let b = random_packing(ground, &mut rng);
            let cg = build_conflict_graph(&a, &b);
            for (i, s) in a.sets().iter().enumerate() {
                assert!(cg.a_degree(i) <= s.len());
            }
            for (j, s) in b.sets().iter().enumerate() {
                assert!(cg.b_degree(j) <= s.len());
            }
        }
    }

    fn random_packing(ground: usize, rng: &mut impl Rng) -> Packing {
        let mut p = Packing::empty(ground);
        let mut elems: Vec<usize> = (0..ground).collect();
        elems.shuffle(rng);
        let mut it = elems.into_iter();
        while let (Some(a), Some(b)) = (it.next(), it.next()) {
            if rng.gen_bool(0.3) {
                continue;
            }
            let mut set = vec![a, b];
            if rng.gen_bool(0.5) {
                if let Some(c) = it.next() {
                    set.push(c);
                }
            }
            p.insert(ElemSet::new(set)).unwrap();
        }
        p
    }

    #[test]
    fn packing_rejects_bad_sets() {
        let mut p = Packing::empty(4);
        assert_eq!(p.insert(es(&[0])), Err(PackingError::WeightZeroSet));
        p.insert(es(&[0, 1])).unwrap();
        assert_eq!(p.insert(es(&[1, 2])), Err(PackingError::Overlap(1)));
        assert_eq!(
            p.insert(es(&[2, 9])),
            Err(PackingError::ElementOutOfRange {
                element: 9,
                ground_size: 4
            })
        );
    }

    #[test]
    fn packing_caches_survive_mutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let ground = rng.gen_range(6..24);
            let mut p = random_packing(ground, &mut rng);
            for _ in 0..20 {
                if !p.is_empty() && rng.gen_bool(0.5) {
                    let idx = rng.gen_range(0..p.len());
                    p.remove(idx);
                } else {
                    let a = rng.gen_range(0..ground);
                    let b = rng.gen_range(0..ground);
                    let _ = p.insert(ElemSet::new(vec![a, b]));
                }
                assert!(p.caches_consistent());
            }
        }
    }

    #[test]
    fn feasibility_against_family() {
        let f = family_from_sets(5, sets(&[&[0, 1, 2], &[3, 4]])).unwrap();
        let p = Packing::from_sets(5, sets(&[&[0, 1], &[3, 4]])).unwrap();
        assert_eq!(p.feasible_for(&f), Ok(()));
        let q = Packing::from_sets(5, sets(&[&[2, 3]])).unwrap();
        assert!(matches!(
            q.feasible_for(&f),
            Err(PackingError::NotInFamily(_))
        ));
    }

    #[test]
    fn json_round_trips() {
        let f = family_from_sets(5, sets(&[&[0, 1, 2], &[3, 4]])).unwrap();
        let f2 = family_from_json(&family_to_json(&f)).unwrap();
        assert_eq!(f, f2);

        let p = Packing::from_sets(5, sets(&[&[0, 1], &[2, 3, 4]])).unwrap();
        let p2 = packing_from_json(&packing_to_json(&p), 5).unwrap();
        assert_eq!(p.sets(), p2.sets());
        assert_eq!(p2.weight(), 3);

        let tampered = r#"{"sets": [[0,1]], "weight": 7}"#;
        assert!(matches!(
            packing_from_json(tampered, 5),
            Err(JsonError::Packing(PackingError::WeightMismatch { .. }))
        ));
    }
}
