//! Transformations between MLSA instances/solutions and hereditary set
//! packing instances/solutions, the size-bounding split, and the end-to-end
//! solver pipeline.

use thiserror::Error;

use crate::digraph::{count_leaves, verify_arborescence, Arborescence, Digraph};
use crate::local_search::{self, SearchError, SearchOptions, SearchStats};
use crate::packing::{family_from_sets, ElemSet, Packing, SetFamily};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("packed set {0:?} fits no out-neighborhood of the graph")]
    InfeasiblePacking(ElemSet),
    #[error("solutions overlap on element {0}")]
    OverlapDetected(usize),
}

/// The hereditary family over `V(g)` whose maximal sets are the maximal
/// out-neighborhoods of `g`. The root never occurs as an element: in a valid
/// rooted DAG it has no entering arc.
pub fn family_from_dag(g: &Digraph) -> SetFamily {
    let sets: Vec<ElemSet> = (0..g.n())
        .map(|v| g.out_neighbors(v).iter().copied().collect::<ElemSet>())
        .filter(|s| !s.is_empty())
        .collect();
    family_from_sets(g.n(), sets).expect("out-neighborhoods are within the vertex range")
}

/// The packing formed by the out-neighborhoods of the non-leaves of `t`,
/// with weight-0 singletons dropped. Its weight equals `leaves(t) - 1`.
pub fn arborescence_to_packing(g: &Digraph, t: &Arborescence) -> Packing {
    let mut children = vec![Vec::new(); g.n()];
    for v in 0..g.n() {
        if let Some(u) = t.parent(v) {
            children[u].push(v);
        }
    }
    let sets: Vec<ElemSet> = children
        .into_iter()
        .map(ElemSet::new)
        .filter(|s| s.len() >= 2)
        .collect();
    let p = Packing::from_sets(g.n(), sets).expect("tree children are disjoint");
    debug_assert_eq!(p.weight() + 1, count_leaves(t));
    p
}

/// Builds a spanning arborescence from a feasible packing of
/// [`family_from_dag`]: each packed set hangs off the smallest vertex whose
/// out-neighborhood covers it, and every uncovered non-root vertex takes its
/// smallest in-neighbor. The result has at least `1 + weight(a)` leaves.
pub fn packing_to_arborescence(g: &Digraph, a: &Packing) -> Result<Arborescence, ReductionError> {
    let mut parent: Vec<Option<usize>> = vec![None; g.n()];
    let mut covered = vec![false; g.n()];
    for s in a.sets() {
        let anchor = (0..g.n())
            .find(|&v| s.iter().all(|w| g.has_arc(v, w)))
            .ok_or_else(|| ReductionError::InfeasiblePacking(s.clone()))?;
        for w in s.iter() {
            parent[w] = Some(anchor);
            covered[w] = true;
        }
    }
    for v in 0..g.n() {
        if v != g.root() && !covered[v] {
            parent[v] = Some(g.in_neighbors(v)[0]);
        }
    }
    let t = Arborescence::from_parents(parent)
        .map_err(|_| ReductionError::InfeasiblePacking(ElemSet::new(vec![g.root()])))?;
    debug_assert_eq!(verify_arborescence(g, &t), Ok(()));
    debug_assert!(count_leaves(&t) >= 1 + a.weight());
    Ok(t)
}

/// Result of peeling sets larger than `k` out of a family.
#[derive(Clone, Debug)]
pub struct SplitOutcome {
    /// Greedy maximal packing of sets of size at least `k + 1`.
    pub taken: Packing,
    /// The family restricted to the uncovered elements; every maximal set
    /// has size at most `k`.
    pub residual: SetFamily,
    /// Union of the taken sets, sorted.
    pub covered: Vec<usize>,
}

/// Traverses the maximal sets in their stored (canonical) order; whenever at
/// least `k + 1` elements of a set are still uncovered, packs those elements
/// and marks them covered. What remains of every maximal set afterwards has
/// size at most `k`, so the residual family is `k`-bounded. The outcome
/// depends on the traversal order; only maximality matters to callers.
pub fn split_by_size(f: &SetFamily, k: usize) -> SplitOutcome {
    assert!(k >= 1);
    let mut covered_mask = ElemSet::default();
    let mut taken = Packing::empty(f.ground_size());
    let mut covered: Vec<usize> = Vec::new();
    for s in f.maximal_sets() {
        let rest = s.difference(&covered_mask);
        if rest.len() >= k + 1 {
            covered.extend(rest.iter());
            taken
                .insert(rest)
                .expect("uncovered remainders are disjoint");
            covered_mask = ElemSet::new(covered.clone());
        }
    }
    let residual_sets: Vec<ElemSet> = f
        .maximal_sets()
        .iter()
        .map(|s| s.difference(&covered_mask))
        .filter(|s| !s.is_empty())
        .collect();
    let residual =
        family_from_sets(f.ground_size(), residual_sets).expect("residuals stay in range");
    debug_assert!(residual.k_bound() <= k);
    covered.sort_unstable();
    SplitOutcome {
        taken,
        residual,
        covered,
    }
}

/// Disjoint union of the peeled packing and a packing of the residual.
pub fn combine(m: &Packing, a_resid: &Packing) -> Result<Packing, ReductionError> {
    let mut out = m.clone();
    for s in a_resid.sets() {
        out.insert(s.clone()).map_err(|_| {
            let e = s.iter().find(|&e| m.owner(e).is_some()).unwrap_or(0);
            ReductionError::OverlapDetected(e)
        })?;
    }
    Ok(out)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Pipeline counters reported by [`solve_mlsa`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SolveStats {
    /// Weight packed by the size split.
    pub split_weight: usize,
    /// Weight found by the local search on the residual family.
    pub residual_weight: usize,
    pub search: SearchStats,
}

/// End to end: out-neighborhood family, size split at `k = 3`, local search
/// on the residual, union, lift. The split runs unconditionally; it is a
/// no-op on families that are already 3-bounded.
pub fn solve_mlsa(
    g: &Digraph,
    opts: &SearchOptions,
) -> Result<(Arborescence, SolveStats), SolveError> {
    let family = family_from_dag(g);
    let split = split_by_size(&family, 3);
    let (packed, search) = local_search::run_with(&split.residual, opts)?;
    let combined = combine(&split.taken, &packed)?;
    let tree = packing_to_arborescence(g, &combined)?;
    let stats = SolveStats {
        split_weight: split.taken.weight(),
        residual_weight: packed.weight(),
        search,
    };
    Ok((tree, stats))
}
