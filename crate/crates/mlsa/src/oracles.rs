//! Independent exact solvers and exhaustive checkers, used as ground truth
//! by the test suites. These deliberately share no algorithmic code with the
//! solver pipeline, only the data types.

use thiserror::Error;

use crate::digraph::{Arborescence, Digraph};
use crate::local_search::Improvement;
use crate::packing::{ElemSet, Packing, SetFamily};

pub const DEFAULT_MLSA_BUDGET: usize = 14;
pub const DEFAULT_PACKING_BUDGET: usize = 10_000;
pub const DEFAULT_CHECK_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance size {size} exceeds oracle budget {budget}")]
    BudgetExceeded { size: usize, budget: usize },
}

/// Exact maximum leaf count over all spanning arborescences, found by
/// assigning each non-root vertex a parent depth-first. The admissible bound
/// for pruning is the number of vertices that are still childless.
pub fn exact_mlsa(g: &Digraph, budget: usize) -> Result<(usize, Arborescence), OracleError> {
    if g.n() > budget {
        return Err(OracleError::BudgetExceeded {
            size: g.n(),
            budget,
        });
    }
    // most constrained vertex first
    let mut order: Vec<usize> = (0..g.n()).filter(|&v| v != g.root()).collect();
    order.sort_by_key(|&v| (g.in_neighbors(v).len(), v));

    let mut child_count = vec![0usize; g.n()];
    let mut parent: Vec<Option<usize>> = vec![None; g.n()];

    // Greedy seed: reuse parents that already have a child. Only sharpens
    // pruning; the search below is still exhaustive.
    let mut best_parent = parent.clone();
    let mut non_leaf = 0usize;
    for &v in &order {
        let u = *g
            .in_neighbors(v)
            .iter()
            .max_by_key(|&&u| {
                (
                    child_count[u] > 0,
                    g.out_neighbors(u).len(),
                    std::cmp::Reverse(u),
                )
            })
            .expect("valid instances have an in-neighbor for every non-root vertex");
        if child_count[u] == 0 {
            non_leaf += 1;
        }
        child_count[u] += 1;
        best_parent[v] = Some(u);
    }
    let best = g.n() - non_leaf;
    child_count.iter_mut().for_each(|c| *c = 0);

    struct Search<'a> {
        g: &'a Digraph,
        order: Vec<usize>,
        best: usize,
        best_parent: Vec<Option<usize>>,
    }

    impl Search<'_> {
        fn dfs(
            &mut self,
            depth: usize,
            parent: &mut Vec<Option<usize>>,
            child_count: &mut Vec<usize>,
            non_leaf: usize,
        ) {
            let ub = self.g.n() - non_leaf;
            if depth == self.order.len() {
                if ub > self.best {
                    self.best = ub;
                    self.best_parent = parent.clone();
                }
                return;
            }
            if ub <= self.best {
                return;
            }
            let v = self.order[depth];
            for &u in self.g.in_neighbors(v) {
                parent[v] = Some(u);
                child_count[u] += 1;
                let nl = non_leaf + usize::from(child_count[u] == 1);
                self.dfs(depth + 1, parent, child_count, nl);
                child_count[u] -= 1;
                parent[v] = None;
            }
        }
    }

    let mut search = Search {
        g,
        order,
        best,
        best_parent,
    };
    search.dfs(0, &mut parent, &mut child_count, 0);
    let best = search.best;
    let witness = Arborescence::from_parents(search.best_parent).expect("witness has one root");
    debug_assert_eq!(crate::digraph::count_leaves(&witness), best);
    Ok((best, witness))
}

/// Materializes every member of the implicit hereditary closure with weight
/// at least 1 (all subsets of size >= 2 of the maximal sets), deduplicated
/// and in a deterministic order. Fails once more than `cap` candidates
/// exist.
fn materialize_weighted_members(f: &SetFamily, cap: usize) -> Result<Vec<ElemSet>, OracleError> {
    let mut seen = std::collections::BTreeSet::new();
    for m in f.maximal_sets() {
        let elems = m.as_slice();
        let len = elems.len();
        if len < 2 {
            continue;
        }
        if len >= usize::BITS as usize - 1 {
            return Err(OracleError::BudgetExceeded {
                size: usize::MAX,
                budget: cap,
            });
        }
        for mask in 1usize..(1 << len) {
            if mask.count_ones() < 2 {
                continue;
            }
            let subset: ElemSet = elems
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &e)| e)
                .collect();
            seen.insert(subset);
            if seen.len() > cap {
                return Err(OracleError::BudgetExceeded {
                    size: seen.len(),
                    budget: cap,
                });
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Exact maximum-weight disjoint sub-collection, by branch and bound over
/// the materialized candidates: branch on the element hit by the most
/// remaining candidates, either packing one of its candidates or leaving
/// the element uncovered.
pub fn exact_packing(f: &SetFamily, budget: usize) -> Result<(usize, Packing), OracleError> {
    let cands = materialize_weighted_members(f, budget)?;

    struct Bb<'a> {
        cands: &'a [ElemSet],
        ground: usize,
        best_w: usize,
        best: Vec<usize>,
    }

    impl Bb<'_> {
        fn upper_bound(&self, alive: &[usize]) -> usize {
            let mut covered = vec![false; self.ground];
            let mut k = 0;
            for &c in alive {
                k = k.max(self.cands[c].len());
                for e in self.cands[c].iter() {
                    covered[e] = true;
                }
            }
            if k == 0 {
                return 0;
            }
            let free = covered.iter().filter(|&&b| b).count();
            (k - 1) * free / k
        }

        fn search(&mut self, alive: Vec<usize>, chosen: &mut Vec<usize>, cur_w: usize) {
            if cur_w > self.best_w {
                self.best_w = cur_w;
                self.best = chosen.clone();
            }
            if alive.is_empty() || cur_w + self.upper_bound(&alive) <= self.best_w {
                return;
            }
            // branch element: covered by the most alive candidates
            let mut freq = vec![0usize; self.ground];
            for &c in &alive {
                for e in self.cands[c].iter() {
                    freq[e] += 1;
                }
            }
            let e = (0..self.ground).max_by_key(|&e| freq[e]).unwrap();
            let holders: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&c| self.cands[c].contains(e))
                .collect();
            for &c in &holders {
                let next: Vec<usize> = alive
                    .iter()
                    .copied()
                    .filter(|&d| d != c && !self.cands[d].intersects(&self.cands[c]))
                    .collect();
                chosen.push(c);
                self.search(next, chosen, cur_w + self.cands[c].weight());
                chosen.pop();
            }
            // element e stays uncovered
            let rest: Vec<usize> = alive
                .iter()
                .copied()
                .filter(|&c| !self.cands[c].contains(e))
                .collect();
            self.search(rest, chosen, cur_w);
        }
    }

    let mut bb = Bb {
        cands: &cands,
        ground: f.ground_size(),
        best_w: 0,
        best: Vec::new(),
    };
    let alive: Vec<usize> = (0..cands.len()).collect();
    bb.search(alive, &mut Vec::new(), 0);
    let witness = Packing::from_sets(
        f.ground_size(),
        bb.best.iter().map(|&c| cands[c].clone()).collect(),
    )
    .expect("branch and bound keeps candidates disjoint");
    debug_assert_eq!(witness.weight(), bb.best_w);
    Ok((bb.best_w, witness))
}

/// Exhaustively searches for a local improvement of `a` of size at most `t`
/// by plain enumeration of disjoint candidate combinations. Candidates equal
/// to a packed set are skipped: such a set cannot share elements with the
/// rest of an (internally disjoint) improvement, so dropping it changes
/// neither the weight delta nor the weight-2 delta.
pub fn exhaustive_improvement(
    f: &SetFamily,
    a: &Packing,
    t: usize,
    node_budget: u64,
) -> Result<Option<Improvement>, OracleError> {
    let cap = usize::try_from(node_budget).unwrap_or(usize::MAX);
    let all = materialize_weighted_members(f, cap)?;
    let is_in_a = |s: &ElemSet| -> bool {
        s.iter()
            .next()
            .and_then(|e| a.owner(e))
            .is_some_and(|i| &a.sets()[i] == s)
    };
    let cands: Vec<ElemSet> = all.into_iter().filter(|s| !is_in_a(s)).collect();

    struct Enum<'a> {
        cands: &'a [ElemSet],
        a: &'a Packing,
        t: usize,
        nodes: u64,
        budget: u64,
    }

    enum Outcome {
        Found(Improvement),
        Exhausted,
        OverBudget,
    }

    impl Enum<'_> {
        fn rec(
            &mut self,
            start: usize,
            x: &mut Vec<usize>,
            removed: &mut Vec<usize>,
            delta_w: i64,
            delta_two: i64,
        ) -> Outcome {
            if !x.is_empty() && (delta_w > 0 || (delta_w == 0 && delta_two > 0)) {
                let mut remove = removed.clone();
                remove.sort_unstable();
                return Outcome::Found(Improvement {
                    add: x.iter().map(|&c| self.cands[c].clone()).collect(),
                    remove,
                    delta_weight: delta_w,
                    delta_two,
                });
            }
            if x.len() == self.t {
                return Outcome::Exhausted;
            }
            for c in start..self.cands.len() {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Outcome::OverBudget;
                }
                let cand = &self.cands[c];
                if x.iter().any(|&i| self.cands[i].intersects(cand)) {
                    continue;
                }
                let mut newly: Vec<usize> = cand
                    .iter()
                    .filter_map(|e| self.a.owner(e))
                    .filter(|i| !removed.contains(i))
                    .collect();
                newly.sort_unstable();
                newly.dedup();
                let mut dw = delta_w + cand.weight() as i64;
                let mut d2 = delta_two + i64::from(cand.len() == 3);
                for &i in &newly {
                    dw -= self.a.sets()[i].weight() as i64;
                    d2 -= i64::from(self.a.sets()[i].len() == 3);
                }
                x.push(c);
                let before = removed.len();
                removed.append(&mut newly);
                match self.rec(c + 1, x, removed, dw, d2) {
                    Outcome::Exhausted => {}
                    other => return other,
                }
                removed.truncate(before);
                x.pop();
            }
            Outcome::Exhausted
        }
    }

    let mut en = Enum {
        cands: &cands,
        a,
        t,
        nodes: 0,
        budget: node_budget,
    };
    match en.rec(0, &mut Vec::new(), &mut Vec::new(), 0, 0) {
        Outcome::Found(imp) => Ok(Some(imp)),
        Outcome::Exhausted => Ok(None),
        Outcome::OverBudget => Err(OracleError::BudgetExceeded {
            size: en.nodes as usize,
            budget: cap,
        }),
    }
}

/// True iff no disjoint `X` of size at most `t` improves `a`.
pub fn exhaustive_no_improvement(
    f: &SetFamily,
    a: &Packing,
    t: usize,
    node_budget: u64,
) -> Result<bool, OracleError> {
    Ok(exhaustive_improvement(f, a, t, node_budget)?.is_none())
}
