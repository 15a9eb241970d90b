//! Local search for hereditary 3-set packing: repeatedly apply a local
//! improvement of size at most `t` (default 10) under the lexicographic
//! objective (total weight, then number of weight-2 sets) until none exists.
//!
//! The improvement search restricts itself to connected candidate
//! collections: each added set must share an element with a set already
//! removed from the current solution by the collection built so far. A
//! disconnected improvement splits into components with disjoint
//! neighborhoods, and both objective parts are additive across components,
//! so some component is itself an improvement; the equivalence is property
//! tested rather than assumed. An exhaustive fallback search over the whole
//! candidate universe is available for small instances.

use std::collections::HashSet;

use thiserror::Error;

use crate::packing::{neighborhood, ElemSet, Mask, Packing, PackingError, SetFamily};

/// Iteration order of the materialized candidate universe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SeedOrder {
    /// Candidates sorted by their element lists; the default.
    #[default]
    Sorted,
    /// Candidates in order of first appearance while traversing the maximal
    /// sets as given.
    Input,
}

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Maximum number of sets added by one improvement.
    pub t: usize,
    pub seed_order: SeedOrder,
    /// Use the exhaustive in-universe search instead of the connected one.
    pub exhaustive: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            t: 10,
            seed_order: SeedOrder::Sorted,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("family has sets of size {k_bound}, the search handles at most 3")]
    KBoundExceeded { k_bound: usize },
    #[error("improvement no longer matches the packing it was found for")]
    StaleImprovement,
    #[error("iteration guard tripped after {iterations} swaps (guard {guard})")]
    IterationGuardTripped { iterations: usize, guard: usize },
    #[error("start packing infeasible: {0}")]
    InfeasibleStart(PackingError),
}

/// A swap: add the disjoint collection `add`, remove exactly its
/// neighborhood `remove` in the current packing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Improvement {
    pub add: Vec<ElemSet>,
    /// Indices into the packing, sorted ascending.
    pub remove: Vec<usize>,
    /// `w(add) - w(remove)`; positive, or zero for a plateau move.
    pub delta_weight: i64,
    /// Change in the number of weight-2 sets; positive on plateau moves.
    pub delta_two: i64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Swaps applied.
    pub iterations: usize,
    /// Swaps with a strict weight increase.
    pub weight_increases: usize,
    /// Swaps that kept the weight and increased the weight-2 count.
    pub plateau_moves: usize,
    /// Longest run of consecutive plateau moves.
    pub max_plateau_run: usize,
    /// Search tree nodes expanded across all improvement searches.
    pub candidates_examined: u64,
    /// Size of the materialized candidate universe.
    pub candidate_count: usize,
}

/// The hereditary closure of a 3-bounded family at weights 1 and 2: all 2-
/// and 3-element subsets of the maximal sets, deduplicated.
#[derive(Clone, Debug)]
pub struct CandidateUniverse {
    ground_size: usize,
    sets: Vec<ElemSet>,
    by_element: Vec<Vec<usize>>,
}

impl CandidateUniverse {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[ElemSet] {
        &self.sets
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }
}

pub fn enumerate_candidates(f: &SetFamily) -> Result<CandidateUniverse, SearchError> {
    enumerate_candidates_with_order(f, SeedOrder::Sorted)
}

pub fn enumerate_candidates_with_order(
    f: &SetFamily,
    order: SeedOrder,
) -> Result<CandidateUniverse, SearchError> {
    if f.k_bound() > 3 {
        return Err(SearchError::KBoundExceeded {
            k_bound: f.k_bound(),
        });
    }
    let mut sets: Vec<ElemSet> = Vec::new();
    let mut seen: HashSet<ElemSet> = HashSet::new();
    for m in f.maximal_sets() {
        let e = m.as_slice();
        let subsets: Vec<ElemSet> = match e.len() {
            2 => vec![m.clone()],
            3 => vec![
                ElemSet::new(vec![e[0], e[1]]),
                ElemSet::new(vec![e[0], e[2]]),
                ElemSet::new(vec![e[1], e[2]]),
                m.clone(),
            ],
            _ => Vec::new(),
        };
        for s in subsets {
            if seen.insert(s.clone()) {
                sets.push(s);
            }
        }
    }
    if order == SeedOrder::Sorted {
        sets.sort_unstable();
    }
    let mut by_element = vec![Vec::new(); f.ground_size()];
    for (i, s) in sets.iter().enumerate() {
        for e in s.iter() {
            by_element[e].push(i);
        }
    }
    Ok(CandidateUniverse {
        ground_size: f.ground_size(),
        sets,
        by_element,
    })
}

/// Searches for one improvement of size at most `t`, materializing the
/// candidate universe on the fly. [`run_with`] keeps the universe across
/// iterations instead.
pub fn find_improvement(
    f: &SetFamily,
    a: &Packing,
    t: usize,
) -> Result<Option<Improvement>, SearchError> {
    let uni = enumerate_candidates(f)?;
    let mut examined = 0;
    Ok(connected_search(&uni, a, t, &mut examined))
}

/// Marks candidates that equal a packed set; those can never take part in a
/// disjoint improvement together with anything touching them, so both
/// searches skip them.
fn duplicate_of_packed(uni: &CandidateUniverse, a: &Packing) -> Vec<bool> {
    uni.sets
        .iter()
        .map(|s| {
            s.iter()
                .next()
                .and_then(|e| a.owner(e))
                .is_some_and(|i| &a.sets()[i] == s)
        })
        .collect()
}

struct ConnectedDfs<'a> {
    uni: &'a CandidateUniverse,
    a: &'a Packing,
    t: usize,
    skip: Vec<bool>,
    used: Mask,
    removed_mark: Vec<bool>,
    removed: Vec<usize>,
    x: Vec<usize>,
    delta_w: i64,
    delta_two: i64,
    visited: HashSet<Vec<u32>>,
    examined: u64,
}

impl ConnectedDfs<'_> {
    fn signature_with(&self, c: usize) -> Vec<u32> {
        let mut sig: Vec<u32> = self.x.iter().map(|&i| i as u32).collect();
        sig.push(c as u32);
        sig.sort_unstable();
        sig
    }

    /// Adds candidate `c`; returns how many packed sets it newly removed.
    fn push(&mut self, c: usize) -> usize {
        let cand = &self.uni.sets[c];
        self.examined += 1;
        self.x.push(c);
        self.delta_w += cand.weight() as i64;
        self.delta_two += i64::from(cand.len() == 3);
        let mut newly = 0;
        for e in cand.iter() {
            self.used.set(e);
            if let Some(ai) = self.a.owner(e) {
                if !self.removed_mark[ai] {
                    self.removed_mark[ai] = true;
                    self.removed.push(ai);
                    let s = &self.a.sets()[ai];
                    self.delta_w -= s.weight() as i64;
                    self.delta_two -= i64::from(s.len() == 3);
                    newly += 1;
                }
            }
        }
        newly
    }

    fn pop(&mut self, newly: usize) {
        let c = self.x.pop().unwrap();
        let cand = &self.uni.sets[c];
        self.delta_w -= cand.weight() as i64;
        self.delta_two -= i64::from(cand.len() == 3);
        self.used.clear_all(cand);
        for _ in 0..newly {
            let ai = self.removed.pop().unwrap();
            self.removed_mark[ai] = false;
            let s = &self.a.sets()[ai];
            self.delta_w += s.weight() as i64;
            self.delta_two += i64::from(s.len() == 3);
        }
    }

    fn improvement(&self) -> Improvement {
        let mut add: Vec<ElemSet> = self.x.iter().map(|&c| self.uni.sets[c].clone()).collect();
        add.sort_unstable();
        let mut remove = self.removed.clone();
        remove.sort_unstable();
        Improvement {
            add,
            remove,
            delta_weight: self.delta_w,
            delta_two: self.delta_two,
        }
    }

    fn grow(&mut self) -> Option<Improvement> {
        if self.delta_w > 0 || (self.delta_w == 0 && self.delta_two > 0) {
            return Some(self.improvement());
        }
        if self.x.len() == self.t {
            return None;
        }
        // each further set gains at most 2; branches that cannot reach a
        // nonnegative delta are dead
        if self.delta_w + 2 * ((self.t - self.x.len()) as i64) < 0 {
            return None;
        }
        let mut frontier: Vec<usize> = Vec::new();
        for &ai in &self.removed {
            for e in self.a.sets()[ai].iter() {
                if self.used.get(e) {
                    continue;
                }
                for &c in &self.uni.by_element[e] {
                    if !self.skip[c] && !self.used.any_of(&self.uni.sets[c]) {
                        frontier.push(c);
                    }
                }
            }
        }
        frontier.sort_unstable();
        frontier.dedup();
        for c in frontier {
            let sig = self.signature_with(c);
            if !self.visited.insert(sig) {
                continue;
            }
            let newly = self.push(c);
            let found = self.grow();
            self.pop(newly);
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// First improvement of size at most `t` in deterministic candidate order,
/// restricted to connected collections; `None` means no improvement of that
/// size exists at all (see the module notes on the connectivity reduction).
fn connected_search(
    uni: &CandidateUniverse,
    a: &Packing,
    t: usize,
    examined: &mut u64,
) -> Option<Improvement> {
    if t == 0 {
        return None;
    }
    let mut dfs = ConnectedDfs {
        uni,
        a,
        t,
        skip: duplicate_of_packed(uni, a),
        used: Mask::new(uni.ground_size),
        removed_mark: vec![false; a.len()],
        removed: Vec::new(),
        x: Vec::new(),
        delta_w: 0,
        delta_two: 0,
        visited: HashSet::new(),
        examined: 0,
    };
    let mut found = None;
    for c in 0..uni.len() {
        if dfs.skip[c] {
            continue;
        }
        dfs.visited.insert(vec![c as u32]);
        let newly = dfs.push(c);
        found = dfs.grow();
        dfs.pop(newly);
        if found.is_some() {
            break;
        }
    }
    *examined += dfs.examined;
    found
}

/// Plain enumeration of all disjoint candidate combinations of size at most
/// `t`; the fallback mode for small instances.
fn exhaustive_search(
    uni: &CandidateUniverse,
    a: &Packing,
    t: usize,
    examined: &mut u64,
) -> Option<Improvement> {
    let skip = duplicate_of_packed(uni, a);

    struct Enum<'a> {
        uni: &'a CandidateUniverse,
        a: &'a Packing,
        t: usize,
        skip: &'a [bool],
        used: Mask,
        removed_mark: Vec<bool>,
        removed: Vec<usize>,
        x: Vec<usize>,
        examined: u64,
    }

    impl Enum<'_> {
        fn rec(&mut self, start: usize, delta_w: i64, delta_two: i64) -> Option<Improvement> {
            if !self.x.is_empty() && (delta_w > 0 || (delta_w == 0 && delta_two > 0)) {
                let mut add: Vec<ElemSet> =
                    self.x.iter().map(|&c| self.uni.sets[c].clone()).collect();
                add.sort_unstable();
                let mut remove = self.removed.clone();
                remove.sort_unstable();
                return Some(Improvement {
                    add,
                    remove,
                    delta_weight: delta_w,
                    delta_two,
                });
            }
            if self.x.len() == self.t {
                return None;
            }
            for c in start..self.uni.len() {
                if self.skip[c] || self.used.any_of(&self.uni.sets[c]) {
                    continue;
                }
                self.examined += 1;
                let cand = &self.uni.sets[c];
                let mut dw = delta_w + cand.weight() as i64;
                let mut d2 = delta_two + i64::from(cand.len() == 3);
                let mut newly = 0;
                for e in cand.iter() {
                    self.used.set(e);
                    if let Some(ai) = self.a.owner(e) {
                        if !self.removed_mark[ai] {
                            self.removed_mark[ai] = true;
                            self.removed.push(ai);
                            let s = &self.a.sets()[ai];
                            dw -= s.weight() as i64;
                            d2 -= i64::from(s.len() == 3);
                            newly += 1;
                        }
                    }
                }
                self.x.push(c);
                let found = self.rec(c + 1, dw, d2);
                self.x.pop();
                self.used.clear_all(cand);
                for _ in 0..newly {
                    let ai = self.removed.pop().unwrap();
                    self.removed_mark[ai] = false;
                }
                if found.is_some() {
                    return found;
                }
            }
            None
        }
    }

    let mut en = Enum {
        uni,
        a,
        t,
        skip: &skip,
        used: Mask::new(uni.ground_size),
        removed_mark: vec![false; a.len()],
        removed: Vec::new(),
        x: Vec::new(),
        examined: 0,
    };
    let found = en.rec(0, 0, 0);
    *examined += en.examined;
    found
}

/// Applies the swap `A <- (A \ remove) ∪ add` in place. Fails with
/// [`SearchError::StaleImprovement`] if the packing has changed since the
/// improvement was found.
pub fn apply(a: &mut Packing, imp: &Improvement) -> Result<(), SearchError> {
    let stale = SearchError::StaleImprovement;
    if imp.remove.windows(2).any(|w| w[0] >= w[1]) {
        return Err(stale);
    }
    if imp.remove.last().is_some_and(|&i| i >= a.len()) {
        return Err(stale);
    }
    if neighborhood(&imp.add, a) != imp.remove {
        return Err(stale);
    }
    for (i, s) in imp.add.iter().enumerate() {
        for t in &imp.add[i + 1..] {
            if s.intersects(t) {
                return Err(stale);
            }
        }
    }
    let removed_w: usize = imp.remove.iter().map(|&i| a.sets()[i].weight()).sum();
    let removed_two = imp
        .remove
        .iter()
        .filter(|&&i| a.sets()[i].len() == 3)
        .count();
    let added_w: usize = imp.add.iter().map(|s| s.weight()).sum();
    let added_two = imp.add.iter().filter(|s| s.len() == 3).count();
    if added_w as i64 - removed_w as i64 != imp.delta_weight
        || added_two as i64 - removed_two as i64 != imp.delta_two
    {
        return Err(stale);
    }
    for &i in imp.remove.iter().rev() {
        a.remove(i);
    }
    for s in &imp.add {
        a.insert(s.clone())
            .expect("fresh improvement inserts disjoint sets");
    }
    Ok(())
}

/// Runs the search from the empty packing with default options (t = 10).
pub fn run(f: &SetFamily) -> Result<(Packing, SearchStats), SearchError> {
    run_with(f, &SearchOptions::default())
}

pub fn run_with(
    f: &SetFamily,
    opts: &SearchOptions,
) -> Result<(Packing, SearchStats), SearchError> {
    run_from(f, Packing::empty(f.ground_size()), opts)
}

/// Runs the search from a given start packing (the benchmark harness uses
/// this to demonstrate escapes from planted solutions).
pub fn run_from(
    f: &SetFamily,
    start: Packing,
    opts: &SearchOptions,
) -> Result<(Packing, SearchStats), SearchError> {
    if let Err(e) = start.feasible_for(f) {
        return Err(SearchError::InfeasibleStart(e));
    }
    let uni = enumerate_candidates_with_order(f, opts.seed_order)?;
    let mut a = start;
    let mut stats = SearchStats {
        candidate_count: uni.len(),
        ..Default::default()
    };
    // weight never exceeds 2 per candidate; the guard only trips if the
    // objective failed to increase lexicographically, i.e. on a bug
    let w_max = 2 * uni.len();
    let guard = (2 * w_max + 1) * (uni.len() + 1);
    let mut plateau_run = 0usize;
    loop {
        let found = if opts.exhaustive {
            exhaustive_search(&uni, &a, opts.t, &mut stats.candidates_examined)
        } else {
            connected_search(&uni, &a, opts.t, &mut stats.candidates_examined)
        };
        let Some(imp) = found else { break };
        apply(&mut a, &imp)?;
        stats.iterations += 1;
        if imp.delta_weight > 0 {
            stats.weight_increases += 1;
            plateau_run = 0;
        } else {
            stats.plateau_moves += 1;
            plateau_run += 1;
            stats.max_plateau_run = stats.max_plateau_run.max(plateau_run);
        }
        if stats.iterations > guard {
            return Err(SearchError::IterationGuardTripped {
                iterations: stats.iterations,
                guard,
            });
        }
    }
    Ok((a, stats))
}
