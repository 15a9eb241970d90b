//! Instance generation: random rooted DAGs and the planted worst-case
//! family built from the incidence structure of a regular graph with large
//! girth.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digraph::Digraph;
use crate::packing::{family_from_sets, ElemSet, Packing, SetFamily};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("retry budget exhausted generating a {k}-regular graph of girth >= {girth_min}")]
    GenerationTimeout { k: usize, girth_min: usize },
    #[error("unsupported parameters k={k}, t={t} (need k >= 3, t >= 1)")]
    UnsupportedParams { k: usize, t: usize },
}

/// Random rooted DAG: sample forward arcs over a random topological order at
/// the given rate, then give every in-degree-0 non-root vertex one arc from
/// a random earlier vertex. Deterministic per seed.
pub fn gen_random_dag(n: usize, density: f64, seed: u64) -> Digraph {
    assert!(n >= 1, "need at least one vertex");
    assert!(density > 0.0 && density <= 1.0, "density must be in (0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let root = order[0];
    let mut arcs = Vec::new();
    let mut has_in = vec![false; n]; // by position in the order
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(density) {
                arcs.push((order[i], order[j]));
                has_in[j] = true;
            }
        }
    }
    for j in 1..n {
        if !has_in[j] {
            let i = rng.gen_range(0..j);
            arcs.push((order[i], order[j]));
        }
    }
    Digraph::new(n, root, arcs).unwrap()
}

/// A simple undirected graph; edges are stored as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl UGraph {
    pub fn new(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        UGraph { n, edges, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_regular(&self, k: usize) -> bool {
        (0..self.n).all(|v| self.degree(v) == k)
    }
}

/// Shortest cycle length, or `None` for forests. BFS from every vertex; any
/// non-tree edge closes a walk that contains a cycle no longer than the walk,
/// and for a shortest cycle the BFS started on it meets it exactly.
pub fn girth(g: &UGraph) -> Option<usize> {
    let mut best: Option<usize> = None;
    for s in 0..g.n {
        let mut dist = vec![usize::MAX; g.n];
        let mut parent = vec![usize::MAX; g.n];
        let mut queue = std::collections::VecDeque::from([s]);
        dist[s] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &g.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                } else if parent[u] != v {
                    let cycle = dist[u] + dist[v] + 1;
                    if best.is_none_or(|b| cycle < b) {
                        best = Some(cycle);
                    }
                }
            }
        }
    }
    best
}

/// Exact test for `girth(g) >= min_girth`, with BFS truncated at radius
/// `min_girth / 2`: a shorter cycle is always detected from one of its own
/// vertices within that radius, and every detected candidate closes a walk
/// containing a cycle of at most its length.
fn has_girth_at_least(g: &UGraph, min_girth: usize) -> bool {
    let radius = min_girth / 2;
    let mut dist = vec![usize::MAX; g.n()];
    let mut parent = vec![usize::MAX; g.n()];
    let mut touched: Vec<usize> = Vec::new();
    for s in 0..g.n() {
        touched.clear();
        let mut queue = std::collections::VecDeque::from([s]);
        dist[s] = 0;
        touched.push(s);
        while let Some(u) = queue.pop_front() {
            if dist[u] >= radius {
                continue;
            }
            for &v in &g.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    touched.push(v);
                    queue.push_back(v);
                } else if parent[u] != v && dist[u] + dist[v] + 1 < min_girth {
                    for &w in &touched {
                        dist[w] = usize::MAX;
                        parent[w] = usize::MAX;
                    }
                    return false;
                }
            }
        }
        for &w in &touched {
            dist[w] = usize::MAX;
            parent[w] = usize::MAX;
        }
    }
    true
}

pub fn complete_graph(n: usize) -> UGraph {
    let edges = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .collect();
    UGraph::new(n, edges)
}

pub fn complete_bipartite(a: usize, b: usize) -> UGraph {
    let edges = (0..a)
        .flat_map(|u| (0..b).map(move |v| (u, a + v)))
        .collect();
    UGraph::new(a + b, edges)
}

/// The 3-regular girth-5 graph on 10 vertices: outer 5-cycle, spokes, inner
/// pentagram.
pub fn petersen() -> UGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    UGraph::new(10, edges)
}

/// The 3-regular girth-6 graph on 14 vertices: a 14-cycle plus chords
/// `i -- i+5` for even `i`.
pub fn heawood() -> UGraph {
    let mut edges = Vec::new();
    for i in 0..14 {
        edges.push((i, (i + 1) % 14));
        if i % 2 == 0 {
            edges.push((i, (i + 5) % 14));
        }
    }
    UGraph::new(14, edges)
}

/// Smallest possible vertex count of a k-regular graph with the given girth.
fn moore_bound(k: usize, girth: usize) -> usize {
    let r = girth / 2;
    if girth % 2 == 1 {
        1 + k * (0..r).map(|i| (k - 1).pow(i as u32)).sum::<usize>()
    } else {
        2 * (0..r).map(|i| (k - 1).pow(i as u32)).sum::<usize>()
    }
}

const PAIRING_ATTEMPTS: usize = 50_000;

/// A simple k-regular graph with girth at least `girth_min` and at least
/// `n_min` vertices: known small graphs where they fit, otherwise
/// pairing-model sampling with a girth check and retry. The girth of the
/// result is always verified, never assumed.
pub fn gen_regular_high_girth(
    k: usize,
    girth_min: usize,
    n_min: usize,
    seed: u64,
) -> Result<UGraph, GenError> {
    gen_regular_high_girth_with_budget(k, girth_min, n_min, seed, PAIRING_ATTEMPTS)
}

pub fn gen_regular_high_girth_with_budget(
    k: usize,
    girth_min: usize,
    n_min: usize,
    seed: u64,
    attempts: usize,
) -> Result<UGraph, GenError> {
    let girth_min = girth_min.max(3);
    let mut library: Vec<UGraph> = vec![complete_graph(k + 1), complete_bipartite(k, k)];
    if k == 3 {
        library.push(petersen());
        library.push(heawood());
    }
    for g in library {
        if g.n() >= n_min && g.is_regular(k) && girth(&g).is_some_and(|gi| gi >= girth_min) {
            return Ok(g);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut n = n_min.max(moore_bound(k, girth_min)).max(k + 1);
    if (n * k) % 2 == 1 {
        n += 1;
    }
    for attempt in 0..attempts {
        // grow the graph occasionally; short cycles get no likelier with n
        if attempt > 0 && attempt % 2_000 == 0 {
            n += 2;
        }
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, k)).collect();
        points.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(n * k / 2);
        let mut simple = true;
        let mut seen = std::collections::HashSet::new();
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                simple = false;
                break;
            }
            edges.push((u, v));
        }
        if !simple {
            continue;
        }
        let g = UGraph::new(n, edges);
        if has_girth_at_least(&g, girth_min) {
            return Ok(g);
        }
    }
    Err(GenError::GenerationTimeout { k, girth_min })
}

/// A planted instance: a family over the edge set of the incidence graph of
/// a k-regular graph `H`, with the degree-2 side as solution `a_solution`
/// and the degree-k side as the heavier `b_solution`.
#[derive(Clone, Debug)]
pub struct LowerBoundInstance {
    pub family: SetFamily,
    pub a_solution: Packing,
    pub b_solution: Packing,
    pub k: usize,
    pub t: usize,
    /// Girth of the incidence graph, computed independently by BFS.
    pub girth: usize,
    /// Whether `a_solution` passed the exhaustive local-optimality check for
    /// size-`t` swaps within the checker budget.
    pub certified: bool,
}

pub fn gen_lower_bound(k: usize, t: usize, seed: u64) -> Result<LowerBoundInstance, GenError> {
    if k < 3 || t < 1 {
        return Err(GenError::UnsupportedParams { k, t });
    }
    let girth_min_h = ((k * t + 1).div_ceil(2) + 1).max(3);
    let h = gen_regular_high_girth(k, girth_min_h, 4, seed)?;
    let n = h.n();
    let m = h.edges().len();
    // ground elements = incidence-graph edges: edge j of H contributes
    // element 2j at its lower endpoint and 2j+1 at its upper endpoint
    let ground = 2 * m;
    let mut vertex_sets: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut edge_sets: Vec<ElemSet> = Vec::with_capacity(m);
    let mut incidence_edges: Vec<(usize, usize)> = Vec::with_capacity(ground);
    for (j, &(u, v)) in h.edges().iter().enumerate() {
        vertex_sets[u].push(2 * j);
        vertex_sets[v].push(2 * j + 1);
        edge_sets.push(ElemSet::new(vec![2 * j, 2 * j + 1]));
        incidence_edges.push((u, n + j));
        incidence_edges.push((v, n + j));
    }
    let vertex_sets: Vec<ElemSet> = vertex_sets.into_iter().map(ElemSet::new).collect();

    let mut all = vertex_sets.clone();
    all.extend(edge_sets.iter().cloned());
    let family = family_from_sets(ground, all).expect("incidence sets are in range");
    debug_assert_eq!(family.maximal_sets().len(), n + m);

    let a_solution = Packing::from_sets(ground, edge_sets).expect("edge stars are disjoint");
    let b_solution = Packing::from_sets(ground, vertex_sets).expect("vertex stars are disjoint");
    // exact rational identity: w(B) = (2 - 2/k) * w(A)
    assert_eq!(k * b_solution.weight(), (2 * k - 2) * a_solution.weight());

    let incidence = UGraph::new(n + m, incidence_edges);
    let inc_girth = girth(&incidence).expect("incidence graph of a regular graph has cycles");
    if inc_girth < k * t + 1 {
        return Err(GenError::GenerationTimeout {
            k,
            girth_min: girth_min_h,
        });
    }

    let certified = matches!(
        crate::oracles::exhaustive_no_improvement(
            &family,
            &a_solution,
            t,
            crate::oracles::DEFAULT_CHECK_BUDGET,
        ),
        Ok(true)
    );

    Ok(LowerBoundInstance {
        family,
        a_solution,
        b_solution,
        k,
        t,
        girth: inc_girth,
        certified,
    })
}

#[derive(Serialize, Deserialize)]
struct LowerBoundJson {
    k: usize,
    t: usize,
    girth: usize,
    ground_size: usize,
    maximal_sets: Vec<Vec<usize>>,
    a_solution: Vec<Vec<usize>>,
    a_weight: usize,
    b_solution: Vec<Vec<usize>>,
    b_weight: usize,
    certified_local_opt: bool,
}

pub fn lower_bound_to_json(inst: &LowerBoundInstance) -> String {
    let sets = |p: &Packing| -> Vec<Vec<usize>> {
        p.sets().iter().map(|s| s.as_slice().to_vec()).collect()
    };
    let dto = LowerBoundJson {
        k: inst.k,
        t: inst.t,
        girth: inst.girth,
        ground_size: inst.family.ground_size(),
        maximal_sets: inst
            .family
            .maximal_sets()
            .iter()
            .map(|s| s.as_slice().to_vec())
            .collect(),
        a_solution: sets(&inst.a_solution),
        a_weight: inst.a_solution.weight(),
        b_solution: sets(&inst.b_solution),
        b_weight: inst.b_solution.weight(),
        certified_local_opt: inst.certified,
    };
    serde_json::to_string_pretty(&dto).unwrap()
}

/// The embedded solutions of a stored planted instance, for harness runs
/// that start from one of them.
pub fn planted_solutions_from_json(
    text: &str,
) -> Result<(Packing, Packing), crate::packing::JsonError> {
    let dto: LowerBoundJson = serde_json::from_str(text)?;
    let build = |raw: Vec<Vec<usize>>| {
        Packing::from_sets(dto.ground_size, raw.into_iter().map(ElemSet::new).collect())
    };
    Ok((build(dto.a_solution)?, build(dto.b_solution)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::validate_instance;

    #[test]
    fn random_dag_smallest() {
        let g = gen_random_dag(1, 0.5, 0);
        assert_eq!(g.n(), 1);
        assert_eq!(validate_instance(&g), Ok(()));
    }

    #[test]
    fn random_dag_full_density() {
        let g = gen_random_dag(5, 1.0, 3);
        assert_eq!(g.arcs().len(), 10);
        assert_eq!(validate_instance(&g), Ok(()));
    }

    #[test]
    fn random_dag_always_valid_and_deterministic() {
        for seed in 0..40 {
            let g = gen_random_dag(12, 0.3, seed);
            assert_eq!(validate_instance(&g), Ok(()));
            let h = gen_random_dag(12, 0.3, seed);
            assert_eq!(g, h);
        }
    }

    #[test]
    fn girth_of_known_graphs() {
        assert_eq!(girth(&complete_graph(4)), Some(3));
        assert_eq!(girth(&complete_bipartite(3, 3)), Some(4));
        assert_eq!(girth(&petersen()), Some(5));
        assert_eq!(girth(&heawood()), Some(6));
        let path = UGraph::new(3, vec![(0, 1), (1, 2)]);
        assert_eq!(girth(&path), None);
    }

    #[test]
    fn known_graphs_are_regular() {
        assert!(petersen().is_regular(3));
        assert!(heawood().is_regular(3));
        assert!(complete_bipartite(4, 4).is_regular(4));
    }

    #[test]
    fn library_selection() {
        assert_eq!(
            gen_regular_high_girth(3, 3, 1, 0).unwrap(),
            complete_graph(4)
        );
        assert_eq!(gen_regular_high_girth(3, 5, 1, 0).unwrap(), petersen());
        assert_eq!(gen_regular_high_girth(3, 6, 1, 0).unwrap(), heawood());
    }

    #[test]
    fn pairing_model_generation() {
        let g = gen_regular_high_girth(3, 4, 20, 7).unwrap();
        assert!(g.n() >= 20);
        assert!(g.is_regular(3));
        assert!(girth(&g).unwrap() >= 4);
        // deterministic per seed
        assert_eq!(g, gen_regular_high_girth(3, 4, 20, 7).unwrap());
    }

    #[test]
    fn generation_times_out_for_absurd_girth() {
        assert_eq!(
            gen_regular_high_girth_with_budget(3, 20, 1, 0, 10).unwrap_err(),
            GenError::GenerationTimeout {
                k: 3,
                girth_min: 20
            }
        );
    }

    #[test]
    fn truncated_girth_test_agrees_with_full_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..60 {
            let n = rng.gen_range(3..14);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v));
                    }
                }
            }
            let g = UGraph::new(n, edges);
            let full = girth(&g);
            for min in 3..9 {
                assert_eq!(
                    has_girth_at_least(&g, min),
                    full.is_none_or(|gi| gi >= min),
                    "n={n} girth={full:?} min={min}"
                );
            }
        }
    }

    #[test]
    fn lower_bound_smallest_cubic() {
        let inst = gen_lower_bound(3, 1, 0).unwrap();
        assert_eq!(inst.family.ground_size(), 12);
        assert_eq!(inst.a_solution.weight(), 6);
        assert_eq!(inst.b_solution.weight(), 8);
        assert_eq!(inst.girth, 6);
        assert!(inst.certified);
        assert_eq!(inst.a_solution.feasible_for(&inst.family), Ok(()));
        assert_eq!(inst.b_solution.feasible_for(&inst.family), Ok(()));
    }

    #[test]
    fn lower_bound_ratios_are_exact() {
        for (k, t) in [(3, 1), (4, 1), (5, 1)] {
            let inst = gen_lower_bound(k, t, 0).unwrap();
            assert_eq!(
                k * inst.b_solution.weight(),
                (2 * k - 2) * inst.a_solution.weight()
            );
            assert!(inst.girth >= k * t + 1);
        }
    }

    #[test]
    fn lower_bound_rejects_small_k() {
        assert_eq!(
            gen_lower_bound(2, 1, 0).unwrap_err(),
            GenError::UnsupportedParams { k: 2, t: 1 }
        );
    }

    #[test]
    fn planted_solution_resists_random_swaps() {
        // the forest argument: any small disjoint collection outside the
        // planted solution removes strictly more weight than it adds
        let inst = gen_lower_bound(3, 2, 0).unwrap();
        let f = &inst.family;
        let a = &inst.a_solution;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(19);
        for _ in 0..300 {
            let mut x: Vec<ElemSet> = Vec::new();
            for _ in 0..inst.t {
                let m = f.maximal_sets().choose(&mut rng).unwrap();
                let len = rng.gen_range(2..=m.len());
                let mut elems = m.as_slice().to_vec();
                elems.shuffle(&mut rng);
                let s = ElemSet::new(elems[..len].to_vec());
                let in_a = s
                    .iter()
                    .next()
                    .and_then(|e| a.owner(e))
                    .is_some_and(|i| a.sets()[i] == s);
                if !in_a && !x.iter().any(|q| q.intersects(&s)) {
                    x.push(s);
                }
            }
            if x.is_empty() {
                continue;
            }
            let removed = crate::packing::neighborhood(&x, a);
            let w_removed: usize = removed.iter().map(|&i| a.sets()[i].weight()).sum();
            let w_added: usize = x.iter().map(|s| s.weight()).sum();
            assert!(
                w_removed > w_added,
                "planted solution must be locally optimal"
            );
        }
    }

    #[test]
    fn lower_bound_json_round_trip() {
        let inst = gen_lower_bound(3, 1, 0).unwrap();
        let text = lower_bound_to_json(&inst);
        let f = crate::packing::family_from_json(&text).unwrap();
        assert_eq!(f, inst.family);
        let (a, b) = planted_solutions_from_json(&text).unwrap();
        assert_eq!(a.sets(), inst.a_solution.sets());
        assert_eq!(b.sets(), inst.b_solution.sets());
    }
}
