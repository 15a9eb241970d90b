//! Rooted-DAG data model, instance validation, arborescence verification,
//! and leaf accounting.

use std::collections::VecDeque;

use thiserror::Error;

/// A simple directed graph with a designated root vertex.
///
/// Vertices are dense integers `0..n`; the root may be any index. Adjacency
/// lists are kept sorted so iteration order is deterministic. The struct is
/// immutable after construction and safe to share across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    root: usize,
    arcs: Vec<(usize, usize)>,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
}

/// Structural errors raised while building a [`Digraph`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph needs at least one vertex")]
    Empty,
    #[error("root {0} out of range")]
    RootOutOfRange(usize),
    #[error("arc ({0}, {1}) out of range")]
    ArcOutOfRange(usize, usize),
}

/// Violations of the MLSA instance contract (simple, acyclic, root-reachable).
#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate arc ({0}, {1})")]
    DuplicateArc(usize, usize),
    #[error("cycle found: {0:?}")]
    CycleFound(Vec<usize>),
    #[error("vertex {0} unreachable from root")]
    Unreachable(usize),
}

impl Digraph {
    /// Builds a graph, checking only that indices are in range.
    /// Use [`validate_instance`] for the semantic checks.
    pub fn new(n: usize, root: usize, arcs: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if root >= n {
            return Err(GraphError::RootOutOfRange(root));
        }
        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for &(u, v) in &arcs {
            if u >= n || v >= n {
                return Err(GraphError::ArcOutOfRange(u, v));
            }
            out_adj[u].push(v);
            in_adj[v].push(u);
        }
        for adj in out_adj.iter_mut().chain(in_adj.iter_mut()) {
            adj.sort_unstable();
        }
        Ok(Digraph {
            n,
            root,
            arcs,
            out_adj,
            in_adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].binary_search(&v).is_ok()
    }
}

/// Checks that `g` is a valid MLSA instance: simple, acyclic, and with every
/// vertex reachable from the root. Returns the first violated condition.
pub fn validate_instance(g: &Digraph) -> Result<(), InstanceError> {
    for &(u, v) in g.arcs() {
        if u == v {
            return Err(InstanceError::SelfLoop(u));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for &(u, v) in g.arcs() {
        if !seen.insert((u, v)) {
            return Err(InstanceError::DuplicateArc(u, v));
        }
    }
    if let Some(cycle) = find_cycle(g) {
        return Err(InstanceError::CycleFound(cycle));
    }
    // Acyclic from here on; BFS from the root settles reachability.
    let mut reached = vec![false; g.n()];
    let mut queue = VecDeque::from([g.root()]);
    reached[g.root()] = true;
    while let Some(u) = queue.pop_front() {
        for &v in g.out_neighbors(u) {
            if !reached[v] {
                reached[v] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = reached.iter().position(|&r| !r) {
        return Err(InstanceError::Unreachable(v));
    }
    Ok(())
}

/// Iterative DFS with back-edge tracing. Returns a witness cycle as the
/// vertex sequence `[v0, ..., vk]` with arcs `v0->v1->...->vk->v0`.
fn find_cycle(g: &Digraph) -> Option<Vec<usize>> {
    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; g.n()];
    // stack of (vertex, next out-neighbor position)
    let mut stack: Vec<(usize, usize)> = Vec::new();
    for start in 0..g.n() {
        if color[start] != WHITE {
            continue;
        }
        color[start] = GRAY;
        stack.push((start, 0));
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < g.out_neighbors(u).len() {
                let v = g.out_neighbors(u)[*next];
                *next += 1;
                match color[v] {
                    WHITE => {
                        color[v] = GRAY;
                        stack.push((v, 0));
                    }
                    GRAY => {
                        let pos = stack.iter().position(|&(w, _)| w == v).unwrap();
                        return Some(stack[pos..].iter().map(|&(w, _)| w).collect());
                    }
                    _ => {}
                }
            } else {
                color[u] = BLACK;
                stack.pop();
            }
        }
    }
    None
}

/// A spanning arborescence, encoded as a parent function over the host
/// graph's vertices. `parent[v]` is `None` exactly at the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arborescence {
    parent: Vec<Option<usize>>,
    leaf_count: usize,
}

/// Violations of the arborescence contract.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArbError {
    #[error("parent array has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("parent {parent} of vertex {child} out of range")]
    ParentOutOfRange { child: usize, parent: usize },
    #[error("no root: every vertex has a parent")]
    NoRoot,
    #[error("root has a parent")]
    RootHasParent,
    #[error("vertex {0} has no parent")]
    MissingParent(usize),
    #[error("arc ({0}, {1}) not in host graph")]
    NotSubgraph(usize, usize),
    #[error("vertex {0} not reachable from root")]
    Unreachable(usize),
}

impl Arborescence {
    /// Builds an arborescence from a parent array with exactly one `None`
    /// entry. Structural semantics against a host graph are checked by
    /// [`verify_arborescence`].
    pub fn from_parents(parent: Vec<Option<usize>>) -> Result<Self, ArbError> {
        let n = parent.len();
        let mut root = None;
        for (v, p) in parent.iter().enumerate() {
            match p {
                None => {
                    if root.is_some() {
                        return Err(ArbError::MissingParent(v));
                    }
                    root = Some(v);
                }
                Some(u) if *u >= n => {
                    return Err(ArbError::ParentOutOfRange {
                        child: v,
                        parent: *u,
                    })
                }
                _ => {}
            }
        }
        if root.is_none() {
            return Err(ArbError::NoRoot);
        }
        let mut child_count = vec![0usize; n];
        for p in parent.iter().flatten() {
            child_count[*p] += 1;
        }
        let leaf_count = child_count.iter().filter(|&&c| c == 0).count();
        Ok(Arborescence { parent, leaf_count })
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// The unique vertex without a parent.
    pub fn root(&self) -> usize {
        self.parent.iter().position(|p| p.is_none()).unwrap()
    }

    /// Number of children per vertex (the out-degrees in the tree).
    pub fn child_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.parent.len()];
        for p in self.parent.iter().flatten() {
            counts[*p] += 1;
        }
        counts
    }
}

/// Accepts iff the parent array matches `g`'s root, every non-root vertex
/// has exactly one entering tree arc that exists in `g`, and every vertex is
/// reachable from the root through the tree. On acyclic hosts the entering-
/// arc conditions already imply reachability; it is rechecked anyway.
pub fn verify_arborescence(g: &Digraph, t: &Arborescence) -> Result<(), ArbError> {
    if t.n() != g.n() {
        return Err(ArbError::WrongLength {
            expected: g.n(),
            got: t.n(),
        });
    }
    if t.parent(g.root()).is_some() {
        return Err(ArbError::RootHasParent);
    }
    for v in 0..g.n() {
        if v == g.root() {
            continue;
        }
        match t.parent(v) {
            None => return Err(ArbError::MissingParent(v)),
            Some(u) => {
                if !g.has_arc(u, v) {
                    return Err(ArbError::NotSubgraph(u, v));
                }
            }
        }
    }
    let mut children = vec![Vec::new(); g.n()];
    for v in 0..g.n() {
        if let Some(u) = t.parent(v) {
            children[u].push(v);
        }
    }
    let mut reached = vec![false; g.n()];
    let mut queue = VecDeque::from([g.root()]);
    reached[g.root()] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &children[u] {
            if !reached[v] {
                reached[v] = true;
                queue.push_back(v);
            }
        }
    }
    if let Some(v) = reached.iter().position(|&r| !r) {
        return Err(ArbError::Unreachable(v));
    }
    Ok(())
}

/// Number of leaves: vertices without children.
pub fn count_leaves(t: &Arborescence) -> usize {
    t.leaf_count
}

/// The same quantity computed along the second route,
/// `1 + sum over non-leaves of (out-degree - 1)`.
pub fn leaf_count_formula(t: &Arborescence) -> usize {
    1 + t
        .child_counts()
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| c - 1)
        .sum::<usize>()
}

/// Parse failure for the text formats, with a 1-based line number.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn parse_err(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError {
        line,
        msg: msg.into(),
    }
}

/// Content lines of a text file: comments (`#` to end of line) stripped,
/// blanks skipped, paired with their original line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

/// Reads the `.dag` format: a header `n m r`, then `m` arc lines `u v`.
pub fn parse_dag(text: &str) -> Result<Digraph, ParseError> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty file"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(parse_err(ln, "expected header `n m r`"));
    }
    let parse_num = |s: &str, ln: usize| {
        s.parse::<usize>()
            .map_err(|_| parse_err(ln, format!("bad number `{s}`")))
    };
    let n = parse_num(fields[0], ln)?;
    let m = parse_num(fields[1], ln)?;
    let root = parse_num(fields[2], ln)?;
    let mut arcs = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {m} arcs")))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(ln, "expected arc `u v`"));
        }
        arcs.push((parse_num(fields[0], ln)?, parse_num(fields[1], ln)?));
    }
    if let Some((ln, _)) = lines.next() {
        return Err(parse_err(ln, "trailing content after arc list"));
    }
    Digraph::new(n, root, arcs).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_dag(g: &Digraph) -> String {
    let mut out = format!("{} {} {}\n", g.n(), g.arcs().len(), g.root());
    for &(u, v) in g.arcs() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Reads the `.arb` format: one line `v parent` per vertex, `-1` at the root.
pub fn parse_arb(text: &str) -> Result<Arborescence, ParseError> {
    let entries: Vec<(usize, usize, i64)> = content_lines(text)
        .map(|(ln, line)| {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(ln, "expected `v parent`"));
            }
            let v = fields[0]
                .parse::<usize>()
                .map_err(|_| parse_err(ln, format!("bad vertex `{}`", fields[0])))?;
            let p = fields[1]
                .parse::<i64>()
                .map_err(|_| parse_err(ln, format!("bad parent `{}`", fields[1])))?;
            Ok((ln, v, p))
        })
        .collect::<Result<_, _>>()?;
    let n = entries.len();
    let mut parent: Vec<Option<Option<usize>>> = vec![None; n];
    for (ln, v, p) in entries {
        if v >= n {
            return Err(parse_err(
                ln,
                format!("vertex {v} out of range for {n} lines"),
            ));
        }
        if parent[v].is_some() {
            return Err(parse_err(ln, format!("vertex {v} listed twice")));
        }
        parent[v] = Some(match p {
            -1 => None,
            p if p >= 0 && (p as usize) < n => Some(p as usize),
            _ => return Err(parse_err(ln, format!("parent {p} out of range"))),
        });
    }
    let parent: Vec<Option<usize>> = parent.into_iter().map(|p| p.unwrap()).collect();
    Arborescence::from_parents(parent).map_err(|e| parse_err(0, e.to_string()))
}

pub fn write_arb(t: &Arborescence) -> String {
    let mut out = String::new();
    for v in 0..t.n() {
        let p = t.parent(v).map(|u| u as i64).unwrap_or(-1);
        out.push_str(&format!("{v} {p}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{broadcast_tree, broadcast_tree_graph, broadcast_graph};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn path3() -> Digraph {
        // r -> a -> b
        Digraph::new(3, 0, vec![(0, 1), (1, 2)]).unwrap()
    }

    fn star() -> Digraph {
        Digraph::new(4, 0, vec![(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn validate_smallest_instance() {
        let g = Digraph::new(1, 0, vec![]).unwrap();
        assert_eq!(validate_instance(&g), Ok(()));
    }

    #[test]
    fn validate_path() {
        assert_eq!(validate_instance(&path3()), Ok(()));
    }

    #[test]
    fn validate_two_cycle() {
        let g = Digraph::new(3, 0, vec![(0, 1), (1, 2), (2, 1)]).unwrap();
        match validate_instance(&g) {
            Err(InstanceError::CycleFound(mut cycle)) => {
                cycle.sort_unstable();
                assert_eq!(cycle, vec![1, 2]);
            }
            other => panic!("expected cycle, got {other:?}"),
        }
    }

    #[test]
    fn validate_rejects_self_loop_and_duplicate() {
        let g = Digraph::new(2, 0, vec![(0, 1), (1, 1)]).unwrap();
        assert_eq!(validate_instance(&g), Err(InstanceError::SelfLoop(1)));
        let g = Digraph::new(2, 0, vec![(0, 1), (0, 1)]).unwrap();
        assert_eq!(
            validate_instance(&g),
            Err(InstanceError::DuplicateArc(0, 1))
        );
    }

    #[test]
    fn validate_unreachable() {
        let g = Digraph::new(3, 0, vec![(0, 1)]).unwrap();
        assert_eq!(validate_instance(&g), Err(InstanceError::Unreachable(2)));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(Digraph::new(0, 0, vec![]), Err(GraphError::Empty));
        assert_eq!(
            Digraph::new(2, 5, vec![]),
            Err(GraphError::RootOutOfRange(5))
        );
        assert_eq!(
            Digraph::new(2, 0, vec![(0, 7)]),
            Err(GraphError::ArcOutOfRange(0, 7))
        );
    }

    #[test]
    fn verify_path_arborescence() {
        let g = path3();
        let t = Arborescence::from_parents(vec![None, Some(0), Some(1)]).unwrap();
        assert_eq!(verify_arborescence(&g, &t), Ok(()));
    }

    #[test]
    fn verify_rejects_non_subgraph() {
        let g = path3();
        let t = Arborescence::from_parents(vec![None, Some(0), Some(0)]).unwrap();
        assert_eq!(
            verify_arborescence(&g, &t),
            Err(ArbError::NotSubgraph(0, 2))
        );
    }

    #[test]
    fn verify_broadcast_tree() {
        let g = broadcast_graph();
        assert_eq!(validate_instance(&g), Ok(()));
        let t = broadcast_tree();
        assert_eq!(verify_arborescence(&g, &t), Ok(()));
        // The bold arcs alone are a valid host graph too.
        assert_eq!(verify_arborescence(&broadcast_tree_graph(), &t), Ok(()));
    }

    #[test]
    fn verify_root_parent_and_missing() {
        let g = path3();
        let t = Arborescence::from_parents(vec![Some(1), None, Some(1)]).unwrap();
        assert_eq!(verify_arborescence(&g, &t), Err(ArbError::RootHasParent));
    }

    #[test]
    fn leaves_single_vertex() {
        let t = Arborescence::from_parents(vec![None]).unwrap();
        assert_eq!(count_leaves(&t), 1);
        assert_eq!(leaf_count_formula(&t), 1);
    }

    #[test]
    fn leaves_broadcast_tree() {
        let t = broadcast_tree();
        assert_eq!(count_leaves(&t), 6);
        assert_eq!(leaf_count_formula(&t), 6);
    }

    #[test]
    fn leaves_star() {
        let g = star();
        let t = Arborescence::from_parents(vec![None, Some(0), Some(0), Some(0)]).unwrap();
        assert_eq!(verify_arborescence(&g, &t), Ok(()));
        assert_eq!(count_leaves(&t), 3);
    }

    use crate::fixtures::random_arborescence;

    #[test]
    fn leaf_formula_matches_direct_count_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=14);
            let g = crate::generators::gen_random_dag(n, 0.4, rng.gen());
            let t = random_arborescence(&g, &mut rng);
            assert_eq!(verify_arborescence(&g, &t), Ok(()));
            assert_eq!(count_leaves(&t), leaf_count_formula(&t));
        }
    }

    #[test]
    fn out_neighborhoods_partition_non_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..100 {
            let n = rng.gen_range(2..=12);
            let g = crate::generators::gen_random_dag(n, 0.5, rng.gen());
            let t = random_arborescence(&g, &mut rng);
            let mut seen = vec![false; n];
            for (v, covered) in seen.iter_mut().enumerate() {
                if t.parent(v).is_some() {
                    assert!(!*covered);
                    *covered = true;
                }
            }
            for (v, covered) in seen.iter().enumerate() {
                assert_eq!(*covered, v != g.root());
            }
        }
    }

    #[test]
    fn formula_sum_monotone_under_arc_deletion() {
        // For T' a subgraph of T, the non-leaf out-degree sum cannot grow.
        let sum_of =
            |counts: &[usize]| -> usize { counts.iter().filter(|&&c| c > 0).map(|&c| c - 1).sum() };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let n = rng.gen_range(2..=12);
            let g = crate::generators::gen_random_dag(n, 0.5, rng.gen());
            let t = random_arborescence(&g, &mut rng);
            let mut counts = t.child_counts();
            let full = sum_of(&counts);
            // delete random tree arcs one by one
            let mut vertices: Vec<usize> = (0..n).filter(|&v| t.parent(v).is_some()).collect();
            vertices.shuffle(&mut rng);
            let mut prev = full;
            for v in vertices {
                counts[t.parent(v).unwrap()] -= 1;
                let cur = sum_of(&counts);
                assert!(cur <= prev);
                prev = cur;
            }
        }
    }

    #[test]
    fn dag_format_round_trip() {
        let g = broadcast_graph();
        let text = write_dag(&g);
        let back = parse_dag(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn dag_format_comments_and_errors() {
        let text = "# a path\n3 2 0\n0 1 # first arc\n\n1 2\n";
        let g = parse_dag(text).unwrap();
        assert_eq!(g.arcs(), &[(0, 1), (1, 2)]);

        assert!(parse_dag("").is_err());
        assert!(parse_dag("3 2\n0 1\n1 2\n").is_err());
        let err = parse_dag("3 2 0\n0 x\n1 2\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(parse_dag("3 1 0\n0 1\n1 2\n").is_err());
    }

    #[test]
    fn arb_format_round_trip() {
        let t = broadcast_tree();
        let text = write_arb(&t);
        assert_eq!(parse_arb(&text).unwrap(), t);

        // order-independent
        let shuffled = "2 0\n0 -1\n1 0\n";
        let t = parse_arb(shuffled).unwrap();
        assert_eq!(t.parent(2), Some(0));
        assert_eq!(t.root(), 0);

        assert!(parse_arb("0 -1\n0 -1\n").is_err());
        assert!(parse_arb("0 -1\n1 9\n").is_err());
        assert!(parse_arb("0 0\n1 0\n").is_err()); // no root
    }
}
