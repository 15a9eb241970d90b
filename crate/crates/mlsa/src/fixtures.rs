//! Shared test graphs: the 12-vertex broadcast example used across modules.
//!
//! Vertex key: r=0, and the remaining vertices 1..=11 in the order
//! a, b, c, d, e, f, g, h, i, j, k.

use rand::prelude::*;

use crate::digraph::{Arborescence, Digraph};

/// Random spanning arborescence of a valid rooted DAG: every non-root vertex
/// picks one of its in-neighbors as parent.
pub(crate) fn random_arborescence(g: &Digraph, rng: &mut impl Rng) -> Arborescence {
    let parent = (0..g.n())
        .map(|v| {
            if v == g.root() {
                None
            } else {
                Some(*g.in_neighbors(v).choose(rng).unwrap())
            }
        })
        .collect();
    Arborescence::from_parents(parent).unwrap()
}

pub(crate) fn broadcast_tree_arcs() -> Vec<(usize, usize)> {
    vec![
        (0, 1),
        (0, 2),
        (1, 3),
        (1, 4),
        (1, 5),
        (2, 6),
        (2, 7),
        (3, 8),
        (3, 9),
        (5, 10),
        (6, 11),
    ]
}

pub(crate) fn broadcast_extra_arcs() -> Vec<(usize, usize)> {
    vec![
        (1, 2),
        (4, 2),
        (4, 11),
        (9, 8),
        (10, 9),
        (4, 8),
        (11, 10),
        (6, 10),
        (11, 9),
        (6, 7),
        (7, 11),
        (0, 7),
    ]
}

/// The tree arcs only.
pub(crate) fn broadcast_tree_graph() -> Digraph {
    Digraph::new(12, 0, broadcast_tree_arcs()).unwrap()
}

/// Tree plus the extra arcs.
pub(crate) fn broadcast_graph() -> Digraph {
    let mut arcs = broadcast_tree_arcs();
    arcs.extend(broadcast_extra_arcs());
    Digraph::new(12, 0, arcs).unwrap()
}

/// The 6-leaf spanning arborescence formed by the bold arcs.
pub(crate) fn broadcast_tree() -> Arborescence {
    let mut parent = vec![None; 12];
    for (u, v) in broadcast_tree_arcs() {
        parent[v] = Some(u);
    }
    Arborescence::from_parents(parent).unwrap()
}
