//! Shared helpers for the integration suites.
#![allow(dead_code)] // each test target compiles its own copy

use rand::prelude::*;

use mlsa::digraph::{Arborescence, Digraph};
use mlsa::local_search::enumerate_candidates;
use mlsa::packing::{family_from_sets, ElemSet, Packing, SetFamily};

/// The 12-vertex broadcast example: tree arcs plus extra arcs.
/// Vertex key: r=0, then a..k as 1..=11.
pub fn broadcast_graph() -> Digraph {
    let arcs = vec![
        // tree
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
        // extras
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
    ];
    Digraph::new(12, 0, arcs).unwrap()
}

/// Random spanning arborescence: every non-root vertex picks a random
/// in-neighbor.
pub fn random_arborescence(g: &Digraph, rng: &mut impl Rng) -> Arborescence {
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

/// Random 3-bounded hereditary family with at most `max_candidates`
/// materialized candidates.
pub fn random_family_capped(
    rng: &mut impl Rng,
    max_ground: usize,
    max_sets: usize,
    max_candidates: usize,
) -> SetFamily {
    loop {
        let ground = rng.gen_range(3..=max_ground);
        let count = rng.gen_range(1..=max_sets);
        let raw: Vec<ElemSet> = (0..count)
            .map(|_| {
                let len = rng.gen_range(2..=3);
                let mut v: Vec<usize> = (0..ground).collect();
                v.shuffle(rng);
                ElemSet::new(v[..len.min(ground)].to_vec())
            })
            .collect();
        let f = family_from_sets(ground, raw).unwrap();
        if enumerate_candidates(&f).unwrap().len() <= max_candidates {
            return f;
        }
    }
}

/// Random feasible packing: greedy over shuffled candidates, each kept with
/// probability 0.7.
pub fn random_packing_of(f: &SetFamily, rng: &mut impl Rng) -> Packing {
    let uni = enumerate_candidates(f).unwrap();
    let mut order: Vec<usize> = (0..uni.len()).collect();
    order.shuffle(rng);
    let mut p = Packing::empty(f.ground_size());
    for c in order {
        if rng.gen_bool(0.7) {
            let _ = p.insert(uni.sets()[c].clone());
        }
    }
    p
}

/// Random feasible packing of a graph's out-neighborhood family.
pub fn random_dag_packing(g: &Digraph, rng: &mut impl Rng) -> Packing {
    let f = mlsa::reduction::family_from_dag(g);
    let mut p = Packing::empty(f.ground_size());
    let mut sets: Vec<ElemSet> = f.maximal_sets().to_vec();
    sets.shuffle(rng);
    for m in sets {
        let mut elems: Vec<usize> = m.iter().filter(|&e| p.owner(e).is_none()).collect();
        if elems.len() < 2 {
            continue;
        }
        elems.shuffle(rng);
        let keep = rng.gen_range(2..=elems.len());
        if rng.gen_bool(0.8) {
            p.insert(ElemSet::new(elems[..keep].to_vec())).unwrap();
        }
    }
    p
}
