use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use super::{Ipcg, PatternNode};

/// Attributes a bijection must preserve. Ids, display names and remote links
/// are identities rather than attributes and are ignored.
fn same_attributes(a: &PatternNode, b: &PatternNode) -> bool {
    a.pattern_type == b.pattern_type
        && a.characteristics == b.characteristics
        && a.kind == b.kind
        && a.receiver == b.receiver
}

/// Whether a bijection between the patterns of `g1` and `g2` exists that
/// preserves edges, types, characteristics and contracts.
pub fn isomorphic(g1: &Ipcg, g2: &Ipcg) -> bool {
    if g1.len() != g2.len() || g1.edges().len() != g2.edges().len() {
        return false;
    }
    let ids1: Vec<&str> = search_order(g1);
    let ids2: Vec<&str> = g2.nodes().map(|n| n.id.as_str()).collect();

    let candidates: Vec<Vec<&str>> = ids1
        .iter()
        .map(|&u| {
            let nu = g1.node(u).unwrap();
            ids2.iter()
                .copied()
                .filter(|&v| {
                    same_attributes(nu, g2.node(v).unwrap())
                        && g1.in_degree(u) == g2.in_degree(v)
                        && g1.out_degree(u) == g2.out_degree(v)
                })
                .collect()
        })
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return false;
    }

    let mut mapping: BTreeMap<&str, &str> = BTreeMap::new();
    let mut used: BTreeSet<&str> = BTreeSet::new();
    extend(g1, g2, &ids1, &candidates, 0, &mut mapping, &mut used)
}

/// Visits nodes so that each one (after the first of its component) is
/// adjacent to an already mapped node, which prunes early.
fn search_order(g: &Ipcg) -> Vec<&str> {
    let mut order = Vec::with_capacity(g.len());
    let mut seen = BTreeSet::new();
    for root in g.nodes() {
        if !seen.insert(root.id.as_str()) {
            continue;
        }
        let mut stack = alloc::vec![root.id.as_str()];
        while let Some(id) = stack.pop() {
            order.push(id);
            for e in g.edges() {
                let other = if e.from == id {
                    e.to.as_str()
                } else if e.to == id {
                    e.from.as_str()
                } else {
                    continue;
                };
                if seen.insert(other) {
                    stack.push(other);
                }
            }
        }
    }
    order
}

fn extend<'a>(
    g1: &'a Ipcg,
    g2: &'a Ipcg,
    order: &[&'a str],
    candidates: &[Vec<&'a str>],
    depth: usize,
    mapping: &mut BTreeMap<&'a str, &'a str>,
    used: &mut BTreeSet<&'a str>,
) -> bool {
    if depth == order.len() {
        return true;
    }
    let u = order[depth];
    for &v in &candidates[depth] {
        if used.contains(v) || !consistent(g1, g2, u, v, mapping) {
            continue;
        }
        mapping.insert(u, v);
        used.insert(v);
        if extend(g1, g2, order, candidates, depth + 1, mapping, used) {
            return true;
        }
        mapping.remove(u);
        used.remove(v);
    }
    false
}

/// Edges between `u` and already mapped nodes must correspond one to one,
/// contracts included.
fn consistent(g1: &Ipcg, g2: &Ipcg, u: &str, v: &str, mapping: &BTreeMap<&str, &str>) -> bool {
    for (&w1, &w2) in mapping.iter() {
        for (a1, b1, a2, b2) in [(u, w1, v, w2), (w1, u, w2, v)] {
            match (g1.edge(a1, b1), g2.edge(a2, b2)) {
                (None, None) => {}
                (Some(e1), Some(e2)) => {
                    if e1.out_contract != e2.out_contract || e1.in_contract != e2.in_contract {
                        return false;
                    }
                }
                _ => return false,
            }
        }
    }
    true
}
