use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use super::{Match, RewriteRuleId, RewriteStats};
use crate::ipcg::{kinds, Access, Contract, ElementKey, ElementSet, Ipcg, PatternNode, PatternType};
use crate::units::Mb;

type Elements = BTreeSet<(ElementKey, String)>;

fn combinable_kind(n: &PatternNode) -> Option<&str> {
    if n.pattern_type != PatternType::MessageProcessor {
        return None;
    }
    match n.kind.as_deref() {
        Some(k @ (kinds::CONTENT_ENRICHER | kinds::MESSAGE_TRANSLATOR)) => Some(k),
        _ => None,
    }
}

fn fully_specified(c: &Contract) -> bool {
    ElementKey::ALL.iter().all(|&k| !c.element(k).is_any())
}

/// Read and write sets of a 1:1 pattern, from its two contracts.
struct Access1 {
    reads: Elements,
    added: Elements,
    deleted: Elements,
}

fn access_of(g: &Ipcg, id: &str) -> Option<Access1> {
    let inbound = g.in_edges(id).next()?;
    let outbound = g.out_edges(id).next()?;
    if !fully_specified(&inbound.in_contract) || !fully_specified(&outbound.out_contract) {
        return None;
    }
    let reads = inbound.in_contract.elements();
    let writes = outbound.out_contract.elements();
    Some(Access1 {
        added: writes.difference(&reads).cloned().collect(),
        deleted: reads.difference(&writes).cloned().collect(),
        reads,
    })
}

/// `earlier` and `later` cannot run inside one pattern instance.
fn conflict(earlier: &Access1, later: &Access1) -> bool {
    let meets = |a: &Elements, b: &Elements| a.intersection(b).next().is_some();
    meets(&earlier.deleted, &later.reads)
        || meets(&earlier.added, &later.deleted)
        || meets(&earlier.added, &later.added)
        || meets(&earlier.deleted, &later.added)
}

fn eligible(g: &Ipcg, id: &str) -> bool {
    let n = g.node(id).unwrap();
    combinable_kind(n).is_some() && g.in_degree(id) == 1 && g.out_degree(id) == 1 && access_of(g, id).is_some()
}

/// Successor in the same chain: linked 1:1 and of the same kind.
fn chain_next<'a>(g: &'a Ipcg, id: &'a str) -> Option<&'a str> {
    let next = g.successors(id).next()?;
    let same = g.node(next)?.kind == g.node(id)?.kind;
    (same && eligible(g, next)).then_some(next)
}

/// Maximal chains, split greedily where a pattern conflicts with one
/// already in the current run. Runs of two or more are matches.
pub(super) fn find(g: &Ipcg) -> Vec<Match> {
    let mut matches = Vec::new();
    for node in g.nodes() {
        let id = node.id.as_str();
        if !eligible(g, id) {
            continue;
        }
        let head = g
            .predecessors(id)
            .next()
            .is_some_and(|p| eligible(g, p) && chain_next(g, p) == Some(id));
        if head {
            continue;
        }
        let mut chain = alloc::vec![id];
        while let Some(next) = chain_next(g, chain.last().unwrap()) {
            chain.push(next);
        }
        let mut run: Vec<&str> = Vec::new();
        let mut run_access: Vec<Access1> = Vec::new();
        for member in chain {
            let acc = access_of(g, member).unwrap();
            if run_access.iter().any(|earlier| conflict(earlier, &acc)) {
                if run.len() >= 2 {
                    matches.push(Match::new(RewriteRuleId::CombineNeighbors).bind("run", run.iter().copied()));
                }
                run.clear();
                run_access.clear();
            }
            run.push(member);
            run_access.push(acc);
        }
        if run.len() >= 2 {
            matches.push(Match::new(RewriteRuleId::CombineNeighbors).bind("run", run.iter().copied()));
        }
    }
    matches
}

/// Replaces the run by one pattern carrying the first node's id. Its
/// inbound contract reads everything the run reads from outside; its
/// outbound contract is the last node's.
pub(super) fn apply(g: &mut Ipcg, m: &Match) -> RewriteStats {
    let run: Vec<String> = m.role("run").to_vec();
    let nodes: Vec<PatternNode> = run.iter().map(|id| g.node(id).unwrap().clone()).collect();
    let accesses: Vec<Access1> = run.iter().map(|id| access_of(g, id).unwrap()).collect();
    let first = &nodes[0];
    let last = &nodes[nodes.len() - 1];

    let mut merged = first.clone();
    merged.name = nodes.iter().map(|n| n.name.as_str()).collect::<Vec<_>>().join(", ");
    let ch = &mut merged.characteristics;
    ch.capacity = nodes.iter().map(|n| n.capacity()).max().unwrap();
    ch.message_cardinality = (first.characteristics.message_cardinality.0, last.characteristics.message_cardinality.1);
    ch.access = if nodes.iter().any(|n| n.characteristics.access == Access::ReadWrite) {
        Access::ReadWrite
    } else {
        Access::ReadOnly
    };
    ch.message_generating = nodes.iter().any(|n| n.characteristics.message_generating);
    let programs: Vec<&str> = nodes.iter().filter_map(|n| n.characteristics.program.as_deref()).collect();
    ch.program = (!programs.is_empty()).then(|| programs.join("; "));
    ch.shareable = nodes.iter().all(|n| n.shareable());

    let mut in_edge = g.in_edges(&first.id).next().unwrap().clone();
    let out_edge = g.out_edges(&last.id).next().unwrap().clone();

    let mut written: Elements = BTreeSet::new();
    let mut reads = accesses[0].reads.clone();
    for acc in &accesses {
        reads.extend(acc.reads.difference(&written).cloned());
        written.extend(acc.added.iter().cloned());
    }
    for key in ElementKey::ALL {
        let ids: BTreeSet<String> = reads.iter().filter(|(k, _)| *k == key).map(|(_, e)| e.clone()).collect();
        *in_edge.in_contract.element_mut(key) = ElementSet::Exactly(ids);
    }

    let removed_capacity: Mb = nodes.iter().map(|n| n.capacity()).sum();
    for id in &run {
        g.remove_node(id);
    }
    let merged_capacity = merged.capacity();
    let merged_id = merged.id.clone();
    g.add_node(merged).unwrap();
    g.add_edge(&in_edge.from, &merged_id, in_edge.out_contract, in_edge.in_contract)
        .unwrap();
    g.add_edge(&merged_id, &out_edge.to, out_edge.out_contract, out_edge.in_contract)
        .unwrap();

    RewriteStats {
        nodes_removed: run.len(),
        nodes_added: 1,
        capacity_removed: removed_capacity,
        capacity_added: merged_capacity,
    }
}
