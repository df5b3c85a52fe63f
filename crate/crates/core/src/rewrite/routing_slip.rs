use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Match, RewriteRuleId, RewriteStats};
use crate::ipcg::{kinds, Access, Characteristics, ElementSet, Ipcg, PatternNode, PatternType};
use crate::units::Mb;

pub(crate) const SLIP_HEADER: &str = "routing_slip";

fn dangling_end(g: &Ipcg, id: &str) -> bool {
    g.node(id).is_some_and(|n| n.pattern_type == PatternType::End) && g.in_degree(id) == 1
}

fn is_call(g: &Ipcg, id: &str) -> bool {
    g.node(id)
        .is_some_and(|n| n.pattern_type == PatternType::ExternalCall && !n.is_plumbing())
}

fn match_router(g: &Ipcg, router: &PatternNode) -> Option<Match> {
    if router.pattern_type != PatternType::Condition {
        return None;
    }
    let r = router.id.as_str();
    let mut calls = Vec::new();
    let mut ends = Vec::new();
    for next in g.successors(r) {
        if is_call(g, next) {
            calls.push(next);
        } else if dangling_end(g, next) {
            ends.push(next);
        } else {
            return None;
        }
    }
    let first = g.node(calls.first()?)?;
    let receiver = first.receiver.as_ref()?;
    let in_contract = &g.edge(r, &first.id)?.in_contract;
    let mut successor: Option<&str> = None;
    for &c in &calls {
        let node = g.node(c)?;
        if node.receiver.as_ref() != Some(receiver) || &g.edge(r, c)?.in_contract != in_contract {
            return None;
        }
        if g.out_degree(c) != 1 {
            return None;
        }
        let s = g.successors(c).next()?;
        if successor.is_some_and(|prev| prev != s) {
            return None;
        }
        successor = Some(s);
    }
    let s = successor?;
    let s_node = g.node(s)?;

    let joined_by_calls = s_node.pattern_type == PatternType::StructuralJoin
        && g.in_degree(s) == calls.len()
        && g.predecessors(s).all(|p| calls.contains(&p));
    let mut m = Match::new(RewriteRuleId::RouterToRoutingSlip)
        .bind("router", [r])
        .bind("calls", calls.iter().copied())
        .bind("ends", ends.iter().copied());
    let removed = 1 + calls.len() + ends.len();
    if joined_by_calls {
        let t = g.successors(s).next()?;
        m = m.bind("join", [s]).bind("successor", [t]);
        (removed + 1 > 2).then_some(m)
    } else {
        let keeps_shape = g.in_degree(s) == calls.len()
            && (calls.len() == 1 || s_node.pattern_type == PatternType::End);
        (keeps_shape && removed > 2).then(|| m.bind("successor", [s]))
    }
}

/// Condition nodes whose branches all call the same receiver with equal
/// input, or end immediately, and then meet again.
pub(super) fn find(g: &Ipcg) -> Vec<Match> {
    g.nodes().filter_map(|n| match_router(g, n)).collect()
}

/// Replaces the router by a content enricher writing a routing slip and
/// its branches by one call driven by that slip.
pub(super) fn apply(g: &mut Ipcg, m: &Match) -> RewriteStats {
    let r = m.single("router").to_string();
    let calls: Vec<String> = m.role("calls").to_vec();
    let ends: Vec<String> = m.role("ends").to_vec();
    let join = m.role("join").first().cloned();
    let successor = m.single("successor").to_string();

    let router = g.node(&r).unwrap().clone();
    let in_edge = g.in_edges(&r).next().unwrap().clone();
    let branches: Vec<(String, String)> = router
        .characteristics
        .conditions
        .iter()
        .zip(g.out_edges(&r))
        .filter(|(_, e)| calls.contains(&e.to))
        .map(|(cond, e)| {
            let endpoint = g.node(&e.to).unwrap().remote_link.clone().unwrap_or_else(|| e.to.clone());
            (cond.clone(), endpoint)
        })
        .collect();
    let slip: Vec<String> = branches.iter().map(|(c, e)| format!("{c} => {e}")).collect();

    let call = g.node(&calls[0]).unwrap().clone();
    let mut call_in = g.edge(&r, &call.id).unwrap().clone();
    for c in [&mut call_in.out_contract, &mut call_in.in_contract] {
        if let ElementSet::Exactly(hdr) = &mut c.hdr {
            hdr.insert(SLIP_HEADER.into());
        }
    }
    let call_out = match &join {
        Some(s) => {
            let via = g.out_edges(s).next().unwrap().clone();
            let mut e = g.edge(&calls[0], s).unwrap().clone();
            e.out_contract = via.out_contract;
            e.in_contract = via.in_contract;
            e
        }
        None => g.edge(&calls[0], &successor).unwrap().clone(),
    };

    let mut removed: Vec<String> = Vec::new();
    removed.push(r.clone());
    removed.extend(calls.iter().cloned());
    removed.extend(ends.iter().cloned());
    removed.extend(join.iter().cloned());
    let capacity_removed: Mb = removed.iter().map(|id| g.node(id).unwrap().capacity()).sum();
    for id in &removed {
        g.remove_node(id);
    }

    let characteristics = Characteristics {
        message_cardinality: (1, 1),
        access: Access::ReadWrite,
        message_generating: false,
        conditions: Vec::new(),
        program: Some(format!("{SLIP_HEADER} := {}", slip.join("; "))),
        capacity: router.capacity(),
        shareable: router.shareable(),
    };
    let enricher = PatternNode::new(r.clone(), router.name.clone(), PatternType::MessageProcessor, characteristics)
        .with_kind(kinds::CONTENT_ENRICHER);
    let capacity_added = enricher.capacity() + call.capacity();
    let call_id = call.id.clone();
    g.add_node(enricher).unwrap();
    g.add_node(call).unwrap();
    g.add_edge(&in_edge.from, &r, in_edge.out_contract, in_edge.in_contract)
        .unwrap();
    g.add_edge(&r, &call_id, call_in.out_contract, call_in.in_contract)
        .unwrap();
    g.add_edge(&call_id, &successor, call_out.out_contract, call_out.in_contract)
        .unwrap();

    RewriteStats {
        nodes_removed: removed.len(),
        nodes_added: 2,
        capacity_removed,
        capacity_added,
    }
}
