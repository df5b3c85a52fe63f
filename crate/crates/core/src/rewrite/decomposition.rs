use alloc::collections::{BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{require_valid, Match, RewriteError, RewriteResult, RewriteRuleId, RewriteStats};
use crate::ipcg::{kinds, Characteristics, Contract, Ipcg, PatternNode, PatternType};
use crate::units::Mb;

/// Roles: `source` and `target` are the ends of the crossing channel,
/// `cloud` the maximal connected non-shareable subgraph on the
/// non-shareable side.
pub(super) fn find(rule: RewriteRuleId, g: &Ipcg) -> Vec<Match> {
    let want_source_shareable = rule == RewriteRuleId::ShToNonsh;
    g.edges()
        .iter()
        .filter_map(|e| {
            let u = g.node(&e.from)?;
            let v = g.node(&e.to)?;
            if u.is_plumbing() || v.is_plumbing() {
                return None;
            }
            if u.shareable() != want_source_shareable || v.shareable() == want_source_shareable {
                return None;
            }
            let seed = if want_source_shareable { &v.id } else { &u.id };
            Some(
                Match::new(rule)
                    .bind("source", [u.id.clone()])
                    .bind("target", [v.id.clone()])
                    .bind("cloud", non_shareable_cloud(g, seed)),
            )
        })
        .collect()
}

/// Non-shareable nodes weakly connected to `seed` through non-shareable
/// nodes only.
fn non_shareable_cloud(g: &Ipcg, seed: &str) -> BTreeSet<String> {
    let mut seen = BTreeSet::from([String::from(seed)]);
    let mut queue = VecDeque::from([String::from(seed)]);
    while let Some(id) = queue.pop_front() {
        let neighbours: Vec<String> = g
            .predecessors(&id)
            .chain(g.successors(&id))
            .map(String::from)
            .collect();
        for n in neighbours {
            if g.node(&n).is_some_and(|x| !x.shareable() && !x.is_plumbing()) && seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen
}

fn plumbing(id: &str, t: PatternType, kind: &str, link: Option<&str>) -> PatternNode {
    let mut node = PatternNode::new(id, id, t, Characteristics::simple(Mb::PER_PATTERN)).with_kind(kind);
    node.remote_link = link.map(String::from);
    node
}

/// Replaces the crossing channel `source -> target` by
/// `source -> call -> end` on the caller side and `receiver -> target` on
/// the callee side. All added contracts are unconstrained.
pub(super) fn cut(g: &mut Ipcg, m: &Match) -> ((String, String), RewriteStats) {
    let u = m.single("source").to_string();
    let v = m.single("target").to_string();
    let base = format!("{u}->{v}");
    let call = g.fresh_id(&format!("{base}.call"));
    let end = g.fresh_id(&format!("{base}.end"));
    let recv = g.fresh_id(&format!("{base}.recv"));

    let edges = g.edges_mut();
    let pos = edges.iter().position(|e| e.from == u && e.to == v).unwrap();
    let original = edges.remove(pos);

    g.add_node(plumbing(&call, PatternType::ExternalCall, kinds::REMOTE_CALL, Some(&recv)))
        .unwrap();
    g.add_node(plumbing(&end, PatternType::End, kinds::CALL_END, None)).unwrap();
    g.add_node(plumbing(&recv, PatternType::Start, kinds::EVENT_RECEIVER, Some(&call)))
        .unwrap();
    g.add_edge(&u, &call, original.out_contract, Contract::any()).unwrap();
    g.connect(&call, &end, Contract::any()).unwrap();
    g.add_edge(&recv, &v, Contract::any(), original.in_contract).unwrap();

    let stats = RewriteStats {
        nodes_removed: 0,
        nodes_added: 3,
        capacity_removed: Mb(0),
        capacity_added: Mb(3 * Mb::PER_PATTERN.0),
    };
    ((call, recv), stats)
}

/// Cuts `g` at every shareable/non-shareable boundary: the
/// shareable-to-non-shareable rule first until it no longer matches, then
/// the reverse rule, each time applying the match with the smallest node id.
pub fn decompose(g: &Ipcg) -> Result<RewriteResult, RewriteError> {
    require_valid(g)?;
    let mut work = g.clone();
    let mut links = Vec::new();
    let mut stats = RewriteStats::default();
    for rule in [RewriteRuleId::ShToNonsh, RewriteRuleId::NonshToSh] {
        loop {
            let matches = super::find_matches(rule, &work);
            let Some(m) = matches.first() else { break };
            let (link, s) = cut(&mut work, m);
            links.push(link);
            stats.absorb(s);
        }
    }
    let result = RewriteResult::from_graph(work, &links, stats);
    for graph in &result.graphs {
        let report = crate::ipcg::validate_ipcg(graph);
        if !report.is_correct() {
            return Err(RewriteError::PostConditionViolated(report));
        }
    }
    Ok(result)
}
