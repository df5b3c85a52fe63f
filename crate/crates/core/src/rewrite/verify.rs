use super::RewriteResult;
use crate::ipcg::{validate_ipcg, Ipcg, PatternType};
use crate::units::Mb;

/// Checks the invariants every rewrite has to keep: each result graph is
/// correct, every remote link joins an external call to the start node it
/// names, and node count and capacity change exactly by the recorded stats.
pub fn verify_rewrite(before: &Ipcg, after: &RewriteResult) -> bool {
    if after.graphs.iter().any(|g| g.tenant() != before.tenant() || !validate_ipcg(g).is_correct()) {
        return false;
    }
    let links_ok = after.remote_links.iter().all(|link| {
        let caller = after
            .graphs
            .iter()
            .find_map(|g| g.node(&link.caller));
        let receiver = after
            .graphs
            .get(link.callee_graph)
            .and_then(|g| g.node(&link.receiver));
        match (caller, receiver) {
            (Some(c), Some(r)) => {
                c.pattern_type == PatternType::ExternalCall
                    && c.remote_link.as_deref() == Some(link.receiver.as_str())
                    && r.pattern_type == PatternType::Start
                    && r.remote_link.as_deref() == Some(link.caller.as_str())
            }
            _ => false,
        }
    });
    let s = &after.stats;
    let capacity_after: Mb = after.graphs.iter().map(Ipcg::total_capacity).sum();
    let nodes_after: usize = after.graphs.iter().map(Ipcg::len).sum();
    links_ok
        && capacity_after + s.capacity_removed == before.total_capacity() + s.capacity_added
        && nodes_after + s.nodes_removed == before.len() + s.nodes_added
}
