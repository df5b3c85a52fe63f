use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{apply_unchecked, decompose, find_matches, require_valid, Match, RewriteError, RewriteRuleId, RewriteStats};
use crate::ipcg::{validate_ipcg, Ipcg};
use crate::units::Cents;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("pricing failed: {0}")]
pub struct PricingError(pub String);

/// Monthly cost of running a set of processes.
pub trait Pricer {
    fn price(&self, graphs: &[Ipcg]) -> Result<Cents, PricingError>;
}

impl<F> Pricer for F
where
    F: Fn(&[Ipcg]) -> Result<Cents, PricingError>,
{
    fn price(&self, graphs: &[Ipcg]) -> Result<Cents, PricingError> {
        self(graphs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProposalKind {
    ShToNonsh,
    NonshToSh,
    CombineNeighbors,
    RouterToRoutingSlip,
    Decompose,
}

impl ProposalKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProposalKind::ShToNonsh => "SH_TO_NONSH",
            ProposalKind::NonshToSh => "NONSH_TO_SH",
            ProposalKind::CombineNeighbors => "COMBINE_NEIGHBORS",
            ProposalKind::RouterToRoutingSlip => "ROUTER_TO_ROUTING_SLIP",
            ProposalKind::Decompose => "DECOMPOSE",
        }
    }

    fn of(rule: RewriteRuleId) -> ProposalKind {
        match rule {
            RewriteRuleId::ShToNonsh => ProposalKind::ShToNonsh,
            RewriteRuleId::NonshToSh => ProposalKind::NonshToSh,
            RewriteRuleId::CombineNeighbors => ProposalKind::CombineNeighbors,
            RewriteRuleId::RouterToRoutingSlip => ProposalKind::RouterToRoutingSlip,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProposalAction {
    Apply(Match),
    Decompose,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proposal {
    pub id: String,
    pub kind: ProposalKind,
    pub action: ProposalAction,
    pub cost_before: Cents,
    pub cost_after: Cents,
    /// Net change in node count; negative when nodes are added.
    pub nodes_removed: i64,
    pub description: String,
    pub preview: Vec<Ipcg>,
}

impl Proposal {
    pub fn savings(&self) -> Cents {
        self.cost_before.saturating_sub(self.cost_after)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AppliedRewrite {
    pub rule: RewriteRuleId,
    pub matched: Match,
    pub stats: RewriteStats,
}

fn describe(m: &Match) -> String {
    let parts: Vec<String> = m
        .bindings
        .iter()
        .map(|(role, ids)| format!("{role}=[{}]", ids.join(", ")))
        .collect();
    format!("{} {}", m.rule, parts.join(" "))
}

/// Every applicable rewrite of `g` (single rule applications and the full
/// decomposition) that does not raise the cost, best savings first, then
/// fewer removed nodes, then rule order. Candidates the pricer rejects
/// are left out.
pub fn enumerate_proposals(g: &Ipcg, pricer: &dyn Pricer) -> Result<Vec<Proposal>, RewriteError> {
    enumerate_with(g, pricer, true)
}

pub(crate) fn enumerate_with(g: &Ipcg, pricer: &dyn Pricer, include_decompose: bool) -> Result<Vec<Proposal>, RewriteError> {
    require_valid(g)?;
    let cost_before = pricer
        .price(core::slice::from_ref(g))
        .map_err(RewriteError::Pricing)?;
    let mut out = Vec::new();
    for rule in RewriteRuleId::ALL {
        for m in find_matches(rule, g) {
            let result = apply_unchecked(&m, g);
            if result.graphs.iter().any(|p| !validate_ipcg(p).is_correct()) {
                continue;
            }
            let Ok(cost_after) = pricer.price(&result.graphs) else { continue };
            out.push(Proposal {
                id: String::new(),
                kind: ProposalKind::of(rule),
                description: describe(&m),
                action: ProposalAction::Apply(m),
                cost_before,
                cost_after,
                nodes_removed: result.stats.net_nodes_removed(),
                preview: result.graphs,
            });
        }
    }
    if include_decompose && !find_matches(RewriteRuleId::ShToNonsh, g).is_empty()
        || include_decompose && !find_matches(RewriteRuleId::NonshToSh, g).is_empty()
    {
        if let Ok(result) = decompose(g) {
            if let Ok(cost_after) = pricer.price(&result.graphs) {
                out.push(Proposal {
                    id: String::new(),
                    kind: ProposalKind::Decompose,
                    action: ProposalAction::Decompose,
                    cost_before,
                    cost_after,
                    nodes_removed: result.stats.net_nodes_removed(),
                    description: format!("DECOMPOSE into {} processes", result.graphs.len()),
                    preview: result.graphs,
                });
            }
        }
    }
    out.retain(|p| p.cost_after <= p.cost_before);
    out.sort_by(|a, b| {
        b.savings()
            .cmp(&a.savings())
            .then(a.nodes_removed.cmp(&b.nodes_removed))
            .then(a.kind.cmp(&b.kind))
    });
    for (i, p) in out.iter_mut().enumerate() {
        p.id = format!("p{i}");
    }
    Ok(out)
}

/// Applies the improvement rules to a fixpoint: neighbor combination
/// until it no longer matches, then routing slips, repeated while either
/// applies. Matches are taken smallest node id first.
pub fn improve(g: &Ipcg) -> Result<(Ipcg, Vec<AppliedRewrite>), RewriteError> {
    require_valid(g)?;
    let mut work = g.clone();
    let mut applied = Vec::new();
    loop {
        let mut changed = false;
        for rule in [RewriteRuleId::CombineNeighbors, RewriteRuleId::RouterToRoutingSlip] {
            while let Some(m) = find_matches(rule, &work).into_iter().next() {
                let mut result = apply_unchecked(&m, &work);
                if result.graphs.len() != 1 {
                    return Err(RewriteError::PostConditionViolated(validate_ipcg(&work)));
                }
                let next = result.graphs.remove(0);
                let report = validate_ipcg(&next);
                if !report.is_correct() {
                    return Err(RewriteError::PostConditionViolated(report));
                }
                work = next;
                applied.push(AppliedRewrite {
                    rule,
                    matched: m,
                    stats: result.stats,
                });
                changed = true;
            }
        }
        if !changed {
            return Ok((work, applied));
        }
    }
}
