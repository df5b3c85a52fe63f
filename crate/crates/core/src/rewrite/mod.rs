//! Correctness-preserving graph rewrites.
//!
//! Four rules are implemented: the two decomposition rules that cut a
//! process at shareable/non-shareable boundaries, and the two improvement
//! rules that combine neighboring enrichers or translators and replace a
//! router in front of same-receiver calls by a routing slip. Every rule is
//! a pair of functions, one finding matches and one applying a match; new
//! rules plug in through [`find_matches`] and [`apply_rule`].

mod combine;
mod decomposition;
mod proposals;
mod routing_slip;
mod verify;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use decomposition::decompose;
pub use proposals::{enumerate_proposals, improve, AppliedRewrite, Pricer, PricingError, Proposal, ProposalAction, ProposalKind};
pub use verify::verify_rewrite;

use crate::ipcg::{validate_ipcg, Ipcg};
use crate::report::ValidationReport;
use crate::units::Mb;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RewriteRuleId {
    ShToNonsh,
    NonshToSh,
    CombineNeighbors,
    RouterToRoutingSlip,
}

impl RewriteRuleId {
    pub const ALL: [RewriteRuleId; 4] = [
        RewriteRuleId::ShToNonsh,
        RewriteRuleId::NonshToSh,
        RewriteRuleId::CombineNeighbors,
        RewriteRuleId::RouterToRoutingSlip,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RewriteRuleId::ShToNonsh => "SH_TO_NONSH",
            RewriteRuleId::NonshToSh => "NONSH_TO_SH",
            RewriteRuleId::CombineNeighbors => "COMBINE_NEIGHBORS",
            RewriteRuleId::RouterToRoutingSlip => "ROUTER_TO_ROUTING_SLIP",
        }
    }

    pub fn parse(s: &str) -> Option<RewriteRuleId> {
        RewriteRuleId::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl fmt::Display for RewriteRuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A match of a rule's left-hand side: role name to bound node ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Match {
    pub rule: RewriteRuleId,
    pub bindings: BTreeMap<String, Vec<String>>,
}

impl Match {
    pub(crate) fn new(rule: RewriteRuleId) -> Self {
        Match {
            rule,
            bindings: BTreeMap::new(),
        }
    }

    pub(crate) fn bind<I, S>(mut self, role: &str, ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.bindings
            .insert(role.into(), ids.into_iter().map(Into::into).collect());
        self
    }

    pub fn role(&self, role: &str) -> &[String] {
        self.bindings.get(role).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn single(&self, role: &str) -> &str {
        self.role(role).first().map(String::as_str).unwrap_or("")
    }

    /// Every bound node id.
    pub fn nodes(&self) -> impl Iterator<Item = &str> {
        self.bindings.values().flatten().map(String::as_str)
    }

    /// Smallest bound node id, the key matches are ordered by.
    pub fn smallest_id(&self) -> &str {
        self.nodes().min().unwrap_or("")
    }
}

/// Caller external call, index of the callee graph, receiver node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RemoteLink {
    pub caller: String,
    pub callee_graph: usize,
    pub receiver: String,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RewriteStats {
    pub nodes_removed: usize,
    pub nodes_added: usize,
    pub capacity_removed: Mb,
    pub capacity_added: Mb,
}

impl RewriteStats {
    pub fn net_nodes_removed(&self) -> i64 {
        self.nodes_removed as i64 - self.nodes_added as i64
    }

    pub(crate) fn absorb(&mut self, other: RewriteStats) {
        self.nodes_removed += other.nodes_removed;
        self.nodes_added += other.nodes_added;
        self.capacity_removed += other.capacity_removed;
        self.capacity_added += other.capacity_added;
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteResult {
    pub graphs: Vec<Ipcg>,
    pub remote_links: Vec<RemoteLink>,
    pub stats: RewriteStats,
}

impl RewriteResult {
    /// Splits a rewritten graph into its components and resolves each
    /// `(caller, receiver)` pair to the component holding the receiver.
    pub(crate) fn from_graph(g: Ipcg, links: &[(String, String)], stats: RewriteStats) -> Self {
        let graphs = g.split_components();
        let remote_links = links
            .iter()
            .filter_map(|(caller, receiver)| {
                graphs
                    .iter()
                    .position(|p| p.contains(receiver))
                    .map(|callee_graph| RemoteLink {
                        caller: caller.clone(),
                        callee_graph,
                        receiver: receiver.clone(),
                    })
            })
            .collect();
        RewriteResult {
            graphs,
            remote_links,
            stats,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RewriteError {
    #[error("match is stale: the graph no longer contains it")]
    MatchStale,
    #[error("rewrite produced an incorrect graph: {0:?}")]
    PostConditionViolated(ValidationReport),
    #[error("input graph is not correct: {0:?}")]
    InvalidInput(ValidationReport),
    #[error(transparent)]
    Pricing(PricingError),
}

/// All matches of `rule` in `g`, ordered by smallest bound node id.
pub fn find_matches(rule: RewriteRuleId, g: &Ipcg) -> Vec<Match> {
    let mut matches = match rule {
        RewriteRuleId::ShToNonsh | RewriteRuleId::NonshToSh => decomposition::find(rule, g),
        RewriteRuleId::CombineNeighbors => combine::find(g),
        RewriteRuleId::RouterToRoutingSlip => routing_slip::find(g),
    };
    matches.sort_by(|a, b| {
        a.smallest_id()
            .cmp(b.smallest_id())
            .then_with(|| a.bindings.cmp(&b.bindings))
    });
    matches
}

/// Applies one match. The match must still be among
/// `find_matches(rule, g)`; every result graph is re-validated.
pub fn apply_rule(rule: RewriteRuleId, m: &Match, g: &Ipcg) -> Result<RewriteResult, RewriteError> {
    if m.rule != rule || !find_matches(rule, g).contains(m) {
        return Err(RewriteError::MatchStale);
    }
    let result = apply_unchecked(m, g);
    for graph in &result.graphs {
        let report = validate_ipcg(graph);
        if !report.is_correct() {
            return Err(RewriteError::PostConditionViolated(report));
        }
    }
    Ok(result)
}

pub(crate) fn apply_unchecked(m: &Match, g: &Ipcg) -> RewriteResult {
    match m.rule {
        RewriteRuleId::ShToNonsh | RewriteRuleId::NonshToSh => {
            let mut out = g.clone();
            let (link, stats) = decomposition::cut(&mut out, m);
            RewriteResult::from_graph(out, &[link], stats)
        }
        RewriteRuleId::CombineNeighbors => {
            let mut out = g.clone();
            let stats = combine::apply(&mut out, m);
            RewriteResult::from_graph(out, &[], stats)
        }
        RewriteRuleId::RouterToRoutingSlip => {
            let mut out = g.clone();
            let stats = routing_slip::apply(&mut out, m);
            RewriteResult::from_graph(out, &[], stats)
        }
    }
}

pub(crate) fn require_valid(g: &Ipcg) -> Result<(), RewriteError> {
    let report = validate_ipcg(g);
    if report.is_correct() {
        Ok(())
    } else {
        Err(RewriteError::InvalidInput(report))
    }
}
