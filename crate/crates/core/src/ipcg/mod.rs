//! Integration pattern contract graphs (IPCGs).
//!
//! An IPCG is a directed acyclic graph of integration patterns. Every edge is a
//! message channel and carries two contracts: the outbound contract of its
//! source and the inbound contract of its target. Storing contracts on edges
//! keeps the "one contract per incoming/outgoing edge" arity true by
//! construction; the per-node lists of the JSON format are derived in edge
//! order.

mod analysis;
mod contract;
mod iso;
mod validate;

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use analysis::{analyze_unused_elements, process_capacity, process_shareable, ProcessError};
pub use contract::{match_contracts, ConceptValue, Contract, ElementKey, ElementSet};
pub use iso::isomorphic;
pub use validate::{codes, validate_ipcg, validate_iptg};

use crate::units::Mb;

/// Node kinds that the rewrite rules recognise. The `kind` attribute is free
/// text; these are the values with special meaning.
pub mod kinds {
    pub const CONTENT_ENRICHER: &str = "content-enricher";
    pub const MESSAGE_TRANSLATOR: &str = "message-translator";
    /// External call added when a process is cut.
    pub const REMOTE_CALL: &str = "remote-call";
    /// Event-based receiver added on the callee side of a cut.
    pub const EVENT_RECEIVER: &str = "event-receiver";
    /// End terminating a remote call on the caller side of a cut.
    pub const CALL_END: &str = "call-end";

    pub fn is_plumbing(kind: Option<&str>) -> bool {
        matches!(kind, Some(REMOTE_CALL) | Some(EVENT_RECEIVER) | Some(CALL_END))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternType {
    Start,
    End,
    MessageProcessor,
    Fork,
    StructuralJoin,
    Condition,
    Merge,
    ExternalCall,
}

impl PatternType {
    pub const ALL: [PatternType; 8] = [
        PatternType::Start,
        PatternType::End,
        PatternType::MessageProcessor,
        PatternType::Fork,
        PatternType::StructuralJoin,
        PatternType::Condition,
        PatternType::Merge,
        PatternType::ExternalCall,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PatternType::Start => "start",
            PatternType::End => "end",
            PatternType::MessageProcessor => "message-processor",
            PatternType::Fork => "fork",
            PatternType::StructuralJoin => "structural-join",
            PatternType::Condition => "condition",
            PatternType::Merge => "merge",
            PatternType::ExternalCall => "external-call",
        }
    }

    pub fn parse(s: &str) -> Option<PatternType> {
        PatternType::ALL.into_iter().find(|t| t.as_str() == s)
    }

    /// Routing patterns may carry conditions.
    pub fn is_routing(self) -> bool {
        matches!(self, PatternType::Condition | PatternType::ExternalCall)
    }
}

impl fmt::Display for PatternType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Access {
    ReadOnly,
    ReadWrite,
}

impl Access {
    pub fn as_str(self) -> &'static str {
        match self {
            Access::ReadOnly => "ro",
            Access::ReadWrite => "rw",
        }
    }
}

/// Pattern characteristics: message cardinality, access, message
/// generation, routing conditions, program, capacity and shareability.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Characteristics {
    pub message_cardinality: (u32, u32),
    pub access: Access,
    pub message_generating: bool,
    pub conditions: Vec<String>,
    pub program: Option<String>,
    pub capacity: Mb,
    pub shareable: bool,
}

impl Characteristics {
    /// A read-only, shareable 1:1 pattern of the given capacity.
    pub fn simple(capacity: Mb) -> Self {
        Characteristics {
            message_cardinality: (1, 1),
            access: Access::ReadOnly,
            message_generating: false,
            conditions: Vec::new(),
            program: None,
            capacity,
            shareable: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternNode {
    pub id: String,
    pub name: String,
    pub pattern_type: PatternType,
    pub characteristics: Characteristics,
    /// Endpoint of a peer process (or external system) this node talks to.
    pub remote_link: Option<String>,
    /// Concrete pattern kind, e.g. `content-enricher`.
    pub kind: Option<String>,
    /// Receiver-system tag of external calls.
    pub receiver: Option<String>,
}

impl PatternNode {
    pub fn new(
        id: impl Into<String>,
        name: impl Into<String>,
        pattern_type: PatternType,
        characteristics: Characteristics,
    ) -> Self {
        PatternNode {
            id: id.into(),
            name: name.into(),
            pattern_type,
            characteristics,
            remote_link: None,
            kind: None,
            receiver: None,
        }
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = Some(kind.into());
        self
    }

    pub fn with_remote_link(mut self, link: impl Into<String>) -> Self {
        self.remote_link = Some(link.into());
        self
    }

    pub fn with_receiver(mut self, receiver: impl Into<String>) -> Self {
        self.receiver = Some(receiver.into());
        self
    }

    pub fn shareable(&self) -> bool {
        self.characteristics.shareable
    }

    pub fn capacity(&self) -> Mb {
        self.characteristics.capacity
    }

    pub fn is_plumbing(&self) -> bool {
        kinds::is_plumbing(self.kind.as_deref())
    }
}

/// A message channel with the contracts on both of its ends.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub from: String,
    pub to: String,
    /// Outbound contract of `from` for this channel.
    pub out_contract: Contract,
    /// Inbound contract of `to` for this channel.
    pub in_contract: Contract,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("edge references unknown node `{0}`")]
    UnknownNode(String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("node `{0}` has zero capacity")]
    ZeroCapacity(String),
    #[error("node `{0}` carries routing conditions but is of type {1}")]
    ConditionsOnNonRouting(String, PatternType),
    #[error("empty data element identifier in contract on edge `{0}` -> `{1}`")]
    EmptyElement(String, String),
    #[error("node id must not be empty")]
    EmptyId,
}

/// An integration pattern contract graph owned by one tenant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ipcg {
    tenant: String,
    nodes: BTreeMap<String, PatternNode>,
    edges: Vec<Edge>,
}

impl Ipcg {
    pub fn new(tenant: impl Into<String>) -> Self {
        Ipcg {
            tenant: tenant.into(),
            nodes: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    pub fn tenant(&self) -> &str {
        &self.tenant
    }

    pub fn set_tenant(&mut self, tenant: impl Into<String>) {
        self.tenant = tenant.into();
    }

    pub fn add_node(&mut self, node: PatternNode) -> Result<(), GraphError> {
        if node.id.is_empty() {
            return Err(GraphError::EmptyId);
        }
        if node.characteristics.capacity.0 == 0 {
            return Err(GraphError::ZeroCapacity(node.id));
        }
        if !node.characteristics.conditions.is_empty() && !node.pattern_type.is_routing() {
            return Err(GraphError::ConditionsOnNonRouting(node.id, node.pattern_type));
        }
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    pub fn add_edge(
        &mut self,
        from: &str,
        to: &str,
        out_contract: Contract,
        in_contract: Contract,
    ) -> Result<(), GraphError> {
        for id in [from, to] {
            if !self.nodes.contains_key(id) {
                return Err(GraphError::UnknownNode(id.into()));
            }
        }
        if from == to {
            return Err(GraphError::SelfLoop(from.into()));
        }
        if self.edges.iter().any(|e| e.from == from && e.to == to) {
            return Err(GraphError::DuplicateEdge(from.into(), to.into()));
        }
        if out_contract.has_empty_element() || in_contract.has_empty_element() {
            return Err(GraphError::EmptyElement(from.into(), to.into()));
        }
        self.edges.push(Edge {
            from: from.into(),
            to: to.into(),
            out_contract,
            in_contract,
        });
        Ok(())
    }

    /// Adds an edge whose two contracts are identical.
    pub fn connect(&mut self, from: &str, to: &str, contract: Contract) -> Result<(), GraphError> {
        self.add_edge(from, to, contract.clone(), contract)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = &PatternNode> {
        self.nodes.values()
    }

    pub fn node(&self, id: &str) -> Option<&PatternNode> {
        self.nodes.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, from: &str, to: &str) -> Option<&Edge> {
        self.edges.iter().find(|e| e.from == from && e.to == to)
    }

    pub fn in_edges<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.to == id)
    }

    pub fn out_edges<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn in_degree(&self, id: &str) -> usize {
        self.in_edges(id).count()
    }

    pub fn out_degree(&self, id: &str) -> usize {
        self.out_edges(id).count()
    }

    pub fn predecessors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.in_edges(id).map(|e| e.from.as_str())
    }

    pub fn successors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.out_edges(id).map(|e| e.to.as_str())
    }

    /// Inbound contracts of a node, one per incoming edge, in edge order.
    pub fn in_contracts<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Contract> + 'a {
        self.in_edges(id).map(|e| &e.in_contract)
    }

    /// Outbound contracts of a node, one per outgoing edge, in edge order.
    pub fn out_contracts<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a Contract> + 'a {
        self.out_edges(id).map(|e| &e.out_contract)
    }

    pub fn total_capacity(&self) -> Mb {
        self.nodes.values().map(|n| n.capacity()).sum()
    }

    /// Returns a node id not yet used in this graph, starting from `base`.
    pub fn fresh_id(&self, base: &str) -> String {
        if !self.nodes.contains_key(base) {
            return base.into();
        }
        let mut n = 2usize;
        loop {
            let candidate = alloc::format!("{base}#{n}");
            if !self.nodes.contains_key(&candidate) {
                return candidate;
            }
            n += 1;
        }
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut PatternNode> {
        self.nodes.get_mut(id)
    }

    pub(crate) fn edges_mut(&mut self) -> &mut Vec<Edge> {
        &mut self.edges
    }

    /// Removes a node and every edge touching it.
    pub(crate) fn remove_node(&mut self, id: &str) -> Option<PatternNode> {
        let node = self.nodes.remove(id)?;
        self.edges.retain(|e| e.from != id && e.to != id);
        Some(node)
    }

    /// Weakly connected components as sets of node ids, ordered by their
    /// smallest id.
    pub fn components(&self) -> Vec<BTreeSet<String>> {
        let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for id in self.nodes.keys() {
            adjacency.insert(id.as_str(), Vec::new());
        }
        for e in &self.edges {
            adjacency.get_mut(e.from.as_str()).unwrap().push(e.to.as_str());
            adjacency.get_mut(e.to.as_str()).unwrap().push(e.from.as_str());
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        let mut components = Vec::new();
        for start in self.nodes.keys() {
            if seen.contains(start.as_str()) {
                continue;
            }
            let mut component = BTreeSet::new();
            let mut queue = VecDeque::from([start.as_str()]);
            seen.insert(start.as_str());
            while let Some(id) = queue.pop_front() {
                component.insert(String::from(id));
                for &next in &adjacency[id] {
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
            components.push(component);
        }
        components
    }

    /// Restriction of the graph to `ids` (edges with both ends inside).
    pub fn subgraph(&self, ids: &BTreeSet<String>) -> Ipcg {
        Ipcg {
            tenant: self.tenant.clone(),
            nodes: self
                .nodes
                .iter()
                .filter(|(id, _)| ids.contains(*id))
                .map(|(id, n)| (id.clone(), n.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|e| ids.contains(&e.from) && ids.contains(&e.to))
                .cloned()
                .collect(),
        }
    }

    /// Splits into weakly connected components.
    pub fn split_components(&self) -> Vec<Ipcg> {
        self.components()
            .iter()
            .map(|ids| self.subgraph(ids))
            .collect()
    }

    /// Node ids reachable from `id` along edge direction, excluding `id`.
    pub fn reachable_from(&self, id: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<&str> = self.successors(id).collect();
        while let Some(next) = queue.pop_front() {
            if seen.insert(String::from(next)) {
                queue.extend(self.successors(next));
            }
        }
        seen
    }
}
