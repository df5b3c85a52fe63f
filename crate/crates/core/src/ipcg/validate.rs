use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{match_contracts, Ipcg, PatternType};
use crate::report::{ValidationReport, Violation};

/// Stable violation codes.
pub mod codes {
    pub const MISSING_START: &str = "MISSING_START";
    pub const MISSING_END: &str = "MISSING_END";
    pub const IN_CARDINALITY: &str = "IN_CARDINALITY";
    pub const OUT_CARDINALITY: &str = "OUT_CARDINALITY";
    pub const DISCONNECTED: &str = "DISCONNECTED";
    pub const CYCLE: &str = "CYCLE";
    pub const CONTRACT_MISMATCH: &str = "CONTRACT_MISMATCH";
}

#[derive(Clone, Copy)]
enum Degree {
    Exactly(usize),
    AtLeast(usize),
}

impl Degree {
    fn admits(self, d: usize) -> bool {
        match self {
            Degree::Exactly(n) => d == n,
            Degree::AtLeast(n) => d >= n,
        }
    }

    fn describe(self) -> String {
        match self {
            Degree::Exactly(n) => format!("exactly {n}"),
            Degree::AtLeast(n) => format!("at least {n}"),
        }
    }
}

/// Allowed (in, out) degrees per pattern type. For external calls the
/// remote link counts as one outgoing edge.
fn degree_rule(t: PatternType) -> (Degree, Degree) {
    use Degree::*;
    match t {
        PatternType::Start => (Exactly(0), Exactly(1)),
        PatternType::End => (AtLeast(1), Exactly(0)),
        PatternType::Fork | PatternType::Condition => (Exactly(1), AtLeast(2)),
        PatternType::StructuralJoin => (AtLeast(2), Exactly(1)),
        PatternType::MessageProcessor | PatternType::Merge => (Exactly(1), Exactly(1)),
        PatternType::ExternalCall => (Exactly(1), Exactly(2)),
    }
}

/// Structural correctness: terminals, per-type cardinalities, connectivity
/// and acyclicity.
pub fn validate_iptg(g: &Ipcg) -> ValidationReport {
    let mut violations = Vec::new();
    if !g.nodes().any(|n| n.pattern_type == PatternType::Start) {
        violations.push(Violation::new(
            codes::MISSING_START,
            None,
            "graph has no start pattern".into(),
        ));
    }
    if !g.nodes().any(|n| n.pattern_type == PatternType::End) {
        violations.push(Violation::new(
            codes::MISSING_END,
            None,
            "graph has no end pattern".into(),
        ));
    }

    for node in g.nodes() {
        let (in_rule, out_rule) = degree_rule(node.pattern_type);
        let din = g.in_degree(&node.id);
        let mut dout = g.out_degree(&node.id);
        if node.pattern_type == PatternType::ExternalCall && node.remote_link.is_some() {
            dout += 1;
        }
        if !in_rule.admits(din) {
            violations.push(Violation::new(
                codes::IN_CARDINALITY,
                Some(node.id.clone()),
                format!(
                    "{} `{}` has {din} incoming edges, expected {}",
                    node.pattern_type,
                    node.id,
                    in_rule.describe()
                ),
            ));
        }
        if !out_rule.admits(dout) {
            violations.push(Violation::new(
                codes::OUT_CARDINALITY,
                Some(node.id.clone()),
                format!(
                    "{} `{}` has {dout} outgoing edges, expected {}",
                    node.pattern_type,
                    node.id,
                    out_rule.describe()
                ),
            ));
        }
    }

    let components = g.components().len();
    if components > 1 {
        violations.push(Violation::new(
            codes::DISCONNECTED,
            None,
            format!("graph has {components} connected components"),
        ));
    }

    let cyclic = cyclic_nodes(g);
    if !cyclic.is_empty() {
        violations.push(Violation::new(
            codes::CYCLE,
            None,
            format!("nodes on or behind a cycle: {}", cyclic.join(", ")),
        ));
    }

    ValidationReport::from_violations(violations)
}

/// Nodes Kahn's algorithm cannot order.
fn cyclic_nodes(g: &Ipcg) -> Vec<String> {
    let mut indegree: BTreeMap<&str, usize> =
        g.nodes().map(|n| (n.id.as_str(), g.in_degree(&n.id))).collect();
    let mut ready: Vec<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    while let Some(id) = ready.pop() {
        indegree.remove(id);
        for next in g.successors(id) {
            if let Some(d) = indegree.get_mut(next) {
                *d -= 1;
                if *d == 0 {
                    ready.push(next);
                }
            }
        }
    }
    indegree.keys().map(|id| String::from(*id)).collect()
}

/// Full IPCG correctness: the structural checks plus contract matching on
/// every channel into a non-start pattern.
pub fn validate_ipcg(g: &Ipcg) -> ValidationReport {
    let mut violations = validate_iptg(g).violations().to_vec();
    for node in g.nodes() {
        if node.pattern_type == PatternType::Start {
            continue;
        }
        let failing: Vec<&str> = g
            .in_edges(&node.id)
            .filter(|e| !match_contracts(&e.in_contract, [&e.out_contract]))
            .map(|e| e.from.as_str())
            .collect();
        if !failing.is_empty() {
            violations.push(Violation::new(
                codes::CONTRACT_MISMATCH,
                Some(node.id.clone()),
                format!(
                    "inbound contract of `{}` does not match outbound contract of {}",
                    node.id,
                    failing
                        .iter()
                        .map(|f| format!("`{f}`"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ),
            ));
        }
    }
    ValidationReport::from_violations(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ipcg::{Characteristics, ConceptValue, Contract, PatternNode};
    use crate::units::Mb;

    fn add(g: &mut Ipcg, id: &str, t: PatternType) {
        g.add_node(PatternNode::new(id, id, t, Characteristics::simple(Mb(64))))
            .unwrap();
    }

    #[test]
    fn empty_graph_lacks_terminals() {
        let r = validate_iptg(&Ipcg::new("t"));
        assert!(r.has_code(codes::MISSING_START));
        assert!(r.has_code(codes::MISSING_END));
        assert!(!r.is_correct());
    }

    #[test]
    fn two_cycle_detected() {
        let mut g = Ipcg::new("t");
        add(&mut g, "a", PatternType::MessageProcessor);
        add(&mut g, "b", PatternType::MessageProcessor);
        g.connect("a", "b", Contract::any()).unwrap();
        g.connect("b", "a", Contract::any()).unwrap();
        let r = validate_iptg(&g);
        assert!(r.has_code(codes::CYCLE));
    }

    #[test]
    fn start_end_pair_is_correct() {
        let mut g = Ipcg::new("t");
        add(&mut g, "s", PatternType::Start);
        add(&mut g, "e", PatternType::End);
        let c = Contract::any().with_payload(["x"]);
        g.connect("s", "e", c).unwrap();
        assert!(validate_ipcg(&g).is_correct());
    }

    #[test]
    fn cardinality_and_connectivity() {
        let mut g = Ipcg::new("t");
        add(&mut g, "s", PatternType::Start);
        add(&mut g, "f", PatternType::Fork);
        add(&mut g, "e", PatternType::End);
        add(&mut g, "x", PatternType::End);
        g.connect("s", "f", Contract::any()).unwrap();
        g.connect("f", "e", Contract::any()).unwrap();
        let r = validate_iptg(&g);
        assert_eq!(r.count_code(codes::OUT_CARDINALITY), 1);
        assert_eq!(r.count_code(codes::IN_CARDINALITY), 1);
        assert!(r.has_code(codes::DISCONNECTED));
        // graph-wide findings come first, then by node id
        let refs: Vec<_> = r.violations().iter().map(|v| v.reference.clone()).collect();
        assert_eq!(refs[0], None);
        assert_eq!(refs[1].as_deref(), Some("f"));
        assert_eq!(refs[2].as_deref(), Some("x"));
    }

    #[test]
    fn external_call_counts_remote_link() {
        let mut g = Ipcg::new("t");
        add(&mut g, "s", PatternType::Start);
        g.add_node(
            PatternNode::new("c", "c", PatternType::ExternalCall, Characteristics::simple(Mb(64)))
                .with_remote_link("peer"),
        )
        .unwrap();
        add(&mut g, "e", PatternType::End);
        g.connect("s", "c", Contract::any()).unwrap();
        g.connect("c", "e", Contract::any()).unwrap();
        assert!(validate_iptg(&g).is_correct());
        g.node_mut("c").unwrap().remote_link = None;
        assert!(validate_iptg(&g).has_code(codes::OUT_CARDINALITY));
    }

    #[test]
    fn mismatch_reported_once_per_node() {
        let mut g = Ipcg::new("t");
        add(&mut g, "s", PatternType::Start);
        add(&mut g, "e", PatternType::End);
        let out = Contract::any().with_concepts(ConceptValue::Any, ConceptValue::Yes, ConceptValue::Any);
        let inb = Contract::any().with_concepts(ConceptValue::Any, ConceptValue::No, ConceptValue::Any);
        g.add_edge("s", "e", out, inb).unwrap();
        let r = validate_ipcg(&g);
        assert_eq!(r.count_code(codes::CONTRACT_MISMATCH), 1);
        assert_eq!(r.violations()[0].reference.as_deref(), Some("e"));
    }
}
