use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;

use super::{ElementKey, Ipcg, PatternType};
use crate::units::Mb;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProcessError {
    #[error("a process needs at least one start and one end pattern")]
    MissingTerminals,
}

/// Required capacity of a process: the sum of its pattern capacities.
pub fn process_capacity(g: &Ipcg) -> Result<Mb, ProcessError> {
    let has = |t| g.nodes().any(|n| n.pattern_type == t);
    if !has(PatternType::Start) || !has(PatternType::End) {
        return Err(ProcessError::MissingTerminals);
    }
    Ok(g.total_capacity())
}

/// A process is shareable iff every one of its patterns is.
pub fn process_shareable(g: &Ipcg) -> bool {
    g.nodes().all(|n| n.shareable())
}

/// Per node, the outbound data elements no downstream pattern consumes.
///
/// A downstream pattern with a program, or with an unconstrained inbound
/// part, is assumed to consume everything.
pub fn analyze_unused_elements(g: &Ipcg) -> BTreeMap<String, BTreeSet<(ElementKey, String)>> {
    let mut result = BTreeMap::new();
    for node in g.nodes() {
        let mut unused = BTreeSet::new();
        for edge in g.out_edges(&node.id) {
            let produced = edge.out_contract.elements();
            if produced.is_empty() {
                continue;
            }
            let mut consumers = g.reachable_from(&edge.to);
            consumers.insert(edge.to.clone());
            let mut consumed = BTreeSet::new();
            let mut everything = false;
            'scan: for c in &consumers {
                if g.node(c).is_some_and(|n| n.characteristics.program.is_some()) {
                    everything = true;
                    break;
                }
                for e in g.in_edges(c) {
                    for key in ElementKey::ALL {
                        match e.in_contract.element(key).as_set() {
                            None => {
                                everything = true;
                                break 'scan;
                            }
                            Some(s) => consumed.extend(s.iter().map(|x| (key, x.clone()))),
                        }
                    }
                }
            }
            if !everything {
                unused.extend(produced.into_iter().filter(|p| !consumed.contains(p)));
            }
        }
        result.insert(node.id.clone(), unused);
    }
    result
}
