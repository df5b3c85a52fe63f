//! JSON documents for graphs, catalogs, instances, workloads, placements
//! and validation reports. Fields are written in the documented order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cepp_core::catalog::CatalogError;
use cepp_core::ipcg::{Access, Characteristics, ConceptValue, ElementKey, ElementSet, GraphError};
use cepp_core::model::InstanceError;
use cepp_core::workload::{Workload, WorkloadEntry};
use cepp_core::{
    Catalog, Cents, ContainerVariant, Contract, Ipcg, Mb, PatternNode, PatternType, Placement, PlacementItem,
    ProblemInstance, ValidationReport,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error("duplicate variant id `{0}`")]
    DuplicateVariantId(String),
    #[error(transparent)]
    Catalog(CatalogError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        FormatError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse(&text)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn eur(c: Cents) -> f64 {
    c.0 as f64 / 100.0
}

fn cents(eur: f64) -> Result<Cents, FormatError> {
    if !eur.is_finite() || eur < 0.0 {
        return Err(FormatError::Invalid(format!("cost {eur} is not a non-negative amount")));
    }
    Ok(Cents((eur * 100.0).round() as u64))
}

// ---------------------------------------------------------------- graphs

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConceptsDoc {
    #[serde(default = "any")]
    pub signed: String,
    #[serde(default = "any")]
    pub encrypted: String,
    #[serde(default = "any")]
    pub encoded: String,
}

fn any() -> String {
    "any".into()
}

impl Default for ConceptsDoc {
    fn default() -> Self {
        ConceptsDoc {
            signed: any(),
            encrypted: any(),
            encoded: any(),
        }
    }
}

/// `null` (or an absent key) leaves a part unconstrained.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ElementsDoc {
    #[serde(default)]
    pub hdr: Option<Vec<String>>,
    #[serde(default)]
    pub pl: Option<Vec<String>>,
    #[serde(default)]
    pub attch: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractDoc {
    #[serde(default)]
    pub concepts: ConceptsDoc,
    #[serde(default)]
    pub elements: ElementsDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharDoc {
    pub mc: (u32, u32),
    pub acc: String,
    pub mg: bool,
    #[serde(default)]
    pub cnd: Vec<String>,
    #[serde(default)]
    pub prg: Option<String>,
    pub cap_mb: u64,
    pub sh: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: String,
    pub name: String,
    #[serde(rename = "type")]
    pub pattern_type: String,
    pub char: CharDoc,
    #[serde(default)]
    pub in_contracts: Vec<ContractDoc>,
    #[serde(default)]
    pub out_contracts: Vec<ContractDoc>,
    #[serde(default)]
    pub remote_link: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receiver: Option<String>,
}

/// Contracts are listed per node; the k-th in-contract of a node belongs
/// to its k-th incoming edge in `edges` order, likewise for out-contracts.
/// Missing entries are unconstrained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpcgDoc {
    pub tenant: String,
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<(String, String)>,
}

fn concept(s: &str) -> Result<ConceptValue, FormatError> {
    ConceptValue::parse(s).ok_or_else(|| FormatError::Invalid(format!("unknown concept value `{s}`")))
}

fn contract_from_doc(d: &ContractDoc) -> Result<Contract, FormatError> {
    let mut c = Contract::any().with_concepts(
        concept(&d.concepts.signed)?,
        concept(&d.concepts.encrypted)?,
        concept(&d.concepts.encoded)?,
    );
    for (key, part) in [
        (ElementKey::Hdr, &d.elements.hdr),
        (ElementKey::Pl, &d.elements.pl),
        (ElementKey::Attch, &d.elements.attch),
    ] {
        if let Some(list) = part {
            *c.element_mut(key) = ElementSet::of(list.iter().cloned());
        }
    }
    Ok(c)
}

fn contract_to_doc(c: &Contract) -> ContractDoc {
    let [signed, encrypted, encoded] = c.concepts();
    let part = |k| c.element(k).as_set().map(|s| s.iter().cloned().collect());
    ContractDoc {
        concepts: ConceptsDoc {
            signed: signed.as_str().into(),
            encrypted: encrypted.as_str().into(),
            encoded: encoded.as_str().into(),
        },
        elements: ElementsDoc {
            hdr: part(ElementKey::Hdr),
            pl: part(ElementKey::Pl),
            attch: part(ElementKey::Attch),
        },
    }
}

pub fn ipcg_from_doc(doc: &IpcgDoc) -> Result<Ipcg, FormatError> {
    let mut g = Ipcg::new(doc.tenant.clone());
    for n in &doc.nodes {
        let pattern_type = PatternType::parse(&n.pattern_type)
            .ok_or_else(|| FormatError::Invalid(format!("node `{}`: unknown type `{}`", n.id, n.pattern_type)))?;
        let access = match n.char.acc.as_str() {
            "ro" => Access::ReadOnly,
            "rw" => Access::ReadWrite,
            other => return Err(FormatError::Invalid(format!("node `{}`: unknown access `{other}`", n.id))),
        };
        let characteristics = Characteristics {
            message_cardinality: n.char.mc,
            access,
            message_generating: n.char.mg,
            conditions: n.char.cnd.clone(),
            program: n.char.prg.clone(),
            capacity: Mb(n.char.cap_mb),
            shareable: n.char.sh,
        };
        let mut node = PatternNode::new(n.id.clone(), n.name.clone(), pattern_type, characteristics);
        node.remote_link = n.remote_link.clone();
        node.kind = n.kind.clone();
        node.receiver = n.receiver.clone();
        g.add_node(node)?;
    }
    let by_id: BTreeMap<&str, &NodeDoc> = doc.nodes.iter().map(|n| (n.id.as_str(), n)).collect();
    let mut out_seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut in_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (from, to) in &doc.edges {
        let pick = |id: &str, seen: &mut BTreeMap<&str, usize>, outbound: bool| -> Result<Contract, FormatError> {
            let Some(node) = by_id.get(id) else {
                return Err(FormatError::Graph(GraphError::UnknownNode(id.into())));
            };
            let k = seen.get(id).copied().unwrap_or(0);
            let list = if outbound { &node.out_contracts } else { &node.in_contracts };
            list.get(k).map(contract_from_doc).unwrap_or_else(|| Ok(Contract::any()))
        };
        let out_c = pick(from, &mut out_seen, true)?;
        let in_c = pick(to, &mut in_seen, false)?;
        *out_seen.entry(by_id[from.as_str()].id.as_str()).or_default() += 1;
        *in_seen.entry(by_id[to.as_str()].id.as_str()).or_default() += 1;
        g.add_edge(from, to, out_c, in_c)?;
    }
    Ok(g)
}

pub fn ipcg_to_doc(g: &Ipcg) -> IpcgDoc {
    let nodes = g
        .nodes()
        .map(|n| {
            let ch = &n.characteristics;
            NodeDoc {
                id: n.id.clone(),
                name: n.name.clone(),
                pattern_type: n.pattern_type.as_str().into(),
                char: CharDoc {
                    mc: ch.message_cardinality,
                    acc: ch.access.as_str().into(),
                    mg: ch.message_generating,
                    cnd: ch.conditions.clone(),
                    prg: ch.program.clone(),
                    cap_mb: ch.capacity.0,
                    sh: ch.shareable,
                },
                in_contracts: g.in_edges(&n.id).map(|e| contract_to_doc(&e.in_contract)).collect(),
                out_contracts: g.out_edges(&n.id).map(|e| contract_to_doc(&e.out_contract)).collect(),
                remote_link: n.remote_link.clone(),
                kind: n.kind.clone(),
                receiver: n.receiver.clone(),
            }
        })
        .collect();
    IpcgDoc {
        tenant: g.tenant().into(),
        nodes,
        edges: g.edges().iter().map(|e| (e.from.clone(), e.to.clone())).collect(),
    }
}

pub fn parse_ipcg(text: &str) -> Result<Ipcg, FormatError> {
    ipcg_from_doc(&parse(text)?)
}

pub fn load_ipcg(path: &Path) -> Result<Ipcg, FormatError> {
    ipcg_from_doc(&read_json(path)?)
}

pub fn ipcg_json(g: &Ipcg) -> String {
    to_json(&ipcg_to_doc(g))
}

// --------------------------------------------------------------- catalogs

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantDoc {
    pub id: String,
    pub vendor: String,
    pub cap_mb: u64,
    pub cost_eur_mo: f64,
    #[serde(default)]
    pub cpu: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogDoc {
    pub source: String,
    pub variants: Vec<VariantDoc>,
}

fn variant_from_doc(v: &VariantDoc) -> Result<ContainerVariant, FormatError> {
    Ok(ContainerVariant::new(v.id.clone(), v.vendor.clone(), Mb(v.cap_mb), cents(v.cost_eur_mo)?))
}

fn variant_to_doc(v: &ContainerVariant) -> VariantDoc {
    VariantDoc {
        id: v.id.clone(),
        vendor: v.vendor.clone(),
        cap_mb: v.capacity.0,
        cost_eur_mo: eur(v.cost),
        cpu: None,
    }
}

pub fn catalog_from_doc(doc: &CatalogDoc) -> Result<Catalog, FormatError> {
    let variants = doc.variants.iter().map(variant_from_doc).collect::<Result<Vec<_>, _>>()?;
    Catalog::new(doc.source.clone(), variants).map_err(|e| match e {
        CatalogError::DuplicateVariantId(id) => FormatError::DuplicateVariantId(id),
        other => FormatError::Catalog(other),
    })
}

/// Catalog document; the implicit zero variant is left out.
pub fn catalog_to_doc(c: &Catalog) -> CatalogDoc {
    CatalogDoc {
        source: c.source().into(),
        variants: c.variants().iter().filter(|v| !v.is_zero()).map(variant_to_doc).collect(),
    }
}

pub fn parse_catalog(text: &str) -> Result<Catalog, FormatError> {
    catalog_from_doc(&parse(text)?)
}

pub fn load_catalog(path: &Path) -> Result<Catalog, FormatError> {
    catalog_from_doc(&read_json(path)?)
}

// -------------------------------------------------------------- instances

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemDoc {
    pub id: String,
    pub cap_mb: u64,
    pub tenant: String,
    pub shareable: bool,
}

impl From<&PlacementItem> for ItemDoc {
    fn from(i: &PlacementItem) -> Self {
        ItemDoc {
            id: i.id.clone(),
            cap_mb: i.capacity.0,
            tenant: i.tenant.clone(),
            shareable: i.shareable,
        }
    }
}

impl From<&ItemDoc> for PlacementItem {
    fn from(d: &ItemDoc) -> Self {
        PlacementItem::new(d.id.clone(), Mb(d.cap_mb), d.tenant.clone(), d.shareable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub items: Vec<ItemDoc>,
    pub variants: Vec<VariantDoc>,
    #[serde(default)]
    pub max_containers: Option<usize>,
    #[serde(default)]
    pub max_items_per_container: Option<usize>,
}

pub fn instance_from_doc(doc: &InstanceDoc) -> Result<ProblemInstance, FormatError> {
    let variants = doc.variants.iter().map(variant_from_doc).collect::<Result<Vec<_>, _>>()?;
    Ok(ProblemInstance::new(
        doc.items.iter().map(PlacementItem::from).collect(),
        variants,
        doc.max_containers,
        doc.max_items_per_container,
    )?)
}

pub fn instance_to_doc(inst: &ProblemInstance) -> InstanceDoc {
    InstanceDoc {
        items: inst.items().iter().map(ItemDoc::from).collect(),
        variants: inst.variants().iter().filter(|v| !v.is_zero()).map(variant_to_doc).collect(),
        max_containers: Some(inst.max_containers()),
        max_items_per_container: Some(inst.max_items_per_container()),
    }
}

// -------------------------------------------------------------- workloads

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IpcgEntryDoc {
    pub ipcg: IpcgDoc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryDoc {
    Ipcg(IpcgEntryDoc),
    Item(ItemDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkloadDoc {
    #[serde(default)]
    pub region: Option<String>,
    pub items: Vec<EntryDoc>,
}

pub fn workload_from_doc(doc: &WorkloadDoc) -> Result<Workload, FormatError> {
    let entries = doc
        .items
        .iter()
        .map(|e| match e {
            EntryDoc::Item(i) => Ok(WorkloadEntry::Item(i.into())),
            EntryDoc::Ipcg(g) => ipcg_from_doc(&g.ipcg).map(WorkloadEntry::Process),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Workload {
        region: doc.region.clone(),
        entries,
    })
}

pub fn workload_to_doc(w: &Workload) -> WorkloadDoc {
    WorkloadDoc {
        region: w.region.clone(),
        items: w
            .entries
            .iter()
            .map(|e| match e {
                WorkloadEntry::Item(i) => EntryDoc::Item(i.into()),
                WorkloadEntry::Process(g) => EntryDoc::Ipcg(IpcgEntryDoc { ipcg: ipcg_to_doc(g) }),
            })
            .collect(),
    }
}

pub fn load_workload(path: &Path) -> Result<Workload, FormatError> {
    workload_from_doc(&read_json(path)?)
}

pub fn load_region_map(path: &Path) -> Result<BTreeMap<String, String>, FormatError> {
    read_json(path)
}

// ------------------------------------------------------------- placements

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContainerDoc {
    pub container: usize,
    pub variant: String,
    pub vendor: String,
    pub cap_mb: u64,
    pub used_mb: u64,
    pub cost_eur_mo: f64,
    pub items: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementDoc {
    pub method: String,
    pub cost_eur_mo: f64,
    pub proven_optimal: Option<bool>,
    pub containers: Vec<ContainerDoc>,
    pub item_to_container: Vec<usize>,
    pub container_to_variant: Vec<String>,
}

/// Placement document over the canonical form of `p`.
pub fn placement_to_doc(p: &Placement, inst: &ProblemInstance, method: &str, proven_optimal: Option<bool>) -> PlacementDoc {
    let p = p.canonical();
    let items = inst.items();
    let variants = inst.variants();
    let containers: Vec<ContainerDoc> = p
        .contents()
        .into_iter()
        .enumerate()
        .map(|(j, members)| {
            let v = &variants[p.variant_of(j)];
            ContainerDoc {
                container: j,
                variant: v.id.clone(),
                vendor: v.vendor.clone(),
                cap_mb: v.capacity.0,
                used_mb: members.iter().map(|&i| items[i].capacity.0).sum(),
                cost_eur_mo: eur(v.cost),
                items: members.iter().map(|&i| items[i].id.clone()).collect(),
            }
        })
        .collect();
    let total: Cents = containers.iter().map(|c| cents(c.cost_eur_mo).unwrap_or(Cents::ZERO)).sum();
    PlacementDoc {
        method: method.into(),
        cost_eur_mo: eur(total),
        proven_optimal,
        container_to_variant: (0..containers.len()).map(|j| variants[p.variant_of(j)].id.clone()).collect(),
        containers,
        item_to_container: p.item_to_container.clone(),
    }
}

// ---------------------------------------------------------------- reports

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ViolationDoc {
    pub code: String,
    pub reference: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub correct: bool,
    pub violations: Vec<ViolationDoc>,
}

pub fn report_to_doc(r: &ValidationReport) -> ReportDoc {
    ReportDoc {
        correct: r.is_correct(),
        violations: r
            .violations()
            .iter()
            .map(|v| ViolationDoc {
                code: v.code.into(),
                reference: v.reference.clone(),
                message: v.message.clone(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cepp_core::fixtures;

    #[test]
    fn ipcg_round_trip_keeps_contracts() {
        for (name, g) in fixtures::all_graphs() {
            let back = parse_ipcg(&ipcg_json(&g)).unwrap();
            assert_eq!(back, g, "{name}");
        }
    }

    #[test]
    fn node_fields_in_documented_order() {
        let text = ipcg_json(&fixtures::enricher_run());
        let order = ["\"id\"", "\"name\"", "\"type\"", "\"char\"", "\"in_contracts\"", "\"out_contracts\"", "\"remote_link\""];
        let positions: Vec<usize> = order.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
        let ch = ["\"mc\"", "\"acc\"", "\"mg\"", "\"cnd\"", "\"prg\"", "\"cap_mb\"", "\"sh\""];
        let positions: Vec<usize> = ch.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    }

    #[test]
    fn catalog_costs_round_to_cents() {
        let c = parse_catalog(r#"{"source":"s","variants":[{"id":"a","vendor":"v","cap_mb":1024,"cost_eur_mo":7.97,"cpu":1}]}"#)
            .unwrap();
        assert_eq!(c.variant("a").unwrap().cost, Cents(797));
        assert!(c.variant("zero").is_some());
    }

    #[test]
    fn duplicate_variant_rejected() {
        let text = r#"{"source":"s","variants":[
            {"id":"a","vendor":"v","cap_mb":1,"cost_eur_mo":1},
            {"id":"a","vendor":"v","cap_mb":2,"cost_eur_mo":2}]}"#;
        assert!(matches!(parse_catalog(text), Err(FormatError::DuplicateVariantId(id)) if id == "a"));
    }

    #[test]
    fn parse_error_has_position() {
        match parse_catalog("{\n  \"source\": 3\n}") {
            Err(FormatError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_catalog(""), Err(FormatError::Parse { .. })));
    }

    #[test]
    fn workload_mixes_items_and_graphs() {
        let w = Workload {
            region: Some("eu".into()),
            entries: vec![
                WorkloadEntry::Item(PlacementItem::new("x", Mb(64), "t1", true)),
                WorkloadEntry::Process(fixtures::enricher_run()),
            ],
        };
        let back = workload_from_doc(&parse(&to_json(&workload_to_doc(&w))).unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
