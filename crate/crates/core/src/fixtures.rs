//! Bundled reference graphs, instances and catalogs.
//!
//! Every pattern is 64 MB. Graph builders give nodes zero-padded numeric
//! prefixes so that id order follows process order.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::Catalog;
use crate::ipcg::{kinds, Access, Characteristics, Contract, Ipcg, PatternNode, PatternType};
use crate::model::{ContainerVariant, PlacementItem, ProblemInstance};
use crate::units::{Cents, Mb};

fn node(id: &str, name: &str, t: PatternType, shareable: bool) -> PatternNode {
    let mut ch = Characteristics::simple(Mb::PER_PATTERN);
    ch.shareable = shareable;
    PatternNode::new(id, name, t, ch)
}

fn processor(id: &str, name: &str, kind: &str) -> PatternNode {
    node(id, name, PatternType::MessageProcessor, true).with_kind(kind)
}

fn rw(mut n: PatternNode) -> PatternNode {
    n.characteristics.access = Access::ReadWrite;
    n
}

/// Message state between two patterns: header and payload element names,
/// no attachments.
fn state(hdr: &[&str], pl: &[&str]) -> Contract {
    Contract::any()
        .with_header(hdr.iter().copied())
        .with_payload(pl.iter().copied())
        .with_attachments(core::iter::empty::<&str>())
}

/// A linear process `start -> n-2 processors -> end`.
pub fn chain(tenant: &str, prefix: &str, patterns: usize, shareable: bool) -> Ipcg {
    assert!(patterns >= 2, "a process needs a start and an end");
    let mut g = Ipcg::new(tenant);
    let ids: Vec<String> = (0..patterns).map(|i| format!("{prefix}{i:03}")).collect();
    for (i, id) in ids.iter().enumerate() {
        let t = if i == 0 {
            PatternType::Start
        } else if i + 1 == patterns {
            PatternType::End
        } else {
            PatternType::MessageProcessor
        };
        g.add_node(node(id, id, t, shareable)).unwrap();
    }
    for pair in ids.windows(2) {
        g.connect(&pair[0], &pair[1], Contract::any()).unwrap();
    }
    g
}

/// The conditional-fork process of the partitioning example: three
/// shareable patterns in front, two connected non-shareable patterns, and
/// two shareable ends behind them.
pub fn partitioning() -> Ipcg {
    let mut g = Ipcg::new("t1");
    g.add_node(node("a_start", "Start", PatternType::Start, true)).unwrap();
    g.add_node(node("b_prepare", "Prepare", PatternType::MessageProcessor, true))
        .unwrap();
    let mut fork = node("c_fork", "Conditional fork", PatternType::Condition, true);
    fork.characteristics.conditions = vec!["priority = high".into(), "otherwise".into()];
    g.add_node(fork).unwrap();
    let mut router = node("d_router", "Tenant router", PatternType::Condition, false);
    router.characteristics.conditions = vec!["archive".into(), "otherwise".into()];
    g.add_node(router).unwrap();
    g.add_node(node("e_join", "Tenant join", PatternType::StructuralJoin, false))
        .unwrap();
    g.add_node(node("f_archive", "Archive", PatternType::End, true)).unwrap();
    g.add_node(node("g_deliver", "Deliver", PatternType::End, true)).unwrap();
    for (from, to) in [
        ("a_start", "b_prepare"),
        ("b_prepare", "c_fork"),
        ("c_fork", "d_router"),
        ("c_fork", "e_join"),
        ("d_router", "e_join"),
        ("d_router", "f_archive"),
        ("e_join", "g_deliver"),
    ] {
        g.connect(from, to, Contract::any()).unwrap();
    }
    g
}

/// Three enrichers in a row with disjoint writes, framed by start and end.
pub fn enricher_run() -> Ipcg {
    let mut g = Ipcg::new("t1");
    g.add_node(node("a", "Start", PatternType::Start, true)).unwrap();
    g.add_node(processor("b", "Add id", kinds::CONTENT_ENRICHER)).unwrap();
    g.add_node(processor("c", "Add time", kinds::CONTENT_ENRICHER)).unwrap();
    g.add_node(processor("d", "Add route", kinds::CONTENT_ENRICHER)).unwrap();
    g.add_node(node("e", "End", PatternType::End, true)).unwrap();
    g.connect("a", "b", state(&[], &["body"])).unwrap();
    g.connect("b", "c", state(&["id"], &["body"])).unwrap();
    g.connect("c", "d", state(&["id", "time"], &["body"])).unwrap();
    g.connect("d", "e", state(&["id", "route", "time"], &["body"])).unwrap();
    g
}

/// The invoicing scenario: sign, map and store an invoice, route it to
/// the test or production endpoint of the exchange system by mode, then
/// store and map the response. 18 patterns.
pub fn invoicing() -> Ipcg {
    use PatternType::*;
    let mut g = Ipcg::new("acme");
    let ce = kinds::CONTENT_ENRICHER;
    g.add_node(node("n01_erp", "ERP", Start, true)).unwrap();
    g.add_node(rw(processor("n02_preserve", "Preserve info", ce))).unwrap();
    g.add_node(rw(processor("n03_sign", "PKCS7 signer", "signer"))).unwrap();
    g.add_node(rw(processor("n04_map", "Map to SdI", "message-mapping"))).unwrap();
    g.add_node(rw(processor("n05_cache", "Cache", "write-variables"))).unwrap();
    g.add_node(rw(processor("n06_prepare", "Prepare to store", ce))).unwrap();
    g.add_node(rw(processor("n07_header", "setHeader", ce))).unwrap();
    g.add_node(processor("n08_store", "Store invoice", "persist")).unwrap();
    let mut router = node("n09_router", "Router", Condition, true);
    router.characteristics.conditions =
        vec!["mode = 'test'".into(), "mode = 'production'".into(), "otherwise".into()];
    g.add_node(router).unwrap();
    g.add_node(
        node("n10_sdi_test", "SdI test", ExternalCall, true)
            .with_kind("request-reply")
            .with_receiver("SdI")
            .with_remote_link("sdi-test"),
    )
    .unwrap();
    g.add_node(
        node("n11_sdi_prod", "SdI production", ExternalCall, true)
            .with_kind("request-reply")
            .with_receiver("SdI")
            .with_remote_link("sdi-production"),
    )
    .unwrap();
    g.add_node(node("n12_invalid", "Invalid mode", End, true)).unwrap();
    g.add_node(node("n13_join", "Join", StructuralJoin, true)).unwrap();
    g.add_node(rw(processor("n14_enrich", "Enrich response", ce))).unwrap();
    g.add_node(processor("n15_store", "Store response", "persist")).unwrap();
    g.add_node(rw(processor("n16_map", "Map response", ce))).unwrap();
    g.add_node(rw(processor("n17_header", "setHeader response", ce))).unwrap();
    g.add_node(node("n18_erp", "ERP", End, true)).unwrap();

    let invoice = state(&["tenant"], &["invoice"]);
    let preserved = state(&["sender", "tenant"], &["invoice"]);
    let signed = state(&["sender", "tenant"], &["signed_invoice"]);
    let mapped = state(&["sender", "tenant"], &["sdi_invoice"]);
    let cached = state(&["cached", "sender", "tenant"], &["sdi_invoice"]);
    let prepared = state(&["cached", "sender", "store_key", "tenant"], &["sdi_invoice"]);
    let headed = state(&["cached", "mode", "sender", "store_key", "tenant"], &["sdi_invoice"]);
    let response = state(&["sender", "tenant"], &["sdi_response"]);
    let enriched = state(&["response_key", "sender", "tenant"], &["sdi_response"]);
    let mapped_response = state(&["response_key", "sender", "tenant"], &["erp_response"]);
    let final_response = state(&["response_key", "sender", "status", "tenant"], &["erp_response"]);

    let edges = [
        ("n01_erp", "n02_preserve", &invoice),
        ("n02_preserve", "n03_sign", &preserved),
        ("n03_sign", "n04_map", &signed),
        ("n04_map", "n05_cache", &mapped),
        ("n05_cache", "n06_prepare", &cached),
        ("n06_prepare", "n07_header", &prepared),
        ("n07_header", "n08_store", &headed),
        ("n08_store", "n09_router", &headed),
        ("n09_router", "n10_sdi_test", &headed),
        ("n09_router", "n11_sdi_prod", &headed),
        ("n09_router", "n12_invalid", &headed),
        ("n10_sdi_test", "n13_join", &response),
        ("n11_sdi_prod", "n13_join", &response),
        ("n13_join", "n14_enrich", &response),
        ("n14_enrich", "n15_store", &enriched),
        ("n15_store", "n16_map", &enriched),
        ("n16_map", "n17_header", &mapped_response),
        ("n17_header", "n18_erp", &final_response),
    ];
    for (from, to, c) in edges {
        g.connect(from, to, c.clone()).unwrap();
    }
    g
}

/// Processes of the introductory example: (tenant, patterns, shareable).
pub const EXAMPLE1_PROCESSES: [(&str, usize, bool); 5] = [
    ("t1", 13, true),
    ("t1", 19, false),
    ("t1", 50, false),
    ("t2", 11, true),
    ("t3", 21, true),
];

/// The introductory example as linear processes of 13, 19, 50, 11 and 21
/// patterns.
pub fn example1_processes() -> Vec<Ipcg> {
    EXAMPLE1_PROCESSES
        .iter()
        .enumerate()
        .map(|(i, &(tenant, n, shareable))| chain(tenant, &format!("p{}_", i + 1), n, shareable))
        .collect()
}

pub fn example1_items() -> Vec<PlacementItem> {
    EXAMPLE1_PROCESSES
        .iter()
        .enumerate()
        .map(|(i, &(tenant, n, shareable))| {
            PlacementItem::new(format!("p{}", i + 1), Mb(n as u64 * Mb::PER_PATTERN.0), tenant, shareable)
        })
        .collect()
}

pub fn example1_catalog() -> Catalog {
    Catalog::new(
        "example1",
        vec![
            ContainerVariant::new("1", "example", Mb(6400), Cents::from_eur(30, 0)),
            ContainerVariant::new("N", "example", Mb(3200), Cents::from_eur(20, 0)),
        ],
    )
    .unwrap()
}

pub fn example1_instance() -> ProblemInstance {
    ProblemInstance::new(example1_items(), example1_catalog().variants().to_vec(), None, None).unwrap()
}

pub fn aws_t2_catalog() -> Catalog {
    Catalog::new(
        "aws_t2",
        vec![
            ContainerVariant::new("t2.micro", "aws", Mb(1024), Cents::from_eur(7, 97)),
            ContainerVariant::new("t2.small", "aws", Mb(2048), Cents::from_eur(15, 94)),
        ],
    )
    .unwrap()
}

/// Thirteen processes spread over three tenants; the six with odd index
/// end in a non-shareable tail after a shareable head.
pub fn edocuments() -> Vec<Ipcg> {
    const SIZES: [usize; 13] = [6, 9, 7, 12, 5, 8, 10, 6, 11, 7, 9, 5, 8];
    SIZES
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let tenant = ["tenant-a", "tenant-b", "tenant-c"][i % 3];
            let mut g = chain(tenant, &format!("e{i:02}_"), n, true);
            if i % 2 == 1 {
                let tail: BTreeSet<String> = g.nodes().skip(n / 2).map(|x| x.id.clone()).collect();
                for id in tail {
                    g.node_mut(&id).unwrap().characteristics.shareable = false;
                }
            }
            g
        })
        .collect()
}

/// Every bundled graph, by name.
pub fn all_graphs() -> Vec<(String, Ipcg)> {
    let mut out = vec![
        (String::from("partitioning"), partitioning()),
        (String::from("enricher_run"), enricher_run()),
        (String::from("invoicing"), invoicing()),
    ];
    for (i, g) in example1_processes().into_iter().enumerate() {
        out.push((format!("example1_p{}", i + 1), g));
    }
    for (i, g) in edocuments().into_iter().enumerate() {
        out.push((format!("edocuments_{i:02}"), g));
    }
    out
}
