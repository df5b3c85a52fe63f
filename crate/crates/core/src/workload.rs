//! Workloads: processes and pre-flattened items of several tenants,
//! synthetic generation, region scoping and flattening into a placement
//! instance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::Catalog;
use crate::ipcg::{process_capacity, process_shareable, validate_ipcg, Ipcg, ProcessError};
use crate::model::{InstanceError, PlacementItem, ProblemInstance};
use crate::report::ValidationReport;
use crate::rewrite::{decompose, RewriteError};
use crate::units::Mb;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WorkloadEntry {
    Item(PlacementItem),
    Process(Ipcg),
}

impl WorkloadEntry {
    pub fn tenant(&self) -> &str {
        match self {
            WorkloadEntry::Item(i) => &i.tenant,
            WorkloadEntry::Process(g) => g.tenant(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Workload {
    pub region: Option<String>,
    pub entries: Vec<WorkloadEntry>,
}

impl Workload {
    pub fn tenants(&self) -> BTreeSet<String> {
        self.entries.iter().map(|e| String::from(e.tenant())).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WorkloadError {
    #[error("non-shareable ratio must lie in [0, 1]")]
    RatioOutOfRange,
    #[error("process count range {0}..={1} is empty")]
    EmptyRange(usize, usize),
    #[error("tenant `{0}` has no region")]
    UnassignedTenant(String),
    #[error("process {index} is not correct: {report:?}")]
    InvalidProcess { index: usize, report: ValidationReport },
    #[error("process {index}: {source}")]
    Process { index: usize, source: ProcessError },
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("process {index}: {source}")]
    Rewrite { index: usize, source: RewriteError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProcessCount {
    Fixed(usize),
    /// Inclusive range, drawn per tenant.
    Uniform(usize, usize),
    /// One count per tenant, in tenant order.
    PerTenant(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CapacitySpec {
    /// Capacities handed out in order, cycling.
    List(Vec<Mb>),
    /// Uniform in `[mean - spread, mean + spread]`, at least 64 MB.
    Spread { mean: Mb, spread: Mb },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub tenant_count: usize,
    pub processes_per_tenant: ProcessCount,
    pub capacity: CapacitySpec,
    pub non_shareable_ratio: f64,
    pub seed: u64,
}

pub fn tenant_name(i: usize) -> String {
    format!("t{}", i + 1)
}

/// Pre-flattened synthetic workload. Each item is non-shareable with
/// probability `non_shareable_ratio`.
pub fn generate(spec: &GeneratorSpec) -> Result<Workload, WorkloadError> {
    if !(0.0..=1.0).contains(&spec.non_shareable_ratio) {
        return Err(WorkloadError::RatioOutOfRange);
    }
    if let ProcessCount::Uniform(lo, hi) = spec.processes_per_tenant {
        if lo > hi {
            return Err(WorkloadError::EmptyRange(lo, hi));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut entries = Vec::new();
    let mut next = 0usize;
    for t in 0..spec.tenant_count {
        let count = match &spec.processes_per_tenant {
            ProcessCount::Fixed(n) => *n,
            ProcessCount::Uniform(lo, hi) => rng.gen_range(*lo as u64..=*hi as u64) as usize,
            ProcessCount::PerTenant(v) => v.get(t).copied().unwrap_or(0),
        };
        for _ in 0..count {
            let capacity = match &spec.capacity {
                CapacitySpec::List(caps) if caps.is_empty() => Mb::PER_PATTERN,
                CapacitySpec::List(caps) => caps[next % caps.len()],
                CapacitySpec::Spread { mean, spread } => {
                    let lo = mean.0.saturating_sub(spread.0);
                    let hi = mean.0 + spread.0;
                    Mb(rng.gen_range(lo..=hi).max(Mb::PER_PATTERN.0))
                }
            };
            let shareable = rng.gen::<f64>() >= spec.non_shareable_ratio;
            entries.push(WorkloadEntry::Item(PlacementItem::new(
                format!("i{next}"),
                capacity,
                tenant_name(t),
                shareable,
            )));
            next += 1;
        }
    }
    Ok(Workload { region: None, entries })
}

/// Splits by tenant region. Every tenant must be assigned.
pub fn partition_by_region(
    w: &Workload,
    assignment: &BTreeMap<String, String>,
) -> Result<BTreeMap<String, Workload>, WorkloadError> {
    let mut out: BTreeMap<String, Workload> = BTreeMap::new();
    for entry in &w.entries {
        let region = assignment
            .get(entry.tenant())
            .ok_or_else(|| WorkloadError::UnassignedTenant(entry.tenant().into()))?;
        out.entry(region.clone())
            .or_insert_with(|| Workload {
                region: Some(region.clone()),
                entries: Vec::new(),
            })
            .entries
            .push(entry.clone());
    }
    Ok(out)
}

/// Item for one process: its total capacity and shareability.
pub fn process_item(id: impl Into<String>, g: &Ipcg) -> Result<PlacementItem, ProcessError> {
    let mut item = PlacementItem::new(id, process_capacity(g)?, g.tenant(), process_shareable(g));
    item.origin = g.nodes().next().map(|n| n.id.clone());
    Ok(item)
}

/// Placement instance over the workload. Processes become items
/// `p{index}`; pre-flattened items keep their ids.
pub fn flatten(w: &Workload, catalog: &Catalog) -> Result<ProblemInstance, WorkloadError> {
    let mut items = Vec::with_capacity(w.entries.len());
    for (index, entry) in w.entries.iter().enumerate() {
        match entry {
            WorkloadEntry::Item(i) => items.push(i.clone()),
            WorkloadEntry::Process(g) => {
                let report = validate_ipcg(g);
                if !report.is_correct() {
                    return Err(WorkloadError::InvalidProcess { index, report });
                }
                let item = process_item(format!("p{index}"), g)
                    .map_err(|source| WorkloadError::Process { index, source })?;
                items.push(item);
            }
        }
    }
    Ok(ProblemInstance::new(items, catalog.variants().to_vec(), None, None)?)
}

/// Replaces every process by the processes its decomposition yields.
pub fn decompose_workload(w: &Workload) -> Result<Workload, WorkloadError> {
    let mut entries = Vec::with_capacity(w.entries.len());
    for (index, entry) in w.entries.iter().enumerate() {
        match entry {
            WorkloadEntry::Item(_) => entries.push(entry.clone()),
            WorkloadEntry::Process(g) => {
                let result = decompose(g).map_err(|source| WorkloadError::Rewrite { index, source })?;
                entries.extend(result.graphs.into_iter().map(WorkloadEntry::Process));
            }
        }
    }
    Ok(Workload {
        region: w.region.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    fn spec(ratio: f64) -> GeneratorSpec {
        GeneratorSpec {
            tenant_count: 3,
            processes_per_tenant: ProcessCount::Uniform(2, 6),
            capacity: CapacitySpec::Spread {
                mean: Mb(512),
                spread: Mb(480),
            },
            non_shareable_ratio: ratio,
            seed: 9,
        }
    }

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(generate(&spec(0.4)).unwrap(), generate(&spec(0.4)).unwrap());
    }

    #[test]
    fn ratio_zero_is_all_shareable() {
        let w = generate(&spec(0.0)).unwrap();
        assert!(w.entries.iter().all(|e| matches!(e, WorkloadEntry::Item(i) if i.shareable)));
    }

    #[test]
    fn ratio_outside_unit_interval_rejected() {
        assert_eq!(generate(&spec(1.5)), Err(WorkloadError::RatioOutOfRange));
    }

    #[test]
    fn capacities_at_least_one_pattern() {
        let w = generate(&spec(0.5)).unwrap();
        for e in &w.entries {
            let WorkloadEntry::Item(i) = e else { panic!() };
            assert!(i.capacity.0 >= 64 && i.capacity.0 <= 992);
        }
    }

    #[test]
    fn example1_shape() {
        let units = [13u64, 19, 50, 11, 21];
        let w = generate(&GeneratorSpec {
            tenant_count: 3,
            processes_per_tenant: ProcessCount::PerTenant(vec![3, 1, 1]),
            capacity: CapacitySpec::List(units.iter().map(|u| Mb(u * 64)).collect()),
            non_shareable_ratio: 0.4,
            seed: 1,
        })
        .unwrap();
        let got: Vec<(String, u64)> = w
            .entries
            .iter()
            .map(|e| match e {
                WorkloadEntry::Item(i) => (i.tenant.clone(), i.capacity.0 / 64),
                _ => unreachable!(),
            })
            .collect();
        let want: Vec<(String, u64)> = ["t1", "t1", "t1", "t2", "t3"]
            .iter()
            .zip(units)
            .map(|(t, u)| (String::from(*t), u))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn partition_covers_disjointly() {
        let w = generate(&spec(0.3)).unwrap();
        let map: BTreeMap<String, String> = [("t1", "eu"), ("t2", "eu"), ("t3", "us")]
            .iter()
            .map(|(a, b)| (String::from(*a), String::from(*b)))
            .collect();
        let parts = partition_by_region(&w, &map).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts.values().map(Workload::len).sum::<usize>(), w.len());
        assert_eq!(parts["us"].tenants().len(), 1);
        assert_eq!(parts["eu"].region.as_deref(), Some("eu"));
    }

    #[test]
    fn unassigned_tenant_reported() {
        let w = generate(&spec(0.3)).unwrap();
        let map = BTreeMap::from([(String::from("t1"), String::from("eu"))]);
        assert!(matches!(partition_by_region(&w, &map), Err(WorkloadError::UnassignedTenant(_))));
    }

    #[test]
    fn example1_processes_flatten_to_items() {
        let w = Workload {
            region: None,
            entries: fixtures::example1_processes().into_iter().map(WorkloadEntry::Process).collect(),
        };
        let inst = flatten(&w, &fixtures::example1_catalog()).unwrap();
        let got: Vec<(u64, bool)> = inst.items().iter().map(|i| (i.capacity.0 / 64, i.shareable)).collect();
        assert_eq!(got, [(13, true), (19, false), (50, false), (11, true), (21, true)]);
    }

    #[test]
    fn decomposed_edocuments_add_plumbing_capacity() {
        let w = Workload {
            region: None,
            entries: fixtures::edocuments().into_iter().map(WorkloadEntry::Process).collect(),
        };
        let before = flatten(&w, &fixtures::aws_t2_catalog()).unwrap().total_demand();
        let cut = decompose_workload(&w).unwrap();
        assert_eq!(cut.len(), 19);
        let after = flatten(&cut, &fixtures::aws_t2_catalog()).unwrap().total_demand();
        assert_eq!(after.0, before.0 + 6 * 192);
        assert_eq!(cut.tenants(), w.tenants());
    }

    #[test]
    fn empty_workload_gives_empty_instance() {
        let inst = flatten(&Workload::default(), &fixtures::aws_t2_catalog()).unwrap();
        assert!(inst.items().is_empty());
    }
}
