//! The placement problem: items, container variants, instances, placements,
//! constraint checking, an exact solver and LP export.

mod budget;
mod exact;
mod feasibility;
mod lp;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

pub use budget::{Budget, NodeLimit, Unlimited};
pub use exact::{solve_exact, ExactError, ExactSolution, DEFAULT_EXACT_CAP};
pub use feasibility::{check_feasible, codes, total_cost};
pub use lp::export_lp;

use crate::catalog::normalize_variants;
use crate::heuristic::ffd_pack;
use crate::units::{Cents, Mb};

/// A vendor offering: a container size and its monthly price.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContainerVariant {
    pub id: String,
    pub vendor: String,
    pub capacity: Mb,
    pub cost: Cents,
}

impl ContainerVariant {
    pub const ZERO_ID: &'static str = "zero";

    pub fn new(id: impl Into<String>, vendor: impl Into<String>, capacity: Mb, cost: Cents) -> Self {
        ContainerVariant {
            id: id.into(),
            vendor: vendor.into(),
            capacity,
            cost,
        }
    }

    /// The variant of size 0 and cost 0 that encodes an unused container.
    pub fn zero() -> Self {
        ContainerVariant::new(Self::ZERO_ID, "none", Mb(0), Cents::ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.capacity.0 == 0 && self.cost.0 == 0
    }
}

/// One process as the placement sees it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PlacementItem {
    pub id: String,
    pub capacity: Mb,
    pub tenant: String,
    pub shareable: bool,
    pub origin: Option<String>,
}

impl PlacementItem {
    pub fn new(id: impl Into<String>, capacity: Mb, tenant: impl Into<String>, shareable: bool) -> Self {
        PlacementItem {
            id: id.into(),
            capacity,
            tenant: tenant.into(),
            shareable,
            origin: None,
        }
    }
}

/// Two items may not share a container iff they belong to different
/// tenants and at least one of them is non-shareable.
pub fn conflicts(a: &PlacementItem, b: &PlacementItem) -> bool {
    a.tenant != b.tenant && (!a.shareable || !b.shareable)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("item `{0}` has zero capacity")]
    ZeroCapacityItem(String),
    #[error("duplicate item id `{0}`")]
    DuplicateItem(String),
    #[error("max_containers must be at least 1")]
    ZeroContainers,
    #[error("max_items_per_container must be at least 1")]
    ZeroItemsPerContainer,
}

/// Full placement input. The variant list is always the normalized ladder:
/// dominated variants removed, ascending by capacity, the zero variant at
/// index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    items: Vec<PlacementItem>,
    variants: Vec<ContainerVariant>,
    max_containers: usize,
    max_items_per_container: usize,
}

impl ProblemInstance {
    /// Builds an instance. `max_containers` defaults to
    /// [`default_container_bound`], `max_items_per_container` to the item
    /// count.
    pub fn new(
        items: Vec<PlacementItem>,
        variants: Vec<ContainerVariant>,
        max_containers: Option<usize>,
        max_items_per_container: Option<usize>,
    ) -> Result<Self, InstanceError> {
        let mut seen = BTreeSet::new();
        for item in &items {
            if item.capacity.0 == 0 {
                return Err(InstanceError::ZeroCapacityItem(item.id.clone()));
            }
            if !seen.insert(item.id.as_str()) {
                return Err(InstanceError::DuplicateItem(item.id.clone()));
            }
        }
        let variants = normalize_variants(&variants);
        let c = match max_containers {
            Some(0) => return Err(InstanceError::ZeroContainers),
            Some(c) => c,
            None => default_container_bound(&items, &variants),
        };
        let q = match max_items_per_container {
            Some(0) => return Err(InstanceError::ZeroItemsPerContainer),
            Some(q) => q,
            None => items.len().max(1),
        };
        Ok(ProblemInstance {
            items,
            variants,
            max_containers: c,
            max_items_per_container: q,
        })
    }

    pub fn items(&self) -> &[PlacementItem] {
        &self.items
    }

    /// Normalized variant ladder; index 0 is the zero variant.
    pub fn variants(&self) -> &[ContainerVariant] {
        &self.variants
    }

    pub fn max_containers(&self) -> usize {
        self.max_containers
    }

    pub fn max_items_per_container(&self) -> usize {
        self.max_items_per_container
    }

    pub fn with_max_containers(mut self, c: usize) -> Result<Self, InstanceError> {
        if c == 0 {
            return Err(InstanceError::ZeroContainers);
        }
        self.max_containers = c;
        Ok(self)
    }

    /// Index of the smallest (and so cheapest) variant holding `load`.
    pub fn cheapest_fitting(&self, load: Mb) -> Option<usize> {
        self.variants.iter().position(|v| v.capacity >= load)
    }

    pub fn largest_capacity(&self) -> Mb {
        self.variants.last().map(|v| v.capacity).unwrap_or(Mb(0))
    }

    pub fn tenants(&self) -> BTreeSet<&str> {
        self.items.iter().map(|i| i.tenant.as_str()).collect()
    }

    pub fn total_demand(&self) -> Mb {
        self.items.iter().map(|i| i.capacity).sum()
    }
}

/// Containers used by a quick first-fit-decreasing run on the
/// conflict-decomposed instance, plus one slack container. Without a
/// feasible packing, one container per item plus one.
pub fn default_container_bound(items: &[PlacementItem], variants: &[ContainerVariant]) -> usize {
    match ffd_pack(items, variants) {
        Ok(containers) => containers.len() + 1,
        Err(_) => items.len() + 1,
    }
}

/// An assignment of items to containers and of containers to variants.
///
/// `item_to_container[i]` is the container of item `i`;
/// `container_to_variant[j]` is an index into the instance's variant
/// ladder. Containers past the end of `container_to_variant` are on the
/// zero variant.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Placement {
    pub item_to_container: Vec<usize>,
    pub container_to_variant: Vec<usize>,
}

impl Placement {
    pub fn variant_of(&self, container: usize) -> usize {
        self.container_to_variant.get(container).copied().unwrap_or(0)
    }

    /// Number of containers referenced by either map.
    pub fn container_slots(&self) -> usize {
        let by_items = self.item_to_container.iter().map(|&j| j + 1).max().unwrap_or(0);
        by_items.max(self.container_to_variant.len())
    }

    /// Items per container, in item order.
    pub fn contents(&self) -> Vec<Vec<usize>> {
        let mut out = alloc::vec![Vec::new(); self.container_slots()];
        for (i, &j) in self.item_to_container.iter().enumerate() {
            out[j].push(i);
        }
        out
    }

    /// Same placement with empty zero-variant containers dropped and the
    /// rest renumbered by their smallest item index. Two placements that
    /// differ only in container numbering have the same canonical form.
    pub fn canonical(&self) -> Placement {
        let contents = self.contents();
        let mut order: Vec<usize> = (0..contents.len())
            .filter(|&j| !contents[j].is_empty() || self.variant_of(j) != 0)
            .collect();
        order.sort_by_key(|&j| (contents[j].first().copied().unwrap_or(usize::MAX), j));
        let mut renumber = alloc::vec![usize::MAX; contents.len()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new;
        }
        Placement {
            item_to_container: self.item_to_container.iter().map(|&j| renumber[j]).collect(),
            container_to_variant: order.iter().map(|&j| self.variant_of(j)).collect(),
        }
    }
}
