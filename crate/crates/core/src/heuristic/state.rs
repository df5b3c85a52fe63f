use alloc::vec::Vec;

use rand::Rng;

use super::ContainerKind;
use crate::model::{Placement, ProblemInstance};
use crate::units::{Cents, Mb};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContainerState {
    /// Index into the instance's variant ladder.
    pub variant: usize,
    pub kind: ContainerKind,
    pub load: Mb,
    pub count: usize,
}

/// A reversible edit of a [`SearchState`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Change {
    Move { item: usize, from: usize, to: usize },
    Swap { a: usize, b: usize },
    Shrink { container: usize, from: usize },
}

/// Search state with cached loads, counts and total cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchState {
    assignment: Vec<usize>,
    containers: Vec<ContainerState>,
    cost: Cents,
    caps: Vec<Mb>,
    variant_caps: Vec<Mb>,
    variant_costs: Vec<Cents>,
    max_items: usize,
}

fn random_index<R: Rng>(rng: &mut R, n: usize) -> usize {
    rng.gen_range(0..n as u64) as usize
}

impl SearchState {
    pub(crate) fn new(inst: &ProblemInstance, assignment: Vec<usize>, containers: Vec<ContainerState>) -> Self {
        let variant_costs: Vec<Cents> = inst.variants().iter().map(|v| v.cost).collect();
        let cost = containers.iter().map(|c| variant_costs[c.variant]).sum();
        SearchState {
            assignment,
            containers,
            cost,
            caps: inst.items().iter().map(|i| i.capacity).collect(),
            variant_caps: inst.variants().iter().map(|v| v.capacity).collect(),
            variant_costs,
            max_items: inst.max_items_per_container(),
        }
    }

    pub fn cost(&self) -> Cents {
        self.cost
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn containers(&self) -> &[ContainerState] {
        &self.containers
    }

    /// The state as a canonical placement (empty removed containers dropped).
    pub fn to_placement(&self) -> Placement {
        Placement {
            item_to_container: self.assignment.clone(),
            container_to_variant: self.containers.iter().map(|c| c.variant).collect(),
        }
        .canonical()
    }

    fn admits(&self, container: usize, inst: &ProblemInstance, item: usize) -> bool {
        let it = &inst.items()[item];
        match &self.containers[container].kind {
            ContainerKind::Shareable => it.shareable,
            ContainerKind::TenantExclusive(t) => *t == it.tenant,
        }
    }

    fn same_class(&self, a: usize, b: usize) -> bool {
        self.containers[a].kind == self.containers[b].kind
    }

    /// Random item to a random other container of a compatible type.
    pub fn propose_move<R: Rng>(&self, inst: &ProblemInstance, rng: &mut R) -> Option<Change> {
        if self.assignment.is_empty() {
            return None;
        }
        let item = random_index(rng, self.assignment.len());
        let from = self.assignment[item];
        let targets: Vec<usize> = (0..self.containers.len())
            .filter(|&j| j != from && self.admits(j, inst, item))
            .collect();
        if targets.is_empty() {
            return None;
        }
        let to = targets[random_index(rng, targets.len())];
        Some(Change::Move { item, from, to })
    }

    /// Random item and the first partner, scanning from a random offset,
    /// that sits in a different container of the same type.
    pub fn propose_swap<R: Rng>(&self, rng: &mut R) -> Option<Change> {
        let n = self.assignment.len();
        if n < 2 {
            return None;
        }
        let a = random_index(rng, n);
        let offset = random_index(rng, n);
        let ca = self.assignment[a];
        (0..n)
            .map(|k| (offset + k) % n)
            .find(|&b| {
                let cb = self.assignment[b];
                cb != ca && self.same_class(ca, cb)
            })
            .map(|b| Change::Swap { a, b })
    }

    /// Random container one step down the ladder; none for containers
    /// already on the zero variant.
    pub fn propose_shrink<R: Rng>(&self, rng: &mut R) -> Option<Change> {
        if self.containers.is_empty() {
            return None;
        }
        let container = random_index(rng, self.containers.len());
        let from = self.containers[container].variant;
        (from > 0).then_some(Change::Shrink { container, from })
    }

    fn relocate(&mut self, item: usize, from: usize, to: usize) {
        let cap = self.caps[item];
        self.containers[from].load = self.containers[from].load - cap;
        self.containers[from].count -= 1;
        self.containers[to].load += cap;
        self.containers[to].count += 1;
        self.assignment[item] = to;
    }

    fn set_variant(&mut self, container: usize, variant: usize) {
        let old = self.containers[container].variant;
        self.cost = Cents(self.cost.0 - self.variant_costs[old].0 + self.variant_costs[variant].0);
        self.containers[container].variant = variant;
    }

    pub fn apply(&mut self, change: Change) {
        match change {
            Change::Move { item, from, to } => self.relocate(item, from, to),
            Change::Swap { a, b } => {
                let (ca, cb) = (self.assignment[a], self.assignment[b]);
                self.relocate(a, ca, cb);
                self.relocate(b, cb, ca);
            }
            Change::Shrink { container, from } => self.set_variant(container, from - 1),
        }
    }

    pub fn revert(&mut self, change: Change) {
        match change {
            Change::Move { item, from, to } => self.relocate(item, to, from),
            Change::Swap { a, b } => {
                let (ca, cb) = (self.assignment[a], self.assignment[b]);
                self.relocate(a, ca, cb);
                self.relocate(b, cb, ca);
            }
            Change::Shrink { container, from } => self.set_variant(container, from),
        }
    }

    fn container_ok(&self, j: usize) -> bool {
        let c = &self.containers[j];
        c.load <= self.variant_caps[c.variant] && c.count <= self.max_items
    }

    /// Capacity and count checks on the containers `change` touched. Type
    /// compatibility holds by construction of the proposals.
    pub fn feasible_after(&self, change: Change) -> bool {
        match change {
            Change::Move { from, to, .. } => self.container_ok(from) && self.container_ok(to),
            Change::Swap { a, b } => {
                self.container_ok(self.assignment[a]) && self.container_ok(self.assignment[b])
            }
            Change::Shrink { container, .. } => self.container_ok(container),
        }
    }

    /// Recomputes every cache from scratch and compares.
    pub fn caches_consistent(&self) -> bool {
        let mut loads = alloc::vec![Mb(0); self.containers.len()];
        let mut counts = alloc::vec![0usize; self.containers.len()];
        for (i, &j) in self.assignment.iter().enumerate() {
            loads[j] += self.caps[i];
            counts[j] += 1;
        }
        let cost: Cents = self.containers.iter().map(|c| self.variant_costs[c.variant]).sum();
        cost == self.cost
            && self
                .containers
                .iter()
                .enumerate()
                .all(|(j, c)| c.load == loads[j] && c.count == counts[j])
    }
}
