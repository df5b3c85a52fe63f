use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::{check_feasible, total_cost, Budget, Placement, ProblemInstance};
use crate::heuristic::ffd_pack;
use crate::units::Cents;

/// Largest item count `solve_exact` accepts unless the caller raises it.
pub const DEFAULT_EXACT_CAP: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactSolution {
    pub placement: Placement,
    pub cost: Cents,
    /// False iff the budget ran out before the search space was exhausted.
    pub proven_optimal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExactError {
    #[error("{items} items exceed the exact solver cap of {cap}; use the heuristic")]
    TooLarge { items: usize, cap: usize },
    #[error("no feasible placement exists within the container bound")]
    Infeasible,
    #[error("budget exhausted before any feasible placement was found")]
    BudgetExhausted,
}

struct Bin {
    load: u64,
    count: usize,
    cost: u64,
    tenants: Vec<usize>,
    /// Tenant of the non-shareable items in the bin, if any.
    exclusive: Option<usize>,
}

struct Search<'a, B: Budget> {
    budget: &'a B,
    order: Vec<usize>,
    caps: Vec<u64>,
    tenant: Vec<usize>,
    shareable: Vec<bool>,
    /// Whether the item at this position is interchangeable with the previous one.
    twin_of_prev: Vec<bool>,
    suffix: Vec<u64>,
    ladder_caps: Vec<u64>,
    ladder_costs: Vec<u64>,
    /// Cheapest cents per MB over positive variants.
    rate: f64,
    max_containers: usize,
    max_items: usize,
    bins: Vec<Bin>,
    assign: Vec<usize>,
    best: Option<(u64, Vec<usize>)>,
    aborted: bool,
}

impl<B: Budget> Search<'_, B> {
    fn bin_cost(&self, load: u64) -> Option<u64> {
        if load == 0 {
            return Some(0);
        }
        self.ladder_caps
            .iter()
            .position(|&c| c >= load)
            .map(|n| self.ladder_costs[n])
    }

    fn lower_bound(&self, cost: u64, pos: usize) -> f64 {
        let remaining = self.suffix[pos] as f64;
        if self.rate <= 0.0 {
            return cost as f64;
        }
        let paid_slack: f64 = self
            .bins
            .iter()
            .map(|b| (b.cost as f64 / self.rate - b.load as f64).max(0.0))
            .sum();
        cost as f64 + self.rate * (remaining - paid_slack).max(0.0)
    }

    fn admits(&self, bin: &Bin, item: usize) -> bool {
        if bin.count >= self.max_items {
            return false;
        }
        let t = self.tenant[item];
        if self.shareable[item] {
            bin.exclusive.is_none_or(|e| e == t)
        } else {
            bin.tenants.iter().all(|&x| x == t)
        }
    }

    fn dfs(&mut self, pos: usize, cost: u64) {
        if self.aborted {
            return;
        }
        if self.budget.exhausted() {
            self.aborted = true;
            return;
        }
        if pos == self.order.len() {
            if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                self.best = Some((cost, self.assign.clone()));
            }
            return;
        }
        if let Some((best, _)) = &self.best {
            if self.lower_bound(cost, pos) > *best as f64 - 1.0 + 1e-6 {
                return;
            }
        }
        let item = self.order[pos];
        let first = if self.twin_of_prev[pos] {
            self.assign[pos - 1]
        } else {
            0
        };
        let used = self.bins.len();
        let last = if used < self.max_containers { used } else { used - 1 };
        if used == 0 && self.max_containers == 0 {
            return;
        }
        for j in first..=last {
            if j == used {
                let Some(new_cost) = self.bin_cost(self.caps[item]) else {
                    continue;
                };
                self.bins.push(Bin {
                    load: self.caps[item],
                    count: 1,
                    cost: new_cost,
                    tenants: alloc::vec![self.tenant[item]],
                    exclusive: (!self.shareable[item]).then_some(self.tenant[item]),
                });
                self.assign[pos] = j;
                self.dfs(pos + 1, cost + new_cost);
                self.bins.pop();
            } else {
                if !self.admits(&self.bins[j], item) {
                    continue;
                }
                let load = self.bins[j].load + self.caps[item];
                let Some(new_cost) = self.bin_cost(load) else {
                    continue;
                };
                let old_cost = self.bins[j].cost;
                let t = self.tenant[item];
                let bin = &mut self.bins[j];
                let prev_exclusive = bin.exclusive;
                let added_tenant = !bin.tenants.contains(&t);
                bin.load = load;
                bin.count += 1;
                bin.cost = new_cost;
                if added_tenant {
                    bin.tenants.push(t);
                }
                if !self.shareable[item] {
                    bin.exclusive = Some(t);
                }
                self.assign[pos] = j;
                self.dfs(pos + 1, cost - old_cost + new_cost);
                let bin = &mut self.bins[j];
                bin.load -= self.caps[item];
                bin.count -= 1;
                bin.cost = old_cost;
                if added_tenant {
                    bin.tenants.pop();
                }
                bin.exclusive = prev_exclusive;
            }
            if self.aborted {
                return;
            }
        }
    }
}

/// Branch and bound over item-to-container assignments. Each container is
/// priced at the cheapest variant holding its load, so variant choice is
/// implied. Containers are anonymous, so item `k` may only open container
/// `used` (never skip one), and identical items take non-decreasing
/// containers.
pub fn solve_exact<B: Budget>(
    inst: &ProblemInstance,
    budget: &B,
    cap: usize,
) -> Result<ExactSolution, ExactError> {
    let items = inst.items();
    if items.len() > cap {
        return Err(ExactError::TooLarge {
            items: items.len(),
            cap,
        });
    }
    if items.is_empty() {
        return Ok(ExactSolution {
            placement: Placement::default(),
            cost: Cents::ZERO,
            proven_optimal: true,
        });
    }
    let largest = inst.largest_capacity();
    if items.iter().any(|i| i.capacity > largest) {
        return Err(ExactError::Infeasible);
    }

    let mut tenant_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for item in items {
        let next = tenant_ids.len();
        tenant_ids.entry(item.tenant.as_str()).or_insert(next);
    }
    let tenant_of: Vec<usize> = items.iter().map(|i| tenant_ids[i.tenant.as_str()]).collect();

    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        items[b]
            .capacity
            .cmp(&items[a].capacity)
            .then(tenant_of[a].cmp(&tenant_of[b]))
            .then(items[a].shareable.cmp(&items[b].shareable))
            .then(a.cmp(&b))
    });
    let twin_of_prev: Vec<bool> = (0..order.len())
        .map(|p| {
            p > 0 && {
                let (a, b) = (order[p - 1], order[p]);
                items[a].capacity == items[b].capacity
                    && tenant_of[a] == tenant_of[b]
                    && items[a].shareable == items[b].shareable
            }
        })
        .collect();
    let mut suffix = alloc::vec![0u64; order.len() + 1];
    for p in (0..order.len()).rev() {
        suffix[p] = suffix[p + 1] + items[order[p]].capacity.0;
    }

    let positive: Vec<_> = inst.variants().iter().filter(|v| v.capacity.0 > 0).collect();
    let rate = positive
        .iter()
        .map(|v| v.cost.0 as f64 / v.capacity.0 as f64)
        .fold(f64::INFINITY, f64::min);

    let mut search = Search {
        budget,
        caps: items.iter().map(|i| i.capacity.0).collect(),
        tenant: tenant_of,
        shareable: items.iter().map(|i| i.shareable).collect(),
        twin_of_prev,
        suffix,
        ladder_caps: inst.variants().iter().map(|v| v.capacity.0).collect(),
        ladder_costs: inst.variants().iter().map(|v| v.cost.0).collect(),
        rate: if rate.is_finite() { rate } else { 0.0 },
        max_containers: inst.max_containers(),
        max_items: inst.max_items_per_container(),
        bins: Vec::new(),
        assign: alloc::vec![0; order.len()],
        best: None,
        aborted: false,
        order,
    };

    if let Some((cost, assign)) = ffd_incumbent(inst, &search.order) {
        search.best = Some((cost, assign));
    }
    search.dfs(0, 0);

    let Some((_, assign)) = search.best.take() else {
        return Err(if search.aborted {
            ExactError::BudgetExhausted
        } else {
            ExactError::Infeasible
        });
    };
    let mut item_to_container = alloc::vec![0; items.len()];
    for (pos, &j) in assign.iter().enumerate() {
        item_to_container[search.order[pos]] = j;
    }
    let placement = price(inst, item_to_container);
    let cost = total_cost(&placement, inst);
    Ok(ExactSolution {
        placement,
        cost,
        proven_optimal: !search.aborted,
    })
}

/// Prices an item-to-container map at the cheapest fitting variant per
/// container and returns it in canonical form.
pub(crate) fn price(inst: &ProblemInstance, item_to_container: Vec<usize>) -> Placement {
    let slots = item_to_container.iter().map(|&j| j + 1).max().unwrap_or(0);
    let mut loads = alloc::vec![crate::units::Mb(0); slots];
    for (i, &j) in item_to_container.iter().enumerate() {
        loads[j] += inst.items()[i].capacity;
    }
    let container_to_variant = loads
        .iter()
        .map(|&l| inst.cheapest_fitting(l).unwrap_or(inst.variants().len()))
        .collect();
    Placement {
        item_to_container,
        container_to_variant,
    }
    .canonical()
}

/// First-fit-decreasing start, expressed in search positions, if it is
/// feasible for this instance.
fn ffd_incumbent(inst: &ProblemInstance, order: &[usize]) -> Option<(u64, Vec<usize>)> {
    let packed = ffd_pack(inst.items(), inst.variants()).ok()?;
    let mut item_to_container = alloc::vec![0; inst.items().len()];
    for (j, c) in packed.iter().enumerate() {
        for &i in &c.items {
            item_to_container[i] = j;
        }
    }
    let placement = price(inst, item_to_container);
    if !check_feasible(&placement, inst).is_correct() {
        return None;
    }
    let cost = total_cost(&placement, inst).0;
    let assign = order.iter().map(|&i| placement.item_to_container[i]).collect();
    Some((cost, assign))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContainerVariant, NodeLimit, PlacementItem, Unlimited};
    use crate::units::Mb;
    use alloc::vec;

    #[test]
    fn single_item_forced() {
        let inst = ProblemInstance::new(
            vec![PlacementItem::new("a", Mb(64), "t", true)],
            vec![ContainerVariant::new("n", "x", Mb(3200), Cents(2000))],
            None,
            None,
        )
        .unwrap();
        let s = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(s.cost, Cents(2000));
        assert!(s.proven_optimal);
    }

    #[test]
    fn too_large_and_infeasible() {
        let items: Vec<_> = (0..3)
            .map(|k| PlacementItem::new(alloc::format!("i{k}"), Mb(64), "t", true))
            .collect();
        let v = vec![ContainerVariant::new("n", "x", Mb(100), Cents(1))];
        let inst = ProblemInstance::new(items.clone(), v.clone(), None, None).unwrap();
        assert_eq!(
            solve_exact(&inst, &Unlimited, 2),
            Err(ExactError::TooLarge { items: 3, cap: 2 })
        );
        let tight = ProblemInstance::new(items, v, Some(2), None).unwrap();
        assert_eq!(solve_exact(&tight, &Unlimited, 20), Err(ExactError::Infeasible));
    }

    #[test]
    fn budget_keeps_incumbent() {
        let items: Vec<_> = (0..8)
            .map(|k| PlacementItem::new(alloc::format!("i{k}"), Mb(64 * (k + 1)), "t", k % 2 == 0))
            .collect();
        let v = vec![
            ContainerVariant::new("a", "x", Mb(300), Cents(100)),
            ContainerVariant::new("b", "x", Mb(700), Cents(180)),
        ];
        let inst = ProblemInstance::new(items, v, None, None).unwrap();
        let s = solve_exact(&inst, &NodeLimit::new(1), DEFAULT_EXACT_CAP).unwrap();
        assert!(!s.proven_optimal);
        let full = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap();
        assert!(full.proven_optimal);
        assert!(full.cost <= s.cost);
        assert!(check_feasible(&full.placement, &inst).is_correct());
    }
}
