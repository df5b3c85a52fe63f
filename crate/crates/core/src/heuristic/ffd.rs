use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::{ContainerKind, ContainerState, HeuristicError, SearchState};
use crate::catalog::efficiency_order;
use crate::model::{ContainerVariant, Placement, PlacementItem, ProblemInstance};
use crate::units::{Cents, Mb};

/// A container opened by first-fit-decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedContainer {
    /// Index into the variant ladder passed to [`ffd_pack`].
    pub variant: usize,
    pub kind: ContainerKind,
    pub items: Vec<usize>,
    pub load: Mb,
}

/// Items grouped into conflict-free sub-problems: each tenant's
/// non-shareable items (tenants in name order), then all shareable items.
fn groups(items: &[PlacementItem]) -> Vec<(ContainerKind, Vec<usize>)> {
    let mut exclusive: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut shared = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if item.shareable {
            shared.push(i);
        } else {
            exclusive.entry(item.tenant.as_str()).or_default().push(i);
        }
    }
    let mut out: Vec<(ContainerKind, Vec<usize>)> = exclusive
        .into_iter()
        .map(|(t, list)| (ContainerKind::TenantExclusive(String::from(t)), list))
        .collect();
    if !shared.is_empty() {
        out.push((ContainerKind::Shareable, shared));
    }
    out
}

fn sort_decreasing(items: &[PlacementItem], list: &mut [usize]) {
    list.sort_by(|&a, &b| {
        items[b]
            .capacity
            .cmp(&items[a].capacity)
            .then_with(|| items[a].id.cmp(&items[b].id))
    });
}

/// First fit decreasing per sub-problem. A new container takes the first
/// variant in efficiency order that holds the item; `ladder` must be the
/// normalized variant list and the returned variant indices refer to it.
pub fn ffd_pack_limited(
    items: &[PlacementItem],
    ladder: &[ContainerVariant],
    max_items: usize,
) -> Result<Vec<PackedContainer>, HeuristicError> {
    if items.is_empty() {
        return Ok(Vec::new());
    }
    let order = efficiency_order(ladder).map_err(|_| HeuristicError::EmptyCatalog)?;
    let ladder_index = |v: &ContainerVariant| ladder.iter().position(|w| w.id == v.id).unwrap();

    let mut containers = Vec::new();
    for (kind, mut list) in groups(items) {
        sort_decreasing(items, &mut list);
        let first_local = containers.len();
        for i in list {
            let cap = items[i].capacity;
            let slot = containers[first_local..].iter().position(|c: &PackedContainer| {
                c.load + cap <= ladder[c.variant].capacity && c.items.len() < max_items
            });
            match slot {
                Some(k) => {
                    let c = &mut containers[first_local + k];
                    c.items.push(i);
                    c.load += cap;
                }
                None => {
                    let variant = order
                        .iter()
                        .find(|v| v.capacity >= cap)
                        .ok_or_else(|| HeuristicError::ItemTooLarge(items[i].id.clone()))?;
                    containers.push(PackedContainer {
                        variant: ladder_index(variant),
                        kind: kind.clone(),
                        items: alloc::vec![i],
                        load: cap,
                    });
                }
            }
        }
    }
    Ok(containers)
}

/// [`ffd_pack_limited`] without an item count limit.
pub fn ffd_pack(items: &[PlacementItem], ladder: &[ContainerVariant]) -> Result<Vec<PackedContainer>, HeuristicError> {
    ffd_pack_limited(items, ladder, usize::MAX)
}

/// Initial search state for `inst`.
pub fn ffd_initial(inst: &ProblemInstance) -> Result<SearchState, HeuristicError> {
    let packed = ffd_pack_limited(inst.items(), inst.variants(), inst.max_items_per_container())?;
    if packed.len() > inst.max_containers() {
        return Err(HeuristicError::TooManyContainers {
            needed: packed.len(),
            allowed: inst.max_containers(),
        });
    }
    let mut assignment = alloc::vec![0; inst.items().len()];
    let mut containers = Vec::with_capacity(packed.len());
    for (j, c) in packed.into_iter().enumerate() {
        for &i in &c.items {
            assignment[i] = j;
        }
        containers.push(ContainerState {
            variant: c.variant,
            kind: c.kind,
            load: c.load,
            count: c.items.len(),
        });
    }
    Ok(SearchState::new(inst, assignment, containers))
}

/// Tenant-specific hosting: every tenant gets its own containers, packed
/// first fit decreasing into the largest variant, each then priced at the
/// cheapest variant that holds it. No container bound applies.
pub fn hosting_baseline(inst: &ProblemInstance) -> Result<(Placement, Cents), HeuristicError> {
    let ladder = inst.variants();
    let largest = ladder.len() - 1;
    if ladder[largest].capacity.0 == 0 && !inst.items().is_empty() {
        return Err(HeuristicError::EmptyCatalog);
    }
    let mut by_tenant: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, item) in inst.items().iter().enumerate() {
        by_tenant.entry(item.tenant.as_str()).or_default().push(i);
    }
    let mut item_to_container = alloc::vec![0; inst.items().len()];
    let mut loads: Vec<Mb> = Vec::new();
    for list in by_tenant.values_mut() {
        sort_decreasing(inst.items(), list);
        let first = loads.len();
        for &i in list.iter() {
            let cap = inst.items()[i].capacity;
            if cap > ladder[largest].capacity {
                return Err(HeuristicError::ItemTooLarge(inst.items()[i].id.clone()));
            }
            let slot = loads[first..]
                .iter()
                .position(|&l| l + cap <= ladder[largest].capacity);
            let j = match slot {
                Some(k) => first + k,
                None => {
                    loads.push(Mb(0));
                    loads.len() - 1
                }
            };
            loads[j] += cap;
            item_to_container[i] = j;
        }
    }
    let container_to_variant: Vec<usize> = loads
        .iter()
        .map(|&l| inst.cheapest_fitting(l).unwrap())
        .collect();
    let cost = container_to_variant.iter().map(|&n| ladder[n].cost).sum();
    let placement = Placement {
        item_to_container,
        container_to_variant,
    }
    .canonical();
    Ok((placement, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_feasible, total_cost};
    use alloc::vec;

    fn example1() -> ProblemInstance {
        let u = 64;
        ProblemInstance::new(
            vec![
                PlacementItem::new("t1-1", Mb(13 * u), "t1", true),
                PlacementItem::new("t1-2", Mb(19 * u), "t1", false),
                PlacementItem::new("t1-3", Mb(50 * u), "t1", false),
                PlacementItem::new("t2-1", Mb(11 * u), "t2", true),
                PlacementItem::new("t3-1", Mb(21 * u), "t3", true),
            ],
            vec![
                ContainerVariant::new("1", "one", Mb(6400), Cents(3000)),
                ContainerVariant::new("N", "n", Mb(3200), Cents(2000)),
            ],
            None,
            None,
        )
        .unwrap()
    }

    #[test]
    fn example1_structure() {
        let inst = example1();
        let s = ffd_initial(&inst).unwrap();
        let p = s.to_placement();
        assert!(check_feasible(&p, &inst).is_correct());
        let contents = p.contents();
        assert_eq!(contents, vec![vec![0, 3, 4], vec![1, 2]]);
        // both containers open on the more efficient 6400 MB variant
        assert_eq!(total_cost(&p, &inst), Cents(6000));
        assert_eq!(inst.max_containers(), 3);
    }

    #[test]
    fn empty_and_single_tenant() {
        let inst = ProblemInstance::new(vec![], vec![], None, None).unwrap();
        assert_eq!(ffd_initial(&inst).unwrap().cost(), Cents(0));

        let items: Vec<_> = [5u64, 3, 4, 2]
            .iter()
            .enumerate()
            .map(|(k, &c)| PlacementItem::new(alloc::format!("i{k}"), Mb(c), "t", false))
            .collect();
        let v = vec![ContainerVariant::new("b", "x", Mb(7), Cents(1))];
        let packed = ffd_pack(&items, &normalize(&v)).unwrap();
        let sets: Vec<_> = packed.iter().map(|c| c.items.clone()).collect();
        assert_eq!(sets, vec![vec![0, 3], vec![2, 1]]);
        assert!(packed.iter().all(|c| c.kind == ContainerKind::TenantExclusive("t".into())));
    }

    fn normalize(v: &[ContainerVariant]) -> Vec<ContainerVariant> {
        crate::catalog::normalize_variants(v)
    }

    #[test]
    fn too_large() {
        let items = vec![PlacementItem::new("big", Mb(9000), "t", true)];
        let ladder = normalize(&[ContainerVariant::new("b", "x", Mb(7), Cents(1))]);
        assert_eq!(
            ffd_pack(&items, &ladder),
            Err(HeuristicError::ItemTooLarge("big".into()))
        );
    }

    #[test]
    fn hosting_example1() {
        let inst = example1();
        let (p, cost) = hosting_baseline(&inst).unwrap();
        assert_eq!(p.contents().len(), 3);
        assert_eq!(cost, Cents(7000));
    }
}
