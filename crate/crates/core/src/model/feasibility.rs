use alloc::format;
use alloc::vec::Vec;

use super::{conflicts, Placement, ProblemInstance};
use crate::report::{ValidationReport, Violation};
use crate::units::{Cents, Mb};

/// Stable constraint violation codes.
pub mod codes {
    /// An item is unassigned or assigned to a container outside 0..C.
    pub const C1_ASSIGNMENT: &str = "C1_ASSIGNMENT";
    /// A container has no valid variant, or there are more than C.
    pub const C2_VARIANT: &str = "C2_VARIANT";
    pub const C3_CAPACITY: &str = "C3_CAPACITY";
    pub const C4_CONFLICT: &str = "C4_CONFLICT";
    pub const C5_COUNT: &str = "C5_COUNT";
}

fn container_ref(j: usize) -> Option<alloc::string::String> {
    Some(format!("c{j}"))
}

/// Reports every violated placement constraint.
pub fn check_feasible(p: &Placement, inst: &ProblemInstance) -> ValidationReport {
    let items = inst.items();
    let c = inst.max_containers();
    let mut violations = Vec::new();

    if p.item_to_container.len() != items.len() {
        violations.push(Violation::new(
            codes::C1_ASSIGNMENT,
            None,
            format!(
                "placement assigns {} items, instance has {}",
                p.item_to_container.len(),
                items.len()
            ),
        ));
    }
    for (i, &j) in p.item_to_container.iter().enumerate().take(items.len()) {
        if j >= c {
            violations.push(Violation::new(
                codes::C1_ASSIGNMENT,
                Some(items[i].id.clone()),
                format!("item `{}` is in container {j}, only {c} exist", items[i].id),
            ));
        }
    }

    if p.container_to_variant.len() > c {
        violations.push(Violation::new(
            codes::C2_VARIANT,
            None,
            format!(
                "placement configures {} containers, at most {c} allowed",
                p.container_to_variant.len()
            ),
        ));
    }
    for (j, &n) in p.container_to_variant.iter().enumerate() {
        if n >= inst.variants().len() {
            violations.push(Violation::new(
                codes::C2_VARIANT,
                container_ref(j),
                format!("container {j} uses unknown variant index {n}"),
            ));
        }
    }

    let slots = p.container_slots();
    let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); slots];
    for (i, &j) in p.item_to_container.iter().enumerate().take(items.len()) {
        members[j].push(i);
    }
    for (j, list) in members.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let load: Mb = list.iter().map(|&i| items[i].capacity).sum();
        let capacity = inst
            .variants()
            .get(p.variant_of(j))
            .map(|v| v.capacity)
            .unwrap_or(Mb(0));
        if load > capacity {
            violations.push(Violation::new(
                codes::C3_CAPACITY,
                container_ref(j),
                format!("container {j} holds {load} but offers {capacity}"),
            ));
        }
        for (a_pos, &a) in list.iter().enumerate() {
            for &b in &list[a_pos + 1..] {
                if conflicts(&items[a], &items[b]) {
                    violations.push(Violation::new(
                        codes::C4_CONFLICT,
                        container_ref(j),
                        format!(
                            "container {j} co-locates `{}` ({}) and `{}` ({})",
                            items[a].id, items[a].tenant, items[b].id, items[b].tenant
                        ),
                    ));
                }
            }
        }
        if list.len() > inst.max_items_per_container() {
            violations.push(Violation::new(
                codes::C5_COUNT,
                container_ref(j),
                format!(
                    "container {j} holds {} items, at most {} allowed",
                    list.len(),
                    inst.max_items_per_container()
                ),
            ));
        }
    }
    ValidationReport::from_violations(violations)
}

/// Sum of the configured variants' costs. Unknown variant indices count as
/// zero; `check_feasible` reports them.
pub fn total_cost(p: &Placement, inst: &ProblemInstance) -> Cents {
    p.container_to_variant
        .iter()
        .map(|&n| inst.variants().get(n).map(|v| v.cost).unwrap_or(Cents::ZERO))
        .sum()
}
