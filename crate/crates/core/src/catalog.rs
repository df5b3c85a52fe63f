//! Container variant catalogs.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::model::ContainerVariant;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate variant id `{0}`")]
    DuplicateVariantId(String),
    #[error("more than one zero-size, zero-cost variant")]
    MultipleZeroVariants,
    #[error("catalog has no variant with positive capacity")]
    EmptyCatalog,
}

/// A set of container offerings priced in EUR per month.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Catalog {
    source: String,
    variants: Vec<ContainerVariant>,
}

impl Catalog {
    pub const CURRENCY: &'static str = "EUR/mo";

    /// Checks id uniqueness and appends the zero variant when absent.
    pub fn new(source: impl Into<String>, mut variants: Vec<ContainerVariant>) -> Result<Self, CatalogError> {
        let mut ids = BTreeSet::new();
        for v in &variants {
            if !ids.insert(v.id.as_str()) {
                return Err(CatalogError::DuplicateVariantId(v.id.clone()));
            }
        }
        match variants.iter().filter(|v| v.is_zero()).count() {
            0 => {
                if ids.contains(ContainerVariant::ZERO_ID) {
                    return Err(CatalogError::DuplicateVariantId(ContainerVariant::ZERO_ID.into()));
                }
                variants.push(ContainerVariant::zero());
            }
            1 => {}
            _ => return Err(CatalogError::MultipleZeroVariants),
        }
        Ok(Catalog {
            source: source.into(),
            variants,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variants(&self) -> &[ContainerVariant] {
        &self.variants
    }

    /// Dominated variants pruned, ascending by capacity, zero variant first.
    pub fn normalize(&self) -> Catalog {
        Catalog {
            source: self.source.clone(),
            variants: normalize_variants(&self.variants),
        }
    }

    pub fn variant(&self, id: &str) -> Option<&ContainerVariant> {
        self.variants.iter().find(|v| v.id == id)
    }
}

/// `a` dominates `b` if it is at least as large and at most as expensive,
/// strictly better in one of the two.
fn dominates(a: &ContainerVariant, b: &ContainerVariant) -> bool {
    a.capacity >= b.capacity && a.cost <= b.cost && (a.capacity > b.capacity || a.cost < b.cost)
}

/// Removes every variant another variant dominates. Of several identical
/// (capacity, cost) offerings the one with the smallest id survives. The
/// zero variant is always kept.
pub fn prune_dominated_variants(variants: &[ContainerVariant]) -> Vec<ContainerVariant> {
    let mut out: Vec<ContainerVariant> = Vec::new();
    for v in variants {
        if v.is_zero() {
            if !out.iter().any(|o| o.is_zero()) {
                out.push(v.clone());
            }
            continue;
        }
        if variants.iter().any(|w| !w.is_zero() && dominates(w, v)) {
            continue;
        }
        let twin = variants
            .iter()
            .any(|w| w.capacity == v.capacity && w.cost == v.cost && w.id < v.id);
        if !twin {
            out.push(v.clone());
        }
    }
    out
}

/// The ladder every solver works on: pruned, ascending by capacity, with
/// exactly one zero variant at index 0. Capacities are strictly increasing
/// and costs non-decreasing along it.
pub fn normalize_variants(variants: &[ContainerVariant]) -> Vec<ContainerVariant> {
    let mut out = prune_dominated_variants(variants);
    if !out.iter().any(|v| v.is_zero()) {
        out.push(ContainerVariant::zero());
    }
    out.sort_by(|a, b| {
        a.capacity
            .cmp(&b.capacity)
            .then(a.cost.cmp(&b.cost))
            .then_with(|| a.id.cmp(&b.id))
    });
    out
}

/// Cost per MB comparison without floating point.
pub fn compare_efficiency(a: &ContainerVariant, b: &ContainerVariant) -> Ordering {
    let lhs = a.cost.0 as u128 * b.capacity.0 as u128;
    let rhs = b.cost.0 as u128 * a.capacity.0 as u128;
    lhs.cmp(&rhs)
        .then(a.capacity.cmp(&b.capacity))
        .then_with(|| a.id.cmp(&b.id))
}

/// Positive-capacity variants, most cost-efficient (lowest EUR per MB)
/// first; ties by smaller capacity, then id.
pub fn efficiency_order(variants: &[ContainerVariant]) -> Result<Vec<ContainerVariant>, CatalogError> {
    let mut out: Vec<ContainerVariant> = variants
        .iter()
        .filter(|v| v.capacity.0 > 0)
        .cloned()
        .collect();
    if out.is_empty() {
        return Err(CatalogError::EmptyCatalog);
    }
    out.sort_by(compare_efficiency);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{Cents, Mb};
    use alloc::vec;

    fn v(id: &str, mb: u64, cents: u64) -> ContainerVariant {
        ContainerVariant::new(id, "x", Mb(mb), Cents(cents))
    }

    #[test]
    fn efficiency_examples() {
        let order = efficiency_order(&[v("small", 3200, 2000), v("big", 6400, 3000)]).unwrap();
        assert_eq!(order[0].id, "big");
        let same = efficiency_order(&[v("b", 2000, 200), v("a", 1000, 100)]).unwrap();
        assert_eq!(same[0].id, "a");
        assert_eq!(efficiency_order(&[v("only", 10, 1)]).unwrap().len(), 1);
        assert_eq!(efficiency_order(&[ContainerVariant::zero()]), Err(CatalogError::EmptyCatalog));
    }

    #[test]
    fn pruning_examples() {
        let p = prune_dominated_variants(&[v("a", 4096, 4000), v("b", 4096, 3500)]);
        assert_eq!(p, vec![v("b", 4096, 3500)]);
        let p = prune_dominated_variants(&[v("a", 1024, 1000), v("b", 2048, 900)]);
        assert_eq!(p, vec![v("b", 2048, 900)]);
        let p = prune_dominated_variants(&[v("b", 1024, 1000), v("a", 1024, 1000)]);
        assert_eq!(p, vec![v("a", 1024, 1000)]);
        let p = prune_dominated_variants(&[ContainerVariant::zero(), v("free", 64, 0)]);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn normalize_example1() {
        let cat = Catalog::new("ex1", vec![v("N", 3200, 2000), v("1", 6400, 3000)]).unwrap();
        let n = cat.normalize();
        let ids: Vec<_> = n.variants().iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, ["zero", "N", "1"]);
        assert_eq!(n.normalize(), n);
    }

    #[test]
    fn catalog_errors() {
        assert_eq!(
            Catalog::new("x", vec![v("a", 1, 1), v("a", 2, 2)]),
            Err(CatalogError::DuplicateVariantId("a".into()))
        );
        assert_eq!(
            Catalog::new("x", vec![v("z1", 0, 0), v("z2", 0, 0)]),
            Err(CatalogError::MultipleZeroVariants)
        );
        let c = Catalog::new("x", vec![v("a", 1, 1)]).unwrap();
        assert_eq!(c.variants().len(), 2);
    }
}
