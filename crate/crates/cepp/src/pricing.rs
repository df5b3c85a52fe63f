//! Pricing of processes against a catalog, alone or on top of a
//! background workload.

use cepp_core::heuristic::{local_search, SearchConfig};
use cepp_core::rewrite::{Pricer, PricingError};
use cepp_core::workload::process_item;
use cepp_core::{Catalog, Cents, Ipcg, PlacementItem, ProblemInstance};

/// Cheapest variant holding `g` on its own.
pub fn standalone_cost(g: &Ipcg, catalog: &Catalog) -> Result<Cents, PricingError> {
    let need = g.total_capacity();
    catalog
        .variants()
        .iter()
        .filter(|v| !v.is_zero() && v.capacity >= need)
        .map(|v| v.cost)
        .min()
        .ok_or_else(|| PricingError(format!("{need} exceed every variant of `{}`", catalog.source())))
}

/// Prices process sets by marginal cost: the heuristic placement cost of
/// background plus processes, minus that of the background alone, floored
/// at the summed standalone costs.
#[derive(Clone, Debug)]
pub struct PricingContext {
    pub catalog: Catalog,
    pub background: Vec<PlacementItem>,
    pub search: SearchConfig,
}

impl PricingContext {
    pub fn new(catalog: Catalog, background: Vec<PlacementItem>, seed: u64) -> Self {
        PricingContext {
            catalog,
            background,
            search: SearchConfig::with_seed(seed),
        }
    }

    fn placement_cost(&self, items: Vec<PlacementItem>) -> Result<Cents, PricingError> {
        if items.is_empty() {
            return Ok(Cents::ZERO);
        }
        let inst = ProblemInstance::new(items, self.catalog.variants().to_vec(), None, None)
            .map_err(|e| PricingError(e.to_string()))?;
        local_search(&inst, &self.search)
            .map(|s| s.cost)
            .map_err(|e| PricingError(e.to_string()))
    }

    pub fn price_graphs(&self, graphs: &[Ipcg]) -> Result<Cents, PricingError> {
        let mut floor = Cents::ZERO;
        let mut items = self.background.clone();
        for (k, g) in graphs.iter().enumerate() {
            floor += standalone_cost(g, &self.catalog)?;
            items.push(process_item(format!("__session_{k}"), g).map_err(|e| PricingError(e.to_string()))?);
        }
        if self.background.is_empty() && graphs.len() == 1 {
            return Ok(floor);
        }
        let with = self.placement_cost(items)?;
        let without = self.placement_cost(self.background.clone())?;
        Ok(with.saturating_sub(without).max(floor))
    }
}

impl Pricer for PricingContext {
    fn price(&self, graphs: &[Ipcg]) -> Result<Cents, PricingError> {
        self.price_graphs(graphs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cepp_core::fixtures;
    use cepp_core::rewrite::improve;

    #[test]
    fn invoicing_prices() {
        let ctx = PricingContext::new(fixtures::aws_t2_catalog(), Vec::new(), 0);
        let g = fixtures::invoicing();
        assert_eq!(ctx.price(std::slice::from_ref(&g)).unwrap(), Cents(1594));
        let (better, _) = improve(&g).unwrap();
        assert_eq!(ctx.price(&[better]).unwrap(), Cents(797));
    }

    #[test]
    fn too_large_graph_has_no_price() {
        let ctx = PricingContext::new(fixtures::aws_t2_catalog(), Vec::new(), 0);
        let big = fixtures::chain("t", "x", 40, true);
        assert!(ctx.price(&[big]).is_err());
    }

    #[test]
    fn marginal_cost_never_below_standalone() {
        let background = vec![PlacementItem::new("bg", cepp_core::Mb(128), "t1", true)];
        let ctx = PricingContext::new(fixtures::aws_t2_catalog(), background, 3);
        let g = fixtures::chain("t1", "x", 4, true);
        assert_eq!(ctx.price(&[g]).unwrap(), Cents(797));
    }
}
