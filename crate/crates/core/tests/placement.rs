use cepp_core::heuristic::{ffd_pack, hosting_baseline, local_search, local_search_observed, SearchConfig};
use cepp_core::model::{check_feasible, solve_exact, total_cost, ExactError, Unlimited, DEFAULT_EXACT_CAP};
use cepp_core::{fixtures, Cents, ContainerVariant, Mb, PlacementItem, ProblemInstance};
use proptest::prelude::*;

/// Cheapest raw variant holding `load`, or None.
fn cheapest(variants: &[ContainerVariant], load: u64) -> Option<u64> {
    variants
        .iter()
        .filter(|v| v.capacity.0 >= load)
        .map(|v| v.cost.0)
        .min()
}

/// Minimum cost over all set partitions of the items into at most
/// `max_bins` blocks, each block conflict free, within `max_items` and
/// priced at the cheapest holding variant.
fn oracle(items: &[PlacementItem], variants: &[ContainerVariant], max_bins: usize, max_items: usize) -> Option<u64> {
    fn clash(a: &PlacementItem, b: &PlacementItem) -> bool {
        a.tenant != b.tenant && !(a.shareable && b.shareable)
    }
    fn rec(
        k: usize,
        items: &[PlacementItem],
        blocks: &mut Vec<Vec<usize>>,
        variants: &[ContainerVariant],
        max_bins: usize,
        max_items: usize,
        best: &mut Option<u64>,
    ) {
        if k == items.len() {
            let mut total = 0;
            for b in blocks.iter() {
                let load = b.iter().map(|&i| items[i].capacity.0).sum();
                match cheapest(variants, load) {
                    Some(c) => total += c,
                    None => return,
                }
            }
            if best.map_or(true, |b| total < b) {
                *best = Some(total);
            }
            return;
        }
        for j in 0..blocks.len() {
            if blocks[j].len() < max_items && blocks[j].iter().all(|&i| !clash(&items[i], &items[k])) {
                blocks[j].push(k);
                rec(k + 1, items, blocks, variants, max_bins, max_items, best);
                blocks[j].pop();
            }
        }
        if blocks.len() < max_bins {
            blocks.push(vec![k]);
            rec(k + 1, items, blocks, variants, max_bins, max_items, best);
            blocks.pop();
        }
    }
    let mut best = None;
    rec(0, items, &mut Vec::new(), variants, max_bins, max_items, &mut best);
    best
}

fn three_variants() -> Vec<ContainerVariant> {
    vec![
        ContainerVariant::new("s", "x", Mb(1024), Cents(800)),
        ContainerVariant::new("m", "x", Mb(2048), Cents(1500)),
        ContainerVariant::new("l", "x", Mb(4096), Cents(2600)),
    ]
}

fn item_strategy(tenants: usize) -> impl Strategy<Value = (u64, usize, bool)> {
    (1u64..=40, 0..tenants, any::<bool>())
}

fn instance_strategy() -> impl Strategy<Value = ProblemInstance> {
    (2usize..=4)
        .prop_flat_map(|t| prop::collection::vec(item_strategy(t), 1..=7))
        .prop_map(|raw| {
            let items = raw
                .into_iter()
                .enumerate()
                .map(|(i, (units, t, sh))| PlacementItem::new(format!("i{i}"), Mb(units * 64), format!("t{t}"), sh))
                .collect();
            ProblemInstance::new(items, three_variants(), None, None).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_matches_exhaustive_oracle(inst in instance_strategy()) {
        let sol = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap();
        let want = oracle(inst.items(), &three_variants(), inst.max_containers(), inst.max_items_per_container());
        prop_assert_eq!(Some(sol.cost.0), want);
        prop_assert!(check_feasible(&sol.placement, &inst).is_correct());
        prop_assert_eq!(total_cost(&sol.placement, &inst), sol.cost);
    }

    #[test]
    fn heuristic_never_beats_exact(inst in instance_strategy(), seed in any::<u64>()) {
        let exact = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap();
        let cfg = SearchConfig { max_transformations: 2_000, ..SearchConfig::with_seed(seed) };
        let h = local_search(&inst, &cfg).unwrap();
        prop_assert!(h.cost >= exact.cost);
        prop_assert!(h.cost <= h.initial_cost);
        prop_assert!(check_feasible(&h.placement, &inst).is_correct());
    }

    #[test]
    fn accepted_states_feasible_and_monotone(inst in instance_strategy(), seed in any::<u64>()) {
        let cfg = SearchConfig { max_transformations: 1_000, ..SearchConfig::with_seed(seed) };
        let mut last = Cents(u64::MAX);
        let mut violations = 0;
        local_search_observed(&inst, &cfg, |s| {
            if !s.caches_consistent() || s.cost() > last || !check_feasible(&s.to_placement(), &inst).is_correct() {
                violations += 1;
            }
            last = s.cost();
        }).unwrap();
        prop_assert_eq!(violations, 0);
    }
}

#[test]
fn example1_exact_is_fifty() {
    let inst = fixtures::example1_instance();
    let sol = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap();
    assert_eq!(sol.cost, Cents(5000));
    assert!(sol.proven_optimal);
    let raw = fixtures::example1_catalog();
    assert_eq!(
        oracle(inst.items(), raw.variants(), inst.max_containers(), inst.max_items_per_container()),
        Some(5000)
    );
}

#[test]
fn example1_hosting_baseline_is_seventy() {
    // t1: 82 units need 5248 MB, one 6400 MB container at 30; t2 and t3
    // fit 3200 MB at 20 each.
    let (_, cost) = hosting_baseline(&fixtures::example1_instance()).unwrap();
    assert_eq!(cost, Cents(7000));
}

#[test]
fn example1_local_search_reaches_optimum() {
    let inst = fixtures::example1_instance();
    let h = local_search(&inst, &SearchConfig::with_seed(0)).unwrap();
    assert_eq!(h.cost, Cents(5000));
}

#[test]
fn too_large_guard() {
    let items = (0..21)
        .map(|i| PlacementItem::new(format!("i{i}"), Mb(64), "t", true))
        .collect();
    let inst = ProblemInstance::new(items, three_variants(), None, None).unwrap();
    assert_eq!(
        solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).unwrap_err(),
        ExactError::TooLarge { items: 21, cap: 20 }
    );
}

#[test]
fn ffd_single_variant_bound() {
    use rand::{Rng, SeedableRng};
    let bin = ContainerVariant::new("b", "x", Mb(100), Cents(1));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(1..=8);
        let items: Vec<PlacementItem> = (0..n)
            .map(|i| PlacementItem::new(format!("i{i}"), Mb(rng.gen_range(1..=100)), "t", true))
            .collect();
        let ffd = ffd_pack(&items, &[bin.clone()]).unwrap().len() as u64;
        let opt = oracle(&items, &[bin.clone()], n, n).unwrap();
        assert!(ffd <= (11 * opt + 6).div_ceil(9), "ffd {ffd} opt {opt}");
    }
}
