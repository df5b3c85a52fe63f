//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test -p cepp --test acceptance`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use cepp::formats::{self, placement_to_doc};
use cepp::pricing::standalone_cost;
use cepp::solve::{solve, Method, SolveOptions};
use cepp_core::heuristic::{ffd_pack, hosting_baseline, local_search, local_search_observed, SearchConfig};
use cepp_core::ipcg::{process_shareable, validate_ipcg};
use cepp_core::model::{check_feasible, solve_exact, ExactError, Unlimited, DEFAULT_EXACT_CAP};
use cepp_core::rewrite::{apply_rule, decompose, find_matches, improve, verify_rewrite, RewriteRuleId};
use cepp_core::workload::{flatten, generate, CapacitySpec, GeneratorSpec, ProcessCount};
use cepp_core::{fixtures, Cents, ContainerVariant, Ipcg, Mb, PlacementItem, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ------------------------------------------------------------- oracles

fn clash(a: &PlacementItem, b: &PlacementItem) -> bool {
    a.tenant != b.tenant && !(a.shareable && b.shareable)
}

/// Minimum (cost, containers) over every conflict-free set partition of the
/// items, each block priced at the cheapest raw variant holding it.
fn oracle(items: &[PlacementItem], variants: &[ContainerVariant], max_bins: usize) -> Option<(u64, usize)> {
    fn rec(
        k: usize,
        items: &[PlacementItem],
        blocks: &mut Vec<Vec<usize>>,
        variants: &[ContainerVariant],
        max_bins: usize,
        best: &mut Option<(u64, usize)>,
    ) {
        if k == items.len() {
            let mut total = 0;
            for b in blocks.iter() {
                let load: u64 = b.iter().map(|&i| items[i].capacity.0).sum();
                match variants.iter().filter(|v| v.capacity.0 >= load).map(|v| v.cost.0).min() {
                    Some(c) => total += c,
                    None => return,
                }
            }
            let cand = (total, blocks.len());
            if best.map_or(true, |b| cand < b) {
                *best = Some(cand);
            }
            return;
        }
        for j in 0..blocks.len() {
            if blocks[j].iter().all(|&i| !clash(&items[i], &items[k])) {
                blocks[j].push(k);
                rec(k + 1, items, blocks, variants, max_bins, best);
                blocks[j].pop();
            }
        }
        if blocks.len() < max_bins {
            blocks.push(vec![k]);
            rec(k + 1, items, blocks, variants, max_bins, best);
            blocks.pop();
        }
    }
    let mut best = None;
    rec(0, items, &mut Vec::new(), variants, max_bins, &mut best);
    best
}

fn three_variants() -> Vec<ContainerVariant> {
    vec![
        ContainerVariant::new("s", "x", Mb(1024), Cents(800)),
        ContainerVariant::new("m", "x", Mb(2048), Cents(1500)),
        ContainerVariant::new("l", "x", Mb(4096), Cents(2600)),
    ]
}

fn random_items(rng: &mut ChaCha8Rng, n: usize, max_units: u64) -> Vec<PlacementItem> {
    let tenants = rng.gen_range(2..=4);
    (0..n)
        .map(|i| {
            PlacementItem::new(
                format!("i{i}"),
                Mb(64 * rng.gen_range(1..=max_units)),
                format!("t{}", rng.gen_range(0..tenants)),
                rng.gen_bool(0.6),
            )
        })
        .collect()
}

fn generated(n: usize, seed: u64) -> ProblemInstance {
    let spec = GeneratorSpec {
        tenant_count: 4,
        processes_per_tenant: ProcessCount::PerTenant((0..4).map(|t| n / 4 + usize::from(t < n % 4)).collect()),
        capacity: CapacitySpec::Spread {
            mean: Mb(768),
            spread: Mb(640),
        },
        non_shareable_ratio: 0.4,
        seed,
    };
    let catalog = formats::load_catalog(&fixture_dir().join("catalogs/multicloud.catalog.json")).unwrap();
    flatten(&generate(&spec).unwrap(), &catalog).unwrap()
}

// ------------------------------------------------------------ criteria

fn c1_example1() -> Outcome {
    let start = Instant::now();
    let dir = fixture_dir();
    let w = formats::load_workload(&dir.join("workloads/example1.workload.json")).map_err(|e| e.to_string())?;
    let c = formats::load_catalog(&dir.join("catalogs/example1.catalog.json")).map_err(|e| e.to_string())?;
    let inst = flatten(&w, &c).map_err(|e| e.to_string())?;
    let sol = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).map_err(|e| e.to_string())?;
    check(sol.cost == Cents(5000), || format!("exact cost {}", sol.cost))?;
    check(sol.proven_optimal, || "not proven optimal".into())?;
    let p = sol.placement.canonical();
    let mut groups: Vec<(String, Vec<u64>)> = p
        .contents()
        .into_iter()
        .enumerate()
        .map(|(j, members)| {
            let mut units: Vec<u64> = members.iter().map(|&i| inst.items()[i].capacity.0 / 64).collect();
            units.sort();
            (inst.variants()[p.variant_of(j)].id.clone(), units)
        })
        .collect();
    groups.sort();
    let want = vec![("1".to_string(), vec![19, 50]), ("N".to_string(), vec![11, 13, 21])];
    check(groups == want, || format!("structure {groups:?}"))?;
    let (_, hosting) = hosting_baseline(&inst).map_err(|e| e.to_string())?;
    check((6000..=9000).contains(&hosting.0), || format!("hosting {hosting}"))?;
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("cost 50.00, hosting {hosting}, {took:.1?}"))
}

fn c2_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in 0..50 {
        let n = rng.gen_range(1..=8);
        let items = random_items(&mut rng, n, 40);
        let inst = ProblemInstance::new(items.clone(), three_variants(), None, None).unwrap();
        let exact = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).map_err(|e| format!("case {case}: {e}"))?;
        let want = oracle(&items, &three_variants(), inst.max_containers()).map(|o| o.0);
        check(want == Some(exact.cost.0), || format!("case {case}: exact {} oracle {want:?}", exact.cost))?;
    }
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!("50/50 equal, {took:.1?}"))
}

fn c3_heuristic_quality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut good = 0;
    let mut worst: f64 = 1.0;
    for case in 0..20 {
        let items = random_items(&mut rng, 20, 24);
        let inst = ProblemInstance::new(items, three_variants(), None, None).unwrap();
        let exact = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP).map_err(|e| format!("case {case}: {e}"))?;
        let h = local_search(&inst, &SearchConfig::with_seed(case)).map_err(|e| e.to_string())?;
        check(h.cost >= exact.cost, || format!("case {case}: heuristic {} below exact {}", h.cost, exact.cost))?;
        let ratio = h.cost.0 as f64 / exact.cost.0 as f64;
        worst = worst.max(ratio);
        if ratio <= 1.40 {
            good += 1;
        }
    }
    check(good >= 16, || format!("{good}/20 within 1.40"))?;
    Ok(format!("{good}/20 within 1.40, worst ratio {worst:.3}"))
}

fn c4_heuristic_speed() -> Outcome {
    let inst = generated(100, 4);
    let start = Instant::now();
    let h = local_search(&inst, &SearchConfig::with_seed(4)).map_err(|e| e.to_string())?;
    let took = within(Duration::from_secs(5), start)?;
    let guard = solve_exact(&inst, &Unlimited, DEFAULT_EXACT_CAP);
    check(matches!(guard, Err(ExactError::TooLarge { items: 100, .. })), || format!("exact guard {guard:?}"))?;
    Ok(format!("100 items in {took:.1?}, cost {}, exact TooLarge", h.cost))
}

fn bundled_graphs() -> Result<Vec<(String, Ipcg)>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir().join("graphs"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let g = formats::load_ipcg(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok((p.file_name().unwrap().to_string_lossy().into_owned(), g))
        })
        .collect()
}

fn c5_rewrite_suite() -> Outcome {
    let start = Instant::now();
    let mut graphs = bundled_graphs()?;
    graphs.extend(fixtures::all_graphs());
    let mut checked = 0;
    for (name, g) in &graphs {
        for rule in [
            RewriteRuleId::ShToNonsh,
            RewriteRuleId::NonshToSh,
            RewriteRuleId::CombineNeighbors,
            RewriteRuleId::RouterToRoutingSlip,
        ] {
            for m in find_matches(rule, g) {
                let r = apply_rule(rule, &m, g).map_err(|e| format!("{name} {}: {e}", rule.as_str()))?;
                check(verify_rewrite(g, &r), || format!("{name} {}: verify_rewrite failed", rule.as_str()))?;
                check(r.graphs.iter().all(|o| validate_ipcg(o).is_correct()), || {
                    format!("{name} {}: invalid output", rule.as_str())
                })?;
                checked += 1;
            }
        }
        let r = decompose(g).map_err(|e| format!("{name} decompose: {e}"))?;
        check(verify_rewrite(g, &r), || format!("{name} decompose: verify_rewrite failed"))?;
        checked += 1;
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!("{checked} rewrites over {} graphs, {took:.1?}", graphs.len()))
}

fn c6_decomposition() -> Outcome {
    let graphs = bundled_graphs()?;
    let get = |name: &str| graphs.iter().find(|(n, _)| n == name).map(|(_, g)| g.clone());
    let whole = get("partitioning.ipcg.json").ok_or("partitioning fixture missing")?;
    let parts = decompose(&whole).map_err(|e| e.to_string())?.graphs;
    let sh = parts.iter().filter(|p| process_shareable(p)).count();
    check(sh == 3 && parts.len() == 4, || format!("{sh} shareable of {}", parts.len()))?;
    let mut inputs = 0;
    let mut outputs = 0;
    let mut mixed = 0;
    for (_, g) in graphs.iter().filter(|(n, _)| n.starts_with("edocuments_")) {
        inputs += 1;
        let n = decompose(g).map_err(|e| e.to_string())?.graphs.len();
        if n > 1 {
            mixed += 1;
        }
        outputs += n;
    }
    check(inputs == 13 && mixed == 6 && outputs == 19, || format!("{inputs} processes ({mixed} mixed) cut to {outputs}"))?;
    Ok(format!("3 + 1 graphs; {inputs} processes ({mixed} mixed) cut to {outputs}"))
}

fn c7_invoicing() -> Outcome {
    let g = formats::load_ipcg(&fixture_dir().join("graphs/invoicing.ipcg.json")).map_err(|e| e.to_string())?;
    let catalog = formats::load_catalog(&fixture_dir().join("catalogs/aws_t2.catalog.json")).map_err(|e| e.to_string())?;
    let (better, applied) = improve(&g).map_err(|e| e.to_string())?;
    let removed = g.len() as i64 - better.len() as i64;
    check(removed == 5, || format!("{removed} nodes removed"))?;
    let before = standalone_cost(&g, &catalog).map_err(|e| e.0)?;
    let after = standalone_cost(&better, &catalog).map_err(|e| e.0)?;
    check(before == Cents(1594) && after == Cents(797), || format!("{before} -> {after}"))?;
    Ok(format!("{} rewrites, 5 nodes removed, {before} -> {after}", applied.len()))
}

fn c8_ffd_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bin = ContainerVariant::new("b", "x", Mb(1024), Cents(100));
    for case in 0..100 {
        let n = rng.gen_range(1..=8);
        let items: Vec<PlacementItem> = (0..n)
            .map(|i| PlacementItem::new(format!("i{i}"), Mb(rng.gen_range(1..=1024)), "t", true))
            .collect();
        let inst = ProblemInstance::new(items.clone(), vec![bin.clone()], None, None).unwrap();
        let ffd = ffd_pack(&items, inst.variants()).map_err(|e| e.to_string())?.len() as u64;
        let (_, opt) = oracle(&items, &[bin.clone()], n).ok_or("oracle found nothing")?;
        let opt = opt as u64;
        // ceil(11/9 * OPT + 2/3) = ceil((11 * OPT + 6) / 9)
        check(ffd <= (11 * opt + 6).div_ceil(9), || format!("case {case}: ffd {ffd} opt {opt}"))?;
    }
    Ok("100/100 within bound".into())
}

fn c9_feasibility() -> Outcome {
    let inst = generated(40, 9);
    let cfg = SearchConfig::with_seed(9);
    let mut last = Cents(u64::MAX);
    let mut accepted = 0;
    let mut violations = 0;
    let sol = local_search_observed(&inst, &cfg, |s| {
        accepted += 1;
        if s.cost() > last || !check_feasible(&s.to_placement(), &inst).is_correct() {
            violations += 1;
        }
        last = s.cost();
    })
    .map_err(|e| e.to_string())?;
    check(sol.attempts == 10_000, || format!("{} attempts", sol.attempts))?;
    check(violations == 0, || format!("{violations} violations in {accepted} accepted states"))?;
    Ok(format!("{accepted} accepted states of 10000 attempts, 0 violations"))
}

fn c10_determinism() -> Outcome {
    let inst = generated(60, 10);
    let opts = SolveOptions {
        method: Method::Heuristic,
        search: SearchConfig::with_seed(10),
        exact_cap: DEFAULT_EXACT_CAP,
        exact_timeout: None,
    };
    let render = || -> Result<String, String> {
        let s = solve(&inst, &opts).map_err(|e| e.to_string())?;
        Ok(formats::to_json(&placement_to_doc(&s.placement, &inst, "heuristic", None)))
    };
    let (a, b) = (render()?, render()?);
    check(a == b, || "placement JSON differs between runs".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("example1 optimum", c1_example1),
        ("exact equals exhaustive oracle", c2_oracle),
        ("heuristic quality", c3_heuristic_quality),
        ("heuristic speed", c4_heuristic_speed),
        ("rewrite correctness", c5_rewrite_suite),
        ("decomposition counts", c6_decomposition),
        ("invoicing end to end", c7_invoicing),
        ("FFD bound", c8_ffd_bound),
        ("feasibility invariance", c9_feasibility),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
