//! Benchmark runs over generated instance families, one CSV row per
//! (family, size, seed, method).

use std::io::Write;
use std::time::Duration;

use cepp_core::heuristic::SearchConfig;
use cepp_core::model::ExactError;
use cepp_core::workload::{flatten, generate, CapacitySpec, GeneratorSpec, ProcessCount};
use cepp_core::{Catalog, Mb};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formats::eur;
use crate::solve::{solve, Method, SolveError, SolveOptions};

fn default_tenants() -> usize {
    3
}
fn default_ratio() -> f64 {
    0.4
}
fn default_mean() -> u64 {
    768
}
fn default_spread() -> u64 {
    640
}
fn default_methods() -> Vec<String> {
    vec!["exact".into(), "heuristic".into()]
}
fn default_timeout() -> u64 {
    2_000
}
fn default_transformations() -> u64 {
    10_000
}
fn default_exact_cap() -> usize {
    128
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_tenants")]
    pub tenants: usize,
    #[serde(default = "default_ratio")]
    pub non_shareable_ratio: f64,
    #[serde(default = "default_mean")]
    pub mean_mb: u64,
    #[serde(default = "default_spread")]
    pub spread_mb: u64,
}

/// `catalog` is a path, resolved against the spec file's directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub catalog: String,
    pub families: Vec<FamilySpec>,
    #[serde(default = "default_methods")]
    pub methods: Vec<String>,
    #[serde(default = "default_timeout")]
    pub exact_timeout_ms: u64,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
    #[serde(default = "default_transformations")]
    pub max_transformations: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub family: String,
    pub instance_size: usize,
    pub seed: u64,
    pub method: String,
    pub cost_eur_mo: Option<f64>,
    pub wall_ms: u128,
    pub status: String,
}

struct Job<'a> {
    family: &'a FamilySpec,
    size: usize,
    seed: u64,
    method: Method,
}

fn per_tenant(size: usize, tenants: usize) -> Vec<usize> {
    let tenants = tenants.max(1);
    (0..tenants).map(|t| size / tenants + usize::from(t < size % tenants)).collect()
}

fn run_job(job: &Job<'_>, spec: &BenchSpec, catalog: &Catalog) -> BenchRow {
    let row = |cost: Option<f64>, wall_ms: u128, status: &str| BenchRow {
        family: job.family.name.clone(),
        instance_size: job.size,
        seed: job.seed,
        method: job.method.as_str().into(),
        cost_eur_mo: cost,
        wall_ms,
        status: status.into(),
    };
    let gen = GeneratorSpec {
        tenant_count: job.family.tenants,
        processes_per_tenant: ProcessCount::PerTenant(per_tenant(job.size, job.family.tenants)),
        capacity: CapacitySpec::Spread {
            mean: Mb(job.family.mean_mb),
            spread: Mb(job.family.spread_mb),
        },
        non_shareable_ratio: job.family.non_shareable_ratio,
        seed: job.seed,
    };
    let inst = match generate(&gen).map_err(|e| e.to_string()).and_then(|w| flatten(&w, catalog).map_err(|e| e.to_string())) {
        Ok(inst) => inst,
        Err(_) => return row(None, 0, "ERROR"),
    };
    let opts = SolveOptions {
        method: job.method,
        search: SearchConfig {
            max_transformations: spec.max_transformations,
            ..SearchConfig::with_seed(job.seed)
        },
        exact_cap: spec.exact_cap,
        exact_timeout: Some(Duration::from_millis(spec.exact_timeout_ms)),
    };
    match solve(&inst, &opts) {
        Ok(s) => {
            let status = if s.proven_optimal == Some(false) { "TIMEOUT" } else { "OK" };
            row(Some(eur(s.cost)), s.wall.as_millis(), status)
        }
        Err(SolveError::Exact(ExactError::TooLarge { .. })) => row(None, 0, "TOO_LARGE"),
        Err(SolveError::Exact(ExactError::BudgetExhausted)) => row(None, spec.exact_timeout_ms as u128, "TIMEOUT"),
        Err(e) if e.is_infeasible() => row(None, 0, "INFEASIBLE"),
        Err(_) => row(None, 0, "ERROR"),
    }
}

/// Runs every row, in parallel when `jobs` > 1; rows come back in spec
/// order.
pub fn run_bench(spec: &BenchSpec, catalog: &Catalog, jobs: usize) -> Result<Vec<BenchRow>, String> {
    let mut methods = Vec::new();
    for m in &spec.methods {
        methods.push(match m.as_str() {
            "exact" => Method::Exact,
            "heuristic" => Method::Heuristic,
            other => return Err(format!("unknown method `{other}`")),
        });
    }
    let mut work = Vec::new();
    for family in &spec.families {
        for &size in &family.sizes {
            for &seed in &family.seeds {
                for &method in &methods {
                    work.push(Job {
                        family,
                        size,
                        seed,
                        method,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| e.to_string())?;
    Ok(pool.install(|| work.par_iter().map(|j| run_job(j, spec, catalog)).collect()))
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "instance_size", "seed", "method", "cost_eur_mo", "wall_ms", "status"])?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.instance_size.to_string(),
            r.seed.to_string(),
            r.method.clone(),
            r.cost_eur_mo.map(|c| format!("{c:.2}")).unwrap_or_default(),
            r.wall_ms.to_string(),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenants_share_sizes_evenly() {
        assert_eq!(per_tenant(10, 3), [4, 3, 3]);
        assert_eq!(per_tenant(2, 3), [1, 1, 0]);
    }
}
