//! `ceppc` subcommands. [`run`] takes explicit output streams so tests can
//! drive it in-process.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use cepp_core::heuristic::{SearchConfig, TransformKind};
use cepp_core::ipcg::{process_shareable, validate_ipcg};
use cepp_core::model::{export_lp, ExactError, DEFAULT_EXACT_CAP};
use cepp_core::rewrite::{apply_rule, decompose, enumerate_proposals, ProposalAction, ProposalKind};
use cepp_core::workload::flatten;
use cepp_core::{fixtures, Ipcg, ProblemInstance};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bench::{run_bench, write_csv, BenchSpec};
use crate::formats::{self, eur, ipcg_json, placement_to_doc, report_to_doc, FormatError};
use crate::pricing::{standalone_cost, PricingContext};
use crate::service::{self, ServiceConfig};
use crate::solve::{solve, Method, SolveError, SolveOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "ceppc", version, about = "Cost-efficient placement of integration processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an IPCG file for structural and contract correctness.
    Validate {
        ipcg: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Place a workload on a catalog.
    Solve(SolveArgs),
    /// Cut processes into shareable and non-shareable parts.
    Cut {
        #[arg(required = true)]
        ipcg: Vec<PathBuf>,
        /// Output directory for the result graphs and links manifest.
        #[arg(long, short, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Apply cost-reducing rewrites to a process.
    Improve {
        ipcg: PathBuf,
        catalog: PathBuf,
        /// Improved IPCG path; defaults to `<input stem>.improved.ipcg.json`.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// List proposals without applying them.
        #[arg(long)]
        interactive: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run instance families with both solvers and emit CSV.
    Bench {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV path; standard output when absent.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Write the placement model in CPLEX-LP format.
    ExportLp {
        workload: PathBuf,
        catalog: PathBuf,
        out: PathBuf,
    },
    /// Start the HTTP cost service (configured through CEPP_* variables).
    Serve,
    /// Write the bundled example graphs, catalogs and workloads.
    Fixtures { dir: PathBuf },
}

#[derive(Args, Debug)]
struct SolveArgs {
    workload: PathBuf,
    catalog: PathBuf,
    #[arg(long, conflicts_with = "heuristic")]
    exact: bool,
    #[arg(long)]
    heuristic: bool,
    #[arg(long, default_value_t = 10_000)]
    max_transformations: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "move,swap,shrink")]
    cycle: Vec<TransformKind>,
    /// Exact solver item cap.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    exact_cap: usize,
    /// Exact solver wall-clock budget; unlimited when absent.
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Placement JSON path.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

/// Failure carrying its exit code and message.
struct Fail(i32, String);

impl From<FormatError> for Fail {
    fn from(e: FormatError) -> Self {
        Fail(EXIT_INPUT, e.to_string())
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    Fail(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<(), Fail> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_fail(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_fail(path, e))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) {
    let _ = out.write_all(formats::to_json(value).as_bytes());
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { ipcg, json } => cmd_validate(&ipcg, json, out),
        Command::Solve(args) => cmd_solve(&args, out),
        Command::Cut { ipcg, out_dir, json } => cmd_cut(&ipcg, &out_dir, json, out),
        Command::Improve {
            ipcg,
            catalog,
            out: path,
            interactive,
            seed,
            json,
        } => cmd_improve(&ipcg, &catalog, path, interactive, seed, json, out),
        Command::Bench { spec, jobs, out: path } => cmd_bench(&spec, jobs, path, out),
        Command::ExportLp { workload, catalog, out: path } => cmd_export_lp(&workload, &catalog, &path, out),
        Command::Serve => cmd_serve(),
        Command::Fixtures { dir } => cmd_fixtures(&dir, out),
    };
    match result {
        Ok(code) => code,
        Err(Fail(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            if code == EXIT_TOO_LARGE {
                let _ = writeln!(err, "hint: rerun with --heuristic");
            }
            code
        }
    }
}

fn cmd_validate(path: &Path, json: bool, out: &mut dyn Write) -> Result<i32, Fail> {
    let g = formats::load_ipcg(path)?;
    let report = validate_ipcg(&g);
    if json {
        emit_json(out, &report_to_doc(&report));
    } else if report.is_correct() {
        let _ = writeln!(out, "{}: correct ({} nodes, {} edges)", path.display(), g.len(), g.edges().len());
    } else {
        let _ = writeln!(out, "{}: {} violation(s)", path.display(), report.violations().len());
        for v in report.violations() {
            let at = v.reference.as_deref().map(|r| format!(" [{r}]")).unwrap_or_default();
            let _ = writeln!(out, "  {}{at}: {}", v.code, v.message);
        }
    }
    Ok(if report.is_correct() { EXIT_OK } else { EXIT_FAILED })
}

fn load_instance(workload: &Path, catalog: &Path) -> Result<ProblemInstance, Fail> {
    let w = formats::load_workload(workload)?;
    let c = formats::load_catalog(catalog)?;
    flatten(&w, &c).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", workload.display())))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, Fail> {
    let inst = load_instance(&args.workload, &args.catalog)?;
    let method = if args.heuristic { Method::Heuristic } else { Method::Exact };
    let opts = SolveOptions {
        method,
        search: SearchConfig {
            max_transformations: args.max_transformations,
            seed: args.seed,
            cycle: args.cycle.clone(),
        },
        exact_cap: args.exact_cap,
        exact_timeout: args.timeout_ms.map(Duration::from_millis),
    };
    let solved = solve(&inst, &opts).map_err(|e| match &e {
        SolveError::Exact(ExactError::TooLarge { .. }) => Fail(EXIT_TOO_LARGE, e.to_string()),
        _ if e.is_infeasible() => Fail(EXIT_INFEASIBLE, e.to_string()),
        _ => Fail(EXIT_FAILED, e.to_string()),
    })?;
    let doc = placement_to_doc(&solved.placement, &inst, method.as_str(), solved.proven_optimal);
    if let Some(path) = &args.out {
        write_file(path, &formats::to_json(&doc))?;
    }
    if args.json {
        emit_json(out, &json!({ "placement": doc, "wall_ms": solved.wall.as_millis() }));
        return Ok(EXIT_OK);
    }
    let _ = writeln!(out, "{:<9} {:<12} {:<12} {:>15}  items", "container", "vendor", "variant", "used/total MB");
    for c in &doc.containers {
        let used = format!("{}/{}", c.used_mb, c.cap_mb);
        let _ = writeln!(out, "{:<9} {:<12} {:<12} {:>15}  {}", c.container, c.vendor, c.variant, used, c.items.join(","));
    }
    let _ = writeln!(out, "Total: {:.2} EUR/mo", doc.cost_eur_mo);
    if solved.proven_optimal == Some(false) {
        let _ = writeln!(out, "(time budget reached; not proven optimal)");
    }
    let _ = writeln!(out, "Wall: {} ms", solved.wall.as_millis());
    Ok(EXIT_OK)
}

fn stem(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("graph");
    name.strip_suffix(".ipcg.json")
        .or_else(|| name.strip_suffix(".json"))
        .unwrap_or(name)
        .to_string()
}

fn load_valid(path: &Path) -> Result<Ipcg, Fail> {
    let g = formats::load_ipcg(path)?;
    let report = validate_ipcg(&g);
    if !report.is_correct() {
        let codes: Vec<&str> = report.violations().iter().map(|v| v.code).collect();
        return Err(Fail(EXIT_INPUT, format!("{}: invalid graph ({})", path.display(), codes.join(", "))));
    }
    Ok(g)
}

#[derive(Serialize)]
struct LinkDoc {
    caller_file: String,
    caller: String,
    callee_file: String,
    receiver: String,
}

#[derive(Serialize)]
struct CutDoc {
    inputs: usize,
    outputs: usize,
    shareable: usize,
    non_shareable: usize,
    files: Vec<String>,
    links: Vec<LinkDoc>,
}

fn cmd_cut(paths: &[PathBuf], dir: &Path, json: bool, out: &mut dyn Write) -> Result<i32, Fail> {
    let mut doc = CutDoc {
        inputs: paths.len(),
        outputs: 0,
        shareable: 0,
        non_shareable: 0,
        files: Vec::new(),
        links: Vec::new(),
    };
    let mut written = Vec::new();
    for path in paths {
        let g = load_valid(path)?;
        let result = decompose(&g).map_err(|e| Fail(EXIT_INPUT, format!("{}: {e}", path.display())))?;
        let base = stem(path);
        let names: Vec<String> = (0..result.graphs.len()).map(|k| format!("{base}.{k}.ipcg.json")).collect();
        for (name, part) in names.iter().zip(&result.graphs) {
            if process_shareable(part) {
                doc.shareable += 1;
            } else {
                doc.non_shareable += 1;
            }
            written.push((dir.join(name), ipcg_json(part)));
        }
        for link in &result.remote_links {
            let caller_graph = result.graphs.iter().position(|p| p.contains(&link.caller)).unwrap_or(0);
            doc.links.push(LinkDoc {
                caller_file: names[caller_graph].clone(),
                caller: link.caller.clone(),
                callee_file: names[link.callee_graph].clone(),
                receiver: link.receiver.clone(),
            });
        }
        doc.files.extend(names);
    }
    doc.outputs = doc.files.len();
    for (path, text) in &written {
        write_file(path, text)?;
    }
    write_file(&dir.join("links.json"), &formats::to_json(&doc.links))?;
    if json {
        emit_json(out, &doc);
    } else {
        let _ = writeln!(
            out,
            "{} process(es) -> {} graph(s): {} shareable, {} non-shareable, {} link(s)",
            doc.inputs,
            doc.outputs,
            doc.shareable,
            doc.non_shareable,
            doc.links.len()
        );
        for f in &doc.files {
            let _ = writeln!(out, "  {}", dir.join(f).display());
        }
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct StepDoc {
    rule: String,
    nodes_removed: i64,
    cost_before_eur_mo: f64,
    cost_after_eur_mo: f64,
    description: String,
}

fn cmd_improve(
    path: &Path,
    catalog: &Path,
    target: Option<PathBuf>,
    interactive: bool,
    seed: u64,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32, Fail> {
    let mut g = load_valid(path)?;
    let catalog = formats::load_catalog(catalog)?;
    let ctx = PricingContext::new(catalog.clone(), Vec::new(), seed);
    let price_err = |e: cepp_core::rewrite::PricingError| Fail(EXIT_INFEASIBLE, e.0);
    let before = standalone_cost(&g, &catalog).map_err(price_err)?;
    let local = |p: &cepp_core::rewrite::Proposal| {
        matches!(p.kind, ProposalKind::CombineNeighbors | ProposalKind::RouterToRoutingSlip)
    };
    let enumerate = |g: &Ipcg| -> Result<Vec<cepp_core::rewrite::Proposal>, Fail> {
        let mut props = enumerate_proposals(g, &ctx).map_err(|e| Fail(EXIT_FAILED, e.to_string()))?;
        props.retain(local);
        Ok(props)
    };

    let mut steps = Vec::new();
    if interactive {
        for p in enumerate(&g)? {
            steps.push(StepDoc {
                rule: p.kind.as_str().into(),
                nodes_removed: p.nodes_removed,
                cost_before_eur_mo: eur(p.cost_before),
                cost_after_eur_mo: eur(p.cost_after),
                description: p.description.clone(),
            });
        }
    } else {
        // Each accepted rewrite removes at least one node, so this ends.
        while let Some(p) = enumerate(&g)?.into_iter().next() {
            let ProposalAction::Apply(m) = &p.action else { break };
            let result = apply_rule(m.rule, m, &g).map_err(|e| Fail(EXIT_FAILED, e.to_string()))?;
            g = result.graphs.into_iter().next().expect("local rewrites yield one graph");
            steps.push(StepDoc {
                rule: p.kind.as_str().into(),
                nodes_removed: p.nodes_removed,
                cost_before_eur_mo: eur(p.cost_before),
                cost_after_eur_mo: eur(p.cost_after),
                description: p.description.clone(),
            });
        }
    }
    let after = standalone_cost(&g, &catalog).map_err(price_err)?;
    let removed: i64 = steps.iter().map(|s| s.nodes_removed).sum();
    let written = if interactive || steps.is_empty() {
        None
    } else {
        let target = target.unwrap_or_else(|| path.with_file_name(format!("{}.improved.ipcg.json", stem(path))));
        write_file(&target, &ipcg_json(&g))?;
        Some(target)
    };
    if json {
        emit_json(
            out,
            &json!({
                "applied": !interactive,
                "proposals": steps,
                "nodes_removed": if interactive { 0 } else { removed },
                "cost_before_eur_mo": eur(before),
                "cost_after_eur_mo": eur(after),
                "output": written.as_ref().map(|p| p.display().to_string()),
            }),
        );
        return Ok(EXIT_OK);
    }
    if steps.is_empty() {
        let _ = writeln!(out, "no proposals");
        return Ok(EXIT_OK);
    }
    for (k, s) in steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}{k} {}: -{} node(s), {:.2} -> {:.2} EUR/mo  {}",
            if interactive { "proposal " } else { "applied " },
            s.rule,
            s.nodes_removed,
            s.cost_before_eur_mo,
            s.cost_after_eur_mo,
            s.description
        );
    }
    if let Some(target) = written {
        let _ = writeln!(
            out,
            "{removed} node(s) removed, {:.2} -> {:.2} EUR/mo; wrote {}",
            eur(before),
            eur(after),
            target.display()
        );
    }
    Ok(EXIT_OK)
}

fn cmd_bench(path: &Path, jobs: usize, target: Option<PathBuf>, out: &mut dyn Write) -> Result<i32, Fail> {
    let spec: BenchSpec = formats::read_json(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let catalog = formats::load_catalog(&base.join(&spec.catalog))?;
    let rows = run_bench(&spec, &catalog, jobs).map_err(|e| Fail(EXIT_INPUT, e))?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| Fail(EXIT_FAILED, e.to_string()))?;
    match target {
        Some(p) => write_file(&p, &String::from_utf8_lossy(&buf))?,
        None => {
            let _ = out.write_all(&buf);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_export_lp(workload: &Path, catalog: &Path, target: &Path, out: &mut dyn Write) -> Result<i32, Fail> {
    let inst = load_instance(workload, catalog)?;
    let lp = export_lp(&inst);
    write_file(target, &lp)?;
    let vars = (inst.items().len() + inst.variants().len()) * inst.max_containers();
    let rows = lp
        .split("Subject To\n")
        .nth(1)
        .and_then(|s| s.split("Binary\n").next())
        .map(|s| s.lines().filter(|l| l.starts_with(" c")).count())
        .unwrap_or(0);
    let _ = writeln!(out, "{}: {vars} binary variables, {rows} constraints", target.display());
    Ok(EXIT_OK)
}

fn cmd_serve() -> Result<i32, Fail> {
    let cfg = ServiceConfig::from_env().map_err(|e| Fail(EXIT_INPUT, e))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Fail(EXIT_FAILED, e.to_string()))?;
    rt.block_on(service::serve(cfg)).map_err(|e| Fail(EXIT_FAILED, e))?;
    Ok(EXIT_OK)
}

fn cmd_fixtures(dir: &Path, out: &mut dyn Write) -> Result<i32, Fail> {
    let mut count = 0;
    for (name, g) in fixtures::all_graphs() {
        write_file(&dir.join(format!("{name}.ipcg.json")), &ipcg_json(&g))?;
        count += 1;
    }
    for (name, c) in [("example1", fixtures::example1_catalog()), ("aws_t2", fixtures::aws_t2_catalog())] {
        write_file(&dir.join(format!("{name}.catalog.json")), &formats::to_json(&formats::catalog_to_doc(&c)))?;
        count += 1;
    }
    let w = cepp_core::workload::Workload {
        region: None,
        entries: fixtures::example1_processes()
            .into_iter()
            .map(cepp_core::workload::WorkloadEntry::Process)
            .collect(),
    };
    write_file(&dir.join("example1.workload.json"), &formats::to_json(&formats::workload_to_doc(&w)))?;
    count += 1;
    let _ = writeln!(out, "wrote {count} file(s) to {}", dir.display());
    Ok(EXIT_OK)
}
