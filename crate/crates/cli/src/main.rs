mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmst::bench::bench_scaling;
use qmst::enumerate::{solve_conflicts, solve_exact_with, solve_qbst_threshold, EnumOptions, DEFAULT_TREE_LIMIT};
use qmst::families::{
    build_kn_ladder, make_fan, make_fan_star, make_kn_accordion, make_ladder, make_wheel, FreeEdgeChoice,
    LadderStructure, StructureSidecar,
};
use qmst::graded::{
    certify_nnl, natural_lower_bound, natural_lower_bound_bottleneck, random_doubly_graded, recognize_graded,
    solve_doubly_graded, solve_doubly_graded_bottleneck, GradedKind,
};
use qmst::instance::{evaluate, ConflictSet, CostMatrix, Instance, ProblemKind};
use qmst::ladder_dp::dp_solve;
use qmst::random::{
    adjacent_random_costs, random_adjacent_conflicts, random_conflicts, random_connected_graph, random_costs,
    rng_from_seed, RNG_ALGORITHM,
};
use qmst::reductions::{reduce_to_fanstar, reduce_to_ladder, ThreeSatInstance};
use qmst::tree_count::{
    count_accordion_closed_form, count_accordion_recursive, count_deletion_contraction, count_graph,
};
use qmst::{EdgeSet, Error, Graph, Multigraph, SolveResult, SolveStatus};

use manifest::{sha256_file, RunManifest};

const EXIT_OPTIMAL: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_INFEASIBLE: i32 = 2;
const EXIT_GUARD: i32 = 3;

/// Quadratic minimum spanning tree toolkit.
#[derive(Parser, Debug)]
#[command(name = "qmst", version)]
struct Cli {
    /// Worker threads for enumeration.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Print human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write a run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph family instance with optional costs and conflicts.
    Generate(GenerateArgs),
    /// Count spanning trees.
    Count(CountArgs),
    /// Solve an instance.
    Solve(SolveArgs),
    /// Row-wise lower bound and graded recognition.
    Bound(BoundArgs),
    /// Build a conflict instance from a DIMACS 3-CNF formula.
    Reduce(ReduceArgs),
    /// Recheck a solve result against its instance.
    Verify(VerifyArgs),
    /// Time the ladder DP at n and 2n.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Family {
    Fan,
    Wheel,
    FanStar,
    Ladder,
    KnLadder,
    KnAccordion,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Costs {
    Zero,
    Random,
    AdjacentRandom,
    Graded,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FreeEdges {
    Lowest,
    Seeded,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConflictScope {
    Any,
    Adjacent,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Family size parameter (cycles for ladders, path length for fans).
    #[arg(long)]
    n: usize,
    /// Cycle length for (k,n) families.
    #[arg(long)]
    k: Option<usize>,
    /// Edge count for the random family.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "lowest")]
    free_edges: FreeEdges,
    #[arg(long, value_enum, default_value = "zero")]
    costs: Costs,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    lo: i64,
    #[arg(long, default_value_t = 9, allow_negative_numbers = true)]
    hi: i64,
    /// Probability that a candidate pair becomes a conflict.
    #[arg(long, default_value_t = 0.0)]
    conflicts: f64,
    #[arg(long, value_enum, default_value = "adjacent")]
    conflict_scope: ConflictScope,
    #[arg(long, default_value = "QMST")]
    kind: ProblemKind,
    /// Instance path; the structure sidecar goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CountMethod {
    MatrixTree,
    DeletionContraction,
    Recursion,
    ClosedForm,
}

#[derive(Args, Debug)]
struct CountArgs {
    /// Instance JSON (for matrix-tree and deletion-contraction).
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "matrix-tree")]
    method: CountMethod,
    /// Accordion cycle length (for recursion and closed-form).
    #[arg(long)]
    k: Option<usize>,
    /// Accordion cycle count (for recursion and closed-form).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolveMethod {
    Auto,
    Enum,
    LadderDp,
    Graded,
    Conflicts,
    Threshold,
}

#[derive(Args, Debug)]
struct SolveArgs {
    instance: PathBuf,
    /// Problem kind; defaults to the kind stored in the instance.
    #[arg(long)]
    kind: Option<ProblemKind>,
    #[arg(long, value_enum, default_value = "auto")]
    method: SolveMethod,
    /// Ladder structure sidecar; defaults to `<instance>.structure.json`.
    #[arg(long)]
    structure: Option<PathBuf>,
    /// Threshold for `--method threshold`.
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<i64>,
    #[arg(long, default_value_t = DEFAULT_TREE_LIMIT)]
    tree_limit: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    instance: PathBuf,
    /// Bottleneck version of the bound.
    #[arg(long)]
    bottleneck: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Construction {
    Fanstar,
    Ladder,
}

#[derive(Args, Debug)]
struct ReduceArgs {
    /// DIMACS CNF file with three literals per clause.
    formula: PathBuf,
    #[arg(long, value_enum, default_value = "fanstar")]
    to: Construction,
    /// Instance path; the literal edge map goes to `<out>.reduction.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    instance: PathBuf,
    result: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TREE_LIMIT)]
    tree_limit: u64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Per-run context shared by the command handlers.
struct Ctx {
    pretty: bool,
    threads: usize,
    inputs: Vec<PathBuf>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String> {
        self.inputs.push(path.to_path_buf());
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }

    fn read_instance(&mut self, path: &Path) -> Result<Instance> {
        let text = self.read(path)?;
        Instance::from_json(&text).with_context(|| format!("parsing instance {}", path.display()))
    }
}

fn sidecar_path(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
    path.with_file_name(format!("{}.{}.json", stem, tag))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serialisable") + "\n"
}

/// Writes JSON to `out` or stdout; `--pretty` replaces stdout JSON with a table.
fn emit<T: Serialize>(ctx: &Ctx, value: &T, out: Option<&Path>, table: impl FnOnce() -> String) -> Result<()> {
    if let Some(path) = out {
        write_text(path, &to_json(value))?;
    }
    if ctx.pretty {
        print!("{}", table());
    } else if out.is_none() {
        print!("{}", to_json(value));
    }
    Ok(())
}

fn status_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Optimal => EXIT_OPTIMAL,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
    }
}

fn result_table(r: &SolveResult) -> String {
    let mut s = String::new();
    s += &format!("kind     {}\n", r.kind);
    s += &format!("method   {}\n", r.method);
    s += &format!("status   {:?}\n", r.status);
    if let Some(v) = r.value {
        s += &format!("value    {}\n", v);
    }
    if let Some(t) = &r.tree {
        s += &format!("tree     {:?}\n", t.as_slice());
    }
    if let Some(n) = r.trees_enumerated {
        s += &format!("visited  {}\n", n);
    }
    s
}

// ---------------------------------------------------------------- generate

#[derive(Serialize)]
struct GenerateSummary {
    family: String,
    vertices: usize,
    edges: usize,
    conflicts: usize,
    instance: Option<String>,
    structure: Option<String>,
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Fan => "fan",
        Family::Wheel => "wheel",
        Family::FanStar => "fan-star",
        Family::Ladder => "ladder",
        Family::KnLadder => "kn-ladder",
        Family::KnAccordion => "kn-accordion",
        Family::Random => "random",
    }
}

fn cmd_generate(ctx: &mut Ctx, a: &GenerateArgs) -> Result<i32> {
    let mut rng = rng_from_seed(a.seed);
    let choice = match a.free_edges {
        FreeEdges::Lowest => FreeEdgeChoice::Lowest,
        FreeEdges::Seeded => FreeEdgeChoice::Seeded(a.seed),
    };
    let need_k = || a.k.ok_or_else(|| anyhow!("--k is required for this family"));
    let (graph, sidecar): (Graph, Option<StructureSidecar>) = match a.family {
        Family::Fan => (make_fan(a.n)?, None),
        Family::Wheel => (make_wheel(a.n)?, None),
        Family::FanStar => (make_fan_star(a.n)?, None),
        Family::Ladder => {
            let l = make_ladder(a.n)?;
            let sc = l.to_sidecar("ladder");
            (l.graph, Some(sc))
        }
        Family::KnLadder => {
            let l = build_kn_ladder(need_k()?, a.n, &choice)?;
            let sc = l.to_sidecar("kn-ladder");
            (l.graph, Some(sc))
        }
        Family::KnAccordion => {
            let acc = make_kn_accordion(need_k()?, a.n, &choice)?;
            let sc = acc.to_sidecar();
            (acc.graph, Some(sc))
        }
        Family::Random => {
            let m = a.m.ok_or_else(|| anyhow!("--m is required for the random family"))?;
            (random_connected_graph(a.n, m, &mut rng)?, None)
        }
    };
    let m = graph.num_edges();
    if a.lo > a.hi {
        bail!("--lo must not exceed --hi");
    }
    let q = match a.costs {
        Costs::Zero => CostMatrix::zeros(m),
        Costs::Random => random_costs(m, a.lo, a.hi, &mut rng),
        Costs::AdjacentRandom => adjacent_random_costs(&graph, a.lo, a.hi, &mut rng),
        Costs::Graded => random_doubly_graded(m, (a.hi - a.lo).clamp(1, 3), a.lo, &mut rng).0,
    };
    if !(0.0..=1.0).contains(&a.conflicts) {
        bail!("--conflicts must be a probability");
    }
    let conflicts = if a.conflicts == 0.0 {
        ConflictSet::new()
    } else {
        match a.conflict_scope {
            ConflictScope::Any => random_conflicts(&graph, a.conflicts, &mut rng),
            ConflictScope::Adjacent => random_adjacent_conflicts(&graph, a.conflicts, &mut rng),
        }
    };
    let inst = Instance::new(graph, q, conflicts, a.kind)?;
    let mut structure_path = None;
    if let Some(out) = &a.out {
        write_text(out, &(inst.to_json() + "\n"))?;
        if let Some(sc) = &sidecar {
            let p = sidecar_path(out, "structure");
            write_text(&p, &to_json(sc))?;
            structure_path = Some(p.display().to_string());
        }
    }
    let summary = GenerateSummary {
        family: family_name(a.family).to_string(),
        vertices: inst.graph.num_vertices(),
        edges: m,
        conflicts: inst.conflicts.len(),
        instance: a.out.as_ref().map(|p| p.display().to_string()),
        structure: structure_path,
    };
    if a.out.is_none() && !ctx.pretty {
        print!("{}", inst.to_json() + "\n");
    } else if ctx.pretty {
        println!("family     {}", summary.family);
        println!("vertices   {}", summary.vertices);
        println!("edges      {}", summary.edges);
        println!("conflicts  {}", summary.conflicts);
    } else {
        print!("{}", to_json(&summary));
    }
    Ok(EXIT_OPTIMAL)
}

// ------------------------------------------------------------------- count

#[derive(Serialize)]
struct CountOutput {
    method: &'static str,
    k: Option<usize>,
    n: Option<usize>,
    vertices: Option<usize>,
    edges: Option<usize>,
    count: String,
}

fn cmd_count(ctx: &mut Ctx, a: &CountArgs) -> Result<i32> {
    let kn = || -> Result<(usize, usize)> {
        match (a.k, a.n) {
            (Some(k), Some(n)) => Ok((k, n)),
            _ => bail!("--k and --n are required for this method"),
        }
    };
    let out = match a.method {
        CountMethod::MatrixTree | CountMethod::DeletionContraction => {
            let path = a.instance.as_ref().ok_or_else(|| anyhow!("an instance file is required"))?;
            let inst = ctx.read_instance(path)?;
            let g = &inst.graph;
            let (method, count) = match a.method {
                CountMethod::MatrixTree => ("matrix-tree", count_graph(g)),
                _ => (
                    "deletion-contraction",
                    count_deletion_contraction(&Multigraph {
                        num_vertices: g.num_vertices(),
                        edges: g.edges().to_vec(),
                    })?,
                ),
            };
            CountOutput {
                method,
                k: None,
                n: None,
                vertices: Some(g.num_vertices()),
                edges: Some(g.num_edges()),
                count: count.to_string(),
            }
        }
        CountMethod::Recursion | CountMethod::ClosedForm => {
            let (k, n) = kn()?;
            let (method, count) = match a.method {
                CountMethod::Recursion => ("recursion", count_accordion_recursive(k, n)?),
                _ => ("closed-form", count_accordion_closed_form(k, n)?),
            };
            CountOutput {
                method,
                k: Some(k),
                n: Some(n),
                vertices: None,
                edges: None,
                count: count.to_string(),
            }
        }
    };
    emit(ctx, &out, None, || format!("method  {}\ncount   {}\n", out.method, out.count))?;
    Ok(EXIT_OPTIMAL)
}

// ------------------------------------------------------------------- solve

fn load_structure(ctx: &mut Ctx, a: &SolveArgs, inst: &Instance) -> Result<Option<LadderStructure>> {
    let path = match &a.structure {
        Some(p) => p.clone(),
        None => {
            let p = sidecar_path(&a.instance, "structure");
            if !p.exists() {
                return Ok(None);
            }
            p
        }
    };
    let sc: StructureSidecar =
        serde_json::from_str(&ctx.read(&path)?).with_context(|| format!("parsing {}", path.display()))?;
    if sc.anchors.is_none() {
        return Ok(None);
    }
    Ok(Some(LadderStructure::from_sidecar(inst.graph.clone(), &sc)?))
}

fn solve_graded(inst: &Instance, kind: ProblemKind) -> Result<Option<SolveResult>> {
    let cert = recognize_graded(&inst.q);
    match (kind, cert.kind) {
        (ProblemKind::Qmst, GradedKind::DoublyGraded) => Ok(Some(solve_doubly_graded(inst)?.result)),
        (ProblemKind::Qbst, GradedKind::DoublyGraded) => Ok(Some(solve_doubly_graded_bottleneck(inst)?.result)),
        (ProblemKind::Qmst, GradedKind::RowGraded) => {
            let check = certify_nnl(inst, cert.pi.as_ref().expect("row graded carries pi"))?;
            Ok(check
                .certified
                .then(|| SolveResult::optimal(kind, "graded", check.value, check.tree)))
        }
        _ => Ok(None),
    }
}

fn cmd_solve(ctx: &mut Ctx, a: &SolveArgs) -> Result<i32> {
    let inst = ctx.read_instance(&a.instance)?;
    let kind = a.kind.unwrap_or(inst.kind);
    let enum_opts = EnumOptions {
        tree_limit: a.tree_limit,
        threads: ctx.threads,
    };
    let result = match a.method {
        SolveMethod::Enum => solve_exact_with(&inst, kind, &enum_opts)?,
        SolveMethod::LadderDp => {
            let ladder = load_structure(ctx, a, &inst)?
                .ok_or_else(|| anyhow!("ladder-dp needs a ladder structure sidecar"))?;
            dp_solve(&inst, &ladder, kind)?.result
        }
        SolveMethod::Graded => solve_graded(&inst, kind)?
            .ok_or_else(|| anyhow!("no graded certificate applies to {} on this matrix", kind))?,
        SolveMethod::Conflicts => solve_conflicts(&inst, kind)?,
        SolveMethod::Threshold => {
            let mu = a.mu.ok_or_else(|| anyhow!("--mu is required for the threshold method"))?;
            solve_qbst_threshold(&inst, mu)?
        }
        SolveMethod::Auto => {
            let graded = if kind.shape().conflicts { None } else { solve_graded(&inst, kind)? };
            match graded {
                Some(r) => r,
                None => {
                    let ladder = load_structure(ctx, a, &inst)?;
                    let dp_ok = kind.shape().adjacent_only && inst.check_kind(kind).is_ok();
                    match ladder {
                        Some(l) if dp_ok => dp_solve(&inst, &l, kind)?.result,
                        _ => match solve_exact_with(&inst, kind, &enum_opts) {
                            // conflict kinds without interactions have an exact fallback
                            Err(Error::GuardExceeded { .. }) if kind.shape().conflicts && !kind.shape().interactions => {
                                solve_conflicts(&inst, kind)?
                            }
                            other => other?,
                        },
                    }
                }
            }
        }
    };
    emit(ctx, &result, a.out.as_deref(), || result_table(&result))?;
    Ok(status_code(result.status))
}

// ------------------------------------------------------------------- bound

#[derive(Serialize)]
struct BoundOutput {
    objective: &'static str,
    lower_bound: i64,
    row_values: Vec<i64>,
    tree: EdgeSet,
    graded: GradedKind,
    pi: Option<Vec<usize>>,
}

fn cmd_bound(ctx: &mut Ctx, a: &BoundArgs) -> Result<i32> {
    let inst = ctx.read_instance(&a.instance)?;
    let (objective, b) = if a.bottleneck {
        ("bottleneck", natural_lower_bound_bottleneck(&inst)?)
    } else {
        ("sum", natural_lower_bound(&inst)?)
    };
    let cert = recognize_graded(&inst.q);
    let out = BoundOutput {
        objective,
        lower_bound: b.value,
        row_values: b.z,
        tree: b.tree,
        graded: cert.kind,
        pi: cert.pi.map(|p| p.forward().to_vec()),
    };
    emit(ctx, &out, None, || {
        format!(
            "objective    {}\nlower bound  {}\ngraded       {:?}\n",
            out.objective, out.lower_bound, out.graded
        )
    })?;
    Ok(EXIT_OPTIMAL)
}

// ------------------------------------------------------------------ reduce

#[derive(Serialize)]
struct ReduceSummary {
    construction: &'static str,
    kind: ProblemKind,
    variables: usize,
    clauses: usize,
    edges: usize,
    conflicts: usize,
}

fn cmd_reduce(ctx: &mut Ctx, a: &ReduceArgs) -> Result<i32> {
    let sat = ThreeSatInstance::from_dimacs(&ctx.read(&a.formula)?)?;
    let (name, out) = match a.to {
        Construction::Fanstar => ("fanstar", reduce_to_fanstar(&sat)?),
        Construction::Ladder => ("ladder", reduce_to_ladder(&sat)?),
    };
    let summary = ReduceSummary {
        construction: name,
        kind: out.instance.kind,
        variables: sat.num_vars,
        clauses: sat.clauses.len(),
        edges: out.instance.num_edges(),
        conflicts: out.instance.conflicts.len(),
    };
    match &a.out {
        Some(path) => {
            write_text(path, &(out.instance.to_json() + "\n"))?;
            write_text(&sidecar_path(path, "reduction"), &to_json(&out.sidecar(name)))?;
            emit(ctx, &summary, None, || {
                format!(
                    "construction  {}\nedges         {}\nconflicts     {}\n",
                    summary.construction, summary.edges, summary.conflicts
                )
            })?;
        }
        None => print!("{}", out.instance.to_json() + "\n"),
    }
    Ok(EXIT_OPTIMAL)
}

// ------------------------------------------------------------------ verify

#[derive(Serialize)]
struct VerifyOutput {
    valid: bool,
    status: SolveStatus,
    claimed_value: Option<i64>,
    recomputed_value: Option<i64>,
    violations: Option<usize>,
    reason: Option<String>,
}

fn cmd_verify(ctx: &mut Ctx, a: &VerifyArgs) -> Result<i32> {
    let inst = ctx.read_instance(&a.instance)?;
    let claim: SolveResult = serde_json::from_str(&ctx.read(&a.result)?).context("parsing result")?;
    let mut out = VerifyOutput {
        valid: false,
        status: claim.status,
        claimed_value: claim.value,
        recomputed_value: None,
        violations: None,
        reason: None,
    };
    let mut code = EXIT_USAGE;
    match claim.status {
        SolveStatus::Optimal => match (&claim.tree, claim.value) {
            (Some(tree), Some(value)) => {
                if tree.iter().any(|&e| e >= inst.num_edges()) {
                    out.reason = Some("tree names an edge outside the graph".into());
                } else if !inst.graph.is_spanning_tree(tree) {
                    out.reason = Some("tree is not a spanning tree".into());
                } else {
                    let ev = evaluate(&inst, claim.kind, tree)?;
                    out.recomputed_value = Some(ev.value);
                    out.violations = Some(ev.violations);
                    if ev.violations > 0 {
                        out.reason = Some("tree violates conflict pairs".into());
                    } else if ev.value != value {
                        out.reason = Some("claimed value differs from the objective".into());
                    } else {
                        out.valid = true;
                        code = EXIT_OPTIMAL;
                    }
                }
            }
            _ => out.reason = Some("optimal claim without tree and value".into()),
        },
        SolveStatus::Infeasible => {
            // Only a full enumeration can confirm infeasibility.
            let opts = EnumOptions {
                tree_limit: a.tree_limit,
                threads: ctx.threads,
            };
            match solve_exact_with(&inst, claim.kind, &opts) {
                Ok(r) if r.is_feasible() => {
                    out.recomputed_value = r.value;
                    out.reason = Some("a feasible tree exists".into());
                }
                Ok(_) => {
                    out.valid = true;
                    code = EXIT_OPTIMAL;
                }
                Err(e @ Error::GuardExceeded { .. }) => {
                    out.reason = Some(format!("cannot confirm infeasibility: {}", e));
                    code = EXIT_GUARD;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    emit(ctx, &out, None, || {
        format!(
            "valid   {}\nreason  {}\n",
            out.valid,
            out.reason.clone().unwrap_or_else(|| "-".into())
        )
    })?;
    Ok(code)
}

// ------------------------------------------------------------------- bench

fn cmd_bench(ctx: &mut Ctx, a: &BenchArgs) -> Result<i32> {
    let report = bench_scaling(a.k, a.n, a.seed)?;
    emit(ctx, &report, None, || {
        let mut s = format!("{:>8} {:>10} {:>14} {:>14} {:>10}\n", "n", "edges", "recurrences", "candidates", "seconds");
        for r in &report.runs {
            s += &format!(
                "{:>8} {:>10} {:>14} {:>14} {:>10.3}\n",
                r.n, r.edges, r.recurrence_applications, r.candidate_evaluations, r.solve_seconds
            );
        }
        s += &format!("ratio 2n/n: recurrences {:.4}, candidates {:.4}\n", report.recurrence_ratio, report.candidate_ratio);
        s
    })?;
    Ok(EXIT_OPTIMAL)
}

// -------------------------------------------------------------------- main

fn command_name(c: &Command) -> (&'static str, Option<u64>) {
    match c {
        Command::Generate(a) => ("generate", Some(a.seed)),
        Command::Count(_) => ("count", None),
        Command::Solve(_) => ("solve", None),
        Command::Bound(_) => ("bound", None),
        Command::Reduce(_) => ("reduce", None),
        Command::Verify(_) => ("verify", None),
        Command::Bench(a) => ("bench", Some(a.seed)),
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::GuardExceeded { .. }) => EXIT_GUARD,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OPTIMAL };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let mut ctx = Ctx {
        pretty: cli.pretty,
        threads: cli.threads.max(1),
        inputs: Vec::new(),
    };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(&mut ctx, a),
        Command::Count(a) => cmd_count(&mut ctx, a),
        Command::Solve(a) => cmd_solve(&mut ctx, a),
        Command::Bound(a) => cmd_bound(&mut ctx, a),
        Command::Reduce(a) => cmd_reduce(&mut ctx, a),
        Command::Verify(a) => cmd_verify(&mut ctx, a),
        Command::Bench(a) => cmd_bench(&mut ctx, a),
    };
    let code = match outcome {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {:#}", e);
            exit_code_for(&e)
        }
    };
    if let Some(path) = &cli.manifest {
        let (command, seed) = command_name(&cli.command);
        let mut input_hashes = BTreeMap::new();
        for p in &ctx.inputs {
            if let Ok(h) = sha256_file(p) {
                input_hashes.insert(p.display().to_string(), h);
            }
        }
        let m = RunManifest {
            command: command.to_string(),
            flags: std::env::args().skip(1).collect(),
            seed,
            input_hashes,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ALGORITHM.to_string(),
            exit_code: code,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        };
        if let Err(e) = m.write(path) {
            eprintln!("error: {:#}", e);
            return ExitCode::from(EXIT_USAGE as u8);
        }
    }
    ExitCode::from(code as u8)
}
