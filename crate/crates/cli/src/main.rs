//! Benchmark harness around the decomposition library: generates seeded
//! power-system instances, runs labeled cases or a whole case matrix
//! over them, and inspects the trace files the runs leave behind.
//!
//! Exit codes: 0 on full success, 2 when some runs failed or stopped at
//! the iteration cap, 1 on usage, input or IO errors.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mcbd::benders::{
    run_benders, BendersConfig, IterationRecord, MixedProblem, RunStatus, TimingMode,
    TRACE_HEADER,
};
use mcbd::cases::{
    run_case, run_case_matrix, summarize, CaseOptions, CaseResult, CaseSpec, STANDARD_LABELS,
};
use mcbd::exec::ExecMode;
use mcbd::qubo::{Backend, DEFAULT_EXHAUSTIVE_CAP};
use mcbd::uc::{build_uc_milp, default_profile, generate_power_system, validate_dispatch,
    InstanceDoc, UcInstance};
use std::fs;
use std::path::{Path, PathBuf};

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_PARTIAL: i32 = 2;

#[derive(Parser)]
#[command(name = "mcbd", version, about = "Decomposition benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random power system and write an instance document.
    Generate(GenerateArgs),
    /// Run one labeled case over an instance; write traces and the dispatch.
    Solve(SolveArgs),
    /// Run a case matrix over an instance; write traces and the summary table.
    Bench(BenchArgs),
    /// Summarize a trace CSV written by solve or bench.
    InspectTrace(InspectTraceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Buses in the network (at least 4).
    #[arg(long, default_value_t = 8)]
    buses: usize,
    /// Generation seed; one seed always regenerates the same document.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Demand periods; the built-in day shape is resampled to this length.
    #[arg(long, default_value_t = 24)]
    horizon: usize,
    /// Directory the instance document is written into.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    /// Measured wall clocks.
    Wall,
    /// Zeroed clocks and fixed per-read sampler time; traces become
    /// byte-reproducible.
    Model,
}

/// Flags shared by solve and bench.
#[derive(Args)]
struct RunArgs {
    /// Instance document produced by `generate`.
    #[arg(long)]
    instance: PathBuf,
    /// Base seed; repeat r of every case runs with seed base+r.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Termination gap in percent.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Master solution-pool size.
    #[arg(long, default_value_t = 10)]
    pool_size: usize,
    /// Cut cap for the max-coverage strategy.
    #[arg(long, default_value_t = 3)]
    cap_m: usize,
    /// Random picks beside the pool optimum in random mode.
    #[arg(long, default_value_t = 3)]
    random_k: usize,
    /// Sampler: sa, exhaustive[:cap] or remote:<url>. In `solve` it
    /// replaces the chosen case's backend; in `bench` it replaces the
    /// annealer half (C7-C12).
    #[arg(long)]
    backend: Option<String>,
    /// Runs per case.
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_enum, default_value_t = TimingArg::Wall)]
    timing: TimingArg,
    /// Iteration cap per run.
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    /// Directory for traces, solutions and summaries.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Case label: bd, all, random or C1..C12.
    #[arg(long, default_value = "bd")]
    case: String,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated case labels; the full standard matrix if absent.
    #[arg(long)]
    cases: Option<String>,
}

#[derive(Args)]
struct InspectTraceArgs {
    /// Trace CSV path.
    trace: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests land here too and must exit 0;
            // genuine usage faults exit 1 per the interface contract,
            // not clap's default of 2, which is taken by partial
            // benchmark failures.
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::InspectTrace(a) => cmd_inspect(a),
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(EXIT_USAGE);
        }
    }
}

/// The built-in day shape resampled to `horizon` points by index
/// decimation, so any horizon keeps the trough-to-peak ordering.
fn profile_for(horizon: usize) -> Vec<f64> {
    let day = default_profile();
    (0..horizon).map(|t| day[t * day.len() / horizon.max(1)]).collect()
}

fn cmd_generate(a: GenerateArgs) -> Result<i32> {
    if a.buses < 4 {
        bail!("--buses must be at least 4; smaller networks get no generator");
    }
    let system = generate_power_system(a.buses, a.seed)?;
    let doc = InstanceDoc {
        system,
        horizon: a.horizon,
        profile: profile_for(a.horizon),
        seed: a.seed,
    };
    let inst = doc.instance()?;
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))?;
    let path = a
        .out_dir
        .join(format!("instance-{}bus-t{}-s{}.json", a.buses, a.horizon, a.seed));
    fs::write(&path, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", path.display()))?;
    let lay = inst.layout();
    println!("wrote {}", path.display());
    println!(
        "{} buses, {} lines, {} generators, {} loads over {} periods",
        inst.system.buses.len(),
        inst.system.lines.len(),
        inst.system.generators.len(),
        inst.system.loads.len(),
        a.horizon
    );
    println!(
        "{} binaries, {} continuous variables, {} coupled rows",
        lay.n_y(),
        lay.n_x(),
        lay.n_rows()
    );
    Ok(EXIT_OK)
}

fn load_problem(path: &Path) -> Result<(UcInstance, MixedProblem)> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: InstanceDoc = serde_json::from_str(&text)
        .with_context(|| format!("parsing {} as an instance document", path.display()))?;
    let inst = doc.instance()?;
    let p = build_uc_milp(&inst)?;
    Ok((inst, p))
}

fn parse_backend(s: &str) -> Result<Backend> {
    if let Some(url) = s.strip_prefix("remote:") {
        return Ok(Backend::Remote { endpoint: url.to_string() });
    }
    if let Some(cap) = s.strip_prefix("exhaustive:") {
        let cap: usize = cap.parse().with_context(|| format!("cap in '{s}'"))?;
        return Ok(Backend::Exhaustive { cap });
    }
    match s {
        "exhaustive" => Ok(Backend::Exhaustive { cap: DEFAULT_EXHAUSTIVE_CAP }),
        "sa" => Ok(Backend::Annealer { exec: ExecMode::default() }),
        _ => bail!("unknown backend '{s}' (expected sa, exhaustive[:cap] or remote:<url>)"),
    }
}

fn base_config(a: &RunArgs) -> Result<BendersConfig> {
    if !(a.epsilon > 0.0) {
        bail!("--epsilon is a percentage and must be positive");
    }
    Ok(BendersConfig {
        epsilon: a.epsilon / 100.0,
        pool_size: a.pool_size,
        max_iters: a.max_iters,
        timing: match a.timing {
            TimingArg::Wall => TimingMode::Wall,
            TimingArg::Model => TimingMode::Model,
        },
        ..BendersConfig::default()
    })
}

fn case_options(a: &RunArgs, annealer: Option<Backend>) -> CaseOptions {
    let mut opts = CaseOptions {
        repeats: a.repeats,
        base_seed: a.seed,
        cap_m: a.cap_m,
        random_k: a.random_k,
        ..CaseOptions::default()
    };
    if let Some(b) = annealer {
        opts.annealer = b;
    }
    opts
}

fn slug(label: &str) -> String {
    label.to_ascii_lowercase().replace(' ', "-")
}

fn write_traces(out_dir: &Path, result: &CaseResult) -> Result<()> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    for run in &result.runs {
        let path =
            out_dir.join(format!("trace-{}-seed{}.csv", slug(&result.spec.label), run.seed));
        fs::write(&path, run.trace.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn all_clean(results: &[CaseResult]) -> bool {
    results.iter().all(|r| {
        r.failures.is_empty() && r.runs.iter().all(|run| run.status == RunStatus::Converged)
    })
}

fn cmd_solve(a: SolveArgs) -> Result<i32> {
    let (inst, p) = load_problem(&a.run.instance)?;
    let base = base_config(&a.run)?;
    let backend = a.run.backend.as_deref().map(parse_backend).transpose()?;
    let opts = case_options(&a.run, backend.clone());
    let mut spec = CaseSpec::from_label(&a.case, &opts)?;
    if let Some(b) = backend {
        spec.backend = b;
    }

    let result = run_case(&p, &base, &spec);
    write_traces(&a.run.out_dir, &result)?;
    print!("{}", summarize(&[result.clone()]).to_text());
    for f in &result.failures {
        eprintln!("seed {} failed: {}", f.seed, f.error);
    }

    // One extra run of the first seed produces the dispatch artifact;
    // the case runs above only keep traces.
    let mut code = if all_clean(&[result]) { EXIT_OK } else { EXIT_PARTIAL };
    match run_benders(&p, &spec.config(&base, spec.seeds[0])) {
        Ok((sol, objective, _)) => {
            let report = validate_dispatch(&inst, &sol)?;
            let path = a
                .run
                .out_dir
                .join(format!("solution-{}-seed{}.json", slug(&spec.label), spec.seeds[0]));
            let doc = serde_json::json!({
                "case": spec.label,
                "seed": spec.seeds[0],
                "objective": objective,
                "worst_violation": report.worst(),
                "x": sol.x,
                "y": sol.y,
            });
            fs::write(&path, serde_json::to_string_pretty(&doc)?)
                .with_context(|| format!("writing {}", path.display()))?;
            println!(
                "objective {objective:.4}, worst constraint violation {:.3e}",
                report.worst()
            );
            println!("wrote {}", path.display());
        }
        Err(e) => {
            eprintln!("dispatch run failed: {e}");
            code = EXIT_PARTIAL;
        }
    }
    Ok(code)
}

fn cmd_bench(a: BenchArgs) -> Result<i32> {
    let (_, p) = load_problem(&a.run.instance)?;
    let base = base_config(&a.run)?;
    let backend = a.run.backend.as_deref().map(parse_backend).transpose()?;
    let opts = case_options(&a.run, backend);

    let labels: Vec<String> = match &a.cases {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect(),
        None => STANDARD_LABELS.iter().map(|s| s.to_string()).collect(),
    };
    if labels.is_empty() {
        bail!("--cases named no cases");
    }
    let specs = labels
        .iter()
        .map(|l| CaseSpec::from_label(l, &opts))
        .collect::<Result<Vec<_>, _>>()?;

    let results = run_case_matrix(&p, &base, &specs);
    for r in &results {
        write_traces(&a.run.out_dir, r)?;
        for f in &r.failures {
            eprintln!("{} seed {} failed: {}", r.spec.label, f.seed, f.error);
        }
    }
    let table = summarize(&results);
    fs::write(a.run.out_dir.join("summary.txt"), table.to_text())?;
    fs::write(a.run.out_dir.join("summary.json"), table.to_json())?;
    print!("{}", table.to_text());
    Ok(if all_clean(&results) { EXIT_OK } else { EXIT_PARTIAL })
}

fn parse_trace_row(line: &str, number: usize) -> Result<IterationRecord> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 14 {
        bail!("row {number} has {} fields, expected 14", fields.len());
    }
    let int = |i: usize| -> Result<usize> {
        fields[i].parse().with_context(|| format!("row {number}, field {i}"))
    };
    let float = |i: usize| -> Result<f64> {
        fields[i].parse().with_context(|| format!("row {number}, field {i}"))
    };
    let ms = |i: usize| -> Result<u64> {
        fields[i].parse().with_context(|| format!("row {number}, field {i}"))
    };
    Ok(IterationRecord {
        iter: int(0)?,
        lb: float(1)?,
        ub: float(2)?,
        gap_pct: float(3)?,
        n_feas_cuts_generated: int(4)?,
        n_opt_cuts_generated: int(5)?,
        n_feas_selected: int(6)?,
        n_opt_selected: int(7)?,
        mp_constraints: int(8)?,
        mp_ms: ms(9)?,
        sp_ms: ms(10)?,
        matrix_ms: ms(11)?,
        select_ms: ms(12)?,
        sampler_us: ms(13)?,
    })
}

fn cmd_inspect(a: InspectTraceArgs) -> Result<i32> {
    let text = fs::read_to_string(&a.trace)
        .with_context(|| format!("reading {}", a.trace.display()))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty trace file"))?;
    if header != TRACE_HEADER {
        bail!("unrecognized trace header\n  got:  {header}\n  want: {TRACE_HEADER}");
    }
    let rows = lines
        .enumerate()
        .map(|(i, l)| parse_trace_row(l, i + 2))
        .collect::<Result<Vec<_>>>()?;
    let last = rows.last().ok_or_else(|| anyhow!("trace has a header but no rows"))?;
    for pair in rows.windows(2) {
        if pair[1].mp_constraints < pair[0].mp_constraints {
            bail!(
                "master row count shrank from {} to {} at iteration {}; cuts only \
                 accumulate, so this trace is corrupt",
                pair[0].mp_constraints,
                pair[1].mp_constraints,
                pair[1].iter
            );
        }
    }
    let sum = |f: fn(&IterationRecord) -> u64| rows.iter().map(f).sum::<u64>();
    println!("{}: {} iterations", a.trace.display(), rows.len());
    println!("final lb {} ub {} gap {}%", last.lb, last.ub, last.gap_pct);
    println!(
        "cuts: {} feasibility + {} optimality generated, {} + {} selected",
        sum(|r| r.n_feas_cuts_generated as u64),
        sum(|r| r.n_opt_cuts_generated as u64),
        sum(|r| r.n_feas_selected as u64),
        sum(|r| r.n_opt_selected as u64)
    );
    println!(
        "master rows {} -> {}",
        rows.first().map_or(0, |r| r.mp_constraints),
        last.mp_constraints
    );
    println!(
        "time: mp {} ms, sp {} ms, matrix {} ms, select {} ms, sampler {} us",
        sum(|r| r.mp_ms),
        sum(|r| r.sp_ms),
        sum(|r| r.matrix_ms),
        sum(|r| r.select_ms),
        sum(|r| r.sampler_us)
    );
    Ok(EXIT_OK)
}
