//! Batch front door for the pssp solver.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pssp::{
    acs, brute_force_optimum, generate_instance, lns_run, parse_jsp_standard,
    parse_osp_gueret_prins, parse_osp_taillard, parse_pssp_json, parse_solution_json,
    verify_solution, write_instance_json, write_solution_json, write_trace_csv, Instance,
    LnsConfig, Model, SearchConfig, Solution, SolveStatus,
};

#[derive(Parser)]
#[command(name = "pssp", version, about = "Partial shop scheduling solver (job shop / open shop)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and write the solution JSON (stdout or --out).
    Solve(SolveArgs),
    /// Solve every instance in a directory and print a summary CSV.
    Bench(BenchArgs),
    /// Check a solution JSON against an instance.
    Verify(VerifyArgs),
    /// Generate a random canonical PSSP instance as JSON.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Auto,
    Jsp,
    OspTaillard,
    OspGp,
    PsspJson,
}

// variant names map one-to-one onto the dp-jps / dp-cp-jps / dp-cp flags
#[allow(clippy::enum_variant_names)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    DpJps,
    DpCpJps,
    DpCp,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::DpJps => Model::DpJps,
            ModelArg::DpCpJps => Model::DpCpJps,
            ModelArg::DpCp => Model::DpCp,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    #[arg(long, value_enum, default_value_t = ModelArg::DpCp)]
    model: ModelArg,
    /// States expanded per layer per sweep.
    #[arg(long, default_value_t = 5)]
    width: usize,
    /// Soft wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Improve the first found solution with large neighborhood search.
    #[arg(long)]
    lns: bool,
    /// Initial fraction of incumbent precedences kept per LNS restart.
    #[arg(long, default_value_t = 0.70)]
    keep_fraction: f64,
    /// Fruitless LNS restarts tolerated before reducing the kept fraction.
    #[arg(long, default_value_t = 100)]
    restart_limit: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solution JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Anytime lb/ub trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of instance files.
    dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
    /// Models to run (repeatable).
    #[arg(long, value_enum, default_values_t = [ModelArg::DpCp])]
    model: Vec<ModelArg>,
    #[arg(long, default_value_t = 5)]
    width: usize,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Summary CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file.
    instance: PathBuf,
    /// Solution JSON file.
    solution: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Auto)]
    format: Format,
}

#[derive(Args)]
struct GenArgs {
    /// Output JSON path.
    out: PathBuf,
    /// Partition (job) count.
    #[arg(short = 'n', long)]
    partitions: usize,
    /// Machine count.
    #[arg(short = 'm', long)]
    machines: usize,
    #[arg(long, default_value_t = 1)]
    min_duration: i64,
    #[arg(long, default_value_t = 9)]
    max_duration: i64,
    /// Probability of an extra DAG edge per operation pair.
    #[arg(long, default_value_t = 0.0)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Solve(args) => solve_command(args),
        Command::Bench(args) => bench_command(args),
        Command::Verify(args) => verify_command(args),
        Command::Gen(args) => gen_command(args),
    };
    match run {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_instance(path: &Path, format: Format) -> Result<Instance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read instance {}", path.display()))?;
    let parsed = match format {
        Format::Jsp => parse_jsp_standard(&text),
        Format::OspTaillard => parse_osp_taillard(&text),
        Format::OspGp => parse_osp_gueret_prins(&text),
        Format::PsspJson => parse_pssp_json(&text),
        Format::Auto => return auto_parse(path, &text),
    };
    parsed.with_context(|| format!("cannot parse {}", path.display()))
}

/// Extension first, then sniffing: JSON documents start with a brace, and
/// the plain-text formats are tried in order of decreasing strictness.
fn auto_parse(path: &Path, text: &str) -> Result<Instance> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    if ext.eq_ignore_ascii_case("json") || text.trim_start().starts_with('{') {
        return parse_pssp_json(text).with_context(|| format!("cannot parse {}", path.display()));
    }
    parse_jsp_standard(text)
        .or_else(|_| parse_osp_taillard(text))
        .or_else(|_| parse_osp_gueret_prins(text))
        .with_context(|| {
            format!(
                "cannot parse {} as jsp, osp-taillard or osp-gp",
                path.display()
            )
        })
}

fn exit_for(status: SolveStatus) -> ExitCode {
    match status {
        SolveStatus::Optimal | SolveStatus::Feasible => ExitCode::SUCCESS,
        SolveStatus::Infeasible => ExitCode::from(2),
        SolveStatus::Unknown => ExitCode::from(3),
    }
}

fn time_limit_of(seconds: Option<f64>) -> Result<Option<Duration>> {
    match seconds {
        None => Ok(None),
        Some(s) if s.is_finite() && s >= 0.0 => Ok(Some(Duration::from_secs_f64(s))),
        Some(s) => bail!("--time-limit must be a nonnegative number of seconds, got {s}"),
    }
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn solve_one(inst: &Instance, args: &SolveArgs, time_limit: Option<Duration>) -> Solution {
    let search = SearchConfig {
        model: args.model.into(),
        width: args.width,
        time_limit,
        seed: args.seed,
        first_solution: args.lns,
    };
    let first = acs(inst, &search);
    if !args.lns || first.status == SolveStatus::Optimal {
        return first;
    }
    let lns_config = LnsConfig {
        keep_fraction: args.keep_fraction,
        restart_threshold: args.restart_limit,
        seed: args.seed,
        time_limit,
        ..LnsConfig::default()
    };
    let sub_search = SearchConfig {
        first_solution: false,
        ..search
    };
    let outcome = lns_run(inst, &first, &lns_config, &sub_search);
    for r in outcome.restarts.iter().filter(|r| r.adopted.is_some()) {
        eprintln!(
            "lns restart {}: keep {:.2}, {} pairs kept, incumbent {}",
            r.restart,
            r.keep_fraction,
            r.kept.len(),
            r.incumbent
        );
    }
    eprintln!(
        "lns: {} restarts, optimality {}",
        outcome.restarts.len(),
        if outcome.proven_optimal { "proven" } else { "open" }
    );
    outcome.solution
}

fn solve_command(args: SolveArgs) -> Result<ExitCode> {
    if !(0.0..=1.0).contains(&args.keep_fraction) {
        bail!("--keep-fraction must be within [0, 1]");
    }
    let time_limit = time_limit_of(args.time_limit)?;
    let inst = load_instance(&args.input, args.format)?;
    let started = Instant::now();
    let solution = solve_one(&inst, &args, time_limit);
    let wall = started.elapsed();

    let report = verify_solution(&inst, &solution);
    if !report.valid {
        bail!("internal error: produced an invalid schedule: {:?}", report.violations);
    }
    emit(&args.out, &write_solution_json(&solution))?;
    if let Some(trace) = &args.trace {
        fs::write(trace, write_trace_csv(&solution.stats.trace))
            .with_context(|| format!("cannot write {}", trace.display()))?;
    }
    eprintln!(
        "{}: makespan {} ({:?}), {} nodes, {} fixpoints, {:.3}s wall",
        args.input.display(),
        solution.makespan,
        solution.status,
        solution.stats.nodes_explored,
        solution.stats.fixpoint_calls,
        wall.as_secs_f64()
    );
    Ok(exit_for(solution.status))
}

fn bench_command(args: BenchArgs) -> Result<ExitCode> {
    let time_limit = time_limit_of(args.time_limit)?;
    let mut files: Vec<PathBuf> = fs::read_dir(&args.dir)
        .with_context(|| format!("cannot read directory {}", args.dir.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();

    let mut csv = String::from("name,model,nodes,fixpoint_calls,lb,ub,status,ticks\n");
    let mut per_model: Vec<(Model, Vec<(String, u64, i64)>)> = args
        .model
        .iter()
        .map(|&m| (m.into(), Vec::new()))
        .collect();

    for path in &files {
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or("?")
            .to_string();
        let inst = match load_instance(path, args.format) {
            Ok(inst) => inst,
            Err(err) => {
                eprintln!("skipping {name}: {err:#}");
                csv.push_str(&format!("{name},-,0,0,0,0,error,0\n"));
                continue;
            }
        };
        for (model, results) in per_model.iter_mut() {
            let search = SearchConfig {
                model: *model,
                width: args.width,
                time_limit,
                seed: args.seed,
                first_solution: false,
            };
            let sol = acs(&inst, &search);
            let lb = sol.stats.trace.last().map(|r| r.lb).unwrap_or(0);
            let status = match sol.status {
                SolveStatus::Optimal => "optimal",
                SolveStatus::Feasible => "feasible",
                SolveStatus::Infeasible => "infeasible",
                SolveStatus::Unknown => "unknown",
            };
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                name,
                model.name(),
                sol.stats.nodes_explored,
                sol.stats.fixpoint_calls,
                lb,
                sol.makespan,
                status,
                sol.stats.elapsed_ms
            ));
            results.push((name.clone(), sol.stats.nodes_explored, sol.makespan));
        }
    }

    for (model, results) in &per_model {
        let mut nodes: Vec<u64> = results.iter().map(|r| r.1).collect();
        nodes.sort_unstable();
        let median = if nodes.is_empty() {
            0
        } else {
            nodes[nodes.len() / 2]
        };
        csv.push_str(&format!(
            "__median__,{},{},0,0,0,aggregate,0\n",
            model.name(),
            median
        ));
    }
    // pairwise node comparison: fraction of instances where the first model
    // explored no more nodes than the second
    for i in 0..per_model.len() {
        for j in 0..per_model.len() {
            if i == j {
                continue;
            }
            let (ma, ra) = &per_model[i];
            let (mb, rb) = &per_model[j];
            let total = ra.len().min(rb.len());
            if total == 0 {
                continue;
            }
            let wins = ra
                .iter()
                .zip(rb.iter())
                .filter(|(a, b)| a.1 <= b.1)
                .count();
            csv.push_str(&format!(
                "__le_ratio__,{}<={},{},{},0,0,aggregate,0\n",
                ma.name(),
                mb.name(),
                wins,
                total
            ));
        }
    }

    emit(&args.out, &csv)?;
    Ok(ExitCode::SUCCESS)
}

fn verify_command(args: VerifyArgs) -> Result<ExitCode> {
    let inst = load_instance(&args.instance, args.format)?;
    let text = fs::read_to_string(&args.solution)
        .with_context(|| format!("cannot read solution {}", args.solution.display()))?;
    let solution = parse_solution_json(&text)
        .with_context(|| format!("cannot parse solution {}", args.solution.display()))?;
    let report = verify_solution(&inst, &solution);
    if report.valid {
        println!("valid, makespan {}", report.makespan);
        Ok(ExitCode::SUCCESS)
    } else {
        println!("invalid, {} violation(s):", report.violations.len());
        for v in &report.violations {
            println!("  {v}");
        }
        Ok(ExitCode::from(2))
    }
}

fn gen_command(args: GenArgs) -> Result<ExitCode> {
    if args.min_duration < 1 || args.max_duration < args.min_duration {
        bail!(
            "bad duration range {}..{}",
            args.min_duration,
            args.max_duration
        );
    }
    let inst = generate_instance(
        args.partitions,
        args.machines,
        (args.min_duration, args.max_duration),
        args.density,
        args.seed,
    )
    .context("generation produced an invalid instance")?;
    fs::write(&args.out, write_instance_json(&inst))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    if inst.num_ops() <= 12 {
        if let Ok(opt) = brute_force_optimum(&inst) {
            eprintln!("{}: {} ops, optimum {}", args.out.display(), inst.num_ops(), opt);
            return Ok(ExitCode::SUCCESS);
        }
    }
    eprintln!("{}: {} ops", args.out.display(), inst.num_ops());
    Ok(ExitCode::SUCCESS)
}
