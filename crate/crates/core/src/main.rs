use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use parsched::config::AppConfig;
use parsched::domain::{FirstStageSchedule, Instance};
use parsched::experiment::{
    cmd_compare_serial, cmd_sweep_irs, cmd_sweep_weights, cmd_vss, generate_case, read_json, run_method,
    weight_study_triplets, write_csv, write_json, Case, Method, Runner, Workspace,
};
use parsched::scenario::{write_pools, ScenarioSet};
use parsched::simulate::{evaluate, evaluate_expected, evaluate_expected_serial, evaluate_serial, export_gantt};
use parsched::solver::backend_by_name;

#[derive(Parser)]
#[command(name = "parsched", version, about = "Stochastic surgery scheduling with induction rooms")]
struct Cli {
    /// Run a single instance seed instead of the configured seed list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML or JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: run-<unix seconds>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// MIP backend.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Per-solve time limit in seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CaseArgs {
    /// Instance JSON; when omitted, instances are generated from the seeds.
    #[arg(long, requires = "scenarios")]
    instance: Option<PathBuf>,
    /// Scenario set JSON matching --instance.
    #[arg(long)]
    scenarios: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances, scenario sets and the duration pools.
    Generate {
        #[arg(long)]
        patients: Option<usize>,
        #[arg(long)]
        irs: Option<usize>,
        #[arg(long)]
        ors: Option<usize>,
        #[arg(long)]
        scenarios: Option<usize>,
    },
    /// Solve with one method and write report.csv plus schedule files.
    Solve {
        #[command(flatten)]
        case: CaseArgs,
        /// epha, exact, brute[:STEP], heuristic:RULE:PCT, mean-value or serial.
        #[arg(long, default_value = "epha")]
        method: String,
    },
    /// Evaluate a stored schedule on a scenario set.
    Evaluate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenarios: PathBuf,
        /// Schedule JSON (a bare schedule or a schedule file from a report).
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        serial: bool,
    },
    /// Value of the stochastic solution against the mean-value schedule.
    Vss {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value = "epha")]
        method: String,
    },
    /// Serial against parallel processing at several turnover/induction ratios.
    CompareSerial {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        ratios: Vec<f64>,
        /// IR counts for the parallel systems.
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        parallel_irs: Vec<usize>,
        #[arg(long, default_value = "epha")]
        method: String,
    },
    /// Re-solve under the twelve unit-cost triplets.
    SweepWeights {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, default_value = "epha")]
        method: String,
    },
    /// Re-solve with different numbers of induction rooms.
    SweepIrs {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        irs: Vec<usize>,
        #[arg(long, default_value = "epha")]
        method: String,
    },
    /// Draw one scenario of a schedule as SVG plus a text timeline.
    Gantt {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long, default_value_t = 0)]
        scenario_index: usize,
        #[arg(long)]
        serial: bool,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<parsched::error::Error>())
        .map_or(1, |e| e.exit_code() as u8)
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| {
        let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
        PathBuf::from(format!("run-{secs}"))
    })
}

fn load_config(cli: &Cli) -> anyhow::Result<AppConfig> {
    let mut cfg = match &cli.config {
        Some(p) => AppConfig::load(p)?,
        None => AppConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seeds = vec![s];
    }
    if let Some(s) = &cli.solver {
        cfg.solver.backend.clone_from(s);
    }
    if cli.time_limit.is_some() {
        cfg.solver.time_limit = cli.time_limit;
    }
    if let Some(t) = cli.threads {
        cfg.solver.threads = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn runner(cfg: &AppConfig, out: &Path) -> anyhow::Result<Runner> {
    let mut r = Runner::new(cfg.classes()?);
    r.backend = backend_by_name(&cfg.solver.backend)?;
    r.solve = cfg.solver.options();
    r.pha = cfg.pha_config();
    r.trace_dir = Some(out.join("traces"));
    Ok(r)
}

fn load_schedule(path: &Path) -> anyhow::Result<FirstStageSchedule> {
    let value: serde_json::Value = read_json(path)?;
    let inner = value.get("schedule").cloned().unwrap_or(value);
    serde_json::from_value(inner).with_context(|| format!("{} holds no schedule", path.display()))
}

fn cases(cfg: &AppConfig, args: &CaseArgs, classes_runner: &Runner) -> anyhow::Result<Vec<Case>> {
    if let (Some(i), Some(s)) = (&args.instance, &args.scenarios) {
        let instance: Instance = read_json(i)?;
        let scenarios: ScenarioSet = read_json(s)?;
        let id = i.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string();
        return Ok(vec![Case { id, seed: scenarios.seed, instance, scenarios }]);
    }
    cfg.seeds
        .iter()
        .map(|&seed| generate_case(&cfg.generator, &classes_runner.classes, seed).map_err(Into::into))
        .collect()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = load_config(&cli)?;
    let out = out_dir(&cli);
    match &cli.command {
        Command::Generate { patients, irs, ors, scenarios } => {
            let mut cfg = cfg.clone();
            let g = &mut cfg.generator;
            g.num_patients = patients.unwrap_or(g.num_patients);
            g.num_irs = irs.unwrap_or(g.num_irs);
            g.num_ors = ors.unwrap_or(g.num_ors);
            g.num_scenarios = scenarios.unwrap_or(g.num_scenarios);
            let classes = cfg.classes()?;
            let ws = Workspace::create(&out)?;
            write_pools(&classes, &out.join("pools.csv"))?;
            for &seed in &cfg.seeds {
                let case = generate_case(&cfg.generator, &classes, seed)?;
                ws.save_case(&case)?;
                println!("{}: {} patients, {} scenarios", case.id, case.instance.len(), case.scenarios.len());
            }
        }
        Command::Solve { case, method } => {
            let method: Method = method.parse()?;
            let r = runner(&cfg, &out)?;
            let mut ws = Workspace::create(&out)?;
            for c in cases(&cfg, case, &r)? {
                let rel = ws.save_case(&c)?;
                let res = run_method(&r, &c, method)?;
                let row = ws.record(&c.id, &c.instance, &rel, &res)?;
                println!("{} {}: objective {:.4}", row.instance, row.method, row.objective);
            }
            ws.finish()?;
        }
        Command::Evaluate { instance, scenarios, schedule, serial } => {
            let instance: Instance = read_json(instance)?;
            let set: ScenarioSet = read_json(scenarios)?;
            let schedule = load_schedule(schedule)?;
            let m = if *serial {
                evaluate_expected_serial(&instance, &schedule, &set)?
            } else {
                evaluate_expected(&instance, &schedule, &set)?
            };
            let text = serde_json::to_string_pretty(&m)?;
            if let Err(e) = writeln!(std::io::stdout().lock(), "{text}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
        Command::Vss { case, method } => {
            let method: Method = method.parse()?;
            let r = runner(&cfg, &out)?;
            let mut ws = Workspace::create(&out)?;
            let mut rows = Vec::new();
            for c in cases(&cfg, case, &r)? {
                let row = cmd_vss(&r, &mut ws, &c, method)?;
                println!("{}: mean-value {:.4}, {} {:.4}, VSS {:.2}%", row.instance, row.mv_cost, row.method, row.sp_cost, 100.0 * row.relative_vss);
                rows.push(row);
            }
            write_csv(&out.join("vss.csv"), &rows)?;
            ws.finish()?;
        }
        Command::CompareSerial { case, ratios, parallel_irs, method } => {
            let method: Method = method.parse()?;
            let r = runner(&cfg, &out)?;
            let mut ws = Workspace::create(&out)?;
            let rows = cmd_compare_serial(&r, &mut ws, &cases(&cfg, case, &r)?, ratios, parallel_irs, method)?;
            write_csv(&out.join("serial.csv"), &rows)?;
            ws.finish()?;
        }
        Command::SweepWeights { case, method } => {
            let method: Method = method.parse()?;
            let r = runner(&cfg, &out)?;
            let mut ws = Workspace::create(&out)?;
            let (rows, corr) = cmd_sweep_weights(&r, &mut ws, &cases(&cfg, case, &r)?, &weight_study_triplets(), method)?;
            write_csv(&out.join("weights.csv"), &rows)?;
            write_csv(&out.join("correlations.csv"), &corr)?;
            ws.finish()?;
        }
        Command::SweepIrs { case, irs, method } => {
            let method: Method = method.parse()?;
            let r = runner(&cfg, &out)?;
            let mut ws = Workspace::create(&out)?;
            let rows = cmd_sweep_irs(&r, &mut ws, &cases(&cfg, case, &r)?, irs, method)?;
            write_csv(&out.join("irs.csv"), &rows)?;
            ws.finish()?;
        }
        Command::Gantt { instance, scenarios, schedule, scenario_index, serial } => {
            let instance: Instance = read_json(instance)?;
            let set: ScenarioSet = read_json(scenarios)?;
            let schedule = load_schedule(schedule)?;
            let s = set
                .scenarios
                .get(*scenario_index)
                .ok_or_else(|| parsched::error::Error::Validation(format!("no scenario {scenario_index}")))?;
            let outcome = if *serial { evaluate_serial(&instance, &schedule, s)? } else { evaluate(&instance, &schedule, s)? };
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("gantt-{scenario_index}.svg"));
            export_gantt(&instance, &outcome, s, &path)?;
            write_json(&out.join(format!("outcome-{scenario_index}.json")), &outcome.metrics)?;
            println!("{}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
