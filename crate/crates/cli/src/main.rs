//! `uamsim` command-line front end.
//!
//! Exit codes: 0 success, 1 domain failure, 2 usage or parse failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use uamsim::link::{
    bent_pipe_delay, effective_cell_range, multi_link_availability, propagation_delay, range_factor,
    worst_case_slant_km, LinkTechnology, Platform,
};
use uamsim::route::SolverChoice;
use uamsim::sim::{
    plan_missions, report_json, run, verdicts, write_timeseries_csv, MissionMode, ScenarioConfig, SimError,
    VerdictStatus, REPORT_SCHEMA_VERSION,
};

const THREADS_ENV: &str = "UAM_SIM_THREADS";

#[derive(Parser)]
#[command(name = "uamsim", version, about = "Urban air mobility routing, DAA and C2 link simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlatformArg {
    Terrestrial,
    Haps,
    Leo,
    Meo,
    Geo,
}

impl From<PlatformArg> for Platform {
    fn from(p: PlatformArg) -> Self {
        match p {
            PlatformArg::Terrestrial => Platform::Terrestrial,
            PlatformArg::Haps => Platform::Haps,
            PlatformArg::Leo => Platform::Leo,
            PlatformArg::Meo => Platform::Meo,
            PlatformArg::Geo => Platform::Geo,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and list every violation.
    Validate { scenario: PathBuf },
    /// Print each vehicle's route and cost.
    Plan {
        scenario: PathBuf,
        /// Solve tours with the exact solver, failing when too large.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the simulation and write report.json and timeseries.csv.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Run this many consecutive seeds in parallel, one sub-directory each.
        #[arg(long)]
        sweep: Option<u64>,
    },
    /// Back-off range scaling, platform delays and multi-link availability.
    Linkbudget {
        /// Amplifier back-off, dB.
        #[arg(long, default_value_t = 12.0)]
        backoff: f64,
        /// Cell radius without back-off, km.
        #[arg(long = "base-range", default_value_t = 300.0)]
        base_range: f64,
        /// Comma-separated per-link availabilities.
        #[arg(long, value_delimiter = ',')]
        links: Vec<f64>,
        /// Only show this platform's delays.
        #[arg(long, value_enum)]
        platform: Option<PlatformArg>,
        /// Slant range to use instead of the platform default, km.
        #[arg(long = "slant-km")]
        slant_km: Option<f64>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Summarize the verdicts of a report.json.
    Report {
        report: PathBuf,
        /// Exit 1 when any requirement failed.
        #[arg(long)]
        check: bool,
    },
}

/// Error carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Parse(_) => Failure::usage(e.to_string()),
            SimError::Invalid(v) => Failure::domain(
                v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"),
            ),
            other => Failure::domain(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::Plan {
            scenario,
            exact,
            format,
        } => cmd_plan(&scenario, exact, format),
        Command::Simulate {
            scenario,
            out,
            seed,
            sweep,
        } => cmd_simulate(&scenario, &out, seed, sweep),
        Command::Linkbudget {
            backoff,
            base_range,
            links,
            platform,
            slant_km,
            format,
        } => cmd_linkbudget(backoff, base_range, &links, platform.map(Platform::from), slant_km, format),
        Command::Report { report, check } => cmd_report(&report, check),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    Ok(ScenarioConfig::load(&read(path)?)?)
}

fn print_json(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("finite values"));
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let scenario = ScenarioConfig::from_json(&read(path)?)?;
    let violations = scenario.validate();
    if violations.is_empty() {
        println!("ok: {}", path.display());
        return Ok(());
    }
    for v in &violations {
        println!("{v}");
    }
    Err(Failure::domain(format!("{} violation(s)", violations.len())))
}

fn joined(nodes: impl IntoIterator<Item = usize>) -> String {
    nodes.into_iter().map(|n| n.to_string()).collect::<Vec<_>>().join(" -> ")
}

fn cmd_plan(path: &Path, exact: bool, format: Format) -> Result<(), Failure> {
    let scenario = load(path)?;
    let graph = scenario.graph.build().map_err(|e| Failure::domain(e.to_string()))?;
    let choice = if exact { SolverChoice::Exact } else { SolverChoice::Auto };
    let plans = plan_missions(&graph, &scenario.missions, choice)?;
    match format {
        Format::Text => {
            for p in &plans {
                let route = joined(p.route.iter().map(|n| n.0));
                match p.spec.mode {
                    MissionMode::Taxi => println!("{} taxi: {route} cost {:.3}", p.spec.vehicle_id, p.total_cost),
                    MissionMode::Delivery => {
                        let tour = joined(p.stops.iter().chain(p.stops.first()).map(|n| n.0));
                        let tag = if p.exact { "exact" } else { "heuristic" };
                        println!(
                            "{} delivery: tour {tour} via {route} cost {:.3} ({tag})",
                            p.spec.vehicle_id, p.total_cost
                        );
                    }
                }
            }
        }
        Format::Json => {
            let vehicles: Vec<Value> = plans
                .iter()
                .map(|p| {
                    json!({
                        "vehicle_id": p.spec.vehicle_id,
                        "mode": p.spec.mode,
                        "stops": p.stops.iter().map(|n| n.0).collect::<Vec<_>>(),
                        "route": p.route.iter().map(|n| n.0).collect::<Vec<_>>(),
                        "total_cost": p.total_cost,
                        "exact": p.exact,
                    })
                })
                .collect();
            print_json(&json!({ "schema_version": REPORT_SCHEMA_VERSION, "vehicles": vehicles }));
        }
    }
    Ok(())
}

fn simulate_into(scenario: &ScenarioConfig, out: &Path) -> Result<Vec<String>, Failure> {
    let result = run(scenario)?;
    let v = verdicts(&result.metrics, &scenario.requirements);
    let report = report_json(scenario.name.as_deref(), &result.metrics, &v);
    let io = |e: std::io::Error| Failure::domain(format!("cannot write to {}: {e}", out.display()));
    fs::create_dir_all(out).map_err(io)?;
    fs::write(out.join("report.json"), report).map_err(io)?;
    let csv = fs::File::create(out.join("timeseries.csv")).map_err(io)?;
    write_timeseries_csv(&result.timeseries, std::io::BufWriter::new(csv))?;
    let c = &result.metrics.conflicts;
    let failed = v.iter().filter(|v| v.status == VerdictStatus::Fail).count();
    Ok(vec![format!(
        "seed {}: {} conflict(s), {} resolved, {} unresolvable, {} separation violation(s), {} failed requirement(s) -> {}",
        scenario.sim.master_seed,
        c.detected,
        c.resolved(),
        c.unresolvable,
        result.metrics.separation.violations,
        failed,
        out.display()
    )])
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::usage(format!("{THREADS_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

fn cmd_simulate(path: &Path, out: &Path, seed: Option<u64>, sweep: Option<u64>) -> Result<(), Failure> {
    let mut scenario = load(path)?;
    if let Some(s) = seed {
        scenario.sim.master_seed = s;
    }
    let Some(count) = sweep else {
        for line in simulate_into(&scenario, out)? {
            println!("{line}");
        }
        return Ok(());
    };
    if count == 0 {
        return Err(Failure::usage("--sweep needs at least one run"));
    }
    let first = scenario.sim.master_seed;
    let seeds: Vec<u64> = (0..count).map(|k| first.wrapping_add(k)).collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| Failure::domain(e.to_string()))?;
    // Runs share nothing; results are collected in seed order.
    let results: Vec<Result<Vec<String>, Failure>> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let mut sc = scenario.clone();
                sc.sim.master_seed = s;
                simulate_into(&sc, &out.join(format!("seed-{s}")))
            })
            .collect()
    });
    for r in results {
        for line in r? {
            println!("{line}");
        }
    }
    Ok(())
}

fn cmd_linkbudget(
    backoff: f64,
    base_range: f64,
    links: &[f64],
    platform: Option<Platform>,
    slant_km: Option<f64>,
    format: Format,
) -> Result<(), Failure> {
    let tech = LinkTechnology {
        name: "cli".into(),
        base_cell_range_km: base_range,
        backoff_db: backoff,
        data_rate_kbps: 1.0,
        platform: Platform::Terrestrial,
        per_link_availability: 0.5,
    };
    tech.validate().map_err(|e| Failure::usage(e.to_string()))?;
    let factor = range_factor(backoff);
    let cell = effective_cell_range(&tech);

    let platforms: Vec<Platform> = match platform {
        Some(p) => vec![p],
        None => Platform::ALL.into_iter().filter(|p| p.is_relay()).collect(),
    };
    let mut delays = Vec::new();
    for p in platforms {
        let slant = match (slant_km, p.default_altitude_km()) {
            (Some(s), _) => s,
            (None, Some(h)) => h,
            (None, None) => {
                return Err(Failure::usage("terrestrial delays need --slant-km"));
            }
        };
        let one_way = propagation_delay(p, Some(slant)).map_err(|e| Failure::usage(e.to_string()))?;
        let relay = bent_pipe_delay(p, Some(slant)).map_err(|e| Failure::usage(e.to_string()))?;
        let worst = worst_case_slant_km(p);
        let worst_relay = worst.map(|w| bent_pipe_delay(p, Some(w)).expect("positive slant"));
        delays.push((p, slant, one_way, relay, worst, worst_relay));
    }
    let multi = if links.is_empty() {
        None
    } else {
        Some(multi_link_availability(links).map_err(|e| Failure::usage(e.to_string()))?)
    };

    match format {
        Format::Text => {
            println!("range factor            {factor:.3} ({backoff} dB back-off)");
            println!("effective cell range    {cell:.1} km (base {base_range} km)");
            for (p, slant, one_way, relay, worst, worst_relay) in &delays {
                let name = serde_json::to_value(p).expect("platform name");
                let name = name.as_str().unwrap_or_default();
                print!("delay {name:<11} slant {slant:.1} km: one-way {one_way:.4} ms, bent-pipe round trip {relay:.3} ms");
                if let (Some(w), Some(d)) = (worst, worst_relay) {
                    print!("; worst slant {w:.1} km: {d:.3} ms");
                }
                println!();
            }
            if let Some(m) = multi {
                println!(
                    "multi-link availability {} meets_c2 {}",
                    m.availability, m.meets_c2
                );
            }
        }
        Format::Json => {
            let rows: Vec<Value> = delays
                .iter()
                .map(|(p, slant, one_way, relay, worst, worst_relay)| {
                    json!({
                        "platform": p,
                        "slant_km": slant,
                        "one_way_ms": one_way,
                        "bent_pipe_ms": relay,
                        "worst_slant_km": worst,
                        "worst_bent_pipe_ms": worst_relay,
                    })
                })
                .collect();
            print_json(&json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "backoff_db": backoff,
                "range_factor": factor,
                "base_cell_range_km": base_range,
                "effective_cell_range_km": cell,
                "delays": rows,
                "multi_link": multi,
            }));
        }
    }
    Ok(())
}

fn cmd_report(path: &Path, check: bool) -> Result<(), Failure> {
    let value: Value =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if value["schema_version"] != json!(REPORT_SCHEMA_VERSION) {
        return Err(Failure::usage(format!(
            "{}: unsupported report schema_version {}",
            path.display(),
            value["schema_version"]
        )));
    }
    let Some(list) = value["verdicts"].as_array() else {
        return Err(Failure::usage(format!("{}: no verdicts array", path.display())));
    };
    let c = &value["metrics"]["conflicts"];
    println!(
        "conflicts: {} detected, {} cleared without action, {} unresolvable",
        c["detected"], c["cleared_without_action"], c["unresolvable"]
    );
    let mut failed = 0;
    for v in list {
        let status = v["status"].as_str().unwrap_or("?");
        if status == "FAIL" {
            failed += 1;
        }
        let num = |k: &str| v[k].as_f64().map_or("-".to_string(), |x| format!("{x}"));
        let margin = v["margin"].as_f64().map_or("-".to_string(), |x| format!("{x:+.3e}"));
        println!(
            "{:<14} {:<40} measured {} threshold {} margin {}",
            status,
            v["requirement"].as_str().unwrap_or("?"),
            num("measured"),
            num("threshold"),
            margin
        );
    }
    if check && failed > 0 {
        return Err(Failure::domain(format!("{failed} requirement(s) failed")));
    }
    Ok(())
}
