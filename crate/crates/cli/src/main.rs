use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use maintroute::cpp::{brute_force_cpp, BruteForceLimits};
use maintroute::dot::to_dot;
use maintroute::finite_horizon::{import_legs_csv, QuietNightReport};
use maintroute::pebble::{build_product_graph, PebbleLimits};
use maintroute::periodic::{extract_periodic_walks, feasibility_oracle, OracleLimits, OracleOutcome, PeriodicWalk};
use maintroute::reductions::{gen_random_eulerian, gen_random_quiet_night, gen_random_two_commodity};
use maintroute::{
    compute_layers, cpp_to_finite_horizon, extract_path_partition, is_quiet_night, reduce_quiet_night_to_cpp,
    solve_absolutely_periodic, solve_game, solve_ignoring_maintenance, solve_quiet_night, two_commodity_to_cpp,
    validate_absolutely_periodic, validate_cpp_instance, validate_path_partition, validate_plan, CppInstance,
    DirectedMultigraph, Document, DocumentError, FiniteHorizonInstance, PeriodicInstance, VertexId,
};

#[derive(Parser)]
#[command(name = "maintroute", version, about = "Aircraft maintenance routing solvers")]
struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// Size of the worker pool; above 1 the periodic oracle runs in parallel.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the generators.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Overrides the instance's gamma (or sets it for generators and reductions).
    #[arg(long, global = true)]
    gamma: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance, or a solution against its instance.
    Validate {
        /// Document to check; `-` reads stdin.
        file: PathBuf,
        /// Instance the solution refers to.
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Solve a periodic instance.
    SolvePeriodic {
        file: PathBuf,
        /// Use the exhaustive state-space oracle instead of the constructive solver.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 2_000_000)]
        cap_states: usize,
        #[arg(long, default_value_t = 12)]
        cap_arcs: usize,
    },
    /// Solve a constrained path partition instance with the pebble game.
    SolveCpp {
        file: PathBuf,
        /// Exhaustive search instead of the pebble game.
        #[arg(long)]
        brute_force: bool,
        #[arg(long, default_value_t = 8)]
        max_sources: usize,
        #[arg(long, default_value_t = 5_000_000)]
        max_transitions: usize,
        /// Arc cap for `--brute-force`.
        #[arg(long, default_value_t = 24)]
        max_arcs: usize,
        /// Print game statistics to stderr.
        #[arg(long)]
        stats: bool,
    },
    /// Route a quiet-night finite-horizon instance.
    SolveQuietNight {
        file: PathBuf,
        /// Only cover the legs; maintenance is not checked.
        #[arg(long)]
        ignore_maintenance: bool,
        /// Replace the instance's legs with those in this CSV file.
        #[arg(long)]
        legs_csv: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        max_sources: usize,
        #[arg(long, default_value_t = 5_000_000)]
        max_transitions: usize,
    },
    /// Generate a random instance.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Transform an instance.
    Reduce {
        #[command(subcommand)]
        kind: ReduceKind,
    },
    /// Render an instance as Graphviz.
    ExportDot {
        file: PathBuf,
        /// For path partition instances, draw the game's configuration graph.
        #[arg(long)]
        product_graph: bool,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Eulerian multigraph with bases.
    Eulerian {
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 8)]
        arcs: usize,
        #[arg(long, default_value_t = 0.5)]
        base_fraction: f64,
    },
    /// Finite-horizon instance with quiet nights.
    QuietNight {
        #[arg(long, default_value_t = 3)]
        airports: usize,
        /// Flying days; an empty day is added on each side.
        #[arg(long, default_value_t = 2)]
        days: u32,
        #[arg(long, default_value_t = 6)]
        legs: usize,
        #[arg(long, default_value_t = 2)]
        fleet: u32,
    },
    /// Path partition gadget built from a random two-commodity instance.
    Gadget {
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 0.4)]
        arc_prob: f64,
        #[arg(long, default_value_t = 1)]
        max_demand: u32,
        /// Emit the two-commodity instance instead of the gadget.
        #[arg(long)]
        source: bool,
    },
}

#[derive(Subcommand)]
enum ReduceKind {
    /// Path partition to quiet-night finite horizon.
    CppToFh { file: PathBuf },
    /// Two-commodity disjoint paths to path partition (gamma defaults to 4).
    TcToCpp { file: PathBuf },
    /// Quiet-night finite horizon to path partition.
    FhToCpp {
        file: PathBuf,
        /// Also write the vertex and arc correspondence here.
        #[arg(long)]
        mapping: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}:{source}")]
    Malformed { path: String, source: DocumentError },
    #[error("{path}: expected a {expected} document, found {found}")]
    WrongKind { path: String, expected: &'static str, found: &'static str },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] maintroute::Error),
}

fn core<E: Into<maintroute::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}

/// How a successful run ended.
enum Verdict {
    Ok,
    /// Infeasible instance or failed validation.
    No,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Verdict, CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Validate { file, instance } => validate(cli, file, instance.as_ref()),
        Command::SolvePeriodic { file, oracle, cap_states, cap_arcs } => {
            let inst = periodic_input(cli, file)?;
            if *oracle {
                let limits = OracleLimits {
                    max_arcs: *cap_arcs,
                    max_states: *cap_states,
                    parallel: cli.threads.is_some_and(|n| n > 1),
                };
                let outcome = feasibility_oracle(&inst, &limits).map_err(core)?;
                let feasible = outcome.feasible();
                emit(cli, &to_json(&OracleReport::new(outcome)))?;
                return Ok(if feasible { Verdict::Ok } else { infeasible("no periodic routing exists") });
            }
            match solve_absolutely_periodic(&inst).map_err(core)? {
                Some(sol) => {
                    emit(cli, &Document::PeriodicSolution(sol).to_json())?;
                    Ok(Verdict::Ok)
                }
                None => Ok(infeasible("no absolutely periodic routing exists")),
            }
        }
        Command::SolveCpp { file, brute_force, max_sources, max_transitions, max_arcs, stats } => {
            let inst = cpp_input(cli, file)?;
            let pp = if *brute_force {
                brute_force_cpp(&inst, &BruteForceLimits { max_arcs: *max_arcs }).map_err(core)?
            } else {
                let limits = PebbleLimits { max_sources: *max_sources, max_transitions: *max_transitions };
                let r = solve_game(&inst, &limits).map_err(core)?;
                if *stats {
                    eprintln!("{}", serde_json::to_string(&r.stats).expect("stats serialize"));
                }
                match &r.strategy {
                    Some(s) => Some(extract_path_partition(&inst, s).map_err(core)?),
                    None => None,
                }
            };
            match pp {
                Some(pp) => {
                    emit(cli, &Document::PathPartition(pp).to_json())?;
                    Ok(Verdict::Ok)
                }
                None => Ok(infeasible("no path partition meets the counter bound")),
            }
        }
        Command::SolveQuietNight { file, ignore_maintenance, legs_csv, max_sources, max_transitions } => {
            let mut inst = fh_input(cli, file)?;
            if let Some(p) = legs_csv {
                let text = read_input(p)?;
                inst.legs = import_legs_csv(text.as_bytes(), &inst.airports)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", display(p))))?;
            }
            let plan = if *ignore_maintenance {
                solve_ignoring_maintenance(&inst).map_err(core)?.map(|r| r.plan)
            } else {
                let limits = PebbleLimits { max_sources: *max_sources, max_transitions: *max_transitions };
                solve_quiet_night(&inst, &limits).map_err(core)?
            };
            match plan {
                Some(p) => {
                    emit(cli, &Document::RoutePlan(p).to_json())?;
                    Ok(Verdict::Ok)
                }
                None => Ok(infeasible("the fleet cannot fly these legs")),
            }
        }
        Command::Gen { kind } => {
            let doc = generate(cli, kind)?;
            emit(cli, &doc.to_json())?;
            Ok(Verdict::Ok)
        }
        Command::Reduce { kind } => reduce(cli, kind),
        Command::ExportDot { file, product_graph } => {
            let (name, doc) = load(file)?;
            let dot = match (doc, product_graph) {
                (Document::Cpp(inst), true) => {
                    let inst = with_cpp_gamma(cli, inst);
                    let schedule = compute_layers(&inst).map_err(core)?;
                    build_product_graph(&inst, &schedule, &PebbleLimits::default()).map_err(core)?.to_dot()
                }
                (d, true) => {
                    return Err(CliError::WrongKind { path: name, expected: "cpp", found: d.kind() });
                }
                (Document::Periodic(inst), false) => periodic_dot(&inst),
                (Document::Cpp(inst), false) => cpp_dot(&inst),
                (Document::FiniteHorizon(inst), false) => fh_dot(&inst),
                (Document::TwoCommodity(tc), false) => {
                    let terminals = [(tc.s1, "s1"), (tc.t1, "t1"), (tc.s2, "s2"), (tc.t2, "t2")];
                    to_dot(
                        &tc.graph,
                        "two_commodity",
                        |v| {
                            let names: Vec<&str> = terminals.iter().filter(|t| t.0 == v).map(|t| t.1).collect();
                            (!names.is_empty()).then(|| format!("label=\"{} {}\"", v.0, names.join(",")))
                        },
                        |_| None,
                    )
                }
                (d, false) => {
                    return Err(CliError::Usage(format!("{name}: cannot draw a {} document", d.kind())));
                }
            };
            emit(cli, &dot)?;
            Ok(Verdict::Ok)
        }
    }
}

fn infeasible(msg: &str) -> Verdict {
    eprintln!("infeasible: {msg}");
    Verdict::No
}

#[derive(Serialize)]
struct OracleReport {
    feasible: bool,
    #[serde(flatten)]
    outcome: OracleOutcome,
    walks: Vec<PeriodicWalk>,
}

impl OracleReport {
    fn new(outcome: OracleOutcome) -> Self {
        let walks = outcome.witness.as_ref().map(extract_periodic_walks).unwrap_or_default();
        OracleReport { feasible: outcome.feasible(), outcome, walks }
    }
}

#[derive(Serialize)]
struct ValidationReport<T: Serialize> {
    kind: &'static str,
    valid: bool,
    diagnostics: T,
}

#[derive(Serialize)]
struct FhReport {
    issues: Vec<String>,
    quiet_night: QuietNightReport,
}

fn validate(cli: &Cli, file: &Path, instance: Option<&PathBuf>) -> Result<Verdict, CliError> {
    let name = display(file);
    let text = read_input(file)?;
    let doc = match Document::from_json(&text) {
        Ok(d) => d,
        // Well-formed JSON whose content breaks an invariant is an invalid
        // document, not a malformed one.
        Err(e) if e.data && instance.is_none() => {
            let report = ValidationReport { kind: "unknown", valid: false, diagnostics: format!("{name}:{e}") };
            emit(cli, &to_json(&report))?;
            return Ok(Verdict::No);
        }
        Err(e) => return Err(CliError::Malformed { path: name, source: e }),
    };
    let kind = doc.kind();
    let needs_instance = || match instance {
        Some(p) => load(p),
        None => Err(CliError::Usage(format!("{name}: validating a {kind} document needs --instance"))),
    };
    let (valid, json) = match doc {
        Document::Periodic(inst) => {
            let inst = with_periodic_gamma(cli, inst)?;
            let diag = serde_json::json!({
                "vertices": inst.graph().vertex_count(),
                "arcs": inst.graph().arc_count(),
                "bases": inst.bases(),
                "gamma": inst.gamma(),
            });
            (true, to_json(&ValidationReport { kind, valid: true, diagnostics: diag }))
        }
        Document::Cpp(inst) => {
            let d = validate_cpp_instance(&with_cpp_gamma(cli, inst));
            (d.passed(), to_json(&ValidationReport { kind, valid: d.passed(), diagnostics: d }))
        }
        Document::FiniteHorizon(inst) => {
            let inst = with_fh_gamma(cli, inst);
            let r = FhReport { issues: inst.issues(), quiet_night: is_quiet_night(&inst) };
            let ok = r.issues.is_empty();
            (ok, to_json(&ValidationReport { kind, valid: ok, diagnostics: r }))
        }
        Document::TwoCommodity(tc) => {
            let issue = tc.check().err().map(|e| e.to_string());
            let ok = issue.is_none();
            (ok, to_json(&ValidationReport { kind, valid: ok, diagnostics: issue }))
        }
        Document::PeriodicSolution(sol) => {
            let (path, inst) = needs_instance()?;
            let Document::Periodic(inst) = inst else {
                return Err(CliError::WrongKind { path, expected: "periodic", found: inst.kind() });
            };
            let d = validate_absolutely_periodic(&with_periodic_gamma(cli, inst)?, &sol);
            (d.passed(), to_json(&ValidationReport { kind, valid: d.passed(), diagnostics: d }))
        }
        Document::PathPartition(pp) => {
            let (path, inst) = needs_instance()?;
            let Document::Cpp(inst) = inst else {
                return Err(CliError::WrongKind { path, expected: "cpp", found: inst.kind() });
            };
            let d = validate_path_partition(&with_cpp_gamma(cli, inst), &pp);
            (d.passed(), to_json(&ValidationReport { kind, valid: d.passed(), diagnostics: d }))
        }
        Document::RoutePlan(plan) => {
            let (path, inst) = needs_instance()?;
            let Document::FiniteHorizon(inst) = inst else {
                return Err(CliError::WrongKind { path, expected: "finite_horizon", found: inst.kind() });
            };
            let d = validate_plan(&with_fh_gamma(cli, inst), &plan);
            (d.passed(), to_json(&ValidationReport { kind, valid: d.passed(), diagnostics: d }))
        }
    };
    emit(cli, &json)?;
    Ok(if valid { Verdict::Ok } else { Verdict::No })
}

fn generate(cli: &Cli, kind: &GenKind) -> Result<Document, CliError> {
    let seed = cli.seed;
    let doc = match *kind {
        GenKind::Eulerian { vertices, arcs, base_fraction } => Document::Periodic(
            gen_random_eulerian(vertices, arcs, base_fraction, cli.gamma.unwrap_or(2), seed).map_err(core)?,
        ),
        GenKind::QuietNight { airports, days, legs, fleet } => Document::FiniteHorizon(
            gen_random_quiet_night(airports, days, legs, fleet, cli.gamma.unwrap_or(2), seed).map_err(core)?,
        ),
        GenKind::Gadget { vertices, arc_prob, max_demand, source } => {
            let tc = gen_random_two_commodity(vertices, arc_prob, max_demand, seed).map_err(core)?;
            if source {
                Document::TwoCommodity(tc)
            } else {
                Document::Cpp(two_commodity_to_cpp(&tc, cli.gamma.unwrap_or(4)).map_err(core)?)
            }
        }
    };
    Ok(doc)
}

fn reduce(cli: &Cli, kind: &ReduceKind) -> Result<Verdict, CliError> {
    let doc = match kind {
        ReduceKind::CppToFh { file } => {
            let inst = cpp_input(cli, file)?;
            Document::FiniteHorizon(cpp_to_finite_horizon(&inst).map_err(core)?)
        }
        ReduceKind::TcToCpp { file } => {
            let (name, doc) = load(file)?;
            let Document::TwoCommodity(tc) = doc else {
                return Err(CliError::WrongKind { path: name, expected: "two_commodity", found: doc.kind() });
            };
            Document::Cpp(two_commodity_to_cpp(&tc, cli.gamma.unwrap_or(4)).map_err(core)?)
        }
        ReduceKind::FhToCpp { file, mapping } => {
            let inst = fh_input(cli, file)?;
            let (cpp, map) = reduce_quiet_night_to_cpp(&inst).map_err(core)?;
            if let Some(p) = mapping {
                write_file(p, &to_json(&map))?;
            }
            Document::Cpp(cpp)
        }
    };
    emit(cli, &doc.to_json())?;
    Ok(Verdict::Ok)
}

fn display(p: &Path) -> String {
    if p.as_os_str() == "-" {
        "<stdin>".into()
    } else {
        p.display().to_string()
    }
}

fn read_input(p: &Path) -> Result<String, CliError> {
    let mut text = String::new();
    let res = if p.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(p).map(|t| text = t)
    };
    res.map_err(|source| CliError::Io { path: display(p), source })?;
    Ok(text)
}

fn load(p: &Path) -> Result<(String, Document), CliError> {
    let name = display(p);
    let text = read_input(p)?;
    match Document::from_json(&text) {
        Ok(d) => Ok((name, d)),
        Err(source) => Err(CliError::Malformed { path: name, source }),
    }
}

fn periodic_input(cli: &Cli, p: &Path) -> Result<PeriodicInstance, CliError> {
    match load(p)? {
        (_, Document::Periodic(inst)) => with_periodic_gamma(cli, inst),
        (path, d) => Err(CliError::WrongKind { path, expected: "periodic", found: d.kind() }),
    }
}

fn cpp_input(cli: &Cli, p: &Path) -> Result<CppInstance, CliError> {
    match load(p)? {
        (_, Document::Cpp(inst)) => Ok(with_cpp_gamma(cli, inst)),
        (path, d) => Err(CliError::WrongKind { path, expected: "cpp", found: d.kind() }),
    }
}

fn fh_input(cli: &Cli, p: &Path) -> Result<FiniteHorizonInstance, CliError> {
    match load(p)? {
        (_, Document::FiniteHorizon(inst)) => Ok(with_fh_gamma(cli, inst)),
        (path, d) => Err(CliError::WrongKind { path, expected: "finite_horizon", found: d.kind() }),
    }
}

fn with_periodic_gamma(cli: &Cli, inst: PeriodicInstance) -> Result<PeriodicInstance, CliError> {
    match cli.gamma {
        Some(g) => inst.with_gamma(g).map_err(core),
        None => Ok(inst),
    }
}

fn with_cpp_gamma(cli: &Cli, mut inst: CppInstance) -> CppInstance {
    if let Some(g) = cli.gamma {
        inst.gamma = g;
    }
    inst
}

fn with_fh_gamma(cli: &Cli, mut inst: FiniteHorizonInstance) -> FiniteHorizonInstance {
    if let Some(g) = cli.gamma {
        inst.gamma = g;
    }
    inst
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports always serialize");
    s.push('\n');
    s
}

fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    fs::write(p, text).map_err(|source| CliError::Io { path: display(p), source })
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.output {
        Some(p) if p.as_os_str() != "-" => write_file(p, text),
        _ => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn periodic_dot(inst: &PeriodicInstance) -> String {
    to_dot(inst.graph(), "periodic", |v| inst.is_base(v).then(|| "shape=doublecircle".to_string()), |_| None)
}

fn cpp_dot(inst: &CppInstance) -> String {
    let m: std::collections::HashSet<_> = inst.maintenance_arcs.iter().copied().collect();
    let layer_of = |v: VertexId| inst.layers.iter().rposition(|l| l.contains(&v)).map(|i| i + 1);
    to_dot(
        &inst.graph,
        "cpp",
        |v| {
            if inst.sources.contains(&v) {
                Some("shape=invtriangle".into())
            } else if inst.sinks.contains(&v) {
                Some("shape=triangle".into())
            } else {
                layer_of(v).map(|l| format!("label=\"{} X{l}\"", v.0))
            }
        },
        |a| m.contains(&a).then(|| format!("{} M", a.0)),
    )
}

fn fh_dot(inst: &FiniteHorizonInstance) -> String {
    let mut g = DirectedMultigraph::new(inst.airports.len());
    for leg in &inst.legs {
        g.add_arc(VertexId(leg.dep), VertexId(leg.arr));
    }
    let clock = |t: i64| {
        format!(
            "{}:{:02}:{:02}",
            maintroute::finite_horizon::day_of(t),
            maintroute::finite_horizon::time_of_day(t) / 60,
            maintroute::finite_horizon::time_of_day(t) % 60
        )
    };
    to_dot(
        &g,
        "finite_horizon",
        |v| {
            let shape = if inst.is_base(v.0) { ",shape=doublecircle" } else { "" };
            Some(format!("label=\"{}\"{shape}", inst.airports[v.0].name.replace('"', "'")))
        },
        |a| {
            let leg = &inst.legs[a.0];
            Some(format!("{} {}-{}", a.0, clock(leg.dep_time), clock(leg.arr_time)))
        },
    )
}
