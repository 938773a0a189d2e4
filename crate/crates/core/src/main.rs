use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use netdesign::capacity::{
    analytic_rc, assign, closed_form_cmax, closed_form_rc, tradeoff_ratios, Combo, Scheme,
};
use netdesign::experiments::{self, Quantity, SimConfig, TableConfig, CSV_COLUMNS};
use netdesign::routing::{ForwardingTable, RoutingAlgorithm, RoutingSystem, SuccessorChoice};
use netdesign::simulator::{DeliveryMode, EtaConfig, RcSearch, SimOptions, Simulation};
use netdesign::topology::{BaParams, Connectivity, Family, Topology};
use netdesign::{load_edge_list, save_edge_list, Error, Graph, VERSION};

/// Version of the JSON and CSV layouts written by this binary.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug, Serialize)]
#[command(name = "netdesign", version, about = "Capacity and cost of communication-network designs")]
struct Cli {
    /// Base seed for all randomness.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format; defaults to csv when --out ends in .csv, else json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// TOML file with default flag values. Flags on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a topology and write it as an edge list.
    Generate(GenerateArgs),
    /// Distances and betweenness profiles of a graph.
    Analyze(AnalyzeArgs),
    /// Analytic critical rate and C_max of capability/routing designs.
    Evaluate(EvaluateArgs),
    /// Measure the order parameter at one generation rate.
    Simulate(SimulateArgs),
    /// Locate the simulated critical rate by bisection.
    FindRc(FindRcArgs),
    /// Instance-averaged capacity and cost tables.
    Reproduce(ReproduceArgs),
    /// Power-law fits of quantities against network size.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RoutingChoice {
    Spr,
    Efr,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DeliveryArg {
    OnArrival,
    ConsumesCapacity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SuccessorArg {
    PathWeighted,
    Uniform,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ConnectArg {
    Repair,
    Resample,
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(long)]
    family: Family,
    /// Node count; defaults to the family's benchmark size.
    #[arg(long)]
    n: Option<usize>,
    /// BA: edges per new node.
    #[arg(long)]
    m: Option<usize>,
    /// BA: grow from an (m+1)-clique with plain degree-proportional attachment.
    #[arg(long)]
    clique_start: bool,
    /// ER, PA, HOT: total edge count.
    #[arg(long)]
    edges: Option<usize>,
    /// WS: fraction of ring edges rewired.
    #[arg(long)]
    rewire: Option<f64>,
    /// Lattice rows.
    #[arg(long)]
    rows: Option<usize>,
    /// Lattice columns.
    #[arg(long)]
    cols: Option<usize>,
    /// HOT core size.
    #[arg(long)]
    core: Option<usize>,
    /// ER: how a connected graph is obtained.
    #[arg(long, value_enum)]
    connect: Option<ConnectArg>,
    /// Omit the leading comment lines.
    #[arg(long)]
    no_header: bool,
    /// Output path, `-` for stdout.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value_t = RoutingChoice::Both)]
    routing: RoutingChoice,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct EvaluateArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Restrict to one scheme (uc, dc, bc, ebc).
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Restrict to one routing algorithm.
    #[arg(long)]
    routing: Option<RoutingAlgorithm>,
    /// Routing whose profile builds EBC capabilities; defaults to the evaluated routing.
    #[arg(long)]
    ebc_profile: Option<RoutingAlgorithm>,
    /// Permit EBC capabilities built for a different routing.
    #[arg(long)]
    allow_mismatch: bool,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct TrafficArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    routing: RoutingAlgorithm,
    #[arg(long)]
    scheme: Scheme,
    #[arg(long, default_value_t = 1000)]
    warmup: usize,
    /// Window length in steps.
    #[arg(long, default_value_t = 100)]
    window: usize,
    #[arg(long, default_value_t = 10)]
    windows: usize,
    #[arg(long, value_enum, default_value_t = DeliveryArg::OnArrival)]
    delivery: DeliveryArg,
    #[arg(long, value_enum, default_value_t = SuccessorArg::PathWeighted)]
    successors: SuccessorArg,
    /// Packet count past which a run counts as saturated.
    #[arg(long, default_value_t = netdesign::simulator::DEFAULT_PACKET_CAP)]
    packet_cap: u64,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    traffic: TrafficArgs,
    /// Packets generated per step.
    #[arg(long = "R")]
    rate: f64,
    /// Include the in-flight count at every window boundary.
    #[arg(long)]
    series: bool,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct FindRcArgs {
    #[command(flatten)]
    #[serde(flatten)]
    traffic: TrafficArgs,
    /// Lower bracket; defaults to 1.
    #[arg(long)]
    lower: Option<f64>,
    /// Upper bracket; defaults to 4x the analytic rate.
    #[arg(long)]
    upper: Option<f64>,
    #[arg(long, default_value_t = RcSearch::DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Runs averaged per bisection decision.
    #[arg(long, default_value_t = 3)]
    seeds: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct ReproduceArgs {
    /// Tables to fill: 2 analytic rates, 3 simulated rates, 4 C_max.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    tables: Vec<u8>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, value_delimiter = ',', default_value = "ba,pa,hot,er,ws,lattice,ring")]
    families: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "uc-spr,uc-efr,dc-spr,dc-efr,bc-spr,bc-efr,ebc-efr")]
    combos: Vec<Combo>,
    /// Node count for every family instead of the benchmark sizes.
    #[arg(long)]
    n: Option<usize>,
    /// Simulated searches averaged per row when table 3 is requested.
    #[arg(long, default_value_t = 10)]
    sim_runs: usize,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    family: Family,
    /// b_max_spr, b_max_efr, l_spr, l_efr, n, rc:<combo>, c_max:<combo>; comma separated.
    #[arg(long, value_delimiter = ',', default_value = "b_max_spr")]
    quantity: Vec<Quantity>,
    #[arg(long, value_delimiter = ',', default_value = "400,800,1600,3200")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    instances: usize,
    /// BA: grow from an (m+1)-clique with plain degree-proportional attachment.
    #[arg(long)]
    clique_start: bool,
    #[arg(long)]
    out: Option<String>,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    kind: String,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_domain() { 2 } else { 1 },
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::Io(e).into()
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        kind: "usage".into(),
        message: message.into(),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let body = json!({"error": {"kind": f.kind, "message": f.message, "exit_code": f.code}});
            let _ = writeln!(io::stderr(), "{body}");
            ExitCode::from(f.code)
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<(), Failure> {
    let argv = apply_config_file(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let rendered = e.to_string();
            let detail: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.trim().is_empty())
                .map(|l| l.trim().trim_start_matches("error: "))
                .collect();
            return Err(usage(detail.join(" ")));
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Generate(a) => generate(&cli, a),
        Command::Analyze(a) => analyze(&cli, a),
        Command::Evaluate(a) => evaluate(&cli, a),
        Command::Simulate(a) => simulate(&cli, a),
        Command::FindRc(a) => find_rc(&cli, a),
        Command::Reproduce(a) => reproduce(&cli, a),
        Command::Sweep(a) => sweep(&cli, a),
    }
}

const SUBCOMMANDS: [&str; 7] = ["generate", "analyze", "evaluate", "simulate", "find-rc", "reproduce", "sweep"];

/// Appends `--key value` for every config-file entry whose flag is absent
/// from `argv`. Top-level keys are global flags; `[subcommand]` tables hold
/// that subcommand's flags.
fn apply_config_file(mut argv: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = args.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--config=")
            .map(str::to_string)
            .or_else(|| (a == "--config").then(|| args.get(i + 1).cloned()).flatten())
    });
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("config {path}: {e}")))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| usage(format!("config {path}: {e}")))?;
    let subcommand = args.iter().find(|a| SUBCOMMANDS.contains(&a.as_str()));
    let present = |flag: &str| {
        args.iter()
            .any(|a| a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    let mut push = |key: &str, value: &toml::Value| -> Result<(), Failure> {
        let flag = format!("--{}", key.replace('_', "-"));
        if present(&flag) {
            return Ok(());
        }
        let rendered = match value {
            toml::Value::Boolean(true) => None,
            toml::Value::Boolean(false) => return Ok(()),
            toml::Value::String(s) => Some(s.clone()),
            toml::Value::Integer(i) => Some(i.to_string()),
            toml::Value::Float(f) => Some(f.to_string()),
            toml::Value::Array(items) => Some(
                items
                    .iter()
                    .map(|v| match v {
                        toml::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            other => return Err(usage(format!("config key {key}: unsupported value {other}"))),
        };
        extra.push(flag);
        extra.extend(rendered);
        Ok(())
    };
    for (key, value) in &table {
        if let toml::Value::Table(section) = value {
            if Some(key) == subcommand {
                for (k, v) in section {
                    push(k, v)?;
                }
            }
        } else {
            push(key, value)?;
        }
    }
    argv.extend(extra.into_iter().map(OsString::from));
    Ok(argv)
}

fn format_for(cli: &Cli, out: Option<&str>) -> Format {
    cli.format.unwrap_or(match out {
        Some(p) if p.ends_with(".csv") => Format::Csv,
        _ => Format::Json,
    })
}

fn command_name(cli: &Cli) -> &'static str {
    match cli.command {
        Command::Generate(_) => "generate",
        Command::Analyze(_) => "analyze",
        Command::Evaluate(_) => "evaluate",
        Command::Simulate(_) => "simulate",
        Command::FindRc(_) => "find-rc",
        Command::Reproduce(_) => "reproduce",
        Command::Sweep(_) => "sweep",
    }
}

fn meta(cli: &Cli) -> Value {
    json!({
        "tool": "netdesign",
        "version": VERSION,
        "schema": SCHEMA_VERSION,
        "command": command_name(cli),
        "seed": cli.seed,
        "config": cli,
    })
}

/// Comment lines carrying the same provenance as the JSON `meta` object.
fn comment_header(cli: &Cli) -> String {
    format!(
        "# netdesign {VERSION} schema {SCHEMA_VERSION} {} seed {}\n# config {}\n",
        command_name(cli),
        cli.seed,
        serde_json::to_string(cli).expect("config serializes")
    )
}

fn write_output(out: Option<&str>, text: &str) -> Result<(), Failure> {
    match out {
        None | Some("-") => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
        Some(path) => fs::write(path, text)?,
    }
    Ok(())
}

fn write_json(out: Option<&str>, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    write_output(out, &text)
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(load_edge_list(&text)?)
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<(), Failure> {
    let family = a.family;
    let n = a.n.unwrap_or_else(|| family.benchmark_size());
    let mut spec = family.spec(n, cli.seed);
    let reject = |flag: &str| Err(usage(format!("--{flag} does not apply to {family}")));
    let applies = |flag: &str, set: bool, families: &[Family]| -> Result<(), Failure> {
        if set && !families.contains(&family) {
            reject(flag)
        } else {
            Ok(())
        }
    };
    applies("m", a.m.is_some(), &[Family::Ba])?;
    applies("clique-start", a.clique_start, &[Family::Ba])?;
    applies("edges", a.edges.is_some(), &[Family::Er, Family::Pa, Family::Hot])?;
    applies("rewire", a.rewire.is_some(), &[Family::Ws])?;
    applies("rows", a.rows.is_some(), &[Family::Lattice])?;
    applies("cols", a.cols.is_some(), &[Family::Lattice])?;
    applies("core", a.core.is_some(), &[Family::Hot])?;
    applies("connect", a.connect.is_some(), &[Family::Er])?;
    match &mut spec.topology {
        Topology::Ring { .. } => {}
        Topology::Lattice { rows, cols } => {
            *rows = a.rows.unwrap_or(*rows);
            *cols = a.cols.unwrap_or(*cols);
        }
        Topology::WattsStrogatz { rewire, .. } => *rewire = a.rewire.unwrap_or(*rewire),
        Topology::ErdosRenyi { edges, connect, .. } => {
            *edges = a.edges.unwrap_or(*edges);
            if let Some(c) = a.connect {
                *connect = match c {
                    ConnectArg::Repair => Connectivity::Repair,
                    ConnectArg::Resample => Connectivity::Resample,
                };
            }
        }
        Topology::BarabasiAlbert { params, .. } => {
            params.m = a.m.unwrap_or(params.m);
            if a.clique_start {
                *params = BaParams::standard(params.m);
            }
        }
        Topology::PreferentialAttachment { edges, .. } => *edges = a.edges.unwrap_or(*edges),
        Topology::Hot { edges, core_size, .. } => {
            *edges = a.edges.unwrap_or(*edges);
            *core_size = a.core.unwrap_or(*core_size);
        }
    }
    let g = spec.generate()?;
    let mut text = String::new();
    if !a.no_header {
        text.push_str(&comment_header(cli));
        text.push_str(&format!(
            "# topology {}\n# nodes {} edges {}\n",
            serde_json::to_string(&spec).expect("spec serializes"),
            g.node_count(),
            g.edge_count()
        ));
    }
    text.push_str(&save_edge_list(&g));
    write_output(a.out.as_deref(), &text)
}

fn routings(choice: RoutingChoice) -> Vec<RoutingAlgorithm> {
    match choice {
        RoutingChoice::Spr => vec![RoutingAlgorithm::Spr],
        RoutingChoice::Efr => vec![RoutingAlgorithm::Efr],
        RoutingChoice::Both => RoutingAlgorithm::ALL.to_vec(),
    }
}

fn analyze(cli: &Cli, a: &AnalyzeArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let metrics = g.metrics()?;
    let profiles = routings(a.routing)
        .into_iter()
        .map(|r| Ok(RoutingSystem::build(&g, r)?.effective_betweenness()))
        .collect::<Result<Vec<_>, Error>>()?;
    let out = a.out.as_deref();
    if format_for(cli, out) == Format::Csv {
        let mut text = comment_header(cli);
        text.push_str("node,degree");
        for p in &profiles {
            text.push_str(&format!(",b_{}", p.algorithm));
        }
        text.push('\n');
        for v in 0..g.node_count() {
            text.push_str(&format!("{v},{}", g.degrees()[v]));
            for p in &profiles {
                text.push_str(&format!(",{}", p.values[v]));
            }
            text.push('\n');
        }
        return write_output(out, &text);
    }
    let tradeoff = match profiles.as_slice() {
        [spr, efr] => Some(tradeoff_ratios(spr, efr)?),
        _ => None,
    };
    let body = json!({
        "meta": meta(cli),
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "mean_degree": g.mean_degree(),
        "max_degree": g.max_degree(),
        "diameter": metrics.diameter,
        "avg_path_length": metrics.avg_path_length,
        "profiles": profiles.iter().map(|p| json!({
            "routing": p.algorithm,
            "b_max": p.b_max,
            "argmax": p.argmax,
            "avg_path_length": p.avg_path_length,
            "total": p.total(),
            "values": p.values,
        })).collect::<Vec<_>>(),
        "tradeoff": tradeoff,
    });
    write_json(out, &body)
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Result<(), Failure> {
    let g = read_graph(&a.graph)?;
    let combos: Vec<Combo> = match (a.scheme, a.routing) {
        (Some(s), Some(r)) => vec![Combo::new(s, r)],
        (s, r) => Combo::TABLE
            .into_iter()
            .filter(|c| s.is_none_or(|s| s == c.scheme) && r.is_none_or(|r| r == c.routing))
            .collect(),
    };
    if a.ebc_profile.is_some() && !a.allow_mismatch {
        return Err(usage("--ebc-profile requires --allow-mismatch"));
    }
    let spr = RoutingSystem::build(&g, RoutingAlgorithm::Spr)?.effective_betweenness();
    let efr = RoutingSystem::build(&g, RoutingAlgorithm::Efr)?.effective_betweenness();
    let profile = |r: RoutingAlgorithm| if r == RoutingAlgorithm::Spr { &spr } else { &efr };
    let mut rows = Vec::new();
    for combo in combos {
        let base = match combo.scheme {
            Scheme::Uc | Scheme::Dc => None,
            Scheme::Bc => Some(&spr),
            Scheme::Ebc => Some(profile(a.ebc_profile.unwrap_or(combo.routing))),
        };
        let ca = assign(&g, base, combo.scheme)?;
        let eval = analytic_rc(profile(combo.routing), &ca, a.allow_mismatch)?;
        let matched = ca.profile_routing.is_none_or(|r| combo.scheme != Scheme::Ebc || r == combo.routing);
        let rc_closed = closed_form_rc(&g, profile(combo.routing), combo).ok().filter(|_| matched);
        let cmax_closed = closed_form_cmax(&g, Some(profile(combo.routing)), combo)
            .ok()
            .filter(|_| matched);
        rows.push((combo, eval, rc_closed, cmax_closed));
    }
    let out = a.out.as_deref();
    if format_for(cli, out) == Format::Csv {
        let mut text = comment_header(cli);
        text.push_str("scheme,routing,rc_analytic,c_max,argmin_node,rc_closed_form,c_max_closed_form,generalized\n");
        let opt = |c: &Option<netdesign::capacity::ClosedForm>| c.map(|c| c.value.to_string()).unwrap_or_default();
        for (combo, e, rc, cm) in &rows {
            let generalized = rc.or(*cm).map(|c| c.generalized.to_string()).unwrap_or_default();
            text.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                combo.scheme, combo.routing, e.rc_analytic, e.c_max, e.argmin_node, opt(rc), opt(cm), generalized
            ));
        }
        return write_output(out, &text);
    }
    let body = json!({
        "meta": meta(cli),
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "results": rows.iter().map(|(combo, e, rc, cm)| json!({
            "scheme": combo.scheme,
            "routing": combo.routing,
            "rc_analytic": e.rc_analytic,
            "c_max": e.c_max,
            "argmin_node": e.argmin_node,
            "rc_closed_form": rc,
            "c_max_closed_form": cm,
        })).collect::<Vec<_>>(),
    });
    write_json(out, &body)
}

struct TrafficSetup {
    table: ForwardingTable,
    ca: netdesign::CapabilityAssignment,
    rc_analytic: f64,
    options: SimOptions,
    eta: EtaConfig,
}

fn traffic_setup(t: &TrafficArgs) -> Result<TrafficSetup, Failure> {
    let g = read_graph(&t.graph)?;
    let combo = Combo::new(t.scheme, t.routing);
    let profiles = netdesign::Profiles::compute(&g)?;
    let ca = netdesign::capacity::assign_combo(&g, combo, &profiles)?;
    let rc_analytic = analytic_rc(profiles.get(t.routing), &ca, false)?.rc_analytic;
    let rs = RoutingSystem::build(&g, t.routing)?;
    let choice = match t.successors {
        SuccessorArg::PathWeighted => SuccessorChoice::PathWeighted,
        SuccessorArg::Uniform => SuccessorChoice::Uniform,
    };
    Ok(TrafficSetup {
        table: ForwardingTable::new(&rs, choice),
        ca,
        rc_analytic,
        options: SimOptions {
            delivery: match t.delivery {
                DeliveryArg::OnArrival => DeliveryMode::OnArrival,
                DeliveryArg::ConsumesCapacity => DeliveryMode::ConsumesCapacity,
            },
            packet_cap: t.packet_cap,
        },
        eta: EtaConfig {
            warmup: t.warmup,
            delta_t: t.window,
            windows: t.windows,
            record_series: false,
        },
    })
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<(), Failure> {
    if !(a.rate >= 0.0 && a.rate.is_finite()) {
        return Err(usage("--R must be a non-negative number"));
    }
    let setup = traffic_setup(&a.traffic)?;
    let sim = Simulation::new(&setup.table, &setup.ca, setup.options)?;
    let eta = EtaConfig {
        record_series: a.series,
        ..setup.eta
    };
    let estimate = sim.measure_eta(a.rate, eta, cli.seed)?;
    let body = json!({
        "meta": meta(cli),
        "rc_analytic": setup.rc_analytic,
        "eta": estimate.eta,
        "rate": estimate.rate,
        "window_samples": estimate.windows,
        "saturated": estimate.saturated,
        "theta_series": estimate.theta_series,
    });
    write_json(a.out.as_deref(), &body)
}

fn find_rc(cli: &Cli, a: &FindRcArgs) -> Result<(), Failure> {
    let setup = traffic_setup(&a.traffic)?;
    let sim = Simulation::new(&setup.table, &setup.ca, setup.options)?;
    let mut search = RcSearch::around(setup.rc_analytic, cli.seed);
    search.lower = a.lower.unwrap_or(search.lower);
    search.upper = a.upper.unwrap_or(search.upper);
    search.threshold = a.threshold;
    search.seeds = a.seeds;
    search.eta = setup.eta;
    let estimate = sim.estimate_rc(&search)?;
    let body = json!({
        "meta": meta(cli),
        "rc_analytic": setup.rc_analytic,
        "rc_sim": estimate.rc,
        "bracket": estimate.bracket,
        "seeds": estimate.seeds,
        "evaluations": estimate.evaluations,
    });
    write_json(a.out.as_deref(), &body)
}

fn reproduce(cli: &Cli, a: &ReproduceArgs) -> Result<(), Failure> {
    if let Some(t) = a.tables.iter().find(|t| !(2..=4).contains(*t)) {
        return Err(usage(format!("unknown table {t}; choose from 2, 3, 4")));
    }
    let config = TableConfig {
        families: a.families.clone(),
        combos: a.combos.clone(),
        instances: a.instances,
        seed: cli.seed,
        size: a.n,
        simulate: a.tables.contains(&3).then(|| SimConfig {
            runs: a.sim_runs,
            ..SimConfig::default()
        }),
    };
    let result = experiments::reproduce_tables(&config)?;
    let out = a.out.as_deref();
    if format_for(cli, out) == Format::Csv {
        let mut buf = comment_header(cli).into_bytes();
        result.write_csv(&mut buf)?;
        return write_output(out, &String::from_utf8(buf).expect("csv is utf-8"));
    }
    let means = result.means();
    let table = |pick: fn(&experiments::MeanRow) -> Option<f64>| -> Value {
        let mut rows = Vec::new();
        for &family in &a.families {
            let mut values = serde_json::Map::new();
            for m in means.iter().filter(|m| m.family == family) {
                values.insert(m.combo.to_string(), json!(pick(m)));
            }
            rows.push(json!({"family": family, "values": values}));
        }
        Value::Array(rows)
    };
    let mut tables = serde_json::Map::new();
    for t in &a.tables {
        let value = match t {
            2 => table(|m| Some(m.rc_analytic)),
            3 => table(|m| m.rc_sim),
            _ => table(|m| Some(m.c_max)),
        };
        tables.insert(t.to_string(), value);
    }
    let body = json!({
        "meta": meta(cli),
        "columns": CSV_COLUMNS,
        "tables": tables,
        "means": means,
        "rows": result.rows,
    });
    write_json(out, &body)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<(), Failure> {
    if a.clique_start && a.family != Family::Ba {
        return Err(usage(format!("--clique-start does not apply to {}", a.family)));
    }
    let family = a.family;
    let clique = a.clique_start;
    let spec = move |n: usize, seed: u64| {
        let mut spec = family.spec(n, seed);
        if let Topology::BarabasiAlbert { params, .. } = &mut spec.topology {
            if clique {
                *params = BaParams::standard(params.m);
            }
        }
        spec
    };
    let fits =
        experiments::scaling_sweeps_with(family, spec, &a.sizes, &a.quantity, a.instances, cli.seed)?;
    let out = a.out.as_deref();
    if format_for(cli, out) == Format::Csv {
        let mut text = comment_header(cli);
        text.push_str("quantity,n,mean,exponent,intercept,r_squared\n");
        for (q, fit) in a.quantity.iter().zip(&fits) {
            for (n, y) in &fit.points {
                text.push_str(&format!(
                    "{q},{n},{y},{},{},{}\n",
                    fit.exponent, fit.intercept, fit.r_squared
                ));
            }
        }
        return write_output(out, &text);
    }
    let body = json!({
        "meta": meta(cli),
        "family": a.family,
        "clique_start": a.clique_start,
        "fits": a.quantity.iter().zip(&fits).map(|(q, fit)| json!({
            "quantity": q,
            "exponent": fit.exponent,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "points": fit.points,
        })).collect::<Vec<_>>(),
    });
    write_json(out, &body)
}
