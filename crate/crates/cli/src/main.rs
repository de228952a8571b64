use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use s3dc::cells::{get_template, template_by_name, CellKind};
use s3dc::flow::{self, CompileOptions, FlowError};
use s3dc::metrics::evaluate;
use s3dc::netlist::{gen_multiplier, gen_stacked_pair, parse_netlist, Netlist};
use s3dc::router::{congestion_report, dump_routes};
use s3dc::thermal::table1_scenario;
use s3dc::FabricConfig;

#[derive(Parser)]
#[command(name = "s3dc", version, about = "Compile and analyze gate netlists on a vertical-nanowire 3D fabric")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full flow: place, route, check, extract heat, solve thermal, report metrics.
    Compile(FlowArgs),
    /// Place a netlist and write the placement dump.
    Place(FlowArgs),
    /// Place and route a netlist and write the route dump.
    Route(FlowArgs),
    /// Steady-state hot spots for a netlist or a built-in scenario.
    Thermal(ThermalArgs),
    /// Compile and report only the benchmark metrics.
    Metrics(FlowArgs),
    /// Write a generated benchmark netlist.
    GenBench(GenArgs),
    /// Print every cell template as JSON.
    DumpTemplates(OutArgs),
}

#[derive(Args, Clone)]
struct OutArgs {
    /// Directory receiving dumps and the report.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Report path; defaults to report.json in the output directory, else stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct FlowArgs {
    #[arg(long)]
    netlist: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Annealing effort multiplier.
    #[arg(long)]
    effort: Option<f64>,
    /// Skip heat extraction insertion.
    #[arg(long)]
    no_extraction: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ThermalArgs {
    /// Built-in scenario; `table1` stacks two gates of `--gate` on one nanowire.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    netlist: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    effort: Option<f64>,
    #[arg(long)]
    no_extraction: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct GenArgs {
    /// mult<N> for an N-bit array multiplier, or stack-<cell> for a stacked gate pair.
    #[arg(long)]
    kind: String,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: FlowError },
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Io { .. } => "io",
            CliError::Input { source, .. } | CliError::Flow(source) => source.kind(),
            CliError::Usage(_) => "usage",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input { source, .. } | CliError::Flow(source) if !source.is_user_error() => 2,
            _ => 1,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    parse_netlist(&read(path)?).map_err(|e| CliError::Input {
        path: path.to_owned(),
        source: e.into(),
    })
}

fn load_config(path: Option<&Path>) -> Result<FabricConfig, CliError> {
    let Some(path) = path else {
        return Ok(FabricConfig::default());
    };
    let cfg = FabricConfig::parse(&read(path)?).map_err(|e| CliError::Input {
        path: path.to_owned(),
        source: e.into(),
    })?;
    cfg.validate().map_err(|e| CliError::Input {
        path: path.to_owned(),
        source: e.into(),
    })?;
    Ok(cfg)
}

fn options(seed: u64, effort: Option<f64>, no_extraction: bool) -> Result<CompileOptions, CliError> {
    let mut opts = CompileOptions {
        seed,
        extraction: !no_extraction,
        ..CompileOptions::default()
    };
    if let Some(e) = effort {
        if !(e.is_finite() && e > 0.0) {
            return Err(CliError::Usage(format!("--effort must be positive, got {e}")));
        }
        opts.effort = e;
    }
    Ok(opts)
}

/// Writes named dumps into the output directory and the report to its destination.
fn emit(out: &OutArgs, dumps: &[(&str, String)], report: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    if let Some(dir) = &out.out_dir {
        for (name, body) in dumps {
            write(&dir.join(name), body)?;
        }
    }
    match (&out.report, &out.out_dir) {
        (Some(path), _) => write(path, &text),
        (None, Some(dir)) => write(&dir.join("report.json"), &text),
        (None, None) => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn run_compile(a: &FlowArgs) -> Result<(), CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let cfg = load_config(a.config.as_deref())?;
    let out = flow::compile(&netlist, &cfg, &options(a.seed, a.effort, a.no_extraction)?)?;
    let rd = &out.routed;
    let dumps = [
        ("placement.txt", rd.placement.dump()),
        ("routes.txt", rd.dump()),
        ("config.cfg", out.config.to_text()),
    ];
    emit(&a.out, &dumps, &out.report)
}

fn run_place(a: &FlowArgs) -> Result<(), CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let cfg = load_config(a.config.as_deref())?;
    let opts = options(a.seed, a.effort, a.no_extraction)?;
    let (cfg, placement) = flow::place_netlist(&netlist, &cfg, &opts)?;
    let report = json!({
        "benchmark": netlist.name,
        "seed": opts.seed,
        "effort": opts.effort,
        "grid": { "cols_x": cfg.grid_cols_x, "cols_y": cfg.grid_cols_y, "levels": cfg.gate_levels_per_wire },
        "placement": {
            "gates": placement.gate_count(),
            "greedy_hpwl_um": placement.greedy_cost_um,
            "hpwl_um": placement.cost_um,
        },
    });
    emit(&a.out, &[("placement.txt", placement.dump())], &report)
}

fn run_route(a: &FlowArgs) -> Result<(), CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let cfg = load_config(a.config.as_deref())?;
    let opts = options(a.seed, a.effort, a.no_extraction)?;
    let (cfg, rd) = flow::route_netlist(&netlist, &cfg, &opts)?;
    let report = json!({
        "benchmark": netlist.name,
        "seed": opts.seed,
        "grid": { "cols_x": cfg.grid_cols_x, "cols_y": cfg.grid_cols_y, "levels": cfg.gate_levels_per_wire },
        "routing": {
            "nets": rd.routes.len(),
            "iterations": rd.stats.iterations,
            "check": "ok",
            "congestion": congestion_report(&rd),
            "resource_histogram": rd.stats.resource_histogram,
        },
    });
    let dumps = [
        ("placement.txt", rd.placement.dump()),
        ("routes.txt", dump_routes(&rd.graph, &rd.routes)),
    ];
    emit(&a.out, &dumps, &report)
}

fn parse_gate(name: &str) -> Result<CellKind, CliError> {
    template_by_name(&name.to_ascii_uppercase())
        .map(|t| t.kind)
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run_thermal(a: &ThermalArgs) -> Result<(), CliError> {
    let cfg = load_config(a.config.as_deref())?;
    match (&a.scenario, &a.netlist) {
        (Some(s), None) if s == "table1" => {
            let gates = match &a.gate {
                Some(g) => vec![parse_gate(g)?],
                None => vec![CellKind::Inv, CellKind::Nand2, CellKind::Nand3, CellKind::Nand4],
            };
            let mut rows = Vec::new();
            for kind in gates {
                let r = table1_scenario(kind, !a.no_extraction, &cfg).map_err(FlowError::from)?;
                rows.push(r);
            }
            let report = json!({ "scenario": "table1", "ambient_k": cfg.ambient_k, "results": rows });
            emit(&a.out, &[], &report)
        }
        (Some(s), None) => Err(CliError::Usage(format!("unknown scenario `{s}` (expected table1)"))),
        (None, Some(path)) => {
            let netlist = load_netlist(path)?;
            let out = flow::compile(&netlist, &cfg, &options(a.seed, a.effort, a.no_extraction)?)?;
            let report = json!({
                "benchmark": netlist.name,
                "seed": a.seed,
                "thermal": out.report.thermal,
            });
            emit(&a.out, &[], &report)
        }
        _ => Err(CliError::Usage("thermal needs exactly one of --scenario or --netlist".into())),
    }
}

fn run_metrics(a: &FlowArgs) -> Result<(), CliError> {
    let netlist = load_netlist(&a.netlist)?;
    let cfg = load_config(a.config.as_deref())?;
    let out = flow::compile(&netlist, &cfg, &options(a.seed, a.effort, a.no_extraction)?)?;
    let report = evaluate(&netlist.name, &out.routed, &netlist, &out.config).map_err(FlowError::from)?;
    emit(&a.out, &[], &report)
}

fn generate(kind: &str) -> Result<Netlist, CliError> {
    let lower = kind.to_ascii_lowercase();
    if let Some(bits) = lower.strip_prefix("mult") {
        let bits: usize = bits
            .parse()
            .map_err(|_| CliError::Usage(format!("bad multiplier width in `{kind}`")))?;
        if !(2..=64).contains(&bits) {
            return Err(CliError::Usage(format!("multiplier width must be 2..=64, got {bits}")));
        }
        return Ok(gen_multiplier(bits));
    }
    if let Some(gate) = lower.strip_prefix("stack-") {
        let kind = parse_gate(gate)?;
        if kind.is_state_element() {
            return Err(CliError::Usage("stacked pairs need a combinational cell".into()));
        }
        return Ok(gen_stacked_pair(kind));
    }
    Err(CliError::Usage(format!(
        "unknown benchmark kind `{kind}` (expected mult<N> or stack-<cell>)"
    )))
}

fn run_gen(a: &GenArgs) -> Result<(), CliError> {
    let netlist = generate(&a.kind)?;
    let text = netlist.emit();
    // the generator and the parser must agree before anything is written
    let back = parse_netlist(&text).map_err(|e| FlowError::Internal(format!("generated netlist rejected: {e}")))?;
    back.connectivity()
        .map_err(|e| FlowError::Internal(format!("generated netlist rejected: {e}")))?;
    let file = format!("{}.nl", netlist.name);
    match (&a.out.report, &a.out.out_dir) {
        (None, None) => {
            print!("{text}");
            Ok(())
        }
        _ => {
            let report = json!({
                "benchmark": netlist.name,
                "file": file,
                "gates": netlist.gates.len(),
                "inputs": netlist.inputs.len(),
                "outputs": netlist.outputs.len(),
            });
            emit(&a.out, &[(file.as_str(), text)], &report)
        }
    }
}

fn run_templates(a: &OutArgs) -> Result<(), CliError> {
    let templates: Vec<_> = CellKind::ALL.iter().map(|&k| get_template(k)).collect();
    emit(a, &[], &templates)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile(a) => run_compile(a),
        Command::Place(a) => run_place(a),
        Command::Route(a) => run_route(a),
        Command::Thermal(a) => run_thermal(a),
        Command::Metrics(a) => run_metrics(a),
        Command::GenBench(a) => run_gen(a),
        Command::DumpTemplates(a) => run_templates(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{record}");
            ExitCode::from(e.exit_code())
        }
    }
}
