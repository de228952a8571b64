//! End-to-end compile flow and the consolidated JSON report.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, FabricConfig};
use crate::fabric::{build_grid, NanowireGrid, ResourceGraph};
use crate::metrics::{evaluate, MetricsReport};
use crate::netlist::{Netlist, NetlistError};
use crate::placer::{place, PlaceOptions, Placement, PlacerError};
use crate::router::{
    check_routes, congestion_report, route, CongestionReport, RouteError, RouteOptions, RouteViolation,
    RoutedDesign,
};
use crate::sim::{equivalence_check, Equivalence, SimError};
use crate::thermal::{
    build_thermal_network, hdpp_lattice, insert_heat_extraction, reduction_pct, solve_steady_state,
    worst_case_power, ExtractionPolicy, ThermalError,
};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Place(#[from] PlacerError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    /// A check that should hold by construction failed.
    #[error("internal check failed: {0}")]
    Internal(String),
}

impl FlowError {
    /// True for failures caused by bad input rather than by a bug.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, FlowError::Internal(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            FlowError::Config(_) => "config",
            FlowError::Netlist(_) => "netlist",
            FlowError::Place(_) => "placement",
            FlowError::Route(_) => "routing",
            FlowError::Sim(_) => "simulation",
            FlowError::Thermal(_) => "thermal",
            FlowError::Internal(_) => "internal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompileOptions {
    pub seed: u64,
    pub effort: f64,
    pub max_route_iters: usize,
    pub extraction: bool,
    /// Largest vector count compared exhaustively.
    pub exhaustive_limit: u64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            effort: PlaceOptions::default().effort,
            max_route_iters: RouteOptions::default().max_iters,
            extraction: true,
            exhaustive_limit: 1 << 20,
        }
    }
}

/// Square grid just large enough for `gates` cells at the configured
/// utilization, after removing heat pillar columns.
pub fn size_grid(cfg: &FabricConfig, gates: usize) -> FabricConfig {
    let per_col = cfg.gate_levels_per_wire.max(1) as f64 * cfg.placement_utilization;
    let mut side = 1usize;
    loop {
        let pillars = hdpp_lattice(side, side, cfg.hdpp_spacing).len();
        let cols = (side * side).saturating_sub(pillars);
        let has_pillar = pillars > 0 || cfg.hdpp_spacing == 0;
        if cols as f64 * per_col >= gates as f64 && cols > 0 && has_pillar {
            break;
        }
        side += 1;
    }
    FabricConfig {
        grid_cols_x: side,
        grid_cols_y: side,
        ..cfg.clone()
    }
}

/// Grid with heat pillar columns reserved on the lattice.
pub fn prepare_grid(cfg: &FabricConfig) -> Result<NanowireGrid, ConfigError> {
    let mut grid = build_grid(cfg.clone())?;
    for (x, y) in hdpp_lattice(cfg.grid_cols_x, cfg.grid_cols_y, cfg.hdpp_spacing) {
        grid.reserve_column(x, y);
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub cols_x: usize,
    pub cols_y: usize,
    pub levels: usize,
    pub segments_per_gate_level: usize,
    pub coax_shells: usize,
    pub hdpp_columns: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacementSummary {
    pub gates: usize,
    pub greedy_hpwl_um: f64,
    pub hpwl_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingSummary {
    pub nets: usize,
    pub iterations: usize,
    pub check: String,
    pub congestion: CongestionReport,
    pub resource_histogram: std::collections::BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalCase {
    pub hot_spot_k: f64,
    pub hot_spot_node: String,
    pub node_count: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalSummary {
    pub total_power_w: f64,
    pub no_extraction: ThermalCase,
    pub extraction: Option<ThermalCase>,
    pub heat_junctions: usize,
    pub reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompileReport {
    pub benchmark: String,
    pub seed: u64,
    pub effort: f64,
    pub grid: GridSummary,
    pub placement: PlacementSummary,
    pub routing: RoutingSummary,
    pub equivalence: Equivalence,
    pub thermal: ThermalSummary,
    pub metrics: MetricsReport,
}

impl CompileReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report is serializable");
        s.push('\n');
        s
    }
}

/// Everything the compile flow produced.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub config: FabricConfig,
    pub routed: RoutedDesign,
    pub report: CompileReport,
}

pub fn place_netlist(
    netlist: &Netlist,
    cfg: &FabricConfig,
    opts: &CompileOptions,
) -> Result<(FabricConfig, Placement), FlowError> {
    cfg.validate()?;
    netlist.connectivity()?;
    let cfg = size_grid(cfg, netlist.gates.len());
    let placement = place_on(netlist, &cfg, opts)?;
    Ok((cfg, placement))
}

fn place_on(netlist: &Netlist, cfg: &FabricConfig, opts: &CompileOptions) -> Result<Placement, FlowError> {
    let grid = prepare_grid(cfg)?;
    Ok(place(
        netlist,
        &grid,
        &PlaceOptions {
            seed: opts.seed,
            effort: opts.effort,
        },
    )?)
}

/// How many times the grid side is widened after a congestion failure.
pub const GRID_RETRIES: usize = 2;

/// Places and routes, widening the auto-sized grid by one column per side
/// when the router gives up on congestion.
pub fn route_netlist(
    netlist: &Netlist,
    cfg: &FabricConfig,
    opts: &CompileOptions,
) -> Result<(FabricConfig, RoutedDesign), FlowError> {
    let (mut cfg, mut placement) = place_netlist(netlist, cfg, opts)?;
    let mut attempt = 0;
    loop {
        let graph = Arc::new(ResourceGraph::build(&cfg));
        let result = route(
            &placement,
            netlist,
            graph,
            &RouteOptions {
                seed: opts.seed,
                max_iters: opts.max_route_iters,
            },
        );
        match result {
            Ok(rd) => {
                if let Err(v) = check_routes(&rd) {
                    return Err(FlowError::Internal(describe(&v)));
                }
                return Ok((cfg, rd));
            }
            Err(RouteError::Unroutable { .. }) if attempt < GRID_RETRIES => {
                attempt += 1;
                cfg.grid_cols_x += 1;
                cfg.grid_cols_y += 1;
                placement = place_on(netlist, &cfg, opts)?;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

fn describe(v: &[RouteViolation]) -> String {
    let first: Vec<String> = v.iter().take(5).map(|v| format!("{}: {}", v.kind, v.detail)).collect();
    format!("{} route violations ({})", v.len(), first.join("; "))
}

fn thermal_case(rd: &RoutedDesign, cfg: &FabricConfig) -> Result<(ThermalCase, f64), FlowError> {
    let power = worst_case_power(&rd.placement, cfg);
    let net = build_thermal_network(rd, &power, cfg)?;
    let sol = solve_steady_state(&net)?;
    Ok((
        ThermalCase {
            hot_spot_k: sol.hot_spot.1,
            hot_spot_node: sol.hot_spot.0,
            node_count: net.node_count(),
            residual: sol.residual,
        },
        net.sources.iter().sum(),
    ))
}

/// Parse-to-report flow on a netlist.
pub fn compile(netlist: &Netlist, cfg: &FabricConfig, opts: &CompileOptions) -> Result<Compiled, FlowError> {
    let (cfg, rd) = route_netlist(netlist, cfg, opts)?;
    let equivalence = if netlist.gates.iter().any(|g| g.kind.is_state_element()) {
        // state elements have no combinational reference; extraction alone is checked
        crate::sim::extract(netlist, &rd)?;
        Equivalence::Equivalent {
            vectors: 0,
            exhaustive: false,
        }
    } else {
        equivalence_check(netlist, &rd, opts.exhaustive_limit)?
    };
    if let Equivalence::Mismatch { vector } = &equivalence {
        return Err(FlowError::Internal(format!("routed design differs from netlist at {vector:?}")));
    }

    let (no_extraction, total_power_w) = thermal_case(&rd, &cfg)?;
    let (final_rd, extraction) = if opts.extraction {
        let with = insert_heat_extraction(&rd, &ExtractionPolicy::from_config(&cfg))?;
        let (case, _) = thermal_case(&with, &cfg)?;
        (with, Some(case))
    } else {
        (rd, None)
    };
    let reduction = extraction
        .as_ref()
        .map(|e| reduction_pct(no_extraction.hot_spot_k, e.hot_spot_k, cfg.ambient_k));
    let metrics = evaluate(&netlist.name, &final_rd, netlist, &cfg)?;
    let congestion = congestion_report(&final_rd);
    let report = CompileReport {
        benchmark: netlist.name.clone(),
        seed: opts.seed,
        effort: opts.effort,
        grid: GridSummary {
            cols_x: cfg.grid_cols_x,
            cols_y: cfg.grid_cols_y,
            levels: cfg.gate_levels_per_wire,
            segments_per_gate_level: cfg.segments_per_gate_level,
            coax_shells: cfg.coax_shells,
            hdpp_columns: final_rd.placement.grid.reserved_columns().len(),
        },
        placement: PlacementSummary {
            gates: netlist.gates.len(),
            greedy_hpwl_um: final_rd.placement.greedy_cost_um,
            hpwl_um: final_rd.placement.cost_um,
        },
        routing: RoutingSummary {
            nets: final_rd.routes.len(),
            iterations: final_rd.stats.iterations,
            check: "ok".into(),
            congestion,
            resource_histogram: final_rd.stats.resource_histogram.clone(),
        },
        equivalence,
        thermal: ThermalSummary {
            total_power_w,
            heat_junctions: final_rd.heat.junctions.len(),
            no_extraction,
            extraction,
            reduction_pct: reduction,
        },
        metrics,
    };
    Ok(Compiled {
        config: cfg,
        routed: final_rd,
        report,
    })
}
