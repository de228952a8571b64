//! Heat extraction structures and the steady-state thermal resistance network.
//!
//! Every segment of a cell-hosting nanowire is a network node. The bottom
//! segment sinks heat into the substrate through the nanowire base. Heat
//! Extraction Junctions tap a gate's mid-stack segment and lead through
//! bridges to Heat Dissipating Power Pillars, which sink to ambient.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::cells::{get_template, CellKind, Network, SiteRole};
use crate::config::FabricConfig;
use crate::fabric::{build_grid, GridCoord, ResourceGraph, ResourceId};
use crate::metrics::device_model;
use crate::netlist::gen_stacked_pair;
use crate::placer::{placement_from_slots, Placement, PlacerError, Slot};
use crate::router::{route, Access, RouteError, RouteOptions, RoutedDesign};
use crate::sparse::SymmetricBuilder;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermalError {
    #[error("no free bridge path from gate {gate} to a heat pillar")]
    NoExtractionPath { gate: String },
    #[error("node {0} has no thermal path to a boundary")]
    DisconnectedNode(String),
    #[error("singular thermal system")]
    SingularSystem,
    #[error("invalid conductance {value} between {a} and {b}")]
    InvalidConductance { a: String, b: String, value: f64 },
    #[error("no power given for transistor site {0:?}")]
    MissingPower(GridCoord),
    #[error("heat source at non-site node {0}")]
    SourceOffSite(String),
    #[error("scenario needs INV or NAND2-4, got {0}")]
    UnsupportedScenario(CellKind),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    Place(#[from] PlacerError),
    #[error(transparent)]
    Route(#[from] RouteError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractionPolicy {
    pub hejs_per_gate: usize,
    pub hdpp_spacing: usize,
}

impl ExtractionPolicy {
    pub fn from_config(cfg: &FabricConfig) -> Self {
        Self {
            hejs_per_gate: 1,
            hdpp_spacing: cfg.hdpp_spacing,
        }
    }

    pub fn none() -> Self {
        Self {
            hejs_per_gate: 0,
            hdpp_spacing: 0,
        }
    }
}

/// One junction and the bridge path that carries its heat to a pillar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatJunction {
    pub gate: usize,
    pub site: GridCoord,
    pub bridges: Vec<ResourceId>,
    /// Columns visited from the gate column to the pillar column.
    pub columns: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HeatExtraction {
    pub hdpp_columns: Vec<(usize, usize)>,
    pub junctions: Vec<HeatJunction>,
}

/// Columns on the pillar lattice: both coordinates congruent to `s/2` mod `s`.
pub fn hdpp_lattice(cols_x: usize, cols_y: usize, spacing: usize) -> Vec<(usize, usize)> {
    if spacing == 0 {
        return Vec::new();
    }
    let off = spacing / 2;
    let mut out = Vec::new();
    for y in (off..cols_y).step_by(spacing) {
        for x in (off..cols_x).step_by(spacing) {
            out.push((x, y));
        }
    }
    out
}

/// Adds junctions and heat bridges to a routed design. Pillars are the grid's
/// reserved columns, or free lattice columns when none were reserved.
pub fn insert_heat_extraction(
    rd: &RoutedDesign,
    policy: &ExtractionPolicy,
) -> Result<RoutedDesign, ThermalError> {
    let mut out = rd.clone();
    out.heat = HeatExtraction::default();
    if policy.hejs_per_gate == 0 {
        return Ok(out);
    }
    let grid = &rd.placement.grid;
    let graph: &ResourceGraph = &rd.graph;
    let (xs, ys, _, segs, _) = graph.dims();

    let mut used_cols: HashSet<(usize, usize)> = rd.placement.cells.iter().map(|c| c.column).collect();
    let mut used = vec![false; graph.node_count()];
    for r in &rd.routes {
        for &v in &r.nodes {
            used[v as usize] = true;
            let ([a, b], n) = graph.resource(v).columns();
            used_cols.insert(a);
            if n == 2 {
                used_cols.insert(b);
            }
        }
    }
    let mut hdpp = grid.reserved_columns();
    if hdpp.is_empty() {
        hdpp = hdpp_lattice(xs, ys, policy.hdpp_spacing)
            .into_iter()
            .filter(|c| !used_cols.contains(c))
            .collect();
    }
    let is_hdpp: HashSet<(usize, usize)> = hdpp.iter().copied().collect();
    out.heat.hdpp_columns = hdpp;

    let b = segs / 2;
    for (g, cell) in rd.placement.cells.iter().enumerate() {
        for k in 0..policy.hejs_per_gate {
            // b, b-1, b+1, b-2, ... within the level
            let off = (k as i64 + 1) / 2 * if k % 2 == 1 { -1 } else { 1 };
            let seg = (b as i64 + off).clamp(0, segs as i64 - 1) as usize;
            let site = GridCoord::new(cell.column.0, cell.column.1, cell.level, seg);
            let found = heat_path(graph, &rd.problem.access, &used, &is_hdpp, cell.column, cell.level, seg);
            let Some((columns, bridges)) = found else {
                return Err(ThermalError::NoExtractionPath {
                    gate: format!("{} ({})", g, cell.kind),
                });
            };
            for &br in &bridges {
                used[br as usize] = true;
            }
            out.heat.junctions.push(HeatJunction {
                gate: g,
                site,
                bridges,
                columns,
            });
        }
    }
    Ok(out)
}

/// Breadth-first search over columns for the fewest-hop chain of free
/// bridges at one level, preferring bridges near `seg`.
fn heat_path(
    graph: &ResourceGraph,
    access: &[Access],
    used: &[bool],
    is_hdpp: &HashSet<(usize, usize)>,
    start: (usize, usize),
    level: usize,
    seg: usize,
) -> Option<(Vec<(usize, usize)>, Vec<ResourceId>)> {
    let (xs, ys, _, segs, _) = graph.dims();
    let mut seg_order: Vec<usize> = (0..segs).collect();
    seg_order.sort_by_key(|&s| (s.abs_diff(seg), s));
    let free_bridge = |a: (usize, usize), c: (usize, usize)| {
        let ends_at_pillar = is_hdpp.contains(&a) || is_hdpp.contains(&c);
        seg_order.iter().find_map(|&s| {
            let id = graph.bridge_id(a, c, level, s)?;
            let ok = !used[id as usize] && (access[id as usize] != Access::Blocked || ends_at_pillar);
            ok.then_some(id)
        })
    };
    let mut prev: HashMap<(usize, usize), ((usize, usize), ResourceId)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = HashSet::from([start]);
    while let Some(c) = queue.pop_front() {
        if is_hdpp.contains(&c) {
            let mut columns = vec![c];
            let mut bridges = Vec::new();
            let mut cur = c;
            while let Some(&(p, br)) = prev.get(&cur) {
                columns.push(p);
                bridges.push(br);
                cur = p;
            }
            columns.reverse();
            bridges.reverse();
            return Some((columns, bridges));
        }
        let around = [
            (c.0.wrapping_sub(1), c.1),
            (c.0 + 1, c.1),
            (c.0, c.1.wrapping_sub(1)),
            (c.0, c.1 + 1),
        ];
        for n in around {
            if n.0 >= xs || n.1 >= ys || seen.contains(&n) {
                continue;
            }
            if let Some(br) = free_bridge(c, n) {
                seen.insert(n);
                prev.insert(n, (c, br));
                queue.push_back(n);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Site,
    Segment,
    Junction,
    BridgeJoint,
    Pillar,
    Ambient,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThermalNetwork {
    pub labels: Vec<String>,
    pub kinds: Vec<NodeKind>,
    /// Conductances in W/K between node pairs.
    pub conductances: Vec<(usize, usize, f64)>,
    /// Injected power in W.
    pub sources: Vec<f64>,
    /// Fixed temperatures in K.
    pub boundary: Vec<Option<f64>>,
}

impl ThermalNetwork {
    pub fn add_node(&mut self, kind: NodeKind, label: impl Into<String>) -> usize {
        self.labels.push(label.into());
        self.kinds.push(kind);
        self.sources.push(0.0);
        self.boundary.push(None);
        self.labels.len() - 1
    }

    pub fn connect(&mut self, a: usize, b: usize, g: f64) {
        self.conductances.push((a, b, g));
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn add_source(&mut self, node: usize, watts: f64) {
        self.sources[node] += watts;
    }

    pub fn set_boundary(&mut self, node: usize, kelvin: f64) {
        self.boundary[node] = Some(kelvin);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermalSolution {
    pub temperature: Vec<f64>,
    pub hot_spot: (String, f64),
    /// Relative residual of the solved system.
    pub residual: f64,
}

/// Per-site power in W, keyed by absolute site coordinate.
pub type PowerMap = HashMap<GridCoord, f64>;

/// Worst-case static power of every transistor site with all devices on.
///
/// Each gate is modeled as its pull-up and pull-down networks conducting at
/// once, so the gate draws `vdd / (R_up + R_down)`. A series device carries
/// the full current and a device in an n-wide parallel group carries 1/n.
pub fn worst_case_power(placement: &Placement, cfg: &FabricConfig) -> PowerMap {
    let dm = device_model(cfg);
    let mut map = PowerMap::new();
    for cell in &placement.cells {
        let t = get_template(cell.kind);
        let count = |role| t.sites.iter().filter(|s| s.role == role).count().max(1);
        let (n_up, n_down) = (count(SiteRole::PullUp), count(SiteRole::PullDown));
        let net_r = |net: Network, n: usize, r: f64| match net {
            Network::Series => n as f64 * r,
            Network::Parallel => r / n as f64,
            // two back-to-back inverters, one device of each type per path
            Network::CrossCoupled => r,
        };
        let r_up = net_r(t.pull_up, n_up, dm.r_on_p);
        let r_down = net_r(t.pull_down, n_down, dm.r_on_n);
        let i = cfg.vdd_v / (r_up + r_down);
        for (site, coord) in t.sites.iter().zip(&cell.sites) {
            let (net, n, r) = match site.role {
                SiteRole::PullUp => (t.pull_up, n_up, dm.r_on_p),
                SiteRole::PullDown => (t.pull_down, n_down, dm.r_on_n),
                SiteRole::Access => (Network::Series, 1, dm.r_on_n.max(dm.r_on_p)),
            };
            let share = if net == Network::Parallel { i / n as f64 } else { i };
            map.insert(*coord, share * share * r);
        }
    }
    map
}

/// Builds the thermal network of a routed design with its heat extraction.
pub fn build_thermal_network(
    rd: &RoutedDesign,
    power: &PowerMap,
    cfg: &FabricConfig,
) -> Result<ThermalNetwork, ThermalError> {
    let grid = &rd.placement.grid;
    let (levels, segs) = (grid.levels(), grid.segs_per_level());
    let area = PI * (cfg.nanowire_diameter_nm * 1e-9).powi(2) / 4.0;
    let g_seg = cfg.k_nanowire_w_mk * area / (cfg.segment_pitch_nm * 1e-9);
    let g_base = cfg.k_nanowire_w_mk * area / (cfg.nanowire_base_nm * 1e-9);
    let g_bridge = cfg.k_bridge_w_mk * (cfg.nanowire_diameter_nm * 1e-9) * (cfg.segment_pitch_nm * 1e-9)
        / (cfg.pitch_nm * 1e-9);

    let mut net = ThermalNetwork::default();
    let ambient = net.add_node(NodeKind::Ambient, "ambient");
    net.set_boundary(ambient, cfg.ambient_k);

    let mut columns: Vec<(usize, usize)> = rd.placement.cells.iter().map(|c| c.column).collect();
    columns.sort_by_key(|&(x, y)| (y, x));
    columns.dedup();
    let mut seg_node: HashMap<GridCoord, usize> = HashMap::new();
    for &(x, y) in &columns {
        let mut below = None;
        for l in 0..levels {
            for s in 0..segs {
                let c = GridCoord::new(x, y, l, s);
                let kind = if grid.occupant(&c).is_some() { NodeKind::Site } else { NodeKind::Segment };
                let id = net.add_node(kind, format!("seg({x},{y},{l},{s})"));
                seg_node.insert(c, id);
                match below {
                    None => net.connect(id, ambient, g_base),
                    Some(b) => net.connect(b, id, g_seg),
                }
                below = Some(id);
            }
        }
    }
    for cell in &rd.placement.cells {
        for c in &cell.sites {
            let p = *power.get(c).ok_or(ThermalError::MissingPower(*c))?;
            net.add_source(seg_node[c], p);
        }
    }
    let mut pillar: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(x, y) in &rd.heat.hdpp_columns {
        let id = net.add_node(NodeKind::Pillar, format!("hdpp({x},{y})"));
        net.connect(id, ambient, 1.0 / cfg.r_hdpp_k_per_w);
        pillar.insert((x, y), id);
    }
    for (j, hej) in rd.heat.junctions.iter().enumerate() {
        let h = net.add_node(NodeKind::Junction, format!("hej({j})"));
        let at = *seg_node.get(&hej.site).ok_or_else(|| ThermalError::DisconnectedNode(format!("hej({j})")))?;
        net.connect(at, h, 1.0 / cfg.r_hej_k_per_w);
        let mut prev = h;
        for (i, &(x, y)) in hej.columns.iter().enumerate().skip(1) {
            let next = if i + 1 == hej.columns.len() {
                *pillar.get(&(x, y)).ok_or_else(|| ThermalError::DisconnectedNode(format!("hej({j})")))?
            } else {
                net.add_node(NodeKind::BridgeJoint, format!("heb({j},{x},{y})"))
            };
            net.connect(prev, next, g_bridge);
            prev = next;
        }
    }
    Ok(net)
}

/// Solves `G T = P` with fixed boundary temperatures.
pub fn solve_steady_state(net: &ThermalNetwork) -> Result<ThermalSolution, ThermalError> {
    let n = net.node_count();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(a, b, g) in &net.conductances {
        if !(g > 0.0 && g.is_finite()) || a == b || a >= n || b >= n {
            return Err(ThermalError::InvalidConductance {
                a: net.labels.get(a).cloned().unwrap_or_default(),
                b: net.labels.get(b).cloned().unwrap_or_default(),
                value: g,
            });
        }
        adj[a].push((b, g));
        adj[b].push((a, g));
    }
    for (i, p) in net.sources.iter().enumerate() {
        if *p != 0.0 && !matches!(net.kinds.get(i), Some(NodeKind::Site)) {
            return Err(ThermalError::SourceOffSite(net.labels[i].clone()));
        }
    }
    if net.boundary.iter().all(Option::is_none) {
        return Err(ThermalError::SingularSystem);
    }
    // every free node must reach a boundary
    let mut reach = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| net.boundary[i].is_some()).collect();
    for &i in &queue {
        reach[i] = true;
    }
    while let Some(v) = queue.pop_front() {
        for &(u, _) in &adj[v] {
            if !reach[u] {
                reach[u] = true;
                queue.push_back(u);
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| !reach[i]) {
        return Err(ThermalError::DisconnectedNode(net.labels[i].clone()));
    }

    let mut index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| net.boundary[i].is_none()).collect();
    for (k, &i) in free.iter().enumerate() {
        index[i] = k;
    }
    let mut a = SymmetricBuilder::new(free.len());
    let mut rhs: Vec<f64> = free.iter().map(|&i| net.sources[i]).collect();
    for &(p, q, g) in &net.conductances {
        for (u, v) in [(p, q), (q, p)] {
            if index[u] == usize::MAX {
                continue;
            }
            a.add_diag(index[u], g);
            match net.boundary[v] {
                Some(t) => rhs[index[u]] += g * t,
                None if u < v => a.add_off(index[u], index[v], -g),
                None => {}
            }
        }
    }
    let factor = a.factor().map_err(|_| ThermalError::SingularSystem)?;
    let mut x = factor.solve(&rhs);
    let norm = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>().sqrt();
    let scale = norm(&rhs).max(f64::MIN_POSITIVE);
    let mut residual = 0.0;
    for _ in 0..3 {
        let ax = a.mul(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        residual = norm(&r) / scale;
        if residual <= 1e-12 {
            break;
        }
        let dx = factor.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
    }
    let mut temperature = vec![0.0; n];
    for i in 0..n {
        temperature[i] = match net.boundary[i] {
            Some(t) => t,
            None => x[index[i]],
        };
    }
    let (hot, t) = temperature
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &t)| if t > acc.1 { (i, t) } else { acc });
    Ok(ThermalSolution {
        hot_spot: (net.labels[hot].clone(), t),
        temperature,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioResult {
    pub gate: CellKind,
    pub extraction: bool,
    pub hot_spot_k: f64,
    pub hot_spot_node: String,
    pub node_count: usize,
    pub residual: f64,
    pub total_power_w: f64,
}

/// Two gates of one kind stacked on a single nanowire, with a heat pillar in
/// the neighboring column.
pub fn table1_scenario(
    kind: CellKind,
    extraction: bool,
    config: &FabricConfig,
) -> Result<ScenarioResult, ThermalError> {
    if !matches!(kind, CellKind::Inv | CellKind::Nand2 | CellKind::Nand3 | CellKind::Nand4) {
        return Err(ThermalError::UnsupportedScenario(kind));
    }
    let cfg = FabricConfig {
        grid_cols_x: 2,
        grid_cols_y: 2,
        gate_levels_per_wire: config.gate_levels_per_wire.max(2),
        ..config.clone()
    };
    let mut grid = build_grid(cfg.clone())?;
    grid.reserve_column(1, 0);
    let netlist = gen_stacked_pair(kind);
    let slots = (0..2).map(|level| Slot { col_x: 0, col_y: 0, level }).collect();
    let placement = placement_from_slots(&netlist, &grid, slots, 1)?;
    let graph = std::sync::Arc::new(ResourceGraph::build(&cfg));
    let rd = route(&placement, &netlist, graph, &RouteOptions::default())?;
    let policy = if extraction {
        ExtractionPolicy::from_config(&cfg)
    } else {
        ExtractionPolicy::none()
    };
    let rd = insert_heat_extraction(&rd, &policy)?;
    let power = worst_case_power(&rd.placement, &cfg);
    let net = build_thermal_network(&rd, &power, &cfg)?;
    let sol = solve_steady_state(&net)?;
    Ok(ScenarioResult {
        gate: kind,
        extraction,
        hot_spot_k: sol.hot_spot.1,
        hot_spot_node: sol.hot_spot.0,
        node_count: net.node_count(),
        residual: sol.residual,
        total_power_w: net.sources.iter().sum(),
    })
}

/// Rise above ambient removed by extraction, in percent.
pub fn reduction_pct(without_k: f64, with_k: f64, ambient_k: f64) -> f64 {
    let rise = without_k - ambient_k;
    if rise <= 0.0 {
        return 0.0;
    }
    100.0 * (without_k - with_k) / rise
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_resistor(p: f64, r: f64) -> ThermalNetwork {
        let mut n = ThermalNetwork::default();
        let s = n.add_node(NodeKind::Site, "s");
        let a = n.add_node(NodeKind::Ambient, "a");
        n.set_boundary(a, 300.0);
        n.connect(s, a, 1.0 / r);
        n.add_source(s, p);
        n
    }

    #[test]
    fn series_resistor() {
        let n = one_resistor(1e-3, 1e5);
        assert_eq!(n.node_count(), 2);
        assert_eq!(n.conductances, vec![(0, 1, 1e-5)]);
        let t = solve_steady_state(&n).unwrap();
        assert!((t.temperature[0] - 400.0).abs() / 400.0 < 1e-12);
        assert_eq!(t.hot_spot.0, "s");
    }

    #[test]
    fn parallel_resistors_halve_the_rise() {
        let mut n = one_resistor(1e-3, 1e5);
        n.connect(0, 1, 1e-5);
        let t = solve_steady_state(&n).unwrap();
        assert!((t.temperature[0] - 350.0).abs() / 350.0 < 1e-12);
    }

    #[test]
    fn zero_power_is_ambient() {
        let n = one_resistor(0.0, 1e5);
        let t = solve_steady_state(&n).unwrap();
        assert_eq!(t.temperature, vec![300.0, 300.0]);
    }

    #[test]
    fn isolated_junction_is_disconnected() {
        let mut n = ThermalNetwork::default();
        let s = n.add_node(NodeKind::Site, "site");
        let h = n.add_node(NodeKind::Junction, "hej");
        let a = n.add_node(NodeKind::Ambient, "a");
        n.set_boundary(a, 300.0);
        n.connect(s, h, 1e-6);
        n.add_source(s, 1e-6);
        assert_eq!(solve_steady_state(&n), Err(ThermalError::DisconnectedNode("site".into())));
        n.connect(h, a, 1e-6);
        assert!(solve_steady_state(&n).is_ok());
    }

    #[test]
    fn no_boundary_is_singular() {
        let mut n = ThermalNetwork::default();
        let a = n.add_node(NodeKind::Site, "a");
        let b = n.add_node(NodeKind::Segment, "b");
        n.connect(a, b, 1.0);
        assert_eq!(solve_steady_state(&n), Err(ThermalError::SingularSystem));
    }

    #[test]
    fn lattice_points() {
        assert_eq!(hdpp_lattice(6, 4, 3), vec![(1, 1), (4, 1)]);
        assert!(hdpp_lattice(6, 4, 0).is_empty());
    }

    #[test]
    fn stacked_inverters_form_a_chain() {
        let cfg = FabricConfig::default();
        let mut grid = build_grid(FabricConfig { grid_cols_x: 2, grid_cols_y: 2, ..cfg.clone() }).unwrap();
        grid.reserve_column(1, 0);
        let nl = gen_stacked_pair(CellKind::Inv);
        let slots = (0..2).map(|level| Slot { col_x: 0, col_y: 0, level }).collect();
        let p = placement_from_slots(&nl, &grid, slots, 1).unwrap();
        let g = std::sync::Arc::new(ResourceGraph::build(grid.config()));
        let rd = route(&p, &nl, g, &RouteOptions::default()).unwrap();
        let net = build_thermal_network(&rd, &worst_case_power(&p, &cfg), &cfg).unwrap();
        let chain = cfg.gate_levels_per_wire * cfg.segments_per_gate_level;
        assert_eq!(net.node_count(), chain + 1);
        assert_eq!(net.conductances.len(), chain);
        assert_eq!(net.sources.iter().filter(|&&p| p > 0.0).count(), 4);

        let with = insert_heat_extraction(&rd, &ExtractionPolicy::from_config(&cfg)).unwrap();
        assert_eq!(with.heat.junctions.len(), 2);
        assert!(with.heat.junctions.iter().all(|j| j.bridges.len() == 1));
    }

    #[test]
    fn inverter_power_is_the_crowbar_current() {
        let cfg = FabricConfig::default();
        let grid = build_grid(FabricConfig { grid_cols_x: 1, grid_cols_y: 1, ..cfg.clone() }).unwrap();
        let nl = crate::netlist::parse_netlist(".model m\n.inputs a\n.outputs y\n.gate INV A=a Y=y\n.end").unwrap();
        let p = placement_from_slots(&nl, &grid, vec![Slot { col_x: 0, col_y: 0, level: 0 }], 1).unwrap();
        let total: f64 = worst_case_power(&p, &cfg).values().sum();
        let dm = device_model(&cfg);
        let expected = cfg.vdd_v * cfg.vdd_v / (dm.r_on_n + dm.r_on_p);
        assert!((total - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn table1_reference_points() {
        let cfg = FabricConfig::default();
        let mut prev = f64::INFINITY;
        for k in [CellKind::Inv, CellKind::Nand2, CellKind::Nand3, CellKind::Nand4] {
            let off = table1_scenario(k, false, &cfg).unwrap();
            let on = table1_scenario(k, true, &cfg).unwrap();
            eprintln!("{k}: {:.1} K -> {:.1} K", off.hot_spot_k, on.hot_spot_k);
            assert!(off.hot_spot_k < prev);
            prev = off.hot_spot_k;
            assert!(on.hot_spot_k <= 400.0);
            assert!(reduction_pct(off.hot_spot_k, on.hot_spot_k, cfg.ambient_k) >= 80.0);
        }
    }
}
