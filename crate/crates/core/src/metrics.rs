//! Device model, RC extraction, Elmore timing, power, density and baseline
//! ratios.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::Serialize;

use crate::cells::{get_template, CellKind, Logic, Network, PinDirection};
use crate::config::{BaselineEntry, FabricConfig};
use crate::fabric::{ResourceGraph, ResourceId};
use crate::netlist::{Netlist, NetlistError};
use crate::router::{congestion_report, RoutedDesign};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceModel {
    pub r_on_n: f64,
    pub r_on_p: f64,
    pub i_off_n: f64,
    pub i_off_p: f64,
    /// Gate capacitance of one transistor, farads.
    pub c_gate: f64,
}

pub fn device_model(cfg: &FabricConfig) -> DeviceModel {
    let ion_n = cfg.ion_n_ua * 1e-6;
    let ion_p = cfg.ion_p_ua * 1e-6;
    DeviceModel {
        r_on_n: cfg.vdd_v / ion_n,
        r_on_p: cfg.vdd_v / ion_p,
        i_off_n: ion_n / cfg.on_off_ratio,
        i_off_p: ion_p / cfg.on_off_ratio,
        c_gate: cfg.gate_cap_ff * 1e-15,
    }
}

/// Worst-case resistance from the output to either rail.
pub fn drive_resistance(kind: CellKind, dm: &DeviceModel) -> f64 {
    match get_template(kind).logic {
        Logic::Nand(n) => dm.r_on_p.max(n as f64 * dm.r_on_n),
        Logic::Nor(n) => (n as f64 * dm.r_on_p).max(dm.r_on_n),
        // the read path runs through the p-type access device and an inverter
        Logic::StateElement => dm.r_on_p + dm.r_on_n,
    }
}

/// Mean off-state leakage current of a gate over its two output states.
pub fn leakage_current(kind: CellKind, dm: &DeviceModel) -> f64 {
    let t = get_template(kind);
    let off = |net: Network, n: usize, i: f64| match net {
        Network::Parallel => n as f64 * i,
        _ => i,
    };
    match t.logic {
        Logic::Nand(n) | Logic::Nor(n) => {
            let n = n as usize;
            0.5 * (off(t.pull_up, n, dm.i_off_p) + off(t.pull_down, n, dm.i_off_n))
        }
        // two cross-coupled inverters
        Logic::StateElement => dm.i_off_n + dm.i_off_p,
    }
}

/// Wire resistance (ohm) and capacitance (F) of one resource.
pub fn resource_rc(graph: &ResourceGraph, id: ResourceId, cfg: &FabricConfig) -> (f64, f64) {
    let len = graph.length_um(id);
    (cfg.wire_r_ohm_per_um * len, cfg.wire_c_ff_per_um * len * 1e-15)
}

/// RC tree: node 0 is the root, driven through the driver resistance.
/// `r[i]` is the resistance between node i and its parent (for the root,
/// between the driver and the root).
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RcTree {
    pub parent: Vec<Option<usize>>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
}

impl RcTree {
    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn total_c(&self) -> f64 {
        self.c.iter().sum()
    }

    pub fn total_r(&self) -> f64 {
        self.r.iter().sum()
    }
}

/// Delay from the driver to every node: `driver_r * C_total` plus, for each
/// node on the path, its resistance times the capacitance downstream of it.
/// Parents must precede children.
pub fn elmore_delay(tree: &RcTree, driver_r: f64) -> Vec<f64> {
    let n = tree.len();
    let mut sub = tree.c.clone();
    for i in (0..n).rev() {
        if let Some(p) = tree.parent[i] {
            sub[p] += sub[i];
        }
    }
    let total = tree.total_c();
    let mut d = vec![0.0; n];
    for i in 0..n {
        let up = match tree.parent[i] {
            Some(p) => d[p],
            None => driver_r * total,
        };
        d[i] = up + tree.r[i] * sub[i];
    }
    d
}

/// RC view of one routed net.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetRc {
    pub tree: RcTree,
    pub driver: Option<usize>,
    /// `(gate, pin)` and the tree nodes of the pin's terminals.
    pub sinks: Vec<(usize, String, Vec<usize>)>,
}

/// Builds per-net RC trees that mirror the route trees, rooted at the
/// driving cell's output terminal. Sinks add one gate capacitance per
/// terminal they touch.
pub fn extract_rc(rd: &RoutedDesign, netlist: &Netlist, cfg: &FabricConfig) -> BTreeMap<String, NetRc> {
    let dm = device_model(cfg);
    let graph = &rd.graph;
    let mut out = BTreeMap::new();
    for (spec, route) in rd.problem.nets.iter().zip(&rd.routes) {
        // the driver is the cell whose output terminal this net reaches
        let mut driver = None;
        let mut root = route.nodes.first().copied();
        for g in &spec.groups {
            if let Some(pin) = &g.pin {
                let dir = get_template(netlist.gates[pin.gate].kind).pins[&pin.pin].direction;
                if dir == PinDirection::Output {
                    driver = Some(pin.gate);
                    root = Some(g.alternatives[0]);
                }
            }
        }
        let mut tree = RcTree::default();
        let mut index: HashMap<ResourceId, usize> = HashMap::new();
        if let Some(root) = root {
            let mut adj: HashMap<ResourceId, Vec<ResourceId>> = HashMap::new();
            for &(a, b) in &route.edges {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            let mut queue = VecDeque::from([(root, None)]);
            index.insert(root, 0);
            while let Some((v, parent)) = queue.pop_front() {
                let (r, c) = resource_rc(graph, v, cfg);
                tree.parent.push(parent);
                tree.r.push(r);
                tree.c.push(c);
                let me = tree.len() - 1;
                let mut next: Vec<ResourceId> = adj.get(&v).cloned().unwrap_or_default();
                next.sort_unstable();
                for u in next {
                    if !index.contains_key(&u) {
                        index.insert(u, index.len());
                        queue.push_back((u, Some(me)));
                    }
                }
            }
        }
        let mut sinks: Vec<(usize, String, Vec<usize>)> = Vec::new();
        for g in &spec.groups {
            let Some(pin) = &g.pin else { continue };
            if Some(pin.gate) == driver {
                let dir = get_template(netlist.gates[pin.gate].kind).pins[&pin.pin].direction;
                if dir == PinDirection::Output {
                    continue;
                }
            }
            let Some(&node) = g.alternatives.iter().find_map(|a| index.get(a)) else { continue };
            tree.c[node] += dm.c_gate;
            match sinks.iter_mut().find(|s| s.0 == pin.gate && s.1 == pin.pin) {
                Some(s) => s.2.push(node),
                None => sinks.push((pin.gate, pin.pin.clone(), vec![node])),
            }
        }
        out.insert(spec.name.clone(), NetRc { tree, driver, sinks });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPath {
    pub delay_s: f64,
    pub throughput_ops_s: f64,
    /// Gate ids from a primary input to the slowest primary output.
    pub path: Vec<String>,
}

/// Longest arrival over the netlist DAG. A gate's output arrives at the
/// latest of its input arrivals; each sink pin adds the Elmore delay of the
/// net from its driver, and primary outputs add the driver's full-load delay.
pub fn critical_path(
    rd: &RoutedDesign,
    netlist: &Netlist,
    cfg: &FabricConfig,
) -> Result<CriticalPath, NetlistError> {
    let dm = device_model(cfg);
    let conn = netlist.connectivity()?;
    let rc = extract_rc(rd, netlist, cfg);
    let n = netlist.gates.len();
    // arrival at each gate's inputs (max over pins) and the pin that set it
    let mut ready = vec![0.0f64; n];
    let mut from: Vec<Option<usize>> = vec![None; n];
    let mut delays: HashMap<&str, Vec<f64>> = HashMap::new();
    for (name, net) in &rc {
        let drv = net.driver.map(|g| drive_resistance(netlist.gates[g].kind, &dm)).unwrap_or(0.0);
        delays.insert(name.as_str(), elmore_delay(&net.tree, drv));
    }
    for &g in &conn.order {
        for &net_id in &conn.gate_inputs[g] {
            let info = &conn.nets[net_id];
            let Some((d, _)) = info.driver else { continue };
            let Some(net) = rc.get(&info.name) else { continue };
            let el = &delays[info.name.as_str()];
            let wire = net
                .sinks
                .iter()
                .filter(|s| s.0 == g)
                .flat_map(|s| s.2.iter().map(|&k| el[k]))
                .fold(0.0, f64::max);
            let t = ready[d] + wire;
            if t > ready[g] || from[g].is_none() {
                ready[g] = ready[g].max(t);
                from[g] = Some(d);
            }
        }
    }
    let mut worst = (0.0f64, None);
    for name in &netlist.outputs {
        let info = &conn.nets[conn.net_index[name]];
        let Some((d, _)) = info.driver else { continue };
        let total_c = rc.get(name).map(|n| n.tree.total_c()).unwrap_or(0.0);
        let t = ready[d] + drive_resistance(netlist.gates[d].kind, &dm) * total_c;
        if worst.1.is_none() || t > worst.0 {
            worst = (t, Some(d));
        }
    }
    let mut path = Vec::new();
    let mut cur = worst.1;
    while let Some(g) = cur {
        path.push(netlist.gates[g].id.clone());
        cur = from[g];
    }
    path.reverse();
    let delay = worst.0;
    Ok(CriticalPath {
        delay_s: delay,
        throughput_ops_s: if delay > 0.0 { 1.0 / delay } else { 0.0 },
        path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBreakdown {
    pub dynamic_uw: f64,
    pub leakage_uw: f64,
    pub total_uw: f64,
    pub switched_cap_f: f64,
}

/// Dynamic switching plus static leakage, in microwatts.
pub fn power(
    rd: &RoutedDesign,
    netlist: &Netlist,
    cfg: &FabricConfig,
    activity: f64,
    freq_hz: f64,
) -> PowerBreakdown {
    let dm = device_model(cfg);
    let c: f64 = extract_rc(rd, netlist, cfg).values().map(|n| n.tree.total_c()).sum();
    let dynamic = activity * c * cfg.vdd_v * cfg.vdd_v * freq_hz;
    let leakage: f64 = netlist.gates.iter().map(|g| cfg.vdd_v * leakage_current(g.kind, &dm)).sum();
    PowerBreakdown {
        dynamic_uw: dynamic * 1e6,
        leakage_uw: leakage * 1e6,
        total_uw: (dynamic + leakage) * 1e6,
        switched_cap_f: c,
    }
}

/// Instances per mm² for a rectangular footprint of whole columns.
pub fn density_of_span(span_x: usize, span_y: usize, pitch_nm: f64, instances: f64) -> (f64, f64) {
    let footprint_um2 = span_x as f64 * pitch_nm * 1e-3 * span_y as f64 * pitch_nm * 1e-3;
    let density = if footprint_um2 > 0.0 { instances / (footprint_um2 * 1e-6) } else { 0.0 };
    (footprint_um2, density)
}

/// Footprint is the bounding box of every column holding a cell, a route
/// resource or a heat pillar. Returns `(footprint_um2, density_per_mm2)`.
pub fn density(rd: &RoutedDesign, cfg: &FabricConfig, instances: f64) -> (f64, f64) {
    let mut cols: Vec<(usize, usize)> = rd.placement.cells.iter().map(|c| c.column).collect();
    cols.extend(rd.heat.hdpp_columns.iter().copied());
    for r in &rd.routes {
        for &v in &r.nodes {
            let ([a, b], n) = rd.graph.resource(v).columns();
            cols.push(a);
            if n == 2 {
                cols.push(b);
            }
        }
    }
    for j in &rd.heat.junctions {
        cols.extend(j.columns.iter().copied());
    }
    if cols.is_empty() {
        return (0.0, 0.0);
    }
    let (x0, x1) = (cols.iter().map(|c| c.0).min().unwrap(), cols.iter().map(|c| c.0).max().unwrap());
    let (y0, y1) = (cols.iter().map(|c| c.1).min().unwrap(), cols.iter().map(|c| c.1).max().unwrap());
    density_of_span(x1 - x0 + 1, y1 - y0 + 1, cfg.pitch_nm, instances)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkMetrics {
    pub throughput_ops_s: f64,
    pub power_uw: f64,
    pub perf_per_watt: f64,
    pub density_per_mm2: f64,
    pub footprint_um2: f64,
    pub wirelength_um: f64,
    pub in_active_layer_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ratios {
    pub throughput: f64,
    pub power: f64,
    pub perf_per_watt: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub benchmark: String,
    pub metrics: BenchmarkMetrics,
    pub critical_path: Vec<String>,
    pub baseline: Option<BaselineEntry>,
    pub ratios: Option<Ratios>,
    pub note: Option<String>,
}

pub fn compare_baseline(m: &BenchmarkMetrics, baseline: &BaselineEntry) -> Ratios {
    Ratios {
        throughput: m.throughput_ops_s / baseline.throughput_ops_s,
        power: m.power_uw / baseline.power_uw,
        perf_per_watt: m.perf_per_watt / baseline.perf_per_watt(),
        density: m.density_per_mm2 / baseline.density_per_mm2,
    }
}

/// Full metric set for one routed benchmark.
pub fn evaluate(
    benchmark: &str,
    rd: &RoutedDesign,
    netlist: &Netlist,
    cfg: &FabricConfig,
) -> Result<MetricsReport, NetlistError> {
    let cp = critical_path(rd, netlist, cfg)?;
    let pw = power(rd, netlist, cfg, cfg.activity, cp.throughput_ops_s);
    let (footprint_um2, density_per_mm2) = density(rd, cfg, 1.0);
    let cong = congestion_report(rd);
    let metrics = BenchmarkMetrics {
        throughput_ops_s: cp.throughput_ops_s,
        power_uw: pw.total_uw,
        perf_per_watt: if pw.total_uw > 0.0 { cp.throughput_ops_s / (pw.total_uw * 1e-6) } else { 0.0 },
        density_per_mm2,
        footprint_um2,
        wirelength_um: cong.total_wirelength_um,
        in_active_layer_fraction: cong.in_active_layer_fraction,
    };
    let baseline = cfg.cmos_baseline.get(benchmark).cloned();
    let ratios = baseline.as_ref().map(|b| compare_baseline(&metrics, b));
    let note = baseline
        .is_none()
        .then(|| format!("no baseline entry for {benchmark}; ratios omitted"));
    Ok(MetricsReport {
        benchmark: benchmark.to_string(),
        metrics,
        critical_path: cp.path,
        baseline,
        ratios,
        note,
    })
}
