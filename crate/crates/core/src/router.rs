//! Negotiated-congestion routing over the resource graph.
//!
//! Every net is a list of terminal groups. A group is satisfied when the net's
//! tree contains any one of its alternatives. Cell pins become groups of one
//! resource each: the innermost coax shell at a transistor site for inputs and
//! the SB-ILC for outputs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cells::{get_template, PinDirection, Terminal};
use crate::config::ResourceCosts;
use crate::fabric::{GridCoord, Resource, ResourceGraph, ResourceId, ResourceKind};
use crate::netlist::{Netlist, NetlistError};
use crate::placer::Placement;
use crate::thermal::HeatExtraction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    Free,
    Blocked,
    /// Usable only by the net with this index.
    Reserved(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PinRef {
    pub gate: usize,
    pub pin: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalGroup {
    pub alternatives: Vec<ResourceId>,
    pub pin: Option<PinRef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetSpec {
    pub name: String,
    pub groups: Vec<TerminalGroup>,
}

/// Nets plus per-resource access rights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingProblem {
    pub nets: Vec<NetSpec>,
    pub access: Vec<Access>,
}

impl RoutingProblem {
    /// A problem with every resource free and no nets.
    pub fn new(graph: &ResourceGraph) -> Self {
        Self {
            nets: Vec::new(),
            access: vec![Access::Free; graph.node_count()],
        }
    }

    pub fn block(&mut self, id: ResourceId) {
        self.access[id as usize] = Access::Blocked;
    }

    /// Adds a net whose groups are sets of alternative resources. Terminal
    /// resources are reserved for the new net.
    pub fn add_net(
        &mut self,
        name: &str,
        groups: Vec<Vec<ResourceId>>,
    ) -> Result<usize, RouteError> {
        let idx = self.nets.len();
        let groups = groups
            .into_iter()
            .map(|alternatives| TerminalGroup {
                alternatives,
                pin: None,
            })
            .collect();
        self.nets.push(NetSpec {
            name: name.to_string(),
            groups,
        });
        self.reserve_terminals(idx)?;
        Ok(idx)
    }

    fn reserve_terminals(&mut self, idx: usize) -> Result<(), RouteError> {
        for g in &self.nets[idx].groups {
            for &a in &g.alternatives {
                match self.access[a as usize] {
                    Access::Reserved(other) if other as usize != idx => {
                        return Err(RouteError::PinConflict {
                            resource: a,
                            nets: [self.nets[other as usize].name.clone(), self.nets[idx].name.clone()],
                        });
                    }
                    _ => self.access[a as usize] = Access::Reserved(idx as u32),
                }
            }
        }
        Ok(())
    }

    pub fn net_index(&self, name: &str) -> Option<usize> {
        self.nets.iter().position(|n| n.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RouteError {
    #[error("unroutable: nets {failing_nets:?}, hot spots {hot_spots:?}")]
    Unroutable {
        failing_nets: Vec<String>,
        hot_spots: Vec<String>,
    },
    #[error("resource {resource} is a terminal of both {nets:?}")]
    PinConflict { resource: ResourceId, nets: [String; 2] },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteOptions {
    pub seed: u64,
    pub max_iters: usize,
}

impl Default for RouteOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            max_iters: 60,
        }
    }
}

/// Tree of one net: its resources in insertion order plus the tree edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetRoute {
    pub net: String,
    pub nodes: Vec<ResourceId>,
    pub edges: Vec<(ResourceId, ResourceId)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteStats {
    /// Wirelength per net in micrometers, keyed by net name.
    pub wirelength_um: BTreeMap<String, f64>,
    /// Resources used, keyed by resource type name.
    pub resource_histogram: BTreeMap<String, usize>,
    pub iterations: usize,
}

/// Routes for every net of a problem, in problem order.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteSolution {
    pub routes: Vec<NetRoute>,
    pub stats: RouteStats,
}

#[derive(Debug, Clone)]
pub struct RoutedDesign {
    pub placement: Placement,
    pub graph: Arc<ResourceGraph>,
    pub problem: RoutingProblem,
    pub routes: Vec<NetRoute>,
    pub stats: RouteStats,
    /// Heat junctions and pillars; empty until heat extraction is inserted.
    pub heat: HeatExtraction,
}

impl RoutedDesign {
    pub fn route_of(&self, net: &str) -> Option<&NetRoute> {
        self.routes.iter().find(|r| r.net == net)
    }

    /// One line per net, `net: res res ...`, ordered by net name.
    pub fn dump(&self) -> String {
        dump_routes(&self.graph, &self.routes)
    }
}

pub fn dump_routes(graph: &ResourceGraph, routes: &[NetRoute]) -> String {
    let mut sorted: Vec<&NetRoute> = routes.iter().collect();
    sorted.sort_by(|a, b| a.net.cmp(&b.net));
    let mut s = String::new();
    for r in sorted {
        s.push_str(&r.net);
        s.push(':');
        for &n in &r.nodes {
            s.push(' ');
            s.push_str(&graph.name(n));
        }
        s.push('\n');
    }
    s
}

/// Translates a placed netlist into a routing problem on `graph`.
pub fn build_problem(
    placement: &Placement,
    netlist: &Netlist,
    graph: &ResourceGraph,
) -> Result<RoutingProblem, RouteError> {
    let grid = &placement.grid;
    let (xs, ys, levels, segs, shells) = graph.dims();
    let conn = netlist.connectivity()?;
    let mut p = RoutingProblem::new(graph);

    for (x, y) in grid.reserved_columns() {
        for l in 0..levels {
            p.block(graph.ilc_id(x, y, l));
            for s in 0..segs {
                let c = GridCoord::new(x, y, l, s);
                p.block(graph.seg_id(&c));
                for k in 0..shells {
                    p.block(graph.coax_id(&c, k));
                }
                let around = [
                    (x.wrapping_sub(1), y),
                    (x + 1, y),
                    (x, y.wrapping_sub(1)),
                    (x, y + 1),
                ];
                for n in around {
                    if n.0 < xs && n.1 < ys {
                        if let Some(b) = graph.bridge_id((x, y), n, l, s) {
                            p.block(b);
                        }
                    }
                }
            }
        }
    }
    for cell in &placement.cells {
        for site in &cell.sites {
            p.block(graph.seg_id(site));
            if shells > 0 {
                p.block(graph.coax_id(site, 0));
            }
        }
        for &(x, y, l) in &cell.ilcs {
            p.block(graph.ilc_id(x, y, l));
        }
    }

    // one problem net per netlist net that touches a cell pin
    let mut problem_net = vec![usize::MAX; conn.nets.len()];
    for (i, info) in conn.nets.iter().enumerate() {
        if info.driver.is_some() || !info.sinks.is_empty() {
            problem_net[i] = p.nets.len();
            p.nets.push(NetSpec {
                name: info.name.clone(),
                groups: Vec::new(),
            });
        }
    }
    for (g, gate) in netlist.gates.iter().enumerate() {
        let cell = &placement.cells[g];
        let template = get_template(gate.kind);
        for (pin, def) in &template.pins {
            if def.direction == PinDirection::Power {
                continue;
            }
            let Some(net_name) = gate.pins.get(pin) else { continue };
            let net = problem_net[conn.net_index[net_name]];
            for t in &def.terminals {
                let node = match *t {
                    Terminal::SiteGate(i) if shells > 0 => graph.coax_id(&cell.sites[i], 0),
                    Terminal::SiteGate(i) => graph.seg_id(&cell.sites[i]),
                    Terminal::Ilc => graph.ilc_id(cell.column.0, cell.column.1, cell.level),
                };
                p.nets[net].groups.push(TerminalGroup {
                    alternatives: vec![node],
                    pin: Some(PinRef {
                        gate: g,
                        pin: pin.clone(),
                    }),
                });
            }
        }
    }
    // the drain junction at the doping boundary belongs to the output net
    for (g, cell) in placement.cells.iter().enumerate() {
        let net = problem_net[conn.gate_output[g]];
        for c in cell.boundary_segs(segs) {
            p.access[graph.seg_id(&c) as usize] = Access::Reserved(net as u32);
        }
    }
    for idx in 0..p.nets.len() {
        p.reserve_terminals(idx)?;
    }
    Ok(p)
}

/// Places, in graph terms, the netlist of a placement and routes it.
pub fn route(
    placement: &Placement,
    netlist: &Netlist,
    graph: Arc<ResourceGraph>,
    options: &RouteOptions,
) -> Result<RoutedDesign, RouteError> {
    let problem = build_problem(placement, netlist, &graph)?;
    let costs = placement.grid.config().cost;
    let sol = route_problem(&graph, &problem, &costs, options)?;
    Ok(RoutedDesign {
        placement: placement.clone(),
        graph,
        problem,
        routes: sol.routes,
        stats: sol.stats,
        heat: HeatExtraction::default(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapItem(f64, f64, u32);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties prefer the deeper node, then the lower id
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| self.1.total_cmp(&other.1))
            .then_with(|| other.2.cmp(&self.2))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Copy)]
struct Bbox {
    x0: u16,
    x1: u16,
    y0: u16,
    y1: u16,
}

/// Column distance between two boxes.
fn box_gap(a: &Bbox, b: &Bbox) -> u32 {
    let dx = a.x0.saturating_sub(b.x1).max(b.x0.saturating_sub(a.x1));
    let dy = a.y0.saturating_sub(b.y1).max(b.y0.saturating_sub(a.y1));
    dx as u32 + dy as u32
}

struct Router<'a> {
    graph: &'a ResourceGraph,
    problem: &'a RoutingProblem,
    base: Vec<f32>,
    hist: Vec<f32>,
    occ: Vec<u16>,
    pres_fac: f64,
    // column box of each resource: (x0, x1, y0, y1)
    boxes: Vec<[u16; 4]>,
    // vertical extent in segments counted from the wire base
    heights: Vec<[u16; 2]>,
    dist: Vec<f64>,
    prev: Vec<u32>,
    seen: Vec<u32>,
    target: Vec<u32>,
    target_stamp: Vec<u32>,
    in_tree: Vec<u32>,
    stamp: u32,
    // cheapest possible node, used as the per-column lower bound for A*
    min_base: f64,
}

const NONE: u32 = u32::MAX;

impl<'a> Router<'a> {
    fn new(graph: &'a ResourceGraph, problem: &'a RoutingProblem, costs: &ResourceCosts) -> Self {
        let n = graph.node_count();
        let mut base = Vec::with_capacity(n);
        let mut boxes = Vec::with_capacity(n);
        let mut heights = Vec::with_capacity(n);
        let segs = graph.segs_per_level();
        for id in 0..n as ResourceId {
            let r = graph.resource(id);
            base.push(match r.kind() {
                ResourceKind::Seg => costs.seg,
                ResourceKind::Coax => costs.coax,
                ResourceKind::Bridge => costs.bridge,
                ResourceKind::Ilc => costs.sbilc,
            } as f32);
            let ([a, b], _) = r.columns();
            boxes.push([
                a.0.min(b.0) as u16,
                a.0.max(b.0) as u16,
                a.1.min(b.1) as u16,
                a.1.max(b.1) as u16,
            ]);
            let z = match r {
                Resource::Seg(c) | Resource::Coax(c, _) => [c.level * segs + c.seg; 2],
                Resource::Bridge { level, seg, .. } => [level * segs + seg; 2],
                Resource::Ilc { level, .. } => {
                    let b = level * segs + segs / 2;
                    [b.saturating_sub(1), b]
                }
            };
            heights.push([z[0] as u16, z[1] as u16]);
        }
        Self {
            graph,
            problem,
            base: base.clone(),
            hist: vec![0.0; n],
            occ: vec![0; n],
            pres_fac: 0.5,
            boxes,
            heights,
            dist: vec![0.0; n],
            prev: vec![NONE; n],
            seen: vec![0; n],
            target: vec![NONE; n],
            target_stamp: vec![0; n],
            in_tree: vec![0; n],
            stamp: 0,
            min_base: base.iter().copied().fold(f32::INFINITY, f32::min).max(0.0) as f64,
        }
    }

    fn usable(&self, v: u32, net: u32) -> bool {
        match self.problem.access[v as usize] {
            Access::Free => true,
            Access::Blocked => false,
            Access::Reserved(owner) => owner == net,
        }
    }

    fn cost(&self, v: u32) -> f64 {
        let i = v as usize;
        (self.base[i] as f64 + self.hist[i] as f64) * (1.0 + self.pres_fac * self.occ[i] as f64)
    }

    fn in_box(&self, v: u32, b: &Bbox) -> bool {
        let [x0, x1, y0, y1] = self.boxes[v as usize];
        x0 >= b.x0 && x1 <= b.x1 && y0 >= b.y0 && y1 <= b.y1
    }

    fn bbox(&self, net: &NetSpec, margin: u16) -> Bbox {
        let mut b = Bbox {
            x0: u16::MAX,
            x1: 0,
            y0: u16::MAX,
            y1: 0,
        };
        for g in &net.groups {
            for &a in &g.alternatives {
                let [x0, x1, y0, y1] = self.boxes[a as usize];
                b.x0 = b.x0.min(x0);
                b.x1 = b.x1.max(x1);
                b.y0 = b.y0.min(y0);
                b.y1 = b.y1.max(y1);
            }
        }
        b.x0 = b.x0.saturating_sub(margin);
        b.y0 = b.y0.saturating_sub(margin);
        b.x1 = b.x1.saturating_add(margin);
        b.y1 = b.y1.saturating_add(margin);
        b
    }

    fn group_box(&self, g: &TerminalGroup) -> Bbox {
        let mut b = Bbox {
            x0: u16::MAX,
            x1: 0,
            y0: u16::MAX,
            y1: 0,
        };
        for &a in &g.alternatives {
            let [x0, x1, y0, y1] = self.boxes[a as usize];
            b.x0 = b.x0.min(x0);
            b.x1 = b.x1.max(x1);
            b.y0 = b.y0.min(y0);
            b.y1 = b.y1.max(y1);
        }
        b
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.fill(0);
            self.target_stamp.fill(0);
            self.in_tree.fill(0);
            self.stamp = 1;
        }
        self.stamp
    }

    /// Builds a Steiner tree for net `n`, or `None` when some terminal is
    /// unreachable through usable resources.
    fn route_net(&mut self, n: usize) -> Option<NetRoute> {
        let net = &self.problem.nets[n];
        let mut route = NetRoute {
            net: net.name.clone(),
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        if net.groups.is_empty() {
            return Some(route);
        }
        let tree_stamp = self.next_stamp();
        let mut connected = vec![false; net.groups.len()];
        let mut remaining = net.groups.len();
        for margin in [3u16, u16::MAX] {
            let bbox = self.bbox(net, margin);
            while remaining > 0 {
                if !self.grow(n, &bbox, &mut route, &mut connected, &mut remaining, tree_stamp) {
                    break;
                }
            }
            if remaining == 0 {
                return Some(route);
            }
        }
        None
    }

    /// Adds one shortest path from the tree to the nearest unconnected group.
    fn grow(
        &mut self,
        n: usize,
        bbox: &Bbox,
        route: &mut NetRoute,
        connected: &mut [bool],
        remaining: &mut usize,
        tree_stamp: u32,
    ) -> bool {
        let net = &self.problem.nets[n];
        let me = n as u32;
        let search = self.next_stamp();
        let first = route.nodes.is_empty();
        // aim at one group at a time, nearest to the first group first
        let anchor = self.group_box(&net.groups[0]);
        let aim = (0..net.groups.len())
            .filter(|&gi| !connected[gi] && !(first && gi == 0))
            .min_by_key(|&gi| (box_gap(&anchor, &self.group_box(&net.groups[gi])), gi))
            .unwrap_or(0);
        for &a in &net.groups[aim].alternatives {
            self.target[a as usize] = aim as u32;
            self.target_stamp[a as usize] = search;
        }
        let goal = self.group_box(&net.groups[aim]);
        let (mut z0, mut z1) = (u16::MAX, 0u16);
        for &a in &net.groups[aim].alternatives {
            let [lo, hi] = self.heights[a as usize];
            z0 = z0.min(lo);
            z1 = z1.max(hi);
        }
        let h = |r: &Self, v: u32| -> f64 {
            if goal.x0 > goal.x1 {
                return 0.0;
            }
            let [x0, x1, y0, y1] = r.boxes[v as usize];
            let dx = goal.x0.saturating_sub(x1).max(x0.saturating_sub(goal.x1));
            let dy = goal.y0.saturating_sub(y1).max(y0.saturating_sub(goal.y1));
            let [lo, hi] = r.heights[v as usize];
            let dz = z0.saturating_sub(hi).max(lo.saturating_sub(z1));
            // a column step costs a bridge plus a node beyond it, a vertical step one node
            let bridge = (x1 - x0) + (y1 - y0) > 0;
            let steps = 2.0 * (dx as f64 + dy as f64) + dz as f64 + if bridge { 1.0 } else { 0.0 };
            r.min_base * steps
        };
        let mut heap = BinaryHeap::new();
        let push = |r: &mut Self, heap: &mut BinaryHeap<HeapItem>, v: u32, d: f64, from: u32| {
            let i = v as usize;
            if r.seen[i] != search || d < r.dist[i] {
                r.seen[i] = search;
                r.dist[i] = d;
                r.prev[i] = from;
                heap.push(HeapItem(d + h(r, v), d, v));
            }
        };
        if first {
            for &a in &net.groups[0].alternatives {
                if self.usable(a, me) {
                    let c = self.cost(a);
                    push(self, &mut heap, a, c, NONE);
                }
            }
            if net.groups.len() == 1 {
                // a lone terminal: keep its cheapest alternative
                let Some(HeapItem(_, _, v)) = heap.pop() else { return false };
                route.nodes.push(v);
                self.in_tree[v as usize] = tree_stamp;
                connected[0] = true;
                *remaining = 0;
                return true;
            }
        } else {
            for &v in &route.nodes {
                push(self, &mut heap, v, 0.0, NONE);
            }
        }
        let mut hit = NONE;
        while let Some(HeapItem(_, d, v)) = heap.pop() {
            let i = v as usize;
            if d > self.dist[i] {
                continue;
            }
            if self.target_stamp[i] == search && self.in_tree[i] != tree_stamp {
                hit = v;
                break;
            }
            for &u in self.graph.neighbors(v) {
                if !self.usable(u, me) || !self.in_box(u, bbox) || self.in_tree[u as usize] == tree_stamp {
                    continue;
                }
                let nd = d + self.cost(u);
                push(self, &mut heap, u, nd, v);
            }
        }
        if hit == NONE {
            return false;
        }
        // walk back to the tree (or to a first-group source)
        let mut v = hit;
        loop {
            if self.in_tree[v as usize] == tree_stamp {
                break;
            }
            self.in_tree[v as usize] = tree_stamp;
            route.nodes.push(v);
            let p = self.prev[v as usize];
            if p == NONE {
                break;
            }
            route.edges.push((p, v));
            v = p;
        }
        for (gi, g) in net.groups.iter().enumerate() {
            if !connected[gi] && g.alternatives.iter().any(|&a| self.in_tree[a as usize] == tree_stamp) {
                connected[gi] = true;
                *remaining -= 1;
            }
        }
        true
    }
}

/// Routes all nets of `problem` with rip-up and reroute.
pub fn route_problem(
    graph: &ResourceGraph,
    problem: &RoutingProblem,
    costs: &ResourceCosts,
    options: &RouteOptions,
) -> Result<RouteSolution, RouteError> {
    let mut r = Router::new(graph, problem, costs);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let n_nets = problem.nets.len();
    let mut routes: Vec<Option<NetRoute>> = vec![None; n_nets];
    let mut order: Vec<usize> = (0..n_nets).collect();
    order.shuffle(&mut rng);
    let max_iters = options.max_iters.max(1);
    let mut overused: Vec<u32> = Vec::new();

    for iter in 1..=max_iters {
        for &n in &order {
            if let Some(old) = routes[n].take() {
                for &v in &old.nodes {
                    r.occ[v as usize] -= 1;
                }
            }
            let Some(new) = r.route_net(n) else {
                return Err(RouteError::Unroutable {
                    failing_nets: vec![problem.nets[n].name.clone()],
                    hot_spots: Vec::new(),
                });
            };
            for &v in &new.nodes {
                r.occ[v as usize] += 1;
            }
            routes[n] = Some(new);
        }
        overused = (0..r.occ.len() as u32).filter(|&v| r.occ[v as usize] > 1).collect();
        if overused.is_empty() {
            let routes: Vec<NetRoute> = routes.into_iter().map(|r| r.expect("every net routed")).collect();
            let stats = route_stats(graph, &routes, iter);
            return Ok(RouteSolution { routes, stats });
        }
        for &v in &overused {
            r.hist[v as usize] += (r.occ[v as usize] - 1) as f32;
        }
        r.pres_fac *= 1.6;
        let mut hot = vec![false; r.occ.len()];
        for &v in &overused {
            hot[v as usize] = true;
        }
        order = (0..n_nets)
            .filter(|&n| routes[n].as_ref().is_some_and(|rt| rt.nodes.iter().any(|&v| hot[v as usize])))
            .collect();
        order.shuffle(&mut rng);
    }

    let mut hot = vec![false; r.occ.len()];
    for &v in &overused {
        hot[v as usize] = true;
    }
    let mut failing_nets: Vec<String> = routes
        .iter()
        .flatten()
        .filter(|rt| rt.nodes.iter().any(|&v| hot[v as usize]))
        .map(|rt| rt.net.clone())
        .collect();
    failing_nets.sort();
    overused.sort_by(|&a, &b| r.occ[b as usize].cmp(&r.occ[a as usize]).then(a.cmp(&b)));
    let hot_spots = overused.iter().take(10).map(|&v| graph.name(v)).collect();
    Err(RouteError::Unroutable {
        failing_nets,
        hot_spots,
    })
}

fn route_stats(graph: &ResourceGraph, routes: &[NetRoute], iterations: usize) -> RouteStats {
    let mut wirelength_um = BTreeMap::new();
    let mut resource_histogram: BTreeMap<String, usize> =
        ResourceKind::ALL.iter().map(|k| (k.name().to_string(), 0)).collect();
    for r in routes {
        let mut len = 0.0;
        for &v in &r.nodes {
            len += graph.length_um(v);
            *resource_histogram.get_mut(graph.kind(v).name()).expect("all kinds present") += 1;
        }
        wirelength_um.insert(r.net.clone(), len);
    }
    RouteStats {
        wirelength_um,
        resource_histogram,
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteViolation {
    pub kind: String,
    pub detail: String,
}

impl RouteViolation {
    fn new(kind: &str, detail: String) -> Self {
        Self {
            kind: kind.to_string(),
            detail,
        }
    }
}

/// Checks capacity, tree connectivity and terminal coverage of routes without
/// trusting the router's bookkeeping.
pub fn check_solution(
    graph: &ResourceGraph,
    problem: &RoutingProblem,
    routes: &[NetRoute],
) -> Vec<RouteViolation> {
    let mut out = Vec::new();
    let mut owner: BTreeMap<ResourceId, &str> = BTreeMap::new();
    for r in routes {
        for &v in &r.nodes {
            if (v as usize) >= graph.node_count() {
                out.push(RouteViolation::new("invalid resource", format!("{}: id {v}", r.net)));
                continue;
            }
            if let Some(prev) = owner.insert(v, &r.net) {
                out.push(RouteViolation::new(
                    "capacity",
                    format!("{} used by {prev} and {}", graph.name(v), r.net),
                ));
            }
        }
    }
    for r in routes {
        let nodes: Vec<ResourceId> =
            r.nodes.iter().copied().filter(|&v| (v as usize) < graph.node_count()).collect();
        for &(a, b) in &r.edges {
            if (a as usize) >= graph.node_count() || (b as usize) >= graph.node_count() || !graph.has_edge(a, b) {
                out.push(RouteViolation::new("invalid edge", format!("{}: {a}-{b}", r.net)));
            }
        }
        if !connected(graph, &nodes) {
            out.push(RouteViolation::new("disconnected tree", r.net.clone()));
        }
        if let Some(spec) = problem.nets.iter().find(|n| n.name == r.net) {
            for g in &spec.groups {
                if !g.alternatives.iter().any(|a| nodes.contains(a)) {
                    let what = match &g.pin {
                        Some(p) => format!("{}: gate {} pin {}", r.net, p.gate, p.pin),
                        None => format!("{}: {}", r.net, graph.name(g.alternatives[0])),
                    };
                    out.push(RouteViolation::new("missing terminal", what));
                }
            }
        }
    }
    for spec in &problem.nets {
        if !spec.groups.is_empty() && !routes.iter().any(|r| r.net == spec.name) {
            out.push(RouteViolation::new("missing terminal", format!("{}: no route", spec.name)));
        }
    }
    out
}

/// Whether `nodes` induce a connected subgraph of `graph`.
fn connected(graph: &ResourceGraph, nodes: &[ResourceId]) -> bool {
    if nodes.len() <= 1 {
        return true;
    }
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut reached = vec![false; sorted.len()];
    reached[0] = true;
    let mut stack = vec![sorted[0]];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in graph.neighbors(v) {
            if let Ok(i) = sorted.binary_search(&u) {
                if !reached[i] {
                    reached[i] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
    }
    count == sorted.len()
}

/// Full check of a routed design, including transistor-site intrusion.
pub fn check_routes(rd: &RoutedDesign) -> Result<(), Vec<RouteViolation>> {
    let mut v = check_solution(&rd.graph, &rd.problem, &rd.routes);
    let grid = &rd.placement.grid;
    let segs = grid.segs_per_level();
    for r in &rd.routes {
        // cells whose output this net carries may use their own drain junction
        let driven_by: Vec<usize> = rd
            .problem
            .nets
            .iter()
            .filter(|n| n.name == r.net)
            .flat_map(|n| n.groups.iter())
            .filter(|g| g.alternatives.iter().any(|&a| rd.graph.kind(a) == ResourceKind::Ilc))
            .filter_map(|g| g.pin.as_ref().map(|p| p.gate))
            .collect();
        for &id in &r.nodes {
            if (id as usize) >= rd.graph.node_count() {
                continue;
            }
            let res = rd.graph.resource(id);
            let ([a, b], _) = res.columns();
            if grid.is_reserved(a.0, a.1) || grid.is_reserved(b.0, b.1) {
                v.push(RouteViolation::new("reserved column", format!("{}: {res}", r.net)));
            }
            if let Resource::Seg(c) = res {
                if let Some(owner) = grid.occupant(&c) {
                    let cell = &rd.placement.cells[owner.cell as usize];
                    let own_junction =
                        driven_by.contains(&(owner.cell as usize)) && cell.boundary_segs(segs).contains(&c);
                    let own_gate = rd.problem.nets.iter().filter(|n| n.name == r.net).any(|n| {
                        n.groups.iter().any(|g| g.alternatives.contains(&id))
                    });
                    if !own_junction && !own_gate {
                        v.push(RouteViolation::new("site intrusion", format!("{}: {res}", r.net)));
                    }
                }
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Utilization {
    pub used: usize,
    pub available: usize,
    pub utilization: f64,
}

impl Utilization {
    fn new(used: usize, available: usize) -> Self {
        Self {
            used,
            available,
            utilization: if available == 0 { 0.0 } else { used as f64 / available as f64 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnPeak {
    pub col_x: usize,
    pub col_y: usize,
    pub used: usize,
    pub available: usize,
    pub utilization: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CongestionReport {
    pub by_type: BTreeMap<String, Utilization>,
    pub peak_column: Option<ColumnPeak>,
    pub total_wirelength_um: f64,
    pub active_wirelength_um: f64,
    pub in_active_layer_fraction: f64,
}

/// Utilization per resource type and column, plus the share of wirelength
/// on levels for which `active_level` holds.
pub fn congestion(
    graph: &ResourceGraph,
    problem: &RoutingProblem,
    routes: &[NetRoute],
    active_level: impl Fn(usize) -> bool,
) -> CongestionReport {
    let (xs, ys, ..) = graph.dims();
    let mut used = vec![false; graph.node_count()];
    for r in routes {
        for &v in &r.nodes {
            used[v as usize] = true;
        }
    }
    let mut by_kind: BTreeMap<&str, (usize, usize)> =
        ResourceKind::ALL.iter().map(|k| (k.name(), (0, 0))).collect();
    let mut per_col = vec![(0usize, 0usize); xs * ys];
    let (mut total, mut active) = (0.0, 0.0);
    for id in 0..graph.node_count() {
        if problem.access[id] == Access::Blocked {
            continue;
        }
        let id32 = id as ResourceId;
        let res = graph.resource(id32);
        let e = by_kind.get_mut(res.kind().name()).expect("all kinds present");
        e.1 += 1;
        let ([a, b], n) = res.columns();
        for c in [a, b].iter().take(n) {
            per_col[c.1 * xs + c.0].1 += 1;
        }
        if used[id] {
            e.0 += 1;
            for c in [a, b].iter().take(n) {
                per_col[c.1 * xs + c.0].0 += 1;
            }
            let len = graph.length_um(id32);
            total += len;
            if active_level(res.level()) {
                active += len;
            }
        }
    }
    let mut peak: Option<ColumnPeak> = None;
    for y in 0..ys {
        for x in 0..xs {
            let (u, av) = per_col[y * xs + x];
            let util = Utilization::new(u, av);
            if u > 0 && peak.as_ref().is_none_or(|p| util.utilization > p.utilization) {
                peak = Some(ColumnPeak {
                    col_x: x,
                    col_y: y,
                    used: u,
                    available: av,
                    utilization: util.utilization,
                });
            }
        }
    }
    CongestionReport {
        by_type: by_kind
            .into_iter()
            .map(|(k, (u, av))| (k.to_string(), Utilization::new(u, av)))
            .collect(),
        peak_column: peak,
        total_wirelength_um: total,
        active_wirelength_um: active,
        in_active_layer_fraction: if total > 0.0 { active / total } else { 0.0 },
    }
}

/// Congestion of a routed design. A level counts as an active layer when any
/// cell has its transistors on it.
pub fn congestion_report(rd: &RoutedDesign) -> CongestionReport {
    let mut hosted = vec![false; rd.placement.grid.levels()];
    for c in &rd.placement.cells {
        hosted[c.level] = true;
    }
    congestion(&rd.graph, &rd.problem, &rd.routes, |l| hosted[l])
}

/// Renders a report as aligned text, one resource type per line.
pub fn format_congestion(report: &CongestionReport) -> String {
    let mut s = String::new();
    for (k, u) in &report.by_type {
        let _ = writeln!(s, "{k:<14} {:>7}/{:<7} {:.4}", u.used, u.available, u.utilization);
    }
    if let Some(p) = &report.peak_column {
        let _ = writeln!(s, "peak column ({},{}) {}/{} {:.4}", p.col_x, p.col_y, p.used, p.available, p.utilization);
    }
    let _ = writeln!(s, "in-active-layer fraction {:.4}", report.in_active_layer_fraction);
    s
}
