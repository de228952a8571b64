//! Zero-delay logic simulation, structural extraction of routed designs and
//! the behavioural SRAM protocol model.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cells::{get_template, Logic, PinDirection, Terminal};
use crate::config::FabricConfig;
use crate::fabric::{ResourceGraph, ResourceId};
use crate::netlist::{Gate, Netlist, NetlistError};
use crate::router::RoutedDesign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state element {0} in a combinational simulation")]
    StateElementPresent(String),
    #[error("expected {expected} input bits, got {got}")]
    InputWidth { expected: usize, got: usize },
    #[error("extraction failed: {0}")]
    ExtractionFailure(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("vector file line {line}: {message}")]
    VectorSyntax { line: usize, message: String },
}

/// A netlist lowered to net indices in evaluation order.
#[derive(Debug, Clone)]
pub struct Compiled {
    n_nets: usize,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    ops: Vec<(Logic, Vec<usize>, usize)>,
}

impl Compiled {
    pub fn new(netlist: &Netlist) -> Result<Self, SimError> {
        let conn = netlist.connectivity()?;
        let mut ops = Vec::with_capacity(netlist.gates.len());
        for &g in &conn.order {
            let gate = &netlist.gates[g];
            let logic = get_template(gate.kind).logic;
            if logic == Logic::StateElement {
                return Err(SimError::StateElementPresent(gate.id.clone()));
            }
            ops.push((logic, conn.gate_inputs[g].clone(), conn.gate_output[g]));
        }
        let idx = |n: &String| conn.net_index[n];
        Ok(Self {
            n_nets: conn.nets.len(),
            inputs: netlist.inputs.iter().map(idx).collect(),
            outputs: netlist.outputs.iter().map(idx).collect(),
            ops,
        })
    }

    pub fn input_count(&self) -> usize {
        self.inputs.len()
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    /// Evaluates 64 vectors at once; bit `k` of each word is vector `k`.
    pub fn eval_words(&self, inputs: &[u64]) -> Result<Vec<u64>, SimError> {
        if inputs.len() != self.inputs.len() {
            return Err(SimError::InputWidth {
                expected: self.inputs.len(),
                got: inputs.len(),
            });
        }
        let mut v = vec![0u64; self.n_nets];
        for (&n, &w) in self.inputs.iter().zip(inputs) {
            v[n] = w;
        }
        let mut args = Vec::with_capacity(4);
        for (logic, ins, out) in &self.ops {
            args.clear();
            args.extend(ins.iter().map(|&i| v[i]));
            v[*out] = logic.eval_words(&args).expect("state elements rejected at compile time");
        }
        Ok(self.outputs.iter().map(|&o| v[o]).collect())
    }

    pub fn eval(&self, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
        let words: Vec<u64> = inputs.iter().map(|&b| b as u64).collect();
        Ok(self.eval_words(&words)?.into_iter().map(|w| w & 1 == 1).collect())
    }
}

/// Evaluates a combinational netlist on one input vector.
pub fn simulate(netlist: &Netlist, inputs: &[bool]) -> Result<Vec<bool>, SimError> {
    Compiled::new(netlist)?.eval(inputs)
}

/// Bits of `value`, least significant first.
pub fn to_bits(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| value >> i & 1 == 1).collect()
}

pub fn from_bits(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b as u64) << i)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Equivalence {
    Equivalent { vectors: u64, exhaustive: bool },
    Mismatch { vector: Vec<bool> },
}

/// Rebuilds a netlist from routed connectivity: each cell pin is bound to the
/// net whose tree contains all of the pin's terminal resources.
pub fn extract(golden: &Netlist, rd: &RoutedDesign) -> Result<Netlist, SimError> {
    let graph: &ResourceGraph = &rd.graph;
    let shells = graph.dims().4;
    let mut owner: HashMap<ResourceId, usize> = HashMap::new();
    for (i, r) in rd.routes.iter().enumerate() {
        if !tree_connected(graph, &r.nodes) {
            return Err(SimError::ExtractionFailure(format!("net {} is not connected", r.net)));
        }
        for &v in &r.nodes {
            if let Some(j) = owner.insert(v, i) {
                return Err(SimError::ExtractionFailure(format!(
                    "short between {} and {} at {}",
                    rd.routes[j].net,
                    r.net,
                    graph.name(v)
                )));
            }
        }
    }
    if rd.placement.cells.len() != golden.gates.len() {
        return Err(SimError::ExtractionFailure("placement does not match netlist".into()));
    }
    let mut gates = Vec::with_capacity(golden.gates.len());
    for (g, cell) in rd.placement.cells.iter().enumerate() {
        let template = get_template(cell.kind);
        let mut pins = BTreeMap::new();
        for (name, def) in &template.pins {
            if def.direction == PinDirection::Power {
                continue;
            }
            let mut bound: Option<usize> = None;
            for t in &def.terminals {
                let node = match *t {
                    Terminal::SiteGate(i) if shells > 0 => graph.coax_id(&cell.sites[i], 0),
                    Terminal::SiteGate(i) => graph.seg_id(&cell.sites[i]),
                    Terminal::Ilc => graph.ilc_id(cell.column.0, cell.column.1, cell.level),
                };
                let Some(&r) = owner.get(&node) else {
                    return Err(SimError::ExtractionFailure(format!(
                        "pin {name} of {} has an unrouted terminal {}",
                        golden.gates[g].id,
                        graph.name(node)
                    )));
                };
                if bound.is_some_and(|b| b != r) {
                    return Err(SimError::ExtractionFailure(format!(
                        "pin {name} of {} touches two nets",
                        golden.gates[g].id
                    )));
                }
                bound = Some(r);
            }
            if let Some(r) = bound {
                pins.insert(name.clone(), rd.routes[r].net.clone());
            }
        }
        gates.push(Gate {
            id: golden.gates[g].id.clone(),
            kind: cell.kind,
            pins,
        });
    }
    let extracted = Netlist {
        name: golden.name.clone(),
        inputs: golden.inputs.clone(),
        outputs: golden.outputs.clone(),
        gates,
    };
    extracted
        .connectivity()
        .map_err(|e| SimError::ExtractionFailure(e.to_string()))?;
    Ok(extracted)
}

fn tree_connected(graph: &ResourceGraph, nodes: &[ResourceId]) -> bool {
    if nodes.len() <= 1 {
        return true;
    }
    let set: HashMap<ResourceId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut seen = vec![false; nodes.len()];
    seen[0] = true;
    let mut stack = vec![nodes[0]];
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for u in graph.neighbors(v) {
            if let Some(&i) = set.get(u) {
                if !seen[i] {
                    seen[i] = true;
                    count += 1;
                    stack.push(*u);
                }
            }
        }
    }
    count == set.len()
}

pub const RANDOM_VECTORS: u64 = 10_000;

/// Compares a routed design against its golden netlist. The comparison is
/// exhaustive when `2^inputs <= limit`, otherwise it uses seeded random vectors.
pub fn equivalence_check(
    golden: &Netlist,
    routed: &RoutedDesign,
    limit: u64,
) -> Result<Equivalence, SimError> {
    let extracted = extract(golden, routed)?;
    compare(golden, &extracted, limit, routed.placement.seed)
}

/// Vector-level comparison of two netlists with the same interface.
pub fn compare(a: &Netlist, b: &Netlist, limit: u64, seed: u64) -> Result<Equivalence, SimError> {
    let ca = Compiled::new(a)?;
    let cb = Compiled::new(b)?;
    let n = ca.input_count();
    let exhaustive = n < 64 && (1u64 << n) <= limit;
    let total = if exhaustive { 1u64 << n } else { RANDOM_VECTORS };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut done = 0u64;
    while done < total {
        let lanes = (total - done).min(64);
        let mask = if lanes == 64 { !0 } else { (1u64 << lanes) - 1 };
        let words: Vec<u64> = (0..n)
            .map(|i| {
                if exhaustive {
                    // lane k carries vector done + k
                    (0..lanes).fold(0u64, |w, k| w | ((done + k) >> i & 1) << k)
                } else {
                    rng.gen::<u64>() & mask
                }
            })
            .collect();
        let oa = ca.eval_words(&words)?;
        let ob = cb.eval_words(&words)?;
        let diff = oa.iter().zip(&ob).fold(0u64, |acc, (x, y)| acc | (x ^ y)) & mask;
        if diff != 0 {
            let k = diff.trailing_zeros();
            let vector = words.iter().map(|w| w >> k & 1 == 1).collect();
            return Ok(Equivalence::Mismatch { vector });
        }
        done += lanes;
    }
    Ok(Equivalence::Equivalent {
        vectors: total,
        exhaustive,
    })
}

/// Regression vectors, one per line: `inputs -> outputs` in binary with the
/// first declared input leftmost.
pub fn format_vectors(rows: &[(Vec<bool>, Vec<bool>)]) -> String {
    let bits = |v: &[bool]| v.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
    let mut s = String::new();
    for (i, o) in rows {
        let _ = writeln!(s, "{} -> {}", bits(i), bits(o));
    }
    s
}

pub fn parse_vectors(text: &str) -> Result<Vec<(Vec<bool>, Vec<bool>)>, SimError> {
    let parse_bits = |s: &str, line: usize| {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(SimError::VectorSyntax {
                    line,
                    message: format!("bad bit '{c}'"),
                }),
            })
            .collect::<Result<Vec<bool>, _>>()
    };
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((a, b)) = line.split_once("->") else {
            return Err(SimError::VectorSyntax {
                line: i + 1,
                message: "missing '->'".into(),
            });
        };
        rows.push((parse_bits(a, i + 1)?, parse_bits(b, i + 1)?));
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BitLine {
    Floating,
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SramState {
    pub stored: bool,
    pub rbl: BitLine,
    pub vdd_v: f64,
    /// Highest read wordline level that cannot disturb the cell.
    pub read_max_v: f64,
    /// Lowest write wordline level that overpowers the feedback inverter.
    pub write_min_v: f64,
}

impl SramState {
    pub fn new(stored: bool, cfg: &FabricConfig) -> Self {
        Self {
            stored,
            rbl: BitLine::Floating,
            vdd_v: cfg.vdd_v,
            read_max_v: cfg.sram_read_max_frac * cfg.vdd_v,
            write_min_v: cfg.sram_write_min_frac * cfg.vdd_v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SramOp {
    Read { rwl_v: f64 },
    Write { bit: bool, wwl_v: f64 },
}

impl SramOp {
    pub fn read(cfg: &FabricConfig) -> Self {
        SramOp::Read { rwl_v: cfg.rwl_read_v }
    }

    pub fn write(bit: bool, cfg: &FabricConfig) -> Self {
        SramOp::Write {
            bit,
            wwl_v: cfg.wwl_write_v,
        }
    }
}

/// Applies one operation. Reads return the stored bit on the read bitline.
pub fn sram_step(state: SramState, op: SramOp) -> Result<(SramState, Option<bool>), SimError> {
    match op {
        SramOp::Read { rwl_v } => {
            if !(rwl_v > 0.0 && rwl_v <= state.read_max_v) {
                return Err(SimError::ProtocolViolation(format!(
                    "read wordline {rwl_v} V outside (0, {}] V",
                    state.read_max_v
                )));
            }
            let rbl = if state.stored { BitLine::High } else { BitLine::Low };
            Ok((SramState { rbl, ..state }, Some(state.stored)))
        }
        SramOp::Write { bit, wwl_v } => {
            if !(wwl_v >= state.write_min_v && wwl_v <= state.vdd_v) {
                return Err(SimError::ProtocolViolation(format!(
                    "write wordline {wwl_v} V outside [{}, {}] V",
                    state.write_min_v, state.vdd_v
                )));
            }
            Ok((
                SramState {
                    stored: bit,
                    rbl: BitLine::Floating,
                    ..state
                },
                None,
            ))
        }
    }
}
