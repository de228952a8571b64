//! Gate-level netlists: a BLIF-like text format, structural validation and
//! benchmark generators.
//!
//! ```text
//! .model inv_chain
//! .inputs a
//! .outputs y
//! .gate INV A=a Y=n1
//! .gate INV A=n1 Y=y
//! .end
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::cells::{get_template, CellKind, PinDirection};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetlistError {
    #[error("line {line}: {message}")]
    SyntaxError { line: usize, message: String },
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
    #[error("net `{0}` has more than one driver")]
    DuplicateDriver(String),
    #[error("net `{0}` is never driven")]
    UndrivenNet(String),
    #[error("combinational cycle: {}", .0.join(" -> "))]
    CombinationalCycle(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gate {
    pub id: String,
    pub kind: CellKind,
    /// Pin name to net name, in template pin order.
    pub pins: BTreeMap<String, String>,
}

impl Gate {
    pub fn output_pin(&self) -> &'static str {
        match self.kind {
            CellKind::Sram6t => "RBL",
            _ => "Y",
        }
    }

    pub fn output_net(&self) -> &str {
        &self.pins[self.output_pin()]
    }

    /// Input pins in the order the truth function consumes them.
    pub fn input_pins(&self) -> Vec<&'static str> {
        match self.kind {
            CellKind::Inv => vec!["A"],
            CellKind::Nand2 | CellKind::Nor2 => vec!["A", "B"],
            CellKind::Nand3 | CellKind::Nor3 => vec!["A", "B", "C"],
            CellKind::Nand4 => vec!["A", "B", "C", "D"],
            CellKind::Sram6t => vec!["WBL", "WWL", "RWL"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Netlist {
    pub name: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub gates: Vec<Gate>,
}

pub type NetId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetInfo {
    pub name: String,
    /// `(gate index, pin)` of the driving gate; `None` for primary inputs.
    pub driver: Option<(usize, &'static str)>,
    pub sinks: Vec<(usize, &'static str)>,
    pub is_input: bool,
    pub is_output: bool,
}

/// Resolved connectivity of a validated netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connectivity {
    pub nets: Vec<NetInfo>,
    pub net_index: HashMap<String, NetId>,
    pub gate_inputs: Vec<Vec<NetId>>,
    pub gate_output: Vec<NetId>,
    /// Gates in evaluation order; state elements first (their outputs act as sources).
    pub order: Vec<usize>,
}

fn syntax(line: usize, message: impl Into<String>) -> NetlistError {
    NetlistError::SyntaxError {
        line,
        message: message.into(),
    }
}

/// Parses and validates a netlist.
pub fn parse_netlist(text: &str) -> Result<Netlist, NetlistError> {
    let mut name: Option<String> = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    let mut ended = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if ended {
            return Err(syntax(line, "content after .end"));
        }
        let mut words = content.split_whitespace();
        let directive = words.next().unwrap_or_default();
        match directive {
            ".model" => {
                if name.is_some() {
                    return Err(syntax(line, "duplicate .model"));
                }
                let n = words.next().ok_or_else(|| syntax(line, ".model needs a name"))?;
                if words.next().is_some() {
                    return Err(syntax(line, ".model takes one name"));
                }
                name = Some(n.to_string());
            }
            ".inputs" => inputs.extend(words.map(str::to_string)),
            ".outputs" => outputs.extend(words.map(str::to_string)),
            ".gate" => {
                let kind_name = words.next().ok_or_else(|| syntax(line, ".gate needs a cell"))?;
                let kind: CellKind = kind_name
                    .parse()
                    .map_err(|_| NetlistError::UnknownCell(kind_name.to_string()))?;
                let template = get_template(kind);
                let mut pins = BTreeMap::new();
                for w in words {
                    let (pin, net) = w
                        .split_once('=')
                        .ok_or_else(|| syntax(line, format!("expected PIN=net, got `{w}`")))?;
                    match template.pins.get(pin) {
                        Some(p) if p.direction != PinDirection::Power => {}
                        _ => return Err(syntax(line, format!("{kind} has no signal pin `{pin}`"))),
                    }
                    if net.is_empty() {
                        return Err(syntax(line, format!("pin `{pin}` has an empty net")));
                    }
                    if pins.insert(pin.to_string(), net.to_string()).is_some() {
                        return Err(syntax(line, format!("pin `{pin}` bound twice")));
                    }
                }
                for (pin, p) in &template.pins {
                    if p.direction != PinDirection::Power && !pins.contains_key(pin) {
                        return Err(syntax(line, format!("{kind} pin `{pin}` unbound")));
                    }
                }
                gates.push(Gate {
                    id: format!("g{}", gates.len()),
                    kind,
                    pins,
                });
            }
            ".end" => {
                if words.next().is_some() {
                    return Err(syntax(line, ".end takes no arguments"));
                }
                ended = true;
            }
            other => return Err(syntax(line, format!("unknown directive `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| syntax(1, "missing .model"))?;
    if !ended {
        return Err(syntax(text.lines().count().max(1), "missing .end"));
    }
    let nl = Netlist {
        name,
        inputs,
        outputs,
        gates,
    };
    nl.connectivity()?;
    Ok(nl)
}

impl Netlist {
    /// Renders the netlist in the text format `parse_netlist` accepts.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, ".model {}", self.name);
        let _ = writeln!(s, ".inputs {}", self.inputs.join(" "));
        let _ = writeln!(s, ".outputs {}", self.outputs.join(" "));
        for g in &self.gates {
            let _ = write!(s, ".gate {}", g.kind);
            for (pin, net) in &g.pins {
                let _ = write!(s, " {pin}={net}");
            }
            s.push('\n');
        }
        s.push_str(".end\n");
        s
    }

    pub fn gate_index(&self, id: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.id == id)
    }

    /// Resolves nets and checks the structural invariants.
    pub fn connectivity(&self) -> Result<Connectivity, NetlistError> {
        let mut nets: Vec<NetInfo> = Vec::new();
        let mut net_index: HashMap<String, NetId> = HashMap::new();
        let mut intern = |name: &str, nets: &mut Vec<NetInfo>| -> NetId {
            if let Some(&i) = net_index.get(name) {
                return i;
            }
            nets.push(NetInfo {
                name: name.to_string(),
                driver: None,
                sinks: Vec::new(),
                is_input: false,
                is_output: false,
            });
            net_index.insert(name.to_string(), nets.len() - 1);
            nets.len() - 1
        };
        for i in &self.inputs {
            let id = intern(i, &mut nets);
            if nets[id].is_input {
                return Err(NetlistError::DuplicateDriver(i.clone()));
            }
            nets[id].is_input = true;
        }
        let mut gate_inputs = Vec::with_capacity(self.gates.len());
        let mut gate_output = Vec::with_capacity(self.gates.len());
        for (gi, g) in self.gates.iter().enumerate() {
            let out_pin = g.output_pin();
            let out = intern(&g.pins[out_pin], &mut nets);
            if nets[out].is_input || nets[out].driver.is_some() {
                return Err(NetlistError::DuplicateDriver(nets[out].name.clone()));
            }
            nets[out].driver = Some((gi, out_pin));
            gate_output.push(out);
            let mut ins = Vec::new();
            for pin in g.input_pins() {
                let n = intern(&g.pins[pin], &mut nets);
                nets[n].sinks.push((gi, pin));
                ins.push(n);
            }
            gate_inputs.push(ins);
        }
        for o in &self.outputs {
            let id = intern(o, &mut nets);
            nets[id].is_output = true;
        }
        for n in &nets {
            if !n.is_input && n.driver.is_none() {
                return Err(NetlistError::UndrivenNet(n.name.clone()));
            }
        }
        let order = self.topological_order(&nets, &gate_inputs, &gate_output)?;
        Ok(Connectivity {
            nets,
            net_index,
            gate_inputs,
            gate_output,
            order,
        })
    }

    fn topological_order(
        &self,
        nets: &[NetInfo],
        gate_inputs: &[Vec<NetId>],
        driven: &[NetId],
    ) -> Result<Vec<usize>, NetlistError> {
        // A net is "ready" when it is a primary input or driven by a state element.
        let n = self.gates.len();
        let mut order: Vec<usize> = (0..n).filter(|&g| self.gates[g].kind.is_state_element()).collect();
        let mut pending = vec![0usize; n];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); nets.len()];
        for (g, ins) in gate_inputs.iter().enumerate() {
            if self.gates[g].kind.is_state_element() {
                continue;
            }
            for &net in ins {
                let from_comb = nets[net]
                    .driver
                    .map(|(d, _)| !self.gates[d].kind.is_state_element())
                    .unwrap_or(false);
                if from_comb {
                    pending[g] += 1;
                    fanout[net].push(g);
                }
            }
        }
        let mut queue: std::collections::VecDeque<usize> = (0..n)
            .filter(|&g| !self.gates[g].kind.is_state_element() && pending[g] == 0)
            .collect();
        while let Some(g) = queue.pop_front() {
            order.push(g);
            for &succ in &fanout[driven[g]] {
                pending[succ] -= 1;
                if pending[succ] == 0 {
                    queue.push_back(succ);
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        // Report one cycle among the remaining gates by walking back along drivers.
        let stuck: Vec<usize> = (0..n).filter(|&g| pending[g] > 0).collect();
        let mut g = stuck[0];
        let mut seen: Vec<usize> = Vec::new();
        loop {
            if let Some(pos) = seen.iter().position(|&s| s == g) {
                let mut cycle: Vec<String> = seen[pos..]
                    .iter()
                    .rev()
                    .map(|&s| nets[driven[s]].name.clone())
                    .collect();
                cycle.push(cycle[0].clone());
                return Err(NetlistError::CombinationalCycle(cycle));
            }
            seen.push(g);
            let next = gate_inputs[g]
                .iter()
                .filter_map(|&net| nets[net].driver.map(|d| d.0))
                .find(|&d| pending[d] > 0)
                .expect("stuck gate has a stuck predecessor");
            g = next;
        }
    }
}

/// Incremental netlist construction used by the generators.
struct Builder {
    nl: Netlist,
    next_net: usize,
}

impl Builder {
    fn new(name: &str) -> Self {
        Self {
            nl: Netlist {
                name: name.to_string(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                gates: Vec::new(),
            },
            next_net: 0,
        }
    }

    fn fresh(&mut self) -> String {
        self.next_net += 1;
        format!("n{}", self.next_net)
    }

    fn gate(&mut self, kind: CellKind, ins: &[&str], out: Option<&str>) -> String {
        let out = out.map(str::to_string).unwrap_or_else(|| self.fresh());
        let mut pins = BTreeMap::new();
        let names = ["A", "B", "C", "D"];
        for (i, n) in ins.iter().enumerate() {
            pins.insert(names[i].to_string(), n.to_string());
        }
        pins.insert("Y".to_string(), out.clone());
        self.nl.gates.push(Gate {
            id: format!("g{}", self.nl.gates.len()),
            kind,
            pins,
        });
        out
    }

    fn nand(&mut self, a: &str, b: &str, out: Option<&str>) -> String {
        self.gate(CellKind::Nand2, &[a, b], out)
    }

    fn inv(&mut self, a: &str, out: Option<&str>) -> String {
        self.gate(CellKind::Inv, &[a], out)
    }

    fn and(&mut self, a: &str, b: &str, out: Option<&str>) -> String {
        let t = self.nand(a, b, None);
        self.inv(&t, out)
    }

    /// Four-NAND exclusive-or; also returns the shared NAND(a, b) node.
    fn xor(&mut self, a: &str, b: &str, out: Option<&str>) -> (String, String) {
        let ab = self.nand(a, b, None);
        let l = self.nand(a, &ab, None);
        let r = self.nand(b, &ab, None);
        (self.nand(&l, &r, out), ab)
    }

    /// Returns `(sum, carry)`.
    fn half_adder(&mut self, a: &str, b: &str, sum: Option<&str>) -> (String, String) {
        let (s, ab) = self.xor(a, b, sum);
        let c = self.inv(&ab, None);
        (s, c)
    }

    /// Nine-NAND full adder; returns `(sum, carry)`.
    fn full_adder(&mut self, a: &str, b: &str, cin: &str, sum: Option<&str>, cout: Option<&str>) -> (String, String) {
        let (t, ab) = self.xor(a, b, None);
        let (s, tc) = self.xor(&t, cin, sum);
        let c = self.nand(&ab, &tc, cout);
        (s, c)
    }

    fn finish(self) -> Netlist {
        self.nl
    }
}

/// Ripple-carry array multiplier of two `bits`-wide operands.
///
/// Inputs are `a0..a{n-1}` and `b0..b{n-1}` (LSB first); outputs
/// `p0..p{2n-1}`. AND terms are NAND+INV, adders are expanded to NAND2/INV.
pub fn gen_multiplier(bits: usize) -> Netlist {
    assert!(bits >= 2, "multiplier needs at least 2 bits");
    let mut b = Builder::new(&format!("mult{bits}"));
    b.nl.inputs = (0..bits)
        .map(|i| format!("a{i}"))
        .chain((0..bits).map(|i| format!("b{i}")))
        .collect();
    b.nl.outputs = (0..2 * bits).map(|i| format!("p{i}")).collect();

    // partial products pp[i][j] = a_j & b_i
    let pp: Vec<Vec<String>> = (0..bits)
        .map(|i| {
            (0..bits)
                .map(|j| {
                    let out = if i == 0 && j == 0 { Some("p0".to_string()) } else { None };
                    b.and(&format!("a{j}"), &format!("b{i}"), out.as_deref())
                })
                .collect()
        })
        .collect();

    // acc holds the running upper bits: bit k of acc has weight 2^(row + k)
    let mut acc: Vec<String> = pp[0][1..].to_vec();
    let mut acc_top: Option<String> = None;
    for (row, pp_row) in pp.iter().enumerate().skip(1) {
        let mut next: Vec<String> = Vec::with_capacity(bits);
        let mut carry: Option<String> = None;
        for j in 0..bits {
            let upper = if j < bits - 1 { Some(acc[j].clone()) } else { acc_top.clone() };
            let last_row = row == bits - 1;
            let sum_name = if j == 0 {
                Some(format!("p{row}"))
            } else if last_row {
                Some(format!("p{}", row + j))
            } else {
                None
            };
            let cout_name = if last_row && j == bits - 1 {
                Some(format!("p{}", 2 * bits - 1))
            } else {
                None
            };
            let (s, c) = match (upper, carry.take()) {
                (Some(u), Some(c)) => {
                    b.full_adder(&u, &pp_row[j], &c, sum_name.as_deref(), cout_name.as_deref())
                }
                (Some(u), None) => b.half_adder(&u, &pp_row[j], sum_name.as_deref()),
                (None, Some(c)) => b.half_adder(&pp_row[j], &c, sum_name.as_deref()),
                (None, None) => unreachable!("row input without operands"),
            };
            next.push(s);
            carry = Some(c);
        }
        acc = next[1..].to_vec();
        acc_top = carry;
    }
    let nl = b.finish();
    debug_assert!(nl.connectivity().is_ok());
    nl
}

/// The two-gate benchmark used for hot-spot studies: gate 0 drives input A of
/// gate 1 and the two are meant to be stacked on one nanowire.
pub fn gen_stacked_pair(kind: CellKind) -> Netlist {
    let fan_in = get_template(kind)
        .pins
        .values()
        .filter(|p| p.direction == PinDirection::Input)
        .count();
    let mut b = Builder::new(&format!("stack_{}", kind.name().to_lowercase()));
    let lower: Vec<String> = (0..fan_in).map(|i| format!("x{i}")).collect();
    let upper: Vec<String> = (1..fan_in).map(|i| format!("z{i}")).collect();
    b.nl.inputs = lower.iter().chain(upper.iter()).cloned().collect();
    b.nl.outputs = vec!["y".to_string()];
    let lower_refs: Vec<&str> = lower.iter().map(String::as_str).collect();
    let mid = b.gate(kind, &lower_refs, Some("m"));
    let mut ins: Vec<&str> = vec![mid.as_str()];
    ins.extend(upper.iter().map(String::as_str));
    b.gate(kind, &ins, Some("y"));
    b.finish()
}
