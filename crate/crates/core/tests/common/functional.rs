//! Routed-design checks that compare extracted connectivity with reference logic.

use std::collections::HashMap;

use s3dc::flow::{route_netlist, CompileOptions};
use s3dc::netlist::gen_multiplier;
use s3dc::router::RoutedDesign;
use s3dc::sim::{equivalence_check, extract, from_bits, simulate, sram_step, to_bits, Equivalence, SramOp, SramState};
use s3dc::{parse_netlist, CellKind, FabricConfig, Netlist};

/// Evaluates a netlist by recursive descent from each output, independent of
/// the levelized simulator.
pub fn reference_eval(netlist: &Netlist, inputs: &[bool]) -> Vec<bool> {
    fn value(net: &str, nl: &Netlist, known: &mut HashMap<String, bool>) -> bool {
        if let Some(&v) = known.get(net) {
            return v;
        }
        let gate = nl
            .gates
            .iter()
            .find(|g| g.output_net() == net)
            .unwrap_or_else(|| panic!("net {net} has no driver"));
        let ins: Vec<bool> = gate.input_pins().iter().map(|p| value(&gate.pins[*p], nl, known)).collect();
        let v = match gate.kind {
            CellKind::Inv => !ins[0],
            CellKind::Nand2 | CellKind::Nand3 | CellKind::Nand4 => !ins.iter().all(|&b| b),
            CellKind::Nor2 | CellKind::Nor3 => !ins.iter().any(|&b| b),
            CellKind::Sram6t => panic!("state element in a combinational reference"),
        };
        known.insert(net.to_string(), v);
        v
    }
    let mut known: HashMap<String, bool> = netlist.inputs.iter().cloned().zip(inputs.iter().copied()).collect();
    netlist.outputs.iter().map(|o| value(o, netlist, &mut known)).collect()
}

pub fn route_default(netlist: &Netlist) -> RoutedDesign {
    route_netlist(netlist, &FabricConfig::default(), &CompileOptions::default())
        .expect("benchmark routes")
        .1
}

pub fn single_gate(kind: CellKind) -> Netlist {
    let pins = ["A", "B", "C", "D"];
    let n = match kind {
        CellKind::Inv => 1,
        CellKind::Nand2 | CellKind::Nor2 => 2,
        CellKind::Nand3 | CellKind::Nor3 => 3,
        CellKind::Nand4 => 4,
        CellKind::Sram6t => panic!("not combinational"),
    };
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let conns: Vec<String> = names.iter().zip(pins).map(|(x, p)| format!("{p}={x}")).collect();
    parse_netlist(&format!(
        ".model {}\n.inputs {}\n.outputs y\n.gate {} {} Y=y\n.end\n",
        kind.name().to_lowercase(),
        names.join(" "),
        kind.name(),
        conns.join(" ")
    ))
    .expect("valid single-gate netlist")
}

/// Routes one gate and checks every input vector of the extracted design
/// against the gate's truth table. Returns the number of vectors checked.
pub fn routed_gate_truth_table(kind: CellKind) -> Result<usize, String> {
    let nl = single_gate(kind);
    let rd = route_default(&nl);
    let got = extract(&nl, &rd).map_err(|e| e.to_string())?;
    let n = nl.inputs.len();
    for v in 0..1u64 << n {
        let bits = to_bits(v, n);
        let expected = match kind {
            CellKind::Inv => !bits[0],
            CellKind::Nor2 | CellKind::Nor3 => !bits.iter().any(|&b| b),
            _ => !bits.iter().all(|&b| b),
        };
        let out = simulate(&got, &bits).map_err(|e| e.to_string())?;
        if out != vec![expected] {
            return Err(format!("{kind}: vector {bits:?} gave {out:?}"));
        }
    }
    Ok(1 << n)
}

/// Routes the 4-bit multiplier and checks the extracted design computes a*b
/// for every operand pair.
pub fn routed_multiplier_products() -> Result<usize, String> {
    let nl = gen_multiplier(4);
    let rd = route_default(&nl);
    let got = extract(&nl, &rd).map_err(|e| e.to_string())?;
    for a in 0..16u64 {
        for b in 0..16u64 {
            let out = simulate(&got, &to_bits(a | b << 4, 8)).map_err(|e| e.to_string())?;
            if from_bits(&out) != a * b {
                return Err(format!("{a} * {b} gave {}", from_bits(&out)));
            }
        }
    }
    Ok(256)
}

/// Write-then-read for both bit values and 100 back-to-back reads.
pub fn sram_protocol() -> Result<(), String> {
    let cfg = FabricConfig::default();
    for start in [false, true] {
        for bit in [false, true] {
            let s = SramState::new(start, &cfg);
            let (mut s, _) = sram_step(s, SramOp::write(bit, &cfg)).map_err(|e| e.to_string())?;
            for k in 0..100 {
                let (next, out) = sram_step(s, SramOp::read(&cfg)).map_err(|e| e.to_string())?;
                if out != Some(bit) || next.stored != bit {
                    return Err(format!("read {k} after writing {bit} returned {out:?}"));
                }
                s = next;
            }
        }
    }
    Ok(())
}

/// INV(a) feeding NAND2(x, b) with the routes of `a` and `b` exchanged.
pub fn swapped_routes_verdict() -> Equivalence {
    let nl = parse_netlist(".model swap\n.inputs a b\n.outputs y\n.gate INV A=a Y=x\n.gate NAND2 A=x B=b Y=y\n.end")
        .expect("valid");
    let mut rd = route_default(&nl);
    assert_eq!(equivalence_check(&nl, &rd, 1 << 20).expect("extracts"), Equivalence::Equivalent {
        vectors: 4,
        exhaustive: true
    });
    let ia = rd.routes.iter().position(|r| r.net == "a").expect("net a routed");
    let ib = rd.routes.iter().position(|r| r.net == "b").expect("net b routed");
    let (na, nb) = (rd.routes[ia].net.clone(), rd.routes[ib].net.clone());
    rd.routes[ia].net = nb;
    rd.routes[ib].net = na;
    equivalence_check(&nl, &rd, 1 << 20).expect("still extracts")
}
