//! Logic correctness of routed designs and of the simulator itself.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3dc::fabric::build_grid;
use s3dc::flow::CompileOptions;
use s3dc::placer::{placement_from_slots, Slot};
use s3dc::router::{congestion_report, route};
use s3dc::sim::{simulate, to_bits, Equivalence};
use s3dc::{parse_netlist, CellKind, FabricConfig, ResourceGraph};

use common::functional::*;
use common::netlists::random_netlist;

#[test]
fn simulator_agrees_with_recursive_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for k in 0..60 {
        let inputs = 2 + k % 6;
        let nl = random_netlist(&mut rng, 3 + k % 20, inputs);
        for v in 0..1u64 << inputs {
            let bits = to_bits(v, inputs);
            assert_eq!(simulate(&nl, &bits).unwrap(), reference_eval(&nl, &bits), "netlist {k}, vector {v}");
        }
    }
}

#[test]
fn routed_single_gates_match_truth_tables() {
    for kind in [CellKind::Inv, CellKind::Nand2, CellKind::Nand3, CellKind::Nand4, CellKind::Nor2, CellKind::Nor3] {
        routed_gate_truth_table(kind).unwrap();
    }
}

#[test]
fn routed_multiplier_multiplies() {
    assert_eq!(routed_multiplier_products().unwrap(), 256);
}

#[test]
fn sram_write_then_read() {
    sram_protocol().unwrap();
}

#[test]
fn exchanged_input_routes_are_caught() {
    assert!(matches!(swapped_routes_verdict(), Equivalence::Mismatch { .. }));
}

#[test]
fn random_routed_netlists_are_equivalent() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for k in 0..6 {
        let nl = random_netlist(&mut rng, 6 + 3 * k, 4);
        let out = s3dc::flow::compile(&nl, &FabricConfig::default(), &CompileOptions::default()).unwrap();
        assert_eq!(out.report.equivalence, Equivalence::Equivalent { vectors: 16, exhaustive: true });
    }
}

/// Four signals carried through one level of a 2x2 block: all wiring stays
/// in the level that hosts the cells.
#[test]
fn four_signals_on_one_level_stay_in_the_active_layer() {
    let nl = parse_netlist(
        ".model four\n.inputs a\n.outputs d\n.gate INV A=a Y=b\n.gate INV A=b Y=c\n.gate INV A=c Y=d\n.end",
    )
    .unwrap();
    let cfg = FabricConfig {
        grid_cols_x: 2,
        grid_cols_y: 2,
        gate_levels_per_wire: 1,
        ..FabricConfig::default()
    };
    let grid = build_grid(cfg.clone()).unwrap();
    let slots = vec![
        Slot { col_x: 0, col_y: 0, level: 0 },
        Slot { col_x: 1, col_y: 0, level: 0 },
        Slot { col_x: 1, col_y: 1, level: 0 },
    ];
    let placement = placement_from_slots(&nl, &grid, slots, 1).unwrap();
    let rd = route(&placement, &nl, std::sync::Arc::new(ResourceGraph::build(&cfg)), &Default::default()).unwrap();
    let names: Vec<&str> = rd.routes.iter().map(|r| r.net.as_str()).collect();
    for s in ["a", "b", "c", "d"] {
        assert!(names.contains(&s), "signal {s} missing from {names:?}");
    }
    let report = congestion_report(&rd);
    assert_eq!(report.in_active_layer_fraction, 1.0);
    assert!(report.total_wirelength_um > 0.0);
}
