//! Annealing placement against exhaustive enumeration, the greedy start and
//! itself under a fixed seed.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use s3dc::placer::{place, place_multistart, placement_from_slots, PlaceOptions, Slot};
use s3dc::{build_grid, FabricConfig, NanowireGrid, Netlist};

use common::netlists::random_netlist;

fn grid(x: usize, y: usize, levels: usize) -> NanowireGrid {
    build_grid(FabricConfig {
        grid_cols_x: x,
        grid_cols_y: y,
        gate_levels_per_wire: levels,
        ..FabricConfig::default()
    })
    .unwrap()
}

fn all_slots(g: &NanowireGrid) -> Vec<Slot> {
    let mut out = Vec::new();
    for col_y in 0..g.cols_y() {
        for col_x in 0..g.cols_x() {
            for level in 0..g.levels() {
                out.push(Slot { col_x, col_y, level });
            }
        }
    }
    out
}

/// Smallest cost over every injective gate-to-slot assignment.
fn exhaustive_optimum(netlist: &Netlist, g: &NanowireGrid) -> f64 {
    fn rec(
        netlist: &Netlist,
        g: &NanowireGrid,
        slots: &[Slot],
        used: &mut Vec<bool>,
        chosen: &mut Vec<Slot>,
        best: &mut f64,
    ) {
        if chosen.len() == netlist.gates.len() {
            let p = placement_from_slots(netlist, g, chosen.clone(), 0).unwrap();
            *best = best.min(p.cost_um);
            return;
        }
        for i in 0..slots.len() {
            if !used[i] {
                used[i] = true;
                chosen.push(slots[i]);
                rec(netlist, g, slots, used, chosen, best);
                chosen.pop();
                used[i] = false;
            }
        }
    }
    let slots = all_slots(g);
    let mut best = f64::INFINITY;
    rec(netlist, g, &slots, &mut vec![false; slots.len()], &mut Vec::new(), &mut best);
    best
}

#[test]
fn two_connected_inverters_share_a_column() {
    let nl = s3dc::parse_netlist(".model p\n.inputs a\n.outputs y\n.gate INV A=a Y=m\n.gate INV A=m Y=y\n.end").unwrap();
    let g = grid(1, 1, 2);
    let p = place(&nl, &g, &PlaceOptions::default()).unwrap();
    assert_eq!(p.assignment[0].col_x, p.assignment[1].col_x);
    assert_ne!(p.assignment[0].level, p.assignment[1].level);
    assert!((p.cost_um - exhaustive_optimum(&nl, &g)).abs() < 1e-12);
}

#[test]
fn high_effort_annealing_reaches_the_exhaustive_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let shapes = [(2, 2, 2), (1, 2, 2), (2, 1, 2), (1, 3, 2), (2, 2, 1)];
    for k in 0..20 {
        let (x, y, l) = shapes[k % shapes.len()];
        let g = grid(x, y, l);
        let slots = x * y * l;
        let gates = 2 + k % (slots.min(6) - 1);
        let nl = random_netlist(&mut rng, gates, 3);
        let optimum = exhaustive_optimum(&nl, &g);
        let p = place(&nl, &g, &PlaceOptions { seed: k as u64, effort: 64.0 }).unwrap();
        assert!(
            (p.cost_um - optimum).abs() <= 1e-9 * optimum.max(1.0),
            "case {k}: annealed {} vs optimum {optimum}",
            p.cost_um
        );
    }
}

#[test]
fn annealing_never_worsens_the_greedy_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let g = grid(4, 4, 2);
    for k in 0..50 {
        let nl = random_netlist(&mut rng, 5 + k % 25, 4);
        let p = place(&nl, &g, &PlaceOptions { seed: k as u64, effort: 2.0 }).unwrap();
        assert!(p.cost_um <= p.greedy_cost_um, "case {k}: {} > {}", p.cost_um, p.greedy_cost_um);
    }
}

#[test]
fn same_seed_same_placement() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let nl = random_netlist(&mut rng, 24, 5);
    let g = grid(4, 4, 2);
    let opts = PlaceOptions { seed: 99, effort: 4.0 };
    let a = place(&nl, &g, &opts).unwrap();
    let b = place(&nl, &g, &opts).unwrap();
    assert_eq!(a.dump(), b.dump());
    assert_eq!(a.cost_um.to_bits(), b.cost_um.to_bits());
    let m1 = place_multistart(&nl, &g, &[3, 1, 2], 2.0).unwrap();
    let m2 = place_multistart(&nl, &g, &[2, 3, 1], 2.0).unwrap();
    assert_eq!(m1.dump(), m2.dump());
}

