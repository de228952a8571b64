//! Slot assignment by simulated annealing over 3D half-perimeter wirelength.
//!
//! A slot is one gate level of one column; each column can stack
//! `gate_levels_per_wire` cells.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::cells::{get_template, instantiate, PlaceError, PlacedCell};
use crate::config::FabricConfig;
use crate::fabric::{GridCoord, NanowireGrid};
use crate::netlist::{Netlist, NetlistError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Slot {
    pub col_x: usize,
    pub col_y: usize,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlacerError {
    #[error("capacity exceeded: {needed} cells, {available} slots")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("cell {cell}: {source}")]
    Cell {
        cell: String,
        #[source]
        source: PlaceError,
    },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("cell {0} has no slot")]
    MissingSlot(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaceOptions {
    pub seed: u64,
    /// Moves per temperature step, as a multiple of the cell count.
    pub effort: f64,
}

impl Default for PlaceOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            effort: 8.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    /// Slot of each gate, indexed like `Netlist::gates`.
    pub assignment: Vec<Slot>,
    pub ids: Vec<String>,
    /// Grid with every cell instantiated.
    pub grid: NanowireGrid,
    pub cells: Vec<PlacedCell>,
    pub seed: u64,
    pub greedy_cost_um: f64,
    pub cost_um: f64,
}

impl Placement {
    /// One line per instance, `id col_x col_y level`, ordered by id.
    pub fn dump(&self) -> String {
        let mut rows: Vec<(&String, &Slot)> = self.ids.iter().zip(&self.assignment).collect();
        rows.sort_by(|a, b| natural_key(a.0).cmp(&natural_key(b.0)));
        let mut s = String::new();
        for (id, slot) in rows {
            let _ = writeln!(s, "{} {} {} {}", id, slot.col_x, slot.col_y, slot.level);
        }
        s
    }

    pub fn gate_count(&self) -> usize {
        self.assignment.len()
    }
}

/// Sort key that orders `g2` before `g10`.
fn natural_key(id: &str) -> (String, u64, String) {
    let digits_at = id.find(|c: char| c.is_ascii_digit()).unwrap_or(id.len());
    let (head, tail) = id.split_at(digits_at);
    let num_end = tail.find(|c: char| !c.is_ascii_digit()).unwrap_or(tail.len());
    let num = tail[..num_end].parse().unwrap_or(0);
    (head.to_string(), num, tail[num_end..].to_string())
}

/// Nets as lists of distinct gate indices (primary I/O have no location).
fn gate_nets(netlist: &Netlist) -> Result<Vec<Vec<usize>>, NetlistError> {
    let conn = netlist.connectivity()?;
    Ok(conn
        .nets
        .iter()
        .map(|n| {
            let mut g: Vec<usize> = n
                .driver
                .iter()
                .map(|d| d.0)
                .chain(n.sinks.iter().map(|s| s.0))
                .collect();
            g.sort_unstable();
            g.dedup();
            g
        })
        .filter(|g| g.len() >= 2)
        .collect())
}

struct CostModel {
    pitch_um: f64,
    level_um: f64,
}

impl CostModel {
    fn new(cfg: &FabricConfig) -> Self {
        Self {
            pitch_um: cfg.pitch_um(),
            level_um: cfg.level_height_um(),
        }
    }

    fn net(&self, gates: &[usize], slots: &[Slot]) -> f64 {
        let s0 = slots[gates[0]];
        let (mut x0, mut x1, mut y0, mut y1, mut l0, mut l1) =
            (s0.col_x, s0.col_x, s0.col_y, s0.col_y, s0.level, s0.level);
        for &g in &gates[1..] {
            let s = slots[g];
            x0 = x0.min(s.col_x);
            x1 = x1.max(s.col_x);
            y0 = y0.min(s.col_y);
            y1 = y1.max(s.col_y);
            l0 = l0.min(s.level);
            l1 = l1.max(s.level);
        }
        ((x1 - x0) + (y1 - y0)) as f64 * self.pitch_um + (l1 - l0) as f64 * self.level_um
    }

    fn total(&self, nets: &[Vec<usize>], slots: &[Slot]) -> f64 {
        nets.iter().fold(0.0, |acc, n| acc + self.net(n, slots))
    }
}

/// Total 3D half-perimeter wirelength in micrometers.
pub fn hpwl(placement: &Placement, netlist: &Netlist, config: &FabricConfig) -> f64 {
    let nets = gate_nets(netlist).expect("placement exists only for valid netlists");
    CostModel::new(config).total(&nets, &placement.assignment)
}

/// Free slots of a grid in serpentine column order, levels stacked per column.
fn free_slots(grid: &NanowireGrid) -> Vec<Slot> {
    let mut out = Vec::new();
    for y in 0..grid.cols_y() {
        for i in 0..grid.cols_x() {
            let x = if y % 2 == 0 { i } else { grid.cols_x() - 1 - i };
            if grid.is_reserved(x, y) {
                continue;
            }
            for level in 0..grid.levels() {
                out.push(Slot {
                    col_x: x,
                    col_y: y,
                    level,
                });
            }
        }
    }
    out
}

/// Builds a placement from explicit slots, instantiating every cell.
pub fn placement_from_slots(
    netlist: &Netlist,
    grid: &NanowireGrid,
    assignment: Vec<Slot>,
    seed: u64,
) -> Result<Placement, PlacerError> {
    if assignment.len() != netlist.gates.len() {
        let missing = netlist.gates[assignment.len().min(netlist.gates.len().saturating_sub(1))]
            .id
            .clone();
        return Err(PlacerError::MissingSlot(missing));
    }
    let mut grid = grid.clone();
    let mut cells = Vec::with_capacity(assignment.len());
    for (i, (g, s)) in netlist.gates.iter().zip(&assignment).enumerate() {
        let pc = instantiate(
            &get_template(g.kind),
            GridCoord::new(s.col_x, s.col_y, s.level, 0),
            &mut grid,
            i as u32,
        )
        .map_err(|source| PlacerError::Cell {
            cell: g.id.clone(),
            source,
        })?;
        cells.push(pc);
    }
    let nets = gate_nets(netlist)?;
    let cost = CostModel::new(grid.config()).total(&nets, &assignment);
    Ok(Placement {
        ids: netlist.gates.iter().map(|g| g.id.clone()).collect(),
        assignment,
        grid,
        cells,
        seed,
        greedy_cost_um: cost,
        cost_um: cost,
    })
}

/// Places every gate of `netlist` on a free slot of `grid`.
pub fn place(
    netlist: &Netlist,
    grid: &NanowireGrid,
    options: &PlaceOptions,
) -> Result<Placement, PlacerError> {
    let slots = free_slots(grid);
    let n = netlist.gates.len();
    if n > slots.len() {
        return Err(PlacerError::CapacityExceeded {
            needed: n,
            available: slots.len(),
        });
    }
    let nets = gate_nets(netlist)?;
    let model = CostModel::new(grid.config());

    // greedy: netlist order along the serpentine, stacking levels first
    let mut slot_of: Vec<usize> = (0..n).collect();
    let greedy: Vec<Slot> = slot_of.iter().map(|&i| slots[i]).collect();
    let greedy_cost = model.total(&nets, &greedy);

    let mut best = slot_of.clone();
    let mut best_cost = greedy_cost;
    if n >= 2 && !nets.is_empty() {
        let annealed = anneal(&nets, &slots, &mut slot_of, &model, grid, options);
        if annealed < best_cost {
            best_cost = annealed;
            best = slot_of;
        }
    }
    let assignment: Vec<Slot> = best.iter().map(|&i| slots[i]).collect();
    let mut p = placement_from_slots(netlist, grid, assignment, options.seed)?;
    p.greedy_cost_um = greedy_cost;
    p.cost_um = best_cost;
    Ok(p)
}

/// Runs independent seeds concurrently and keeps the best by `(cost, seed)`.
pub fn place_multistart(
    netlist: &Netlist,
    grid: &NanowireGrid,
    seeds: &[u64],
    effort: f64,
) -> Result<Placement, PlacerError> {
    let results: Vec<Result<Placement, PlacerError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| scope.spawn(move || place(netlist, grid, &PlaceOptions { seed, effort })))
            .collect();
        handles.into_iter().map(|h| h.join().expect("placer thread panicked")).collect()
    });
    let mut best: Option<Placement> = None;
    for r in results {
        let p = r?;
        let better = match &best {
            None => true,
            Some(b) => (p.cost_um, p.seed) < (b.cost_um, b.seed),
        };
        if better {
            best = Some(p);
        }
    }
    best.ok_or(PlacerError::CapacityExceeded {
        needed: netlist.gates.len(),
        available: 0,
    })
}

/// Anneals `slot_of` in place and returns its final cost. The best state seen
/// is left in `slot_of`.
fn anneal(
    nets: &[Vec<usize>],
    slots: &[Slot],
    slot_of: &mut [usize],
    model: &CostModel,
    grid: &NanowireGrid,
    options: &PlaceOptions,
) -> f64 {
    let n = slot_of.len();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut nets_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, net) in nets.iter().enumerate() {
        for &g in net {
            nets_of[g].push(i);
        }
    }
    let mut occupant: Vec<Option<usize>> = vec![None; slots.len()];
    for (g, &s) in slot_of.iter().enumerate() {
        occupant[s] = Some(g);
    }
    // slot index lookup by (x, y, level)
    let (xs, ys, ls) = (grid.cols_x(), grid.cols_y(), grid.levels());
    let mut slot_at = vec![usize::MAX; xs * ys * ls];
    for (i, s) in slots.iter().enumerate() {
        slot_at[(s.col_y * xs + s.col_x) * ls + s.level] = i;
    }
    let mut pos: Vec<Slot> = slot_of.iter().map(|&i| slots[i]).collect();

    let mut touched: Vec<usize> = Vec::new();
    let mut mark = vec![0u32; nets.len()];
    let mut stamp = 0u32;
    let mut affected = |a: usize, b: Option<usize>, touched: &mut Vec<usize>| {
        stamp = stamp.wrapping_add(1);
        touched.clear();
        for g in std::iter::once(a).chain(b) {
            for &net in &nets_of[g] {
                if mark[net] != stamp {
                    mark[net] = stamp;
                    touched.push(net);
                }
            }
        }
    };

    let mut current = model.total(nets, &pos);
    let mut best_cost = current;
    let mut best = slot_of.to_vec();

    // proposes a random target slot within `radius` columns of gate g
    let propose = |rng: &mut ChaCha8Rng, g: usize, radius: usize, pos: &[Slot]| -> Option<usize> {
        let p = pos[g];
        let lo_x = p.col_x.saturating_sub(radius);
        let hi_x = (p.col_x + radius).min(xs - 1);
        let lo_y = p.col_y.saturating_sub(radius);
        let hi_y = (p.col_y + radius).min(ys - 1);
        let x = rng.gen_range(lo_x..=hi_x);
        let y = rng.gen_range(lo_y..=hi_y);
        let l = rng.gen_range(0..ls);
        let s = slot_at[(y * xs + x) * ls + l];
        (s != usize::MAX).then_some(s)
    };

    let full_radius = xs.max(ys);
    // initial temperature from the mean uphill step of random moves
    let mut uphill = 0.0;
    let mut uphill_count = 0usize;
    for _ in 0..(20 * n).min(2000) {
        let g = rng.gen_range(0..n);
        let Some(s) = propose(&mut rng, g, full_radius, &pos) else { continue };
        let other = occupant[s];
        if other == Some(g) {
            continue;
        }
        affected(g, other, &mut touched);
        let before: f64 = touched.iter().map(|&i| model.net(&nets[i], &pos)).sum();
        let old = pos[g];
        pos[g] = slots[s];
        if let Some(h) = other {
            pos[h] = old;
        }
        let after: f64 = touched.iter().map(|&i| model.net(&nets[i], &pos)).sum();
        pos[g] = old;
        if let Some(h) = other {
            pos[h] = slots[s];
        }
        if after > before {
            uphill += after - before;
            uphill_count += 1;
        }
    }
    // with no uphill sample the schedule still needs a scale to walk plateaus
    let t0 = if uphill_count == 0 {
        model.pitch_um.min(model.level_um)
    } else {
        2.0 * uphill / uphill_count as f64
    };
    let t_end = t0 * 1e-4;
    let mut t = t0;
    let moves_per_temp = ((options.effort * n as f64).ceil() as usize).max(1);
    let cooling = 0.9;

    while t > t_end {
        let frac = (t / t0).sqrt();
        let radius = ((full_radius as f64 * frac).ceil() as usize).max(1);
        for _ in 0..moves_per_temp {
            let g = rng.gen_range(0..n);
            let Some(s) = propose(&mut rng, g, radius, &pos) else { continue };
            let other = occupant[s];
            if other == Some(g) {
                continue;
            }
            affected(g, other, &mut touched);
            let before: f64 = touched.iter().map(|&i| model.net(&nets[i], &pos)).sum();
            let old_slot = slot_of[g];
            let old = pos[g];
            pos[g] = slots[s];
            if let Some(h) = other {
                pos[h] = old;
            }
            let after: f64 = touched.iter().map(|&i| model.net(&nets[i], &pos)).sum();
            let delta = after - before;
            let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / t).exp();
            if accept {
                slot_of[g] = s;
                occupant[s] = Some(g);
                occupant[old_slot] = other;
                if let Some(h) = other {
                    slot_of[h] = old_slot;
                }
                current += delta;
            } else {
                pos[g] = old;
                if let Some(h) = other {
                    pos[h] = slots[s];
                }
            }
            if current < best_cost - 1e-12 {
                // re-evaluate exactly before trusting the running sum
                let exact = model.total(nets, &pos);
                current = exact;
                if exact < best_cost {
                    best_cost = exact;
                    best.copy_from_slice(slot_of);
                }
            }
        }
        current = model.total(nets, &pos);
        t *= cooling;
    }
    slot_of.copy_from_slice(&best);
    best_cost
}
