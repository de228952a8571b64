//! Random tiny routing instances and an exhaustive disjoint-path oracle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3dc::fabric::ResourceGraph;
use s3dc::router::{check_solution, route_problem, RouteOptions, RoutingProblem};
use s3dc::FabricConfig;

pub struct Instance {
    pub graph: ResourceGraph,
    pub blocked: Vec<bool>,
    pub nets: Vec<(u32, u32)>,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let cfg = FabricConfig {
        grid_cols_x: rng.gen_range(1..=3),
        grid_cols_y: rng.gen_range(1..=3),
        gate_levels_per_wire: rng.gen_range(1..=2),
        segments_per_gate_level: rng.gen_range(2..=3),
        coax_shells: rng.gen_range(0..=1),
        ..FabricConfig::default()
    };
    let graph = ResourceGraph::build(&cfg);
    let n = graph.node_count();
    let density = rng.gen_range(0.25..0.55);
    let blocked: Vec<bool> = (0..n).map(|_| rng.gen_bool(density)).collect();
    let mut free: Vec<u32> = (0..n as u32).filter(|&v| !blocked[v as usize]).collect();
    let mut nets = Vec::new();
    let want = rng.gen_range(1..=3);
    while nets.len() < want && free.len() >= 2 {
        let a = free.swap_remove(rng.gen_range(0..free.len()));
        let b = free.swap_remove(rng.gen_range(0..free.len()));
        nets.push((a, b));
    }
    Instance { graph, blocked, nets }
}

/// Depth-first search over simple paths; `None` when the budget runs out.
struct Oracle<'a> {
    inst: &'a Instance,
    used: Vec<bool>,
    terminal_of: Vec<Option<usize>>,
    budget: u64,
}

impl Oracle<'_> {
    fn solve(inst: &Instance) -> Option<bool> {
        let mut terminal_of = vec![None; inst.graph.node_count()];
        for (i, &(a, b)) in inst.nets.iter().enumerate() {
            terminal_of[a as usize] = Some(i);
            terminal_of[b as usize] = Some(i);
        }
        let mut o = Oracle {
            inst,
            used: vec![false; inst.graph.node_count()],
            terminal_of,
            budget: 3_000_000,
        };
        o.net(0)
    }

    fn net(&mut self, i: usize) -> Option<bool> {
        let Some(&(s, t)) = self.inst.nets.get(i) else {
            return Some(true);
        };
        self.used[s as usize] = true;
        let r = self.extend(i, s, t);
        self.used[s as usize] = false;
        r
    }

    fn extend(&mut self, i: usize, v: u32, t: u32) -> Option<bool> {
        if self.budget == 0 {
            return None;
        }
        self.budget -= 1;
        if v == t {
            return self.net(i + 1);
        }
        for &u in self.inst.graph.neighbors(v) {
            let k = u as usize;
            if self.used[k] || self.inst.blocked[k] || self.terminal_of[k].is_some_and(|owner| owner != i) {
                continue;
            }
            self.used[k] = true;
            let r = self.extend(i, u, t);
            self.used[k] = false;
            if r != Some(false) {
                return r;
            }
        }
        Some(false)
    }
}

fn router_succeeds(inst: &Instance, seed: u64) -> bool {
    let mut problem = RoutingProblem::new(&inst.graph);
    for (v, &b) in inst.blocked.iter().enumerate() {
        if b {
            problem.block(v as u32);
        }
    }
    for (i, &(a, b)) in inst.nets.iter().enumerate() {
        problem.add_net(&format!("n{i}"), vec![vec![a], vec![b]]).expect("distinct terminals");
    }
    let cfg = FabricConfig::default();
    match route_problem(&inst.graph, &problem, &cfg.cost, &RouteOptions { seed, max_iters: 60 }) {
        Ok(sol) => {
            let violations = check_solution(&inst.graph, &problem, &sol.routes);
            assert!(violations.is_empty(), "router returned an illegal solution: {violations:?}");
            true
        }
        Err(_) => false,
    }
}

/// Runs the comparison on `count` decidable instances. Returns the number of
/// agreements, the number of feasible instances and a line per disagreement.
pub fn compare_on_random_instances(count: usize, seed: u64) -> (usize, usize, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut agree, mut feasible, mut disagreements) = (0, 0, Vec::new());
    let mut done = 0;
    while done < count {
        let inst = random_instance(&mut rng);
        if inst.nets.is_empty() {
            continue;
        }
        let Some(expected) = Oracle::solve(&inst) else { continue };
        done += 1;
        let got = router_succeeds(&inst, done as u64);
        feasible += usize::from(expected);
        if got == expected {
            agree += 1;
        } else {
            disagreements.push(format!("instance {done}: oracle {expected}, router {got}, nets {:?}", inst.nets));
        }
    }
    (agree, feasible, disagreements)
}
