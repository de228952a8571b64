//! Random thermal networks and a dense reference solver.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use s3dc::thermal::{solve_steady_state, NodeKind, ThermalNetwork};

/// A connected random network: a spanning tree plus extra links, one or two
/// fixed-temperature nodes and sources on a random subset of the rest.
pub fn random_network(rng: &mut ChaCha8Rng, max_nodes: usize) -> ThermalNetwork {
    let n = rng.gen_range(3..=max_nodes);
    let mut net = ThermalNetwork::default();
    let boundaries = if n > 4 && rng.gen_bool(0.3) { 2 } else { 1 };
    for i in 0..n {
        let kind = if i < boundaries { NodeKind::Ambient } else { NodeKind::Site };
        net.add_node(kind, format!("n{i}"));
    }
    for i in 0..boundaries {
        net.set_boundary(i, 300.0 + 50.0 * i as f64);
    }
    for i in 1..n {
        let j = rng.gen_range(0..i);
        net.connect(i, j, 10f64.powf(rng.gen_range(-7.0..-3.0)));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            net.connect(a, b, 10f64.powf(rng.gen_range(-7.0..-3.0)));
        }
    }
    for i in boundaries..n {
        if rng.gen_bool(0.4) {
            net.add_source(i, rng.gen_range(0.0..1e-4));
        }
    }
    net
}

/// Gaussian elimination with partial pivoting on the full nodal system.
pub fn dense_solve(net: &ThermalNetwork) -> Vec<f64> {
    let n = net.node_count();
    let mut a = vec![vec![0.0; n + 1]; n];
    for i in 0..n {
        if let Some(t) = net.boundary[i] {
            a[i][i] = 1.0;
            a[i][n] = t;
        } else {
            a[i][n] = net.sources[i];
        }
    }
    for &(p, q, g) in &net.conductances {
        for (u, v) in [(p, q), (q, p)] {
            if net.boundary[u].is_none() {
                a[u][u] += g;
                a[u][v] -= g;
            }
        }
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .expect("non-empty");
        a.swap(col, pivot);
        for row in 0..n {
            if row != col {
                let f = a[row][col] / a[col][col];
                if f != 0.0 {
                    for k in col..=n {
                        a[row][k] -= f * a[col][k];
                    }
                }
            }
        }
    }
    (0..n).map(|i| a[i][n] / a[i][i]).collect()
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

pub fn temperatures(net: &ThermalNetwork) -> Vec<f64> {
    solve_steady_state(net).expect("random networks are well posed").temperature
}

fn with_sources(net: &ThermalNetwork, sources: Vec<f64>) -> ThermalNetwork {
    ThermalNetwork {
        sources,
        ..net.clone()
    }
}

/// Outcome of the property suite on one network; `None` means it held.
pub fn check_properties(net: &ThermalNetwork, rng: &mut ChaCha8Rng) -> Option<String> {
    let n = net.node_count();
    let base = temperatures(net);
    let dense = dense_solve(net);
    let d = max_rel_diff(&base, &dense);
    if d > 1e-9 {
        return Some(format!("sparse and dense solutions differ by {d:e}"));
    }

    // superposition of two source vectors
    let zero = temperatures(&with_sources(net, vec![0.0; n]));
    let other: Vec<f64> = (0..n)
        .map(|i| if net.boundary[i].is_none() && rng.gen_bool(0.5) { rng.gen_range(0.0..1e-4) } else { 0.0 })
        .collect();
    let sum: Vec<f64> = net.sources.iter().zip(&other).map(|(a, b)| a + b).collect();
    let t_other = temperatures(&with_sources(net, other));
    let t_sum = temperatures(&with_sources(net, sum.clone()));
    for i in 0..n {
        let lhs = t_sum[i] - zero[i];
        let rhs = (base[i] - zero[i]) + (t_other[i] - zero[i]);
        if (lhs - rhs).abs() > 1e-9 * lhs.abs().max(rhs.abs()).max(1e-6) {
            return Some(format!("superposition fails at node {i}: {lhs} vs {rhs}"));
        }
    }

    // maximum principle: bounded below by the coldest boundary, and the
    // hottest node is a boundary or a heated node
    let bmin = net.boundary.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let bmax = net.boundary.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let tol = 1e-9 * bmax;
    if base.iter().any(|&t| t < bmin - tol) {
        return Some("temperature below the coldest boundary".into());
    }
    let hottest = (0..n).max_by(|&a, &b| base[a].total_cmp(&base[b])).expect("non-empty");
    if net.boundary[hottest].is_none() && net.sources[hottest] <= 0.0 {
        // an unheated interior maximum is only allowed as a tie
        let heated_max = (0..n)
            .filter(|&i| net.boundary[i].is_some() || net.sources[i] > 0.0)
            .map(|i| base[i])
            .fold(f64::NEG_INFINITY, f64::max);
        if base[hottest] > heated_max + tol {
            return Some(format!("interior maximum at unheated node {hottest}"));
        }
    }
    if zero.iter().any(|&t| t < bmin - tol || t > bmax + tol) {
        return Some("unheated network leaves the boundary range".into());
    }

    // monotonicity: more power never cools any node
    if t_sum.iter().zip(&base).any(|(a, b)| *a < *b - tol) {
        return Some("adding power lowered a temperature".into());
    }
    None
}

/// Runs the property suite on `count` random networks of at most `max_nodes` nodes.
pub fn property_suite(count: usize, max_nodes: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for k in 0..count {
        let net = random_network(&mut rng, max_nodes);
        if let Some(why) = check_properties(&net, &mut rng) {
            failures.push(format!("network {k} ({} nodes): {why}", net.node_count()));
        }
    }
    failures
}

/// Analytic cases: a series chain and a set of parallel links to ambient.
/// Returns the worst relative error against the closed forms.
pub fn analytic_cases() -> f64 {
    let mut worst: f64 = 0.0;
    let p = 2.5e-5;
    // series chain: the heated end sits p * sum(R) above ambient
    let rs = [1.0e5, 3.3e5, 4.7e4, 2.2e6, 9.1e3];
    let mut net = ThermalNetwork::default();
    let amb = net.add_node(NodeKind::Ambient, "ambient");
    net.set_boundary(amb, 300.0);
    let mut prev = amb;
    for (i, r) in rs.iter().enumerate() {
        let v = net.add_node(NodeKind::Site, format!("s{i}"));
        net.connect(prev, v, 1.0 / r);
        prev = v;
    }
    net.add_source(prev, p);
    let t = temperatures(&net);
    let mut acc = 0.0;
    for (i, r) in rs.iter().enumerate() {
        acc += r;
        let expected = 300.0 + p * acc;
        worst = worst.max(((t[i + 1] - expected) / expected).abs());
    }
    // parallel links: conductances add
    let rs = [1.0e6, 2.0e6, 5.0e5, 7.5e5];
    let mut net = ThermalNetwork::default();
    let amb = net.add_node(NodeKind::Ambient, "ambient");
    net.set_boundary(amb, 300.0);
    let v = net.add_node(NodeKind::Site, "s");
    for r in rs {
        net.connect(amb, v, 1.0 / r);
    }
    net.add_source(v, p);
    let g: f64 = rs.iter().map(|r| 1.0 / r).sum();
    let expected = 300.0 + p / g;
    let t = temperatures(&net);
    worst = worst.max(((t[v] - expected) / expected).abs());
    // a series pair in parallel with a single link
    let mut net = ThermalNetwork::default();
    let amb = net.add_node(NodeKind::Ambient, "ambient");
    net.set_boundary(amb, 300.0);
    let v = net.add_node(NodeKind::Site, "s");
    let mid = net.add_node(NodeKind::Site, "m");
    net.connect(v, mid, 1.0 / 4.0e5);
    net.connect(mid, amb, 1.0 / 6.0e5);
    net.connect(v, amb, 1.0 / 1.0e6);
    net.add_source(v, p);
    let expected = 300.0 + p * (1.0e6 * 1.0e6) / (1.0e6 + 1.0e6);
    let t = temperatures(&net);
    worst.max(((t[v] - expected) / expected).abs())
}
