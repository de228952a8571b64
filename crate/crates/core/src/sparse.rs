//! Direct solver for sparse symmetric positive-definite systems: reverse
//! Cuthill-McKee reordering followed by a skyline (profile) Cholesky factor.

use std::collections::VecDeque;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub row: usize,
}

/// Symmetric matrix given by its diagonal and strictly-lower entries.
#[derive(Debug, Clone, Default)]
pub struct SymmetricBuilder {
    n: usize,
    diag: Vec<f64>,
    lower: Vec<(usize, usize, f64)>,
}

impl SymmetricBuilder {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            diag: vec![0.0; n],
            lower: Vec::new(),
        }
    }

    pub fn add_diag(&mut self, i: usize, v: f64) {
        self.diag[i] += v;
    }

    /// Adds `v` at (i, j) and (j, i); duplicates accumulate.
    pub fn add_off(&mut self, i: usize, j: usize, v: f64) {
        assert_ne!(i, j, "use add_diag for diagonal entries");
        let (r, c) = if i > j { (i, j) } else { (j, i) };
        self.lower.push((r, c, v));
    }

    /// y = A x
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for &(r, c, v) in &self.lower {
            y[r] += v * x[c];
            y[c] += v * x[r];
        }
        y
    }

    pub fn factor(&self) -> Result<Skyline, NotPositiveDefinite> {
        let perm = rcm_order(self.n, &self.lower);
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // profile start of every permuted row
        let mut first: Vec<usize> = (0..self.n).collect();
        for &(r, c, _) in &self.lower {
            let (a, b) = (inv[r], inv[c]);
            let (row, col) = if a > b { (a, b) } else { (b, a) };
            first[row] = first[row].min(col);
        }
        let mut start = Vec::with_capacity(self.n + 1);
        let mut total = 0usize;
        for (i, &f) in first.iter().enumerate() {
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        let mut vals = vec![0.0; total];
        let at = |i: usize, j: usize| start[i] + (j - first[i]);
        for (old, &d) in self.diag.iter().enumerate() {
            let i = inv[old];
            vals[at(i, i)] += d;
        }
        for &(r, c, v) in &self.lower {
            let (a, b) = (inv[r], inv[c]);
            let (row, col) = if a > b { (a, b) } else { (b, a) };
            vals[at(row, col)] += v;
        }
        for i in 0..self.n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = vals[at(i, j)];
                let ri = at(i, k0);
                let rj = at(j, k0);
                for k in 0..(j - k0) {
                    s -= vals[ri + k] * vals[rj + k];
                }
                vals[at(i, j)] = s / vals[at(j, j)];
            }
            let mut d = vals[at(i, i)];
            let ri = at(i, fi);
            for k in 0..(i - fi) {
                d -= vals[ri + k] * vals[ri + k];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(NotPositiveDefinite { row: perm[i] });
            }
            vals[at(i, i)] = d.sqrt();
        }
        Ok(Skyline {
            perm,
            first,
            start,
            vals,
        })
    }
}

/// Cholesky factor L (A = L Lᵀ) of a permuted matrix in row profile storage.
#[derive(Debug, Clone)]
pub struct Skyline {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl Skyline {
    #[cfg(test)]
    pub fn profile_size(&self) -> usize {
        self.vals.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                s -= l * y[fi + k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.vals[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
fn rcm_order(n: usize, lower: &[(usize, usize, f64)]) -> Vec<usize> {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(r, c, _) in lower {
        adj[r].push(c);
        adj[c].push(r);
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    let mut queue = VecDeque::new();
    for &seed in &by_degree {
        if placed[seed] {
            continue;
        }
        let root = peripheral(seed, &adj, &degree);
        placed[root] = true;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !placed[u]).collect();
            next.sort_by_key(|&u| (degree[u], u));
            for u in next {
                placed[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// A far node of the component of `seed`, found by repeated breadth-first sweeps.
fn peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut root = seed;
    let mut best_depth = 0;
    for _ in 0..4 {
        let (far, depth) = farthest(root, adj, degree);
        if depth <= best_depth {
            break;
        }
        best_depth = depth;
        root = far;
    }
    root
}

fn farthest(root: usize, adj: &[Vec<usize>], degree: &[usize]) -> (usize, usize) {
    let mut dist = std::collections::HashMap::new();
    dist.insert(root, 0usize);
    let mut queue = VecDeque::from([root]);
    let mut best = (root, 0usize);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d > best.1 || (d == best.1 && degree[v] < degree[best.0]) {
            best = (v, d);
        }
        for &u in &adj[v] {
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(u) {
                e.insert(d + 1);
                queue.push_back(u);
            }
        }
    }
    best
}
