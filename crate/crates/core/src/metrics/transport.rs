//! Transportation simplex for balanced finite transport problems.
//!
//! Northwest-corner start, MODI potentials on the spanning tree of basic
//! cells, Dantzig pricing. After a run of degenerate pivots the entering rule
//! switches to Bland's (first improving cell), which cannot cycle.

use std::collections::VecDeque;

/// An optimal plan: `flows` lists `(i, j, mass)` for basic cells with positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub cost: f64,
    pub flows: Vec<(usize, usize, f64)>,
}

impl TransportPlan {
    pub fn row_sums(&self, rows: usize) -> Vec<f64> {
        let mut s = vec![0.0; rows];
        for (i, _, m) in &self.flows {
            s[*i] += m;
        }
        s
    }

    pub fn column_sums(&self, columns: usize) -> Vec<f64> {
        let mut s = vec![0.0; columns];
        for (_, j, m) in &self.flows {
            s[*j] += m;
        }
        s
    }
}

const REDUCED_COST_TOL: f64 = 1e-12;

/// Minimizes `Σ c(i, j) π_ij` over couplings of `supply` and `demand`.
/// Both must be nonempty with equal totals; a round-off imbalance stays
/// unassigned.
pub fn solve(supply: &[f64], demand: &[f64], cost: impl Fn(usize, usize) -> f64) -> TransportPlan {
    let (m, n) = (supply.len(), demand.len());
    assert!(m > 0 && n > 0, "transport problem needs atoms on both sides");
    let c: Vec<f64> = (0..m * n).map(|k| cost(k / n, k % n)).collect();

    // northwest corner: exactly m + n − 1 basic cells
    let mut basis: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow = vec![0.0; m * n];
    let (mut a, mut b) = (supply.to_vec(), demand.to_vec());
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]);
        flow[i * n + j] = x;
        basis.push((i, j));
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut in_basis = vec![false; m * n];
    for &(i, j) in &basis {
        in_basis[i * n + j] = true;
    }

    let degenerate_limit = 2 * (m + n);
    let mut degenerate_run = 0usize;
    let (mut u, mut v) = (vec![0.0; m], vec![0.0; n]);
    loop {
        let adjacency = tree_adjacency(m, n, &basis);
        potentials(m, n, &basis, &adjacency, &c, &mut u, &mut v);

        let bland = degenerate_run >= degenerate_limit;
        let mut entering = None;
        let mut best = -REDUCED_COST_TOL;
        'scan: for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] {
                    continue;
                }
                let score = (c[i * n + j] - u[i] - v[j]) / (1.0 + c[i * n + j].abs());
                if score < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = score;
                }
            }
        }
        let Some((ei, ej)) = entering else { break };

        // path in the tree from column ej to row ei closes the cycle
        let cycle = tree_path(&adjacency, m + ej, ei);
        // cycle cells alternate −, +, −, … starting with the cell next to column ej
        let mut theta = f64::INFINITY;
        let mut leaving = usize::MAX;
        for &e in cycle.iter().step_by(2) {
            let (bi, bj) = basis[e];
            let x = flow[bi * n + bj];
            if x < theta || (x == theta && e < leaving) {
                theta = x;
                leaving = e;
            }
        }
        for (k, &e) in cycle.iter().enumerate() {
            let (bi, bj) = basis[e];
            if k % 2 == 0 {
                flow[bi * n + bj] -= theta;
            } else {
                flow[bi * n + bj] += theta;
            }
        }
        flow[ei * n + ej] = theta;
        let (li, lj) = basis[leaving];
        flow[li * n + lj] = 0.0;
        in_basis[li * n + lj] = false;
        in_basis[ei * n + ej] = true;
        basis[leaving] = (ei, ej);
        degenerate_run = if theta == 0.0 { degenerate_run + 1 } else { 0 };
    }

    let mut flows: Vec<(usize, usize, f64)> = basis
        .iter()
        .map(|&(i, j)| (i, j, flow[i * n + j].max(0.0)))
        .filter(|f| f.2 > 0.0)
        .collect();
    flows.sort_by_key(|f| (f.0, f.1));
    let cost = flows.iter().map(|&(i, j, x)| x * c[i * n + j]).sum();
    TransportPlan { cost, flows }
}

/// Node `r < m` is row `r`; node `m + j` is column `j`. Edges carry basis positions.
fn tree_adjacency(m: usize, n: usize, basis: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); m + n];
    for (e, &(i, j)) in basis.iter().enumerate() {
        adj[i].push((m + j, e));
        adj[m + j].push((i, e));
    }
    adj
}

fn potentials(
    m: usize,
    n: usize,
    basis: &[(usize, usize)],
    adj: &[Vec<(usize, usize)>],
    c: &[f64],
    u: &mut [f64],
    v: &mut [f64],
) {
    let mut seen = vec![false; m + n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    u[0] = 0.0;
    while let Some(node) = queue.pop_front() {
        for &(next, e) in &adj[node] {
            if seen[next] {
                continue;
            }
            seen[next] = true;
            let (i, j) = basis[e];
            if next >= m {
                v[j] = c[i * n + j] - u[i];
            } else {
                u[i] = c[i * n + j] - v[j];
            }
            queue.push_back(next);
        }
    }
}

/// Basis positions along the tree path from `from` to `to`.
fn tree_path(adj: &[Vec<(usize, usize)>], from: usize, to: usize) -> Vec<usize> {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([from]);
    seen[from] = true;
    while let Some(node) = queue.pop_front() {
        if node == to {
            break;
        }
        for &(next, e) in &adj[node] {
            if !seen[next] {
                seen[next] = true;
                parent[next] = Some((node, e));
                queue.push_back(next);
            }
        }
    }
    let mut path = Vec::new();
    let mut node = to;
    while node != from {
        let (prev, e) = parent[node].expect("basis spans all rows and columns");
        path.push(e);
        node = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let plan = solve(&[0.5, 0.5], &[0.5, 0.5], |i, j| if i == j { 0.0 } else { 1.0 });
        assert!(plan.cost.abs() < 1e-15);
        let plan = solve(&[0.5, 0.5], &[0.5, 0.5], |i, j| if i == j { 1.0 } else { 0.0 });
        assert!(plan.cost.abs() < 1e-15);
    }

    #[test]
    fn shift_on_a_line() {
        let (xs, ys): ([f64; 3], [f64; 3]) = ([0.0, 1.0, 2.0], [1.0, 2.0, 3.0]);
        let third: f64 = 1.0 / 3.0;
        let plan = solve(&[third; 3], &[third; 3], |i, j| (xs[i] - ys[j]).abs());
        assert!((plan.cost - 1.0).abs() < 1e-12);
        for s in plan.row_sums(3).iter().chain(&plan.column_sums(3)) {
            assert!((s - third).abs() < 1e-12);
        }
    }
}
