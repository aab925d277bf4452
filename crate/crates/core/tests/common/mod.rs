//! Independent oracles for the integration tests. Nothing here calls into
//! the library's solvers or enumerators.

#![allow(dead_code)]

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`, by a dense two-phase tableau
/// simplex with Bland's rule. Returns the optimal value.
pub fn lp_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> f64 {
    const EPS: f64 = 1e-11;
    let (m, n) = (a.len(), c.len());
    // columns: n originals, m artificials, rhs
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = sign * a[i][j];
            }
            row[n + i] = 1.0;
            row[width - 1] = sign * b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        for v in t[r].iter_mut() {
            *v /= p;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != 0.0 {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        basis[r] = col;
    };

    let run = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, cost: &[f64], allowed: usize| {
        loop {
            // reduced costs c_j − c_Bᵀ B⁻¹ A_j
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let z: f64 = basis.iter().enumerate().map(|(i, &bi)| cost[bi] * t[i][j]).sum();
                cost[j] - z < -EPS
            });
            let Some(col) = entering else { return };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..t.len() {
                if t[i][col] > EPS {
                    let ratio = t[i][width - 1] / t[i][col];
                    best = match best {
                        None => Some((ratio, i)),
                        Some((r0, i0)) if ratio < r0 - EPS || (ratio <= r0 + EPS && basis[i] < basis[i0]) => Some((ratio, i)),
                        keep => keep,
                    };
                }
            }
            let (_, r) = best.expect("bounded problem");
            pivot(t, basis, r, col);
        }
    };

    let mut phase1 = vec![0.0; n + m];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    run(&mut t, &mut basis, &phase1, n + m);
    let infeasibility: f64 = basis.iter().enumerate().filter(|(_, &bi)| bi >= n).map(|(i, _)| t[i][width - 1]).sum();
    assert!(infeasibility.abs() < 1e-9, "infeasible LP");
    // drive zero-level artificials out, dropping redundant rows
    let mut i = 0;
    while i < t.len() {
        if basis[i] >= n {
            if let Some(col) = (0..n).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut basis, i, col);
            } else {
                t.remove(i);
                basis.remove(i);
                continue;
            }
        }
        i += 1;
    }
    let mut phase2 = c.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    run(&mut t, &mut basis, &phase2, n);
    basis.iter().enumerate().map(|(i, &bi)| c[bi] * t[i][width - 1]).sum()
}

/// Optimal transport cost between `(xs, a)` and `(ys, b)` on the line with
/// cost `cost(|x − y|)`, as an explicit LP over all `m·n` flows.
pub fn transport_lp(xs: &[f64], a: &[f64], ys: &[f64], b: &[f64], cost: impl Fn(f64) -> f64) -> f64 {
    let (m, n) = (xs.len(), ys.len());
    let mut c = Vec::with_capacity(m * n);
    for x in xs {
        for y in ys {
            c.push(cost((x - y).abs()));
        }
    }
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..m {
        let mut r = vec![0.0; m * n];
        for j in 0..n {
            r[i * n + j] = 1.0;
        }
        rows.push(r);
        rhs.push(a[i]);
    }
    for j in 0..n {
        let mut r = vec![0.0; m * n];
        for i in 0..m {
            r[i * n + j] = 1.0;
        }
        rows.push(r);
        rhs.push(b[j]);
    }
    lp_min(&c, &rows, &rhs)
}

/// The two-map line system with `p_1(x) = clamp(0.5 − 0.3x, 0.2, 0.8)`,
/// written out by hand.
pub fn canonical_branches(x: f64) -> Vec<(f64, f64)> {
    let p = (0.5 - 0.3 * x).clamp(0.2, 0.8);
    vec![(0.3 * x, p), (0.5 * x + 1.0, 1.0 - p)]
}

/// Every index word of length `n`, followed forward from `x0`:
/// `(X_n, probability)` with no merging.
pub fn forward_words(x0: f64, n: usize, branches: &dyn Fn(f64) -> Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut layer = vec![(x0, 1.0)];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|&(x, w)| branches(x).into_iter().map(move |(y, p)| (y, w * p)))
            .collect();
    }
    layer
}

/// Words `i_0 … i_{n−1}` of constant-weight scalar maps `(m, q, p)`, evaluated
/// backward as `S_{i_0}(S_{i_1}(⋯ S_{i_{n−1}}(x)))`.
pub fn backward_words(x: f64, n: usize, maps: &[(f64, f64, f64)]) -> Vec<(f64, f64)> {
    let k = maps.len();
    let mut out = Vec::with_capacity(k.pow(n as u32));
    for code in 0..k.pow(n as u32) {
        let mut word = Vec::with_capacity(n);
        let mut c = code;
        for _ in 0..n {
            word.push(c % k);
            c /= k;
        }
        let mut y = x;
        let mut w = 1.0;
        for &i in word.iter().rev() {
            y = maps[i].0 * y + maps[i].1;
        }
        for &i in &word {
            w *= maps[i].2;
        }
        out.push((y, w));
    }
    out
}

/// Partial sums `Ψ_n = Σ_{j ≤ n} m_1 ⋯ m_{j−1} q_j` over every word.
pub fn perpetuity_words(n: usize, maps: &[(f64, f64, f64)]) -> Vec<(f64, f64)> {
    let k = maps.len();
    (0..k.pow(n as u32))
        .map(|code| {
            let (mut c, mut prod, mut sum, mut w) = (code, 1.0, 0.0, 1.0);
            for _ in 0..n {
                let (m, q, p) = maps[c % k];
                c /= k;
                sum += prod * q;
                prod *= m;
                w *= p;
            }
            (sum, w)
        })
        .collect()
}

/// Sorts and merges points closer than `tol`.
pub fn merge(mut atoms: Vec<(f64, f64)>, tol: f64) -> Vec<(f64, f64)> {
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (x, w) in atoms {
        match out.last_mut() {
            Some(last) if (x - last.0).abs() <= tol => last.1 += w,
            _ => out.push((x, w)),
        }
    }
    out
}

/// Largest weight difference between two merged atom lists, matching points
/// within `tol`; unmatched atoms count in full.
pub fn atomwise_gap(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> f64 {
    let mut gap: f64 = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if i < a.len() && j < b.len() && (a[i].0 - b[j].0).abs() <= tol {
            gap = gap.max((a[i].1 - b[j].1).abs());
            i += 1;
            j += 1;
        } else if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            gap = gap.max(a[i].1);
            i += 1;
        } else {
            gap = gap.max(b[j].1);
            j += 1;
        }
    }
    gap
}

/// A tiny deterministic generator for test inputs, independent of the crate's streams.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Positive weights summing to one.
    pub fn probabilities(&mut self, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| self.next_f64() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    }
}
