//! Exact one-dimensional distances.
//!
//! Both routines take a signed measure on sorted distinct points
//! `z_1 < … < z_K` with weights `w_k = a_k − b_k` summing to zero.

use std::collections::VecDeque;

/// `W1 = Σ_k |F_k| (z_{k+1} − z_k)` with `F_k` the cumulative signed weight.
pub fn w1(points: &[f64], signed: &[f64]) -> f64 {
    let mut cum = 0.0;
    let mut total = 0.0;
    for k in 0..points.len().saturating_sub(1) {
        cum += signed[k];
        total += cum.abs() * (points[k + 1] - points[k]);
    }
    total
}

/// A linear piece of the value function: its length and its slope minus the
/// running slope offset.
#[derive(Debug, Clone, Copy)]
struct Piece {
    len: f64,
    slope: f64,
}

/// Bounded-Lipschitz distance: `max Σ_k w_k f_k` over `|f_k| ≤ 1`,
/// `|f_{k+1} − f_k| ≤ z_{k+1} − z_k`.
///
/// Dynamic programme over the concave value function
/// `V_k(f) = max { Σ_{j ≤ k} w_j f_j : f_k = f }` on `[−1, 1]`, stored as
/// pieces left of the argmax (positive slope) and right of it. Moving to the
/// next point takes a sliding-window maximum of width `g`, which inserts a
/// flat piece of length `2g` at the argmax and trims `g` off both ends.
pub fn fm(points: &[f64], signed: &[f64]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let mut up: VecDeque<Piece> = VecDeque::new();
    let mut down: VecDeque<Piece> = VecDeque::from([Piece { len: 2.0, slope: 0.0 }]);
    let mut offset = 0.0;
    // V at the left end of the domain, f = −1
    let mut base = 0.0;

    for k in 0..points.len() {
        if k > 0 {
            let g = points[k] - points[k - 1];
            down.push_front(Piece { len: 2.0 * g, slope: -offset });
            base += trim_front(&mut up, &mut down, g, offset);
            trim_back(&mut up, &mut down, g);
        }
        let w = signed[k];
        offset += w;
        base -= w;
        while let Some(p) = down.front() {
            if p.slope + offset > 0.0 {
                up.push_back(down.pop_front().unwrap());
            } else {
                break;
            }
        }
        while let Some(p) = up.back() {
            if p.slope + offset <= 0.0 {
                down.push_front(up.pop_back().unwrap());
            } else {
                break;
            }
        }
    }
    base + up.iter().map(|p| p.len * (p.slope + offset)).sum::<f64>()
}

/// Removes length `g` from the left end and returns the change in `V(−1)`.
fn trim_front(up: &mut VecDeque<Piece>, down: &mut VecDeque<Piece>, mut g: f64, offset: f64) -> f64 {
    let mut gained = 0.0;
    while g > 0.0 {
        let queue = if up.is_empty() { &mut *down } else { &mut *up };
        let Some(front) = queue.front_mut() else { break };
        let take = front.len.min(g);
        gained += take * (front.slope + offset);
        g -= take;
        front.len -= take;
        if front.len <= 0.0 {
            queue.pop_front();
        }
    }
    gained
}

fn trim_back(up: &mut VecDeque<Piece>, down: &mut VecDeque<Piece>, mut g: f64) {
    while g > 0.0 {
        let queue = if down.is_empty() { &mut *up } else { &mut *down };
        let Some(back) = queue.back_mut() else { break };
        let take = back.len.min(g);
        g -= take;
        back.len -= take;
        if back.len <= 0.0 {
            queue.pop_back();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses() {
        assert!((fm(&[0.0, 10.0], &[1.0, -1.0]) - 2.0).abs() < 1e-12);
        assert!((fm(&[0.0, 0.5], &[1.0, -1.0]) - 0.5).abs() < 1e-12);
        assert!((w1(&[0.0, 10.0], &[1.0, -1.0]) - 10.0).abs() < 1e-12);
        assert_eq!(fm(&[3.0], &[0.0]), 0.0);
    }

    #[test]
    fn uniform_shift() {
        // uniform on {0, 1} against uniform on {1, 2}
        let (z, w) = ([0.0, 1.0, 2.0], [0.5, 0.0, -0.5]);
        assert!((w1(&z, &w) - 1.0).abs() < 1e-12);
        assert!((fm(&z, &w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_mass_saturates_per_unit() {
        // half the mass moves by 100, half by 0.25
        let (z, w) = ([0.0, 0.25, 50.0, 150.0], [0.5, -0.5, 0.5, -0.5]);
        assert!((fm(&z, &w) - (0.5 * 0.25 + 0.5 * 2.0)).abs() < 1e-12);
    }
}
