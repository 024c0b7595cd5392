//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's own linear algebra.
#![allow(dead_code)]

use itertools::Itertools;

/// Gaussian elimination with partial pivoting on a small dense system.
/// Returns `None` when the matrix is (numerically) singular.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-11 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let pivot_row = a[col].clone();
            let f = a[i][col] / pivot_row[col];
            for (aij, pj) in a[i][col..].iter_mut().zip(&pivot_row[col..]) {
                *aij -= f * pj;
            }
            b[i] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Every basic feasible point of `{x : Gx = h, lo ≤ x ≤ up}` for a full-row-rank
/// `G` and finite bounds: pick `p` basic columns, pin the others to a bound,
/// solve for the basic part and keep the point if it respects the box.
pub fn basic_feasible_points(g: &[Vec<f64>], h: &[f64], lo: &[f64], up: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let p = g.len();
    let nv = lo.len();
    let mut out = Vec::new();
    for basic in (0..nv).combinations(p) {
        let nonbasic: Vec<usize> = (0..nv).filter(|j| !basic.contains(j)).collect();
        let gb: Vec<Vec<f64>> = g.iter().map(|row| basic.iter().map(|&j| row[j]).collect()).collect();
        for mask in 0u32..(1 << nonbasic.len()) {
            let mut x = vec![0.0; nv];
            for (t, &j) in nonbasic.iter().enumerate() {
                x[j] = if mask >> t & 1 == 1 { up[j] } else { lo[j] };
            }
            let rhs: Vec<f64> = (0..p).map(|i| h[i] - nonbasic.iter().map(|&j| g[i][j] * x[j]).sum::<f64>()).collect();
            let Some(xb) = gauss_solve(gb.clone(), rhs) else { continue };
            for (t, &j) in basic.iter().enumerate() {
                x[j] = xb[t];
            }
            if (0..nv).all(|j| x[j] >= lo[j] - tol && x[j] <= up[j] + tol) {
                out.push(x);
            }
        }
    }
    out
}

/// Minimum of `cᵀx` over the basic feasible points, `None` if there are none.
pub fn vertex_minimum(c: &[f64], g: &[Vec<f64>], h: &[f64], lo: &[f64], up: &[f64]) -> Option<f64> {
    basic_feasible_points(g, h, lo, up, 1e-9)
        .iter()
        .map(|x| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .min_by(f64::total_cmp)
}

/// True if some `p`-column minor of `g` is comfortably nonsingular.
pub fn full_row_rank(g: &[Vec<f64>]) -> bool {
    let p = g.len();
    let nv = g[0].len();
    (0..nv).combinations(p).any(|cols| {
        let sub: Vec<Vec<f64>> = g.iter().map(|r| cols.iter().map(|&j| r[j]).collect()).collect();
        gauss_solve(sub, vec![0.0; p]).is_some()
    })
}

/// Planar k-sets by an angular sweep: the top-k set in direction θ only
/// changes when θ crosses a normal of some point pair, so probing one
/// direction strictly inside each arc between consecutive critical angles
/// visits every k-set of a point set in general position.
pub fn planar_ksets(points: &[[f64; 2]], k: usize) -> Vec<Vec<usize>> {
    use std::f64::consts::PI;
    let n = points.len();
    let mut crit = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let dx = points[j][0] - points[i][0];
            let dy = points[j][1] - points[i][1];
            let a = dy.atan2(dx) + PI / 2.0;
            crit.push((a + PI).rem_euclid(2.0 * PI));
            crit.push(a.rem_euclid(2.0 * PI));
        }
    }
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let mut probes: Vec<f64> = crit.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    if let (Some(first), Some(last)) = (crit.first(), crit.last()) {
        probes.push(0.5 * (last + first + 2.0 * PI));
    }
    let mut found: Vec<Vec<usize>> = Vec::new();
    for theta in probes {
        let (s, c) = theta.sin_cos();
        let mut proj: Vec<(f64, usize)> = points.iter().enumerate().map(|(i, p)| (c * p[0] + s * p[1], i)).collect();
        proj.sort_by(|a, b| b.0.total_cmp(&a.0));
        if k < n && proj[k - 1].0 - proj[k].0 <= 1e-12 {
            continue;
        }
        let mut set: Vec<usize> = proj[..k].iter().map(|&(_, i)| i).collect();
        set.sort_unstable();
        if !found.contains(&set) {
            found.push(set);
        }
    }
    found.sort();
    found
}
