//! OSPA tracking error with an exact assignment solver, and ECDFs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::math;

/// Cutoff `c` (m) and order `p` of the OSPA metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    pub c: f64,
    pub p: f64,
}

impl OspaParams {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("ospa_c", "must be positive"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::invalid("ospa_p", "must be at least 1"));
        }
        Ok(OspaParams { c, p })
    }
}

impl Default for OspaParams {
    fn default() -> Self {
        OspaParams { c: 50.0, p: 2.0 }
    }
}

/// Minimum-cost assignment of every row to a distinct column.
///
/// `cost` is row-major with `rows <= cols`. Returns `(column of each row,
/// total cost)`. O(rows² · cols) shortest-augmenting-path Hungarian method
/// with row and column potentials.
pub fn min_cost_assignment(cost: &[f64], rows: usize, cols: usize) -> (Vec<usize>, f64) {
    assert!(rows <= cols, "assignment needs rows <= cols");
    assert_eq!(cost.len(), rows * cols);
    if rows == 0 {
        return (Vec::new(), 0.0);
    }
    let at = |i: usize, j: usize| cost[(i - 1) * cols + (j - 1)];
    // 1-based with index 0 as the virtual source.
    let mut u = vec![0.0; rows + 1];
    let mut v = vec![0.0; cols + 1];
    let mut owner = vec![0usize; cols + 1];
    let mut way = vec![0usize; cols + 1];

    for i in 1..=rows {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; cols + 1];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=cols {
                if used[j] {
                    continue;
                }
                let reduced = at(i0, j) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; rows];
    for j in 1..=cols {
        if owner[j] > 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    // Re-sum from the original matrix rather than trusting the potentials.
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i * cols + j]).sum();
    (assignment, total)
}

/// OSPA distance between two finite point sets. Both empty gives 0.
pub fn ospa(x: &[Vec2], y: &[Vec2], params: &OspaParams) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    let (a, b) = (small.len(), large.len());
    if b == 0 {
        return 0.0;
    }
    let OspaParams { c, p } = *params;
    let cost: Vec<f64> = small
        .iter()
        .flat_map(|s| large.iter().map(move |l| math::powf((s - l).norm().min(c), p)))
        .collect();
    let (_, matched) = min_cost_assignment(&cost, a, b);
    let total = matched + math::powf(c, p) * (b - a) as f64;
    math::powf(total / b as f64, 1.0 / p).min(c)
}

/// One OSPA value per frame of `(estimates, truths)`.
pub fn ospa_series<'a, I>(frames: I, params: &OspaParams) -> Vec<f64>
where
    I: IntoIterator<Item = (&'a [Vec2], &'a [Vec2])>,
{
    frames.into_iter().map(|(est, truth)| ospa(est, truth, params)).collect()
}

/// Right-continuous empirical CDF: one `(value, F(value))` pair per
/// distinct value, in increasing order.
pub fn ecdf(values: &[f64]) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, v) in sorted.iter().enumerate() {
        let freq = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *v => last.1 = freq,
            _ => out.push((*v, freq)),
        }
    }
    Ok(out)
}
