//! Bounded-variable primal simplex for
//! `max c·x  s.t.  |R_r · x| <= b_r,  0 <= x <= 1` with only a handful of rows.
//!
//! Each band is written as `R_r · x - t_r = -b_r` with a slack `t_r` in
//! `[0, 2 b_r]`, so the constraint matrix always has full row rank and
//! dependent or duplicate rows need no special handling. The basis is at most
//! 3×3, so its inverse is rebuilt densely after every pivot and basic values
//! are recomputed from the nonbasic ones. Rows already inside their band start
//! with the slack basic; the others get an artificial under a big-M penalty
//! that is raised until the artificials leave, after which they are fixed at
//! zero and the pure objective is re-optimized.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-12;
const SNAP_TOL: f64 = 1e-11;
/// Switch from largest-coefficient pricing to Bland's rule after this many
/// consecutive degenerate pivots.
const DEGENERATE_STREAK: usize = 50;

/// Pricing order: largest `|reduced cost|` first, lowest index on ties.
struct Candidate {
    j: usize,
    score: f64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score.total_cmp(&other.score).then(other.j.cmp(&self.j))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense inverse of a small square matrix by Gauss-Jordan with partial pivoting.
fn invert(mat: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let m = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let s = a[col][col];
        a[col].iter_mut().for_each(|x| *x /= s);
        inv[col].iter_mut().for_each(|x| *x /= s);
        for r in 0..m {
            if r != col {
                let f = a[r][col];
                if f != 0.0 {
                    for k in 0..m {
                        a[r][k] -= f * a[col][k];
                        inv[r][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Column layout: `n` structurals, `m` slacks (`-e_r`), `m` artificials (`sign_r e_r`).
struct Tableau<'a> {
    rows: &'a [Vec<f64>],
    rhs: Vec<f64>,
    n: usize,
    sign: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    binv: Vec<Vec<f64>>,
    iterations: usize,
    max_iterations: usize,
}

impl<'a> Tableau<'a> {
    fn m(&self) -> usize {
        self.rows.len()
    }

    fn width(&self) -> usize {
        self.n + 2 * self.m()
    }

    fn column_entry(&self, r: usize, j: usize) -> f64 {
        let (n, m) = (self.n, self.m());
        if j < n {
            self.rows[r][j]
        } else if j < n + m {
            if j - n == r {
                -1.0
            } else {
                0.0
            }
        } else if j - n - m == r {
            self.sign[r]
        } else {
            0.0
        }
    }

    fn refresh_inverse(&mut self) -> Result<()> {
        let m = self.m();
        let b: Vec<Vec<f64>> = (0..m)
            .map(|r| self.basis.iter().map(|&j| self.column_entry(r, j)).collect())
            .collect();
        self.binv = invert(&b).ok_or(Error::NumericalFailure {
            residual: f64::INFINITY,
            limit: 0.0,
        })?;
        Ok(())
    }

    /// Recompute basic values from nonbasic ones: `x_B = B^{-1} (rhs - N x_N)`.
    fn refresh_basic_values(&mut self) {
        let m = self.m();
        let mut v = self.rhs.clone();
        for j in 0..self.width() {
            if self.position[j].is_none() && self.x[j] != 0.0 {
                for (r, vr) in v.iter_mut().enumerate() {
                    *vr -= self.column_entry(r, j) * self.x[j];
                }
            }
        }
        for i in 0..m {
            let xb: f64 = (0..m).map(|k| self.binv[i][k] * v[k]).sum();
            self.x[self.basis[i]] = xb;
        }
    }

    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64) -> Result<()> {
        let m = self.m();
        let total = self.width();
        let mut degenerate = 0usize;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
            let y: Vec<f64> = (0..m)
                .map(|k| (0..m).map(|i| cost(self.basis[i]) * self.binv[i][k]).sum())
                .collect();

            let bland = degenerate >= DEGENERATE_STREAK;
            let mut candidates: Vec<(usize, f64)> = Vec::new();
            for j in 0..total {
                if self.position[j].is_some() || self.upper[j] == 0.0 {
                    continue;
                }
                let mut d = cost(j);
                if j < self.n {
                    for (r, yr) in y.iter().enumerate() {
                        d -= yr * self.rows[r][j];
                    }
                } else {
                    let r = (j - self.n) % m;
                    d -= y[r] * self.column_entry(r, j);
                }
                let at_upper = self.x[j] >= self.upper[j];
                if (!at_upper && d > DUAL_TOL) || (at_upper && d < -DUAL_TOL) {
                    candidates.push((j, d));
                    if bland {
                        break;
                    }
                }
            }
            if candidates.is_empty() {
                return Ok(());
            }
            // A bound flip leaves the basis and hence every reduced cost
            // unchanged, so flips run down the Dantzig order without repricing.
            let mut queue: BinaryHeap<Candidate> = candidates
                .into_iter()
                .map(|(j, d)| Candidate { j, score: d.abs() })
                .collect();
            while let Some(Candidate { j, .. }) = queue.pop() {
                if self.step(j, bland, &mut degenerate)? {
                    break;
                }
            }
        }
    }

    /// Move nonbasic `j` off its bound. Returns whether the basis changed.
    fn step(&mut self, j: usize, bland: bool, degenerate: &mut usize) -> Result<bool> {
        let m = self.m();
        let dir = if self.x[j] >= self.upper[j] { -1.0 } else { 1.0 };
        let col: Vec<f64> = (0..m).map(|r| self.column_entry(r, j)).collect();
        let w: Vec<f64> = (0..m)
            .map(|i| (0..m).map(|k| self.binv[i][k] * col[k]).sum())
            .collect();

        // basic i moves by -dir * t * w[i]
        let mut step = self.upper[j];
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            let rate = dir * w[i];
            let b = self.basis[i];
            let limit = if rate > PIVOT_TOL {
                (self.x[b] / rate).max(0.0)
            } else if rate < -PIVOT_TOL && self.upper[b].is_finite() {
                ((self.upper[b] - self.x[b]) / -rate).max(0.0)
            } else {
                continue;
            };
            let better = match leaving {
                None => limit < step,
                Some((li, _)) => {
                    limit < step
                        || (limit == step
                            && if bland {
                                b < self.basis[li]
                            } else {
                                w[i].abs() > w[li].abs()
                            })
                }
            };
            if better {
                step = limit;
                leaving = Some((i, rate));
            }
        }
        if !step.is_finite() {
            // artificials are unbounded only while penalized; every other
            // column is boxed
            return Err(Error::NumericalFailure {
                residual: f64::INFINITY,
                limit: 0.0,
            });
        }
        if step <= 0.0 {
            *degenerate += 1;
        } else {
            *degenerate = 0;
        }

        match leaving {
            None => {
                for (&b, &wi) in self.basis.iter().zip(&w) {
                    self.x[b] -= dir * step * wi;
                }
                self.x[j] = if dir > 0.0 { self.upper[j] } else { 0.0 };
                Ok(false)
            }
            Some((i, rate)) => {
                self.x[j] += dir * step;
                let b = self.basis[i];
                self.x[b] = if rate > 0.0 { 0.0 } else { self.upper[b] };
                self.position[b] = None;
                self.position[j] = Some(i);
                self.basis[i] = j;
                self.refresh_inverse()?;
                self.refresh_basic_values();
                Ok(true)
            }
        }
    }
}

/// Maximize `objective · x` over the unit box subject to `|rows[r] · x| <= bands[r]`.
///
/// Returns a basic optimal solution: at most `rows.len()` coordinates are
/// strictly fractional.
pub(crate) fn maximize_on_box(objective: &[f64], rows: &[Vec<f64>], bands: &[f64]) -> Result<Vec<f64>> {
    let n = objective.len();
    let m = rows.len();
    debug_assert!(rows.iter().all(|r| r.len() == n));
    debug_assert_eq!(bands.len(), m);

    let mut x: Vec<f64> = objective
        .iter()
        .map(|&c| if c >= 0.0 { 1.0 } else { 0.0 })
        .collect();
    if m == 0 {
        return Ok(x);
    }

    let rhs: Vec<f64> = bands.iter().map(|b| -b).collect();
    let mut upper = vec![1.0; n];
    upper.extend(bands.iter().map(|b| 2.0 * b));
    upper.extend(std::iter::repeat_n(f64::INFINITY, m));
    let mut position = vec![None; n + 2 * m];
    let mut basis = Vec::with_capacity(m);
    let mut sign = vec![1.0; m];
    let mut slack = vec![0.0; m];
    let mut artificial = vec![0.0; m];
    for r in 0..m {
        let g = dot(&rows[r], &x);
        let t = g + bands[r];
        if (0.0..=2.0 * bands[r]).contains(&t) {
            slack[r] = t;
            basis.push(n + r);
        } else {
            slack[r] = t.clamp(0.0, 2.0 * bands[r]);
            // artificial absorbs rhs - (g - t)
            let res = -bands[r] - g + slack[r];
            sign[r] = if res < 0.0 { -1.0 } else { 1.0 };
            artificial[r] = res.abs();
            basis.push(n + m + r);
        }
        position[basis[r]] = Some(r);
    }
    x.extend(slack);
    x.extend(artificial);

    let mut tab = Tableau {
        rows,
        rhs,
        n,
        sign,
        upper,
        x,
        basis,
        position,
        binv: Vec::new(),
        iterations: 0,
        max_iterations: 50 * (n + 2 * m) + 1000,
    };
    tab.refresh_inverse()?;
    tab.refresh_basic_values();

    let scale = objective.iter().fold(0.0f64, |acc, c| acc.max(c.abs())).max(1e-12);
    let mut penalty = 1.0 * scale;
    loop {
        let big_m = penalty;
        tab.optimize(&|j| {
            if j < n {
                objective[j]
            } else if j < n + m {
                0.0
            } else {
                -big_m
            }
        })?;
        let infeasibility: f64 = tab.x[n + m..].iter().sum();
        if infeasibility <= 1e-12 {
            break;
        }
        if penalty > 1e18 * scale {
            return Err(Error::Infeasible);
        }
        penalty *= 10.0;
    }

    // Pin the artificials at zero and finish on the true objective.
    for r in 0..m {
        let j = n + m + r;
        tab.upper[j] = 0.0;
        if tab.position[j].is_none() {
            tab.x[j] = 0.0;
        }
    }
    tab.refresh_basic_values();
    tab.optimize(&|j| if j < n { objective[j] } else { 0.0 })?;

    let mut out = tab.x;
    out.truncate(n);
    for v in out.iter_mut() {
        if *v < SNAP_TOL {
            *v = 0.0;
        } else if *v > 1.0 - SNAP_TOL {
            *v = 1.0;
        }
    }
    Ok(out)
}
