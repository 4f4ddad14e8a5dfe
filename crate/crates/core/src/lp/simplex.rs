//! Dense two-phase tableau simplex.

use rayon::prelude::*;

use super::{LinearProgram, LpBackend, LpResult, Sense};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;
const PARALLEL_CELLS: usize = 1 << 16;

/// Dantzig pricing, falling back to Bland's rule during long degenerate
/// stretches.
#[derive(Debug, Clone, Copy)]
pub struct DenseSimplex {
    pub max_pivots: usize,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex { max_pivots: 200_000 }
    }
}

struct Tableau {
    rows: usize,
    width: usize,
    a: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.a[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width;
        let p = self.a[r * w + c];
        for k in 0..w {
            self.a[r * w + k] /= p;
        }
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for (x, &y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        };
        if self.rows * w >= PARALLEL_CELLS {
            before.par_chunks_mut(w).for_each(eliminate);
            after.par_chunks_mut(w).for_each(eliminate);
        } else {
            before.chunks_mut(w).for_each(eliminate);
            after.chunks_mut(w).for_each(eliminate);
        }
        let f = self.d[c];
        if f != 0.0 {
            for (x, &y) in self.d.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            self.d[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d.iter_mut().for_each(|x| *x = 0.0);
        self.d[..cost.len()].copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..w {
                    self.d[j] -= cb * self.a[i * w + j];
                }
            }
        }
    }

    /// Runs simplex iterations over columns `j < allowed`.
    fn optimize(&mut self, allowed: usize, budget: &mut usize) -> Result<()> {
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= DEGENERATE_SWITCH;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..allowed {
                if self.d[j] < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = self.d[j];
                }
            }
            let Some(c) = enter else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let t = self.at(i, c);
                if t > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / t;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((k, best)) => {
                            if ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[k])
                            {
                                Some((i, ratio))
                            } else {
                                Some((k, best))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(Error::LpBackend("unbounded objective".into()));
            };
            if *budget == 0 {
                return Err(Error::LpBackend("pivot limit reached".into()));
            }
            *budget -= 1;
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, c);
        }
    }
}

/// Sign making the right-hand side nonnegative, preferring `≤` so a slack
/// can start in the basis.
fn orient(rhs: f64, sense: Sense) -> (f64, Sense) {
    if rhs < 0.0 || (rhs == 0.0 && sense == Sense::Ge) {
        (-1.0, sense.flipped())
    } else {
        (1.0, sense)
    }
}

impl LpBackend for DenseSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpResult> {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let slacks = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let first_art = n + slacks;
        let arts = lp
            .rows
            .iter()
            .filter(|r| {
                let (_, s) = orient(r.rhs, r.sense);
                s != Sense::Le
            })
            .count();
        let cols = first_art + arts;
        let width = cols + 1;
        let mut t = Tableau { rows: m, width, a: vec![0.0; m * width], d: vec![0.0; width], basis: vec![0; m] };
        let mut ident = vec![0usize; m];
        let mut sign = vec![1.0; m];
        let mut next_slack = n;
        let mut next_art = first_art;
        for (i, row) in lp.rows.iter().enumerate() {
            let (s, sense) = orient(row.rhs, row.sense);
            sign[i] = s;
            let base = i * width;
            for &(j, v) in &row.coefs {
                t.a[base + j] += s * v;
            }
            t.a[base + cols] = s * row.rhs;
            match sense {
                Sense::Le => {
                    t.a[base + next_slack] = 1.0;
                    ident[i] = next_slack;
                    next_slack += 1;
                }
                Sense::Ge => {
                    t.a[base + next_slack] = -1.0;
                    next_slack += 1;
                    t.a[base + next_art] = 1.0;
                    ident[i] = next_art;
                    next_art += 1;
                }
                Sense::Eq => {
                    t.a[base + next_art] = 1.0;
                    ident[i] = next_art;
                    next_art += 1;
                }
            }
            t.basis[i] = ident[i];
        }
        let mut budget = self.max_pivots;
        if arts > 0 {
            let mut phase1 = vec![0.0; cols];
            phase1[first_art..].iter_mut().for_each(|c| *c = 1.0);
            t.set_costs(&phase1);
            t.optimize(cols, &mut budget)?;
            let infeasibility: f64 = (0..m).filter(|&i| t.basis[i] >= first_art).map(|i| t.rhs(i)).sum();
            if infeasibility > 1e-7 {
                return Err(Error::Infeasible(format!("phase one residual {infeasibility:.3e}")));
            }
            for i in 0..m {
                if t.basis[i] >= first_art {
                    if let Some(j) = (0..first_art).find(|&j| t.at(i, j).abs() > PIVOT_TOL) {
                        t.pivot(i, j);
                    }
                }
            }
        }
        let mut cost = vec![0.0; cols];
        cost[..n].copy_from_slice(&lp.objective);
        t.set_costs(&cost);
        t.optimize(first_art, &mut budget)?;
        let mut x = vec![0.0; n];
        for i in 0..m {
            if t.basis[i] < n {
                x[t.basis[i]] = t.rhs(i);
            }
        }
        let duals = (0..m).map(|i| -t.d[ident[i]] * sign[i]).collect();
        let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpResult { x, objective, duals })
    }
}
