//! Linear programming: a backend interface, a dense simplex, and the
//! cutting-plane solver for the PCRPP relaxation.

mod lp_format;
mod pcrpp_lp;
mod simplex;

pub use lp_format::write_lp_format;
pub use pcrpp_lp::{
    check_feasibility, lp_solution_objective, separate_cuts, solve_pcrpp_lp, solve_pcrpp_lp_with, Cut, CutCertificate,
    LpConfig, LpSolution,
};
pub use simplex::DenseSimplex;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn flipped(self) -> Sense {
        match self {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
            Sense::Eq => Sense::Eq,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coefs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub name: Option<String>,
}

impl Row {
    pub fn new(coefs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Row { coefs, sense, rhs, name: None }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn coef(&self, j: usize) -> f64 {
        self.coefs.iter().filter(|&&(k, _)| k == j).map(|&(_, v)| v).sum()
    }
}

/// `min c·x` subject to `rows`, `x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub names: Vec<String>,
    pub constant: f64,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, rows: Vec<Row>) -> Self {
        let names = (0..objective.len()).map(|j| format!("v{j}")).collect();
        LinearProgram { objective, rows, names, constant: 0.0 }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

/// Optimal basic solution with one dual value per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
}

/// Any solver returning an optimal basic primal solution and row duals with
/// `c_j - Σ_i duals_i a_ij ≥ 0` for every column at optimality.
pub trait LpBackend: Send + Sync {
    fn solve(&self, lp: &LinearProgram) -> Result<LpResult>;
}
