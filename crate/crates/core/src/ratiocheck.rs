//! Numerical side of the approximation-ratio analysis.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Absolute error allowance per evaluation of `F` in double precision.
pub const ROUNDOFF_BUDGET: f64 = 1e-9;

const CHUNK: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioParams {
    pub kappa0: f64,
    pub kappa: f64,
    pub beta: f64,
}

impl RatioParams {
    /// Parameters of the better-than-1.6 analysis.
    pub const PAPER: RatioParams = RatioParams { kappa0: 0.366_210_05, kappa: 0.996_783_28, beta: 1.980_944_20 };

    pub fn new(kappa0: f64, kappa: f64, beta: f64) -> Result<Self> {
        let ok = (0.0..kappa).contains(&kappa0) && kappa <= 1.0 && beta > 0.0 && beta.is_finite();
        if !ok {
            return Err(Error::Parameters(format!("need 0 <= kappa0 < kappa <= 1 and beta > 0, got ({kappa0}, {kappa}, {beta})")));
        }
        Ok(RatioParams { kappa0, kappa, beta })
    }

    pub fn l(&self) -> f64 {
        self.kappa - self.kappa0
    }

    /// Normalizing constant of the threshold density.
    pub fn nu(&self) -> f64 {
        let (l, b) = (self.l(), self.beta);
        1.0 / ((3.0 - self.kappa) * l.powf(b + 1.0) / (b + 1.0) + l.powf(b + 2.0) / (b + 2.0))
    }
}

/// The three terms of the fixed-threshold bound.
pub fn alpha_terms(delta: f64, kappa: f64) -> [f64; 3] {
    [(7.0 - 2.0 * delta - 2.0 * kappa) / (3.0 - delta), (3.0 - delta) / (3.0 - delta - kappa), 1.0 / (1.0 - delta)]
}

/// Expected length factor under the randomized outer threshold.
pub fn g(p: &RatioParams) -> f64 {
    let (l, b, k) = (p.l(), p.beta, p.kappa);
    p.nu() * ((7.0 - 4.0 * k) * l.powf(b + 1.0) / (b + 1.0) + 2.0 * l.powf(b + 2.0) / (b + 2.0))
}

pub fn phi(p: &RatioParams, xi: f64, delta: f64) -> f64 {
    (3.0 - delta - p.kappa) * (3.0 - delta) / (3.0 - delta - xi)
}

/// Precomputed parameter powers for repeated evaluation of `h`.
#[derive(Debug, Clone, Copy)]
struct Kernel {
    p: RatioParams,
    nu_over_l: f64,
    l: f64,
    l_b1: f64,
    l_b2: f64,
}

impl Kernel {
    fn new(p: &RatioParams) -> Self {
        let l = p.l();
        Kernel { p: *p, nu_over_l: p.nu() / l, l, l_b1: l.powf(p.beta + 1.0), l_b2: l.powf(p.beta + 2.0) }
    }

    fn h(&self, xi: f64) -> f64 {
        let p = &self.p;
        let b = p.beta;
        let t = (p.kappa - xi).max(0.0);
        let t_b1 = t.powf(b + 1.0);
        let t_b2 = t_b1 * t;
        let (lo, hi) = (phi(p, xi, p.kappa0), phi(p, xi, p.kappa));
        let bracket = (lo - hi) * (self.l_b2 - t_b2) / (b + 2.0) + hi * self.l * (self.l_b1 - t_b1) / (b + 1.0);
        1.0 - xi * self.nu_over_l * bracket
    }

    fn f(&self, xi: f64) -> f64 {
        self.h(xi) / (1.0 - xi)
    }
}

/// Bound on the miss probability of a positive edge with `x* = ξ`.
pub fn h(p: &RatioParams, xi: f64) -> f64 {
    Kernel::new(p).h(xi)
}

/// `h_ξ / (1 − ξ)`; undefined at `ξ = 1`.
pub fn f(p: &RatioParams, xi: f64) -> Result<f64> {
    if xi >= 1.0 {
        return Err(Error::Parameters(format!("F is undefined at xi = {xi}")));
    }
    Ok(Kernel::new(p).f(xi))
}

/// Bound on `|F'|` over `[κ₀, κ]`.
pub fn derivative_bound(p: &RatioParams) -> f64 {
    32.0 / (1.0 - p.kappa)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaComponents {
    pub g: f64,
    pub invgap: f64,
    pub max_f_grid: f64,
    pub argmax: f64,
}

impl AlphaComponents {
    pub fn alpha(&self) -> f64 {
        self.g.max(self.invgap).max(self.max_f_grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioCertificate {
    pub params: RatioParams,
    pub step: f64,
    pub points: usize,
    pub grid_max: f64,
    pub argmax: f64,
    pub slack: f64,
    pub roundoff: f64,
    pub certified_bound: f64,
    /// The certified bound does not fall below 1.6.
    pub inconclusive: bool,
}

impl RatioCertificate {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        s.push_str("ratio certificate\n");
        s.push_str(&format!("  kappa0          {:>20.10}\n", p.kappa0));
        s.push_str(&format!("  kappa           {:>20.10}\n", p.kappa));
        s.push_str(&format!("  beta            {:>20.10}\n", p.beta));
        s.push_str(&format!("  step            {:>20.3e}\n", self.step));
        s.push_str(&format!("  grid points     {:>20}\n", self.points));
        s.push_str(&format!("  grid max F      {:>20.12}\n", self.grid_max));
        s.push_str(&format!("  argmax xi       {:>20.10}\n", self.argmax));
        s.push_str(&format!("  lipschitz slack {:>20.12}\n", self.slack));
        s.push_str(&format!("  roundoff        {:>20.3e}\n", self.roundoff));
        s.push_str(&format!("  certified bound {:>20.12}\n", self.certified_bound));
        s.push_str(&format!("  status          {:>20}\n", if self.inconclusive { "inconclusive" } else { "below 1.6" }));
        s
    }

    pub fn to_key_values(&self) -> String {
        let p = &self.params;
        [
            format!("kappa0={:.17}", p.kappa0),
            format!("kappa={:.17}", p.kappa),
            format!("beta={:.17}", p.beta),
            format!("step={:e}", self.step),
            format!("points={}", self.points),
            format!("grid_max={:.17}", self.grid_max),
            format!("argmax={:.17}", self.argmax),
            format!("slack={:.17}", self.slack),
            format!("roundoff={:e}", self.roundoff),
            format!("certified_bound={:.17}", self.certified_bound),
            format!("inconclusive={}", self.inconclusive),
        ]
        .join("\n")
            + "\n"
    }
}

/// Grid `{κ₀ + jΔ} ∪ {κ}` as `(count of regular points, κ appended)`.
fn grid_size(p: &RatioParams, step: f64) -> (usize, bool) {
    let last = (p.l() / step).floor() as usize;
    let regular = last + 1;
    let tail = p.kappa0 + last as f64 * step;
    (regular, tail < p.kappa)
}

/// Maximum of `F` over the grid, ties going to the smallest `ξ`.
fn sweep(p: &RatioParams, step: f64) -> Result<(f64, f64, usize)> {
    if !(step > 0.0) {
        return Err(Error::Parameters(format!("grid step must be positive, got {step}")));
    }
    if p.kappa >= 1.0 {
        return Err(Error::Parameters("F is undefined at xi = 1".into()));
    }
    let k = Kernel::new(p);
    let (regular, with_kappa) = grid_size(p, step);
    let chunks = regular.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best = (f64::NEG_INFINITY, f64::INFINITY);
            for j in c * CHUNK..((c + 1) * CHUNK).min(regular) {
                let xi = (p.kappa0 + j as f64 * step).min(p.kappa);
                let v = k.f(xi);
                if v > best.0 {
                    best = (v, xi);
                }
            }
            best
        })
        .reduce(|| (f64::NEG_INFINITY, f64::INFINITY), pick);
    let best = if with_kappa { pick(best, (k.f(p.kappa), p.kappa)) } else { best };
    Ok((best.0, best.1, regular + usize::from(with_kappa)))
}

fn pick(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `g`, `1/(1−κ₀)` and the grid maximum of `F` with step `step`.
pub fn alpha_components(p: &RatioParams, step: f64) -> Result<AlphaComponents> {
    let (max_f_grid, argmax, _) = sweep(p, step)?;
    Ok(AlphaComponents { g: g(p), invgap: 1.0 / (1.0 - p.kappa0), max_f_grid, argmax })
}

/// Grid maximum plus the Lipschitz slack and a round-off allowance bounds
/// `F` over the whole interval.
pub fn verify_bound(p: &RatioParams, step: f64) -> Result<RatioCertificate> {
    let (grid_max, argmax, points) = sweep(p, step)?;
    let slack = derivative_bound(p) * step;
    let certified_bound = grid_max + slack + ROUNDOFF_BUDGET;
    Ok(RatioCertificate {
        params: *p,
        step,
        points,
        grid_max,
        argmax,
        slack,
        roundoff: ROUNDOFF_BUDGET,
        certified_bound,
        inconclusive: certified_bound >= 1.6,
    })
}
