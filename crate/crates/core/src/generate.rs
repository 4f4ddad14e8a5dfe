use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::instance::{Edge, Instance};

/// Parameters of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub m: usize,
    pub wmax: u32,
    pub pmax: u32,
    /// Probability that an edge receives a positive profit.
    pub positive_density: f64,
}

/// Connected instance with integer lengths in `1..=wmax` and profits in
/// `1..=pmax` (or zero), rooted at vertex 0. Deterministic per seed.
pub fn gen_random(seed: u64, p: &GenParams) -> Result<Instance> {
    let GenParams { n, m, wmax, pmax, positive_density } = *p;
    if n == 0 || m + 1 < n || m > n * (n - 1) / 2 {
        return Err(Error::Parameters(format!("cannot build a connected simple graph with n={n}, m={m}")));
    }
    if wmax == 0 || pmax == 0 || !(0.0..=1.0).contains(&positive_density) {
        return Err(Error::Parameters("wmax and pmax must be positive, density in [0, 1]".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = vec![false; n * n];
    let mut pairs = Vec::with_capacity(m);
    for v in 1..n {
        let u = rng.random_range(0..v);
        used[u * n + v] = true;
        pairs.push((u, v));
    }
    let mut free: Vec<(usize, usize)> =
        (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|&(u, v)| !used[u * n + v]).collect();
    while pairs.len() < m {
        let k = rng.random_range(0..free.len());
        pairs.push(free.swap_remove(k));
    }
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let length = rng.random_range(1..=wmax) as f64;
            let profit = if rng.random_bool(positive_density) { rng.random_range(1..=pmax) as f64 } else { 0.0 };
            Edge { u, v, length, profit }
        })
        .collect();
    Instance::new(n, 0, edges)
}
