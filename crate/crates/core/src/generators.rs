//! Seeded random network generators.
//!
//! Every generator draws from a ChaCha8 stream seeded with
//! `ChaCha8Rng::seed_from_u64(seed)`, so a `(spec, seed)` pair always yields the
//! same graph on every platform.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::io::{self, LoadOptions};

/// Deterministic RNG used throughout the crate.
pub type DdcRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> DdcRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A network family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphSpec {
    /// Erdős–Rényi G(n, p).
    Er { n: usize, p: f64 },
    /// Erased configuration model with a power-law degree sequence.
    Sf { n: usize, gamma: f64, k_min: usize },
    /// Two equal groups wired with `p_in` inside and `p_out` across.
    TwoCommunity { n: usize, p_in: f64, p_out: f64 },
    /// Edge-list file.
    File {
        path: PathBuf,
        #[serde(default = "default_true")]
        take_largest_component: bool,
    },
}

fn default_true() -> bool {
    true
}

impl GraphSpec {
    /// Whether the spec draws on randomness at all.
    pub fn is_random(&self) -> bool {
        !matches!(self, GraphSpec::File { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let check_p = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::validation(format!("{name} = {p} is not a probability")))
            }
        };
        let check_n = |n: usize| {
            if n >= 1 {
                Ok(())
            } else {
                Err(Error::validation("n must be at least 1"))
            }
        };
        match *self {
            GraphSpec::Er { n, p } => {
                check_n(n)?;
                check_p("p", p)
            }
            GraphSpec::Sf { n, gamma, k_min } => {
                check_n(n)?;
                if !(gamma > 1.0) || !gamma.is_finite() {
                    return Err(Error::validation(format!("gamma = {gamma} must exceed 1")));
                }
                if k_min < 1 || k_min >= n {
                    return Err(Error::validation(format!(
                        "k_min = {k_min} must lie in [1, n) for n = {n}"
                    )));
                }
                Ok(())
            }
            GraphSpec::TwoCommunity { n, p_in, p_out } => {
                check_n(n)?;
                check_p("p_in", p_in)?;
                check_p("p_out", p_out)
            }
            GraphSpec::File { .. } => Ok(()),
        }
    }
}

/// G(n, p): each of the n(n-1)/2 pairs is an edge independently with
/// probability `p`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    GraphSpec::Er { n, p }.validate()?;
    let mut rng = rng_from_seed(seed);
    Ok(bernoulli_pairs(n, &mut rng, |_, _| p))
}

/// Two-group planted partition. Nodes `0..ceil(n/2)` form the first group.
pub fn gen_two_community(n: usize, p_in: f64, p_out: f64, seed: u64) -> Result<Graph> {
    GraphSpec::TwoCommunity { n, p_in, p_out }.validate()?;
    let split = n.div_ceil(2);
    let mut rng = rng_from_seed(seed);
    Ok(bernoulli_pairs(n, &mut rng, |u, v| {
        if (u < split) == (v < split) {
            p_in
        } else {
            p_out
        }
    }))
}

fn bernoulli_pairs(n: usize, rng: &mut DdcRng, prob: impl Fn(NodeId, NodeId) -> f64) -> Graph {
    let mut adjacency = vec![Vec::new(); n];
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < prob(u, v) {
                adjacency[u].push(v);
                adjacency[v].push(u);
            }
        }
    }
    Graph::from_raw_adjacency(adjacency)
}

const PARITY_RETRIES: usize = 10_000;

/// Draws `n` degrees i.i.d. from P(k) ∝ k^(-gamma) on `[k_min, n-1]` by
/// inverse-CDF lookup, then resamples a random node's degree until the total
/// is even.
pub fn sample_powerlaw_degrees(
    n: usize,
    gamma: f64,
    k_min: usize,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    GraphSpec::Sf { n, gamma, k_min }.validate()?;
    let k_max = n - 1;
    let mut cdf = Vec::with_capacity(k_max - k_min + 1);
    let mut acc = 0.0;
    for k in k_min..=k_max {
        acc += (k as f64).powf(-gamma);
        cdf.push(acc);
    }
    let total = acc;
    let draw = |rng: &mut dyn rand::RngCore| {
        let x = rng.gen::<f64>() * total;
        k_min + cdf.partition_point(|&c| c <= x).min(cdf.len() - 1)
    };

    let mut degrees: Vec<usize> = (0..n).map(|_| draw(rng)).collect();
    let mut sum: usize = degrees.iter().sum();
    let mut tries = 0;
    while sum % 2 == 1 {
        if tries == PARITY_RETRIES {
            return Err(Error::Generation(format!(
                "could not make degree sum even for n = {n}, k_min = {k_min}"
            )));
        }
        tries += 1;
        let i = rng.gen_range(0..n);
        sum -= degrees[i];
        degrees[i] = draw(rng);
        sum += degrees[i];
    }
    Ok(degrees)
}

/// Pairs stubs uniformly at random, then drops self-loops and collapses
/// multi-edges.
pub fn erased_stub_matching(degrees: &[usize], rng: &mut impl Rng) -> Result<Graph> {
    let mut stubs: Vec<NodeId> = degrees
        .iter()
        .enumerate()
        .flat_map(|(u, &k)| std::iter::repeat_n(u, k))
        .collect();
    if stubs.len() % 2 == 1 {
        return Err(Error::Generation("odd number of stubs".into()));
    }
    stubs.shuffle(rng);
    let mut adjacency = vec![Vec::new(); degrees.len()];
    for pair in stubs.chunks_exact(2) {
        let (u, v) = (pair[0], pair[1]);
        if u != v {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    Ok(Graph::from_raw_adjacency(adjacency))
}

/// Scale-free network from the erased configuration model.
pub fn gen_powerlaw_config(n: usize, gamma: f64, k_min: usize, seed: u64) -> Result<Graph> {
    let mut rng = rng_from_seed(seed);
    let degrees = sample_powerlaw_degrees(n, gamma, k_min, &mut rng)?;
    erased_stub_matching(&degrees, &mut rng)
}

/// Builds the graph described by `spec`. File specs ignore the seed.
pub fn realize(spec: &GraphSpec, seed: u64) -> Result<Graph> {
    spec.validate()?;
    match spec {
        GraphSpec::Er { n, p } => gen_er(*n, *p, seed),
        GraphSpec::Sf { n, gamma, k_min } => gen_powerlaw_config(*n, *gamma, *k_min, seed),
        GraphSpec::TwoCommunity { n, p_in, p_out } => gen_two_community(*n, *p_in, *p_out, seed),
        GraphSpec::File {
            path,
            take_largest_component,
        } => {
            let opts = LoadOptions {
                take_largest_component: *take_largest_component,
                ..LoadOptions::default()
            };
            Ok(io::load_edge_list(path, &opts)?.graph)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        assert_eq!(gen_er(20, 0.0, 1).unwrap().edge_count(), 0);
        let k = gen_er(20, 1.0, 1).unwrap();
        assert_eq!(k.edge_count(), 190);
        assert!(k.degrees().all(|d| d == 19));
        assert!(gen_er(5, 1.5, 1).is_err());
    }

    #[test]
    fn er_mean_degree() {
        let g = gen_er(1000, 0.015, 42).unwrap();
        // m ~ Binomial(499500, 0.015): sd of mean degree = 2*sd(m)/n ~ 0.17
        let mean = g.mean_degree();
        assert!((mean - 14.985).abs() < 3.0 * 0.172, "mean degree {mean}");
    }

    #[test]
    fn er_edge_count_within_4_sigma_over_seeds() {
        let (n, p) = (300usize, 0.03);
        let pairs = (n * (n - 1) / 2) as f64;
        let mean = pairs * p;
        let sd = (pairs * p * (1.0 - p)).sqrt();
        for seed in 0..20 {
            let m = gen_er(n, p, seed).unwrap().edge_count() as f64;
            assert!((m - mean).abs() <= 4.0 * sd, "seed {seed}: m = {m}");
        }
    }

    #[test]
    fn two_community_extremes_and_groups() {
        assert_eq!(gen_two_community(10, 0.0, 0.0, 3).unwrap().edge_count(), 0);
        let g = gen_two_community(7, 1.0, 0.0, 3).unwrap();
        // groups of 4 and 3: 6 + 3 edges
        assert_eq!(g.edge_count(), 9);
        assert!(!g.has_edge(3, 4));
        assert!(g.has_edge(0, 3));
        let g = gen_two_community(6, 0.0, 1.0, 3).unwrap();
        assert_eq!(g.edge_count(), 9);
    }

    #[test]
    fn two_community_mean_degree() {
        let mut total = 0.0;
        for seed in 0..5 {
            total += gen_two_community(1000, 0.012, 0.008, seed).unwrap().mean_degree();
        }
        let mean = total / 5.0;
        // exact expectation: 499*0.012 + 500*0.008 = 9.988
        assert!((mean - 9.988).abs() < 0.3, "mean degree {mean}");
    }

    #[test]
    fn powerlaw_degrees_respect_bounds() {
        let mut rng = rng_from_seed(9);
        let d = sample_powerlaw_degrees(1000, 2.5, 5, &mut rng).unwrap();
        assert!(d.iter().all(|&k| (5..=999).contains(&k)));
        assert_eq!(d.iter().sum::<usize>() % 2, 0);
    }

    #[test]
    fn powerlaw_mean_degree() {
        let means: Vec<f64> = (0..10)
            .map(|s| gen_powerlaw_config(1000, 2.5, 5, s).unwrap().mean_degree())
            .collect();
        let avg = means.iter().sum::<f64>() / means.len() as f64;
        assert!((avg - 12.0).abs() <= 2.0, "mean degree {avg}");
    }

    #[test]
    fn powerlaw_tiny_case() {
        for seed in 0..10 {
            let g = gen_powerlaw_config(2, 2.5, 1, seed).unwrap();
            assert!(g.edge_count() <= 1);
        }
    }

    #[test]
    fn powerlaw_rejects_bad_params() {
        assert!(gen_powerlaw_config(10, 1.0, 2, 0).is_err());
        assert!(gen_powerlaw_config(10, 2.5, 0, 0).is_err());
        assert!(gen_powerlaw_config(10, 2.5, 10, 0).is_err());
    }

    #[test]
    fn realize_dispatch_and_determinism() {
        let k3 = realize(&GraphSpec::Er { n: 3, p: 1.0 }, 0).unwrap();
        assert_eq!(k3.edge_count(), 3);
        for spec in [
            GraphSpec::Er { n: 200, p: 0.05 },
            GraphSpec::Sf { n: 200, gamma: 2.5, k_min: 3 },
            GraphSpec::TwoCommunity { n: 200, p_in: 0.06, p_out: 0.01 },
        ] {
            assert_eq!(realize(&spec, 77).unwrap(), realize(&spec, 77).unwrap());
            assert_ne!(realize(&spec, 77).unwrap(), realize(&spec, 78).unwrap());
        }
    }
}
