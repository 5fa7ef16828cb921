use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fofe::{encode, FloatFofe};

/// Outcome of an empirical uniqueness probe in the `alpha > 1/2` regime.
#[derive(Debug, Clone, Serialize)]
pub struct CollisionReport {
    pub alpha: f64,
    pub vocab_size: u32,
    pub max_len: usize,
    pub trials: usize,
    pub exact_collisions: usize,
    pub min_linf: f64,
    pub mean_linf: f64,
}

/// Sample `trials` distinct random sequence pairs and measure how far apart
/// their float codes are in L-infinity. For `1/2 < alpha < 1` uniqueness
/// holds for all but finitely many alpha, so exact collisions should not
/// appear; this reports the empirical evidence.
pub fn collision_search(
    alpha: f64,
    vocab_size: u32,
    max_len: usize,
    trials: usize,
    rng_seed: u64,
) -> Result<CollisionReport> {
    if !(alpha > 0.5 && alpha < 1.0) {
        return Err(Error::Config(format!(
            "collision search applies to 1/2 < alpha < 1 (the lossless regime needs no search), got {alpha}"
        )));
    }
    if vocab_size == 0 || max_len == 0 || trials == 0 {
        return Err(Error::Config("vocab, max_len and trials must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<u32> {
        let len = rng.gen_range(1..=max_len);
        (0..len).map(|_| rng.gen_range(0..vocab_size)).collect()
    };

    let mut exact_collisions = 0usize;
    let mut min_linf = f64::INFINITY;
    let mut sum_linf = 0.0;
    for _ in 0..trials {
        let a = draw(&mut rng);
        let mut b = draw(&mut rng);
        while b == a {
            // Self-pairs carry no information about injectivity.
            b = draw(&mut rng);
        }
        let ca = encode::<f64>(&a, &alpha, vocab_size)?;
        let cb = encode::<f64>(&b, &alpha, vocab_size)?;
        let d = linf_distance(&ca, &cb);
        if d == 0.0 {
            exact_collisions += 1;
        }
        min_linf = min_linf.min(d);
        sum_linf += d;
    }
    Ok(CollisionReport {
        alpha,
        vocab_size,
        max_len,
        trials,
        exact_collisions,
        min_linf,
        mean_linf: sum_linf / trials as f64,
    })
}

fn linf_distance(a: &FloatFofe, b: &FloatFofe) -> f64 {
    let mut d: f64 = 0.0;
    for (&idx, &w) in a.weights() {
        d = d.max((w - b.get(idx).copied().unwrap_or(0.0)).abs());
    }
    for (&idx, &w) in b.weights() {
        if a.get(idx).is_none() {
            d = d.max(w.abs());
        }
    }
    d
}
