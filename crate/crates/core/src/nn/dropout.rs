use rand::Rng;

/// Inverted-dropout mask: each entry is 0 with probability `p`, otherwise
/// `1/(1-p)`, so evaluation needs no rescaling. `p = 0` yields all-ones.
pub fn sample_mask(dim: usize, p: f64, rng: &mut impl Rng) -> Vec<f64> {
    assert!((0.0..1.0).contains(&p), "dropout rate must be in [0, 1)");
    if p == 0.0 {
        return vec![1.0; dim];
    }
    let keep = 1.0 / (1.0 - p);
    (0..dim)
        .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
        .collect()
}

pub fn apply_mask(x: &mut [f64], mask: &[f64]) {
    debug_assert_eq!(x.len(), mask.len());
    for (xi, m) in x.iter_mut().zip(mask) {
        *xi *= m;
    }
}
