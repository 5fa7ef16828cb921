use rand::Rng;

use crate::linalg::Matrix;

/// Glorot uniform initialization: entries i.i.d. on
/// `[-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))]`.
/// Returned shape is (fan_out x fan_in); biases are initialized to zero by
/// the callers.
pub fn glorot_uniform(fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Matrix {
    assert!(fan_in >= 1 && fan_out >= 1, "fan sizes must be positive");
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(fan_out, fan_in, |_, _| rng.gen_range(-bound..=bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_respect_the_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = glorot_uniform(600, 600, &mut rng);
        let bound = (6.0 / 1200.0f64).sqrt();
        assert!((bound - 0.0707).abs() < 1e-3);
        assert!(m.data.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn sample_mean_is_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = glorot_uniform(1000, 1000, &mut rng);
        let n = m.data.len() as f64;
        let mean = m.data.iter().sum::<f64>() / n;
        let bound = (6.0 / 2000.0f64).sqrt();
        let sigma = bound / 3.0f64.sqrt();
        assert!(mean.abs() < 3.0 * sigma / n.sqrt());
    }

    #[test]
    fn fixed_seed_reproduces_bit_identical_matrix() {
        let a = glorot_uniform(32, 16, &mut ChaCha8Rng::seed_from_u64(9));
        let b = glorot_uniform(32, 16, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
