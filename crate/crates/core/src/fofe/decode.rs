use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::fofe::ExactFofe;

/// Reconstruct the unique token sequence behind an exact-rational FOFE code
/// with `alpha <= 1/2`.
///
/// The last token of the remaining sequence is the unique coordinate with
/// weight `>= 1`: every non-final contribution is bounded by
/// `sum_{t>=1} alpha^t <= 1`, strictly below 1 for finite sequences when
/// `alpha <= 1/2`. Peel it off, divide the rest by `alpha`, repeat.
pub fn decode_exact(code: &ExactFofe) -> Result<Vec<u32>> {
    let alpha = code.alpha().clone();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    if alpha > half {
        return Err(Error::Mode(format!(
            "decode requires alpha <= 1/2, got {alpha}"
        )));
    }
    let one = BigRational::one();
    let mut weights = code.weights().clone();
    let mut reversed: Vec<u32> = Vec::with_capacity(code.length());

    while !weights.is_empty() {
        // A well-formed code of length N empties in exactly N steps.
        if reversed.len() >= code.length() {
            return Err(Error::MalformedCode(format!(
                "code does not empty within its declared length {}",
                code.length()
            )));
        }
        let mut last: Option<u32> = None;
        for (&idx, w) in &weights {
            if *w >= one {
                if last.is_some() {
                    return Err(Error::MalformedCode(format!(
                        "two coordinates >= 1 at step {}",
                        reversed.len()
                    )));
                }
                last = Some(idx);
            }
        }
        let j = last.ok_or_else(|| {
            Error::MalformedCode(format!(
                "no coordinate >= 1 at step {} of a nonzero code",
                reversed.len()
            ))
        })?;
        reversed.push(j);
        let w = weights.get_mut(&j).expect("selected coordinate present");
        *w -= &one;
        if w.is_zero() {
            weights.remove(&j);
        }
        for w in weights.values_mut() {
            *w /= &alpha;
        }
    }

    if reversed.len() != code.length() {
        return Err(Error::MalformedCode(format!(
            "decoded {} tokens but code declares length {}",
            reversed.len(),
            code.length()
        )));
    }
    reversed.reverse();
    Ok(reversed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fofe::encode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn half() -> BigRational {
        BigRational::new(BigInt::from(1), BigInt::from(2))
    }

    #[test]
    fn inverse_of_hand_unrolled_example() {
        let code = encode(&[0u32, 1, 2], &half(), 3).unwrap();
        assert_eq!(decode_exact(&code).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn zero_code_decodes_to_empty() {
        let code = encode(&[], &half(), 3).unwrap();
        assert_eq!(decode_exact(&code).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn float_mode_has_no_decoder_entry() {
        // decode_exact only accepts ExactFofe; the public Alpha type is where
        // float-mode requests get refused.
        let a = crate::fofe::Alpha::float(0.5).unwrap();
        assert!(a.as_exact().is_err());
    }

    #[test]
    fn alpha_above_half_is_refused() {
        let a = BigRational::new(BigInt::from(3), BigInt::from(4));
        let code = encode(&[0u32], &a, 3).unwrap();
        assert!(matches!(decode_exact(&code), Err(Error::Mode(_))));
    }

    #[test]
    fn malformed_codes_are_rejected() {
        // {0: 1/3}: nonzero but nothing >= 1.
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let code = ExactFofe::from_parts(
            BTreeMap::from([(0u32, third)]),
            half(),
            3,
            1,
        )
        .unwrap();
        assert!(matches!(decode_exact(&code), Err(Error::MalformedCode(_))));

        // {0: 2}: cycles forever under peeling; caught by the length bound.
        let two = BigRational::new(BigInt::from(2), BigInt::from(1));
        let code = ExactFofe::from_parts(BTreeMap::from([(0u32, two)]), half(), 3, 2).unwrap();
        assert!(matches!(decode_exact(&code), Err(Error::MalformedCode(_))));
    }

    #[test]
    fn roundtrip_random_sequences() {
        let alpha = half();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let len = rng.gen_range(0..=20);
            let seq: Vec<u32> = (0..len).map(|_| rng.gen_range(0..50)).collect();
            let code = encode(&seq, &alpha, 50).unwrap();
            assert_eq!(decode_exact(&code).unwrap(), seq);
        }
    }

    #[test]
    fn roundtrip_at_alpha_strictly_below_half() {
        let alpha = BigRational::new(BigInt::from(1), BigInt::from(3));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(0..=15);
            let seq: Vec<u32> = (0..len).map(|_| rng.gen_range(0..10)).collect();
            let code = encode(&seq, &alpha, 10).unwrap();
            assert_eq!(decode_exact(&code).unwrap(), seq);
        }
    }
}
