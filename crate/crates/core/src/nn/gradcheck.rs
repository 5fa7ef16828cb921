use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Anything whose scalar loss can be evaluated as a function of a flat
/// parameter vector. Dropout masks and data must be held fixed by the
/// implementor so `loss()` is deterministic.
pub trait DiffFn {
    fn num_params(&self) -> usize;
    fn get_param(&self, i: usize) -> f64;
    fn set_param(&mut self, i: usize, v: f64);
    fn loss(&mut self) -> f64;
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub max_rel_err: f64,
    pub worst_param: usize,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_err < tol
    }
}

/// Central-difference check of `analytic` against `f`.
///
/// Every parameter is checked unless there are more than `subsample_above`,
/// in which case a seeded random subset of that size is used. The error per
/// coordinate is `|fd - bp| / max(|fd|, |bp|, 1)`; the unit floor keeps
/// coordinates with exactly-zero gradients (dead ReLUs, dropped units) from
/// amplifying finite-difference noise.
pub fn check_gradients(
    f: &mut impl DiffFn,
    analytic: &[f64],
    epsilon: f64,
    subsample_above: usize,
    seed: u64,
) -> GradCheckReport {
    assert_eq!(f.num_params(), analytic.len(), "gradient length");
    let n = f.num_params();
    let indices: Vec<usize> = if n > subsample_above {
        let mut all: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        all.shuffle(&mut rng);
        all.truncate(subsample_above);
        all
    } else {
        (0..n).collect()
    };

    let mut report = GradCheckReport {
        max_rel_err: 0.0,
        worst_param: 0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
        checked: indices.len(),
    };
    for &i in &indices {
        let orig = f.get_param(i);
        f.set_param(i, orig + epsilon);
        let up = f.loss();
        f.set_param(i, orig - epsilon);
        let down = f.loss();
        f.set_param(i, orig);
        let fd = (up - down) / (2.0 * epsilon);
        let bp = analytic[i];
        let err = (fd - bp).abs() / fd.abs().max(bp.abs()).max(1.0);
        if err > report.max_rel_err {
            report.max_rel_err = err;
            report.worst_param = i;
            report.worst_analytic = bp;
            report.worst_numeric = fd;
        }
    }
    report
}
