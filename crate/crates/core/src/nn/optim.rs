/// One SGD-with-momentum step on a flat parameter slice.
///
/// Classical form: `v <- mu * v - lr * g; theta <- theta + v`.
/// Nesterov form applies the lookahead update `theta += mu * v - lr * g`
/// after refreshing the velocity.
pub fn momentum_update(
    params: &mut [f64],
    grads: &[f64],
    velocity: &mut [f64],
    lr: f64,
    mu: f64,
    nesterov: bool,
) {
    assert_eq!(params.len(), grads.len(), "grad shape");
    assert_eq!(params.len(), velocity.len(), "velocity shape");
    for i in 0..params.len() {
        velocity[i] = mu * velocity[i] - lr * grads[i];
        if nesterov {
            params[i] += mu * velocity[i] - lr * grads[i];
        } else {
            params[i] += velocity[i];
        }
    }
}
