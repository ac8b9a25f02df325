//! Finite-difference gradient oracle.
//!
//! Central differences over a parameter vector, independent of any
//! backward-pass code path, for validating analytic gradients in f64.

/// Central finite differences of `f` at `theta` with perturbation `h`.
/// `theta` is restored before returning.
pub fn central_diff<F>(theta: &mut [f64], h: f64, mut f: F) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut grad = vec![0.0; theta.len()];
    for i in 0..theta.len() {
        let orig = theta[i];
        theta[i] = orig + h;
        let plus = f(theta);
        theta[i] = orig - h;
        let minus = f(theta);
        theta[i] = orig;
        grad[i] = (plus - minus) / (2.0 * h);
    }
    grad
}

/// Largest elementwise relative error between two gradient vectors.
/// `floor` keeps near-zero components from inflating the ratio; errors on
/// components smaller than `floor` are measured against `floor` itself.
pub fn max_rel_err(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}

/// Convenience for "loss at theta, analytic gradient known": returns the
/// max relative error against central differences.
pub fn check<F>(theta: &mut [f64], analytic: &[f64], h: f64, floor: f64, f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let numeric = central_diff(theta, h, f);
    max_rel_err(analytic, &numeric, floor)
}
