//! Closed forms for the coordinate interpolation set made of the origin,
//! the points `δ e_j`, and then the points `−δ e_j`, with `n + 2 ≤ m ≤ 2n + 1`.

use crate::error::{Error, Result};

/// Λ-poisedness constant of the coordinate set in the `ℓ_p` ball of radius
/// `delta`. Supported: `p ∈ {1, 2}` for any admissible `m`, and any `p ≥ 1`
/// (including infinity) when `m = 2n + 1`.
pub fn lambda_poisedness_zm(n: usize, m: usize, p: f64, delta: f64) -> Result<f64> {
    if m < n + 2 || m > 2 * n + 1 || !(delta > 0.0) || !(p >= 1.0) {
        return Err(Error::Config(format!("unsupported arguments n = {n}, m = {m}, p = {p}")));
    }
    if p == 1.0 {
        return Ok(if m <= 2 * n { 2.0 } else { 1.0 });
    }
    if p == 2.0 {
        return Ok(1.0 + ((2 * n + 1 - m) as f64).sqrt());
    }
    if m == 2 * n + 1 {
        let nf = n as f64;
        let growth = if p.is_infinite() { nf } else { nf.powf((p - 2.0) / p) };
        return Ok((growth - 1.0).max(1.0));
    }
    Err(Error::Config(format!("no closed form for m = {m} and p = {p}")))
}

/// Value at `x` of the `i`-th (one-based) Lagrange polynomial of the
/// coordinate set.
pub fn lagrange_zm_value(n: usize, m: usize, delta: f64, i: usize, x: &[f64]) -> f64 {
    assert!(m >= n + 2 && m <= 2 * n + 1 && (1..=m).contains(&i) && x.len() == n);
    let paired = m - n - 1;
    if i == 1 {
        let quad: f64 = x[..paired].iter().map(|v| v * v).sum();
        let lin: f64 = x[paired..].iter().sum();
        1.0 - quad / (delta * delta) - lin / delta
    } else if i <= m - n {
        let v = x[i - 2];
        v * v / (2.0 * delta * delta) + v / (2.0 * delta)
    } else if i <= n + 1 {
        x[i - 2] / delta
    } else {
        let v = x[i - n - 2];
        v * v / (2.0 * delta * delta) - v / (2.0 * delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_norm_constants() {
        assert_eq!(lambda_poisedness_zm(5, 11, 2.0, 1.0).unwrap(), 1.0);
        assert!((lambda_poisedness_zm(5, 8, 2.0, 1.0).unwrap() - (1.0 + 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn infinity_norm_constant_for_full_set() {
        assert_eq!(lambda_poisedness_zm(4, 9, f64::INFINITY, 1.0).unwrap(), 3.0);
        assert_eq!(lambda_poisedness_zm(2, 5, f64::INFINITY, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn unsupported_combination() {
        assert!(lambda_poisedness_zm(4, 7, 3.0, 1.0).is_err());
    }

    #[test]
    fn lagrange_values_at_nodes() {
        assert_eq!(lagrange_zm_value(3, 7, 1.0, 1, &[0.0; 3]), 1.0);
        let d = 0.5;
        assert!((lagrange_zm_value(3, 7, d, 2, &[d, 0.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
