//! Least-squares fits, log-log convergence slopes and Richardson extrapolation.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeoError, Result};

/// Coefficients `c` minimizing `Σ_k (Σ_j c_j basis_j(x_k) − y_k)²`.
pub fn least_squares(xs: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Result<Vec<f64>> {
    if xs.len() != ys.len() || xs.len() < basis.len() || basis.is_empty() {
        return Err(GeoError::InvalidSpec(format!(
            "least squares needs at least {} samples, got {}",
            basis.len(),
            xs.len()
        )));
    }
    let a = DMatrix::from_fn(xs.len(), basis.len(), |i, j| basis[j](xs[i]));
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| GeoError::InvalidSpec(e.to_string()))?;
    if c.iter().all(|v| v.is_finite()) {
        Ok(c.iter().copied().collect())
    } else {
        Err(GeoError::InvalidSpec(
            "least squares system is singular".into(),
        ))
    }
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(GeoError::InvalidSpec(
            "log-log fit needs positive finite data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let c = least_squares(&lx, &ly, &[&|_| 1.0, &|x| x])?;
    Ok(c[1])
}

/// Two-level Richardson step for data `v(h)`, `v(h/2)` with error `O(h^p)`.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    let k = 2f64.powf(order);
    (k * fine - coarse) / (k - 1.0)
}

/// Extrapolate values at `R`, `2R`, `4R` whose error expands in `1/R, 1/R², …`:
/// eliminate the `1/R` term pairwise, then the `1/R²` term.
pub fn richardson_three(v1: f64, v2: f64, v4: f64) -> f64 {
    let a1 = richardson(v1, v2, 1.0);
    let a2 = richardson(v2, v4, 1.0);
    richardson(a1, a2, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_slope() {
        let xs = [1e-2, 1e-3, 1e-4, 1e-5];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&xs, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn recovers_polynomial_coefficients() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|r| -2.0 / r + 5.0 / (r * r * r)).collect();
        let c = least_squares(&xs, &ys, &[&|r| 1.0 / r, &|r| r.powi(-3)]).unwrap();
        assert!((c[0] + 2.0).abs() < 1e-12 && (c[1] - 5.0).abs() < 1e-8);
    }

    #[test]
    fn richardson_removes_first_two_orders() {
        let f = |r: f64| 1.5 + 2.0 / r - 3.0 / (r * r);
        let v = richardson_three(f(5.0), f(10.0), f(20.0));
        assert!((v - 1.5).abs() < 1e-13);
    }
}
