//! Deterministic low-discrepancy sample sets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::charts::{Chart, Point};
use crate::error::{GeoError, Result};

/// Radical inverse of `index` in `base` (the Halton / van der Corput sequence).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

/// `n` points of the 3-D Halton sequence (bases 2, 3, 5), skipping index 0.
pub fn halton(n: usize) -> Vec<[f64; 3]> {
    (1..=n as u64)
        .map(|i| {
            [
                radical_inverse(i, 2),
                radical_inverse(i, 3),
                radical_inverse(i, 5),
            ]
        })
        .collect()
}

/// Spherical shell `r_min <= |x - center| <= r_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub center: Point,
    pub r_min: f64,
    pub r_max: f64,
}

impl Shell {
    pub fn new(center: Point, r_min: f64, r_max: f64) -> Result<Self> {
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(GeoError::InvalidSpec(format!(
                "bad shell radii [{r_min}, {r_max}]"
            )));
        }
        Ok(Self {
            center,
            r_min,
            r_max,
        })
    }

    /// Map a unit-cube sample to the shell: radius linear in `u0`, direction
    /// uniform on the sphere.
    pub fn map(&self, u: &[f64; 3]) -> Point {
        let r = self.r_min + (self.r_max - self.r_min) * u[0];
        let cos_t = 2.0 * u[1] - 1.0;
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let phi = 2.0 * PI * u[2];
        [
            self.center[0] + r * sin_t * phi.cos(),
            self.center[1] + r * sin_t * phi.sin(),
            self.center[2] + r * cos_t,
        ]
    }

    /// The first `n` Halton points mapped into the shell.
    pub fn halton_points(&self, n: usize) -> Vec<Point> {
        halton(n).iter().map(|u| self.map(u)).collect()
    }

    /// The first `n` Halton points of the shell that lie in the chart domain.
    pub fn halton_points_in(&self, chart: &Chart, n: usize) -> Result<Vec<Point>> {
        let mut out = Vec::with_capacity(n);
        let mut i = 1u64;
        let limit = 100 * n as u64 + 1000;
        while out.len() < n {
            if i > limit {
                return Err(GeoError::InvalidSpec(format!(
                    "shell {:?} has too few points inside chart `{}`",
                    self,
                    chart.name()
                )));
            }
            let p = self.map(&[
                radical_inverse(i, 2),
                radical_inverse(i, 3),
                radical_inverse(i, 5),
            ]);
            if chart.contains(&p) {
                out.push(p);
            }
            i += 1;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_corput_base_two() {
        let v: Vec<f64> = (1..5).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn shell_points_stay_in_shell() {
        let s = Shell::new([1.0, 0.0, -2.0], 3.0, 10.0).unwrap();
        for p in s.halton_points(1000) {
            let r = ((p[0] - 1.0).powi(2) + p[1].powi(2) + (p[2] + 2.0).powi(2)).sqrt();
            assert!((3.0 - 1e-12..=10.0 + 1e-12).contains(&r));
        }
    }

    #[test]
    fn sample_sets_are_reproducible() {
        let s = Shell::new([0.0; 3], 1.0, 2.0).unwrap();
        assert_eq!(s.halton_points(50), s.halton_points(50));
    }
}
