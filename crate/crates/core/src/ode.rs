//! Adaptive Dormand–Prince 5(4) integration with exact landing on output times.

use crate::error::{GeoError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerance(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `y' = rhs(t, y)` from `t0` and return the state at each time in
/// `outputs` (which must be monotone in the direction of integration).
///
/// `post_step` runs after every accepted step and may modify the state; it is
/// where constraint projections hook in.
pub fn integrate<F, P>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
    P: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(outputs.len());
    let Some(&t_last) = outputs.last() else {
        return Ok(out);
    };
    let dir = if t_last >= t0 { 1.0 } else { -1.0 };
    let mut h = opts.initial_step.abs().min(opts.max_step) * dir;
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    rhs(t, &y, &mut k[0])?;
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut steps = 0usize;

    for &target in outputs {
        if (target - t) * dir < 0.0 {
            return Err(GeoError::Integration(
                "output times are not monotone".into(),
            ));
        }
        while (target - t) * dir > 0.0 {
            steps += 1;
            if steps > opts.max_steps {
                return Err(GeoError::Integration(format!(
                    "exceeded {} steps",
                    opts.max_steps
                )));
            }
            let remaining = target - t;
            let landing = h.abs() >= remaining.abs();
            let step = if landing { remaining } else { h };

            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += step * A[s][j] * kj[i];
                    }
                    ytmp[i] = acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                rhs(t + C[s] * step, &ytmp, &mut tail[0])?;
            }
            // stage 6 was evaluated at the 5th-order solution (FSAL)
            let mut err = 0.0;
            for i in 0..n {
                let mut y5 = y[i];
                let mut e = 0.0;
                for s in 0..7 {
                    y5 += step * B5[s] * k[s][i];
                    e += step * (B5[s] - B4[s]) * k[s][i];
                }
                ynew[i] = y5;
                let scale = opts.atol + opts.rtol * y[i].abs().max(y5.abs());
                err += (e / scale).powi(2);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                h *= 0.25;
                if h.abs() < 1e-300 {
                    return Err(GeoError::Integration("step size underflow".into()));
                }
                continue;
            }
            if err <= 1.0 {
                t = if landing { target } else { t + step };
                y.copy_from_slice(&ynew);
                post_step(t, &mut y)?;
                rhs(t, &y, &mut k[0])?;
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if !landing || factor < 1.0 {
                    h = (step * factor).abs().min(opts.max_step) * dir;
                }
            } else {
                let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                h = step * factor;
                if h.abs() < 1e-14 * t.abs().max(1.0) {
                    return Err(GeoError::Integration("step size underflow".into()));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `∫ f(s) ds` over `[a, b]` by the adaptive integrator.
pub fn quad<F>(mut f: F, a: f64, b: f64, opts: &OdeOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let out = integrate(
        |s, _y, dy| {
            dy[0] = f(s)?;
            Ok(())
        },
        a,
        &[0.0],
        &[b],
        opts,
        |_, _| Ok(()),
    )?;
    Ok(out[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_over_one_period() {
        let opts = OdeOptions::with_tolerance(1e-12, 1e-14);
        let tau = 2.0 * std::f64::consts::PI;
        let out = integrate(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            &[1.0, 0.0],
            &[tau / 4.0, tau],
            &opts,
            |_, _| Ok(()),
        )
        .unwrap();
        assert!(out[0][0].abs() < 1e-10 && (out[0][1] + 1.0).abs() < 1e-10);
        assert!((out[1][0] - 1.0).abs() < 1e-10 && out[1][1].abs() < 1e-10);
    }

    #[test]
    fn quadrature_of_polynomial_and_backwards() {
        let opts = OdeOptions::default();
        let v = quad(|s| Ok(3.0 * s * s), 0.0, 2.0, &opts).unwrap();
        assert!((v - 8.0).abs() < 1e-10);
        let v = quad(|s| Ok(3.0 * s * s), 2.0, 0.0, &opts).unwrap();
        assert!((v + 8.0).abs() < 1e-10);
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = quad(
            |_| Err(GeoError::ZeroMass),
            0.0,
            1.0,
            &OdeOptions::default(),
        );
        assert_eq!(r, Err(GeoError::ZeroMass));
    }
}
