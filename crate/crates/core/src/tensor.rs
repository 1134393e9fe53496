//! Fixed-size 3x3 helpers, generic over [`Real`] where the Christoffel map
//! needs to be differentiated.

use crate::autodiff::Real;
use crate::charts::Point;
use crate::error::{GeoError, Result};

pub type Mat3 = [[f64; 3]; 3];

/// Metrics whose Frobenius condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

pub fn det3<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Inverse by the adjugate formula. No singularity check; see [`checked_inverse`].
pub fn inverse3<T: Real>(m: &[[T; 3]; 3]) -> [[T; 3]; 3] {
    let inv_det = det3(m).recip();
    let cof =
        |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    [
        [
            cof(1, 2, 1, 2) * inv_det,
            cof(0, 2, 2, 1) * inv_det,
            cof(0, 1, 1, 2) * inv_det,
        ],
        [
            cof(1, 2, 2, 0) * inv_det,
            cof(0, 2, 0, 2) * inv_det,
            cof(0, 1, 2, 0) * inv_det,
        ],
        [
            cof(1, 2, 0, 1) * inv_det,
            cof(0, 2, 1, 0) * inv_det,
            cof(0, 1, 0, 1) * inv_det,
        ],
    ]
}

pub fn frobenius(m: &Mat3) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Inverse with a condition-number guard.
pub fn checked_inverse(m: &Mat3, point: &Point) -> Result<Mat3> {
    let det = det3(m);
    if !det.is_finite() || det == 0.0 {
        return Err(GeoError::SingularMetric {
            point: *point,
            condition: f64::INFINITY,
        });
    }
    let inv = inverse3(m);
    let condition = frobenius(m) * frobenius(&inv);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(GeoError::SingularMetric {
            point: *point,
            condition,
        });
    }
    Ok(inv)
}

pub fn mat_vec(m: &Mat3, v: &Point) -> Point {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `m(u, v) = m_ij u^i v^j`.
pub fn bilinear(m: &Mat3, u: &Point, v: &Point) -> f64 {
    dot(u, &mat_vec(m, v))
}

/// Norm of a covariant 2-tensor measured in an orthonormal frame of the metric
/// with inverse `inv`: `sqrt(T_ij T_kl g^ik g^jl)`.
pub fn frame_norm(t: &Mat3, inv: &Mat3) -> f64 {
    // raised = g^-1 T g^-1, then contract with T
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let mut raised = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    raised += inv[i][k] * inv[j][l] * t[k][l];
                }
            }
            s += raised * t[i][j];
        }
    }
    s.max(0.0).sqrt()
}

pub fn transpose_defect(m: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += (m[i][j] - m[j][i]).powi(2);
        }
    }
    s.sqrt()
}
