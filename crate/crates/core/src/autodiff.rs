//! Forward-mode automatic differentiation.
//!
//! Two number types carry derivative information through ordinary arithmetic:
//!
//! * [`Dual<N>`] holds a value and its gradient with respect to `N` seed variables.
//! * [`Jet<N>`] additionally holds the (symmetric) Hessian, i.e. a truncated
//!   second-order multivariate Taylor expansion.
//!
//! Field expressions are written once, generically over [`Real`], and then
//! evaluated with `f64` for plain values or with `Jet<3>` to obtain exact first
//! and second partial derivatives in chart coordinates.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Scalar arithmetic shared by `f64` and the derivative-carrying types.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// Lift a constant (all derivatives zero).
    fn cst(v: f64) -> Self;
    /// The value part.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn ln_1p(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn recip(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
    fn square(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn ln_1p(self) -> Self {
        f64::ln_1p(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn recip(self) -> Self {
        f64::recip(self)
    }
}

/// Value plus gradient with respect to `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const N: usize> {
    pub value: f64,
    pub gradient: [f64; N],
}

impl<const N: usize> Dual<N> {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            gradient: [0.0; N],
        }
    }

    /// The `index`-th seed variable evaluated at `value`.
    pub fn variable(value: f64, index: usize) -> Self {
        let mut gradient = [0.0; N];
        gradient[index] = 1.0;
        Self { value, gradient }
    }

    pub fn new(value: f64, gradient: [f64; N]) -> Self {
        Self { value, gradient }
    }

    /// Apply a scalar function given its value and first derivative at `self.value`.
    #[inline]
    fn chain(self, f0: f64, f1: f64) -> Self {
        let mut gradient = self.gradient;
        for g in gradient.iter_mut() {
            *g *= f1;
        }
        Self {
            value: f0,
            gradient,
        }
    }
}

/// Value, gradient and Hessian with respect to `N` variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const N: usize> {
    pub value: f64,
    pub gradient: [f64; N],
    pub hessian: [[f64; N]; N],
}

impl<const N: usize> Jet<N> {
    pub fn constant(value: f64) -> Self {
        Self {
            value,
            gradient: [0.0; N],
            hessian: [[0.0; N]; N],
        }
    }

    pub fn variable(value: f64, index: usize) -> Self {
        let mut jet = Self::constant(value);
        jet.gradient[index] = 1.0;
        jet
    }

    /// Seed all `N` variables at the point `p`.
    pub fn seed(p: &[f64; N]) -> [Self; N] {
        std::array::from_fn(|i| Self::variable(p[i], i))
    }

    /// Drop the second-order part.
    pub fn to_dual(&self) -> Dual<N> {
        Dual {
            value: self.value,
            gradient: self.gradient,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.gradient.iter().all(|g| g.is_finite())
            && self.hessian.iter().flatten().all(|h| h.is_finite())
    }

    #[inline]
    fn chain(self, f0: f64, f1: f64, f2: f64) -> Self {
        let mut out = Self::constant(f0);
        for i in 0..N {
            out.gradient[i] = f1 * self.gradient[i];
            for j in 0..N {
                out.hessian[i][j] =
                    f1 * self.hessian[i][j] + f2 * (self.gradient[i] * self.gradient[j]);
            }
        }
        out
    }
}

/// Chain rule: an outer jet in three chart variables composed with three inner
/// jets in `M` parameters.
pub fn compose<const M: usize>(outer: &Jet<3>, inner: &[Jet<M>; 3]) -> Jet<M> {
    let mut out = Jet::<M>::constant(outer.value);
    for a in 0..M {
        let mut g = 0.0;
        for k in 0..3 {
            g += outer.gradient[k] * inner[k].gradient[a];
        }
        out.gradient[a] = g;
    }
    for a in 0..M {
        for b in a..M {
            let mut h = 0.0;
            for k in 0..3 {
                h += outer.gradient[k] * inner[k].hessian[a][b];
                for l in 0..3 {
                    h += outer.hessian[k][l] * inner[k].gradient[a] * inner[l].gradient[b];
                }
            }
            out.hessian[a][b] = h;
            out.hessian[b][a] = h;
        }
    }
    out
}

macro_rules! impl_real_common {
    ($ty:ident) => {
        impl<const N: usize> Add<f64> for $ty<N> {
            type Output = Self;
            #[inline]
            fn add(mut self, rhs: f64) -> Self {
                self.value += rhs;
                self
            }
        }

        impl<const N: usize> Sub<f64> for $ty<N> {
            type Output = Self;
            #[inline]
            fn sub(mut self, rhs: f64) -> Self {
                self.value -= rhs;
                self
            }
        }

        impl<const N: usize> Div<f64> for $ty<N> {
            type Output = Self;
            #[inline]
            fn div(self, rhs: f64) -> Self {
                self * (1.0 / rhs)
            }
        }

        impl<const N: usize> Div for $ty<N> {
            type Output = Self;
            #[inline]
            fn div(self, rhs: Self) -> Self {
                self * rhs.recip()
            }
        }

        impl<const N: usize> Sub for $ty<N> {
            type Output = Self;
            #[inline]
            fn sub(self, rhs: Self) -> Self {
                self + (-rhs)
            }
        }

        impl<const N: usize> AddAssign for $ty<N> {
            #[inline]
            fn add_assign(&mut self, rhs: Self) {
                *self = *self + rhs;
            }
        }

        impl<const N: usize> SubAssign for $ty<N> {
            #[inline]
            fn sub_assign(&mut self, rhs: Self) {
                *self = *self - rhs;
            }
        }

        impl<const N: usize> MulAssign for $ty<N> {
            #[inline]
            fn mul_assign(&mut self, rhs: Self) {
                *self = *self * rhs;
            }
        }

        impl<const N: usize> Mul<$ty<N>> for f64 {
            type Output = $ty<N>;
            #[inline]
            fn mul(self, rhs: $ty<N>) -> $ty<N> {
                rhs * self
            }
        }

        impl<const N: usize> Add<$ty<N>> for f64 {
            type Output = $ty<N>;
            #[inline]
            fn add(self, rhs: $ty<N>) -> $ty<N> {
                rhs + self
            }
        }

        impl<const N: usize> Sub<$ty<N>> for f64 {
            type Output = $ty<N>;
            #[inline]
            fn sub(self, rhs: $ty<N>) -> $ty<N> {
                (-rhs) + self
            }
        }
    };
}

impl_real_common!(Dual);
impl_real_common!(Jet);

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for i in 0..N {
            self.gradient[i] += rhs.gradient[i];
        }
        self
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(mut self) -> Self {
        self.value = -self.value;
        for g in self.gradient.iter_mut() {
            *g = -*g;
        }
        self
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut gradient = [0.0; N];
        for i in 0..N {
            gradient[i] = self.value * rhs.gradient[i] + rhs.value * self.gradient[i];
        }
        Self {
            value: self.value * rhs.value,
            gradient,
        }
    }
}

impl<const N: usize> Mul<f64> for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        self.value *= rhs;
        for g in self.gradient.iter_mut() {
            *g *= rhs;
        }
        self
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    #[inline]
    fn add(mut self, rhs: Self) -> Self {
        self.value += rhs.value;
        for i in 0..N {
            self.gradient[i] += rhs.gradient[i];
            for j in 0..N {
                self.hessian[i][j] += rhs.hessian[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        self * -1.0
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::constant(self.value * rhs.value);
        for i in 0..N {
            out.gradient[i] = self.value * rhs.gradient[i] + rhs.value * self.gradient[i];
            for j in 0..N {
                out.hessian[i][j] = self.value * rhs.hessian[i][j]
                    + rhs.value * self.hessian[i][j]
                    + (self.gradient[i] * rhs.gradient[j] + rhs.gradient[i] * self.gradient[j]);
            }
        }
        out
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    #[inline]
    fn mul(mut self, rhs: f64) -> Self {
        self.value *= rhs;
        for i in 0..N {
            self.gradient[i] *= rhs;
            for j in 0..N {
                self.hessian[i][j] *= rhs;
            }
        }
        self
    }
}

impl<const N: usize> Real for Dual<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn re(&self) -> f64 {
        self.value
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn exp_m1(self) -> Self {
        self.chain(self.value.exp_m1(), self.value.exp())
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), 1.0 / self.value)
    }
    fn ln_1p(self) -> Self {
        self.chain(self.value.ln_1p(), 1.0 / (1.0 + self.value))
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let v = self.value;
        self.chain(v.powi(n), n as f64 * v.powi(n - 1))
    }
    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r)
    }
}

impl<const N: usize> Real for Jet<N> {
    fn cst(v: f64) -> Self {
        Self::constant(v)
    }
    fn re(&self) -> f64 {
        self.value
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.value))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn exp_m1(self) -> Self {
        let e = self.value.exp();
        self.chain(self.value.exp_m1(), e, e)
    }
    fn ln(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(self.value.ln(), r, -r * r)
    }
    fn ln_1p(self) -> Self {
        let r = 1.0 / (1.0 + self.value);
        self.chain(self.value.ln_1p(), r, -r * r)
    }
    fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(1.0),
            1 => self,
            _ => {
                let v = self.value;
                let nf = n as f64;
                self.chain(
                    v.powi(n),
                    nf * v.powi(n - 1),
                    nf * (nf - 1.0) * v.powi(n - 2),
                )
            }
        }
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn recip(self) -> Self {
        let r = 1.0 / self.value;
        self.chain(r, -r * r, 2.0 * r * r * r)
    }
}
