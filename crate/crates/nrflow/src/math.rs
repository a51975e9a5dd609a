//! Scalar abstraction and forward-mode dual numbers.
//!
//! Plant dynamics are written once, generically over [`Scalar`], and evaluated
//! either with plain `f64` or with [`Dual`] numbers carrying a K-wide tangent.
//! Seeding the tangent with the input directions yields exact Jacobians of the
//! discretized prediction map in a single pass.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Operations the vehicle models need from a scalar type.
///
/// The real part of a `Dual` follows exactly the same `f64` operations in the
/// same order as a plain `f64` evaluation, so value results are bitwise
/// identical across the two paths.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn from_f64(v: f64) -> Self;
    /// Value (real) part.
    fn re(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(self) -> f64 {
        self
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
    fn tan(self) -> Self {
        f64::tan(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// Dual number with a K-wide tangent: `re + eps[0]·ε₀ + … + eps[K-1]·ε_{K-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<const K: usize> {
    pub re: f64,
    pub eps: [f64; K],
}

impl<const K: usize> Dual<K> {
    /// Constant (zero tangent).
    #[inline]
    pub fn constant(re: f64) -> Self {
        Self { re, eps: [0.0; K] }
    }

    /// Variable seeded along tangent direction `dir`.
    #[inline]
    pub fn variable(re: f64, dir: usize) -> Self {
        let mut eps = [0.0; K];
        eps[dir] = 1.0;
        Self { re, eps }
    }
}

impl<const K: usize> Add for Dual<K> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (e, r) in eps.iter_mut().zip(rhs.eps.iter()) {
            *e += r;
        }
        Self { re: self.re + rhs.re, eps }
    }
}

impl<const K: usize> Sub for Dual<K> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (e, r) in eps.iter_mut().zip(rhs.eps.iter()) {
            *e -= r;
        }
        Self { re: self.re - rhs.re, eps }
    }
}

impl<const K: usize> Mul for Dual<K> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; K];
        for i in 0..K {
            eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Self { re: self.re * rhs.re, eps }
    }
}

impl<const K: usize> Div for Dual<K> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let re = self.re * inv;
        let mut eps = [0.0; K];
        for i in 0..K {
            eps[i] = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Self { re, eps }
    }
}

impl<const K: usize> Neg for Dual<K> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e = -*e;
        }
        Self { re: -self.re, eps }
    }
}

impl<const K: usize> AddAssign for Dual<K> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<const K: usize> SubAssign for Dual<K> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl<const K: usize> Scalar for Dual<K> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Self::constant(v)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = self.re.sin_cos();
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= c;
        }
        Self { re: s, eps }
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = self.re.sin_cos();
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= -s;
        }
        Self { re: c, eps }
    }
    #[inline]
    fn tan(self) -> Self {
        let t = self.re.tan();
        let sec2 = 1.0 + t * t;
        let mut eps = self.eps;
        for e in eps.iter_mut() {
            *e *= sec2;
        }
        Self { re: t, eps }
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|e| e.is_finite())
    }
}

/// Wraps an angle to `(-π, π]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Wrapped angle difference `a - b` in `(-π, π]`.
#[inline]
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn dual_product_rule() {
        // d/dx (x * sin x) at x = 0.7 is sin x + x cos x
        let x = Dual::<1>::variable(0.7, 0);
        let y = x * x.sin();
        assert_relative_eq!(y.re, 0.7 * 0.7f64.sin(), max_relative = 1e-15);
        assert_relative_eq!(y.eps[0], 0.7f64.sin() + 0.7 * 0.7f64.cos(), max_relative = 1e-14);
    }

    #[test]
    fn dual_quotient_and_tan() {
        // d/dx tan(x) = 1/cos^2(x); d/dx (1/x) = -1/x^2
        let x = Dual::<1>::variable(0.3, 0);
        let t = x.tan();
        assert_relative_eq!(t.eps[0], 1.0 / (0.3f64.cos().powi(2)), max_relative = 1e-14);
        let inv = Dual::<1>::constant(1.0) / x;
        assert_relative_eq!(inv.eps[0], -1.0 / (0.3f64 * 0.3), max_relative = 1e-14);
    }

    #[test]
    fn dual_multiwidth_tangent() {
        // f(a, b) = a*b + sin(a), df/da = b + cos(a), df/db = a
        let a = Dual::<2>::variable(1.1, 0);
        let b = Dual::<2>::variable(-0.4, 1);
        let f = a * b + a.sin();
        assert_relative_eq!(f.eps[0], -0.4 + 1.1f64.cos(), max_relative = 1e-14);
        assert_relative_eq!(f.eps[1], 1.1, max_relative = 1e-14);
    }

    #[test]
    fn dual_real_part_matches_f64_path() {
        let xs = [0.3, -1.2, 2.9];
        for &v in &xs {
            let d = Dual::<3>::variable(v, 1);
            let expr_d = (d * d + d.sin()) / (d.cos() + Dual::constant(2.0));
            let expr_f = (v * v + v.sin()) / (v.cos() + 2.0);
            assert_eq!(expr_d.re, expr_f);
        }
    }

    #[test]
    fn wrap_angle_range() {
        assert_relative_eq!(wrap_angle(3.0 * std::f64::consts::PI), std::f64::consts::PI);
        assert_relative_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
        assert!(wrap_angle(100.0).abs() <= std::f64::consts::PI);
        assert_relative_eq!(wrap_diff(0.1, -0.1), 0.2, max_relative = 1e-12);
        // crossing the seam
        assert_relative_eq!(wrap_diff(3.1, -3.1), 3.1 + 3.1 - 2.0 * std::f64::consts::PI, max_relative = 1e-12);
    }
}
