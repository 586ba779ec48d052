//! Real orthonormal spherical harmonics on `S^2`.
//!
//! `Y_lm` is evaluated through a Cartesian recurrence in `(x, y, z)` (no
//! Condon–Shortley phase), so the same code yields values on `f64` and exact
//! ambient derivatives on [`Dual2`]. Coefficients are stored at index
//! `l^2 + l + m`; `m > 0` is the cosine family, `m < 0` the sine family.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::{ConformalFactor, Jet2, SpherePoint};
use crate::error::{Error, Result};

/// Number of coefficients for band limit `l_max`.
pub fn num_coeffs(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Storage index of `(l, m)`.
pub fn coeff_index(l: usize, m: i64) -> usize {
    debug_assert!(m.unsigned_abs() as usize <= l);
    ((l * l + l) as i64 + m) as usize
}

/// Degree `l` of a storage index.
pub fn degree_of(index: usize) -> usize {
    (index as f64).sqrt().floor() as usize
}

/// Ring of scalars the recurrence runs on.
pub trait ShScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(c: f64) -> Self;
    fn scale(self, c: f64) -> Self;
}

impl ShScalar for f64 {
    fn constant(c: f64) -> Self {
        c
    }
    fn scale(self, c: f64) -> Self {
        self * c
    }
}

/// Second-order hyperdual number in three variables: value, gradient and
/// Hessian propagated exactly through `+`, `-` and `*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub g: [f64; 3],
    pub h: [[f64; 3]; 3],
}

impl Dual2 {
    /// The coordinate function `x_i`.
    pub fn variable(value: f64, i: usize) -> Self {
        let mut g = [0.0; 3];
        g[i] = 1.0;
        Self {
            v: value,
            g,
            h: [[0.0; 3]; 3],
        }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        self.v += o.v;
        for i in 0..3 {
            self.g[i] += o.g[i];
            for j in 0..3 {
                self.h[i][j] += o.h[i][j];
            }
        }
        self
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut r = Self::constant(self.v * o.v);
        for i in 0..3 {
            r.g[i] = self.g[i] * o.v + self.v * o.g[i];
            for j in 0..3 {
                r.h[i][j] = self.h[i][j] * o.v
                    + self.v * o.h[i][j]
                    + self.g[i] * o.g[j]
                    + self.g[j] * o.g[i];
            }
        }
        r
    }
}

impl ShScalar for Dual2 {
    fn constant(c: f64) -> Self {
        Self {
            v: c,
            g: [0.0; 3],
            h: [[0.0; 3]; 3],
        }
    }
    fn scale(mut self, c: f64) -> Self {
        self.v *= c;
        for i in 0..3 {
            self.g[i] *= c;
            for j in 0..3 {
                self.h[i][j] *= c;
            }
        }
        self
    }
}

/// Normalized associated Legendre factors `Tbar_l^m(z)` for `0 <= m <= l <= l_max`,
/// stored at `l (l + 1) / 2 + m`. On the sphere
/// `Y_lm = sqrt(2) Tbar_l^m Re/Im (x + i y)^m` (and `Y_l0 = Tbar_l^0`).
pub fn legendre_table<T: ShScalar>(l_max: usize, z: T) -> Vec<T> {
    let tri = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![T::constant(0.0); (l_max + 1) * (l_max + 2) / 2];
    p[0] = T::constant((0.25 / std::f64::consts::PI).sqrt());
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            p[tri(m, m)] = p[tri(m - 1, m - 1)].scale(((2.0 * mf + 1.0) / (2.0 * mf)).sqrt());
        }
        if m < l_max {
            p[tri(m + 1, m)] = (z * p[tri(m, m)]).scale((2.0 * m as f64 + 3.0).sqrt());
        }
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[tri(l, m)] = (z * p[tri(l - 1, m)] - p[tri(l - 2, m)].scale(b)).scale(a);
        }
    }
    p
}

/// `(Re, Im)` of `(x + i y)^m` for `m = 0..=l_max`.
pub fn azimuthal_table<T: ShScalar>(l_max: usize, x: T, y: T) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(l_max + 1);
    let mut c = T::constant(1.0);
    let mut s = T::constant(0.0);
    out.push((c, s));
    for _ in 0..l_max {
        let nc = x * c - y * s;
        let ns = x * s + y * c;
        c = nc;
        s = ns;
        out.push((c, s));
    }
    out
}

/// All real harmonics up to `l_max` at `(x, y, z)`, in storage order.
pub fn eval_basis<T: ShScalar>(l_max: usize, x: T, y: T, z: T) -> Vec<T> {
    let p = legendre_table(l_max, z);
    let cs = azimuthal_table(l_max, x, y);
    let mut out = vec![T::constant(0.0); num_coeffs(l_max)];
    let r2 = std::f64::consts::SQRT_2;
    for l in 0..=l_max {
        let base = l * (l + 1) / 2;
        out[coeff_index(l, 0)] = p[base];
        for m in 1..=l {
            let t = p[base + m];
            out[coeff_index(l, m as i64)] = (t * cs[m].0).scale(r2);
            out[coeff_index(l, -(m as i64))] = (t * cs[m].1).scale(r2);
        }
    }
    out
}

/// A finite real spherical-harmonic expansion `rho = sum c_lm Y_lm` on `S^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShExpansion {
    l_max: usize,
    coeffs: Vec<f64>,
}

impl ShExpansion {
    pub fn new(l_max: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != num_coeffs(l_max) {
            return Err(Error::DimensionMismatch {
                expected: num_coeffs(l_max),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "harmonic coefficient".into(),
            });
        }
        Ok(Self { l_max, coeffs })
    }

    pub fn zero(l_max: usize) -> Self {
        Self {
            l_max,
            coeffs: vec![0.0; num_coeffs(l_max)],
        }
    }

    /// The constant function `c`.
    pub fn constant(l_max: usize, c: f64) -> Self {
        let mut e = Self::zero(l_max);
        e.coeffs[0] = c * (4.0 * std::f64::consts::PI).sqrt();
        e
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn set(&mut self, l: usize, m: i64, value: f64) {
        let i = coeff_index(l, m);
        self.coeffs[i] = value;
    }

    pub fn get(&self, l: usize, m: i64) -> f64 {
        self.coeffs[coeff_index(l, m)]
    }

    fn check_point(x: &SpherePoint) {
        assert_eq!(x.dim(), 2, "spherical harmonic expansions live on S^2");
    }

    pub fn eval(&self, x: &SpherePoint) -> f64 {
        Self::check_point(x);
        let c = x.coords();
        eval_basis(self.l_max, c[0], c[1], c[2])
            .iter()
            .zip(&self.coeffs)
            .map(|(y, a)| y * a)
            .sum()
    }

    /// Exact 2-jet through the polynomial ambient extension.
    pub fn jet(&self, x: &SpherePoint) -> Jet2 {
        Self::check_point(x);
        let c = x.coords();
        let basis = eval_basis(
            self.l_max,
            Dual2::variable(c[0], 0),
            Dual2::variable(c[1], 1),
            Dual2::variable(c[2], 2),
        );
        let mut acc = Dual2::constant(0.0);
        for (y, a) in basis.iter().zip(&self.coeffs) {
            if *a != 0.0 {
                acc = acc + y.scale(*a);
            }
        }
        let hess = DMatrix::from_fn(3, 3, |i, j| acc.h[i][j]);
        Jet2::from_ambient(x, acc.v, &acc.g, &hess)
    }
}

impl ConformalFactor for ShExpansion {
    fn value(&self, x: &SpherePoint) -> f64 {
        self.eval(x)
    }

    fn analytic_jet(&self, x: &SpherePoint) -> Option<Jet2> {
        Some(self.jet(x))
    }

    fn describe(&self) -> String {
        format!("harmonic expansion of degree {}", self.l_max)
    }
}
