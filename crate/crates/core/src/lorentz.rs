//! Minkowski space `L^{n+2}` with the Lorentzian inner product
//! `<u, v> = -u_0 v_0 + sum_{i >= 1} u_i v_i`, and membership tests for the
//! hyperbolic space `H^{n+1}`, de Sitter space `S_1^{n+1}` and the positive
//! light cone `N_+^{n+1}`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Default tolerance for [`classify`].
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

/// A point or vector of `L^{n+2}`; index 0 is the timelike coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzVec(Vec<f64>);

impl LorentzVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "LorentzVec coordinates".into(),
            });
        }
        Ok(Self(coords))
    }

    /// Builds `(time, space...)` without validation. Callers guarantee finiteness.
    pub(crate) fn from_parts(time: f64, space: &[f64]) -> Self {
        let mut v = Vec::with_capacity(space.len() + 1);
        v.push(time);
        v.extend_from_slice(space);
        Self(v)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Timelike coordinate `x_0`.
    pub fn time(&self) -> f64 {
        self.0[0]
    }

    /// Spacelike part `(x_1, ..., x_{n+1})`.
    pub fn space(&self) -> &[f64] {
        &self.0[1..]
    }

    /// Lorentzian inner product; see [`lorentz_dot`].
    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let space: f64 = self.0[1..]
            .iter()
            .zip(&other.0[1..])
            .map(|(a, b)| a * b)
            .sum();
        space - self.0[0] * other.0[0]
    }

    /// `<v, v>`.
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for LorentzVec {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &LorentzVec {
    type Output = LorentzVec;
    fn add(self, rhs: &LorentzVec) -> LorentzVec {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &LorentzVec {
    type Output = LorentzVec;
    fn sub(self, rhs: &LorentzVec) -> LorentzVec {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &LorentzVec {
    type Output = LorentzVec;
    fn mul(self, s: f64) -> LorentzVec {
        self.scale(s)
    }
}

impl Neg for &LorentzVec {
    type Output = LorentzVec;
    fn neg(self) -> LorentzVec {
        self.scale(-1.0)
    }
}

/// `-u_0 v_0 + sum_{i >= 1} u_i v_i`.
pub fn lorentz_dot(u: &LorentzVec, v: &LorentzVec) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    Ok(u.dot(v))
}

/// Which model hyperquadric a vector lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadricTag {
    Hyperbolic,
    DeSitter,
    LightCone,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricClass {
    pub tag: QuadricTag,
    pub tolerance: f64,
}

/// Classifies `v` by `<v, v>` and the sign of `v_0`.
///
/// The light-cone test is relative to `|v|^2` so that large null vectors
/// such as `e^r (1, x)` still classify correctly.
pub fn classify(v: &LorentzVec, tol: f64) -> QuadricClass {
    let q = v.norm_sq();
    let scale: f64 = v.coords().iter().map(|c| c * c).sum();
    let tag = if (q + 1.0).abs() <= tol && v.time() > 0.0 {
        QuadricTag::Hyperbolic
    } else if (q - 1.0).abs() <= tol {
        QuadricTag::DeSitter
    } else if q.abs() <= tol * scale.max(1.0) && v.time() > 0.0 {
        QuadricTag::LightCone
    } else {
        QuadricTag::None
    };
    QuadricClass {
        tag,
        tolerance: tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(c: &[f64]) -> LorentzVec {
        LorentzVec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert_eq!(
            lorentz_dot(&v(&[1., 0., 0., 0.]), &v(&[1., 0., 0., 0.])).unwrap(),
            -1.0
        );
        assert_eq!(
            lorentz_dot(&v(&[1., 0., 0., 1.]), &v(&[1., 0., 0., 1.])).unwrap(),
            0.0
        );
        let (c, s) = (1f64.cosh(), 1f64.sinh());
        let w = v(&[c, 0., 0., s]);
        assert!((lorentz_dot(&w, &w).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn dot_dimension_mismatch() {
        let err = lorentz_dot(&v(&[1., 0., 0., 0.]), &v(&[1., 0., 0., 0., 0.])).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn rejects_non_finite_and_short() {
        assert!(LorentzVec::new(vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(LorentzVec::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn classify_examples() {
        let e = std::f64::consts::E;
        assert_eq!(
            classify(&v(&[1., 0., 0., 0.]), 1e-12).tag,
            QuadricTag::Hyperbolic
        );
        assert_eq!(
            classify(&v(&[e, 0., 0., e]), 1e-12).tag,
            QuadricTag::LightCone
        );
        assert_eq!(
            classify(&v(&[0., 1., 0., 0.]), 1e-12).tag,
            QuadricTag::DeSitter
        );
        assert_eq!(
            classify(&v(&[-1., 0., 0., 0.]), 1e-12).tag,
            QuadricTag::None
        );
        assert_eq!(classify(&v(&[-e, 0., 0., e]), 1e-12).tag, QuadricTag::None);
    }

    fn vec4() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 4)
    }

    proptest! {
        #[test]
        fn dot_symmetric_bilinear(a in vec4(), b in vec4(), c in vec4(), s in -3.0f64..3.0) {
            let (a, b, c) = (v(&a), v(&b), v(&c));
            prop_assert!((a.dot(&b) - b.dot(&a)).abs() < 1e-12);
            let lhs = a.axpy(s, &b).dot(&c);
            let rhs = a.dot(&c) + s * b.dot(&c);
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
        }

        #[test]
        fn hyperbolic_negation_is_none(x in prop::collection::vec(-3.0f64..3.0, 3)) {
            let s2: f64 = x.iter().map(|c| c * c).sum();
            let p = LorentzVec::from_parts((1.0 + s2).sqrt(), &x);
            prop_assert_eq!(classify(&p, 1e-9).tag, QuadricTag::Hyperbolic);
            prop_assert_eq!(classify(&-&p, 1e-9).tag, QuadricTag::None);
        }

        #[test]
        fn light_cone_rays(x in prop::collection::vec(-1.0f64..1.0, 3), r in -5.0f64..5.0) {
            let n: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            prop_assume!(n > 1e-3);
            let unit: Vec<f64> = x.iter().map(|c| c / n * r.exp()).collect();
            let p = LorentzVec::from_parts(r.exp(), &unit);
            prop_assert_eq!(classify(&p, DEFAULT_CLASSIFY_TOL).tag, QuadricTag::LightCone);
        }
    }
}
