//! Pointwise calculus on the round sphere `(S^n, g0)`.
//!
//! Everything here works in an explicit `g0`-orthonormal tangent frame at a
//! point, so bilinear forms are plain `n x n` matrices. The Laplacian is the
//! trace of the covariant Hessian, so `Δ x_k = -n x_k`.

pub mod grid;
pub mod harmonics;

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, SymEigen};

/// Step for first derivatives in the finite-difference chart.
pub const FD_GRAD_STEP: f64 = 1e-5;
/// Step for second derivatives in the finite-difference chart.
pub const FD_HESS_STEP: f64 = 1e-3;

/// A unit vector of `R^{n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(Vec<f64>);

impl SpherePoint {
    /// Accepts coordinates whose norm is 1 within `1e-12`.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let norm = euclid_norm(&coords);
        if coords.len() < 3 || !norm.is_finite() {
            return Err(Error::DimensionMismatch {
                expected: 3,
                found: coords.len(),
            });
        }
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotOnSphere { norm });
        }
        Ok(Self(coords))
    }

    /// Normalizes arbitrary nonzero coordinates.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        let norm = euclid_norm(&coords);
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotOnSphere { norm });
        }
        Self::new(coords.into_iter().map(|c| c / norm).collect())
    }

    /// Point with colatitude `theta` and longitude `phi` on `S^2`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self(vec![st * cp, st * sp, ct])
    }

    /// North pole `(0, ..., 0, 1)` of `S^n`.
    pub fn north(n: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        v[n] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// `(theta, phi)` for points of `S^2`, `phi` in `[0, 2 pi)`.
    pub fn angles(&self) -> (f64, f64) {
        let theta = self.0[2].clamp(-1.0, 1.0).acos();
        let mut phi = self.0[1].atan2(self.0[0]);
        if phi < 0.0 {
            phi += 2.0 * std::f64::consts::PI;
        }
        (theta, phi)
    }

    /// Exponential map: `cos|v| x + sin|v| v/|v|` for tangent `v`.
    pub fn exp(&self, v: &[f64]) -> SpherePoint {
        let t = euclid_norm(v);
        if t == 0.0 {
            return self.clone();
        }
        let (s, c) = t.sin_cos();
        let p: Vec<f64> = self
            .0
            .iter()
            .zip(v)
            .map(|(x, vi)| c * x + s * vi / t)
            .collect();
        SpherePoint::normalize(p).expect("exp of finite tangent vector")
    }
}

/// A tangent vector at a sphere point, stored in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVec {
    pub base: SpherePoint,
    pub vec: Vec<f64>,
}

impl TangentVec {
    /// Requires `vec` orthogonal to `base` within `1e-10`.
    pub fn new(base: SpherePoint, vec: Vec<f64>) -> Result<Self> {
        if vec.len() != base.0.len() {
            return Err(Error::DimensionMismatch {
                expected: base.0.len(),
                found: vec.len(),
            });
        }
        let d = dot(&vec, &base.0);
        if d.abs() > 1e-10 * (1.0 + euclid_norm(&vec)) {
            return Err(Error::DomainViolation(format!(
                "tangent vector not orthogonal to base (dot {d})"
            )));
        }
        Ok(Self { base, vec })
    }

    pub fn norm(&self) -> f64 {
        euclid_norm(&self.vec)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclid_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A `g0`-orthonormal frame of `T_x S^n`.
///
/// Built from the ambient axes sorted by `|x_i|` ascending (ties broken by
/// the lower axis index), Gram–Schmidt against `x`, so the same point always
/// gets the same frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    vectors: Vec<Vec<f64>>,
}

impl TangentFrame {
    pub fn at(x: &SpherePoint) -> Self {
        let n = x.dim();
        let mut axes: Vec<usize> = (0..=n).collect();
        axes.sort_by(|&i, &j| x.0[i].abs().total_cmp(&x.0[j].abs()));
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(n);
        for &axis in &axes[..n] {
            let mut v = vec![0.0; n + 1];
            v[axis] = 1.0;
            // two passes of modified Gram–Schmidt
            for _ in 0..2 {
                let d = dot(&v, &x.0);
                v.iter_mut().zip(&x.0).for_each(|(vi, xi)| *vi -= d * xi);
                for e in &vectors {
                    let d = dot(&v, e);
                    v.iter_mut().zip(e).for_each(|(vi, ei)| *vi -= d * ei);
                }
            }
            let nrm = euclid_norm(&v);
            v.iter_mut().for_each(|c| *c /= nrm);
            vectors.push(v);
        }
        Self { vectors }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Ambient vector with the given frame components.
    pub fn combine(&self, comps: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.vectors[0].len()];
        for (c, e) in comps.iter().zip(&self.vectors) {
            out.iter_mut().zip(e).for_each(|(o, ei)| *o += c * ei);
        }
        out
    }

    /// Frame components of an ambient vector (its tangential part).
    pub fn components(&self, v: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|e| dot(e, v)).collect()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(a, b) - target).abs());
            }
        }
        worst
    }
}

/// Stereographic chart centred at `x`, scaled so that the chart metric at the
/// centre is the identity. Christoffel symbols vanish at `u = 0`.
#[derive(Debug, Clone)]
pub struct Chart {
    center: SpherePoint,
    frame: TangentFrame,
}

impl Chart {
    pub fn at(center: &SpherePoint) -> Self {
        Self {
            frame: TangentFrame::at(center),
            center: center.clone(),
        }
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn center(&self) -> &SpherePoint {
        &self.center
    }

    /// `((1 - |u|^2/4) x + sum u_i e_i) / (1 + |u|^2/4)`.
    pub fn point(&self, u: &[f64]) -> SpherePoint {
        let s = dot(u, u) / 4.0;
        let tangent = self.frame.combine(u);
        let p: Vec<f64> = self
            .center
            .0
            .iter()
            .zip(&tangent)
            .map(|(x, t)| ((1.0 - s) * x + t) / (1.0 + s))
            .collect();
        SpherePoint(p)
    }
}

/// Second-order jet of a function `rho` on the sphere at a point.
#[derive(Debug, Clone)]
pub struct Jet2 {
    pub point: SpherePoint,
    pub frame: TangentFrame,
    /// `rho(x)`.
    pub value: f64,
    /// Frame components of the `g0`-gradient.
    pub grad: DVector<f64>,
    /// Covariant Hessian in the frame.
    pub hess: DMatrix<f64>,
}

impl Jet2 {
    /// Builds the sphere jet of the restriction of an ambient function
    /// `F: R^{n+1} -> R` from its ambient value, gradient and Hessian:
    /// tangential gradient, and `D^2F|_T - (x . grad F) g0`.
    pub fn from_ambient(
        x: &SpherePoint,
        value: f64,
        ambient_grad: &[f64],
        ambient_hess: &DMatrix<f64>,
    ) -> Self {
        let frame = TangentFrame::at(x);
        let n = frame.dim();
        let radial = dot(ambient_grad, &x.0);
        let grad = DVector::from_vec(frame.components(ambient_grad));
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let hi = ambient_hess * DVector::from_column_slice(&frame.vectors[i]);
            for j in 0..n {
                hess[(i, j)] = dot(hi.as_slice(), &frame.vectors[j]);
            }
            hess[(i, i)] -= radial;
        }
        Self {
            point: x.clone(),
            frame,
            value,
            grad,
            hess: linalg::symmetrize(&hess),
        }
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// `||grad rho||^2_{g0}`.
    pub fn grad_norm_sq(&self) -> f64 {
        self.grad.norm_squared()
    }

    /// Gradient as an ambient tangent vector.
    pub fn gradient(&self) -> TangentVec {
        TangentVec {
            base: self.point.clone(),
            vec: self.frame.combine(self.grad.as_slice()),
        }
    }

    /// Jet of `rho + t`.
    pub fn dilated(&self, t: f64) -> Self {
        let mut j = self.clone();
        j.value += t;
        j
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.hess.iter().all(|v| v.is_finite())
    }
}

/// A conformal factor `rho` on `S^n`, i.e. the metric `g = e^{2 rho} g0`.
pub trait ConformalFactor: Send + Sync {
    fn value(&self, x: &SpherePoint) -> f64;

    /// Exact 2-jet, when the factor knows its derivatives.
    fn analytic_jet(&self, _x: &SpherePoint) -> Option<Jet2> {
        None
    }

    /// Short human-readable description.
    fn describe(&self) -> String {
        "conformal factor".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetMode {
    Analytic,
    FiniteDifference,
}

/// A conformal factor together with the way its jets are obtained.
#[derive(Clone)]
pub struct ConformalFactorSpec {
    factor: Arc<dyn ConformalFactor>,
    mode: JetMode,
}

impl fmt::Debug for ConformalFactorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConformalFactorSpec")
            .field("factor", &self.factor.describe())
            .field("mode", &self.mode)
            .finish()
    }
}

impl ConformalFactorSpec {
    pub fn new(factor: Arc<dyn ConformalFactor>, mode: JetMode) -> Self {
        Self { factor, mode }
    }

    pub fn analytic<F: ConformalFactor + 'static>(factor: F) -> Self {
        Self::new(Arc::new(factor), JetMode::Analytic)
    }

    pub fn finite_difference<F: ConformalFactor + 'static>(factor: F) -> Self {
        Self::new(Arc::new(factor), JetMode::FiniteDifference)
    }

    pub fn with_mode(&self, mode: JetMode) -> Self {
        Self {
            factor: self.factor.clone(),
            mode,
        }
    }

    pub fn mode(&self) -> JetMode {
        self.mode
    }

    pub fn factor(&self) -> &dyn ConformalFactor {
        self.factor.as_ref()
    }

    pub fn value(&self, x: &SpherePoint) -> f64 {
        self.factor.value(x)
    }

    /// Checks that analytic jets agree with point values within `1e-12` at
    /// the given sample points.
    pub fn validate(&self, samples: &[SpherePoint]) -> Result<()> {
        if self.mode != JetMode::Analytic {
            return Ok(());
        }
        for x in samples {
            let j = jet2(self, x)?;
            let v = self.factor.value(x);
            if (j.value - v).abs() > 1e-12 * (1.0 + v.abs()) {
                return Err(Error::DomainViolation(format!(
                    "analytic jet value {} disagrees with evaluator {v}",
                    j.value
                )));
            }
        }
        Ok(())
    }
}

/// 2-jet of `rho` at `x`.
///
/// Analytic mode delegates to the factor. Finite-difference mode uses central
/// differences in the stereographic [`Chart`] centred at `x` (steps
/// [`FD_GRAD_STEP`] and [`FD_HESS_STEP`]); since the chart is normal to second
/// order at its centre, chart derivatives are the covariant ones.
pub fn jet2(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<Jet2> {
    let jet = match spec.mode {
        JetMode::Analytic => spec.factor.analytic_jet(x).ok_or_else(|| {
            Error::DomainViolation(format!(
                "{} has no analytic jet; use finite-difference mode",
                spec.factor.describe()
            ))
        })?,
        JetMode::FiniteDifference => fd_jet(spec.factor.as_ref(), x),
    };
    if !jet.is_finite() {
        return Err(Error::NonFinite {
            what: format!("jet of {}", spec.factor.describe()),
        });
    }
    Ok(jet)
}

fn fd_jet(f: &dyn ConformalFactor, x: &SpherePoint) -> Jet2 {
    let chart = Chart::at(x);
    let n = x.dim();
    let eval = |u: &[f64]| f.value(&chart.point(u));
    let axis = |i: usize, s: f64| {
        let mut u = vec![0.0; n];
        u[i] = s;
        u
    };
    let f0 = f.value(x);
    let (h, hh) = (FD_GRAD_STEP, FD_HESS_STEP);
    let grad = DVector::from_fn(n, |i, _| {
        (eval(&axis(i, h)) - eval(&axis(i, -h))) / (2.0 * h)
    });
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        hess[(i, i)] = (eval(&axis(i, hh)) - 2.0 * f0 + eval(&axis(i, -hh))) / (hh * hh);
        for j in 0..i {
            let corner = |si: f64, sj: f64| {
                let mut u = vec![0.0; n];
                u[i] = si * hh;
                u[j] = sj * hh;
                eval(&u)
            };
            let v = (corner(1., 1.) - corner(1., -1.) - corner(-1., 1.) + corner(-1., -1.))
                / (4.0 * hh * hh);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Jet2 {
        point: x.clone(),
        frame: chart.frame,
        value: f0,
        grad,
        hess,
    }
}

/// `Δ^{g0} rho`, the trace of the covariant Hessian.
pub fn laplacian_g0(j: &Jet2) -> f64 {
    j.hess.trace()
}

/// Scalar curvature of `g = e^{2 rho} g0`:
/// `S = 2(n-1) e^{-2 rho} (n/2 - Δrho - (n-2)/2 |grad rho|^2)`.
pub fn scalar_curvature(j: &Jet2, n: usize) -> f64 {
    let nf = n as f64;
    2.0 * (nf - 1.0)
        * (-2.0 * j.value).exp()
        * (0.5 * nf - laplacian_g0(j) - 0.5 * (nf - 2.0) * j.grad_norm_sq())
}

/// Symmetric bilinear form as a matrix in a `g0`-orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBilinear {
    matrix: DMatrix<f64>,
}

impl SymBilinear {
    /// Requires symmetry within `1e-10` (relative to the entries' size);
    /// stores the symmetrized matrix.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let scale = 1.0 + matrix.abs().max();
        if linalg::max_asymmetry(&matrix) > 1e-10 * scale {
            return Err(Error::DomainViolation(
                "bilinear form is not symmetric".into(),
            ));
        }
        Ok(Self {
            matrix: linalg::symmetrize(&matrix),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `B(u, v)` for frame-component vectors.
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        let u = DVector::from_column_slice(u);
        let v = DVector::from_column_slice(v);
        (u.transpose() * &self.matrix * v)[(0, 0)]
    }
}

/// Schouten tensor of `g = e^{2 rho} g0`:
/// `Sch = -Hess rho + d rho (x) d rho - 1/2 (-1 + |grad rho|^2) g0`.
pub fn schouten(j: &Jet2) -> SymBilinear {
    let n = j.dim();
    let mut m = -&j.hess + &j.grad * j.grad.transpose();
    let shift = 0.5 * (-1.0 + j.grad_norm_sq());
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    SymBilinear {
        matrix: linalg::symmetrize(&m),
    }
}

/// Eigen-decomposition of `g^{-1} Sch_g`; in the `g0` frame `g = e^{2 rho} Id`,
/// so this is the spectrum of `e^{-2 rho} Sch`. Sorted ascending.
pub fn schouten_eigen(sch: &SymBilinear, j: &Jet2) -> SymEigen {
    linalg::sym_eigen(&(sch.matrix() * (-2.0 * j.value).exp()))
}
