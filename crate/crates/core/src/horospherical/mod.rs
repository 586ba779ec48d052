//! From a conformal factor to a hypersurface of `H^{n+1}` and back to its
//! curvature data.
//!
//! With support function `e^rho` and hyperbolic Gauss map `G(x) = x`, the
//! hypersurface is `phi`, its unit normal `eta`, and the light-cone map
//! `psi = phi + eta = e^rho (1, x)`. All bilinear forms are matrices in the
//! `g0`-orthonormal frame of the jet.

pub mod checks;
pub mod dual;
pub mod export;
pub mod tau;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::lorentz::LorentzVec;
use crate::sphere::{scalar_curvature, schouten, schouten_eigen, Jet2, SpherePoint, SymBilinear};
use crate::weingarten::sigma_k;

/// Principal curvatures closer than this are treated as equal.
pub const UMBILIC_SPREAD: f64 = 1e-7;

/// The hypersurface point, normal and light-cone point over `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFrame {
    pub x: SpherePoint,
    pub phi: LorentzVec,
    pub eta: LorentzVec,
    pub psi: LorentzVec,
}

impl SurfaceFrame {
    /// Largest violation of `<phi,phi> = -1`, `<eta,eta> = 1`,
    /// `<phi,eta> = 0`, `psi = phi + eta` and `psi ∝ (1, x)`.
    pub fn invariant_error(&self) -> f64 {
        let scale = 1.0 + self.psi.time().abs();
        let gauss = self
            .psi
            .space()
            .iter()
            .zip(self.x.coords())
            .fold(0.0f64, |m, (p, x)| m.max((p / self.psi.time() - x).abs()));
        let sum = (&self.phi + &self.eta).max_abs_diff(&self.psi) / scale;
        [
            (self.phi.norm_sq() + 1.0).abs(),
            (self.eta.norm_sq() - 1.0).abs(),
            self.phi.dot(&self.eta).abs(),
            (self.phi.dot(&self.psi) + 1.0).abs(),
            self.psi.norm_sq().abs() / (scale * scale),
            sum,
            gauss,
            if self.psi.time() > 0.0 {
                0.0
            } else {
                f64::INFINITY
            },
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Image in the Poincaré ball model: `phi_space / (1 + phi_0)`.
    pub fn poincare(&self) -> Vec<f64> {
        let d = 1.0 + self.phi.time();
        self.phi.space().iter().map(|c| c / d).collect()
    }
}

/// `psi = e^rho (1, x)`.
pub fn light_cone_map(rho: f64, x: &SpherePoint) -> LorentzVec {
    let s = rho.exp();
    let space: Vec<f64> = x.coords().iter().map(|c| s * c).collect();
    LorentzVec::from_parts(s, &space)
}

/// The representation formula
/// `phi = (e^rho / 2)(1 + e^{-2 rho}(1 + |grad rho|^2)) (1, x) + e^{-rho} (0, -x + grad rho)`,
/// with `eta = psi - phi`.
pub fn represent(j: &Jet2) -> SurfaceFrame {
    let x = &j.point;
    let e = j.value.exp();
    let a = 0.5 * e * (1.0 + (1.0 + j.grad_norm_sq()) / (e * e));
    let grad = j.gradient().vec;
    let space: Vec<f64> = x
        .coords()
        .iter()
        .zip(&grad)
        .map(|(xi, gi)| a * xi + (gi - xi) / e)
        .collect();
    let phi = LorentzVec::from_parts(a, &space);
    let psi = light_cone_map(j.value, x);
    let eta = &psi - &phi;
    SurfaceFrame {
        x: x.clone(),
        phi,
        eta,
        psi,
    }
}

/// `A = g - 2 Sch_g` with `g = e^{2 rho} Id`.
pub fn a_matrix(j: &Jet2) -> DMatrix<f64> {
    let n = j.dim();
    DMatrix::identity(n, n) * (2.0 * j.value).exp() - schouten(j).matrix() * 2.0
}

/// First and second fundamental forms of `phi`:
/// `I = (e^{-2 rho}/4) A^2` and `II = I - g/2 + Sch_g`.
pub fn fundamental_forms(j: &Jet2) -> (SymBilinear, SymBilinear) {
    let n = j.dim();
    let sch = schouten(j);
    let a = a_matrix(j);
    let first = linalg::symmetrize(&(&a * &a * (0.25 * (-2.0 * j.value).exp())));
    let second = &first - DMatrix::identity(n, n) * (0.5 * (2.0 * j.value).exp()) + sch.matrix();
    (
        SymBilinear::new(first).expect("symmetric"),
        SymBilinear::new(linalg::symmetrize(&second)).expect("symmetric"),
    )
}

/// Scale-aware cutoff on the smallest eigenvalue of `A`.
pub fn regularity_threshold(rho: f64) -> f64 {
    1e-8 * (1.0 + (2.0 * rho).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub regular: bool,
    /// Smallest eigenvalue of `A = g - 2 Sch_g` (signed).
    pub min_eig: f64,
    pub threshold: f64,
    /// Number of eigenvalues of `A` below `-threshold`; `I = A^2/..` hides these.
    pub negative: usize,
}

/// Regular iff `A = g - 2 Sch_g` is positive definite beyond the threshold.
pub fn regularity(j: &Jet2) -> Regularity {
    let eig = linalg::sym_eigenvalues(&a_matrix(j));
    let threshold = regularity_threshold(j.value);
    Regularity {
        regular: eig[0] > threshold,
        min_eig: eig[0],
        threshold,
        negative: eig.iter().filter(|e| **e < -threshold).count(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CurvatureFlags {
    /// All `kappa_i < 1` or all `kappa_i > 1`.
    pub horospherically_convex: bool,
    /// All `kappa_i < 1`.
    pub canonical: bool,
    /// All `kappa_i < -1`.
    pub strongly_h_convex: bool,
    pub umbilic: bool,
}

/// Curvature data of the hypersurface at one point, all lists sorted by
/// increasing Schouten eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    pub x: SpherePoint,
    pub kappas: Vec<f64>,
    /// `R_i = 1 / (1 - kappa_i)`.
    pub radii: Vec<f64>,
    /// Eigenvalues of `g^{-1} Sch_g`.
    pub lambdas: Vec<f64>,
    /// `delta_i = (1 + kappa_i) / (1 - kappa_i)`.
    pub signed_contact: Vec<f64>,
    /// `|delta_i|`, meaningful only where `dilation_valid[i]` (`kappa_i != -1`).
    pub dilation: Vec<f64>,
    pub dilation_valid: Vec<bool>,
    /// Mean of the radii.
    pub christoffel_mean: f64,
    /// Scalar curvature of `e^{2 rho} g0`.
    pub scalar: f64,
    /// `sigma_1 .. sigma_n` of the lambdas.
    pub sigma: Vec<f64>,
    pub flags: CurvatureFlags,
    /// Smallest matched `|cos|` between principal directions and Schouten
    /// eigendirections; `None` at umbilic points.
    pub direction_agreement: Option<f64>,
}

impl CurvatureReport {
    pub fn dim(&self) -> usize {
        self.kappas.len()
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max |lambda_i - (1/2 - R_i)|`.
    pub fn radius_identity_error(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.radii)
            .fold(0.0, |m, (l, r)| m.max((l - (0.5 - r)).abs()))
    }

    /// `|S - (n(n-1) - 2(n-1) sum R_i)|`.
    pub fn scalar_identity_error(&self) -> f64 {
        let n = self.dim() as f64;
        let sum: f64 = self.radii.iter().sum();
        (self.scalar - (n * (n - 1.0) - 2.0 * (n - 1.0) * sum)).abs()
    }
}

/// Principal curvatures (eigenvalues of `I^{-1} II`) and all derived data.
pub fn curvature_report(j: &Jet2, n: usize) -> Result<CurvatureReport> {
    if j.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: j.dim(),
        });
    }
    let reg = regularity(j);
    if !reg.regular {
        return Err(Error::SingularPoint {
            min_eig: reg.min_eig,
            threshold: reg.threshold,
        });
    }
    let sch = schouten(j);
    let (first, second) = fundamental_forms(j);
    let shape = linalg::generalized_sym_eigen(second.matrix(), first.matrix()).ok_or(
        Error::SingularPoint {
            min_eig: reg.min_eig,
            threshold: reg.threshold,
        },
    )?;
    let sch_eig = schouten_eigen(&sch, j);

    // kappa = 1 - 2/(1 - 2 lambda) is decreasing in lambda, so ascending
    // lambdas pair with descending kappas.
    let mut kappas = shape.values.clone();
    kappas.reverse();
    let lambdas = sch_eig.values.clone();

    let spread = kappas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - kappas.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = 1.0 + kappas.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    let umbilic = spread < UMBILIC_SPREAD * scale;

    let direction_agreement = if umbilic {
        None
    } else {
        let principal = DMatrix::from_fn(n, n, |r, c| shape.vectors[(r, c)]);
        Some(linalg::min_matched_cosine(&principal, &sch_eig.vectors))
    };

    let radii: Vec<f64> = kappas.iter().map(|k| 1.0 / (1.0 - k)).collect();
    let signed_contact: Vec<f64> = kappas.iter().map(|k| (1.0 + k) / (1.0 - k)).collect();
    let dilation = signed_contact.iter().map(|d| d.abs()).collect();
    let dilation_valid = kappas.iter().map(|k| (k + 1.0).abs() > 1e-12).collect();
    let christoffel_mean = radii.iter().sum::<f64>() / n as f64;
    let sigma = (1..=n).map(|k| sigma_k(&lambdas, k)).collect();
    let canonical = kappas.iter().all(|k| *k < 1.0);
    let flags = CurvatureFlags {
        horospherically_convex: canonical || kappas.iter().all(|k| *k > 1.0),
        canonical,
        strongly_h_convex: kappas.iter().all(|k| *k < -1.0),
        umbilic,
    };
    Ok(CurvatureReport {
        x: j.point.clone(),
        kappas,
        radii,
        lambdas,
        signed_contact,
        dilation,
        dilation_valid,
        christoffel_mean,
        scalar: scalar_curvature(j, n),
        sigma,
        flags,
        direction_agreement,
    })
}

/// Normal flow by signed distance `t`:
/// `phi_t = e^{-t} phi + sinh(t) psi`, `psi_t = e^t psi`, `eta_t = psi_t - phi_t`.
pub fn parallel_flow(f: &SurfaceFrame, t: f64) -> SurfaceFrame {
    let phi = f.phi.scale((-t).exp()).axpy(t.sinh(), &f.psi);
    let psi = f.psi.scale(t.exp());
    let eta = &psi - &phi;
    SurfaceFrame {
        x: f.x.clone(),
        phi,
        eta,
        psi,
    }
}

/// Principal curvature after flowing by `t`: `(kappa - tanh t)/(1 - kappa tanh t)`.
pub fn flowed_curvature(kappa: f64, t: f64) -> f64 {
    let th = t.tanh();
    (kappa - th) / (1.0 - kappa * th)
}

/// Christoffel mean after flowing by `t`: `1/2 - (e^{-2t}/2)(1 - 2C)`.
pub fn christoffel_flow_mean(c: f64, t: f64) -> f64 {
    0.5 - 0.5 * (-2.0 * t).exp() * (1.0 - 2.0 * c)
}

/// Mean contact radius `(1/n) sum coth^{-1}|kappa_i|` of a strongly
/// H-convex point.
///
/// Since `e^{-2 coth^{-1}|kappa_i|} = 2 lambda_i`, this equals
/// `-log(2^n sigma_n(lambda)) / (2n)`; the identity is checked to `1e-8`.
pub fn contact_mean(report: &CurvatureReport) -> Result<f64> {
    if !report.flags.strongly_h_convex {
        return Err(Error::NotStronglyConvex {
            kappa_max: report.kappa_max(),
        });
    }
    let n = report.dim() as f64;
    let mean = report
        .kappas
        .iter()
        .map(|k| 0.5 * ((k.abs() + 1.0) / (k.abs() - 1.0)).ln())
        .sum::<f64>()
        / n;
    let sigma_n = report.sigma[report.dim() - 1];
    let via_sigma = -(2f64.powf(n) * sigma_n).ln() / (2.0 * n);
    if (mean - via_sigma).abs() > 1e-8 * (1.0 + mean.abs()) {
        return Err(Error::DomainViolation(format!(
            "contact mean {mean} disagrees with sigma_n form {via_sigma}"
        )));
    }
    Ok(mean)
}

/// Horospherical metric `<d psi, d psi>` in the frame: `e^{2 rho} Id`.
pub fn horospherical_metric(j: &Jet2) -> DMatrix<f64> {
    let n = j.dim();
    DMatrix::identity(n, n) * (2.0 * j.value).exp()
}

/// `<d phi, d psi> = g/2 - Sch_g`.
pub fn mixed_form(j: &Jet2) -> DMatrix<f64> {
    horospherical_metric(j) * 0.5 - schouten(j).matrix()
}

/// `I_t(e_i, e_i) = (cosh t - kappa_i sinh t)^2` along principal directions.
pub fn flowed_first_form_diag(kappas: &[f64], t: f64) -> DVector<f64> {
    DVector::from_iterator(
        kappas.len(),
        kappas.iter().map(|k| (t.cosh() - k * t.sinh()).powi(2)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::{Affine, Constant};
    use crate::lorentz::{classify, QuadricTag};
    use crate::sphere::{jet2, ConformalFactorSpec};

    fn cjet(n: usize, c: f64, x: &SpherePoint) -> Jet2 {
        jet2(&ConformalFactorSpec::analytic(Constant::new(n, c)), x).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn light_cone_examples() {
        let p = light_cone_map(0.0, &SpherePoint::north(2));
        assert_eq!(p.coords(), &[1.0, 0.0, 0.0, 1.0]);
        let p = light_cone_map(2f64.ln(), &SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap());
        for (a, b) in p.coords().iter().zip([2.0, 2.0, 0.0, 0.0]) {
            close(*a, b, 1e-15);
        }
        assert_eq!(classify(&p, 1e-12).tag, QuadricTag::LightCone);
    }

    #[test]
    fn sphere_representation() {
        let x = SpherePoint::normalize(vec![0.2, -0.6, 0.3]).unwrap();
        let f = represent(&cjet(2, 2f64.ln(), &x));
        close(f.phi.time(), 1.25, 1e-15);
        for (p, xi) in f.phi.space().iter().zip(x.coords()) {
            close(*p, 0.75 * xi, 1e-15);
        }
        assert!(f.invariant_error() < 1e-14);
    }

    #[test]
    fn coordinate_representation_at_pole() {
        let spec = ConformalFactorSpec::analytic(Affine::new(2, 0.0, 1.0));
        let f = represent(&jet2(&spec, &SpherePoint::north(2)).unwrap());
        let want = [1f64.cosh(), 0.0, 0.0, 1f64.sinh()];
        for (a, b) in f.phi.coords().iter().zip(want) {
            close(*a, b, 1e-15);
        }
    }

    #[test]
    fn sphere_forms_and_regularity() {
        let x = SpherePoint::north(2);
        for c in [0.3, 1.0, 2.0] {
            let j = cjet(2, c, &x);
            let (i, ii) = fundamental_forms(&j);
            let id = DMatrix::<f64>::identity(2, 2);
            assert!((i.matrix() - &id * c.sinh().powi(2)).amax() < 1e-13);
            assert!((ii.matrix() + &id * (c.sinh() * c.cosh())).amax() < 1e-12);
            let r = regularity(&j);
            assert!(r.regular);
            close(r.min_eig, (2.0 * c).exp() - 1.0, 1e-13);
        }
        let j = cjet(2, 0.0, &x);
        let (i, _) = fundamental_forms(&j);
        assert_eq!(i.matrix().amax(), 0.0);
        let r = regularity(&j);
        assert!(!r.regular && r.min_eig == 0.0);
        assert!(matches!(
            curvature_report(&j, 2),
            Err(Error::SingularPoint { .. })
        ));

        let spec = ConformalFactorSpec::analytic(Affine::new(2, 0.0, 1.0));
        let r = regularity(&jet2(&spec, &x).unwrap());
        assert!(r.regular);
        close(r.min_eig, 1f64.exp().powi(2) - 3.0, 1e-13);
    }

    #[test]
    fn coordinate_factor_is_singular_on_equator() {
        // g - 2 Sch = diag(1, -1) at (1, 0, 0) for rho = x3
        let spec = ConformalFactorSpec::analytic(Affine::new(2, 0.0, 1.0));
        let x = SpherePoint::new(vec![1.0, 0.0, 0.0]).unwrap();
        let r = regularity(&jet2(&spec, &x).unwrap());
        assert!(!r.regular);
        close(r.min_eig, -1.0, 1e-14);
        assert_eq!(r.negative, 1);
    }

    #[test]
    fn sphere_report() {
        let x = SpherePoint::normalize(vec![0.5, 0.5, -0.1]).unwrap();
        let r = curvature_report(&cjet(2, 2f64.ln(), &x), 2).unwrap();
        for i in 0..2 {
            close(r.kappas[i], -5.0 / 3.0, 1e-14);
            close(r.radii[i], 3.0 / 8.0, 1e-15);
            close(r.lambdas[i], 1.0 / 8.0, 1e-15);
            close(r.signed_contact[i], -0.25, 1e-15);
            close(r.dilation[i], 0.25, 1e-15);
        }
        close(r.christoffel_mean, 3.0 / 8.0, 1e-15);
        close(r.scalar, 0.5, 1e-15);
        close(r.sigma[0], 0.25, 1e-15);
        close(r.sigma[1], 1.0 / 64.0, 1e-16);
        assert!(r.flags.umbilic && r.flags.canonical && r.flags.strongly_h_convex);
        assert!(r.flags.horospherically_convex);
        assert_eq!(r.direction_agreement, None);
    }

    #[test]
    fn sphere_report_three_dimensions() {
        let x = SpherePoint::normalize(vec![0.5, 0.5, -0.1, 0.2]).unwrap();
        let c = 0.8f64;
        let r = curvature_report(&cjet(3, c, &x), 3).unwrap();
        for k in &r.kappas {
            close(*k, -1.0 / c.tanh(), 1e-13);
        }
        close(r.scalar, 6.0 * (-2.0 * c).exp(), 1e-14);
        assert!(r.radius_identity_error() < 1e-14);
        assert!(r.scalar_identity_error() < 1e-13);
    }

    #[test]
    fn nonumbilic_directions_agree() {
        use crate::factors::Polynomial;
        let p = Polynomial::new(
            2,
            vec![
                (1.2, vec![0, 0, 0]),
                (0.3, vec![1, 1, 0]),
                (0.2, vec![0, 0, 1]),
            ],
        )
        .unwrap();
        let spec = ConformalFactorSpec::analytic(p);
        let x = SpherePoint::normalize(vec![0.4, 0.3, 0.5]).unwrap();
        let r = curvature_report(&jet2(&spec, &x).unwrap(), 2).unwrap();
        assert!(!r.flags.umbilic);
        assert!(r.direction_agreement.unwrap() > 1.0 - 1e-10);
        assert!(r.radius_identity_error() < 1e-12);
        assert!(r.scalar_identity_error() < 1e-12);
    }

    #[test]
    fn flow_of_sphere_adds_radius() {
        let x = SpherePoint::normalize(vec![0.1, 0.2, 0.3]).unwrap();
        let (c, t) = (0.7, 0.4);
        let f = parallel_flow(&represent(&cjet(2, c, &x)), t);
        let g = represent(&cjet(2, c + t, &x));
        assert!(f.phi.max_abs_diff(&g.phi) < 1e-14);
        assert!(f.psi.max_abs_diff(&g.psi) < 1e-14);
        let f0 = represent(&cjet(2, c, &x));
        assert_eq!(parallel_flow(&f0, 0.0), f0);
    }

    #[test]
    fn christoffel_flow_examples() {
        assert_eq!(christoffel_flow_mean(0.375, 0.0), 0.375);
        close(christoffel_flow_mean(0.375, 2f64.ln()), 15.0 / 32.0, 1e-16);
        close(christoffel_flow_mean(0.375, 50.0), 0.5, 1e-16);
        let x = SpherePoint::north(2);
        let r = curvature_report(&cjet(2, 2.0 * 2f64.ln(), &x), 2).unwrap();
        close(r.christoffel_mean, 15.0 / 32.0, 1e-15);
        for k in [-3.0, -1.5, 0.5] {
            close(flowed_curvature(k, 0.0), k, 0.0);
        }
    }

    #[test]
    fn contact_mean_of_spheres() {
        let x = SpherePoint::north(2);
        for c in [0.25, 2f64.ln(), 1.0] {
            let r = curvature_report(&cjet(2, c, &x), 2).unwrap();
            close(contact_mean(&r).unwrap(), c, 1e-12);
        }
        let mut r = curvature_report(&cjet(2, 1.0, &x), 2).unwrap();
        r.kappas[0] = -1.0;
        r.flags.strongly_h_convex = false;
        assert!(matches!(
            contact_mean(&r),
            Err(Error::NotStronglyConvex { .. })
        ));
    }
}
