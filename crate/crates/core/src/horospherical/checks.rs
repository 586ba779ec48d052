//! Finite-difference cross-checks of the closed-form geometry.
//!
//! Derivatives of maps `S^n -> L^{n+2}` are taken by central differences in
//! the stereographic chart centred at the point; the chart is isometric to
//! first order there, so chart derivatives are frame derivatives.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{
    curvature_report, flowed_curvature, horospherical_metric, mixed_form, parallel_flow, represent,
    SurfaceFrame,
};
use crate::error::Result;
use crate::linalg;
use crate::lorentz::LorentzVec;
use crate::sphere::grid::{ScalarField, SphereGrid};
use crate::sphere::harmonics::coeff_index;
use crate::sphere::{
    jet2, scalar_curvature, Chart, ConformalFactorSpec, Jet2, JetMode, SpherePoint, FD_HESS_STEP,
};
use crate::weingarten::transform_t;

/// Step for first derivatives of maps built from 2-jets.
pub const MAP_STEP: f64 = 1e-5;

/// `d_i F(x)` for `i < n`, where `F` is computed from the jet at each point.
pub fn chart_derivatives<F>(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    h: f64,
    map: F,
) -> Result<Vec<LorentzVec>>
where
    F: Fn(&Jet2) -> LorentzVec,
{
    let chart = Chart::at(x);
    let n = x.dim();
    (0..n)
        .map(|i| {
            let mut u = vec![0.0; n];
            u[i] = h;
            let plus = map(&jet2(spec, &chart.point(&u))?);
            u[i] = -h;
            let minus = map(&jet2(spec, &chart.point(&u))?);
            Ok((&plus - &minus).scale(0.5 / h))
        })
        .collect()
}

/// Symmetrized matrix of Lorentz products `<a_i, b_j>`.
pub fn lorentz_gram(a: &[LorentzVec], b: &[LorentzVec]) -> DMatrix<f64> {
    let m = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i].dot(&b[j]));
    linalg::symmetrize(&m)
}

fn frame_derivatives<F>(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    pick: F,
) -> Result<Vec<LorentzVec>>
where
    F: Fn(&SurfaceFrame) -> LorentzVec,
{
    // with finite-difference jets the map itself is noisy at the 1e-11 level,
    // so a larger outer step keeps the quotient accurate
    let h = match spec.mode() {
        JetMode::Analytic => MAP_STEP,
        JetMode::FiniteDifference => FD_HESS_STEP,
    };
    chart_derivatives(spec, x, h, |j| pick(&represent(j)))
}

/// `I = <d phi, d phi>` by finite differences.
pub fn fd_first_form(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<DMatrix<f64>> {
    let d = frame_derivatives(spec, x, |f| f.phi.clone())?;
    Ok(lorentz_gram(&d, &d))
}

/// `II = -<d phi, d eta>` by finite differences.
pub fn fd_second_form(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<DMatrix<f64>> {
    let dphi = frame_derivatives(spec, x, |f| f.phi.clone())?;
    let deta = frame_derivatives(spec, x, |f| f.eta.clone())?;
    Ok(-lorentz_gram(&dphi, &deta))
}

/// `<d psi, d psi>` by finite differences.
pub fn fd_light_cone_metric(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<DMatrix<f64>> {
    let d = frame_derivatives(spec, x, |f| f.psi.clone())?;
    Ok(lorentz_gram(&d, &d))
}

/// `<d phi, d psi>` by finite differences.
pub fn fd_mixed_form(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<DMatrix<f64>> {
    let dphi = frame_derivatives(spec, x, |f| f.phi.clone())?;
    let dpsi = frame_derivatives(spec, x, |f| f.psi.clone())?;
    Ok(lorentz_gram(&dphi, &dpsi))
}

/// Forms of the flowed hypersurface `phi_t` by finite differences.
pub fn fd_flowed_forms(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    t: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let dphi = frame_derivatives(spec, x, |f| parallel_flow(f, t).phi)?;
    let deta = frame_derivatives(spec, x, |f| parallel_flow(f, t).eta)?;
    Ok((lorentz_gram(&dphi, &dphi), -lorentz_gram(&dphi, &deta)))
}

/// Relative deviation of `|d/ds psi(exp_x(s v))|^2` at `s = 0` from
/// `e^{2 rho} |v|^2`.
pub fn light_cone_speed_error(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    v: &[f64],
) -> Result<f64> {
    let h = MAP_STEP;
    let vs: Vec<f64> = v.iter().map(|c| c * h).collect();
    let vm: Vec<f64> = v.iter().map(|c| -c * h).collect();
    let psi = |p: &SpherePoint| super::light_cone_map(spec.value(p), p);
    let d = (&psi(&x.exp(&vs)) - &psi(&x.exp(&vm))).scale(0.5 / h);
    let want = (2.0 * spec.value(x)).exp() * v.iter().map(|c| c * c).sum::<f64>();
    Ok((d.norm_sq() - want).abs() / want.max(1e-300))
}

/// `|<d phi(v), psi>|` for a tangent vector `v` given in ambient coordinates.
pub fn gauss_map_orthogonality(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    v: &[f64],
) -> Result<f64> {
    let chart = Chart::at(x);
    let comps = chart.frame().components(v);
    let d = frame_derivatives(spec, x, |f| f.phi.clone())?;
    let mut dv = LorentzVec::zeros(x.dim() + 2);
    for (c, di) in comps.iter().zip(&d) {
        dv = dv.axpy(*c, di);
    }
    let f = represent(&jet2(spec, x)?);
    Ok(dv.dot(&f.psi).abs())
}

/// Largest entry deviation between finite-difference and closed-form
/// `I`, `<dpsi,dpsi>` and `<dphi,dpsi>` at `x`.
pub fn form_errors(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<FormErrors> {
    let j = jet2(spec, x)?;
    let (first, second) = super::fundamental_forms(&j);
    Ok(FormErrors {
        first: (fd_first_form(spec, x)? - first.matrix()).amax(),
        second: (fd_second_form(spec, x)? - second.matrix()).amax(),
        light_cone: (fd_light_cone_metric(spec, x)? - horospherical_metric(&j)).amax(),
        mixed: (fd_mixed_form(spec, x)? - mixed_form(&j)).amax(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormErrors {
    pub first: f64,
    pub second: f64,
    pub light_cone: f64,
    pub mixed: f64,
}

/// Deviations of the flowed hypersurface from the flow laws at `x`:
/// principal curvatures from finite-difference forms versus
/// `(kappa - tanh t)/(1 - kappa tanh t)`, and `I_t` on an `I`-orthonormal
/// principal basis versus `(cosh t - kappa sinh t)^2`.
pub fn flow_errors(spec: &ConformalFactorSpec, x: &SpherePoint, t: f64) -> Result<(f64, f64)> {
    let j = jet2(spec, x)?;
    let n = x.dim();
    let (first, second) = super::fundamental_forms(&j);
    let shape = linalg::generalized_sym_eigen(second.matrix(), first.matrix()).ok_or(
        crate::Error::SingularPoint {
            min_eig: 0.0,
            threshold: 0.0,
        },
    )?;
    let (ft, st) = fd_flowed_forms(spec, x, t)?;
    let flowed = linalg::generalized_sym_eigen(&st, &ft).ok_or(crate::Error::SingularPoint {
        min_eig: linalg::sym_eigenvalues(&ft)[0],
        threshold: 0.0,
    })?;
    let mut want: Vec<f64> = shape
        .values
        .iter()
        .map(|k| flowed_curvature(*k, t))
        .collect();
    want.sort_by(f64::total_cmp);
    let kappa_err = flowed
        .values
        .iter()
        .zip(&want)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let restricted = shape.vectors.transpose() * &ft * &shape.vectors;
    let mut form_err = 0.0f64;
    for r in 0..n {
        for c in 0..n {
            let target = if r == c {
                (t.cosh() - shape.values[r] * t.sinh()).powi(2)
            } else {
                0.0
            };
            form_err = form_err.max((restricted[(r, c)] - target).abs());
        }
    }
    Ok((kappa_err, form_err))
}

/// Deviations among the pointwise identities relating `S`, `R_i`, `lambda_i`
/// and `kappa_i` at a regular point:
/// `S = n(n-1) - 2(n-1) sum R`, `S = 2(n-1) sum lambda`, `lambda = 1/2 - R`,
/// `lambda = -(1 + kappa)/(2(1 - kappa))` and `lambda = T(kappa)/2`.
/// Principal curvatures come from the closed-form fundamental forms.
pub fn identity_chain(j: &Jet2) -> Result<IdentityChain> {
    let r = curvature_report(j, j.dim())?;
    chain_from(j, &r.kappas)
}

/// As [`identity_chain`], but with principal curvatures taken from
/// finite-difference fundamental forms of `phi`, so that the two sides of
/// each identity come from independent computations.
pub fn identity_chain_fd(spec: &ConformalFactorSpec, x: &SpherePoint) -> Result<IdentityChain> {
    let j = jet2(spec, x)?;
    let reg = super::regularity(&j);
    if !reg.regular {
        return Err(crate::Error::SingularPoint {
            min_eig: reg.min_eig,
            threshold: reg.threshold,
        });
    }
    let first = fd_first_form(spec, x)?;
    let second = fd_second_form(spec, x)?;
    let shape =
        linalg::generalized_sym_eigen(&second, &first).ok_or(crate::Error::SingularPoint {
            min_eig: reg.min_eig,
            threshold: reg.threshold,
        })?;
    let mut kappas = shape.values;
    kappas.reverse();
    chain_from(&j, &kappas)
}

fn chain_from(j: &Jet2, kappas: &[f64]) -> Result<IdentityChain> {
    let n = j.dim();
    let nf = n as f64;
    let s = scalar_curvature(j, n);
    let lambdas = crate::sphere::schouten_eigen(&crate::sphere::schouten(j), j).values;
    let radii: Vec<f64> = kappas.iter().map(|k| 1.0 / (1.0 - k)).collect();
    let kei = (s - (nf * (nf - 1.0) - 2.0 * (nf - 1.0) * radii.iter().sum::<f64>())).abs();
    let trace = (s - 2.0 * (nf - 1.0) * lambdas.iter().sum::<f64>()).abs();
    let relac = lambdas
        .iter()
        .zip(&radii)
        .fold(0.0f64, |m, (l, r)| m.max((l - (0.5 - r)).abs()));
    let sija = lambdas.iter().zip(kappas).fold(0.0f64, |m, (l, k)| {
        m.max((l + (1.0 + k) / (2.0 * (1.0 - k))).abs())
    });
    let half_t = transform_t(kappas)?;
    let w14 = lambdas
        .iter()
        .zip(&half_t)
        .fold(0.0f64, |m, (l, t)| m.max((l - 0.5 * t).abs()));
    Ok(IdentityChain {
        kei,
        trace,
        relac,
        sija,
        w14,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityChain {
    pub kei: f64,
    pub trace: f64,
    pub relac: f64,
    pub sija: f64,
    pub w14: f64,
}

impl IdentityChain {
    pub fn max(&self) -> f64 {
        [self.kei, self.trace, self.relac, self.sija, self.w14]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Grid check of `phi = (1/n) Δ^g psi + ((S + n(n-1)) / (2n(n-1))) psi` on
/// `S^2`, with `Δ^g = e^{-2 rho} Δ^{g0}` applied spectrally to each
/// component of `psi`. Returns the largest componentwise deviation.
pub fn laplacian_representation_error(
    spec: &ConformalFactorSpec,
    grid: &Arc<SphereGrid>,
) -> Result<f64> {
    let n = 2usize;
    let nf = n as f64;
    let jets: Vec<Jet2> = (0..grid.len())
        .into_par_iter()
        .map(|k| jet2(spec, &grid.point(k)))
        .collect::<Result<_>>()?;
    let frames: Vec<SurfaceFrame> = jets.iter().map(represent).collect();
    let mut worst = 0.0f64;
    for comp in 0..=n + 1 {
        let samples: Vec<f64> = frames.iter().map(|f| f.psi.coords()[comp]).collect();
        let field = ScalarField::from_samples(grid.clone(), samples)?;
        let mut coeffs = grid.analyze(field.samples(), grid.degree())?;
        for l in 0..=grid.degree() {
            let ev = -((l * (l + 1)) as f64);
            for m in -(l as i64)..=(l as i64) {
                coeffs[coeff_index(l, m)] *= ev;
            }
        }
        let lap = grid.synthesize(&coeffs)?;
        for (k, j) in jets.iter().enumerate() {
            let s = scalar_curvature(j, n);
            let psi = frames[k].psi.coords()[comp];
            let rebuilt = (-2.0 * j.value).exp() * lap[k] / nf
                + (s + nf * (nf - 1.0)) / (2.0 * nf * (nf - 1.0)) * psi;
            worst = worst.max((rebuilt - frames[k].phi.coords()[comp]).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::{Constant, Polynomial};

    fn poly() -> ConformalFactorSpec {
        ConformalFactorSpec::analytic(
            Polynomial::new(
                2,
                vec![
                    (1.1, vec![0, 0, 0]),
                    (0.25, vec![1, 1, 0]),
                    (-0.2, vec![0, 0, 1]),
                    (0.1, vec![2, 0, 1]),
                ],
            )
            .unwrap(),
        )
    }

    #[test]
    fn fd_forms_match_closed_forms() {
        let x = SpherePoint::normalize(vec![0.3, -0.4, 0.6]).unwrap();
        let e = form_errors(&poly(), &x).unwrap();
        assert!(e.first < 1e-7 && e.second < 1e-7, "{e:?}");
        assert!(e.light_cone < 1e-7 && e.mixed < 1e-7, "{e:?}");
    }

    #[test]
    fn flow_laws_hold() {
        let x = SpherePoint::normalize(vec![-0.2, 0.5, 0.3]).unwrap();
        for t in [0.3, -0.2, 1.0] {
            let (k, i) = flow_errors(&poly(), &x, t).unwrap();
            assert!(k < 1e-6 && i < 1e-6, "t={t}: {k} {i}");
        }
    }

    #[test]
    fn gauss_map_is_normal() {
        let x = SpherePoint::normalize(vec![0.7, 0.1, -0.3]).unwrap();
        let v = crate::sphere::TangentFrame::at(&x).combine(&[0.6, -0.8]);
        assert!(gauss_map_orthogonality(&poly(), &x, &v).unwrap() < 1e-8);
        assert!(light_cone_speed_error(&poly(), &x, &v).unwrap() < 1e-8);
    }

    #[test]
    fn identity_chain_analytic_and_fd() {
        let x = SpherePoint::normalize(vec![0.2, 0.3, -0.5]).unwrap();
        let spec = poly();
        assert!(identity_chain(&jet2(&spec, &x).unwrap()).unwrap().max() < 1e-12);
        assert!(identity_chain_fd(&spec, &x).unwrap().max() < 1e-8);
        let fd = spec.with_mode(JetMode::FiniteDifference);
        assert!(identity_chain_fd(&fd, &x).unwrap().max() < 1e-4);
    }

    #[test]
    fn laplacian_representation_on_grid() {
        let grid = Arc::new(SphereGrid::new(24).unwrap());
        let e = laplacian_representation_error(&poly(), &grid).unwrap();
        assert!(e < 1e-8, "{e}");
        let c = ConformalFactorSpec::analytic(Constant::new(2, 0.4));
        assert!(laplacian_representation_error(&c, &grid).unwrap() < 1e-12);
    }
}
