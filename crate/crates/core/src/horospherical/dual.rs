//! Schouten eigenvalues of the metric seen from the negative Gauss map.
//!
//! After flowing by `t`, the map `chi = phi_t - eta_t = 2 phi_t - psi_t` is a
//! light-cone immersion. Its metric `<d chi, d chi>`, rescaled by `e^{-2t}`,
//! has Schouten eigenvalues `1/(4 lambda_i)`; the public result is
//! `4 x` that, i.e. `1/lambda_i`.
//!
//! The Schouten tensor of a light-cone immersion `chi` is read off as
//! `Sch(u, v) = <xi, d^2 chi(u, v)>`, where `xi` is the null vector with
//! `<xi, chi> = -1` and `xi ⟂ d chi`. Only the component along `xi` of the
//! second derivative enters, so chart Christoffel symbols drop out.

use std::io::Write;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{parallel_flow, represent};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::linalg;
use crate::lorentz::LorentzVec;
use crate::sphere::{
    grid::SphereGrid, jet2, schouten, schouten_eigen, Chart, ConformalFactorSpec, SpherePoint,
    FD_GRAD_STEP, FD_HESS_STEP,
};

/// Schouten eigenvalues with `|lambda|` below this are treated as zero.
pub const ZERO_EIGENVALUE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DualEigen {
    /// `lambda_i`, ascending.
    pub lambdas: Vec<f64>,
    /// `lambda_i^*` paired with `lambda_i` (equal to `1/lambda_i` in theory).
    pub lambda_star: Vec<f64>,
    /// Flow parameter used for the construction.
    pub t: f64,
}

impl DualEigen {
    /// `max |lambda_i lambda_i^* - 1|`.
    pub fn product_error(&self) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.lambda_star)
            .fold(0.0, |m, (a, b)| m.max((a * b - 1.0).abs()))
    }
}

/// Flow parameter placing the largest `e^{-2t} lambda_i` at `1/4`, away from
/// both the singular value `1/2` and the degenerate limit `0`.
pub fn auto_t(lambda_max: f64) -> f64 {
    if lambda_max > 0.0 {
        (0.5 * (4.0 * lambda_max).ln()).max(0.0)
    } else {
        0.0
    }
}

/// `lambda_i^*` at `x`. With `t = None` the flow parameter is [`auto_t`].
pub fn schouten_inverse(
    spec: &ConformalFactorSpec,
    x: &SpherePoint,
    t: Option<f64>,
) -> Result<DualEigen> {
    let j = jet2(spec, x)?;
    let lambdas = schouten_eigen(&schouten(&j), &j).values;
    if let Some(l) = lambdas.iter().find(|l| l.abs() < ZERO_EIGENVALUE) {
        return Err(Error::ZeroEigenvalue { value: *l });
    }
    let lmax = *lambdas.last().unwrap();
    let t = t.unwrap_or_else(|| auto_t(lmax));
    // flowed curvatures: kappa_t = 1 - 2/(1 - 2 mu) with mu = e^{-2t} lambda
    for l in &lambdas {
        let mu = (-2.0 * t).exp() * l;
        let kappa = 1.0 - 2.0 / (1.0 - 2.0 * mu);
        if (1.0 - 2.0 * mu).abs() < 1e-6 || (kappa + 1.0).abs() < 1e-6 || !kappa.is_finite() {
            return Err(Error::FlowNotRegular { kappa });
        }
    }

    let n = x.dim();
    let chart = Chart::at(x);
    let chi = |u: &[f64]| -> Result<LorentzVec> {
        let f = parallel_flow(&represent(&jet2(spec, &chart.point(u))?), t);
        Ok(&f.phi.scale(2.0) - &f.psi)
    };
    let axis = |i: usize, s: f64| {
        let mut u = vec![0.0; n];
        u[i] = s;
        u
    };
    let c0 = chi(&vec![0.0; n])?;
    let (h, hh) = (FD_GRAD_STEP, FD_HESS_STEP);
    let mut d1 = Vec::with_capacity(n);
    for i in 0..n {
        d1.push((&chi(&axis(i, h))? - &chi(&axis(i, -h))?).scale(0.5 / h));
    }
    let mut d2 = vec![vec![LorentzVec::zeros(n + 2); n]; n];
    for i in 0..n {
        let second = &(&chi(&axis(i, hh))? + &chi(&axis(i, -hh))?) - &c0.scale(2.0);
        d2[i][i] = second.scale(1.0 / (hh * hh));
        for k in 0..i {
            let corner = |si: f64, sk: f64| {
                let mut u = vec![0.0; n];
                u[i] = si * hh;
                u[k] = sk * hh;
                chi(&u)
            };
            let v =
                &(&corner(1., 1.)? - &corner(1., -1.)?) - &(&corner(-1., 1.)? - &corner(-1., -1.)?);
            d2[i][k] = v.scale(0.25 / (hh * hh));
            d2[k][i] = d2[i][k].clone();
        }
    }

    let metric = DMatrix::from_fn(n, n, |a, b| d1[a].dot(&d1[b]));
    let metric = linalg::symmetrize(&metric);
    let inv = metric
        .clone()
        .try_inverse()
        .ok_or(Error::FlowNotRegular { kappa: -1.0 })?;
    // xi: project e_0 off the tangent space, normalize against chi, then add
    // the multiple of chi that makes it null
    let mut w = LorentzVec::zeros(n + 2);
    w = w.axpy(1.0, &LorentzVec::from_parts(1.0, &vec![0.0; n + 1]));
    let e0_dots: Vec<f64> = d1.iter().map(|d| w.dot(d)).collect();
    for a in 0..n {
        let coef: f64 = (0..n).map(|b| inv[(a, b)] * e0_dots[b]).sum();
        w = w.axpy(-coef, &d1[a]);
    }
    let w = w.scale(-1.0 / w.dot(&c0));
    let xi = w.axpy(0.5 * w.norm_sq(), &c0);

    let sch = linalg::symmetrize(&DMatrix::from_fn(n, n, |a, b| xi.dot(&d2[a][b])));
    let eig = linalg::generalized_sym_eigen(&sch, &metric)
        .ok_or(Error::FlowNotRegular { kappa: -1.0 })?;
    // eigenvalues w.r.t. e^{2t} <dchi, dchi> are 1/(4 lambda); return 4x that
    let mut star: Vec<f64> = eig
        .values
        .iter()
        .map(|v| 4.0 * (-2.0 * t).exp() * v)
        .collect();
    // pair by matching reciprocals against the ascending lambdas
    star.sort_by(|a, b| (1.0 / a).total_cmp(&(1.0 / b)));
    Ok(DualEigen {
        lambdas,
        lambda_star: star,
        t,
    })
}

/// [`schouten_inverse`] at every grid node, in node order.
pub fn dual_sweep(
    spec: &ConformalFactorSpec,
    grid: &SphereGrid,
    t: Option<f64>,
) -> Vec<Result<DualEigen>> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| schouten_inverse(spec, &grid.point(k), t))
        .collect()
}

/// One row per node and eigenvalue: `theta,phi,lambda_i,lambda_star_i,product`.
/// Nodes whose entry is an error are skipped.
pub fn write_dual_csv<W: Write>(
    grid: &SphereGrid,
    results: &[Result<DualEigen>],
    w: W,
) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta", "phi", "lambda_i", "lambda_star_i", "product"])
        .map_err(io)?;
    for (k, r) in results.iter().enumerate() {
        let Ok(d) = r else { continue };
        let (theta, phi) = grid.angles(k);
        for (l, ls) in d.lambdas.iter().zip(&d.lambda_star) {
            out.write_record([
                fmt_num(theta),
                fmt_num(phi),
                fmt_num(*l),
                fmt_num(*ls),
                fmt_num(l * ls),
            ])
            .map_err(io)?;
        }
    }
    out.flush()?;
    Ok(())
}
