//! The backward direction on `S^2`: from a prescribed scalar curvature (or
//! Christoffel mean) to a conformal factor and its hypersurface.
//!
//! The conformal factor solves `-Δrho + 1 = (e^{2 rho}/2) S`, discretized by
//! Galerkin projection onto real spherical harmonics of degree `<= L` and
//! solved by damped Newton.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fmt_num;
use crate::horospherical::checks::{fd_light_cone_metric, identity_chain};
use crate::horospherical::export::Sweep;
use crate::horospherical::tau::find_tau0_jets;
use crate::linalg;
use crate::sphere::grid::{ScalarField, SphereGrid};
use crate::sphere::harmonics::{degree_of, num_coeffs, ShExpansion};
use crate::sphere::{ConformalFactorSpec, Jet2, SpherePoint};

/// Largest band the dense Newton solver accepts.
pub const MAX_SOLVER_DEGREE: usize = 32;

/// `S = n(n-1)(1 - 2C)`.
pub fn christoffel_to_scalar(c: &ScalarField, n: usize) -> Result<ScalarField> {
    let k = (n * (n - 1)) as f64;
    c.map(|v| k * (1.0 - 2.0 * v))
}

/// `C_tau = (1 - S/(tau^2 n(n-1)))/2`.
pub fn scalar_to_christoffel(s: &ScalarField, tau: f64, n: usize) -> Result<ScalarField> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::DomainViolation(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let k = tau * tau * (n * (n - 1)) as f64;
    s.map(|v| 0.5 * (1.0 - v / k))
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    /// Galerkin band limit.
    pub degree: usize,
    /// Sup-norm of the grid residual at which Newton stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Initial damping factor in `(0, 1]`; doubled after each decrease.
    pub damping: f64,
    /// Initial guess; `rho = 0` when absent.
    pub initial: Option<ScalarField>,
}

impl SolveConfig {
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            tol: 1e-10,
            max_iter: 40,
            damping: 0.5,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::DomainViolation("tolerance must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::DomainViolation("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::DomainViolation("damping must lie in (0, 1]".into()));
        }
        if self.degree > MAX_SOLVER_DEGREE {
            return Err(Error::InvalidGrid {
                degree: self.degree,
                reason: format!("solver supports degree up to {MAX_SOLVER_DEGREE}"),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    Diverged,
    ObstructionSuspected,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Diverged => "diverged",
            SolveStatus::ObstructionSuspected => "obstruction-suspected",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Final iterate when converged, otherwise the iterate with the smallest residual.
    pub rho: ScalarField,
    pub expansion: ShExpansion,
    /// Grid sup-norm residual of every iterate, starting with the initial guess.
    pub residuals: Vec<f64>,
    /// Kazdan–Warner integrals of the target against `rho`.
    pub kw: Vec<f64>,
    pub kw_floor: f64,
}

impl SolveOutcome {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().unwrap()
    }

    pub fn write_residuals_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "residual"]).map_err(io)?;
        for (i, r) in self.residuals.iter().enumerate() {
            out.write_record([i.to_string(), fmt_num(*r)]).map_err(io)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_kw_csv<W: Write>(&self, w: W) -> Result<()> {
        write_kw_csv(&self.kw, w)
    }
}

/// `i,value` rows with one-based `i`.
pub fn write_kw_csv<W: Write>(kw: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["i", "value"]).map_err(io)?;
    for (i, v) in kw.iter().enumerate() {
        out.write_record([(i + 1).to_string(), fmt_num(*v)])
            .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Dense operators of the Galerkin system on one grid.
struct Galerkin {
    basis: DMatrix<f64>,
    basis_tw: DMatrix<f64>,
    eig_lap: DVector<f64>,
}

impl Galerkin {
    fn new(grid: &SphereGrid, band: usize) -> Result<Self> {
        let basis = grid.basis_matrix(band)?;
        let w = DVector::from_fn(grid.len(), |k, _| grid.weight(k));
        let mut basis_tw = basis.transpose();
        for (k, wk) in w.iter().enumerate() {
            basis_tw.column_mut(k).scale_mut(*wk);
        }
        let eig_lap = DVector::from_fn(num_coeffs(band), |a, _| {
            let l = degree_of(a) as f64;
            l * (l + 1.0)
        });
        Ok(Self {
            basis,
            basis_tw,
            eig_lap,
        })
    }

    /// `(rho, e^{2 rho} S, grid residual)` at coefficients `c`.
    fn evaluate(&self, s: &[f64], c: &DVector<f64>) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let rho = &self.basis * c;
        let lap = &self.basis * c.component_mul(&self.eig_lap);
        let e = DVector::from_fn(rho.len(), |k, _| (2.0 * rho[k]).exp() * s[k]);
        let r = DVector::from_fn(rho.len(), |k, _| lap[k] + 1.0 - 0.5 * e[k]);
        (rho, e, r)
    }

    fn newton_step(&self, c: &DVector<f64>, e: &DVector<f64>) -> DVector<f64> {
        let ones_minus = e.map(|v| 1.0 - 0.5 * v);
        let g = c.component_mul(&self.eig_lap) + &self.basis_tw * ones_minus;
        let mut weighted = self.basis.clone();
        for (k, ek) in e.iter().enumerate() {
            weighted.row_mut(k).scale_mut(*ek);
        }
        let mut jac = -(&self.basis_tw * weighted);
        for a in 0..jac.nrows() {
            jac[(a, a)] += self.eig_lap[a];
        }
        let jac = linalg::symmetrize(&jac);
        // the conformal group makes J nearly singular on degree-1 modes, so
        // solve with a truncated eigen-decomposition
        let eig = nalgebra::SymmetricEigen::new(jac);
        let cutoff = 1e-9 * (1.0 + eig.eigenvalues.amax());
        let proj = eig.eigenvectors.transpose() * &g;
        let scaled = DVector::from_fn(proj.len(), |i, _| {
            let l = eig.eigenvalues[i];
            if l.abs() > cutoff {
                proj[i] / l
            } else {
                0.0
            }
        });
        -(&eig.eigenvectors * scaled)
    }
}

fn sup(v: &DVector<f64>) -> f64 {
    v.iter().fold(
        0.0f64,
        |m, x| if x.is_nan() { f64::NAN } else { m.max(x.abs()) },
    )
}

/// Grid residual `-Δrho + 1 - (e^{2 rho}/2) S` of a band-limited `rho`.
pub fn nirenberg_residual(s: &ScalarField, rho: &ShExpansion) -> Result<Vec<f64>> {
    let gal = Galerkin::new(s.grid(), rho.l_max())?;
    let c = DVector::from_column_slice(rho.coeffs());
    Ok(gal.evaluate(s.samples(), &c).2.as_slice().to_vec())
}

/// Damped Newton for the `n = 2` Nirenberg equation.
pub fn solve_nirenberg(s: &ScalarField, cfg: &SolveConfig) -> Result<SolveOutcome> {
    cfg.validate()?;
    let grid = s.grid().clone();
    if cfg.degree > grid.degree() {
        return Err(Error::InvalidGrid {
            degree: grid.degree(),
            reason: format!("solver band {} exceeds grid degree", cfg.degree),
        });
    }
    let gal = Galerkin::new(&grid, cfg.degree)?;
    let samples = s.samples();
    let mut c = match &cfg.initial {
        Some(f) => {
            s.same_grid(f)?;
            DVector::from_vec(grid.analyze(f.samples(), cfg.degree)?)
        }
        None => DVector::zeros(num_coeffs(cfg.degree)),
    };
    let (_, mut e, r) = gal.evaluate(samples, &c);
    let mut res = sup(&r);
    let mut residuals = vec![res];
    let mut best = (res, c.clone());
    let mut damping = cfg.damping;
    let mut converged = res <= cfg.tol;
    let mut iter = 0;
    while !converged && iter < cfg.max_iter && res.is_finite() {
        iter += 1;
        let step = gal.newton_step(&c, &e);
        let mut accepted = None;
        let mut d = damping;
        for _ in 0..12 {
            let trial = &c + &step * d;
            let (rho, e_t, r_t) = gal.evaluate(samples, &trial);
            let res_t = sup(&r_t);
            let blown = rho.iter().any(|v| v.abs() > 50.0);
            if res_t.is_finite() && !blown && res_t < res {
                accepted = Some((trial, e_t, res_t, d));
                break;
            }
            d *= 0.5;
        }
        match accepted {
            Some((trial, e_t, res_t, d)) => {
                c = trial;
                e = e_t;
                res = res_t;
                damping = (2.0 * d).min(1.0);
                residuals.push(res);
                if res < best.0 {
                    best = (res, c.clone());
                }
                converged = res <= cfg.tol;
            }
            None => break,
        }
    }
    let status_ok = converged;
    let coeffs = if converged { c } else { best.1 };
    let expansion = ShExpansion::new(cfg.degree, coeffs.as_slice().to_vec())?;
    let rho = ScalarField::from_samples(grid.clone(), grid.synthesize(expansion.coeffs())?)?;
    let kw = kazdan_warner_expansion(s, &expansion)?;
    let kw_floor = kw_noise_floor_expansion(s, &expansion)?;
    let status = if status_ok {
        SolveStatus::Converged
    } else if kw.iter().any(|v| v.abs() > 10.0 * kw_floor) {
        SolveStatus::ObstructionSuspected
    } else {
        SolveStatus::Diverged
    };
    Ok(SolveOutcome {
        status,
        rho,
        expansion,
        residuals,
        kw,
        kw_floor,
    })
}

fn node_jets(grid: &SphereGrid, rho: &ShExpansion) -> Vec<Jet2> {
    (0..grid.len())
        .into_par_iter()
        .map(|k| rho.jet(&grid.point(k)))
        .collect()
}

/// `KW_i = ∫ g0(grad F, grad x_i) e^{n rho} dv0`, evaluated after
/// integrating by parts as `n ∫ F e^{n rho} (x_i - <grad rho, e_i>) dv0`
/// (exact on the grid whenever `e^{2 rho} F` is band-limited).
pub fn kazdan_warner(field: &ScalarField, rho: &ScalarField) -> Result<Vec<f64>> {
    field.same_grid(rho)?;
    kazdan_warner_expansion(field, &ShExpansion::from_field(rho))
}

fn kazdan_warner_expansion(field: &ScalarField, rho: &ShExpansion) -> Result<Vec<f64>> {
    let grid = field.grid();
    let n = 2usize;
    let jets = node_jets(grid, rho);
    (0..=n)
        .map(|i| {
            let integrand: Vec<f64> = jets
                .iter()
                .zip(field.samples())
                .map(|(j, f)| {
                    let g = j.gradient().vec[i];
                    n as f64 * f * (n as f64 * j.value).exp() * (j.point.coords()[i] - g)
                })
                .collect();
            grid.integrate(&integrand, None)
        })
        .collect()
}

/// The same integrals in their original gradient form, with `grad F` taken
/// from the band-limited interpolant of `field`.
pub fn kazdan_warner_direct(field: &ScalarField, rho: &ScalarField) -> Result<Vec<f64>> {
    field.same_grid(rho)?;
    let grid = field.grid();
    let f = ShExpansion::from_field(field);
    let r = ShExpansion::from_field(rho);
    let fj = node_jets(grid, &f);
    let rj = node_jets(grid, &r);
    (0..=2)
        .map(|i| {
            let integrand: Vec<f64> = fj
                .iter()
                .zip(&rj)
                .map(|(a, b)| a.gradient().vec[i] * (2.0 * b.value).exp())
                .collect();
            grid.integrate(&integrand, None)
        })
        .collect()
}

/// Quadrature noise of the Kazdan–Warner integrals for this `rho`: the
/// integrals of the constant `1` (zero in exact arithmetic) scaled by
/// `max |field|`, floored at `1e-14 ∫ |field| e^{2 rho}`.
pub fn kw_noise_floor(field: &ScalarField, rho: &ScalarField) -> Result<f64> {
    field.same_grid(rho)?;
    kw_noise_floor_expansion(field, &ShExpansion::from_field(rho))
}

fn kw_noise_floor_expansion(field: &ScalarField, rho: &ShExpansion) -> Result<f64> {
    let ones = ScalarField::constant(field.grid().clone(), 1.0)?;
    let base = kazdan_warner_expansion(&ones, rho)?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let jets = node_jets(field.grid(), rho);
    let mass: Vec<f64> = jets
        .iter()
        .zip(field.samples())
        .map(|(j, f)| f.abs() * (2.0 * j.value).exp())
        .collect();
    let mass = field.grid().integrate(&mass, None)?;
    Ok((base * field.max_abs()).max(1e-14 * mass))
}

/// A solved conformal factor together with the verified hypersurface.
#[derive(Debug, Clone)]
pub struct Solution {
    pub outcome: SolveOutcome,
    pub tau: f64,
    pub sweep: Sweep,
    /// `max |C_achieved - C_tau|` over nodes.
    pub christoffel_dev: f64,
    /// `max |<dpsi,dpsi> - tau^2 e^{2 rho} g0|` over nodes (finite differences).
    pub metric_dev: f64,
    /// Largest identity-chain deviation over nodes.
    pub chain_dev: f64,
    /// Largest surface-frame invariant violation over nodes.
    pub frame_dev: f64,
}

/// Solves for `rho`, picks the regularizing dilation `tau`, builds the
/// hypersurface of `rho + ln tau` and checks it against the target.
pub fn build_solution(s: &ScalarField, cfg: &SolveConfig) -> Result<Solution> {
    assemble_solution(s, solve_nirenberg(s, cfg)?)
}

/// The hypersurface part of [`build_solution`] for an existing solve.
pub fn assemble_solution(s: &ScalarField, outcome: SolveOutcome) -> Result<Solution> {
    if outcome.status != SolveStatus::Converged {
        return Err(Error::NotConverged {
            status: outcome.status.as_str().into(),
        });
    }
    let grid = s.grid().clone();
    let jets = node_jets(&grid, &outcome.expansion);
    let tau = find_tau0_jets(&jets)?;
    let shift = tau.ln();
    let mut shifted = outcome.expansion.clone();
    shifted.coeffs_mut()[0] += shift * (4.0 * std::f64::consts::PI).sqrt();
    let spec = ConformalFactorSpec::analytic(shifted);
    let dilated: Vec<Jet2> = jets.iter().map(|j| j.dilated(shift)).collect();
    let north = outcome.expansion.jet(&SpherePoint::north(2)).dilated(shift);
    let south = outcome
        .expansion
        .jet(&SpherePoint::new(vec![0.0, 0.0, -1.0])?)
        .dilated(shift);
    let sweep = Sweep::from_jets(&grid, &dilated, &north, &south);
    let target_c = scalar_to_christoffel(s, tau, 2)?;

    let per_node: Vec<(f64, f64, f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| -> Result<(f64, f64, f64, f64)> {
            let node = &sweep.nodes[k];
            let report = node.report.as_ref().ok_or(Error::SingularPoint {
                min_eig: node.regularity.min_eig,
                threshold: node.regularity.threshold,
            })?;
            let c_dev = (report.christoffel_mean - target_c.samples()[k]).abs();
            let x = grid.point(k);
            let fd = fd_light_cone_metric(&spec, &x)?;
            let want = tau * tau * (2.0 * jets[k].value).exp();
            let metric_dev = (fd - DMatrix::identity(2, 2) * want).amax();
            let chain = identity_chain(&dilated[k])?.max();
            Ok((c_dev, metric_dev, chain, node.frame.invariant_error()))
        })
        .collect::<Result<_>>()?;
    let fold = |f: fn(&(f64, f64, f64, f64)) -> f64| per_node.iter().map(f).fold(0.0, f64::max);
    Ok(Solution {
        tau,
        christoffel_dev: fold(|p| p.0),
        metric_dev: fold(|p| p.1),
        chain_dev: fold(|p| p.2),
        frame_dev: fold(|p| p.3),
        sweep,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::Polynomial;
    use crate::sphere::{jet2, scalar_curvature};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn grid(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(l).unwrap())
    }

    #[test]
    fn christoffel_scalar_conversions() {
        let g = grid(4);
        let c = ScalarField::constant(g.clone(), 0.375).unwrap();
        let s = christoffel_to_scalar(&c, 2).unwrap();
        assert!(s.samples().iter().all(|v| *v == 0.5));
        let half = ScalarField::constant(g.clone(), 0.5).unwrap();
        assert!(christoffel_to_scalar(&half, 2).unwrap().max_abs() == 0.0);
        let zero = ScalarField::constant(g.clone(), 0.0).unwrap();
        assert!(christoffel_to_scalar(&zero, 3)
            .unwrap()
            .samples()
            .iter()
            .all(|v| *v == 6.0));

        let back = scalar_to_christoffel(&s, 1.0, 2).unwrap();
        assert!(back.samples().iter().all(|v| *v == 0.375));
        let far = scalar_to_christoffel(&s, 1e8, 2).unwrap();
        assert!(far.samples().iter().all(|v| (v - 0.5).abs() < 1e-15));
        assert!(scalar_to_christoffel(&s, 0.0, 2).is_err());

        let wavy = ScalarField::from_fn(g, |p| 0.3 * p.coords()[0] - 0.1 * p.coords()[2]).unwrap();
        let rt = scalar_to_christoffel(&christoffel_to_scalar(&wavy, 2).unwrap(), 1.0, 2).unwrap();
        assert!(rt.max_abs_diff(&wavy).unwrap() < 1e-14);
    }

    #[test]
    fn constant_targets() {
        let g = grid(16);
        let s = ScalarField::constant(g.clone(), 0.5).unwrap();
        let out = solve_nirenberg(&s, &SolveConfig::new(16)).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert!(out.final_residual() <= 1e-10);
        assert!(out.residuals.len() - 1 <= 8, "{:?}", out.residuals);
        for v in out.rho.samples() {
            assert!((v - 2f64.ln()).abs() < 1e-10);
        }

        let s = ScalarField::constant(g, 2.0).unwrap();
        let out = solve_nirenberg(&s, &SolveConfig::new(16)).unwrap();
        assert_eq!(out.status, SolveStatus::Converged);
        assert!(out.rho.max_abs() < 1e-12);
    }

    #[test]
    fn monotone_target_is_obstructed() {
        let g = grid(16);
        let s = ScalarField::from_fn(g, |p| 2.0 + p.coords()[2]).unwrap();
        let out = solve_nirenberg(&s, &SolveConfig::new(16)).unwrap();
        assert_ne!(out.status, SolveStatus::Converged);
        assert_eq!(out.status, SolveStatus::ObstructionSuspected);
        assert!(out.kw[2].abs() >= 1.0, "{:?}", out.kw);
        assert!(out.kw_floor <= 1e-8, "{}", out.kw_floor);
    }

    #[test]
    fn kw_examples() {
        let g = grid(8);
        let zero = ScalarField::constant(g.clone(), 0.0).unwrap();
        let c = ScalarField::constant(g.clone(), 0.3).unwrap();
        assert!(kazdan_warner(&c, &zero)
            .unwrap()
            .iter()
            .all(|v| v.abs() < 1e-12));
        let x3 = ScalarField::from_fn(g.clone(), |p| p.coords()[2]).unwrap();
        let kw = kazdan_warner(&x3, &zero).unwrap();
        assert!((kw[2] - 8.0 * PI / 3.0).abs() < 1e-12);
        assert!(kw[0].abs() < 1e-12 && kw[1].abs() < 1e-12);
        let direct = kazdan_warner_direct(&x3, &zero).unwrap();
        assert!((direct[2] - kw[2]).abs() < 1e-12);
    }

    fn exact_target(g: &Arc<SphereGrid>) -> (Polynomial, ScalarField) {
        let p = Polynomial::new(
            2,
            vec![
                (2f64.ln(), vec![0, 0, 0]),
                (0.15, vec![0, 0, 1]),
                (0.1, vec![1, 1, 0]),
            ],
        )
        .unwrap();
        let spec = ConformalFactorSpec::analytic(p.clone());
        let s = ScalarField::from_fn(g.clone(), |x| scalar_curvature(&jet2(&spec, x).unwrap(), 2))
            .unwrap();
        (p, s)
    }

    #[test]
    fn nonconstant_solve_and_quadratic_tail() {
        let g = grid(16);
        let (_, s) = exact_target(&g);
        let out = solve_nirenberg(&s, &SolveConfig::new(16)).unwrap();
        assert_eq!(out.status, SolveStatus::Converged, "{:?}", out.residuals);
        let r = &out.residuals;
        for w in r[r.len().saturating_sub(3)..].windows(2) {
            if w[0] < 1e-3 && w[1] > 1e-13 {
                assert!(w[1] <= 10.0 * w[0] * w[0], "{r:?}");
            }
        }
        assert!(
            out.kw.iter().all(|v| v.abs() <= 10.0 * out.kw_floor),
            "{:?} {}",
            out.kw,
            out.kw_floor
        );
    }

    #[test]
    fn gauge_covariance() {
        let g = grid(12);
        let (_, s) = exact_target(&g);
        let out = solve_nirenberg(&s, &SolveConfig::new(12)).unwrap();
        let t = 0.37;
        let mut shifted = out.expansion.clone();
        shifted.coeffs_mut()[0] += t * (4.0 * PI).sqrt();
        let s2 = s.map(|v| (-2.0 * t).exp() * v).unwrap();
        let r = nirenberg_residual(&s2, &shifted).unwrap();
        assert!(r.iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn round_trip_reaches_target() {
        let g = grid(16);
        let (_, s) = exact_target(&g);
        let sol = build_solution(&s, &SolveConfig::new(16)).unwrap();
        assert!(sol.christoffel_dev <= 1e-6, "{}", sol.christoffel_dev);
        assert!(sol.metric_dev <= 1e-6, "{}", sol.metric_dev);
        assert!(sol.chain_dev <= 1e-6);
        assert!(sol.frame_dev <= 1e-9);
        assert!(sol.sweep.all_regular());
    }

    #[test]
    fn round_trip_constant_needs_dilation() {
        let g = grid(8);
        let s = ScalarField::constant(g.clone(), 2.0).unwrap();
        let sol = build_solution(&s, &SolveConfig::new(8)).unwrap();
        assert!(sol.tau > 1.0);
        let s = ScalarField::constant(g, 0.5).unwrap();
        let sol = build_solution(&s, &SolveConfig::new(8)).unwrap();
        let want = 0.5 * (1.0 - 0.5 / (2.0 * sol.tau * sol.tau));
        for r in sol.sweep.reports() {
            assert!((r.christoffel_mean - want).abs() < 1e-9);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SolveConfig::new(8);
        c.damping = 0.0;
        assert!(c.validate().is_err());
        let c = SolveConfig::new(40);
        assert!(c.validate().is_err());
    }
}
