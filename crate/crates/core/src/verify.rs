//! Seeded invariant suites over every module, shared by the `verify`
//! command and the acceptance tests.

use std::f64::consts::{LN_2, PI};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::christoffel::{
    build_solution, kazdan_warner, kw_noise_floor, nirenberg_residual, scalar_to_christoffel,
    solve_nirenberg, Solution, SolveConfig, SolveStatus,
};
use crate::error::{Error, Result};
use crate::factors::{Constant, Polynomial};
use crate::fmt_num;
use crate::horospherical::checks::{
    flow_errors, form_errors, identity_chain, identity_chain_fd, laplacian_representation_error,
    light_cone_speed_error,
};
use crate::horospherical::dual::{dual_sweep, schouten_inverse, write_dual_csv, DualEigen};
use crate::horospherical::export::Sweep;
use crate::horospherical::tau::find_tau0;
use crate::horospherical::{christoffel_flow_mean, curvature_report};
use crate::sphere::grid::{ScalarField, SphereGrid};
use crate::sphere::harmonics::ShExpansion;
use crate::sphere::{
    jet2, scalar_curvature, schouten, schouten_eigen, ConformalFactorSpec, JetMode, SpherePoint,
};
use crate::weingarten::{transform_t, umbilicity_diagnostic, WeingartenFunctional};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
    Above,
}

impl Relation {
    pub fn symbol(&self) -> &'static str {
        match self {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
            Relation::Above => ">",
        }
    }
}

/// One measured quantity against its bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            bound,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            relation: Relation::Above,
            bound,
        }
    }

    /// A yes/no condition recorded as `0 <= 0` (holds) or `1 <= 0`.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.bound,
            Relation::AtLeast => self.value >= self.bound,
            Relation::Above => self.value > self.bound,
        }
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(Check::passed)
}

/// `name,value,relation,bound,pass`.
pub fn write_checks_csv<W: Write>(checks: &[Check], w: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["name", "value", "relation", "bound", "pass"])
        .map_err(io)?;
    for c in checks {
        out.write_record([
            c.name.clone(),
            fmt_num(c.value),
            c.relation.symbol().to_string(),
            fmt_num(c.bound),
            if c.passed() { "1" } else { "0" }.to_string(),
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Degree of the grid used by the sweeps.
    pub degree: usize,
    /// Band of the nonconstant Nirenberg solve and the round trip.
    pub solver_degree: usize,
    pub seed: u64,
    /// Fewer random samples and a coarser Laplacian grid.
    pub quick: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            degree: 16,
            solver_degree: 16,
            seed: DEFAULT_SEED,
            quick: false,
        }
    }
}

impl VerifyConfig {
    fn count(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform point on `S^n`.
pub fn random_point<R: Rng>(rng: &mut R, n: usize) -> SpherePoint {
    loop {
        let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let r2: f64 = v.iter().map(|c| c * c).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            return SpherePoint::normalize(v).expect("nonzero");
        }
    }
}

/// Uniform unit tangent vector at `x`, in ambient coordinates.
pub fn random_tangent<R: Rng>(rng: &mut R, x: &SpherePoint) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..x.coords().len())
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let d: f64 = v.iter().zip(x.coords()).map(|(a, b)| a * b).sum();
        for (vi, xi) in v.iter_mut().zip(x.coords()) {
            *vi -= d * xi;
        }
        let r: f64 = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1e-2 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

/// Random band-limited factor on `S^2`, shifted by `ln tau0` so that it is
/// regular on `grid`.
pub fn random_regular_factor<R: Rng>(
    rng: &mut R,
    band: usize,
    grid: &SphereGrid,
) -> Result<ShExpansion> {
    let mut e = ShExpansion::random(rng, band, 0.5, 0.8);
    let tau = find_tau0(&ConformalFactorSpec::analytic(e.clone()), grid)?;
    e.coeffs_mut()[0] += tau.ln() * (4.0 * PI).sqrt();
    Ok(e)
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Geodesic spheres `rho = c` against their closed-form curvature data,
/// on grid nodes (`n = 2`) and random points (`n = 3`).
pub fn sphere_oracle_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = SphereGrid::new(cfg.degree)?;
    let mut r = rng(cfg.seed, 1);
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let points: Vec<SpherePoint> = if n == 2 {
            grid.points()
        } else {
            (0..cfg.count(200, 40))
                .map(|_| random_point(&mut r, 3))
                .collect()
        };
        let mut worst = 0.0f64;
        for c in [0.25, LN_2, 1.0] {
            let spec = ConformalFactorSpec::analytic(Constant::new(n, c));
            let nf = n as f64;
            let radius = (1.0 - (-2.0 * c).exp()) / 2.0;
            let lambda = (-2.0 * c).exp() / 2.0;
            let kappa = -1.0 / c.tanh();
            let scalar = nf * (nf - 1.0) * (-2.0 * c).exp();
            for x in &points {
                let rep = curvature_report(&jet2(&spec, x)?, n)?;
                worst = worst
                    .max(max_dev(&rep.kappas, &vec![kappa; n]))
                    .max(max_dev(&rep.radii, &vec![radius; n]))
                    .max(max_dev(&rep.lambdas, &vec![lambda; n]))
                    .max((rep.scalar - scalar).abs())
                    .max((rep.christoffel_mean - radius).abs());
            }
        }
        checks.push(Check::at_most(format!("sphere oracle n={n}"), worst, 1e-9));
    }
    Ok(checks)
}

/// The pointwise identity chain on random band-limited factors, with
/// analytic and with finite-difference jets.
pub fn identity_chain_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = SphereGrid::new(16)?;
    let mut r = rng(cfg.seed, 2);
    let stride = cfg.count(1, 9);
    let mut analytic = 0.0f64;
    let mut fd = 0.0f64;
    for _ in 0..cfg.count(5, 2) {
        let e = random_regular_factor(&mut r, 8, &grid)?;
        let spec = ConformalFactorSpec::analytic(e);
        let fd_spec = spec.with_mode(JetMode::FiniteDifference);
        let devs: Vec<(f64, f64)> = (0..grid.len())
            .into_par_iter()
            .map(|k| -> Result<(f64, f64)> {
                let x = grid.point(k);
                let a = identity_chain(&jet2(&spec, &x)?)?.max();
                let f = if k % stride == 0 {
                    identity_chain_fd(&fd_spec, &x)?.max()
                } else {
                    0.0
                };
                Ok((a, f))
            })
            .collect::<Result<_>>()?;
        for (a, f) in devs {
            analytic = analytic.max(a);
            fd = fd.max(f);
        }
    }
    Ok(vec![
        Check::at_most("identity chain analytic jets", analytic, 1e-7),
        Check::at_most("identity chain fd jets", fd, 1e-4),
    ])
}

/// Finite-difference pullbacks of the Minkowski metric against the closed
/// forms of `<dpsi,dpsi>` and `<dphi,dpsi>`.
pub fn light_cone_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = SphereGrid::new(8)?;
    let mut r = rng(cfg.seed, 3);
    let spec = ConformalFactorSpec::analytic(random_regular_factor(&mut r, 6, &grid)?);
    let samples: Vec<(SpherePoint, Vec<f64>)> = (0..cfg.count(200, 50))
        .map(|_| {
            let x = random_point(&mut r, 2);
            let v = random_tangent(&mut r, &x);
            (x, v)
        })
        .collect();
    let devs: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|(x, v)| -> Result<(f64, f64, f64)> {
            let e = form_errors(&spec, x)?;
            Ok((e.light_cone, e.mixed, light_cone_speed_error(&spec, x, v)?))
        })
        .collect::<Result<_>>()?;
    let fold = |f: fn(&(f64, f64, f64)) -> f64| devs.iter().map(f).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("light-cone metric", fold(|d| d.0), 1e-5),
        Check::at_most("mixed form", fold(|d| d.1), 1e-5),
        Check::at_most("light-cone speed", fold(|d| d.2), 1e-5),
    ])
}

/// `phi` rebuilt from the spectral Laplacian of `psi`.
pub fn laplacian_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let degree = if cfg.quick { 16 } else { 24 };
    let grid = Arc::new(SphereGrid::new(degree)?);
    let spec = ConformalFactorSpec::analytic(Polynomial::new(
        2,
        vec![
            (0.9, vec![0, 0, 0]),
            (0.2, vec![0, 0, 1]),
            (0.15, vec![1, 1, 0]),
            (-0.1, vec![2, 0, 0]),
        ],
    )?);
    Ok(vec![Check::at_most(
        format!("laplacian representation L={degree}"),
        laplacian_representation_error(&spec, &grid)?,
        1e-4,
    )])
}

/// Parallel flow: principal curvatures and first form of the flowed
/// hypersurface, and the Christoffel flow law on spheres.
pub fn flow_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = SphereGrid::new(8)?;
    let mut r = rng(cfg.seed, 4);
    let spec = ConformalFactorSpec::analytic(random_regular_factor(&mut r, 6, &grid)?);
    let points: Vec<SpherePoint> = (0..cfg.count(40, 10))
        .map(|_| random_point(&mut r, 2))
        .collect();
    let devs: Vec<(f64, f64)> = points
        .par_iter()
        .map(|x| -> Result<(f64, f64)> {
            let mut worst = (0.0f64, 0.0f64);
            for t in [0.3, 0.8] {
                let (k, f) = flow_errors(&spec, x, t)?;
                worst = (worst.0.max(k), worst.1.max(f));
            }
            Ok(worst)
        })
        .collect::<Result<_>>()?;
    let kappa = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    let form = devs.iter().map(|d| d.1).fold(0.0, f64::max);

    let x = SpherePoint::north(2);
    let mut law = 0.0f64;
    for c in [0.25, LN_2, 1.0] {
        let before = curvature_report(
            &jet2(&ConformalFactorSpec::analytic(Constant::new(2, c)), &x)?,
            2,
        )?;
        for t in [0.1, 0.5, 1.3] {
            let after = curvature_report(
                &jet2(&ConformalFactorSpec::analytic(Constant::new(2, c + t)), &x)?,
                2,
            )?;
            law = law.max(
                (christoffel_flow_mean(before.christoffel_mean, t) - after.christoffel_mean).abs(),
            );
        }
    }
    Ok(vec![
        Check::at_most("flowed principal curvatures", kappa, 1e-5),
        Check::at_most("flowed first form", form, 1e-5),
        Check::at_most("christoffel flow law on spheres", law, 1e-14),
    ])
}

/// Polynomial conformal factor whose scalar curvature serves as a
/// nonconstant target with a known solution.
pub fn nonconstant_target(grid: &Arc<SphereGrid>) -> Result<ScalarField> {
    let spec = ConformalFactorSpec::analytic(Polynomial::new(
        2,
        vec![
            (LN_2, vec![0, 0, 0]),
            (0.15, vec![0, 0, 1]),
            (0.1, vec![1, 1, 0]),
        ],
    )?);
    let samples = grid
        .points()
        .iter()
        .map(|x| Ok(scalar_curvature(&jet2(&spec, x)?, 2)))
        .collect::<Result<Vec<f64>>>()?;
    ScalarField::from_samples(grid.clone(), samples)
}

/// Newton on constant and obstructed targets at `L = 16`, and on the
/// nonconstant target at the configured band.
pub fn nirenberg_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let l = 16;
    let grid = Arc::new(SphereGrid::new(l)?);
    let mut checks = Vec::new();

    let half = ScalarField::constant(grid.clone(), 0.5)?;
    let out = solve_nirenberg(&half, &SolveConfig::new(l))?;
    checks.push(Check::holds(
        "constant 1/2 target converges",
        out.status == SolveStatus::Converged,
    ));
    checks.push(Check::at_most(
        "constant 1/2 target residual",
        out.final_residual(),
        1e-10,
    ));
    checks.push(Check::at_most(
        "constant 1/2 target newton steps",
        (out.residuals.len() - 1) as f64,
        8.0,
    ));
    let ln2 = out
        .rho
        .samples()
        .iter()
        .fold(0.0f64, |m, v| m.max((v - LN_2).abs()));
    checks.push(Check::at_most(
        "constant 1/2 target solution ln 2",
        ln2,
        1e-10,
    ));

    let two = ScalarField::constant(grid.clone(), 2.0)?;
    let out = solve_nirenberg(&two, &SolveConfig::new(l))?;
    checks.push(Check::at_most(
        "round target solution zero",
        out.rho.max_abs(),
        1e-12,
    ));

    let mono = ScalarField::from_fn(grid.clone(), |x| 2.0 + x.coords()[2])?;
    let out = solve_nirenberg(&mono, &SolveConfig::new(l))?;
    checks.push(Check::holds(
        "monotone target does not converge",
        out.status != SolveStatus::Converged,
    ));
    checks.push(Check::holds(
        "monotone target flagged as obstructed",
        out.status == SolveStatus::ObstructionSuspected,
    ));
    checks.push(Check::at_least(
        "monotone target |KW_3|",
        out.kw[2].abs(),
        1.0,
    ));
    checks.push(Check::at_most(
        "monotone target KW noise floor",
        out.kw_floor,
        1e-8,
    ));

    let grid = Arc::new(SphereGrid::new(cfg.solver_degree)?);
    let target = nonconstant_target(&grid)?;
    let out = solve_nirenberg(&target, &SolveConfig::new(cfg.solver_degree))?;
    checks.push(Check::holds(
        "nonconstant target converges",
        out.status == SolveStatus::Converged,
    ));
    let r = &out.residuals;
    let mut tail = 0.0f64;
    for w in r[r.len().saturating_sub(3)..].windows(2) {
        // below 1e-13 the residual is rounding noise
        if w[0] < 1e-3 && w[1] > 1e-13 {
            tail = tail.max(w[1] / (w[0] * w[0]));
        }
    }
    checks.push(Check::at_most("newton quadratic tail constant", tail, 10.0));
    let kw_ratio = out.kw.iter().fold(0.0f64, |m, v| m.max(v.abs())) / out.kw_floor;
    checks.push(Check::at_most(
        "converged solution KW / noise floor",
        kw_ratio,
        10.0,
    ));
    let c = scalar_to_christoffel(&target, 1.0, 2)?;
    let kw_c = kazdan_warner(&c, &out.rho)?;
    let floor_c = kw_noise_floor(&c, &out.rho)?;
    let kw_c_ratio = kw_c.iter().fold(0.0f64, |m, v| m.max(v.abs())) / floor_c;
    checks.push(Check::at_most(
        "converged christoffel field KW / noise floor",
        kw_c_ratio,
        10.0,
    ));

    let t = 0.37;
    let mut shifted = out.expansion.clone();
    shifted.coeffs_mut()[0] += t * (4.0 * PI).sqrt();
    let scaled = target.map(|v| (-2.0 * t).exp() * v)?;
    let gauge = nirenberg_residual(&scaled, &shifted)?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    checks.push(Check::at_most("gauge covariance residual", gauge, 1e-9));
    Ok(checks)
}

/// Solve on the nonconstant target and check the assembled hypersurface.
pub fn round_trip(cfg: &VerifyConfig) -> Result<(Vec<Check>, Solution)> {
    let grid = Arc::new(SphereGrid::new(cfg.solver_degree)?);
    let target = nonconstant_target(&grid)?;
    let sol = build_solution(&target, &SolveConfig::new(cfg.solver_degree))?;
    let mut checks = vec![
        Check::at_most("round trip christoffel mean", sol.christoffel_dev, 1e-6),
        Check::at_most("round trip horospherical metric", sol.metric_dev, 1e-6),
        Check::at_most("round trip identity chain", sol.chain_dev, 1e-6),
        Check::at_most("round trip frame invariants", sol.frame_dev, 1e-9),
        Check::holds("round trip regular at every node", sol.sweep.all_regular()),
    ];
    let round = ScalarField::constant(grid, 2.0)?;
    let tau = build_solution(&round, &SolveConfig::new(cfg.solver_degree))?.tau;
    checks.push(Check::above("round target dilation", tau, 1.0));
    Ok((checks, sol))
}

/// Test factors for the Schouten inversion, all with eigenvalues bounded
/// away from zero.
pub fn dual_factors(seed: u64) -> Result<Vec<ConformalFactorSpec>> {
    let mut r = rng(seed, 5);
    Ok(vec![
        ConformalFactorSpec::analytic(Constant::new(2, 0.25)),
        ConformalFactorSpec::analytic(Polynomial::new(
            2,
            vec![(0.2, vec![0, 0, 0]), (0.3, vec![0, 0, 1])],
        )?),
        ConformalFactorSpec::analytic(ShExpansion::random(&mut r, 4, 0.1, 0.3)),
    ])
}

/// `lambda_i lambda_i^* = 1` on the grid and independence of the flow time.
pub fn dual_checks(cfg: &VerifyConfig) -> Result<(Vec<Check>, Vec<Result<DualEigen>>)> {
    let grid = SphereGrid::new(cfg.degree.min(12))?;
    let mut checks = Vec::new();
    let mut first = None;
    for (i, spec) in dual_factors(cfg.seed)?.into_iter().enumerate() {
        let gap = grid
            .points()
            .iter()
            .map(|x| {
                let j = jet2(&spec, x)?;
                Ok(schouten_eigen(&schouten(&j), &j)
                    .values
                    .iter()
                    .fold(f64::INFINITY, |m, l| m.min(l.abs())))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least(
            format!("dual factor {} eigenvalue gap", i + 1),
            gap,
            1e-2,
        ));
        let base = dual_sweep(&spec, &grid, None);
        let mut product = 0.0f64;
        let mut drift = 0.0f64;
        for (k, d) in base.iter().enumerate() {
            let d = d.as_ref().map_err(Clone::clone)?;
            product = product.max(d.product_error());
            let later = schouten_inverse(&spec, &grid.point(k), Some(d.t + 0.5))?;
            drift = drift.max(max_dev(&d.lambda_star, &later.lambda_star));
        }
        checks.push(Check::at_most(
            format!("dual factor {} product", i + 1),
            product,
            1e-5,
        ));
        checks.push(Check::at_most(
            format!("dual factor {} flow-time drift", i + 1),
            drift,
            1e-6,
        ));
        if i == 1 {
            first = Some(base);
        }
    }
    Ok((checks, first.unwrap_or_default()))
}

/// The involution, the functionals `f_k` and the umbilicity diagnostic.
pub fn weingarten_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut r = rng(cfg.seed, 6);
    let samples = cfg.count(500, 100);
    let mut involution = 0.0f64;
    let mut homog = 0.0f64;
    let mut law = 0.0f64;
    for _ in 0..samples {
        let kappa: Vec<f64> = (0..3).map(|_| r.random_range(-50.0..0.99)).collect();
        let back = transform_t(&transform_t(&kappa)?)?;
        let rel = kappa
            .iter()
            .zip(&back)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs() / (1.0 + a.abs())));
        involution = involution.max(rel);

        let k = r.random_range(1..=3usize);
        let wf = WeingartenFunctional::new(3, k)?;
        let x: Vec<f64> = (0..3).map(|_| r.random_range(0.01..2.0)).collect();
        let s = r.random_range(0.1..10.0);
        let f = wf.base(&x)?;
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        homog = homog.max((wf.base(&scaled)? - s * f).abs() / (s * f));

        let lam: Vec<f64> = (0..3).map(|_| r.random_range(0.01..0.45)).collect();
        let s = r.random_range(0.2..1.0);
        let two: Vec<f64> = lam.iter().map(|l| 2.0 * l).collect();
        let kappa = transform_t(&two)?;
        let tk: Vec<f64> = transform_t(&kappa)?.iter().map(|v| s * v).collect();
        let lhs = s * wf.value(&kappa)?;
        let rhs = wf.value(&transform_t(&tk)?)?;
        law = law.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let mut checks = vec![
        Check::at_most("T involution", involution, 1e-12),
        Check::at_most("f_k homogeneity", homog, 1e-10),
        Check::at_most("weingarten homogeneity law", law, 1e-10),
    ];

    let grid = Arc::new(SphereGrid::new(cfg.degree.min(12))?);
    let mut sphere_dev = 0.0f64;
    for c in [0.25, LN_2, 1.0] {
        let sweep = Sweep::new(
            &ConformalFactorSpec::analytic(Constant::new(2, c)),
            &grid,
            0.0,
        )?;
        for k in [1, 2] {
            let d = umbilicity_diagnostic(&sweep.reports(), &WeingartenFunctional::new(2, k)?);
            sphere_dev = sphere_dev.max(d.max_spread).max(d.wein_const_dev);
        }
    }
    checks.push(Check::at_most(
        "umbilicity diagnostic on spheres",
        sphere_dev,
        1e-10,
    ));
    let mut bumped = ShExpansion::constant(4, LN_2);
    bumped.set(2, 1, 1e-2);
    let sweep = Sweep::new(&ConformalFactorSpec::analytic(bumped), &grid, 0.0)?;
    let d = umbilicity_diagnostic(&sweep.reports(), &WeingartenFunctional::new(2, 2)?);
    checks.push(Check::above(
        "umbilicity diagnostic under perturbation",
        d.max_spread.min(d.wein_const_dev),
        0.0,
    ));
    Ok(checks)
}

/// Frame invariants, grid transforms and `tau0` on a random factor.
pub fn structural_checks(cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let grid = Arc::new(SphereGrid::new(cfg.degree)?);
    let mut r = rng(cfg.seed, 7);
    let e = ShExpansion::random(&mut r, 6, 0.2, 1.0);
    let field = ScalarField::from_samples(grid.clone(), grid.synthesize(e.coeffs())?)?;
    let back = grid.analyze(field.samples(), 6)?;
    let spectral = max_dev(&back, e.coeffs());

    let spec = ConformalFactorSpec::analytic(e);
    let tau = find_tau0(&spec, &grid)?;
    let sweep = Sweep::new(&spec, &grid, tau.ln())?;
    let frames = sweep
        .nodes
        .iter()
        .map(|n| n.frame.invariant_error())
        .fold(0.0f64, f64::max);
    Ok(vec![
        Check::at_most("spherical harmonic round trip", spectral, 1e-12),
        Check::holds("dilated factor regular at every node", sweep.all_regular()),
        Check::at_most("surface frame invariants", frames, 1e-9),
    ])
}

/// Everything [`run_verify`] computed, including the artifacts it writes.
#[derive(Debug, Clone)]
pub struct VerifyRun {
    pub checks: Vec<Check>,
    pub solution: Option<Solution>,
    pub dual_grid: Arc<SphereGrid>,
    pub dual: Vec<Result<DualEigen>>,
}

impl VerifyRun {
    pub fn passed(&self) -> bool {
        all_passed(&self.checks)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed())
    }

    /// Writes `verify.csv`, `dual.csv` and, when the round trip succeeded,
    /// `rho.csv`, `residuals.csv`, `kw.csv`, `report.csv` and `mesh.obj`.
    pub fn write_outputs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let create = |name: &str| -> Result<BufWriter<File>> {
            Ok(BufWriter::new(File::create(dir.join(name))?))
        };
        write_checks_csv(&self.checks, create("verify.csv")?)?;
        write_dual_csv(&self.dual_grid, &self.dual, create("dual.csv")?)?;
        if let Some(sol) = &self.solution {
            sol.outcome.rho.write_csv(create("rho.csv")?)?;
            sol.outcome.write_residuals_csv(create("residuals.csv")?)?;
            sol.outcome.write_kw_csv(create("kw.csv")?)?;
            sol.sweep.write_report_csv(create("report.csv")?)?;
            sol.sweep.mesh().write_obj(create("mesh.obj")?)?;
        }
        Ok(())
    }
}

fn record(checks: &mut Vec<Check>, suite: &str, r: Result<Vec<Check>>) {
    match r {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Check::at_most(format!("{suite}: {e}"), f64::NAN, 0.0)),
    }
}

/// Runs every suite in a fixed order. Suite errors become failing checks.
pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyRun> {
    let mut checks = Vec::new();
    record(&mut checks, "sphere oracle", sphere_oracle_checks(cfg));
    record(&mut checks, "identity chain", identity_chain_checks(cfg));
    record(&mut checks, "light cone", light_cone_checks(cfg));
    record(&mut checks, "laplacian", laplacian_checks(cfg));
    record(&mut checks, "parallel flow", flow_checks(cfg));
    record(&mut checks, "nirenberg", nirenberg_checks(cfg));
    let solution = match round_trip(cfg) {
        Ok((c, sol)) => {
            checks.extend(c);
            Some(sol)
        }
        Err(e) => {
            record(&mut checks, "round trip", Err(e));
            None
        }
    };
    let dual = match dual_checks(cfg) {
        Ok((c, d)) => {
            checks.extend(c);
            d
        }
        Err(e) => {
            record(&mut checks, "schouten inversion", Err(e));
            Vec::new()
        }
    };
    record(&mut checks, "weingarten", weingarten_checks(cfg));
    record(&mut checks, "structure", structural_checks(cfg));
    Ok(VerifyRun {
        checks,
        solution,
        dual_grid: Arc::new(SphereGrid::new(cfg.degree.min(12))?),
        dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_relations() {
        assert!(Check::at_most("a", 1.0, 1.0).passed());
        assert!(!Check::at_most("a", f64::NAN, 1.0).passed());
        assert!(Check::at_least("a", 1.0, 1.0).passed());
        assert!(!Check::above("a", 0.0, 0.0).passed());
        assert!(!Check::holds("a", false).passed());
    }

    #[test]
    fn random_samples_are_valid() {
        let mut r = rng(1, 0);
        for _ in 0..50 {
            let x = random_point(&mut r, 3);
            let v = random_tangent(&mut r, &x);
            let dot: f64 = v.iter().zip(x.coords()).map(|(a, b)| a * b).sum();
            assert!(dot.abs() < 1e-12);
        }
    }

    #[test]
    fn quick_suite_passes() {
        let cfg = VerifyConfig {
            degree: 8,
            solver_degree: 8,
            quick: true,
            ..Default::default()
        };
        let run = run_verify(&cfg).unwrap();
        for c in &run.checks {
            assert!(c.passed(), "{c:?}");
        }
    }
}
