//! Weingarten functionals of the principal curvatures built from the
//! Schouten eigenvalues.
//!
//! `T(x) = (x + 1)/(x - 1)` is an involution of `{x < 1}` and carries
//! principal curvatures to twice the Schouten eigenvalues. A symmetric
//! 1-homogeneous `f` on a cone `Gamma` induces `W(kappa) = f(T(kappa)/2)` on
//! `Gamma* = T(Gamma ∩ {x < 1})`, and `s W(x) = W(T(s T(x)))`.

use crate::error::{Error, Result};
use crate::horospherical::CurvatureReport;

/// Componentwise `(x_i + 1)/(x_i - 1)`; requires every `x_i < 1`.
pub fn transform_t(x: &[f64]) -> Result<Vec<f64>> {
    x.iter()
        .map(|&v| {
            if v < 1.0 {
                Ok((v + 1.0) / (v - 1.0))
            } else {
                Err(Error::DomainViolation(format!(
                    "T is defined for x < 1, got {v}"
                )))
            }
        })
        .collect()
}

/// Elementary symmetric polynomial `S_k`; `S_0 = 1` and `S_k = 0` for `k > n`.
pub fn sigma_k(values: &[f64], k: usize) -> f64 {
    if k > values.len() {
        return 0.0;
    }
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for (i, &v) in values.iter().enumerate() {
        for j in (1..=k.min(i + 1)).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeKind {
    /// Component of `{S_k > 0}` containing the positive cone.
    GammaK(usize),
    /// The positive cone.
    GammaN,
    /// The half-space `{S_1 > 0}`.
    Gamma1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConeSpec {
    pub kind: ConeKind,
    pub n: usize,
}

impl ConeSpec {
    pub fn new(kind: ConeKind, n: usize) -> Result<Self> {
        if let ConeKind::GammaK(k) = kind {
            if k == 0 || k > n {
                return Err(Error::DomainViolation(format!(
                    "cone index {k} outside 1..={n}"
                )));
            }
        }
        Ok(Self { kind, n })
    }

    pub fn gamma_k(n: usize, k: usize) -> Result<Self> {
        Self::new(ConeKind::GammaK(k), n)
    }
}

/// Membership test; `Gamma_k` uses `S_j(x) > 0` for every `j <= k`.
pub fn cone_contains(cone: &ConeSpec, x: &[f64]) -> bool {
    if x.len() != cone.n {
        return false;
    }
    match cone.kind {
        ConeKind::GammaK(k) => (1..=k).all(|j| sigma_k(x, j) > 0.0),
        ConeKind::GammaN => x.iter().all(|v| *v > 0.0),
        ConeKind::Gamma1 => x.iter().sum::<f64>() > 0.0,
    }
}

/// `f_k = S_k^{1/k}` on `Gamma_k`, and the induced `W`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeingartenFunctional {
    pub n: usize,
    pub k: usize,
}

impl WeingartenFunctional {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        ConeSpec::gamma_k(n, k)?;
        Ok(Self { n, k })
    }

    pub fn cone(&self) -> ConeSpec {
        ConeSpec {
            kind: ConeKind::GammaK(self.k),
            n: self.n,
        }
    }

    /// `f_k(x)` for `x` in `Gamma_k`.
    pub fn base(&self, x: &[f64]) -> Result<f64> {
        if !cone_contains(&self.cone(), x) {
            return Err(Error::DomainViolation(format!(
                "{x:?} is outside Gamma_{}",
                self.k
            )));
        }
        Ok(sigma_k(x, self.k).powf(1.0 / self.k as f64))
    }

    /// `W(kappa) = f_k(T(kappa)/2)` for `kappa` in `Gamma*`.
    pub fn value(&self, kappas: &[f64]) -> Result<f64> {
        weingarten_value(self, kappas)
    }
}

/// `W(kappa) = f_k(T(kappa)/2)`; the argument of `f_k` is the vector of
/// Schouten eigenvalues.
pub fn weingarten_value(wf: &WeingartenFunctional, kappas: &[f64]) -> Result<f64> {
    let lambdas: Vec<f64> = transform_t(kappas)?.into_iter().map(|t| 0.5 * t).collect();
    wf.base(&lambdas)
}

/// Values of `W` along `kappa(eps) = T(2 (lambda_b + eps (lambda_in - lambda_b)))`
/// for each `eps`, approaching the image of a boundary point `lambda_b` of
/// `Gamma_k` from an interior point `lambda_in`.
pub fn boundary_probe(
    wf: &WeingartenFunctional,
    lambda_boundary: &[f64],
    lambda_interior: &[f64],
    eps: &[f64],
) -> Result<Vec<f64>> {
    eps.iter()
        .map(|e| {
            let two_lambda: Vec<f64> = lambda_boundary
                .iter()
                .zip(lambda_interior)
                .map(|(b, i)| 2.0 * (b + e * (i - b)))
                .collect();
            let kappa = transform_t(&two_lambda)?;
            weingarten_value(wf, &kappa)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmbilicityDiagnostic {
    /// `max (kappa_max - kappa_min)` over nodes.
    pub max_spread: f64,
    /// `max |W(kappa) - mean W|` over nodes where `W` is defined.
    pub wein_const_dev: f64,
    /// Nodes where `kappa` is outside `Gamma*`.
    pub undefined_nodes: usize,
}

pub fn umbilicity_diagnostic(
    reports: &[&CurvatureReport],
    wf: &WeingartenFunctional,
) -> UmbilicityDiagnostic {
    let max_spread = reports
        .iter()
        .fold(0.0f64, |m, r| m.max(r.kappa_max() - r.kappa_min()));
    let values: Vec<f64> = reports
        .iter()
        .filter_map(|r| wf.value(&r.kappas).ok())
        .collect();
    let undefined_nodes = reports.len() - values.len();
    let wein_const_dev = if values.is_empty() {
        0.0
    } else {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        values.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()))
    };
    UmbilicityDiagnostic {
        max_spread,
        wein_const_dev,
        undefined_nodes,
    }
}

/// `S_k(delta_1, ..., delta_n)` of the signed contact radii. For canonically
/// oriented spheres every `delta_i < 0`, so odd `k` gives a negative value;
/// the sign is reported as computed.
pub fn signed_contact_sigma(report: &CurvatureReport, k: usize) -> f64 {
    sigma_k(&report.signed_contact, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_sigma(x: &[f64], k: usize) -> f64 {
        let n = x.len();
        (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| {
                (0..n)
                    .filter(|i| m & (1 << i) != 0)
                    .map(|i| x[i])
                    .product::<f64>()
            })
            .sum()
    }

    /// `x` lies in the component of `{S_k > 0}` containing `(1, .., 1)` iff the
    /// segment joining them stays inside `{S_k > 0}` (the component is convex).
    fn segment_oracle(x: &[f64], k: usize) -> bool {
        (0..=2000).all(|i| {
            let s = i as f64 / 2000.0;
            let p: Vec<f64> = x.iter().map(|v| (1.0 - s) * v + s).collect();
            brute_sigma(&p, k) > 0.0
        })
    }

    #[test]
    fn transform_examples() {
        assert_eq!(transform_t(&[0.0, 0.0, 0.0]).unwrap(), vec![-1.0; 3]);
        let t = transform_t(&[-5.0 / 3.0, -5.0 / 3.0]).unwrap();
        // twice the Schouten eigenvalue 1/8 of the ln 2 sphere
        assert!((t[0] - 0.25).abs() < 1e-15);
        assert!(transform_t(&[0.5, 1.0]).is_err());
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_k(&[1.0, 2.0, 3.0], 1), 6.0);
        assert_eq!(sigma_k(&[1.0, 2.0, 3.0], 2), 11.0);
        assert_eq!(sigma_k(&[1.0, 2.0, 3.0], 3), 6.0);
        assert!((sigma_k(&[0.7; 4], 4) - 0.7f64.powi(4)).abs() < 1e-15);
        assert_eq!(sigma_k(&[1.0, 2.0], 0), 1.0);
        assert_eq!(sigma_k(&[1.0, 2.0], 3), 0.0);
    }

    #[test]
    fn cone_examples() {
        let g3 = |k| ConeSpec::gamma_k(3, k).unwrap();
        for k in 1..=3 {
            assert!(cone_contains(&g3(k), &[1.0, 1.0, 1.0]));
        }
        assert!(cone_contains(&g3(2), &[-1.0, 3.0, 3.0]));
        assert!(!cone_contains(&g3(3), &[-1.0, 3.0, 3.0]));
        let g1 = ConeSpec::new(ConeKind::Gamma1, 3).unwrap();
        assert!(!cone_contains(&g1, &[-2.0, 0.5, 0.5]));
        let gn = ConeSpec::new(ConeKind::GammaN, 3).unwrap();
        assert!(!cone_contains(&gn, &[-1.0, 3.0, 3.0]));
        assert!(ConeSpec::gamma_k(3, 4).is_err());
        // S_2 > 0 but S_1 < 0: the other component
        assert!(!cone_contains(&g3(2), &[-1.0, -1.0, -1.0]));
    }

    #[test]
    fn sphere_weingarten_value() {
        let wf = WeingartenFunctional::new(2, 1).unwrap();
        let w = wf.value(&[-5.0 / 3.0, -5.0 / 3.0]).unwrap();
        assert!((w - 0.25).abs() < 1e-15);
        let wf2 = WeingartenFunctional::new(2, 2).unwrap();
        assert!((wf2.value(&[-5.0 / 3.0, -5.0 / 3.0]).unwrap() - 0.125).abs() < 1e-15);
        assert!(wf.value(&[2.0, 0.0]).is_err());
    }

    #[test]
    fn boundary_limit() {
        for (n, k, b, i) in [
            (2usize, 1usize, vec![0.2, -0.2], vec![0.2, 0.1]),
            (2, 2, vec![0.3, 0.0], vec![0.3, 0.1]),
            (3, 2, vec![0.2, 0.2, -0.1], vec![0.2, 0.2, 0.1]),
        ] {
            let wf = WeingartenFunctional::new(n, k).unwrap();
            let eps: Vec<f64> = (1..=14).map(|e| 10f64.powi(-e)).collect();
            let vals = boundary_probe(&wf, &b, &i, &eps).unwrap();
            assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
            assert!(vals.last().unwrap().abs() <= 1e-6, "{vals:?}");
        }
    }

    proptest! {
        #[test]
        fn sigma_matches_brute_force(x in prop::collection::vec(-3.0f64..3.0, 1..6), k in 1usize..6) {
            prop_assume!(k <= x.len());
            let a = sigma_k(&x, k);
            let b = brute_sigma(&x, k);
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }

        #[test]
        fn transform_is_involution(x in prop::collection::vec(-50.0f64..0.999, 1..5)) {
            let y = transform_t(&x).unwrap();
            let z = transform_t(&y).unwrap();
            for (a, b) in x.iter().zip(&z) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn gamma_k_matches_component_oracle(x in prop::collection::vec(-2.0f64..2.0, 2..4), k in 1usize..4) {
            prop_assume!(k <= x.len());
            let cone = ConeSpec::gamma_k(x.len(), k).unwrap();
            // skip points within rounding of the boundary
            prop_assume!((1..=k).all(|j| brute_sigma(&x, j).abs() > 1e-9));
            prop_assert_eq!(cone_contains(&cone, &x), segment_oracle(&x, k));
        }

        #[test]
        fn f_k_symmetric_and_homogeneous(x in prop::collection::vec(0.01f64..2.0, 3), s in 0.1f64..10.0, k in 1usize..4) {
            let wf = WeingartenFunctional::new(3, k).unwrap();
            let f = wf.base(&x).unwrap();
            let perm = [x[2], x[0], x[1]];
            prop_assert!((wf.base(&perm).unwrap() - f).abs() <= 1e-12 * f);
            let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
            prop_assert!((wf.base(&scaled).unwrap() - s * f).abs() <= 1e-10 * s * f);
        }

        #[test]
        fn homogeneity_law(lam in prop::collection::vec(0.01f64..0.45, 3), s in 0.2f64..1.0, k in 1usize..4) {
            let wf = WeingartenFunctional::new(3, k).unwrap();
            let two: Vec<f64> = lam.iter().map(|l| 2.0 * l).collect();
            let kappa = transform_t(&two).unwrap();
            let tk: Vec<f64> = transform_t(&kappa).unwrap().iter().map(|v| s * v).collect();
            let lhs = s * wf.value(&kappa).unwrap();
            let rhs = wf.value(&transform_t(&tk).unwrap()).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn f_k_increasing_inside_cone(x in prop::collection::vec(-0.5f64..2.0, 3), k in 1usize..4) {
            let wf = WeingartenFunctional::new(3, k).unwrap();
            prop_assume!(cone_contains(&wf.cone(), &x));
            let h = 1e-7;
            for i in 0..3 {
                let mut p = x.clone();
                p[i] += h;
                let mut m = x.clone();
                m[i] -= h;
                if let (Ok(a), Ok(b)) = (wf.base(&p), wf.base(&m)) {
                    prop_assert!(a - b > 0.0);
                }
            }
        }
    }
}
