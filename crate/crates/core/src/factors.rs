//! Concrete conformal factors and the builtin-name parser used by the CLI.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sphere::grid::ScalarField;
use crate::sphere::harmonics::{num_coeffs, ShExpansion};
use crate::sphere::{ConformalFactor, ConformalFactorSpec, Jet2, JetMode, SpherePoint};

/// `rho == c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant {
    n: usize,
    c: f64,
}

impl Constant {
    pub fn new(n: usize, c: f64) -> Self {
        Self { n, c }
    }

    pub fn value(&self) -> f64 {
        self.c
    }
}

impl ConformalFactor for Constant {
    fn value(&self, _x: &SpherePoint) -> f64 {
        self.c
    }

    fn analytic_jet(&self, x: &SpherePoint) -> Option<Jet2> {
        debug_assert_eq!(x.dim(), self.n);
        let m = x.coords().len();
        Some(Jet2::from_ambient(
            x,
            self.c,
            &vec![0.0; m],
            &DMatrix::zeros(m, m),
        ))
    }

    fn describe(&self) -> String {
        format!("constant {}", self.c)
    }
}

/// `rho = a + b x_axis` with a zero-based ambient axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    axis: usize,
    a: f64,
    b: f64,
}

impl Affine {
    pub fn new(axis: usize, a: f64, b: f64) -> Self {
        Self { axis, a, b }
    }
}

impl ConformalFactor for Affine {
    fn value(&self, x: &SpherePoint) -> f64 {
        self.a + self.b * x.coords()[self.axis]
    }

    fn analytic_jet(&self, x: &SpherePoint) -> Option<Jet2> {
        let m = x.coords().len();
        if self.axis >= m {
            return None;
        }
        let mut g = vec![0.0; m];
        g[self.axis] = self.b;
        Some(Jet2::from_ambient(
            x,
            self.value(x),
            &g,
            &DMatrix::zeros(m, m),
        ))
    }

    fn describe(&self) -> String {
        format!("{} + {} x{}", self.a, self.b, self.axis + 1)
    }
}

/// Polynomial in the ambient coordinates, restricted to `S^n`:
/// `sum_t coef_t prod_i x_i^{e_ti}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl Polynomial {
    pub fn new(n: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        for (c, e) in &terms {
            if e.len() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    found: e.len(),
                });
            }
            if !c.is_finite() {
                return Err(Error::NonFinite {
                    what: "polynomial coefficient".into(),
                });
            }
        }
        Ok(Self { n, terms })
    }

    fn ambient(&self, x: &[f64]) -> (f64, Vec<f64>, DMatrix<f64>) {
        let m = self.n + 1;
        let mut v = 0.0;
        let mut g = vec![0.0; m];
        let mut h = DMatrix::zeros(m, m);
        // d^k/dx^k of x^e, evaluated at x
        let pw = |xi: f64, e: u32, k: u32| -> f64 {
            if k > e {
                return 0.0;
            }
            let mut f = 1.0;
            for j in 0..k {
                f *= (e - j) as f64;
            }
            f * xi.powi((e - k) as i32)
        };
        for (c, e) in &self.terms {
            let mono = |orders: &[u32]| -> f64 {
                (0..m).map(|i| pw(x[i], e[i], orders[i])).product::<f64>() * c
            };
            let mut ord = vec![0u32; m];
            v += mono(&ord);
            for i in 0..m {
                ord[i] += 1;
                g[i] += mono(&ord);
                for j in 0..m {
                    ord[j] += 1;
                    h[(i, j)] += mono(&ord);
                    ord[j] -= 1;
                }
                ord[i] -= 1;
            }
        }
        (v, g, h)
    }
}

impl ConformalFactor for Polynomial {
    fn value(&self, x: &SpherePoint) -> f64 {
        self.ambient(x.coords()).0
    }

    fn analytic_jet(&self, x: &SpherePoint) -> Option<Jet2> {
        if x.dim() != self.n {
            return None;
        }
        let (v, g, h) = self.ambient(x.coords());
        Some(Jet2::from_ambient(x, v, &g, &h))
    }

    fn describe(&self) -> String {
        format!("polynomial with {} terms", self.terms.len())
    }
}

impl ShExpansion {
    /// Random expansion with coefficients uniform in `[-amp, amp] / (1 + l)^2`
    /// for `1 <= l <= l_max` and `mean` as the average value.
    pub fn random<R: Rng>(rng: &mut R, l_max: usize, mean: f64, amp: f64) -> Self {
        let mut c = vec![0.0; num_coeffs(l_max)];
        for (i, ci) in c.iter_mut().enumerate().skip(1) {
            let l = crate::sphere::harmonics::degree_of(i) as f64;
            *ci = rng.random_range(-amp..=amp) / ((1.0 + l) * (1.0 + l));
        }
        let mut e = ShExpansion::new(l_max, c).expect("finite coefficients");
        let k = ShExpansion::constant(l_max, mean);
        e.coeffs_mut()[0] = k.coeffs()[0];
        e
    }

    /// Band-limited interpolant of grid samples (degree = grid degree).
    pub fn from_field(field: &ScalarField) -> Self {
        let mut f = field.clone();
        let l = f.grid().degree();
        ShExpansion::new(l, f.coefficients().to_vec()).expect("finite coefficients")
    }
}

/// Parses `constant:<v>` or `coordinate:<i>:<a>:<b>` (`rho = a + b x_i`,
/// `i` one-based). Returns `Ok(None)` for strings that are not builtin names.
pub fn parse_builtin(name: &str, n: usize) -> Result<Option<ConformalFactorSpec>> {
    let parts: Vec<&str> = name.trim().split(':').collect();
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("{name}: {s:?} is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Parse(format!("{name}: value must be finite")))
        }
    };
    match parts.as_slice() {
        ["constant", v] => Ok(Some(ConformalFactorSpec::new(
            Arc::new(Constant::new(n, num(v)?)),
            JetMode::Analytic,
        ))),
        ["coordinate", i, a, b] => {
            let i: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("{name}: bad axis {i:?}")))?;
            if i == 0 || i > n + 1 {
                return Err(Error::Parse(format!(
                    "{name}: axis must be between 1 and {}",
                    n + 1
                )));
            }
            Ok(Some(ConformalFactorSpec::new(
                Arc::new(Affine::new(i - 1, num(a)?, num(b)?)),
                JetMode::Analytic,
            )))
        }
        [head, ..] if *head == "constant" || *head == "coordinate" => Err(Error::Parse(format!(
            "malformed builtin {name:?}; expected constant:<v> or coordinate:<i>:<a>:<b>"
        ))),
        _ => Ok(None),
    }
}
