//! Conformal metrics on the round sphere and horospherically convex
//! hypersurfaces of hyperbolic space.
//!
//! A conformal factor `rho` on `S^n` determines a hypersurface of `H^{n+1}`
//! whose hyperbolic Gauss map is the identity and whose horospherical metric
//! is `e^{2 rho} g0`. This crate evaluates that correspondence pointwise,
//! solves the backward problem on `S^2` (prescribed scalar curvature), and
//! checks the identities relating principal curvatures, curvature radii and
//! Schouten eigenvalues.

pub mod christoffel;
pub mod error;
pub mod factors;
pub mod horospherical;
pub mod linalg;
pub mod lorentz;
pub mod sphere;
pub mod verify;
pub mod weingarten;

pub use error::{Error, Result};
pub use lorentz::{classify, lorentz_dot, LorentzVec, QuadricClass, QuadricTag};
pub use sphere::grid::{ScalarField, SphereGrid};
pub use sphere::harmonics::ShExpansion;
pub use sphere::{
    jet2, laplacian_g0, scalar_curvature, schouten, schouten_eigen, ConformalFactor,
    ConformalFactorSpec, Jet2, JetMode, SpherePoint, SymBilinear, TangentFrame, TangentVec,
};

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:?}")
}
