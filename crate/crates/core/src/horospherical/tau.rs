//! Scan for a dilation `tau` making the hypersurface regular everywhere.
//!
//! Replacing `rho` by `rho + ln tau` leaves `Sch_g` unchanged and scales the
//! Schouten eigenvalues by `tau^{-2}`, so regularity
//! (`e^{2 rho + 2 ln tau} Id - 2 Sch` positive definite) holds for all large `tau`.

use rayon::prelude::*;

use super::{regularity, regularity_threshold};
use crate::error::{Error, Result};
use crate::linalg;
use crate::sphere::grid::SphereGrid;
use crate::sphere::{jet2, schouten, ConformalFactorSpec, Jet2};

pub const TAU_MIN: f64 = 1.0;
/// Scan stops after `2^MAX_DOUBLINGS * TAU_MIN`.
pub const MAX_DOUBLINGS: u32 = 60;

/// Smallest `tau = 2^k TAU_MIN` for which every jet is regular after the
/// dilation, certified by a full regularity sweep of the dilated jets.
pub fn find_tau0_jets(jets: &[Jet2]) -> Result<f64> {
    // per node: (rho, largest eigenvalue of Sch, largest |lambda|)
    let data: Vec<(f64, f64, f64)> = jets
        .par_iter()
        .map(|j| {
            let ev = linalg::sym_eigenvalues(schouten(j).matrix());
            let top = *ev.last().unwrap();
            let lam = ev.iter().fold(0.0f64, |m, e| m.max(e.abs())) * (-2.0 * j.value).exp();
            (j.value, top, lam)
        })
        .collect();
    let max_abs_lambda = data.iter().fold(0.0f64, |m, d| m.max(d.2));
    for k in 0..=MAX_DOUBLINGS {
        let tau = TAU_MIN * 2f64.powi(k as i32);
        let shift = tau.ln();
        let ok = data.iter().all(|&(rho, top, _)| {
            let r = rho + shift;
            (2.0 * r).exp() - 2.0 * top > regularity_threshold(r)
        });
        if ok {
            let certified = jets
                .par_iter()
                .all(|j| regularity(&j.dilated(shift)).regular);
            if certified {
                return Ok(tau);
            }
        }
    }
    Err(Error::TauNotFound {
        tau_max: TAU_MIN * 2f64.powi(MAX_DOUBLINGS as i32),
        max_abs_lambda,
    })
}

/// [`find_tau0_jets`] over the jets of `spec` at every node of `grid`.
pub fn find_tau0(spec: &ConformalFactorSpec, grid: &SphereGrid) -> Result<f64> {
    let jets: Vec<Jet2> = (0..grid.len())
        .into_par_iter()
        .map(|k| jet2(spec, &grid.point(k)))
        .collect::<Result<_>>()?;
    find_tau0_jets(&jets)
}
