//! Gauss–Legendre x uniform-longitude quadrature on `S^2` and the real
//! spherical-harmonic transform on it.
//!
//! Nodes are stored colatitude-major: node `k = i * n_phi + j` sits at
//! colatitude `theta_i` (ascending) and longitude `phi_j = 2 pi j / n_phi`.
//! Parallel loops run over rings and are reduced in ring order, so results do
//! not depend on the worker count.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::harmonics::{coeff_index, eval_basis, legendre_table, num_coeffs};
use super::SpherePoint;
use crate::error::{Error, Result};
use crate::fmt_num;

pub const MIN_DEGREE: usize = 4;
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    degree: usize,
    thetas: Vec<f64>,
    cos_thetas: Vec<f64>,
    sin_thetas: Vec<f64>,
    ring_weights: Vec<f64>,
    n_phi: usize,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

/// Gauss–Legendre nodes (descending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for k in 1..=n {
        let mut z = (PI * (k as f64 - 0.25) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        nodes.push(z);
        weights.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p0) / (z * z - 1.0))
}

impl SphereGrid {
    /// Grid resolving harmonics up to degree `degree`.
    pub fn new(degree: usize) -> Result<Self> {
        if degree < MIN_DEGREE {
            return Err(Error::InvalidGrid {
                degree,
                reason: format!("degree must be at least {MIN_DEGREE}"),
            });
        }
        if degree > MAX_DEGREE {
            return Err(Error::InvalidGrid {
                degree,
                reason: format!("degree above {MAX_DEGREE} is not supported"),
            });
        }
        let (z, w) = gauss_legendre(degree + 1);
        let n_phi = 2 * degree + 2;
        let dphi = 2.0 * PI / n_phi as f64;
        let thetas: Vec<f64> = z.iter().map(|z| z.clamp(-1.0, 1.0).acos()).collect();
        let sin_thetas = thetas.iter().map(|t| t.sin()).collect();
        let cos_table = (0..n_phi).map(|j| (j as f64 * dphi).cos()).collect();
        let sin_table = (0..n_phi).map(|j| (j as f64 * dphi).sin()).collect();
        Ok(Self {
            degree,
            ring_weights: w.iter().map(|w| w * dphi).collect(),
            cos_thetas: z,
            sin_thetas,
            thetas,
            n_phi,
            cos_table,
            sin_table,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// `(theta, phi)` of node `k`.
    pub fn angles(&self, k: usize) -> (f64, f64) {
        (self.thetas[k / self.n_phi], self.phi(k % self.n_phi))
    }

    /// Node `k` as a point of `S^2`.
    pub fn point(&self, k: usize) -> SpherePoint {
        let (i, j) = (k / self.n_phi, k % self.n_phi);
        let s = self.sin_thetas[i];
        SpherePoint::normalize(vec![
            s * self.cos_table[j],
            s * self.sin_table[j],
            self.cos_thetas[i],
        ])
        .expect("grid node is a unit vector")
    }

    pub fn points(&self) -> Vec<SpherePoint> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.ring_weights[k / self.n_phi]
    }

    pub fn total_weight(&self) -> f64 {
        self.ring_weights.iter().sum::<f64>() * self.n_phi as f64
    }

    fn check_len(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: samples.len(),
            });
        }
        Ok(())
    }

    /// `sum_k w_k f_k (g_k)`, reduced ring by ring in a fixed order.
    pub fn integrate(&self, samples: &[f64], weight: Option<&[f64]>) -> Result<f64> {
        self.check_len(samples)?;
        if let Some(g) = weight {
            self.check_len(g)?;
        }
        let rings: Vec<f64> = (0..self.n_theta())
            .into_par_iter()
            .map(|i| {
                let r = i * self.n_phi..(i + 1) * self.n_phi;
                let s: f64 = match weight {
                    Some(g) => samples[r.clone()]
                        .iter()
                        .zip(&g[r])
                        .map(|(f, g)| f * g)
                        .sum(),
                    None => samples[r].iter().sum(),
                };
                s * self.ring_weights[i]
            })
            .collect();
        Ok(rings.iter().sum())
    }

    /// Harmonic coefficients up to `band` (exact for band-limited samples of
    /// degree `<= degree`).
    pub fn analyze(&self, samples: &[f64], band: usize) -> Result<Vec<f64>> {
        self.check_len(samples)?;
        self.check_band(band)?;
        let contributions: Vec<Vec<f64>> = (0..self.n_theta())
            .into_par_iter()
            .map(|i| {
                let ring = &samples[i * self.n_phi..(i + 1) * self.n_phi];
                let mut a = vec![0.0; band + 1];
                let mut b = vec![0.0; band + 1];
                for m in 0..=band {
                    let (mut sa, mut sb) = (0.0, 0.0);
                    for (j, f) in ring.iter().enumerate() {
                        let idx = (m * j) % self.n_phi;
                        sa += f * self.cos_table[idx];
                        sb += f * self.sin_table[idx];
                    }
                    a[m] = sa;
                    b[m] = sb;
                }
                let p = legendre_table(band, self.cos_thetas[i]);
                let w = self.ring_weights[i];
                let mut out = vec![0.0; num_coeffs(band)];
                for l in 0..=band {
                    let base = l * (l + 1) / 2;
                    out[coeff_index(l, 0)] = w * p[base] * a[0];
                    let mut sm = 1.0;
                    for m in 1..=l {
                        sm *= self.sin_thetas[i];
                        let t = w * std::f64::consts::SQRT_2 * p[base + m] * sm;
                        out[coeff_index(l, m as i64)] = t * a[m];
                        out[coeff_index(l, -(m as i64))] = t * b[m];
                    }
                }
                out
            })
            .collect();
        let mut coeffs = vec![0.0; num_coeffs(band)];
        for c in &contributions {
            coeffs.iter_mut().zip(c).for_each(|(s, v)| *s += v);
        }
        Ok(coeffs)
    }

    /// Samples of `sum c_lm Y_lm`; the band is inferred from `coeffs.len()`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        let band = (coeffs.len() as f64).sqrt().round() as usize;
        if band == 0 || num_coeffs(band - 1) != coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: num_coeffs(band.saturating_sub(1)),
                found: coeffs.len(),
            });
        }
        let band = band - 1;
        self.check_band(band)?;
        let rings: Vec<Vec<f64>> = (0..self.n_theta())
            .into_par_iter()
            .map(|i| {
                let p = legendre_table(band, self.cos_thetas[i]);
                let mut a = vec![0.0; band + 1];
                let mut b = vec![0.0; band + 1];
                for l in 0..=band {
                    let base = l * (l + 1) / 2;
                    a[0] += coeffs[coeff_index(l, 0)] * p[base];
                    let mut sm = 1.0;
                    for m in 1..=l {
                        sm *= self.sin_thetas[i];
                        let t = std::f64::consts::SQRT_2 * p[base + m] * sm;
                        a[m] += t * coeffs[coeff_index(l, m as i64)];
                        b[m] += t * coeffs[coeff_index(l, -(m as i64))];
                    }
                }
                (0..self.n_phi)
                    .map(|j| {
                        let mut v = a[0];
                        for m in 1..=band {
                            let idx = (m * j) % self.n_phi;
                            v += a[m] * self.cos_table[idx] + b[m] * self.sin_table[idx];
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        Ok(rings.concat())
    }

    fn check_band(&self, band: usize) -> Result<()> {
        if band > self.degree {
            return Err(Error::InvalidGrid {
                degree: self.degree,
                reason: format!("band limit {band} exceeds grid degree"),
            });
        }
        Ok(())
    }

    /// Matrix `B[k, a] = Y_a(node k)` for all harmonics up to `band`.
    pub fn basis_matrix(&self, band: usize) -> Result<DMatrix<f64>> {
        self.check_band(band)?;
        let rows: Vec<Vec<f64>> = (0..self.len())
            .into_par_iter()
            .map(|k| {
                let p = self.point(k);
                let c = p.coords();
                eval_basis(band, c[0], c[1], c[2])
            })
            .collect();
        Ok(DMatrix::from_fn(self.len(), num_coeffs(band), |k, a| {
            rows[k][a]
        }))
    }

    /// Index of the node at `(theta, phi)`, if any lies within `tol`.
    fn locate(&self, theta: f64, phi: f64, tol: f64) -> Option<usize> {
        let i = self.thetas.iter().position(|t| (t - theta).abs() <= tol)?;
        let j = (phi / (2.0 * PI) * self.n_phi as f64).round() as usize;
        if j < self.n_phi && (self.phi(j) - phi).abs() <= tol {
            Some(i * self.n_phi + j)
        } else {
            None
        }
    }
}

/// Samples of a function on a [`SphereGrid`], with optional cached
/// harmonic coefficients.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<SphereGrid>,
    samples: Vec<f64>,
    coeffs: Option<Vec<f64>>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.samples == other.samples
    }
}

impl ScalarField {
    pub fn from_samples(grid: Arc<SphereGrid>, samples: Vec<f64>) -> Result<Self> {
        grid.check_len(&samples)?;
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("field sample at node {k}"),
            });
        }
        Ok(Self {
            grid,
            samples,
            coeffs: None,
        })
    }

    /// Samples `f` at every node (in parallel; order-independent).
    pub fn from_fn<F>(grid: Arc<SphereGrid>, f: F) -> Result<Self>
    where
        F: Fn(&SpherePoint) -> f64 + Sync,
    {
        let samples = (0..grid.len())
            .into_par_iter()
            .map(|k| f(&grid.point(k)))
            .collect();
        Self::from_samples(grid, samples)
    }

    pub fn constant(grid: Arc<SphereGrid>, c: f64) -> Result<Self> {
        let n = grid.len();
        Self::from_samples(grid, vec![c; n])
    }

    /// Synthesizes a field from coefficients (band inferred from length).
    pub fn synthesize(grid: Arc<SphereGrid>, coeffs: Vec<f64>) -> Result<Self> {
        let samples = grid.synthesize(&coeffs)?;
        let mut f = Self::from_samples(grid, samples)?;
        f.coeffs = Some(coeffs);
        Ok(f)
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Harmonic coefficients up to the grid degree (cached).
    pub fn coefficients(&mut self) -> &[f64] {
        if self.coeffs.is_none() {
            let c = self
                .grid
                .analyze(&self.samples, self.grid.degree)
                .expect("field length matches its grid");
            self.coeffs = Some(c);
        }
        self.coeffs.as_deref().unwrap()
    }

    pub fn integrate(&self, weight: Option<&ScalarField>) -> Result<f64> {
        if let Some(w) = weight {
            self.same_grid(w)?;
        }
        self.grid
            .integrate(&self.samples, weight.map(|w| w.samples.as_slice()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples(
            self.grid.clone(),
            self.samples.iter().map(|v| f(*v)).collect(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.degree != other.grid.degree {
            return Err(Error::DimensionMismatch {
                expected: self.grid.degree,
                found: other.grid.degree,
            });
        }
        Ok(())
    }

    /// CSV with header `theta,phi,value`, one row per node in storage order.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["theta", "phi", "value"])
            .map_err(csv_err)?;
        for (k, v) in self.samples.iter().enumerate() {
            let (t, p) = self.grid.angles(k);
            out.write_record([fmt_num(t), fmt_num(p), fmt_num(*v)])
                .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads a field written by [`ScalarField::write_csv`]. The grid degree is
    /// inferred from the row count; every `(theta, phi)` must match a node.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["theta", "phi", "value"] {
            return Err(Error::Parse(format!(
                "expected header theta,phi,value, found {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let lineno = line + 2;
            if rec.len() != 3 {
                return Err(Error::Parse(format!(
                    "line {lineno}: expected 3 columns, found {}",
                    rec.len()
                )));
            }
            let mut vals = [0.0; 3];
            for (c, field) in rec.iter().enumerate() {
                vals[c] = field.parse::<f64>().map_err(|e| {
                    Error::Parse(format!("line {lineno}, column {}: {field:?}: {e}", c + 1))
                })?;
                if !vals[c].is_finite() {
                    return Err(Error::Parse(format!("line {lineno}: non-finite value")));
                }
            }
            rows.push(vals);
        }
        let half = rows.len() / 2;
        let n_theta = (half as f64).sqrt().round() as usize;
        if rows.is_empty() || 2 * n_theta * n_theta != rows.len() {
            return Err(Error::Parse(format!(
                "{} rows do not form a (L+1) x (2L+2) grid",
                rows.len()
            )));
        }
        let grid = Arc::new(SphereGrid::new(n_theta - 1).map_err(|e| Error::Parse(e.to_string()))?);
        let mut samples = vec![f64::NAN; grid.len()];
        for (line, [t, p, v]) in rows.into_iter().enumerate() {
            let k = grid.locate(t, p, 1e-9).ok_or_else(|| {
                Error::Parse(format!("line {}: ({t}, {p}) is not a grid node", line + 2))
            })?;
            if !samples[k].is_nan() {
                return Err(Error::Parse(format!("line {}: duplicate node", line + 2)));
            }
            samples[k] = v;
        }
        Self::from_samples(grid, samples)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse(e.to_string()),
    }
}
