//! Grid sweeps of the construction and their CSV/OBJ output.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use super::{curvature_report, regularity, represent, CurvatureReport, Regularity, SurfaceFrame};
use crate::error::{Error, Result};
use crate::fmt_num;
use crate::sphere::grid::SphereGrid;
use crate::sphere::{
    jet2, scalar_curvature, schouten, schouten_eigen, ConformalFactorSpec, Jet2, SpherePoint,
};

pub const REPORT_HEADER: [&str; 10] = [
    "theta",
    "phi",
    "kappa_min",
    "kappa_max",
    "R_mean",
    "lambda_min",
    "lambda_max",
    "S",
    "C",
    "regular",
];

/// Everything computed at one grid node.
#[derive(Debug, Clone)]
pub struct NodeResult {
    pub frame: SurfaceFrame,
    pub regularity: Regularity,
    pub lambdas: Vec<f64>,
    pub scalar: f64,
    /// `None` at singular nodes.
    pub report: Option<CurvatureReport>,
}

impl NodeResult {
    pub fn from_jet(j: &Jet2) -> Self {
        let n = j.dim();
        let report = curvature_report(j, n).ok();
        Self {
            frame: represent(j),
            regularity: regularity(j),
            lambdas: schouten_eigen(&schouten(j), j).values,
            scalar: scalar_curvature(j, n),
            report,
        }
    }
}

/// The construction evaluated on every node of an `S^2` grid, plus the poles
/// (used to close the mesh).
#[derive(Debug, Clone)]
pub struct Sweep {
    pub grid: Arc<SphereGrid>,
    pub nodes: Vec<NodeResult>,
    pub north: SurfaceFrame,
    pub south: SurfaceFrame,
}

impl Sweep {
    /// Sweep of `rho + shift`.
    pub fn new(spec: &ConformalFactorSpec, grid: &Arc<SphereGrid>, shift: f64) -> Result<Self> {
        let jets: Vec<Jet2> = (0..grid.len())
            .into_par_iter()
            .map(|k| jet2(spec, &grid.point(k)).map(|j| j.dilated(shift)))
            .collect::<Result<_>>()?;
        let north = jet2(spec, &SpherePoint::north(2))?.dilated(shift);
        let south = jet2(spec, &SpherePoint::new(vec![0.0, 0.0, -1.0])?)?.dilated(shift);
        Ok(Self::from_jets(grid, &jets, &north, &south))
    }

    pub fn from_jets(grid: &Arc<SphereGrid>, jets: &[Jet2], north: &Jet2, south: &Jet2) -> Self {
        let nodes = jets.par_iter().map(NodeResult::from_jet).collect();
        Self {
            grid: grid.clone(),
            nodes,
            north: represent(north),
            south: represent(south),
        }
    }

    pub fn all_regular(&self) -> bool {
        self.nodes.iter().all(|n| n.report.is_some())
    }

    /// Number of singular nodes and the smallest `A` eigenvalue seen.
    pub fn singular_summary(&self) -> (usize, f64) {
        let count = self.nodes.iter().filter(|n| n.report.is_none()).count();
        let min = self
            .nodes
            .iter()
            .fold(f64::INFINITY, |m, n| m.min(n.regularity.min_eig));
        (count, min)
    }

    pub fn reports(&self) -> Vec<&CurvatureReport> {
        self.nodes
            .iter()
            .filter_map(|n| n.report.as_ref())
            .collect()
    }

    /// Report CSV; curvature columns are `NaN` at singular nodes.
    pub fn write_report_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(REPORT_HEADER)
            .map_err(|e| Error::Io(e.to_string()))?;
        for (k, node) in self.nodes.iter().enumerate() {
            let (theta, phi) = self.grid.angles(k);
            let (kmin, kmax, c) = match &node.report {
                Some(r) => (r.kappa_min(), r.kappa_max(), r.christoffel_mean),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            let row = [
                fmt_num(theta),
                fmt_num(phi),
                fmt_num(kmin),
                fmt_num(kmax),
                fmt_num(c),
                fmt_num(node.lambdas[0]),
                fmt_num(*node.lambdas.last().unwrap()),
                fmt_num(node.scalar),
                fmt_num(c),
                if node.report.is_some() { "1" } else { "0" }.to_string(),
            ];
            out.write_record(&row)
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }

    /// Triangulated image in the Poincaré ball.
    pub fn mesh(&self) -> Mesh {
        let g = &self.grid;
        let (nt, np) = (g.n_theta(), g.n_phi());
        let mut vertices: Vec<[f64; 3]> = self
            .nodes
            .iter()
            .map(|n| to3(&n.frame.poincare()))
            .collect();
        let north = vertices.len();
        vertices.push(to3(&self.north.poincare()));
        let south = vertices.len();
        vertices.push(to3(&self.south.poincare()));
        let idx = |i: usize, j: usize| i * np + (j % np);
        let mut faces = Vec::new();
        for j in 0..np {
            faces.push([north, idx(0, j), idx(0, j + 1)]);
        }
        for i in 0..nt - 1 {
            for j in 0..np {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        for j in 0..np {
            faces.push([south, idx(nt - 1, j + 1), idx(nt - 1, j)]);
        }
        Mesh { vertices, faces }
    }
}

fn to3(v: &[f64]) -> [f64; 3] {
    [v[0], v[1], v[2]]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 3]>,
    /// Zero-based vertex indices.
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn write_obj<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", fmt_num(v[0]), fmt_num(v[1]), fmt_num(v[2]))?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}
