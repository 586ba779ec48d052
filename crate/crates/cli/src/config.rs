//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use horolab::factors::parse_builtin;
use horolab::{ConformalFactorSpec, Error, Result, ScalarField, ShExpansion, SphereGrid};

const KEYS: [&str; 11] = [
    "L", "tol", "max_iter", "damping", "target", "rho", "tau", "k", "quick", "seed", "t",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Tau {
    /// Smallest dilation that makes every node regular.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub degree: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub target: Option<String>,
    pub rho: Option<String>,
    pub tau: Tau,
    pub k: Option<usize>,
    pub quick: bool,
    pub seed: Option<u64>,
    pub t: Option<f64>,
    /// Directory of the config file; relative CSV paths resolve against it.
    pub base: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: PathBuf) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("config line {}: expected key = value", i + 1))
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Parse(format!(
                    "config line {}: unknown key {k:?} (known: {})",
                    i + 1,
                    KEYS.join(", ")
                )));
            }
            if map.insert(k.to_string(), (i + 1, v.to_string())).is_some() {
                return Err(Error::Parse(format!(
                    "config line {}: duplicate key {k:?}",
                    i + 1
                )));
            }
        }
        fn num<T: std::str::FromStr>(
            map: &BTreeMap<String, (usize, String)>,
            key: &str,
        ) -> Result<Option<T>> {
            match map.get(key) {
                None => Ok(None),
                Some((line, v)) => v.parse().map(Some).map_err(|_| {
                    Error::Parse(format!("config line {line}: {key} = {v:?} is not valid"))
                }),
            }
        }
        let tau = match map.get("tau") {
            None => Tau::Fixed(1.0),
            Some((_, v)) if v == "auto" => Tau::Auto,
            Some((line, v)) => match v.parse::<f64>() {
                Ok(t) if t > 0.0 && t.is_finite() => Tau::Fixed(t),
                _ => {
                    return Err(Error::Parse(format!(
                        "config line {line}: tau must be a positive number or auto"
                    )))
                }
            },
        };
        let quick = match map.get("quick").map(|(l, v)| (l, v.as_str())) {
            None | Some((_, "false" | "0")) => false,
            Some((_, "true" | "1")) => true,
            Some((line, v)) => {
                return Err(Error::Parse(format!(
                    "config line {line}: quick = {v:?} is not a boolean"
                )))
            }
        };
        Ok(Self {
            degree: num(&map, "L")?,
            tol: num(&map, "tol")?,
            max_iter: num(&map, "max_iter")?,
            damping: num(&map, "damping")?,
            target: map.get("target").map(|(_, v)| v.clone()),
            rho: map.get("rho").map(|(_, v)| v.clone()),
            tau,
            k: num(&map, "k")?,
            quick,
            seed: num(&map, "seed")?,
            t: num(&map, "t")?,
            base,
        })
    }

    fn resolve(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn grid(&self, default: usize) -> Result<Arc<SphereGrid>> {
        Ok(Arc::new(SphereGrid::new(self.degree.unwrap_or(default))?))
    }

    /// The conformal factor named by `rho` and the grid to evaluate it on.
    /// A CSV factor brings its own grid.
    pub fn factor(
        &self,
        default_degree: usize,
    ) -> Result<(ConformalFactorSpec, Arc<SphereGrid>, String)> {
        let name = self
            .rho
            .as_deref()
            .ok_or_else(|| Error::Parse("config needs rho = <builtin or CSV path>".into()))?;
        if let Some(spec) = parse_builtin(name, 2)? {
            return Ok((spec, self.grid(default_degree)?, name.to_string()));
        }
        let field = read_field(&self.resolve(name))?;
        let grid = field.grid().clone();
        Ok((
            ConformalFactorSpec::analytic(ShExpansion::from_field(&field)),
            grid,
            name.to_string(),
        ))
    }

    /// The scalar-curvature target named by `target`, sampled on its grid.
    pub fn target_field(&self, default_degree: usize) -> Result<(ScalarField, String)> {
        let name = self
            .target
            .as_deref()
            .ok_or_else(|| Error::Parse("config needs target = <builtin or CSV path>".into()))?;
        if let Some(spec) = parse_builtin(name, 2)? {
            let grid = self.grid(default_degree)?;
            return Ok((
                ScalarField::from_fn(grid, |x| spec.value(x))?,
                name.to_string(),
            ));
        }
        Ok((read_field(&self.resolve(name))?, name.to_string()))
    }
}

fn read_field(path: &Path) -> Result<ScalarField> {
    let f = File::open(path)
        .map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    ScalarField::read_csv(BufReader::new(f))
        .map_err(|e| Error::Parse(format!("{}: {}", path.display(), e)))
}
