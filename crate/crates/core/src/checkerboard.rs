//! Checkerboard copulas: piecewise-uniform densities on an `n×n` grid, stored
//! as cell masses, plus grid-sampled bivariate functions.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marginal tolerance enforced when a density is constructed.
pub const MARGINAL_TOLERANCE: f64 = 1e-10;

/// Optional provenance carried alongside the masses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct DensityMeta {
    pub tau: Option<f64>,
    pub theta: Option<f64>,
}

/// Cell masses `Δ_ij` of a checkerboard copula; cell `(i, j)` covers
/// `[i/n, (i+1)/n] × [j/n, (j+1)/n]` (0-based). Rows index `u`, columns `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DensityWire", try_from = "DensityWire")]
pub struct CheckerboardDensity {
    masses: Array2<f64>,
    meta: DensityMeta,
}

#[derive(Serialize, Deserialize)]
struct DensityWire {
    n: usize,
    masses: Vec<f64>,
    #[serde(default)]
    meta: DensityMeta,
}

impl From<CheckerboardDensity> for DensityWire {
    fn from(c: CheckerboardDensity) -> Self {
        DensityWire {
            n: c.n(),
            masses: c.masses.iter().copied().collect(),
            meta: c.meta,
        }
    }
}

impl TryFrom<DensityWire> for CheckerboardDensity {
    type Error = Error;

    fn try_from(w: DensityWire) -> Result<Self> {
        if w.masses.len() != w.n * w.n {
            return Err(Error::InvalidDensity(format!(
                "expected {} masses for n = {}, found {}",
                w.n * w.n,
                w.n,
                w.masses.len()
            )));
        }
        let masses = Array2::from_shape_vec((w.n, w.n), w.masses)
            .map_err(|e| Error::InvalidDensity(e.to_string()))?;
        CheckerboardDensity::with_meta(masses, w.meta)
    }
}

impl CheckerboardDensity {
    /// Validates squareness, nonnegativity and uniform marginals (to
    /// [`MARGINAL_TOLERANCE`]).
    pub fn new(masses: Array2<f64>) -> Result<Self> {
        Self::with_meta(masses, DensityMeta::default())
    }

    pub fn with_meta(masses: Array2<f64>, meta: DensityMeta) -> Result<Self> {
        let (rows, cols) = masses.dim();
        if rows != cols || rows == 0 {
            return Err(Error::InvalidDensity(format!(
                "masses must be a nonempty square matrix, got {rows}x{cols}"
            )));
        }
        if let Some(bad) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidDensity(format!(
                "cell mass {bad} is negative or non-finite"
            )));
        }
        let density = Self { masses, meta };
        let err = density.max_marginal_error();
        if err > MARGINAL_TOLERANCE {
            return Err(Error::InvalidDensity(format!(
                "marginals deviate from 1/n by {err:e}"
            )));
        }
        Ok(density)
    }

    /// Callers guarantee the invariants (used for Sinkhorn output).
    pub(crate) fn from_masses_unchecked(masses: Array2<f64>) -> Self {
        Self {
            masses,
            meta: DensityMeta::default(),
        }
    }

    /// The independence copula on an `n×n` grid.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDensity("grid size must be positive".into()));
        }
        let m = 1.0 / (n * n) as f64;
        Self::with_meta(
            Array2::from_elem((n, n), m),
            DensityMeta {
                tau: Some(0.0),
                theta: None,
            },
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.masses.nrows()
    }

    #[inline]
    pub fn masses(&self) -> &Array2<f64> {
        &self.masses
    }

    pub fn into_masses(self) -> Array2<f64> {
        self.masses
    }

    pub fn meta(&self) -> DensityMeta {
        self.meta
    }

    pub fn set_meta(&mut self, meta: DensityMeta) {
        self.meta = meta;
    }

    /// Largest deviation of any row or column sum from `1/n`.
    pub fn max_marginal_error(&self) -> f64 {
        let target = 1.0 / self.n() as f64;
        let rows = self.masses.rows().into_iter().map(|r| r.sum());
        let cols = self.masses.columns().into_iter().map(|c| c.sum());
        rows.chain(cols)
            .map(|s| (s - target).abs())
            .fold(0.0, f64::max)
    }

    /// Mass matrix with the roles of `u` and `v` exchanged.
    pub fn transpose(&self) -> Self {
        Self {
            masses: self.masses.t().to_owned(),
            meta: self.meta,
        }
    }

    /// Image under `u -> 1 − u` (reverses row order); negates Kendall's tau.
    pub fn reverse_rows(&self) -> Self {
        let n = self.n();
        Self {
            masses: Array2::from_shape_fn((n, n), |(i, j)| self.masses[[n - 1 - i, j]]),
            meta: DensityMeta {
                tau: self.meta.tau.map(|t| -t),
                theta: self.meta.theta.map(|t| -t),
            },
        }
    }

    /// Cumulative node values `G[i][j] = Σ_{k<i, l<j} Δ_kl`, i.e. the copula
    /// cdf at `(i/n, j/n)`.
    pub fn node_cdf(&self) -> GridFunction {
        let n = self.n();
        let mut g = Array2::zeros((n + 1, n + 1));
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.masses[[i, j]];
                g[[i + 1, j + 1]] = g[[i, j + 1]] + row;
            }
        }
        GridFunction { values: g }
    }

    /// Prepares repeated evaluation of the piecewise-bilinear cdf.
    pub fn cdf(&self) -> CheckerboardCdf {
        CheckerboardCdf {
            nodes: self.node_cdf(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// `n` rows of `n` comma-separated masses, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for row in self.masses.rows() {
            w.write_record(row.iter().map(|m| m.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut values = Vec::new();
        let mut n = None;
        for record in rdr.records() {
            let record = record?;
            match n {
                None => n = Some(record.len()),
                Some(k) if k != record.len() => {
                    return Err(Error::InvalidDensity("ragged CSV rows".into()))
                }
                _ => {}
            }
            for field in record.iter() {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("{field:?}: {e}")))?,
                );
            }
        }
        let n = n.unwrap_or(0);
        if values.len() != n * n {
            return Err(Error::InvalidDensity(format!(
                "CSV has {} values, expected a square {n}x{n} grid",
                values.len()
            )));
        }
        let masses = Array2::from_shape_vec((n, n), values)
            .map_err(|e| Error::InvalidDensity(e.to_string()))?;
        Self::new(masses)
    }

    /// Writes JSON or CSV depending on the file extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        match extension(path).as_deref() {
            Some("json") => std::fs::write(path, self.to_json()?)?,
            Some("csv") => self.write_csv(std::fs::File::create(path)?)?,
            _ => {
                return Err(Error::Parse(format!(
                    "unsupported density file extension: {}",
                    path.display()
                )))
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        match extension(path).as_deref() {
            Some("json") => Self::from_json(&std::fs::read_to_string(path)?),
            Some("csv") => Self::read_csv(std::fs::File::open(path)?),
            _ => Err(Error::Parse(format!(
                "unsupported density file extension: {}",
                path.display()
            ))),
        }
    }
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
}

/// Values of a bivariate function at the nodes `(i/n, j/n)`, `i, j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Array2<f64>,
}

impl GridFunction {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r != c || r < 2 {
            return Err(Error::Parse(format!(
                "grid function needs (n+1)x(n+1) nodes with n >= 1, got {r}x{c}"
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("grid function values must be finite".into()));
        }
        Ok(Self { values })
    }

    pub fn sample<F: Fn(f64, f64) -> f64>(n: usize, f: F) -> Result<Self> {
        let nf = n as f64;
        Self::new(Array2::from_shape_fn((n + 1, n + 1), |(i, j)| {
            f(i as f64 / nf, j as f64 / nf)
        }))
    }

    /// Number of cells per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.values.nrows() - 1
    }

    #[inline]
    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Supremum over nodes with `0 < i, j < n`.
    pub fn sup_abs_interior(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for i in 1..n {
            for j in 1..n {
                m = m.max(self.values[[i, j]].abs());
            }
        }
        m
    }

    /// CSV with header `u,v,value`, one row per node (interior nodes only when
    /// `interior` is set).
    pub fn write_csv<W: Write>(&self, writer: W, interior: bool) -> Result<()> {
        let n = self.n();
        let nf = n as f64;
        let range = if interior { 1..n } else { 0..n + 1 };
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["u", "v", "value"])?;
        for i in range.clone() {
            for j in range.clone() {
                w.write_record(&[
                    (i as f64 / nf).to_string(),
                    (j as f64 / nf).to_string(),
                    self.values[[i, j]].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Piecewise-bilinear cdf `𝔠_n` of a checkerboard density: exact at the grid
/// nodes and bilinear inside each cell.
#[derive(Debug, Clone)]
pub struct CheckerboardCdf {
    nodes: GridFunction,
}

impl CheckerboardCdf {
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        if !((0.0..=1.0).contains(&u) && (0.0..=1.0).contains(&v)) {
            return f64::NAN;
        }
        let g = self.nodes.values();
        let n = self.nodes.n();
        let nf = n as f64;
        let (i, fu) = cell_coordinate(u * nf, n);
        let (j, fv) = cell_coordinate(v * nf, n);
        let g00 = g[[i, j]];
        let g10 = g[[i + 1, j]];
        let g01 = g[[i, j + 1]];
        let g11 = g[[i + 1, j + 1]];
        g00 * (1.0 - fu) * (1.0 - fv)
            + g10 * fu * (1.0 - fv)
            + g01 * (1.0 - fu) * fv
            + g11 * fu * fv
    }
}

#[inline]
fn cell_coordinate(x: f64, n: usize) -> (usize, f64) {
    let i = (x.floor() as usize).min(n - 1);
    (i, x - i as f64)
}

/// `𝔠_n(u, v)` for a single point. Use [`CheckerboardDensity::cdf`] for many.
pub fn checkerboard_cdf_eval(c: &CheckerboardDensity, u: f64, v: f64) -> f64 {
    c.cdf().eval(u, v)
}

/// Sup-norm difference of cell masses.
pub fn sup_mass_difference(a: &CheckerboardDensity, b: &CheckerboardDensity) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::GridMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    Ok(a.masses()
        .iter()
        .zip(b.masses().iter())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
}
