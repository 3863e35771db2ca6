//! Sample-quality metrics and action quantities.

mod action;
mod knn;

pub use action::{
    gaussian_w2, heat_curve_action, mog_action_bound, mog_action_bound_scaled, ActionMethod,
    ActionReport,
};
pub use knn::{knn_kl, KlEstimate, DISTANCE_FLOOR};

use std::path::Path;

use crate::error::{check_dim, Error, Result};
use crate::targets::dist2;

/// `n x d` matrix of sample positions, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    data: Vec<f64>,
    dim: usize,
    pub label: String,
}

impl SampleSet {
    pub fn new(points: &[Vec<f64>], label: impl Into<String>) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            check_dim(dim, p.len())?;
            data.extend_from_slice(p);
        }
        Self::from_flat(data, dim, label)
    }

    pub fn from_flat(data: Vec<f64>, dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::invalid("sample rows must have a common positive dimension"));
        }
        if data.len() / dim < 2 {
            return Err(Error::invalid("a sample set needs at least 2 points"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample entries must be finite"));
        }
        Ok(SampleSet {
            data,
            dim,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Reads every column named `dim<j>`, in order of `j`; other columns
    /// (e.g. `chain`) are ignored.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let mut cols: Vec<(usize, usize)> = headers
            .iter()
            .enumerate()
            .filter_map(|(i, h)| h.trim().strip_prefix("dim")?.parse::<usize>().ok().map(|j| (j, i)))
            .collect();
        cols.sort_unstable();
        if cols.is_empty() || cols.iter().enumerate().any(|(k, (j, _))| k != *j) {
            return Err(Error::Schema(format!(
                "{}: expected columns dim0..dim{{d-1}}",
                path.display()
            )));
        }
        let mut data = Vec::new();
        for row in reader.records() {
            let row = row?;
            for &(j, i) in &cols {
                let field = row.get(i).unwrap_or("");
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::Schema(format!("{}: bad value {field:?} in dim{j}", path.display()))
                })?;
                data.push(v);
            }
        }
        Self::from_flat(data, cols.len(), path.display().to_string())
    }

    /// Writes `chain,dim0,...,dim{d-1}`, one row per point.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["chain".to_string()];
        header.extend((0..self.dim).map(|j| format!("dim{j}")));
        w.write_record(&header)?;
        for (i, p) in self.points().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(p.iter().map(|v| format!("{v:?}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Number of `means` with at least one sample within `radius`.
pub fn mode_coverage(samples: &SampleSet, means: &[Vec<f64>], radius: f64) -> Result<usize> {
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    for m in means {
        check_dim(samples.dim(), m.len())?;
    }
    let r2 = radius * radius;
    Ok(means
        .iter()
        .filter(|m| samples.points().any(|p| dist2(p, m) <= r2))
        .count())
}
