use crate::error::{Error, Result};
use crate::statmath::SymMatrix;

/// `n` observations in `p` dimensions, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    p: usize,
    values: Vec<f64>,
    names: Option<Vec<String>>,
}

impl DataMatrix {
    pub fn new(n: usize, p: usize, values: Vec<f64>) -> Result<Self> {
        if p == 0 {
            return Err(Error::Domain("data must have at least one column".into()));
        }
        if values.len() != n * p {
            return Err(Error::DimensionMismatch {
                expected: n * p,
                found: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite value at row {}, column {}",
                pos / p,
                pos % p
            )));
        }
        Ok(Self {
            n,
            p,
            values,
            names: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(rows.len() * p);
        for r in rows {
            if r.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), p, values)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.p)
    }

    /// Per-column `(min, max)`.
    pub fn column_ranges(&self) -> Vec<(f64, f64)> {
        let mut out = vec![(f64::INFINITY, f64::NEG_INFINITY); self.p];
        for row in self.rows() {
            for (r, &v) in out.iter_mut().zip(row) {
                r.0 = r.0.min(v);
                r.1 = r.1.max(v);
            }
        }
        out
    }

    /// Sample mean and maximum-likelihood (divide by `n`) covariance.
    pub fn mean_and_covariance(&self) -> (Vec<f64>, SymMatrix) {
        let idx: Vec<usize> = (0..self.n).collect();
        self.subset_mean_and_covariance(&idx)
    }

    /// Mean and MLE covariance of the rows in `idx`.
    pub fn subset_mean_and_covariance(&self, idx: &[usize]) -> (Vec<f64>, SymMatrix) {
        let p = self.p;
        let mut mean = vec![0.0; p];
        if idx.is_empty() {
            return (mean, SymMatrix::zeros(p));
        }
        for &i in idx {
            for (m, v) in mean.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let m = idx.len() as f64;
        mean.iter_mut().for_each(|v| *v /= m);
        let mut cov = vec![0.0; p * p];
        for &i in idx {
            let x = self.row(i);
            for a in 0..p {
                let da = x[a] - mean[a];
                for b in a..p {
                    cov[a * p + b] += da * (x[b] - mean[b]);
                }
            }
        }
        (mean, SymMatrix::from_fn(p, |a, b| cov[a * p + b] / m))
    }
}
