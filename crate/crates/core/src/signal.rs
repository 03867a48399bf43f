use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::linalg::{CMatrix, C64};

/// An n×p graph signal: column `i` is dimension `X_i` over the n vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateGraphSignal {
    values: CMatrix,
    labels: Vec<String>,
}

impl MultivariateGraphSignal {
    pub fn new(values: CMatrix, labels: Vec<String>) -> Result<Self> {
        check_len("dimension labels", values.ncols(), labels.len())?;
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::validation(format!("duplicate dimension label '{l}'")));
            }
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("signal has non-finite entries"));
        }
        Ok(MultivariateGraphSignal { values, labels })
    }

    /// Labels default to `X1..Xp`.
    pub fn unlabeled(values: CMatrix) -> Result<Self> {
        let labels = default_labels(values.ncols());
        Self::new(values, labels)
    }

    pub fn from_real(values: &DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        Self::new(values.map(|x| C64::new(x, 0.0)), labels)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &CMatrix {
        &self.values
    }

    pub fn into_values(self) -> CMatrix {
        self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Real parts as an n×p matrix.
    pub fn real_part(&self) -> DMatrix<f64> {
        self.values.map(|z| z.re)
    }

    /// Per-dimension vertex mean broadcast to an n×p matrix.
    pub fn vertex_means(&self) -> CMatrix {
        let n = self.n();
        let mut means = CMatrix::zeros(n, self.p());
        if n == 0 {
            return means;
        }
        for (j, col) in self.values.column_iter().enumerate() {
            let m = col.sum() / C64::new(n as f64, 0.0);
            means.column_mut(j).fill(m);
        }
        means
    }

    /// The signal with each dimension's vertex mean removed, and those means.
    pub fn centered(&self) -> (Self, CMatrix) {
        let means = self.vertex_means();
        let centered = MultivariateGraphSignal {
            values: &self.values - &means,
            labels: self.labels.clone(),
        };
        (centered, means)
    }

    /// Elementwise `x ↦ ln(1 + x)` on real signals.
    pub fn log1p(&self) -> Result<Self> {
        if self.values.iter().any(|z| z.im != 0.0 || z.re <= -1.0) {
            return Err(Error::validation(
                "log1p needs real entries greater than -1",
            ));
        }
        Ok(MultivariateGraphSignal {
            values: self.values.map(|z| C64::new(z.re.ln_1p(), 0.0)),
            labels: self.labels.clone(),
        })
    }
}

pub(crate) fn default_labels(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}
