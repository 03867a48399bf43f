//! Graph power and cross-spectral densities.
//!
//! Three estimators produce a [`SpectralMatrixField`], the per-frequency p×p
//! spectral matrices `P(λ_ℓ)`:
//!
//! * exact, from known cross-covariances: `p_ij = diag(Vᴴ Σ_ij V)`;
//! * the graph cross-periodogram of a single realization,
//!   `(Vᴴ x_i) ⊙ conj(Vᴴ x_j)`;
//! * the windowed average cross-periodogram over an ensemble of random
//!   vertex-domain windows.
//!
//! Windows have i.i.d. Gaussian entries with mean 1 and variance ν, so
//! `E[w_u w_v] = 1 + ν δ_uv` and the ensemble mean of the windowed estimator
//! is the plain cross-periodogram plus `ν diag(Vᴴ diag(x_i ⊙ conj(x_j)) V)`.
//! That excess acts as spectral smoothing and is what lowers the variance of
//! the estimate, so bias correction is opt-in. Corrected estimates can be
//! indefinite; [`SpectralMatrixField::psd_projected`] clips them back.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::graph::ShiftOperator;
use crate::linalg::{
    hermitian_deviation, hermitian_eigen, hermitian_part, CMatrix, CVector, Order, C64,
};
use crate::signal::MultivariateGraphSignal;

pub const DEFAULT_WINDOW_COUNT: usize = 50;
pub const DEFAULT_WINDOW_VARIANCE: f64 = 0.2;

/// A graph (cross-)spectral density over the n graph frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDensity {
    values: CVector,
    pair: Option<(usize, usize)>,
}

impl SpectralDensity {
    pub fn new(values: CVector) -> Self {
        SpectralDensity { values, pair: None }
    }

    pub fn with_pair(mut self, i: usize, j: usize) -> Self {
        self.pair = Some((i, j));
        self
    }

    pub fn values(&self) -> &CVector {
        &self.values
    }

    pub fn pair(&self) -> Option<(usize, usize)> {
        self.pair
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Real parts, the natural view of an auto-density.
    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }

    /// The density of the swapped pair, `conj(p_ij)`.
    pub fn conjugate_pair(&self) -> Self {
        SpectralDensity {
            values: self.values.map(|z| z.conj()),
            pair: self.pair.map(|(i, j)| (j, i)),
        }
    }
}

/// Per-frequency p×p Hermitian spectral matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrixField {
    matrices: Vec<CMatrix>,
    labels: Vec<String>,
}

impl SpectralMatrixField {
    pub fn new(matrices: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        let p = labels.len();
        for m in &matrices {
            check_len("spectral matrix rows", p, m.nrows())?;
            check_len("spectral matrix columns", p, m.ncols())?;
        }
        Ok(SpectralMatrixField { matrices, labels })
    }

    /// Number of graph frequencies.
    pub fn n(&self) -> usize {
        self.matrices.len()
    }

    /// Signal dimension.
    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, index: usize) -> &CMatrix {
        &self.matrices[index]
    }

    /// The (i, j) density across all frequencies.
    pub fn density(&self, i: usize, j: usize) -> SpectralDensity {
        let values = CVector::from_iterator(self.n(), self.matrices.iter().map(|m| m[(i, j)]));
        SpectralDensity::new(values).with_pair(i, j)
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        self.matrices
            .iter()
            .map(hermitian_deviation)
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of every spectral matrix.
    pub fn min_eigenvalues(&self) -> Vec<f64> {
        self.matrices
            .iter()
            .map(|m| {
                let (vals, _) = hermitian_eigen(m, Order::Ascending);
                vals.first().copied().unwrap_or(0.0)
            })
            .collect()
    }

    /// Clip negative eigenvalues to zero at every frequency where any occur.
    pub fn psd_projected(&self) -> Self {
        let matrices = self
            .matrices
            .iter()
            .map(|m| {
                let (vals, u) = hermitian_eigen(m, Order::Descending);
                if vals.iter().all(|&v| v >= 0.0) {
                    return m.clone();
                }
                let clipped = CVector::from_iterator(
                    vals.len(),
                    vals.iter().map(|&v| C64::new(v.max(0.0), 0.0)),
                );
                hermitian_part(&(&u * CMatrix::from_diagonal(&clipped) * u.adjoint()))
            })
            .collect();
        SpectralMatrixField {
            matrices,
            labels: self.labels.clone(),
        }
    }
}

/// Random windows with i.i.d. N(1, ν) entries, reproducible from
/// `(count, variance, seed, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowEnsemble {
    count: usize,
    variance: f64,
    seed: u64,
    windows: Vec<DVector<f64>>,
}

impl WindowEnsemble {
    pub fn new(count: usize, variance: f64, seed: u64, n: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::validation("window ensemble needs at least one window"));
        }
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::validation(format!(
                "window variance must be finite and nonnegative, got {variance}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sd = variance.sqrt();
        let windows = (0..count)
            .map(|_| {
                DVector::from_fn(n, |_, _| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    1.0 + sd * z
                })
            })
            .collect();
        Ok(WindowEnsemble {
            count,
            variance,
            seed,
            windows,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.windows.first().map_or(0, |w| w.len())
    }

    pub fn windows(&self) -> &[DVector<f64>] {
        &self.windows
    }
}

/// Exact cross-spectral density `diag(Vᴴ Σ V)` of a known cross-covariance.
pub fn exact_cross_spectrum(cov: &CMatrix, so: &ShiftOperator) -> Result<SpectralDensity> {
    let n = so.n();
    check_len("covariance rows", n, cov.nrows())?;
    check_len("covariance columns", n, cov.ncols())?;
    let v = so.eigenvectors();
    let sv = cov * v;
    let values = CVector::from_fn(n, |l, _| v.column(l).dotc(&sv.column(l)));
    Ok(SpectralDensity::new(values))
}

/// Graph cross-periodogram `(Vᴴ x_i) ⊙ conj(Vᴴ x_j)`. Inputs should be centered.
pub fn cross_periodogram(
    xi: &CVector,
    xj: &CVector,
    so: &ShiftOperator,
) -> Result<SpectralDensity> {
    let zi = so.gft(xi)?;
    let zj = so.gft(xj)?;
    Ok(SpectralDensity::new(zi.zip_map(&zj, |a, b| a * b.conj())))
}

/// Windowed average graph cross-periodogram.
pub fn windowed_cross_periodogram(
    xi: &CVector,
    xj: &CVector,
    so: &ShiftOperator,
    ensemble: &WindowEnsemble,
    correct_bias: bool,
) -> Result<SpectralDensity> {
    let n = so.n();
    check_len("signal length", n, xi.len())?;
    check_len("signal length", n, xj.len())?;
    check_len("window length", n, ensemble.n())?;

    let one_way = |a: &CVector, b: &CVector| -> Result<CVector> {
        let mut acc = CVector::zeros(n);
        for w in ensemble.windows() {
            let za = so.gft(&a.zip_map(w, |z, s| z * s))?;
            let zb = so.gft(&b.zip_map(w, |z, s| z * s))?;
            acc += za.zip_map(&zb, |x, y| x * y.conj());
        }
        acc /= C64::new(ensemble.count() as f64, 0.0);
        if correct_bias {
            acc -= bias_excess(a, b, so).scale(ensemble.variance());
        }
        Ok(acc)
    };
    let forward = one_way(xi, xj)?;
    let backward = one_way(xj, xi)?;
    let values = forward.zip_map(&backward, |f, b| (f + b.conj()) * 0.5);
    Ok(SpectralDensity::new(values))
}

/// `diag(Vᴴ diag(a ⊙ conj(b)) V)`, the per-unit-variance window excess.
fn bias_excess(a: &CVector, b: &CVector, so: &ShiftOperator) -> CVector {
    let v = so.eigenvectors();
    let prod = a.zip_map(b, |x, y| x * y.conj());
    CVector::from_fn(so.n(), |l, _| {
        v.column(l)
            .iter()
            .zip(prod.iter())
            .map(|(vu, pu)| pu * vu.norm_sqr())
            .sum()
    })
}

/// Coherence `|p_xy|² / (p_xx p_yy)`; entries whose denominator falls below
/// `floor` are `None`. The default floor is `1e-12 · max(p_xx p_yy)`.
pub fn coherence(
    pxy: &SpectralDensity,
    pxx: &SpectralDensity,
    pyy: &SpectralDensity,
    floor: Option<f64>,
) -> Result<Vec<Option<f64>>> {
    let n = pxy.len();
    check_len("auto-density length", n, pxx.len())?;
    check_len("auto-density length", n, pyy.len())?;
    let denom: Vec<f64> = pxx
        .values()
        .iter()
        .zip(pyy.values().iter())
        .map(|(a, b)| a.re * b.re)
        .collect();
    let floor =
        floor.unwrap_or_else(|| 1e-12 * denom.iter().cloned().fold(0.0, f64::max));
    Ok(pxy
        .values()
        .iter()
        .zip(denom)
        .map(|(c, d)| {
            if d > floor && d > 0.0 {
                Some(c.norm_sqr() / d)
            } else {
                None
            }
        })
        .collect())
}

/// Full p×p grid of n×n cross-covariances `Σ_ij = Cov(X_i, X_j)`.
#[derive(Debug, Clone)]
pub struct CovarianceGrid {
    p: usize,
    blocks: Vec<CMatrix>,
}

impl CovarianceGrid {
    /// `blocks` in row-major order: `blocks[i * p + j] = Σ_ij`.
    pub fn new(p: usize, blocks: Vec<CMatrix>) -> Result<Self> {
        check_len("covariance blocks", p * p, blocks.len())?;
        Ok(CovarianceGrid { p, blocks })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn block(&self, i: usize, j: usize) -> &CMatrix {
        &self.blocks[i * self.p + j]
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Estimator<'a> {
    Exact(&'a CovarianceGrid),
    Periodogram,
    Windowed {
        ensemble: &'a WindowEnsemble,
        correct_bias: bool,
    },
}

/// Compute every pairwise density and arrange them as per-frequency spectral
/// matrices. Pairs `i ≤ j` are estimated and `p_ji` is taken as `conj(p_ij)`.
pub fn assemble_spectral_matrices(
    signal: &MultivariateGraphSignal,
    so: &ShiftOperator,
    estimator: Estimator<'_>,
    psd_project: bool,
) -> Result<SpectralMatrixField> {
    let n = so.n();
    let p = signal.p();
    check_len("signal rows", n, signal.n())?;
    let labels = signal.labels().to_vec();

    let mut matrices = match estimator {
        Estimator::Exact(grid) => {
            check_len("covariance grid dimension", p, grid.p())?;
            let mut mats = vec![CMatrix::zeros(p, p); n];
            for i in 0..p {
                for j in i..p {
                    let d = exact_cross_spectrum(grid.block(i, j), so)?;
                    for (l, m) in mats.iter_mut().enumerate() {
                        m[(i, j)] = d.values()[l];
                        m[(j, i)] = d.values()[l].conj();
                    }
                }
            }
            mats
        }
        Estimator::Periodogram => {
            let z = so.gft_columns(signal.values())?;
            (0..n)
                .map(|l| {
                    let row = z.row(l).transpose();
                    &row * row.adjoint()
                })
                .collect()
        }
        Estimator::Windowed {
            ensemble,
            correct_bias,
        } => {
            check_len("window length", n, ensemble.n())?;
            let x = signal.values();
            let mut mats = vec![CMatrix::zeros(p, p); n];
            for w in ensemble.windows() {
                let mut wx = x.clone();
                for (mut row, s) in wx.row_iter_mut().zip(w.iter()) {
                    row *= C64::new(*s, 0.0);
                }
                let z = so.gft_columns(&wx)?;
                for (l, m) in mats.iter_mut().enumerate() {
                    let row = z.row(l).transpose();
                    *m += &row * row.adjoint();
                }
            }
            let inv = C64::new(1.0 / ensemble.count() as f64, 0.0);
            for m in mats.iter_mut() {
                *m *= inv;
            }
            if correct_bias {
                let nu = C64::new(ensemble.variance(), 0.0);
                let v = so.eigenvectors();
                for (l, m) in mats.iter_mut().enumerate() {
                    let mut excess = CMatrix::zeros(p, p);
                    for u in 0..n {
                        let a = v[(u, l)].norm_sqr();
                        if a == 0.0 {
                            continue;
                        }
                        let xu = x.row(u).transpose();
                        excess += (&xu * xu.adjoint()).scale(a);
                    }
                    *m -= excess * nu;
                }
            }
            mats
        }
    };

    for m in matrices.iter_mut() {
        *m = hermitian_part(m);
    }
    let field = SpectralMatrixField::new(matrices, labels)?;
    Ok(if psd_project {
        field.psd_projected()
    } else {
        field
    })
}

/// `max |offdiag(Vᴴ Σ V)| / max |diag(Vᴴ Σ V)|`; zero exactly when Σ is
/// simultaneously diagonalizable with the shift operator.
pub fn stationarity_diagnostic(cov: &CMatrix, so: &ShiftOperator) -> Result<f64> {
    let n = so.n();
    check_len("covariance rows", n, cov.nrows())?;
    check_len("covariance columns", n, cov.ncols())?;
    let v = so.eigenvectors();
    let m = v.adjoint() * cov * v;
    let mut diag = 0.0_f64;
    let mut off = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let a = m[(i, j)].norm();
            if i == j {
                diag = diag.max(a);
            } else {
                off = off.max(a);
            }
        }
    }
    if off == 0.0 {
        return Ok(0.0);
    }
    if diag == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(off / diag)
}
