//! Principal component analysis in the graph frequency domain.
//!
//! At every graph frequency λ_ℓ the spectral matrix is factored as
//! `P(λ_ℓ) = U(λ_ℓ) T(λ_ℓ) U(λ_ℓ)ᴴ` with `τ_1 ≥ … ≥ τ_p ≥ 0`. Keeping the
//! leading `q` eigenvectors gives the reduction filters `Ĥ(λ) = U_qᴴ`, the
//! reconstruction filters `Ĝ(λ) = U_q` and the projector `Â(λ) = U_q U_qᴴ`.
//! All filtering is done on GFT coefficients, one p-vector per frequency.
//!
//! Reconstruction is `X̂ = μ̂ + Â X` with offsets `μ̂ = μ - Â μ`, so the
//! residual `X - X̂ = (I - Â)(X - μ)` has mean zero and its expected energy is
//! `Σ_ℓ Σ_{i>q} τ_i(λ_ℓ)`.

use std::sync::Arc;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::graph::ShiftOperator;
use crate::linalg::{hermitian_deviation, hermitian_eigen, max_abs, CMatrix, CVector, Order, C64};
use crate::signal::MultivariateGraphSignal;
use crate::spectral::{SpectralDensity, SpectralMatrixField};

/// Absolute floor for the Hermitian and nonnegativity checks, scaled by
/// `max(1, max|P(λ)|)` at each frequency.
pub const FIT_TOLERANCE: f64 = 1e-9;
const UNITARY_TOLERANCE: f64 = 1e-10;

/// A fitted gFreqPCA model. Immutable; `q` is fixed per instance and changed
/// with [`GFreqPcaModel::with_rank`].
#[derive(Debug, Clone)]
pub struct GFreqPcaModel {
    so: Arc<ShiftOperator>,
    field: SpectralMatrixField,
    taus: Vec<Vec<f64>>,
    bases: Vec<CMatrix>,
    means: CMatrix,
    q: usize,
}

/// Fit per-frequency eigenstructure. The returned model keeps all `p`
/// components; pick a rank with [`select_q`] and [`GFreqPcaModel::with_rank`].
///
/// `means` is n×p, column `i` holding the mean signal of dimension `i`.
pub fn fit(
    field: &SpectralMatrixField,
    means: &CMatrix,
    so: Arc<ShiftOperator>,
) -> Result<GFreqPcaModel> {
    let n = so.n();
    let p = field.p();
    check_len("spectral field frequencies", n, field.n())?;
    check_len("mean rows", n, means.nrows())?;
    check_len("mean columns", p, means.ncols())?;
    if p == 0 {
        return Err(Error::validation("signal has no dimensions"));
    }
    if means.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::validation("means contain non-finite entries"));
    }

    let decompose = |(l, m): (usize, &CMatrix)| -> Result<(Vec<f64>, CMatrix)> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation(format!(
                "spectral matrix at frequency index {} has non-finite entries",
                l + 1
            )));
        }
        let tol = FIT_TOLERANCE * max_abs(m).max(1.0);
        let deviation = hermitian_deviation(m);
        if deviation > tol {
            return Err(Error::NotHermitian {
                index: l + 1,
                deviation,
            });
        }
        let (mut tau, u) = hermitian_eigen(m, Order::Descending);
        for t in tau.iter_mut() {
            if *t < -tol {
                return Err(Error::NegativeEigenvalue {
                    index: l + 1,
                    value: *t,
                });
            }
            *t = t.max(0.0);
        }
        Ok((tau, u))
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<_> = field
        .matrices()
        .par_iter()
        .enumerate()
        .map(decompose)
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<_> = field
        .matrices()
        .iter()
        .enumerate()
        .map(decompose)
        .collect::<Result<_>>()?;

    let (taus, bases) = parts.into_iter().unzip();
    Ok(GFreqPcaModel {
        so,
        field: field.clone(),
        taus,
        bases,
        means: means.clone(),
        q: p,
    })
}

impl GFreqPcaModel {
    /// Rebuild a model from stored eigenvalues and unitary bases; the spectral
    /// field is recomputed as `U T Uᴴ`.
    pub fn from_eigenstructure(
        so: Arc<ShiftOperator>,
        labels: Vec<String>,
        taus: Vec<Vec<f64>>,
        bases: Vec<CMatrix>,
        means: CMatrix,
        q: usize,
    ) -> Result<Self> {
        let n = so.n();
        let p = labels.len();
        check_len("eigenvalue rows", n, taus.len())?;
        check_len("eigenvector bases", n, bases.len())?;
        check_len("mean rows", n, means.nrows())?;
        check_len("mean columns", p, means.ncols())?;
        let mut matrices = Vec::with_capacity(n);
        for (l, (tau, u)) in taus.iter().zip(&bases).enumerate() {
            check_len("eigenvalues per frequency", p, tau.len())?;
            check_len("basis rows", p, u.nrows())?;
            check_len("basis columns", p, u.ncols())?;
            if tau.iter().any(|t| !t.is_finite() || *t < 0.0)
                || tau.windows(2).any(|w| w[0] < w[1])
            {
                return Err(Error::validation(format!(
                    "eigenvalues at frequency index {} must be nonnegative and descending",
                    l + 1
                )));
            }
            let gram = u.adjoint() * u - CMatrix::identity(p, p);
            if max_abs(&gram) > UNITARY_TOLERANCE {
                return Err(Error::validation(format!(
                    "basis at frequency index {} is not unitary",
                    l + 1
                )));
            }
            let t = CMatrix::from_diagonal(&real_diag(tau));
            matrices.push(u * t * u.adjoint());
        }
        let field = SpectralMatrixField::new(matrices, labels)?;
        GFreqPcaModel {
            so,
            field,
            taus,
            bases,
            means,
            q: p,
        }
        .with_rank(q)
    }

    /// A copy of the model using the leading `q` components.
    pub fn with_rank(&self, q: usize) -> Result<Self> {
        self.check_rank(q)?;
        Ok(GFreqPcaModel { q, ..self.clone() })
    }

    fn check_rank(&self, q: usize) -> Result<()> {
        if q == 0 || q > self.p() {
            return Err(Error::validation(format!(
                "rank q = {q} must lie in 1..={}",
                self.p()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.so.n()
    }

    pub fn p(&self) -> usize {
        self.field.p()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn labels(&self) -> &[String] {
        self.field.labels()
    }

    pub fn shift_operator(&self) -> &Arc<ShiftOperator> {
        &self.so
    }

    pub fn field(&self) -> &SpectralMatrixField {
        &self.field
    }

    /// τ_1(λ_ℓ) ≥ … ≥ τ_p(λ_ℓ) for a 0-based frequency position.
    pub fn eigenvalues(&self, index: usize) -> &[f64] {
        &self.taus[index]
    }

    /// U(λ_ℓ) for a 0-based frequency position.
    pub fn basis(&self, index: usize) -> &CMatrix {
        &self.bases[index]
    }

    pub fn means(&self) -> &CMatrix {
        &self.means
    }

    /// Ĥ(λ_ℓ) = U_qᴴ, q×p, one per frequency.
    pub fn reduction_filters(&self) -> Vec<CMatrix> {
        self.bases
            .iter()
            .map(|u| u.columns(0, self.q).adjoint())
            .collect()
    }

    /// Ĝ(λ_ℓ) = U_q, p×q, one per frequency.
    pub fn reconstruction_filters(&self) -> Vec<CMatrix> {
        self.bases
            .iter()
            .map(|u| u.columns(0, self.q).into_owned())
            .collect()
    }

    /// Â(λ_ℓ) = U_q U_qᴴ, p×p, one per frequency: the composition of
    /// reduction and reconstruction.
    pub fn projectors(&self) -> Vec<CMatrix> {
        self.bases
            .iter()
            .map(|u| {
                let g = u.columns(0, self.q);
                g * g.adjoint()
            })
            .collect()
    }

    /// Offsets μ̂ = μ - Â μ, evaluated frequency by frequency.
    pub fn offsets(&self) -> CMatrix {
        let coeffs = self.so.eigenvectors().adjoint() * &self.means;
        let mut out = coeffs.clone();
        for (l, a) in self.projectors().iter().enumerate() {
            let m = coeffs.row(l).transpose();
            let r = &m - a * &m;
            out.row_mut(l).copy_from(&r.transpose());
        }
        self.so.eigenvectors() * out
    }

    /// Principal component graph signals `Y_i = Σ_k Ĥ_ik X_k`, n×q.
    pub fn transform(&self, x: &MultivariateGraphSignal) -> Result<MultivariateGraphSignal> {
        check_len("signal rows", self.n(), x.n())?;
        check_len("signal dimensions", self.p(), x.p())?;
        let coeffs = self.so.gft_columns(x.values())?;
        let mut y = CMatrix::zeros(self.n(), self.q);
        for (l, u) in self.bases.iter().enumerate() {
            let z = coeffs.row(l).transpose();
            let yl = u.columns(0, self.q).ad_mul(&z);
            y.row_mut(l).copy_from(&yl.transpose());
        }
        let values = self.so.igft_columns(&y)?;
        MultivariateGraphSignal::new(values, pc_labels(self.q))
    }

    /// Reconstruction `X̂_i = μ̂_i + Σ_j Ĝ_ij Y_j`, n×p.
    pub fn inverse_transform(
        &self,
        y: &MultivariateGraphSignal,
    ) -> Result<MultivariateGraphSignal> {
        check_len("component rows", self.n(), y.n())?;
        check_len("component count", self.q, y.p())?;
        let coeffs = self.so.gft_columns(y.values())?;
        let mut xh = CMatrix::zeros(self.n(), self.p());
        for (l, u) in self.bases.iter().enumerate() {
            let z = coeffs.row(l).transpose();
            let xl = u.columns(0, self.q) * z;
            xh.row_mut(l).copy_from(&xl.transpose());
        }
        let values = self.offsets() + self.so.igft_columns(&xh)?;
        MultivariateGraphSignal::new(values, self.labels().to_vec())
    }

    /// Minimum mean squared reconstruction error `Σ_ℓ Σ_{i>q} τ_i(λ_ℓ)`.
    pub fn theoretical_error(&self, q: usize) -> Result<f64> {
        self.check_rank(q)?;
        Ok(self.taus.iter().map(|t| t[q..].iter().sum::<f64>()).sum())
    }

    /// Share of the total reduction in reconstruction error attributable to
    /// each principal component.
    pub fn scree(&self) -> Result<Scree> {
        let p = self.p();
        let mut totals = vec![0.0; p];
        for tau in &self.taus {
            for (acc, t) in totals.iter_mut().zip(tau) {
                *acc += t;
            }
        }
        let sum: f64 = totals.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(Error::Degenerate(
                "spectral field has no power; scree is undefined".into(),
            ));
        }
        let fractions: Vec<f64> = totals.iter().map(|t| t / sum).collect();
        let cumulative = fractions
            .iter()
            .scan(0.0, |acc, f| {
                *acc += f;
                Some(*acc)
            })
            .collect();
        Ok(Scree {
            fractions,
            cumulative,
        })
    }

    /// Graph spectral envelope τ_1(λ_ℓ) for every frequency.
    pub fn spectral_envelope(&self) -> Vec<f64> {
        self.taus.iter().map(|t| t[0]).collect()
    }

    /// Optimal graph frequency scaling u_1(λ_ℓ) at a 1-based frequency index.
    pub fn optimal_scaling(&self, freq_index: usize) -> Result<CVector> {
        if freq_index == 0 || freq_index > self.n() {
            return Err(Error::validation(format!(
                "frequency index {freq_index} outside 1..={}",
                self.n()
            )));
        }
        Ok(self.bases[freq_index - 1].column(0).into_owned())
    }

    /// Spectral matrices of the principal components, `Ĥ P Ĥᴴ`, q×q.
    pub fn pc_spectral_matrices(&self) -> Vec<CMatrix> {
        self.reduction_filters()
            .iter()
            .zip(self.field.matrices())
            .map(|(h, p)| h * p * h.adjoint())
            .collect()
    }

    /// GPSD of each principal component signal.
    pub fn pc_spectra(&self) -> Vec<SpectralDensity> {
        let mats = self.pc_spectral_matrices();
        (0..self.q)
            .map(|i| {
                let values =
                    CVector::from_iterator(self.n(), mats.iter().map(|m| C64::new(m[(i, i)].re, 0.0)));
                SpectralDensity::new(values).with_pair(i, i)
            })
            .collect()
    }

    /// Spectral matrices of the residual `X - X̂` at rank `q`:
    /// `Σ_{i>q} τ_i u_i u_iᴴ`.
    pub fn error_spectrum(&self, q: usize) -> Result<SpectralMatrixField> {
        self.check_rank(q)?;
        let p = self.p();
        let matrices = self
            .taus
            .iter()
            .zip(&self.bases)
            .map(|(tau, u)| {
                let mut m = CMatrix::zeros(p, p);
                for (i, t) in tau.iter().enumerate().skip(q) {
                    let ui = u.column(i);
                    m += (ui * ui.adjoint()).scale(*t);
                }
                m
            })
            .collect();
        SpectralMatrixField::new(matrices, self.labels().to_vec())
    }

    /// Envelope, scree and error curve in one bundle, with optimal scalings at
    /// the requested 1-based frequency indices.
    pub fn report(&self, scaling_indices: &[usize]) -> Result<AnalysisReport> {
        let scree = self.scree()?;
        let theoretical_errors = (1..=self.p())
            .map(|q| self.theoretical_error(q))
            .collect::<Result<_>>()?;
        let scalings = scaling_indices
            .iter()
            .map(|&k| Ok((k, self.optimal_scaling(k)?)))
            .collect::<Result<_>>()?;
        Ok(AnalysisReport {
            lambdas: self.so.eigenvalues().to_vec(),
            envelope: self.spectral_envelope(),
            scree,
            theoretical_errors,
            q: self.q,
            scalings,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scree {
    pub fractions: Vec<f64>,
    pub cumulative: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AnalysisReport {
    pub lambdas: Vec<f64>,
    pub envelope: Vec<f64>,
    pub scree: Scree,
    /// `theoretical_errors[q - 1]` is the error when keeping `q` components.
    pub theoretical_errors: Vec<f64>,
    pub q: usize,
    pub scalings: Vec<(usize, CVector)>,
}

impl AnalysisReport {
    /// 1-based frequency indices of the `k` largest envelope values,
    /// returned in ascending order.
    pub fn envelope_peaks(&self, k: usize) -> Vec<usize> {
        top_indices(&self.envelope, k)
    }
}

/// 1-based indices of the `k` largest values, ascending by index.
pub fn top_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut top: Vec<usize> = idx.into_iter().take(k).map(|i| i + 1).collect();
    top.sort_unstable();
    top
}

pub const DEFAULT_Q_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QPolicy {
    /// Smallest q whose cumulative scree reaches the threshold.
    CumulativeThreshold(f64),
    /// Largest discrete second difference of the scree fractions.
    Elbow,
    Fixed(usize),
}

impl Default for QPolicy {
    fn default() -> Self {
        QPolicy::CumulativeThreshold(DEFAULT_Q_THRESHOLD)
    }
}

pub fn select_q(model: &GFreqPcaModel, policy: QPolicy) -> Result<usize> {
    let p = model.p();
    match policy {
        QPolicy::Fixed(q) => {
            model.check_rank(q)?;
            Ok(q)
        }
        QPolicy::CumulativeThreshold(t) => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::validation(format!(
                    "threshold {t} must lie in (0, 1]"
                )));
            }
            let scree = model.scree()?;
            let q = scree
                .cumulative
                .iter()
                .position(|&c| c >= t - 1e-12)
                .map_or(p, |i| i + 1);
            Ok(q)
        }
        QPolicy::Elbow => {
            let f = model.scree()?.fractions;
            if p < 3 {
                return Ok(1);
            }
            let best = (1..p - 1)
                .map(|i| (i, f[i - 1] - 2.0 * f[i] + f[i + 1]))
                .fold((1, f64::NEG_INFINITY), |acc, (i, d)| {
                    if d > acc.1 {
                        (i, d)
                    } else {
                        acc
                    }
                });
            Ok(best.0 + 1)
        }
    }
}

pub(crate) fn pc_labels(q: usize) -> Vec<String> {
    (1..=q).map(|i| format!("PC{i}")).collect()
}

fn real_diag(values: &[f64]) -> CVector {
    CVector::from_iterator(values.len(), values.iter().map(|&v| C64::new(v, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, Edge, Graph};

    fn cycle(n: usize) -> Arc<ShiftOperator> {
        let edges = (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0));
        Arc::new(build_laplacian(&Graph::undirected(n, edges).unwrap()).unwrap())
    }

    fn constant_field(n: usize, m: CMatrix) -> SpectralMatrixField {
        let p = m.nrows();
        SpectralMatrixField::new(vec![m; n], crate::signal::default_labels(p)).unwrap()
    }

    #[test]
    fn identity_field() {
        let so = cycle(5);
        let field = constant_field(5, CMatrix::identity(3, 3));
        let model = fit(&field, &CMatrix::zeros(5, 3), so).unwrap();
        for l in 0..5 {
            assert!(model.eigenvalues(l).iter().all(|t| (t - 1.0).abs() < 1e-14));
            assert!(max_abs(&(model.basis(l) - CMatrix::identity(3, 3))) < 1e-14);
        }
        let s = model.scree().unwrap();
        assert!(s.fractions.iter().all(|f| (f - 1.0 / 3.0).abs() < 1e-14));
        let u1 = model.optimal_scaling(1).unwrap();
        assert!((u1[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_field_has_undefined_scree() {
        let so = cycle(4);
        let field = constant_field(4, CMatrix::zeros(2, 2));
        let model = fit(&field, &CMatrix::zeros(4, 2), so).unwrap();
        assert!(matches!(model.scree(), Err(Error::Degenerate(_))));
    }

    #[test]
    fn rejects_non_hermitian_and_negative() {
        let so = cycle(4);
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = C64::new(0.5, 0.0);
        let field = constant_field(4, m);
        assert!(matches!(
            fit(&field, &CMatrix::zeros(4, 2), so.clone()),
            Err(Error::NotHermitian { .. })
        ));
        let neg = constant_field(4, CMatrix::identity(2, 2).scale(-1.0));
        assert!(matches!(
            fit(&neg, &CMatrix::zeros(4, 2), so.clone()),
            Err(Error::NegativeEigenvalue { .. })
        ));
        let mut nan = CMatrix::identity(2, 2);
        nan[(1, 1)] = C64::new(f64::NAN, 0.0);
        assert!(fit(&constant_field(4, nan), &CMatrix::zeros(4, 2), so).is_err());
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clipped() {
        let so = cycle(3);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(-1e-12, 0.0);
        let model = fit(&constant_field(3, m), &CMatrix::zeros(3, 2), so).unwrap();
        assert_eq!(model.eigenvalues(0)[1], 0.0);
    }

    #[test]
    fn threshold_policy() {
        let so = cycle(4);
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = C64::new(0.886, 0.0);
        m[(1, 1)] = C64::new(0.071, 0.0);
        m[(2, 2)] = C64::new(0.043, 0.0);
        let model = fit(&constant_field(4, m), &CMatrix::zeros(4, 3), so).unwrap();
        assert_eq!(select_q(&model, QPolicy::CumulativeThreshold(0.95)).unwrap(), 2);
        assert_eq!(select_q(&model, QPolicy::CumulativeThreshold(0.5)).unwrap(), 1);
        assert_eq!(select_q(&model, QPolicy::CumulativeThreshold(1.0)).unwrap(), 3);
        assert_eq!(select_q(&model, QPolicy::Elbow).unwrap(), 2);
        assert_eq!(select_q(&model, QPolicy::Fixed(3)).unwrap(), 3);
        assert!(select_q(&model, QPolicy::Fixed(4)).is_err());
        assert!(select_q(&model, QPolicy::CumulativeThreshold(0.0)).is_err());
    }

    #[test]
    fn scaling_index_out_of_range() {
        let so = cycle(4);
        let model = fit(
            &constant_field(4, CMatrix::identity(2, 2)),
            &CMatrix::zeros(4, 2),
            so,
        )
        .unwrap();
        assert!(model.optimal_scaling(0).is_err());
        assert!(model.optimal_scaling(5).is_err());
        assert!(model.optimal_scaling(4).is_ok());
    }

    #[test]
    fn top_indices_are_one_based() {
        assert_eq!(top_indices(&[0.1, 5.0, 0.3, 4.0], 2), vec![2, 4]);
    }
}
