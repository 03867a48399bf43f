//! Graph-Laplacian PCA, a vertex-domain baseline with a closed-form solution.
//!
//! Minimizes `‖Xᵀ - U Qᵀ‖_F² + α tr(Qᵀ L Q)` over `QᵀQ = I`. The optimum is
//! `Q` = eigenvectors of `-X Xᵀ + α L` for its `q` smallest eigenvalues,
//! and `U = Xᵀ Q`. Inputs are expected to be centered per dimension.

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::graph::ShiftOperator;
use crate::linalg::{symmetric_eigen, Order};

#[derive(Debug, Clone)]
pub struct GlpcaModel {
    /// n×q, orthonormal columns.
    pub embedding: DMatrix<f64>,
    /// p×q, `Xᵀ Q`.
    pub loadings: DMatrix<f64>,
    pub alpha: f64,
    pub objective: f64,
    /// `tr(Qᵀ L Q)`.
    pub smoothness: f64,
}

pub fn glpca_fit(
    x: &DMatrix<f64>,
    so: &ShiftOperator,
    alpha: f64,
    q: usize,
) -> Result<GlpcaModel> {
    let n = so.n();
    check_len("signal rows", n, x.nrows())?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::validation(format!(
            "alpha must be finite and nonnegative, got {alpha}"
        )));
    }
    if q == 0 || q > n {
        return Err(Error::validation(format!("q = {q} must lie in 1..={n}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation("signal has non-finite entries"));
    }
    let l = so.matrix();
    let m = -(x * x.transpose()) + l.scale(alpha);
    let (_, vecs) = symmetric_eigen(&m, Order::Ascending);
    let embedding = vecs.columns(0, q).into_owned();
    let loadings = x.transpose() * &embedding;
    let (objective, smoothness) = glpca_objective(x, l, alpha, &embedding);
    Ok(GlpcaModel {
        embedding,
        loadings,
        alpha,
        objective,
        smoothness,
    })
}

/// Objective at a feasible `Q` with the optimal loadings `U = Xᵀ Q`;
/// returns `(objective, tr(Qᵀ L Q))`.
pub fn glpca_objective(
    x: &DMatrix<f64>,
    laplacian: &DMatrix<f64>,
    alpha: f64,
    embedding: &DMatrix<f64>,
) -> (f64, f64) {
    let u = x.transpose() * embedding;
    let resid = x.transpose() - &u * embedding.transpose();
    let smooth = (embedding.transpose() * laplacian * embedding).trace();
    (resid.norm_squared() + alpha * smooth, smooth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, builtin_karate};

    #[test]
    fn zero_signal_picks_smoothest_eigenvectors() {
        let so = build_laplacian(&builtin_karate()).unwrap();
        let x = DMatrix::zeros(34, 3);
        let m = glpca_fit(&x, &so, 2.0, 3).unwrap();
        let expected: f64 = 2.0 * so.eigenvalues()[..3].iter().sum::<f64>();
        assert!((m.objective - expected).abs() < 1e-10);
        let gram = m.embedding.transpose() * &m.embedding;
        assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-10);
    }

    #[test]
    fn rejects_bad_arguments() {
        let so = build_laplacian(&builtin_karate()).unwrap();
        let x = DMatrix::zeros(34, 2);
        assert!(glpca_fit(&x, &so, -1.0, 1).is_err());
        assert!(glpca_fit(&x, &so, 1.0, 0).is_err());
        assert!(glpca_fit(&x, &so, 1.0, 35).is_err());
        assert!(glpca_fit(&DMatrix::zeros(3, 2), &so, 1.0, 1).is_err());
    }
}
