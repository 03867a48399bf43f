use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::error::{check_len, Error, Result};
use crate::linalg::{symmetric_eigen, CMatrix, CVector, Order, C64};

use super::Graph;

/// Relative threshold (against the largest |eigenvalue|) below which an
/// eigenvalue is treated as zero.
pub const ZERO_EIGENVALUE_RTOL: f64 = 1e-8;

/// A real symmetric graph shift operator together with its eigendecomposition
/// `S = V Λ Vᴴ`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct ShiftOperator {
    matrix: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    basis: CMatrix,
    basis_adj: CMatrix,
    hash: String,
}

/// Combinatorial Laplacian `L = D - W` of an undirected graph.
pub fn build_laplacian(graph: &Graph) -> Result<ShiftOperator> {
    if graph.is_directed() {
        return Err(Error::Unsupported(
            "directed graphs have no symmetric Laplacian".into(),
        ));
    }
    let w = graph.adjacency();
    let n = graph.vertex_count();
    let mut l = -w.clone();
    for i in 0..n {
        l[(i, i)] = w.row(i).sum();
    }
    ShiftOperator::from_symmetric(l)
}

impl ShiftOperator {
    pub fn from_symmetric(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::validation("shift operator must be square"));
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("shift operator has non-finite entries"));
        }
        let n = matrix.nrows();
        let scale = matrix.amax().max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::Unsupported(
                        "only symmetric shift operators are supported".into(),
                    ));
                }
            }
        }
        let (eigenvalues, vectors) = symmetric_eigen(&matrix, Order::Ascending);
        let basis = vectors.map(|x| C64::new(x, 0.0));
        let basis_adj = basis.adjoint();
        let hash = content_hash(&matrix);
        Ok(ShiftOperator {
            matrix,
            eigenvalues,
            basis,
            basis_adj,
            hash,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Graph frequencies λ_1 ≤ … ≤ λ_n.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// V, one eigenvector per column.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.basis
    }

    /// Eigenvector `v_ℓ` for a 0-based frequency position.
    pub fn eigenvector(&self, index: usize) -> CVector {
        self.basis.column(index).into_owned()
    }

    /// SHA-256 over the operator's dimension and entries.
    pub fn content_hash(&self) -> &str {
        &self.hash
    }

    pub fn zero_eigenvalue_count(&self) -> usize {
        let max = self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        let tol = ZERO_EIGENVALUE_RTOL * max;
        self.eigenvalues.iter().filter(|l| l.abs() <= tol).count()
    }

    pub fn rank(&self) -> usize {
        self.n() - self.zero_eigenvalue_count()
    }

    /// Graph Fourier transform `Vᴴ x`.
    pub fn gft(&self, x: &CVector) -> Result<CVector> {
        check_len("signal length", self.n(), x.len())?;
        Ok(&self.basis_adj * x)
    }

    /// Inverse transform `V c`.
    pub fn igft(&self, coeffs: &CVector) -> Result<CVector> {
        check_len("coefficient length", self.n(), coeffs.len())?;
        Ok(&self.basis * coeffs)
    }

    /// Column-wise GFT of an n×p signal matrix.
    pub fn gft_columns(&self, x: &CMatrix) -> Result<CMatrix> {
        check_len("signal rows", self.n(), x.nrows())?;
        Ok(&self.basis_adj * x)
    }

    pub fn igft_columns(&self, coeffs: &CMatrix) -> Result<CMatrix> {
        check_len("coefficient rows", self.n(), coeffs.nrows())?;
        Ok(&self.basis * coeffs)
    }

    /// Filter `x` by the frequency response `h`: `V diag(h) Vᴴ x`.
    pub fn apply_filter(&self, response: &CVector, x: &CVector) -> Result<CVector> {
        check_len("frequency response length", self.n(), response.len())?;
        let coeffs = self.gft(x)?.component_mul(response);
        self.igft(&coeffs)
    }
}

fn content_hash(matrix: &DMatrix<f64>) -> String {
    let mut hasher = Sha256::new();
    hasher.update((matrix.nrows() as u64).to_le_bytes());
    for x in matrix.iter() {
        hasher.update(x.to_le_bytes());
    }
    hex::encode(hasher.finalize())
}
