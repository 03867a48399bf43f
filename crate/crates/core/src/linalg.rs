//! Dense eigen-solvers with the deterministic ordering and phase conventions
//! used throughout the crate.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance under which two moduli or two eigenvalues count as tied.
const TIE_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Ascending,
    Descending,
}

/// Index of the entry of largest modulus; near-ties go to the lowest index.
pub fn argmax_modulus<'a>(entries: impl IntoIterator<Item = &'a C64>) -> usize {
    let moduli: Vec<f64> = entries.into_iter().map(|z| z.norm()).collect();
    let max = moduli.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = max * (1.0 - TIE_RTOL);
    moduli.iter().position(|&m| m >= cutoff).unwrap_or(0)
}

/// Rotate `col` so its largest-modulus entry is real and positive.
pub fn phase_normalize(col: &mut [C64]) {
    let k = argmax_modulus(col.iter());
    let pivot = col[k];
    let r = pivot.norm();
    if r == 0.0 {
        return;
    }
    let rot = pivot.conj() / r;
    for z in col.iter_mut() {
        *z *= rot;
    }
    col[k] = C64::new(col[k].re, 0.0);
}

/// Largest |a_ij - conj(a_ji)|.
pub fn hermitian_deviation(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// (A + Aᴴ) / 2
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted in `order`; eigenvalues equal to within a relative
/// tolerance are ordered by the position of their eigenvector's largest-modulus
/// entry, ascending. Each eigenvector is phase-normalized.
pub fn hermitian_eigen(a: &CMatrix, order: Order) -> (Vec<f64>, CMatrix) {
    let n = a.nrows();
    let eig = SymmetricEigen::new(hermitian_part(a));
    let mut cols: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = eig.eigenvectors.column(k).iter().cloned().collect();
            phase_normalize(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    sort_pairs(&mut cols, order);

    let values = cols.iter().map(|(l, _)| *l).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| cols[j].1[i]);
    (values, vectors)
}

/// Eigendecomposition of a real symmetric matrix with the same conventions as
/// [`hermitian_eigen`]; eigenvectors are real with a positive dominant entry.
pub fn symmetric_eigen(a: &DMatrix<f64>, order: Order) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let sym = (a + a.transpose()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut cols: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = eig
                .eigenvectors
                .column(k)
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect();
            phase_normalize(&mut v);
            (eig.eigenvalues[k], v)
        })
        .collect();
    sort_pairs(&mut cols, order);

    let values = cols.iter().map(|(l, _)| *l).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| cols[j].1[i].re);
    (values, vectors)
}

fn sort_pairs(cols: &mut [(f64, Vec<C64>)], order: Order) {
    let key = |x: f64| match order {
        Order::Ascending => x,
        Order::Descending => -x,
    };
    cols.sort_by(|a, b| key(a.0).total_cmp(&key(b.0)));

    let scale = cols.iter().map(|(l, _)| l.abs()).fold(1.0, f64::max);
    let tol = TIE_RTOL * scale;
    let mut start = 0;
    while start < cols.len() {
        let mut end = start + 1;
        while end < cols.len() && (cols[end].0 - cols[start].0).abs() <= tol {
            end += 1;
        }
        if end - start > 1 {
            // values inside a tie group stay monotone; only vectors move
            let vals: Vec<f64> = cols[start..end].iter().map(|c| c.0).collect();
            cols[start..end].sort_by_key(|(_, v)| argmax_modulus(v.iter()));
            for (c, v) in cols[start..end].iter_mut().zip(vals) {
                c.0 = v;
            }
        }
        start = end;
    }
}
