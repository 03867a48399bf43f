//! Test-only oracles and generators, independent of the library's solvers.
#![allow(dead_code)]

use gfpca::graph::{build_laplacian, Edge, Graph, ShiftOperator};
use gfpca::{CMatrix, CVector, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigenvalues of a Hermitian matrix, descending, through the real
/// embedding [[B, -C], [C, B]] whose spectrum is A's with every value doubled.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Vec<f64> {
    let p = a.nrows();
    let m = DMatrix::from_fn(2 * p, 2 * p, |i, j| {
        let z = a[(i % p, j % p)];
        match (i < p, j < p) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let vals = jacobi_eigenvalues(&m);
    let mut out: Vec<f64> = vals.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect();
    out.reverse();
    out
}

pub fn complex_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

pub fn real_gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn complex_vector(rng: &mut ChaCha8Rng, n: usize) -> CVector {
    complex_gaussian(rng, n, 1).column(0).into_owned()
}

/// Random PSD p×p matrix of random rank in 1..=p.
pub fn random_psd(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    let r = rng.random_range(1..=p);
    let b = complex_gaussian(rng, p, r);
    &b * b.adjoint()
}

/// Connected random graph: a random spanning path plus Erdős–Rényi extras.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut edges: Vec<Edge> = order
        .windows(2)
        .map(|w| Edge::new(w[0], w[1], rng.random_range(0.1..2.0)))
        .collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(0.2) {
                edges.push(Edge::new(i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    edges.retain(|e| seen.insert((e.src.min(e.dst), e.src.max(e.dst))));
    Graph::undirected(n, edges).unwrap()
}

pub fn cycle(n: usize) -> ShiftOperator {
    let edges = (0..n).map(|i| Edge::new(i, (i + 1) % n, 1.0));
    build_laplacian(&Graph::undirected(n, edges).unwrap()).unwrap()
}

/// Random unitary p×p matrix (QR of a complex Gaussian).
pub fn random_unitary(rng: &mut ChaCha8Rng, p: usize) -> CMatrix {
    complex_gaussian(rng, p, p).qr().q()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
