//! Dense complex linear algebra shared by the other modules.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use num_traits::Float;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// `(m + m^dagger) / 2`
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

pub fn matrix_power(m: &CMatrix, power: usize) -> CMatrix {
    let mut out = CMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    let mut p = power;
    while p > 0 {
        if p & 1 == 1 {
            out = &out * &base;
        }
        p >>= 1;
        if p > 0 {
            base = &base * &base;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let h = hermitize(m);
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    HermitianEigen { values, vectors }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).values
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// Rebuilds `V diag(g(lambda)) V^dagger`.
pub fn hermitian_function(m: &CMatrix, g: impl Fn(f64) -> Complex64) -> CMatrix {
    let eig = hermitian_eigen(m);
    let n = eig.values.len();
    let diag = CMatrix::from_fn(n, n, |r, col| {
        if r == col {
            g(eig.values[r])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &eig.vectors * diag * eig.vectors.adjoint()
}

/// `exp(-i t H)` for Hermitian `H`, by spectral decomposition.
pub fn exp_minus_i(h: &CMatrix, t: f64) -> CMatrix {
    hermitian_function(h, |lambda| Complex64::from_polar(1.0, -t * lambda))
}

/// Trace distance `||a - b||_1 / 2` between Hermitian matrices.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    0.5 * hermitian_eigenvalues(&(a - b))
        .into_iter()
        .map(f64::abs)
        .sum::<f64>()
}

pub fn purity(rho: &CMatrix) -> f64 {
    trace_of_product(rho, rho).re
}

/// Result of restoring positivity of a Hermitian unit-trace matrix.
pub struct PsdProjection {
    pub density: CMatrix,
    /// Trace distance between input and output.
    pub distance: f64,
    pub clipped: bool,
}

/// Clips negative eigenvalues to zero and renormalizes the trace to one.
pub fn project_psd(m: &CMatrix) -> PsdProjection {
    let h = hermitize(m);
    let eig = hermitian_eigen(&h);
    let clipped = eig.values.iter().any(|&v| v < 0.0);
    if !clipped {
        let t = trace(&h).re;
        let density = &h * re(1.0 / t);
        let distance = trace_distance(&h, &density);
        return PsdProjection {
            density,
            distance,
            clipped,
        };
    }
    let kept: Vec<f64> = eig.values.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = kept.iter().sum();
    let n = kept.len();
    let diag = CMatrix::from_fn(n, n, |r, col| {
        if r == col {
            re(kept[r] / total)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let density = hermitize(&(&eig.vectors * diag * eig.vectors.adjoint()));
    let distance = trace_distance(&h, &density);
    PsdProjection {
        density,
        distance,
        clipped,
    }
}

/// Singular values of a real matrix, descending.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = SVD::new(m.clone(), false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `sigma_max / sigma_min` over the `min(rows, cols)` singular values.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(singular: &[f64], rel_tol: f64) -> usize {
    let top = singular.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Orthonormal basis of the null space of a real matrix, as columns.
///
/// Uses the eigenvectors of `m^T m` with eigenvalue below
/// `rel_tol * lambda_max`; `m` is small and integer-valued wherever this is
/// used, so squaring the condition number is harmless.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| eig.eigenvalues[i] <= rel_tol * top.max(1.0))
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| eig.eigenvectors[(r, keep[c])])
}

/// Minimum-norm least-squares solution of a real system with its singular
/// values (descending).
pub fn real_least_squares(a: &DMatrix<f64>, b: &DVector<f64>, rel_tol: f64) -> (DVector<f64>, Vec<f64>) {
    let svd = SVD::new(a.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(b, rel_tol * top)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    (x, s)
}

/// Minimum-norm least-squares solution of a complex system with its singular
/// values (descending).
pub fn complex_least_squares(a: &CMatrix, b: &CVector, rel_tol: f64) -> (CVector, Vec<f64>) {
    let svd = SVD::new(a.clone(), true, true);
    let top = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let x = svd
        .solve(b, rel_tol * top)
        .unwrap_or_else(|_| CVector::zeros(a.ncols()));
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    (x, s)
}

pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    // exact below 2^53; the running product can drift by an ulp
    if acc < 9.0e15 {
        Float::round(acc)
    } else {
        acc
    }
}

pub fn factorial_f64(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Integer power of a real number, with `0^0 = 1`.
pub fn powi(x: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}
