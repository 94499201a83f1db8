use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Float;

use super::{lattice_dim, BlockDiagonalState, GeneralTwoModeState, ManifoldState};
use crate::error::{Error, Result};
use crate::fock::{check_manifold, EulerAngles};
use crate::linalg::{binomial_f64, c, factorial_f64, powi, re, CMatrix, CVector};

/// Largest probability mass a truncated constructor may discard.
pub const TRUNCATION_BOUND: f64 = 1e-10;

/// SU(2) coherent state `|N; theta, phi>` with amplitude
/// `e^{-i n phi} sqrt(C(N, n)) sin^(N-n)(theta/2) cos^n(theta/2)` on `|n, N-n>`.
pub fn su2_coherent(photons: usize, theta: f64, phi: f64) -> Result<ManifoldState> {
    check_manifold(photons)?;
    let (s, co) = Float::sin_cos(theta / 2.0);
    let mut v = CVector::zeros(photons + 1);
    for n in 0..=photons {
        let mag = Float::sqrt(binomial_f64(photons, n)) * powi(s, photons - n) * powi(co, n);
        // |n, N-n> has vertical count N-n
        v[photons - n] = Complex64::from_polar(mag, -(n as f64) * phi);
    }
    ManifoldState::pure_normalized(photons, v)
}

fn poisson_weights(mean: f64, max_photons: usize) -> Result<(Vec<f64>, f64)> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be finite and non-negative, got {mean}"
        )));
    }
    let mut weights = Vec::with_capacity(max_photons + 1);
    let mut term = Float::exp(-mean);
    for n in 0..=max_photons {
        if n > 0 {
            term *= mean / n as f64;
        }
        weights.push(term);
    }
    let mut tail = 0.0;
    let mut n = max_photons;
    loop {
        n += 1;
        term *= mean / n as f64;
        tail += term;
        if term <= tail * 1e-17 || term == 0.0 {
            break;
        }
    }
    Ok((weights, tail))
}

/// Polarization sector of `|alpha, 0>` with `|alpha|^2 = mean`: a Poissonian
/// mixture of `|N, 0>` over `N <= max_photons`.
pub fn two_mode_coherent(mean: f64, max_photons: usize) -> Result<BlockDiagonalState> {
    let (weights, tail) = poisson_weights(mean, max_photons)?;
    if tail > TRUNCATION_BOUND {
        return Err(Error::Truncation {
            tail,
            bound: TRUNCATION_BOUND,
        });
    }
    let weighted = weights
        .into_iter()
        .enumerate()
        .map(|(n, p)| (p, ManifoldState::fock(n, 0)))
        .collect();
    BlockDiagonalState::from_truncated(weighted)
}

/// Product coherent state `|alpha_H, alpha_V>` on the lattice
/// `n_H + n_V <= max_photons`.
pub fn two_mode_coherent_lattice(
    alpha_h: Complex64,
    alpha_v: Complex64,
    max_photons: usize,
) -> Result<GeneralTwoModeState> {
    let mean = alpha_h.norm_sqr() + alpha_v.norm_sqr();
    let (_, tail) = poisson_weights(mean, max_photons)?;
    if tail > TRUNCATION_BOUND {
        return Err(Error::Truncation {
            tail,
            bound: TRUNCATION_BOUND,
        });
    }
    let mut v = CVector::zeros(lattice_dim(max_photons));
    let prefactor = Float::exp(-mean / 2.0);
    for n in 0..=max_photons {
        for k in 0..=n {
            let h = n - k;
            let amp = alpha_h.powu(h as u32) * alpha_v.powu(k as u32)
                / Float::sqrt(factorial_f64(h) * factorial_f64(k));
            v[GeneralTwoModeState::index(h, k)] = amp * prefactor;
        }
    }
    let norm = v.norm();
    GeneralTwoModeState::pure_truncated(max_photons, v / re(norm), tail)
}

/// `|m, m>` on the manifold `N = 2m`.
pub fn twin_fock(m: usize) -> ManifoldState {
    ManifoldState::fock(m, m)
}

fn binomial_signed(n: usize, k: i64) -> f64 {
    if k < 0 {
        0.0
    } else {
        binomial_f64(n, k as usize)
    }
}

/// `U(phi, theta, xi) |m, m>` from its closed-form expansion on
/// `|2m - k, k>`.
pub fn transformed_twin_fock(m: usize, angles: &EulerAngles) -> Result<ManifoldState> {
    let photons = 2 * m;
    check_manifold(photons)?;
    let (s, co) = Float::sin_cos(angles.theta);
    let mut v = CVector::zeros(photons + 1);
    let norm = 1.0 / (factorial_f64(m) * powi(2.0, m));
    for k in 0..=photons {
        let mut sum = 0.0;
        for j in 0..=(k / 2).min(m) {
            let b = binomial_signed(m - j, (j + m) as i64 - k as i64);
            if b == 0.0 {
                continue;
            }
            sum += binomial_f64(m, j)
                * b
                * powi(-0.25, j)
                * powi(s, m + 2 * j - k)
                * powi(co, k - 2 * j);
        }
        let mag = norm * powi(2.0, k) * Float::sqrt(factorial_f64(photons - k) * factorial_f64(k)) * sum;
        let sign = if (m + k).is_multiple_of(2) { 1.0 } else { -1.0 };
        let phase = Complex64::from_polar(1.0, -angles.phi * (m as f64 - k as f64));
        v[k] = phase * (sign * mag);
    }
    ManifoldState::pure_normalized(photons, v)
}

/// Pair-number distribution `2 N^m / (2 + N)^(m+1)` of the two-mode squeezed vacuum.
pub fn tmsv_pair_probability(mean: f64, m: usize) -> f64 {
    2.0 / (2.0 + mean) * powi(mean / (2.0 + mean), m)
}

/// Two-mode squeezed vacuum truncated to `m <= max_pairs`, with optional
/// per-pair phases (zero when `phases` is empty).
pub fn tmsv(mean: f64, phases: &[f64], max_pairs: usize) -> Result<GeneralTwoModeState> {
    if !(mean >= 0.0 && mean.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mean photon number must be finite and non-negative, got {mean}"
        )));
    }
    if !phases.is_empty() && phases.len() != max_pairs + 1 {
        return Err(Error::DimensionMismatch {
            expected: max_pairs + 1,
            found: phases.len(),
        });
    }
    let tail = powi(mean / (2.0 + mean), max_pairs + 1);
    if tail > TRUNCATION_BOUND {
        return Err(Error::Truncation {
            tail,
            bound: TRUNCATION_BOUND,
        });
    }
    let max_photons = 2 * max_pairs;
    let mut v = CVector::zeros(lattice_dim(max_photons));
    for m in 0..=max_pairs {
        let phase = phases.get(m).copied().unwrap_or(0.0);
        v[GeneralTwoModeState::index(m, m)] =
            Complex64::from_polar(Float::sqrt(tmsv_pair_probability(mean, m)), phase);
    }
    let norm = v.norm();
    GeneralTwoModeState::pure_truncated(max_photons, v / re(norm), tail)
}

/// `(|N, 0> + |0, N>) / sqrt(2)` for `N >= 1`.
pub fn noon(photons: usize) -> Result<ManifoldState> {
    if photons == 0 {
        return Err(Error::InvalidParameter("NOON state needs N >= 1".into()));
    }
    let mut v = CVector::zeros(photons + 1);
    v[0] = re(core::f64::consts::FRAC_1_SQRT_2);
    v[photons] = re(core::f64::consts::FRAC_1_SQRT_2);
    ManifoldState::pure(photons, v)
}

/// `a e^{-i theta} |2,0> + i sqrt(1 - 2a^2) |1,1> + a e^{i theta} |0,2>`,
/// the pure two-photon states with vanishing first-order polarization.
pub fn unpolarized_two_photon(a: f64, theta: f64) -> Result<ManifoldState> {
    let limit = core::f64::consts::FRAC_1_SQRT_2;
    if !(a >= 0.0 && a <= limit + crate::NORM_TOL) {
        return Err(Error::InvalidParameter(format!(
            "amplitude a must lie in [0, 1/sqrt(2)], got {a}"
        )));
    }
    let middle = Float::sqrt((1.0 - 2.0 * a * a).max(0.0));
    let v = CVector::from_vec(alloc::vec![
        Complex64::from_polar(a, -theta),
        c(0.0, middle),
        Complex64::from_polar(a, theta),
    ]);
    ManifoldState::pure_normalized(2, v)
}

/// Single-photon density `[[pi0, R + iI], [R - iI, 1 - pi0]]` in the basis
/// `(|1,0>, |0,1>)`.
pub fn single_photon_density(pi0: f64, r: f64, i: f64) -> Result<ManifoldState> {
    let m = CMatrix::from_row_slice(2, 2, &[re(pi0), c(r, i), c(r, -i), re(1.0 - pi0)]);
    ManifoldState::mixed(1, m)
}

/// Two-photon density in the basis `(|2,0>, |1,1>, |0,2>)` with diagonal
/// `(pi1, pi2, 1 - pi1 - pi2)` and upper off-diagonals `R_j + i I_j` in the
/// order `(0,1), (0,2), (1,2)`.
pub fn two_photon_density(pi1: f64, pi2: f64, r: [f64; 3], i: [f64; 3]) -> Result<ManifoldState> {
    let m = CMatrix::from_row_slice(
        3,
        3,
        &[
            re(pi1),
            c(r[0], i[0]),
            c(r[1], i[1]),
            c(r[0], -i[0]),
            re(pi2),
            c(r[2], i[2]),
            c(r[1], -i[1]),
            c(r[2], -i[2]),
            re(1.0 - pi1 - pi2),
        ],
    );
    ManifoldState::mixed(2, m)
}
