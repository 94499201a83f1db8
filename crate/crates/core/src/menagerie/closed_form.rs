use num_complex::Complex64;
use num_traits::{Float, ToPrimitive};

use super::families::tmsv_pair_probability;
use crate::error::{Error, Result};
use crate::factorials::{double_factorial_odd, second_kind_even};
use crate::fock::Direction;
use crate::linalg::{binomial_f64, powi};

/// State families with analytic Stokes moment profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// SU(2) coherent state `|N; theta, phi>`; `theta = 0` is `|N, 0>`.
    Su2Coherent { photons: usize, theta: f64, phi: f64 },
    /// Photon-number average over the sector of `|alpha, 0>`, `|alpha|^2 = mean`.
    TwoModeCoherent { mean: f64 },
    /// `|m, m>` on manifold `2m`.
    TwinFock { m: usize },
    /// Photon-number average over the two-mode squeezed vacuum.
    Tmsv { mean: f64 },
    /// `(|N, 0> + |0, N>) / sqrt(2)`.
    Noon { photons: usize },
}

impl Family {
    pub fn pole_coherent(photons: usize) -> Self {
        Family::Su2Coherent {
            photons,
            theta: 0.0,
            phi: 0.0,
        }
    }
}

/// `sum_k (N - 2k)^r C(N, k) s^k (1 - s)^(N - k)` with `s = sin^2(angle/2)`
/// given through `cos(angle)`.
fn pole_profile(photons: usize, order: usize, cos_angle: f64) -> f64 {
    let s = ((1.0 - cos_angle) / 2.0).clamp(0.0, 1.0);
    let mut acc = 0.0;
    for k in 0..=photons {
        acc += powi(photons as f64 - 2.0 * k as f64, order)
            * binomial_f64(photons, k)
            * powi(s, k)
            * powi(1.0 - s, photons - k);
    }
    acc
}

/// Even-order twin-Fock profile
/// `2^r sum_j [(2j-1)!!]^2 F(r, 2j) C(m+j, 2j) sin^(2j)(theta)`.
fn twin_fock_profile(m: usize, order: usize, sin2: f64) -> f64 {
    if order % 2 == 1 {
        return 0.0;
    }
    if order == 0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for j in 0..=order / 2 {
        let df = double_factorial_odd(j).to_f64().unwrap_or(f64::NAN);
        let f = second_kind_even(order, j).to_f64().unwrap_or(f64::NAN);
        acc += df * df * f * binomial_f64(m + j, 2 * j) * powi(sin2, j);
    }
    powi(2.0, order) * acc
}

/// Sums `weight(N) * profile(N)` until the terms stop mattering.
fn mixture_series(
    mean: f64,
    order: usize,
    weight: impl Fn(usize) -> f64,
    profile: impl Fn(usize) -> f64,
    scale_of: impl Fn(usize) -> f64,
) -> f64 {
    let mut acc = 0.0;
    let mut bound = 0.0;
    for n in 0..100_000 {
        let w = weight(n);
        acc += w * profile(n);
        bound += w * powi(scale_of(n).max(1.0), order);
        let next = weight(n + 1) * powi(scale_of(n + 1).max(1.0), order);
        if n as f64 > mean && next < 1e-18 * bound {
            break;
        }
    }
    acc
}

fn check_mean(mean: f64) -> Result<()> {
    if mean >= 0.0 && mean.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!(
            "mean photon number must be finite and non-negative, got {mean}"
        )))
    }
}

/// Analytic `<S_n^r>` for a state family. For the averaged families this is
/// the photon-number-weighted profile.
pub fn closed_form_profile(family: &Family, order: usize, n: &Direction) -> Result<f64> {
    let [x, y, z] = n.components();
    let sin2 = (1.0 - z * z).max(0.0);
    match *family {
        Family::Su2Coherent { photons, theta, phi } => {
            let axis = Direction::from_spherical(theta, phi);
            Ok(pole_profile(photons, order, n.dot(&axis)))
        }
        Family::TwoModeCoherent { mean } => {
            check_mean(mean)?;
            Ok(match order {
                0 => 1.0,
                1 => mean * z,
                2 => mean * (1.0 + mean * z * z),
                3 => mean * z * (1.0 + 3.0 * mean + mean * mean * z * z),
                _ => {
                    let log_mean = Float::ln(mean);
                    let weight = |k: usize| {
                        if mean == 0.0 {
                            if k == 0 {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            Float::exp(-mean + k as f64 * log_mean - ln_factorial(k))
                        }
                    };
                    mixture_series(mean, order, weight, |k| pole_profile(k, order, z), |k| k as f64)
                }
            })
        }
        Family::TwinFock { m } => Ok(twin_fock_profile(m, order, sin2)),
        Family::Tmsv { mean } => {
            check_mean(mean)?;
            let c = mean * (mean + 2.0) * sin2;
            Ok(match order {
                0 => 1.0,
                _ if order % 2 == 1 => 0.0,
                2 => c,
                4 => c * (4.0 + 9.0 * c),
                _ => mixture_series(
                    mean / 2.0,
                    order,
                    |m| tmsv_pair_probability(mean, m),
                    |m| twin_fock_profile(m, order, sin2),
                    |m| 2.0 * m as f64,
                ),
            })
        }
        Family::Noon { photons } => {
            if photons == 0 {
                return Err(Error::InvalidParameter("NOON state needs N >= 1".into()));
            }
            Ok(noon_profile(photons, order, x, y, z))
        }
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| Float::ln(k as f64)).sum()
}

fn noon_profile(photons: usize, order: usize, x: f64, y: f64, z: f64) -> f64 {
    let nn = photons as f64;
    // sin^N(theta) cos(N phi)
    let equatorial = Complex64::new(x, y).powu(photons as u32).re;
    match (order % 2, photons % 2) {
        (1, 0) => 0.0,
        (1, _) => {
            let mut acc = 0.0;
            for k in 0..=(photons - 1) / 2 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += powi(nn - 2.0 * k as f64, order) * binomial_f64(photons, k) * sign;
            }
            equatorial * acc / powi(4.0, (photons - 1) / 2)
        }
        _ => {
            let c2 = ((1.0 + z) / 2.0).clamp(0.0, 1.0);
            let s2 = ((1.0 - z) / 2.0).clamp(0.0, 1.0);
            // cos^N(theta/2) sin^N(theta/2) cos(N phi)
            let cross = equatorial / powi(2.0, photons);
            let mut acc = 0.0;
            for k in 0..=photons {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                acc += powi(nn - 2.0 * k as f64, order)
                    * binomial_f64(photons, k)
                    * (powi(c2, k) * powi(s2, photons - k) + sign * cross);
            }
            acc
        }
    }
}
