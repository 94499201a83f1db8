//! Stokes operators and SU(2) transformations on fixed-photon-number
//! manifolds of two polarization modes.
//!
//! Operators are built from the two-mode ladder actions restricted to the
//! manifold `N`; the basis index `k` labels `|N-k, k>`.

use core::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};

/// Default largest manifold accepted by operator constructors.
pub const DEFAULT_MAX_MANIFOLD: usize = 32;

static MAX_MANIFOLD: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_MANIFOLD);

pub fn max_manifold() -> usize {
    MAX_MANIFOLD.load(Ordering::Relaxed)
}

/// Changes the manifold cap process-wide.
pub fn set_max_manifold(cap: usize) {
    MAX_MANIFOLD.store(cap, Ordering::Relaxed);
}

/// Fails when `photons` exceeds the process-wide cap.
pub fn check_manifold(photons: usize) -> Result<()> {
    let cap = max_manifold();
    if photons > cap {
        Err(Error::ManifoldTooLarge { photons, cap })
    } else {
        Ok(())
    }
}

/// Fock basis `{|N-k, k> : k = 0..=N}` of the `N`-photon manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ManifoldBasis {
    photons: usize,
}

impl ManifoldBasis {
    pub fn new(photons: usize) -> Self {
        Self { photons }
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.photons + 1
    }

    /// `(n_H, n_V)` of basis state `k`.
    pub fn occupations(&self, k: usize) -> Option<(usize, usize)> {
        (k <= self.photons).then(|| (self.photons - k, k))
    }

    pub fn index(&self, horizontal: usize, vertical: usize) -> Option<usize> {
        (horizontal + vertical == self.photons).then_some(vertical)
    }

    /// Action of `a_H^dagger a_V` on basis state `k`: target index and amplitude.
    fn vertical_to_horizontal(&self, k: usize) -> Option<(usize, f64)> {
        let (nh, nv) = self.occupations(k)?;
        (nv > 0).then(|| (k - 1, Float::sqrt((nv * (nh + 1)) as f64)))
    }

    /// Action of `a_H a_V^dagger` on basis state `k`.
    fn horizontal_to_vertical(&self, k: usize) -> Option<(usize, f64)> {
        let (nh, nv) = self.occupations(k)?;
        (nh > 0).then(|| (k + 1, Float::sqrt((nh * (nv + 1)) as f64)))
    }
}

/// A dense operator on one manifold, in [`ManifoldBasis`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldOperator {
    photons: usize,
    matrix: CMatrix,
}

impl ManifoldOperator {
    pub fn new(photons: usize, matrix: CMatrix) -> Result<Self> {
        let dim = photons + 1;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { photons, matrix })
    }

    pub fn identity(photons: usize) -> Self {
        Self {
            photons,
            matrix: CMatrix::identity(photons + 1, photons + 1),
        }
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn dim(&self) -> usize {
        self.photons + 1
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            photons: self.photons,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        linalg::is_hermitian(&self.matrix, tol)
    }

    pub fn pow(&self, power: usize) -> Self {
        Self {
            photons: self.photons,
            matrix: linalg::matrix_power(&self.matrix, power),
        }
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        debug_assert_eq!(self.photons, rhs.photons);
        Self {
            photons: self.photons,
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    /// `self * m * self^dagger`
    pub fn conjugate(&self, m: &CMatrix) -> CMatrix {
        &self.matrix * m * self.matrix.adjoint()
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    pub fn eigenvalues(&self) -> alloc::vec::Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }
}

/// Unit vector on the Poincaré sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    n: [f64; 3],
}

impl Direction {
    /// Accepts only vectors whose norm is within `1e-12` of one.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = Float::sqrt(x * x + y * y + z * z);
        if !norm.is_finite() || (norm - 1.0).abs() > crate::NORM_TOL {
            return Err(Error::NonUnitDirection(norm));
        }
        Ok(Self { n: [x, y, z] })
    }

    /// Normalizes a non-zero vector.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = Float::sqrt(x * x + y * y + z * z);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NonUnitDirection(norm));
        }
        Ok(Self {
            n: [x / norm, y / norm, z / norm],
        })
    }

    /// `n = (sin theta cos phi, sin theta sin phi, cos theta)`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = Float::sin_cos(theta);
        let (sp, cp) = Float::sin_cos(phi);
        Self {
            n: [st * cp, st * sp, ct],
        }
    }

    /// Unit vector along axis `1..=3`.
    pub fn axis(axis: usize) -> Result<Self> {
        let mut n = [0.0; 3];
        match axis {
            1..=3 => n[axis - 1] = 1.0,
            _ => return Err(Error::InvalidAxis(axis)),
        }
        Ok(Self { n })
    }

    pub fn components(&self) -> [f64; 3] {
        self.n
    }

    pub fn x(&self) -> f64 {
        self.n[0]
    }

    pub fn y(&self) -> f64 {
        self.n[1]
    }

    pub fn z(&self) -> f64 {
        self.n[2]
    }

    /// Polar angle in `[0, pi]`.
    pub fn theta(&self) -> f64 {
        Float::acos(self.n[2].clamp(-1.0, 1.0))
    }

    /// Azimuth in `(-pi, pi]`.
    pub fn phi(&self) -> f64 {
        Float::atan2(self.n[1], self.n[0])
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.n[0], self.n[1], self.n[2])
    }

    /// Applies a rotation and renormalizes away rounding.
    pub fn rotated(&self, rotation: &Matrix3<f64>) -> Self {
        let v = rotation * self.to_vector();
        let norm = v.norm();
        Self {
            n: [v[0] / norm, v[1] / norm, v[2] / norm],
        }
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.n[0] * other.n[0] + self.n[1] * other.n[1] + self.n[2] * other.n[2]
    }

    /// Euler angles `(phi, theta, 0)` whose transformation maps `S3` onto `S_n`.
    pub fn euler_angles(&self) -> EulerAngles {
        EulerAngles::new(self.phi(), self.theta(), 0.0)
    }
}

impl core::ops::Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction {
            n: [-self.n[0], -self.n[1], -self.n[2]],
        }
    }
}

/// Euler angles of `U = exp(-i phi S3/2) exp(-i theta S2/2) exp(-i xi S3/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub xi: f64,
}

impl EulerAngles {
    pub fn new(phi: f64, theta: f64, xi: f64) -> Self {
        Self { phi, theta, xi }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Proper rotation `R3(phi) R2(theta) R3(xi)` induced on the Poincaré sphere.
    pub fn rotation(&self) -> Matrix3<f64> {
        axis_rotation(3, self.phi) * axis_rotation(2, self.theta) * axis_rotation(3, self.xi)
    }

    /// `R3(-xi) R2(-theta) R3(-phi)`.
    pub fn inverse_rotation(&self) -> Matrix3<f64> {
        axis_rotation(3, -self.xi) * axis_rotation(2, -self.theta) * axis_rotation(3, -self.phi)
    }
}

fn axis_rotation(axis: usize, angle: f64) -> Matrix3<f64> {
    let (s, c) = Float::sin_cos(angle);
    match axis {
        1 => Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c),
        2 => Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c),
        _ => Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0),
    }
}

/// Rotation by `angle` about axis `1..=3` of the Poincaré sphere.
pub fn rotation_matrix(axis: usize, angle: f64) -> Result<Matrix3<f64>> {
    match axis {
        1..=3 => Ok(axis_rotation(axis, angle)),
        _ => Err(Error::InvalidAxis(axis)),
    }
}

/// Matrix of `S_j` (`j = 0..=3`) on the `photons`-photon manifold.
pub fn stokes_operator(j: usize, photons: usize) -> Result<ManifoldOperator> {
    if j > 3 {
        return Err(Error::InvalidStokesIndex(j));
    }
    check_manifold(photons)?;
    let basis = ManifoldBasis::new(photons);
    let dim = basis.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for k in 0..dim {
        let (nh, nv) = basis.occupations(k).expect("k in range");
        match j {
            0 => m[(k, k)] = linalg::re((nh + nv) as f64),
            3 => m[(k, k)] = linalg::re(nh as f64 - nv as f64),
            _ => {
                // S1 = a_H a_V^+ + a_H^+ a_V,  S2 = i (a_H a_V^+ - a_H^+ a_V)
                if let Some((t, amp)) = basis.horizontal_to_vertical(k) {
                    m[(t, k)] += if j == 1 {
                        linalg::re(amp)
                    } else {
                        linalg::c(0.0, amp)
                    };
                }
                if let Some((t, amp)) = basis.vertical_to_horizontal(k) {
                    m[(t, k)] += if j == 1 {
                        linalg::re(amp)
                    } else {
                        linalg::c(0.0, -amp)
                    };
                }
            }
        }
    }
    Ok(ManifoldOperator { photons, matrix: m })
}

/// `S1`, `S2`, `S3` on one manifold.
pub fn stokes_triple(photons: usize) -> Result<[ManifoldOperator; 3]> {
    Ok([
        stokes_operator(1, photons)?,
        stokes_operator(2, photons)?,
        stokes_operator(3, photons)?,
    ])
}

/// `S_n = n1 S1 + n2 S2 + n3 S3`.
pub fn stokes_in_direction(n: &Direction, photons: usize) -> Result<ManifoldOperator> {
    let [s1, s2, s3] = stokes_triple(photons)?;
    let [x, y, z] = n.components();
    let m = s1.matrix * linalg::re(x) + s2.matrix * linalg::re(y) + s3.matrix * linalg::re(z);
    Ok(ManifoldOperator { photons, matrix: m })
}

/// `U(phi, theta, xi) = exp(-i phi S3/2) exp(-i theta S2/2) exp(-i xi S3/2)`.
///
/// The `S3` factors are diagonal; the `S2` factor goes through the spectral
/// decomposition of `S2`.
pub fn su2_unitary(angles: &EulerAngles, photons: usize) -> Result<ManifoldOperator> {
    check_manifold(photons)?;
    let dim = photons + 1;
    let s3_phase = |angle: f64| {
        CMatrix::from_fn(dim, dim, |r, col| {
            if r == col {
                let eigen = photons as f64 - 2.0 * r as f64;
                Complex64::from_polar(1.0, -angle * eigen / 2.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    };
    let s2 = stokes_operator(2, photons)?;
    let middle = linalg::exp_minus_i(s2.matrix(), angles.theta / 2.0);
    let m = s3_phase(angles.phi) * middle * s3_phase(angles.xi);
    Ok(ManifoldOperator { photons, matrix: m })
}

/// `U S_n U^dagger` computed by conjugation.
pub fn conjugate_stokes(
    angles: &EulerAngles,
    n: &Direction,
    photons: usize,
) -> Result<ManifoldOperator> {
    let u = su2_unitary(angles, photons)?;
    let sn = stokes_in_direction(n, photons)?;
    Ok(ManifoldOperator {
        photons,
        matrix: u.conjugate(sn.matrix()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, re};
    use core::f64::consts::{FRAC_1_SQRT_2, PI};
    use std::vec::Vec;

    fn levi_civita(j: usize, k: usize, l: usize) -> f64 {
        match (j, k, l) {
            (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
            (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
            _ => 0.0,
        }
    }

    #[test]
    fn s3_on_single_photon_is_diag_plus_minus_one() {
        let s3 = stokes_operator(3, 1).unwrap();
        let expected = CMatrix::from_diagonal(&CVector::from_vec(std::vec![re(1.0), re(-1.0)]));
        assert_eq!(s3.matrix(), &expected);
    }

    #[test]
    fn s0_is_photon_number() {
        let s0 = stokes_operator(0, 5).unwrap();
        assert_eq!(s0.matrix(), &(CMatrix::identity(6, 6) * re(5.0)));
    }

    #[test]
    fn invalid_index_and_axis_are_rejected() {
        assert_eq!(stokes_operator(4, 1), Err(Error::InvalidStokesIndex(4)));
        assert_eq!(rotation_matrix(0, 1.0), Err(Error::InvalidAxis(0)));
        assert_eq!(rotation_matrix(4, 1.0), Err(Error::InvalidAxis(4)));
    }

    #[test]
    fn casimir_on_two_photons_is_eight() {
        let [s1, s2, s3] = stokes_triple(2).unwrap();
        let cas = s1.pow(2).matrix() + s2.pow(2).matrix() + s3.pow(2).matrix();
        assert!(max_abs_diff(&cas, &(CMatrix::identity(3, 3) * re(8.0))) < 1e-12);
    }

    #[test]
    fn su2_commutators_and_casimir_up_to_ten_photons() {
        for photons in 0..=10 {
            let ops = stokes_triple(photons).unwrap();
            let s0 = stokes_operator(0, photons).unwrap();
            for j in 1..=3 {
                assert!(ops[j - 1].is_hermitian(0.0));
                let c0 = linalg::commutator(s0.matrix(), ops[j - 1].matrix());
                assert!(linalg::max_abs(&c0) <= 1e-10);
                for k in 1..=3 {
                    let lhs = linalg::commutator(ops[j - 1].matrix(), ops[k - 1].matrix());
                    let mut rhs = CMatrix::zeros(photons + 1, photons + 1);
                    for l in 1..=3 {
                        rhs += ops[l - 1].matrix() * linalg::c(0.0, 2.0 * levi_civita(j, k, l));
                    }
                    assert!(max_abs_diff(&lhs, &rhs) <= 1e-10, "N={photons} [{j},{k}]");
                }
            }
        }
    }

    #[test]
    fn directional_operators() {
        let s = stokes_in_direction(&Direction::axis(3).unwrap(), 2).unwrap();
        let expected =
            CMatrix::from_diagonal(&CVector::from_vec(std::vec![re(2.0), re(0.0), re(-2.0)]));
        assert!(max_abs_diff(s.matrix(), &expected) < 1e-15);

        let s = stokes_in_direction(&Direction::axis(1).unwrap(), 1).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[re(0.0), re(1.0), re(1.0), re(0.0)]);
        assert!(max_abs_diff(s.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn diagonal_direction_spectrum_from_independent_diagonalization() {
        let n = Direction::normalized(1.0, 1.0, 1.0).unwrap();
        let eig = stokes_in_direction(&n, 2).unwrap().eigenvalues();
        for (v, expected) in eig.iter().zip([2.0, 0.0, -2.0]) {
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn non_unit_direction_is_rejected() {
        assert!(matches!(
            Direction::new(1.0, 1.0, 0.0),
            Err(Error::NonUnitDirection(_))
        ));
        assert!(Direction::new(1.0, 0.0, 1e-13).is_ok());
        assert!(Direction::normalized(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn zero_angles_give_identity() {
        for photons in 0..5 {
            let u = su2_unitary(&EulerAngles::identity(), photons).unwrap();
            assert!(max_abs_diff(u.matrix(), &CMatrix::identity(photons + 1, photons + 1)) < 1e-12);
        }
    }

    /// Matrix exponential by Taylor series with scaling and squaring, kept
    /// independent of the spectral path.
    fn exp_series(m: &CMatrix) -> CMatrix {
        let scale = 1u32 << 8;
        let a = m * re(1.0 / scale as f64);
        let mut term = CMatrix::identity(m.nrows(), m.ncols());
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a * re(1.0 / k as f64);
            sum += &term;
        }
        let mut out = sum;
        for _ in 0..8 {
            out = &out * &out;
        }
        out
    }

    #[test]
    fn spectral_exponential_matches_series_oracle() {
        for photons in [1, 2, 4] {
            for theta in [0.3, PI, 2.2] {
                let s2 = stokes_operator(2, photons).unwrap();
                let oracle = exp_series(&(s2.matrix() * linalg::c(0.0, -theta / 2.0)));
                let u = su2_unitary(&EulerAngles::new(0.0, theta, 0.0), photons).unwrap();
                assert!(max_abs_diff(u.matrix(), &oracle) < 1e-12);
            }
        }
    }

    #[test]
    fn pi_rotation_maps_horizontal_to_vertical() {
        let u = su2_unitary(&EulerAngles::new(0.0, PI, 0.0), 1).unwrap();
        let out = u.apply(&CVector::from_vec(std::vec![re(1.0), re(0.0)]));
        // equal to |0,1> up to a global phase
        assert!(out[0].norm() < 1e-15);
        assert!((out[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unitarity() {
        for photons in 0..=8 {
            let u = su2_unitary(&EulerAngles::new(0.7, 1.9, -2.4), photons).unwrap();
            let prod = u.matrix().adjoint() * u.matrix();
            assert!(max_abs_diff(&prod, &CMatrix::identity(photons + 1, photons + 1)) < 1e-12);
        }
    }

    #[test]
    fn rotation_about_first_axis() {
        let phi = 0.4;
        let r = rotation_matrix(1, phi).unwrap();
        let expected = Matrix3::new(
            1.0,
            0.0,
            0.0,
            0.0,
            phi.cos(),
            -phi.sin(),
            0.0,
            phi.sin(),
            phi.cos(),
        );
        assert!((r - expected).amax() < 1e-15);
        assert!((rotation_matrix(1, 0.0).unwrap() - Matrix3::identity()).amax() == 0.0);
        let v = rotation_matrix(3, PI / 2.0).unwrap() * Vector3::new(1.0, 0.0, 0.0);
        assert!((v - Vector3::new(0.0, 1.0, 0.0)).amax() < 1e-15);
        for axis in 1..=3 {
            let r = rotation_matrix(axis, 1.234).unwrap();
            assert!((r.determinant() - 1.0).abs() < 1e-14);
            assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-14);
        }
    }

    #[test]
    fn transformed_s3_points_along_spherical_direction() {
        let (phi, theta) = (0.9, 2.1);
        for photons in 1..=4 {
            let lhs = conjugate_stokes(
                &EulerAngles::new(phi, theta, 0.0),
                &Direction::axis(3).unwrap(),
                photons,
            )
            .unwrap();
            let rhs = stokes_in_direction(&Direction::from_spherical(theta, phi), photons).unwrap();
            assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-10);
        }
    }

    #[test]
    fn conjugation_matches_rotated_direction() {
        let angles = [
            EulerAngles::new(0.3, 1.1, -0.7),
            EulerAngles::new(-2.5, 2.9, 1.4),
            EulerAngles::new(5.0, -0.4, 3.3),
        ];
        let dirs: Vec<Direction> = [(0.2, -0.5, 0.7), (1.0, 0.3, -0.2), (-0.1, 0.9, 0.4)]
            .iter()
            .map(|&(x, y, z)| Direction::normalized(x, y, z).unwrap())
            .collect();
        for a in &angles {
            for n in &dirs {
                let lhs = conjugate_stokes(a, n, 3).unwrap();
                let rhs = stokes_in_direction(&n.rotated(&a.rotation()), 3).unwrap();
                assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-10);
            }
        }
        let n = dirs[0];
        let same = conjugate_stokes(&EulerAngles::identity(), &n, 3).unwrap();
        assert!(max_abs_diff(same.matrix(), stokes_in_direction(&n, 3).unwrap().matrix()) < 1e-12);
    }

    #[test]
    fn parity_of_powers() {
        let n = Direction::normalized(0.3, -0.4, 0.5).unwrap();
        for photons in 1..=4 {
            let plus = stokes_in_direction(&n, photons).unwrap();
            let minus = stokes_in_direction(&-n, photons).unwrap();
            for r in 1..=5 {
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                let diff = max_abs_diff(minus.pow(r).matrix(), &(plus.pow(r).matrix() * re(sign)));
                assert!(diff < 1e-9);
            }
        }
    }

    #[test]
    fn manifold_cap_is_enforced() {
        let cap = max_manifold();
        assert!(matches!(
            stokes_operator(1, cap + 1),
            Err(Error::ManifoldTooLarge { .. })
        ));
    }

    #[test]
    fn basis_maps_index_to_occupations() {
        let b = ManifoldBasis::new(3);
        assert_eq!(b.dim(), 4);
        for k in 0..4 {
            let (h, v) = b.occupations(k).unwrap();
            assert_eq!((h, v), (3 - k, k));
            assert_eq!(b.index(h, v), Some(k));
        }
        assert_eq!(b.occupations(4), None);
        let _ = FRAC_1_SQRT_2;
    }
}
