//! Central factorials, central factorial numbers of both kinds, the
//! `Q_j(n)` polynomials and the recurrences that close the Stokes moment
//! profiles of a manifold.
//!
//! Tables are exact (`BigRational`) and converted to `f64` only on demand.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

/// Default table size; covers the default manifold cap with room for the
/// `N + 2` shift of the profile recurrence.
pub const DEFAULT_TABLE_SIZE: usize = 40;

/// `x^[n] = x * prod_{k = 2-n, 4-n, .., n-2} (x + k/2)`, with `x^[0] = 1`.
pub fn central_factorial(x: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut acc = x;
    let mut k = 2 - n as i64;
    while k <= n as i64 - 2 {
        acc *= x + k as f64 / 2.0;
        k += 2;
    }
    acc
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

fn rational(n: i64) -> BigRational {
    BigRational::from_integer(big(n))
}

fn binomial_big(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * big((n - i) as i64) / big((i + 1) as i64);
    }
    acc
}

fn factorial_big(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * big(i as i64))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients of `x^[n]` in powers of `x`, lowest degree first.
pub fn expansion_coefficients(n: usize) -> Vec<BigRational> {
    if n == 0 {
        return vec![BigRational::one()];
    }
    let mut poly = vec![BigRational::zero(), BigRational::one()];
    let mut k = 2 - n as i64;
    while k <= n as i64 - 2 {
        let shift = BigRational::new(big(k), big(2));
        let mut next = vec![BigRational::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] += c;
            next[i] += c * &shift;
        }
        poly = next;
        k += 2;
    }
    poly
}

/// `f(n, k)` from the closed double sum
/// `C(2n-k, k) k sum_j (-1)^j / (j! (n+j)) C(2n-2k, n-k-j) sum_m (-1)^m C(j, m) (j/2 - m)^(n-k+j)`.
pub fn first_kind_explicit(n: usize, k: usize) -> BigRational {
    if n < k {
        return BigRational::zero();
    }
    if k == 0 {
        return if n == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let mut outer = BigRational::zero();
    for j in 0..=(n - k) {
        let e = (n - k + j) as u32;
        // (j/2 - m)^e = (j - 2m)^e / 2^e
        let mut inner = BigInt::zero();
        for m in 0..=j {
            let term = binomial_big(j, m) * num_traits::pow(big(j as i64 - 2 * m as i64), e as usize);
            if m % 2 == 0 {
                inner += term;
            } else {
                inner -= term;
            }
        }
        let denom = factorial_big(j) * big((n + j) as i64) * num_traits::pow(big(2), e as usize);
        let mut term = BigRational::new(binomial_big(2 * n - 2 * k, n - k - j) * inner, denom);
        if j % 2 == 1 {
            term = -term;
        }
        outer += term;
    }
    outer * BigRational::from_integer(binomial_big(2 * n - k, k) * big(k as i64))
}

/// `F(r, 2j) = 2 sum_{k=1}^{j} (-1)^(j+k) k^r / ((j+k)! (j-k)!)`, valid for even `r`.
pub fn second_kind_even(r: usize, j: usize) -> BigRational {
    if j == 0 {
        return if r == 0 {
            BigRational::one()
        } else {
            BigRational::zero()
        };
    }
    let mut acc = BigRational::zero();
    for k in 1..=j {
        let mut term = BigRational::new(
            num_traits::pow(big(k as i64), r),
            factorial_big(j + k) * factorial_big(j - k),
        );
        if (j + k) % 2 == 1 {
            term = -term;
        }
        acc += term;
    }
    acc * rational(2)
}

/// Exact tables of `f(n, k)` and `F(n, k)` for `0 <= k <= n <= max_n`.
#[derive(Debug, Clone)]
pub struct CentralFactorialTable {
    max_n: usize,
    first: Vec<Vec<BigRational>>,
    second: Vec<Vec<BigRational>>,
}

impl CentralFactorialTable {
    /// Builds both tables. `f` comes from expanding `x^[n]` and is checked
    /// against the explicit formula; `F` is the inverse triangle of `f`.
    pub fn new(max_n: usize) -> Result<Self> {
        let mut first = Vec::with_capacity(max_n + 1);
        for n in 0..=max_n {
            let row = expansion_coefficients(n);
            for (k, value) in row.iter().enumerate() {
                if *value != first_kind_explicit(n, k) {
                    return Err(Error::Inversion(format!(
                        "central factorial number f({n},{k}) disagrees between expansion and explicit formula"
                    )));
                }
            }
            first.push(row);
        }
        let second = invert_lower_triangular(&first);
        Ok(Self {
            max_n,
            first,
            second,
        })
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        if n > self.max_n || k > self.max_n {
            Err(Error::InvalidParameter(format!(
                "central factorial index ({n},{k}) outside table bound {}",
                self.max_n
            )))
        } else {
            Ok(())
        }
    }

    /// `f(n, k)`, zero when `k > n`.
    pub fn first_kind(&self, n: usize, k: usize) -> Result<BigRational> {
        self.check(n, k)?;
        Ok(self.first[n].get(k).cloned().unwrap_or_else(BigRational::zero))
    }

    /// `F(n, k)`, zero when `k > n`.
    pub fn second_kind(&self, n: usize, k: usize) -> Result<BigRational> {
        self.check(n, k)?;
        Ok(self.second[n].get(k).cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn first_kind_f64(&self, n: usize, k: usize) -> Result<f64> {
        self.first_kind(n, k).map(|q| to_f64(&q))
    }

    pub fn second_kind_f64(&self, n: usize, k: usize) -> Result<f64> {
        self.second_kind(n, k).map(|q| to_f64(&q))
    }

    /// Largest entry of `|sum_j F(n, j) f(j, k) - delta_{nk}|` over the table.
    /// Exact arithmetic makes this zero unless the tables are corrupt.
    pub fn inverse_defect(&self) -> BigRational {
        let mut worst = BigRational::zero();
        for n in 0..=self.max_n {
            for k in 0..=n {
                let mut acc = BigRational::zero();
                for j in k..=n {
                    acc += &self.second[n][j] * &self.first[j][k];
                }
                if n == k {
                    acc -= BigRational::one();
                }
                let a = acc.abs();
                if a > worst {
                    worst = a;
                }
            }
        }
        worst
    }

    /// Coefficients `c_j` with `<S_n^r>_N = sum_j c_j <S_n^j>_N`, where `j`
    /// runs over the orders below `N + 1` with the parity of `r`. For
    /// `r <= N` this is the identity map.
    pub fn profile_recurrence_symbolic(
        &self,
        photons: usize,
        order: usize,
    ) -> Result<BTreeMap<usize, BigRational>> {
        if order <= photons {
            let mut out = BTreeMap::new();
            out.insert(order, BigRational::one());
            return Ok(out);
        }
        let step = self.recurrence_step(photons)?;
        let mut memo: BTreeMap<usize, BTreeMap<usize, BigRational>> = BTreeMap::new();
        for r in 0..=order {
            let expr = if r <= photons {
                let mut e = BTreeMap::new();
                e.insert(r, BigRational::one());
                e
            } else {
                let mu = r - (photons + 1);
                let mut e: BTreeMap<usize, BigRational> = BTreeMap::new();
                for (offset, coef) in &step {
                    for (base, c) in &memo[&(offset + mu)] {
                        *e.entry(*base).or_insert_with(BigRational::zero) += coef * c;
                    }
                }
                e.retain(|_, c| !c.is_zero());
                e
            };
            memo.insert(r, expr);
        }
        Ok(memo.remove(&order).unwrap_or_default())
    }

    /// The right-hand side of the profile recurrence at `mu = 0` as
    /// `(order, coefficient)` pairs.
    fn recurrence_step(&self, photons: usize) -> Result<Vec<(usize, BigRational)>> {
        let n = photons + 2;
        self.check(n, n)?;
        let mut terms = Vec::new();
        if photons.is_multiple_of(2) {
            let half = photons / 2;
            for j in 1..=half {
                let scale = BigRational::from_integer(num_traits::pow(big(4), half + 1 - j));
                terms.push((2 * j - 1, -(scale * &self.first[n][2 * j])));
            }
        } else {
            let half = photons.div_ceil(2);
            for j in 0..half {
                let scale = BigRational::from_integer(num_traits::pow(big(4), half - j));
                terms.push((2 * j, -(scale * &self.first[n][2 * j + 1])));
            }
        }
        Ok(terms)
    }

    /// Extends known profile values `<S_n^r>_N` at a fixed direction up to
    /// `target`. `lower` must hold every order `r <= N` with the parity of
    /// `target`; order `0` defaults to one.
    pub fn profile_recurrence(
        &self,
        photons: usize,
        lower: &BTreeMap<usize, f64>,
        target: usize,
    ) -> Result<f64> {
        let step = self.recurrence_step(photons)?;
        let mut values: BTreeMap<usize, f64> = BTreeMap::new();
        values.insert(0, lower.get(&0).copied().unwrap_or(1.0));
        for r in (target % 2..=photons.min(target)).step_by(2) {
            if r == 0 {
                continue;
            }
            let v = lower.get(&r).copied().ok_or(Error::MissingOrder(r))?;
            values.insert(r, v);
        }
        if target <= photons {
            return Ok(values[&target]);
        }
        let coefs: Vec<(usize, f64)> = step.iter().map(|(o, c)| (*o, to_f64(c))).collect();
        for order in (photons + 1..=target).filter(|o| o % 2 == target % 2) {
            let mu = order - (photons + 1);
            let mut acc = 0.0;
            for (offset, c) in &coefs {
                let needed = offset + mu;
                let v = values.get(&needed).copied().ok_or(Error::MissingOrder(needed))?;
                acc += c * v;
            }
            values.insert(order, acc);
        }
        Ok(values[&target])
    }

    /// Checks the operator recurrence `A^(2nu-1+mu) = -sum f(2nu, 2j) A^(2j-1+mu)`
    /// (integer spectrum, `|lambda| < nu`) or
    /// `A^(2nu+mu) = -sum f(2nu+1, 2j+1) A^(2j+mu)` (half-integer spectrum,
    /// `|lambda| <= nu - 1/2`) as a matrix identity.
    pub fn operator_recurrence_check(
        &self,
        a: &CMatrix,
        nu: usize,
        mu: usize,
    ) -> Result<RecurrenceReport> {
        if nu == 0 {
            return Err(Error::Spectrum("nu must be positive".into()));
        }
        let spectrum = classify_spectrum(a)?;
        let max_abs = linalg::hermitian_eigenvalues(a)
            .into_iter()
            .map(f64::abs)
            .fold(0.0, f64::max);
        let tol = 1e-9;
        let (lhs_power, terms) = match spectrum {
            SpectrumKind::Integer => {
                if max_abs >= nu as f64 - tol {
                    return Err(Error::Spectrum(format!(
                        "integer eigenvalue of magnitude {max_abs} is not below nu = {nu}"
                    )));
                }
                let n = 2 * nu;
                self.check(n, n)?;
                let terms: Vec<(usize, f64)> = (1..nu)
                    .map(|j| (2 * j - 1 + mu, -to_f64(&self.first[n][2 * j])))
                    .collect();
                (2 * nu - 1 + mu, terms)
            }
            SpectrumKind::HalfInteger => {
                if max_abs > nu as f64 - 0.5 + tol {
                    return Err(Error::Spectrum(format!(
                        "half-integer eigenvalue of magnitude {max_abs} exceeds nu - 1/2 = {}",
                        nu as f64 - 0.5
                    )));
                }
                let n = 2 * nu + 1;
                self.check(n, n)?;
                let terms: Vec<(usize, f64)> = (0..nu)
                    .map(|j| (2 * j + mu, -to_f64(&self.first[n][2 * j + 1])))
                    .collect();
                (2 * nu + mu, terms)
            }
        };
        let lhs = linalg::matrix_power(a, lhs_power);
        let mut rhs = CMatrix::zeros(a.nrows(), a.ncols());
        for (power, c) in &terms {
            rhs += linalg::matrix_power(a, *power) * linalg::re(*c);
        }
        let scale = linalg::max_abs(&lhs).max(1.0);
        let residual = linalg::max_abs_diff(&lhs, &rhs);
        Ok(RecurrenceReport {
            spectrum,
            lhs_power,
            residual,
            holds: residual <= 1e-9 * scale,
        })
    }
}

fn invert_lower_triangular(f: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let size = f.len();
    let at = |n: usize, k: usize| f[n].get(k).cloned().unwrap_or_else(BigRational::zero);
    let mut inv: Vec<Vec<BigRational>> = (0..size).map(|n| vec![BigRational::zero(); n + 1]).collect();
    for n in 0..size {
        inv[n][n] = BigRational::one() / at(n, n);
        for k in (0..n).rev() {
            let mut acc = BigRational::zero();
            for j in (k + 1)..=n {
                acc += &inv[n][j] * at(j, k);
            }
            inv[n][k] = -acc / at(k, k);
        }
    }
    inv
}

/// Whether a Hermitian operator's eigenvalues are all integers or all
/// half-odd integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Integer,
    HalfInteger,
}

pub fn classify_spectrum(a: &CMatrix) -> Result<SpectrumKind> {
    if !linalg::is_hermitian(a, 1e-10) {
        return Err(Error::Spectrum("operator is not Hermitian".into()));
    }
    let values = linalg::hermitian_eigenvalues(a);
    let tol = 1e-9;
    let near_int = |x: f64| (x - num_traits::Float::round(x)).abs() < tol;
    if values.iter().all(|&v| near_int(v)) {
        Ok(SpectrumKind::Integer)
    } else if values.iter().all(|&v| near_int(v - 0.5)) {
        Ok(SpectrumKind::HalfInteger)
    } else {
        Err(Error::Spectrum(
            "eigenvalues are neither all integers nor all half-integers".into(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceReport {
    pub spectrum: SpectrumKind,
    /// Power on the left-hand side of the checked identity.
    pub lhs_power: usize,
    pub residual: f64,
    pub holds: bool,
}

/// `Q_j(n) = 2^(j-2n) sum_k C(2n, k) (n-k)^(2j)`, exactly.
pub fn q_polynomial(j: usize, n: usize) -> BigRational {
    let mut acc = BigInt::zero();
    for k in 0..=2 * n {
        acc += binomial_big(2 * n, k) * num_traits::pow(big(n as i64 - k as i64), 2 * j);
    }
    let e = j as i64 - 2 * n as i64;
    let pow2 = num_traits::pow(big(2), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(acc * pow2)
    } else {
        BigRational::new(acc, pow2)
    }
}

/// `Q_j(n)` from `Q_0 = 1` and `Q_(j+1)(n) = 2n^2 Q_j(n) - n(2n-1) Q_j(n-1)`.
pub fn q_polynomial_recurrence(j: usize, n: usize) -> BigRational {
    let mut row: Vec<BigRational> = vec![BigRational::one(); n + 1];
    for _ in 0..j {
        let mut next = vec![BigRational::zero(); n + 1];
        for m in 1..=n {
            let mm = m as i64;
            next[m] = rational(2 * mm * mm) * &row[m] - rational(mm * (2 * mm - 1)) * &row[m - 1];
        }
        row = next;
    }
    row[n].clone()
}

pub fn q_polynomial_f64(j: usize, n: usize) -> f64 {
    to_f64(&q_polynomial(j, n))
}

/// `(2j - 1)!!` with `(-1)!! = 1`.
pub fn double_factorial_odd(j: usize) -> BigInt {
    (1..=j).fold(BigInt::one(), |acc, i| acc * big(2 * i as i64 - 1))
}

/// `gcd`-reduced rational from a pair of machine integers.
pub fn ratio(numer: i64, denom: i64) -> BigRational {
    let g = numer.gcd(&denom).max(1);
    BigRational::new(big(numer / g), big(denom / g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::stokes_operator;
    use crate::linalg::{c, re};

    fn table() -> CentralFactorialTable {
        CentralFactorialTable::new(16).unwrap()
    }

    #[test]
    fn central_factorial_product_forms() {
        assert_eq!(central_factorial(2.0, 4), 12.0);
        for nu in 1..6 {
            for m in 0..nu {
                assert_eq!(central_factorial(m as f64, 2 * nu), 0.0);
            }
            for m in 1..=nu {
                assert_eq!(central_factorial(m as f64 - 0.5, 2 * nu + 1), 0.0);
            }
            let x = 1.37;
            let even: f64 = (0..nu).map(|j| x * x - (j * j) as f64).product();
            assert!((central_factorial(x, 2 * nu) - even).abs() < 1e-12 * even.abs().max(1.0));
            let odd: f64 = x * (1..=nu)
                .map(|j| x * x - (j as f64 - 0.5).powi(2))
                .product::<f64>();
            assert!((central_factorial(x, 2 * nu + 1) - odd).abs() < 1e-12 * odd.abs().max(1.0));
        }
    }

    #[test]
    fn known_first_kind_values() {
        let t = table();
        assert_eq!(t.first_kind(4, 2).unwrap(), rational(-1));
        assert_eq!(t.first_kind(4, 4).unwrap(), rational(1));
        assert_eq!(t.first_kind(3, 1).unwrap(), ratio(-1, 4));
        assert_eq!(t.second_kind(2, 2).unwrap(), rational(1));
        for n in 0..=16 {
            let delta = if n == 0 { rational(1) } else { rational(0) };
            assert_eq!(t.first_kind(n, 0).unwrap(), delta);
            assert_eq!(t.second_kind(n, 0).unwrap(), delta);
            if n > 0 {
                assert!(t.first_kind(n, n).unwrap().is_one());
                assert!(t.second_kind(n, n).unwrap().is_one());
            }
        }
    }

    #[test]
    fn opposite_parity_entries_vanish() {
        let t = table();
        for n in 0..=16 {
            for k in 0..=n {
                if (n + k) % 2 == 1 {
                    assert!(t.first_kind(n, k).unwrap().is_zero());
                    assert!(t.second_kind(n, k).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn tables_are_mutually_inverse() {
        assert!(table().inverse_defect().is_zero());
    }

    #[test]
    fn second_kind_even_closed_form() {
        let t = table();
        for r in (0..=16).step_by(2) {
            for j in 0..=r / 2 {
                assert_eq!(t.second_kind(r, 2 * j).unwrap(), second_kind_even(r, j), "F({r},{})", 2 * j);
            }
        }
    }

    #[test]
    fn expansion_reproduces_powers() {
        // x^n = sum_k F(n,k) x^[k]
        let t = table();
        for n in 0..=10 {
            for &x in &[0.3, -1.7, 2.5] {
                let mut acc = 0.0;
                for k in 0..=n {
                    acc += t.second_kind_f64(n, k).unwrap() * central_factorial(x, k);
                }
                let expected = x.powi(n as i32);
                assert!((acc - expected).abs() < 1e-9 * expected.abs().max(1.0));
            }
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        assert!(table().first_kind(17, 1).is_err());
    }

    #[test]
    fn q_polynomial_paths_agree() {
        for n in 0..8 {
            for j in 0..8 {
                assert_eq!(q_polynomial(j, n), q_polynomial_recurrence(j, n), "Q_{j}({n})");
            }
            assert!(q_polynomial(0, n).is_one());
        }
        assert_eq!(q_polynomial(1, 1), rational(1));
        assert_eq!(q_polynomial(2, 2), rational(10));
    }

    #[test]
    fn low_manifold_closed_forms() {
        let t = table();
        // N = 2, odd r: 2^(r-1) <S_n>
        for r in (3..12).step_by(2) {
            let e = t.profile_recurrence_symbolic(2, r).unwrap();
            assert_eq!(e.len(), 1);
            assert_eq!(e[&1], BigRational::from_integer(num_traits::pow(big(2), r - 1)));
        }
        // N = 2, even r: 2^(r-2) <S_n^2>
        for r in (4..12).step_by(2) {
            let e = t.profile_recurrence_symbolic(2, r).unwrap();
            assert_eq!(e.len(), 1);
            assert_eq!(e[&2], BigRational::from_integer(num_traits::pow(big(2), r - 2)));
        }
        // N = 1, even r: 1
        let e = t.profile_recurrence_symbolic(1, 6).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[&0].is_one());
    }

    #[test]
    fn recurrence_matches_matrix_power_on_s3() {
        let t = table();
        for photons in 0..=6 {
            let s3 = stokes_operator(3, photons).unwrap();
            let value = |r: usize| linalg::trace(s3.pow(r).matrix()).re / (photons + 1) as f64;
            let lower: BTreeMap<usize, f64> = (0..=photons).map(|r| (r, value(r))).collect();
            for target in 0..=photons + 5 {
                let got = t.profile_recurrence(photons, &lower, target).unwrap();
                let want = value(target);
                assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0), "N={photons} r={target}");
            }
        }
    }

    #[test]
    fn missing_lower_order_is_reported() {
        let t = table();
        let lower = BTreeMap::new();
        assert_eq!(t.profile_recurrence(3, &lower, 5), Err(Error::MissingOrder(1)));
    }

    #[test]
    fn operator_recurrence_on_spin_components() {
        let t = table();
        // spin 1: J3^3 = J3
        let j3 = stokes_operator(3, 2).unwrap().into_matrix() * re(0.5);
        let rep = t.operator_recurrence_check(&j3, 2, 0).unwrap();
        assert_eq!(rep.spectrum, SpectrumKind::Integer);
        assert!(rep.holds && rep.residual < 1e-12);
        // spin 1/2: J3^2 = 1/4
        let j3 = stokes_operator(3, 1).unwrap().into_matrix() * re(0.5);
        let rep = t.operator_recurrence_check(&j3, 1, 0).unwrap();
        assert_eq!(rep.spectrum, SpectrumKind::HalfInteger);
        assert!(rep.holds);
        let sq = &j3 * &j3;
        assert!(linalg::max_abs_diff(&sq, &(CMatrix::identity(2, 2) * re(0.25))) < 1e-15);
        // violated bound
        assert!(matches!(
            t.operator_recurrence_check(&j3, 0, 0),
            Err(Error::Spectrum(_))
        ));
        let big_spin = stokes_operator(3, 4).unwrap().into_matrix() * re(0.5);
        assert!(matches!(
            t.operator_recurrence_check(&big_spin, 2, 0),
            Err(Error::Spectrum(_))
        ));
        let mixed = CMatrix::from_diagonal(&crate::linalg::CVector::from_vec(vec![c(0.5, 0.0), c(1.0, 0.0)]));
        assert!(classify_spectrum(&mixed).is_err());
    }
}
