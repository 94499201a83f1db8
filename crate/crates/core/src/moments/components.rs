use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{stokes_in_direction, stokes_triple, Direction, ManifoldOperator};
use crate::linalg::{c, powi, I};
use crate::menagerie::{BlockDiagonalState, ManifoldState};

use super::tensor::{averaged_tensor, levi_civita, multi_index, pow3, tensor, PolarizationTensor};

/// Real coefficients `M(k, l)` of `n1^k n2^l n3^(r-k-l)` in the order-`r`
/// profile, stored for `k = 0..=r`, then `l = 0..=r-k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentComponents {
    order: usize,
    photons: Option<usize>,
    values: Vec<f64>,
}

impl MomentComponents {
    pub fn new(order: usize, photons: Option<usize>, values: Vec<f64>) -> Result<Self> {
        let expected = Self::count(order);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(Self { order, photons, values })
    }

    pub fn zeros(order: usize, photons: Option<usize>) -> Self {
        Self {
            order,
            photons,
            values: vec![0.0; Self::count(order)],
        }
    }

    /// `m_r = (r+1)(r+2)/2`.
    pub fn count(order: usize) -> usize {
        (order + 1) * (order + 2) / 2
    }

    /// Storage position of `(k, l)`.
    pub fn position(order: usize, k: usize, l: usize) -> usize {
        debug_assert!(k + l <= order);
        k * (order + 1) - k * k.saturating_sub(1) / 2 + l
    }

    /// `(k, l)` pairs in storage order.
    pub fn pairs(order: usize) -> Vec<(usize, usize)> {
        (0..=order)
            .flat_map(|k| (0..=order - k).map(move |l| (k, l)))
            .collect()
    }

    /// Number of tensor elements summed into `M(k, l)`, the trinomial
    /// `r! / (k! l! (r-k-l)!)`.
    pub fn class_size(order: usize, k: usize, l: usize) -> usize {
        let mut num = 1usize;
        for x in 1..=order {
            num *= x;
        }
        let fact = |n: usize| (1..=n).product::<usize>();
        num / (fact(k) * fact(l) * fact(order - k - l))
    }

    /// Monomials `n1^k n2^l n3^(r-k-l)` in storage order.
    pub fn monomials(order: usize, n: &Direction) -> Vec<f64> {
        let [x, y, z] = n.components();
        Self::pairs(order)
            .into_iter()
            .map(|(k, l)| powi(x, k) * powi(y, l) * powi(z, order - k - l))
            .collect()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn photons(&self) -> Option<usize> {
        self.photons
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `M(k, l)`; panics when `k + l > r`.
    pub fn get(&self, k: usize, l: usize) -> f64 {
        assert!(k + l <= self.order, "M({k}, {l}) outside order {}", self.order);
        self.values[Self::position(self.order, k, l)]
    }

    /// Profile value `sum M(k, l) n1^k n2^l n3^(r-k-l)`.
    pub fn evaluate(&self, n: &Direction) -> f64 {
        Self::monomials(self.order, n)
            .iter()
            .zip(&self.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.order != other.order {
            return f64::INFINITY;
        }
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `sum_N weight_N M_N`, marked as averaged.
    pub fn weighted_sum<'a>(order: usize, terms: impl IntoIterator<Item = (f64, &'a Self)>) -> Result<Self> {
        let mut out = Self::zeros(order, None);
        for (w, m) in terms {
            if m.order != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: m.order,
                });
            }
            for (o, x) in out.values.iter_mut().zip(&m.values) {
                *o += w * x;
            }
        }
        Ok(out)
    }
}

fn class_position(idx: &[usize], order: usize) -> usize {
    let k = idx.iter().filter(|&&j| j == 1).count();
    let l = idx.iter().filter(|&&j| j == 2).count();
    MomentComponents::position(order, k, l)
}

/// Sums each permutation class of the tensor. The imaginary parts cancel for
/// any valid tensor; a residue above `1e-10` relative to the class scale is
/// reported as an error.
pub fn moment_components(t: &PolarizationTensor) -> Result<MomentComponents> {
    let order = t.order();
    let count = MomentComponents::count(order);
    let mut sums = vec![c(0.0, 0.0); count];
    let mut scale = vec![0.0f64; count];
    for (flat, value) in t.elements().iter().enumerate() {
        let cl = class_position(&multi_index(flat, order), order);
        sums[cl] += value;
        scale[cl] += value.norm();
    }
    let mut values = Vec::with_capacity(count);
    for (s, sc) in sums.iter().zip(&scale) {
        if s.im.abs() > 1e-10 * sc.max(1.0) {
            return Err(Error::ImaginaryResidue(s.im));
        }
        values.push(s.re);
    }
    MomentComponents::new(order, t.photons(), values)
}

/// Order-`r` profile `<S_n^r>` backed by its moment components.
#[derive(Debug, Clone, PartialEq)]
pub struct StokesProfile {
    components: MomentComponents,
}

impl StokesProfile {
    pub fn new(components: MomentComponents) -> Self {
        Self { components }
    }

    pub fn of_state(state: &ManifoldState, order: usize) -> Result<Self> {
        Ok(Self::new(moment_components(&tensor(state, order)?)?))
    }

    pub fn averaged(state: &BlockDiagonalState, order: usize) -> Result<Self> {
        Ok(Self::new(averaged_components(state, order)?))
    }

    pub fn order(&self) -> usize {
        self.components.order
    }

    pub fn photons(&self) -> Option<usize> {
        self.components.photons
    }

    pub fn components(&self) -> &MomentComponents {
        &self.components
    }

    pub fn eval(&self, n: &Direction) -> f64 {
        self.components.evaluate(n)
    }
}

pub fn profile_eval(components: &MomentComponents, n: &Direction) -> f64 {
    components.evaluate(n)
}

/// `Tr(rho S_n^r)` from matrix powers.
pub fn direct_profile(state: &ManifoldState, order: usize, n: &Direction) -> Result<f64> {
    let s = stokes_in_direction(n, state.photons())?;
    Ok(state.expectation(s.pow(order).matrix()).re)
}

pub fn averaged_components(state: &BlockDiagonalState, order: usize) -> Result<MomentComponents> {
    moment_components(&averaged_tensor(state, order)?)
}

/// `sum_N p_N <S_n^r>_N` evaluated through each manifold's components.
pub fn averaged_profile(state: &BlockDiagonalState, order: usize, n: &Direction) -> Result<f64> {
    let mut acc = 0.0;
    for b in state.blocks() {
        acc += b.probability * StokesProfile::of_state(&b.state, order)?.eval(n);
    }
    Ok(acc)
}

/// `S1^k S2^l S3^(r-k-l)` on manifold `N`.
pub fn ordered_product(k: usize, l: usize, order: usize, photons: usize) -> Result<ManifoldOperator> {
    if k + l > order {
        return Err(Error::InvalidParameter(alloc::format!(
            "ordered product needs k + l <= r, got k = {k}, l = {l}, r = {order}"
        )));
    }
    let [s1, s2, s3] = stokes_triple(photons)?;
    Ok(s1.pow(k).compose(&s2.pow(l)).compose(&s3.pow(order - k - l)))
}

/// Laplacian of an order-`r` profile polynomial as a map from its moment
/// components to the order `r - 2` coefficients.
pub fn laplacian_map(order: usize) -> Result<DMatrix<f64>> {
    if order < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "the Laplacian map needs order >= 2, got {order}"
        )));
    }
    let lower = order - 2;
    let mut l = DMatrix::zeros(MomentComponents::count(lower), MomentComponents::count(order));
    for (col, (k, ll)) in MomentComponents::pairs(order).into_iter().enumerate() {
        let m = order - k - ll;
        if k >= 2 {
            l[(MomentComponents::position(lower, k - 2, ll), col)] += (k * (k - 1)) as f64;
        }
        if ll >= 2 {
            l[(MomentComponents::position(lower, k, ll - 2), col)] += (ll * (ll - 1)) as f64;
        }
        if m >= 2 {
            l[(MomentComponents::position(lower, k, ll), col)] += (m * (m - 1)) as f64;
        }
    }
    Ok(l)
}

/// Coefficients of the Laplacian of the order-`r` profile on manifold `N`,
/// fixed by the Casimir `S1^2 + S2^2 + S3^2 = N(N+2)` and the commutators:
/// contracting a pair of slots around a block `B` gives
/// `N(N+2) T(.., B, ..) + sum 2i eps(b_p, c, k) T(.., c, B[p -> k], ..)`.
pub fn casimir_rhs(
    photons: usize,
    first_lower: &PolarizationTensor,
    second_lower: &PolarizationTensor,
) -> Result<MomentComponents> {
    let order = first_lower.order() + 1;
    if order < 2 || second_lower.order() + 2 != order {
        return Err(Error::MissingOrder(order.saturating_sub(2)));
    }
    let lower = order - 2;
    let casimir = (photons * (photons + 2)) as f64;
    let mut sums = vec![c(0.0, 0.0); MomentComponents::count(lower)];
    for flat in 0..pow3(lower) {
        let idx = multi_index(flat, lower);
        let base = second_lower.at(&idx);
        let mut acc = c(0.0, 0.0);
        for p in 0..order {
            for q in p + 1..order {
                acc += base * casimir;
                let (a, rest) = idx.split_at(p);
                let (b, cc) = rest.split_at(q - p - 1);
                for s in 0..b.len() {
                    for col in 1..=3 {
                        for k in 1..=3 {
                            let eps = levi_civita(b[s], col, k);
                            if eps == 0.0 {
                                continue;
                            }
                            let mut j: Vec<usize> = Vec::with_capacity(order - 1);
                            j.extend_from_slice(a);
                            j.push(col);
                            j.extend_from_slice(b);
                            j[a.len() + 1 + s] = k;
                            j.extend_from_slice(cc);
                            acc += I * 2.0 * eps * first_lower.at(&j);
                        }
                    }
                }
            }
        }
        sums[class_position(&idx, lower)] += acc * 2.0;
    }
    let scale = second_lower.max_abs().max(first_lower.max_abs()).max(1.0) * casimir.max(1.0);
    let values = sums
        .iter()
        .map(|s: &Complex64| {
            if s.im.abs() > 1e-9 * scale * pow3(order) as f64 {
                Err(Error::ImaginaryResidue(s.im))
            } else {
                Ok(s.re)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MomentComponents::new(lower, Some(photons), values)
}
