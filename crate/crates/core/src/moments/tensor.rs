use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{stokes_triple, Direction};
use crate::linalg::{c, trace, CMatrix, I};
use crate::menagerie::{BlockDiagonalState, ManifoldState};

use super::components::MomentComponents;

/// Largest tensor order built by default.
pub const MAX_TENSOR_ORDER: usize = 6;

/// Levi-Civita symbol on 1-based indices.
pub fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
        _ => 0.0,
    }
}

fn third(a: usize, b: usize) -> usize {
    6 - a - b
}

/// `T_{j1..jr} = <S_j1 ... S_jr>`, stored densely with the leftmost index
/// varying slowest. `photons` is `None` for photon-number averages.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationTensor {
    order: usize,
    photons: Option<usize>,
    data: Vec<Complex64>,
}

impl PolarizationTensor {
    pub fn from_elements(order: usize, photons: Option<usize>, data: Vec<Complex64>) -> Result<Self> {
        check_order(order)?;
        let len = pow3(order);
        if data.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                found: data.len(),
            });
        }
        Ok(Self { order, photons, data })
    }

    pub fn zeros(order: usize, photons: Option<usize>) -> Result<Self> {
        Self::from_elements(order, photons, vec![Complex64::new(0.0, 0.0); pow3(order)])
    }

    /// The order-0 tensor of a normalized state.
    pub fn unit(photons: Option<usize>) -> Self {
        Self {
            order: 0,
            photons,
            data: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn photons(&self) -> Option<usize> {
        self.photons
    }

    pub fn elements(&self) -> &[Complex64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Element at 1-based indices.
    pub fn get(&self, indices: &[usize]) -> Result<Complex64> {
        Ok(self.data[flat_index(indices, self.order)?])
    }

    pub(crate) fn at(&self, indices: &[usize]) -> Complex64 {
        self.data[flat_unchecked(indices)]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.order != other.order {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |T_J - conj(T_reverse(J))|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for flat in 0..self.data.len() {
            let mut idx = multi_index(flat, self.order);
            idx.reverse();
            let rev = self.data[flat_unchecked(&idx)];
            worst = worst.max((self.data[flat] - rev.conj()).norm());
        }
        worst
    }

    /// Largest violation of `T_{..ab..} - T_{..ba..} = 2i eps_abc T_{..c..}`
    /// against the supplied order `r - 1` tensor.
    pub fn descent_defect(&self, lower: &Self) -> Result<f64> {
        if self.order == 0 || lower.order + 1 != self.order {
            return Err(Error::MissingOrder(self.order.saturating_sub(1)));
        }
        let mut worst: f64 = 0.0;
        for flat in 0..self.data.len() {
            let idx = multi_index(flat, self.order);
            for p in 0..self.order.saturating_sub(1) {
                let (a, b) = (idx[p], idx[p + 1]);
                let mut swapped = idx.clone();
                swapped.swap(p, p + 1);
                let lhs = self.data[flat] - self.at(&swapped);
                let rhs = if a == b {
                    c(0.0, 0.0)
                } else {
                    let mut l = idx.clone();
                    l.splice(p..p + 2, [third(a, b)]);
                    I * 2.0 * levi_civita(a, b, third(a, b)) * lower.at(&l)
                };
                worst = worst.max((lhs - rhs).norm());
            }
        }
        Ok(worst)
    }

    /// `sum_N weight_N T_N` with the result marked as averaged.
    pub fn weighted_sum<'a>(order: usize, terms: impl IntoIterator<Item = (f64, &'a Self)>) -> Result<Self> {
        let mut out = Self::zeros(order, None)?;
        for (w, t) in terms {
            if t.order != order {
                return Err(Error::DimensionMismatch {
                    expected: order,
                    found: t.order,
                });
            }
            for (o, x) in out.data.iter_mut().zip(&t.data) {
                *o += x * w;
            }
        }
        Ok(out)
    }
}

pub(crate) fn pow3(order: usize) -> usize {
    3usize.pow(order as u32)
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_TENSOR_ORDER {
        Err(Error::OrderTooLarge {
            order,
            cap: MAX_TENSOR_ORDER,
        })
    } else {
        Ok(())
    }
}

fn flat_index(indices: &[usize], order: usize) -> Result<usize> {
    if indices.len() != order {
        return Err(Error::DimensionMismatch {
            expected: order,
            found: indices.len(),
        });
    }
    if let Some(&bad) = indices.iter().find(|&&j| !(1..=3).contains(&j)) {
        return Err(Error::InvalidStokesIndex(bad));
    }
    Ok(flat_unchecked(indices))
}

fn flat_unchecked(indices: &[usize]) -> usize {
    indices.iter().fold(0, |acc, &j| acc * 3 + (j - 1))
}

/// 1-based indices of a flat position, leftmost first.
pub fn multi_index(mut flat: usize, order: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in idx.iter_mut().rev() {
        *slot = flat % 3 + 1;
        flat /= 3;
    }
    idx
}

/// Direct tensor `Tr(rho S_j1 ... S_jr)` by a prefix-sharing walk over the
/// index tree.
pub fn tensor(state: &ManifoldState, order: usize) -> Result<PolarizationTensor> {
    check_order(order)?;
    let n = state.photons();
    if order == 0 {
        return Ok(PolarizationTensor::unit(Some(n)));
    }
    let s = stokes_triple(n)?;
    let mats = [s[0].matrix(), s[1].matrix(), s[2].matrix()];
    let mut data = vec![c(0.0, 0.0); pow3(order)];
    let rho = state.density();
    fill(&rho, &mats, order, 0, &mut data);
    PolarizationTensor::from_elements(order, Some(n), data)
}

fn fill(prefix: &CMatrix, mats: &[&CMatrix; 3], depth: usize, base: usize, out: &mut [Complex64]) {
    for (j, s) in mats.iter().enumerate() {
        let next = prefix * *s;
        let pos = base * 3 + j;
        if depth == 1 {
            out[pos] = trace(&next);
        } else {
            fill(&next, mats, depth - 1, pos, out);
        }
    }
}

/// Photon-number-averaged tensor `sum_N p_N T^(r,N)`.
pub fn averaged_tensor(state: &BlockDiagonalState, order: usize) -> Result<PolarizationTensor> {
    let parts = state
        .blocks()
        .iter()
        .map(|b| Ok((b.probability, tensor(&b.state, order)?)))
        .collect::<Result<Vec<_>>>()?;
    PolarizationTensor::weighted_sum(order, parts.iter().map(|(p, t)| (*p, t)))
}

/// `sum n^(1)_j1 ... n^(r)_jr T_{j1..jr}`, i.e. `<S_n1 ... S_nr>`.
pub fn multi_direction_expectation(t: &PolarizationTensor, directions: &[Direction]) -> Result<Complex64> {
    if directions.len() != t.order {
        return Err(Error::DimensionMismatch {
            expected: t.order,
            found: directions.len(),
        });
    }
    let mut acc = c(0.0, 0.0);
    for (flat, value) in t.data.iter().enumerate() {
        let idx = multi_index(flat, t.order);
        let w: f64 = idx
            .iter()
            .zip(directions)
            .map(|(&j, d)| d.components()[j - 1])
            .product();
        acc += value * w;
    }
    Ok(acc)
}

/// Order `r - 1` tensor recovered from commutators of neighbouring indices,
/// checked for agreement across every insertion slot.
pub fn tensor_descend(t: &PolarizationTensor) -> Result<PolarizationTensor> {
    if t.order < 2 {
        return Err(Error::InvalidParameter(alloc::format!(
            "descent needs order >= 2, got {}",
            t.order
        )));
    }
    let lower = t.order - 1;
    let scale = t.max_abs().max(1.0);
    let mut data = vec![c(0.0, 0.0); pow3(lower)];
    for (flat, slot) in data.iter_mut().enumerate() {
        let idx = multi_index(flat, lower);
        let mut first = None;
        for p in 0..lower {
            let j = idx[p];
            let mu = j % 3 + 1;
            let nu = mu % 3 + 1;
            let mut a = idx.clone();
            a.splice(p..p + 1, [mu, nu]);
            let mut b = idx.clone();
            b.splice(p..p + 1, [nu, mu]);
            let value = (t.at(&a) - t.at(&b)) / (I * 2.0);
            match first {
                None => first = Some(value),
                Some(f) if (f - value).norm() > 1e-9 * scale => {
                    return Err(Error::InconsistentTensor(alloc::format!(
                        "descent of element {idx:?} depends on the slot used"
                    )));
                }
                Some(_) => {}
            }
        }
        *slot = first.unwrap_or_default();
    }
    PolarizationTensor::from_elements(lower, t.photons, data)
}

fn check_pair(m: &MomentComponents, lower: &PolarizationTensor, order: usize) -> Result<()> {
    if m.order() != order {
        return Err(Error::DimensionMismatch {
            expected: order,
            found: m.order(),
        });
    }
    if lower.order + 1 != order {
        return Err(Error::MissingOrder(order - 1));
    }
    if let (Some(a), Some(b)) = (m.photons(), lower.photons) {
        if a != b {
            return Err(Error::InvalidParameter(alloc::format!(
                "components for N = {a} combined with a tensor for N = {b}"
            )));
        }
    }
    Ok(())
}

/// Second-order tensor written out from `M^(2)` and the Stokes vector.
pub fn assemble_tensor_order2(m: &MomentComponents, first: &PolarizationTensor) -> Result<PolarizationTensor> {
    check_pair(m, first, 2)?;
    let s = |j: usize| first.at(&[j]);
    let r = |x: f64| c(x, 0.0);
    let data = vec![
        r(m.get(2, 0)),
        r(m.get(1, 1) / 2.0) + I * s(3),
        r(m.get(1, 0) / 2.0) - I * s(2),
        r(m.get(1, 1) / 2.0) - I * s(3),
        r(m.get(0, 2)),
        r(m.get(0, 1) / 2.0) + I * s(1),
        r(m.get(1, 0) / 2.0) + I * s(2),
        r(m.get(0, 1) / 2.0) - I * s(1),
        r(m.get(0, 0)),
    ];
    PolarizationTensor::from_elements(2, m.photons().or(first.photons), data)
}

/// Third-order tensor written out from `M^(3)` and `T^(2)`.
pub fn assemble_tensor_order3(m: &MomentComponents, second: &PolarizationTensor) -> Result<PolarizationTensor> {
    check_pair(m, second, 3)?;
    let t = |a: usize, b: usize| second.at(&[a, b]);
    let mm = |k: usize, l: usize| c(m.get(k, l), 0.0);
    let third = |x: Complex64| x / 3.0;
    let sixth = |x: Complex64| x / 6.0;
    let data = vec![
        // (1, 1, j)
        mm(3, 0),
        third(mm(2, 1) + I * (t(1, 3) * 4.0 + t(3, 1) * 2.0)),
        third(mm(2, 0) - I * (t(1, 2) * 4.0 + t(2, 1) * 2.0)),
        // (1, 2, j)
        third(mm(2, 1) + I * (t(3, 1) * 2.0 - t(1, 3) * 2.0)),
        third(mm(1, 2) + I * (t(2, 3) * 2.0 + t(3, 2) * 4.0)),
        sixth(mm(1, 1)) + I * (t(1, 1) - t(2, 2) + t(3, 3)),
        // (1, 3, j)
        third(mm(2, 0) + I * (t(1, 2) * 2.0 - t(2, 1) * 2.0)),
        sixth(mm(1, 1)) + I * (-t(1, 1) - t(2, 2) + t(3, 3)),
        third(mm(1, 0) - I * (t(3, 2) * 2.0 + t(2, 3) * 4.0)),
        // (2, 1, j)
        third(mm(2, 1) - I * (t(1, 3) * 2.0 + t(3, 1) * 4.0)),
        third(mm(1, 2) + I * (t(2, 3) * 2.0 - t(3, 2) * 2.0)),
        sixth(mm(1, 1)) + I * (t(1, 1) - t(2, 2) - t(3, 3)),
        // (2, 2, j)
        third(mm(1, 2) - I * (t(2, 3) * 4.0 + t(3, 2) * 2.0)),
        mm(0, 3),
        third(mm(0, 2) + I * (t(2, 1) * 4.0 + t(1, 2) * 2.0)),
        // (2, 3, j)
        sixth(mm(1, 1)) + I * (t(1, 1) + t(2, 2) - t(3, 3)),
        third(mm(0, 2) + I * (t(1, 2) * 2.0 - t(2, 1) * 2.0)),
        third(mm(0, 1) + I * (t(3, 1) * 2.0 + t(1, 3) * 4.0)),
        // (3, 1, j)
        third(mm(2, 0) + I * (t(1, 2) * 2.0 + t(2, 1) * 4.0)),
        sixth(mm(1, 1)) + I * (-t(1, 1) + t(2, 2) + t(3, 3)),
        third(mm(1, 0) + I * (t(2, 3) * 2.0 - t(3, 2) * 2.0)),
        // (3, 2, j)
        sixth(mm(1, 1)) + I * (-t(1, 1) + t(2, 2) - t(3, 3)),
        third(mm(0, 2) - I * (t(2, 1) * 2.0 + t(1, 2) * 4.0)),
        third(mm(0, 1) + I * (t(3, 1) * 2.0 - t(1, 3) * 2.0)),
        // (3, 3, j)
        third(mm(1, 0) + I * (t(3, 2) * 4.0 + t(2, 3) * 2.0)),
        third(mm(0, 1) - I * (t(3, 1) * 4.0 + t(1, 3) * 2.0)),
        mm(0, 0),
    ];
    PolarizationTensor::from_elements(3, m.photons().or(second.photons), data)
}

/// Order-`r` tensor from `M^(r)` and `T^(r-1)` at any order. Each element is
/// bubble-sorted to the ordered representative of its class; every adjacent
/// swap contributes a commutator term from `T^(r-1)`, and the representative
/// follows from the class sum.
pub fn assemble_tensor(m: &MomentComponents, lower: &PolarizationTensor) -> Result<PolarizationTensor> {
    let order = m.order();
    check_order(order)?;
    if order == 0 {
        return Ok(PolarizationTensor::unit(m.photons()));
    }
    check_pair(m, lower, order)?;
    let len = pow3(order);
    let mut offsets = vec![c(0.0, 0.0); len];
    for (flat, offset) in offsets.iter_mut().enumerate() {
        let mut idx = multi_index(flat, order);
        let mut acc = c(0.0, 0.0);
        while let Some(p) = (0..order - 1).find(|&p| idx[p] > idx[p + 1]) {
            let (a, b) = (idx[p], idx[p + 1]);
            let cc = third(a, b);
            let mut l = idx.clone();
            l.splice(p..p + 2, [cc]);
            acc += I * 2.0 * levi_civita(a, b, cc) * lower.at(&l);
            idx.swap(p, p + 1);
        }
        *offset = acc;
    }
    let mut class_sum = vec![c(0.0, 0.0); MomentComponents::count(order)];
    let mut class_size = vec![0usize; MomentComponents::count(order)];
    let class_of = |flat: usize| {
        let idx = multi_index(flat, order);
        let k = idx.iter().filter(|&&j| j == 1).count();
        let l = idx.iter().filter(|&&j| j == 2).count();
        MomentComponents::position(order, k, l)
    };
    for (flat, off) in offsets.iter().enumerate() {
        let cl = class_of(flat);
        class_sum[cl] += off;
        class_size[cl] += 1;
    }
    let data: Vec<Complex64> = (0..len)
        .map(|flat| {
            let cl = class_of(flat);
            let reference = (c(m.values()[cl], 0.0) - class_sum[cl]) / class_size[cl] as f64;
            reference + offsets[flat]
        })
        .collect();
    let out = PolarizationTensor::from_elements(order, m.photons().or(lower.photons), data)?;
    let defect = out.hermiticity_defect();
    if defect > 1e-9 * out.max_abs().max(1.0) {
        return Err(Error::InconsistentTensor(alloc::format!(
            "assembled order-{order} tensor violates Hermiticity by {defect:e}"
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::stokes_in_direction;
    use crate::menagerie::twin_fock;
    use crate::moments::components::moment_components;
    use crate::random::{random_direction, random_mixed_state, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn pole_state_second_order() {
        let t = tensor(&ManifoldState::fock(2, 0), 2).unwrap();
        let expected = [c(2.0, 0.0), c(0.0, 2.0), c(0.0, 0.0), c(0.0, -2.0), c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)];
        for (a, b) in t.elements().iter().zip(expected) {
            assert!((a - b).norm() < 1e-12);
        }
        assert!((t.get(&[1, 2]).unwrap() - c(0.0, 2.0)).norm() < 1e-12);
        assert!(t.get(&[1, 4]).is_err());
        assert!(t.get(&[1]).is_err());
    }

    #[test]
    fn vacuum_and_order_cap() {
        for r in 1..=4 {
            assert_eq!(tensor(&ManifoldState::vacuum(), r).unwrap().max_abs(), 0.0);
        }
        assert!(matches!(
            tensor(&ManifoldState::vacuum(), 7),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn hermiticity_and_descent_on_random_states() {
        let mut rng = rng();
        for trial in 0..200 {
            let n = trial % 7;
            let st = random_mixed_state(&mut rng, n, 1 + trial % 3).unwrap();
            let r = 1 + trial % 4;
            let t = tensor(&st, r).unwrap();
            let lower = tensor(&st, r - 1).unwrap();
            assert!(t.hermiticity_defect() < 1e-12);
            assert!(t.descent_defect(&lower).unwrap() < 1e-10);
        }
    }

    #[test]
    fn multi_direction_matches_operator_products() {
        let mut rng = rng();
        for n in 0..5 {
            let st = random_pure_state(&mut rng, n).unwrap();
            let dirs: Vec<Direction> = (0..3).map(|_| random_direction(&mut rng)).collect();
            let t = tensor(&st, 3).unwrap();
            let got = multi_direction_expectation(&t, &dirs).unwrap();
            let mut op = CMatrix::identity(n + 1, n + 1);
            for d in &dirs {
                op *= stokes_in_direction(d, n).unwrap().matrix();
            }
            assert!((got - st.expectation(&op)).norm() < 1e-10);
            let same = [dirs[0], dirs[0], dirs[0]];
            let profile = st.expectation(stokes_in_direction(&dirs[0], n).unwrap().pow(3).matrix());
            assert!((multi_direction_expectation(&t, &same).unwrap() - profile).norm() < 1e-10);
        }
        let t = tensor(&ManifoldState::fock(2, 0), 2).unwrap();
        let e = [Direction::axis(1).unwrap(), Direction::axis(2).unwrap()];
        assert!((multi_direction_expectation(&t, &e).unwrap() - c(0.0, 2.0)).norm() < 1e-12);
        assert!(multi_direction_expectation(&t, &e[..1]).is_err());
    }

    #[test]
    fn descend_recovers_lower_orders() {
        let t2 = tensor(&ManifoldState::fock(2, 0), 2).unwrap();
        let t1 = tensor_descend(&t2).unwrap();
        assert!(t1.max_abs_diff(&PolarizationTensor::from_elements(1, Some(2), vec![c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]).unwrap()) < 1e-12);
        let mut rng = rng();
        for n in 1..5 {
            let st = random_mixed_state(&mut rng, n, 2).unwrap();
            let t3 = tensor(&st, 3).unwrap();
            let twice = tensor_descend(&tensor_descend(&t3).unwrap()).unwrap();
            assert!(twice.max_abs_diff(&tensor(&st, 1).unwrap()) < 1e-10);
        }
        let mut broken = tensor(&twin_fock(2), 3).unwrap();
        broken.data[5] += c(0.5, 0.0);
        assert!(matches!(tensor_descend(&broken), Err(Error::InconsistentTensor(_))));
        assert!(tensor_descend(&tensor(&twin_fock(1), 1).unwrap()).is_err());
    }

    #[test]
    fn displayed_assemblies_match_direct_and_general() {
        let mut rng = rng();
        for n in 0..=5 {
            let st = random_mixed_state(&mut rng, n, 2).unwrap();
            let t1 = tensor(&st, 1).unwrap();
            let t2 = tensor(&st, 2).unwrap();
            let t3 = tensor(&st, 3).unwrap();
            let m2 = moment_components(&t2).unwrap();
            let m3 = moment_components(&t3).unwrap();
            assert!(assemble_tensor_order2(&m2, &t1).unwrap().max_abs_diff(&t2) < 1e-10);
            assert!(assemble_tensor(&m2, &t1).unwrap().max_abs_diff(&t2) < 1e-10);
            assert!(assemble_tensor_order3(&m3, &t2).unwrap().max_abs_diff(&t3) < 1e-9);
            assert!(assemble_tensor(&m3, &t2).unwrap().max_abs_diff(&t3) < 1e-9);
        }
        let t1 = tensor(&ManifoldState::vacuum(), 1).unwrap();
        let m2 = moment_components(&tensor(&ManifoldState::vacuum(), 2).unwrap()).unwrap();
        assert_eq!(assemble_tensor_order2(&m2, &t1).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn general_assembly_climbs_to_order_six() {
        let mut rng = rng();
        let st = random_mixed_state(&mut rng, 4, 3).unwrap();
        let mut lower = PolarizationTensor::unit(Some(4));
        for r in 1..=6 {
            let direct = tensor(&st, r).unwrap();
            let m = moment_components(&direct).unwrap();
            lower = assemble_tensor(&m, &lower).unwrap();
            assert!(lower.max_abs_diff(&direct) < 1e-8 * direct.max_abs().max(1.0), "r={r}");
        }
    }

    #[test]
    fn averaged_tensor_is_weighted() {
        let st = BlockDiagonalState::new(vec![
            crate::menagerie::Block { probability: 0.25, state: ManifoldState::fock(1, 0) },
            crate::menagerie::Block { probability: 0.75, state: ManifoldState::fock(0, 2) },
        ])
        .unwrap();
        let t = averaged_tensor(&st, 1).unwrap();
        assert_eq!(t.photons(), None);
        assert!((t.get(&[3]).unwrap() - c(0.25 - 1.5, 0.0)).norm() < 1e-12);
        let t0 = averaged_tensor(&st, 0).unwrap();
        assert!((t0.get(&[]).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }
}
