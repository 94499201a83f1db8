use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use num_traits::Float;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{su2_unitary, Direction, EulerAngles};
use crate::linalg::powi;
use crate::menagerie::{BlockDiagonalState, ManifoldState};

/// One wave-plate setting: the measured direction, the number of shots and
/// the RNG coordinates `(seed, stream)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSetting {
    pub direction: Direction,
    pub shots: u64,
    pub seed: u64,
    /// Setting index, used as the ChaCha stream.
    pub stream: u64,
}

impl MeasurementSetting {
    pub fn new(direction: Direction, shots: u64, seed: u64, stream: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::InvalidParameter("a setting needs at least one shot".into()));
        }
        Ok(Self {
            direction,
            shots,
            seed,
            stream,
        })
    }

    /// `(Phi, Theta, 0)` rotating `e3` onto the direction.
    pub fn euler_angles(&self) -> EulerAngles {
        self.direction.euler_angles()
    }
}

/// Counts of joint outcomes `(N, s)` with `s = N - 2k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub setting: MeasurementSetting,
    pub counts: BTreeMap<(usize, i64), u64>,
}

impl MeasurementRecord {
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn manifold_total(&self, photons: usize) -> u64 {
        self.counts
            .range((photons, i64::MIN)..=(photons, i64::MAX))
            .map(|(_, c)| c)
            .sum()
    }

    pub fn manifolds(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.counts.keys().map(|k| k.0).collect();
        v.dedup();
        v
    }

    /// Adds the counts of another record of the same setting.
    pub fn merge(&mut self, other: &MeasurementRecord) {
        for (k, c) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += c;
        }
    }
}

/// Eigenvalue `N - 2k` of `S_n` on manifold `N`.
pub fn eigenvalue(photons: usize, k: usize) -> i64 {
    photons as i64 - 2 * k as i64
}

/// `p(s = N - 2k) = <k| U^dag rho U |k>` with `U = U(Phi, Theta, 0)`, whose
/// columns are the eigenvectors of `S_n`.
pub fn outcome_distribution(state: &ManifoldState, direction: &Direction) -> Result<Vec<f64>> {
    let u = su2_unitary(&direction.euler_angles(), state.photons())?;
    let m = u.matrix().adjoint() * state.density() * u.matrix();
    Ok((0..=state.photons()).map(|k| m[(k, k)].re.max(0.0)).collect())
}

/// `sum_s p(s) s^r`.
pub fn distribution_moment(probabilities: &[f64], photons: usize, order: usize) -> f64 {
    probabilities
        .iter()
        .enumerate()
        .map(|(k, p)| p * powi(eigenvalue(photons, k) as f64, order))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointOutcome {
    pub photons: usize,
    pub eigenvalue: i64,
    pub probability: f64,
}

/// Joint law of `(N, s)`, manifold by manifold.
pub fn joint_distribution(state: &BlockDiagonalState, direction: &Direction) -> Result<Vec<JointOutcome>> {
    let mut out = Vec::new();
    for b in state.blocks() {
        let n = b.photons();
        for (k, p) in outcome_distribution(&b.state, direction)?.into_iter().enumerate() {
            out.push(JointOutcome {
                photons: n,
                eigenvalue: eigenvalue(n, k),
                probability: b.probability * p,
            });
        }
    }
    Ok(out)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * Float::powi(2.0, -53)
}

/// Shots `range` of a setting. Shot `i` reads the 64-bit word at position
/// `2i` of stream `setting.stream` under `setting.seed`, so any split of the
/// shots into ranges merges to the same record.
pub fn simulate_shot_range(
    state: &BlockDiagonalState,
    setting: &MeasurementSetting,
    range: Range<u64>,
) -> Result<MeasurementRecord> {
    let outcomes = joint_distribution(state, &setting.direction)?;
    let mut cumulative = Vec::with_capacity(outcomes.len());
    let mut acc = 0.0;
    for o in &outcomes {
        acc += o.probability;
        cumulative.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(setting.seed);
    rng.set_stream(setting.stream);
    rng.set_word_pos(2 * range.start as u128);
    let mut tally = alloc::vec![0u64; outcomes.len()];
    for _ in range {
        let u = uniform(&mut rng) * total;
        let i = cumulative.partition_point(|&c| c <= u).min(outcomes.len() - 1);
        tally[i] += 1;
    }
    let mut counts = BTreeMap::new();
    for (o, c) in outcomes.iter().zip(tally) {
        if c > 0 {
            *counts.entry((o.photons, o.eigenvalue)).or_insert(0) += c;
        }
    }
    Ok(MeasurementRecord {
        setting: *setting,
        counts,
    })
}

/// All shots of a setting.
pub fn simulate_measurement(state: &BlockDiagonalState, setting: &MeasurementSetting) -> Result<MeasurementRecord> {
    simulate_shot_range(state, setting, 0..setting.shots)
}

/// Sample mean with its plug-in standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldMoments {
    pub photons: usize,
    pub count: u64,
    /// `count / shots`.
    pub probability: f64,
    pub moments: BTreeMap<usize, Estimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub shots: u64,
    pub manifolds: BTreeMap<usize, ManifoldMoments>,
}

impl EmpiricalMoments {
    /// Estimate of `<S_n^r>_N`; manifolds never observed are undefined.
    pub fn moment(&self, photons: usize, order: usize) -> Result<Estimate> {
        let m = self.manifolds.get(&photons).ok_or(Error::MissingManifold(photons))?;
        m.moments.get(&order).copied().ok_or(Error::MissingOrder(order))
    }

    pub fn probability(&self, photons: usize) -> f64 {
        self.manifolds.get(&photons).map_or(0.0, |m| m.probability)
    }
}

/// Per-manifold sample moments `sum s^r counts / n_N` for each requested
/// order, with standard errors `sqrt((<s^2r> - <s^r>^2) / n_N)`.
pub fn estimate_moments(record: &MeasurementRecord, orders: &[usize]) -> Result<EmpiricalMoments> {
    let shots = record.total();
    if shots == 0 {
        return Err(Error::InvalidParameter("empty measurement record".into()));
    }
    let mut manifolds = BTreeMap::new();
    for n in record.manifolds() {
        let count = record.manifold_total(n);
        let nf = count as f64;
        let mut moments = BTreeMap::new();
        for &r in orders {
            let mut m1 = 0.0;
            let mut m2 = 0.0;
            for (&(_, s), &c) in record.counts.range((n, i64::MIN)..=(n, i64::MAX)) {
                let v = powi(s as f64, r);
                m1 += v * c as f64;
                m2 += v * v * c as f64;
            }
            m1 /= nf;
            m2 /= nf;
            let var = (m2 - m1 * m1).max(0.0);
            moments.insert(
                r,
                Estimate {
                    value: m1,
                    std_error: Float::sqrt(var / nf),
                },
            );
        }
        manifolds.insert(
            n,
            ManifoldMoments {
                photons: n,
                count,
                probability: nf / shots as f64,
                moments,
            },
        );
    }
    Ok(EmpiricalMoments { shots, manifolds })
}
