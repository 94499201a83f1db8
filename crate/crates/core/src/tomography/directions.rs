use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::fock::Direction;
use crate::linalg::{null_space, numerical_rank, singular_values};
use crate::moments::{laplacian_map, MomentComponents};

/// Relative singular-value threshold for design-matrix rank.
pub const RANK_TOL: f64 = 1e-10;

const DESCENT_ITERATIONS: usize = 3000;
const DESCENT_SEED: u64 = 0x5709_4e55;

/// Why a direction set was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionRationale {
    /// `e1, e2, e3` for first order.
    StokesAxes,
    /// Five icosahedral lines for second order.
    Icosahedral,
    /// Axes plus the four body diagonals; only four independent measurements.
    SymmetricRankDeficient,
    /// Third-order working set tuned for conditioning.
    ConditionedFallback,
    /// Conditioning-optimized set for orders without a named choice.
    GenericConditioned,
}

impl DirectionRationale {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::StokesAxes => "stokes-axes",
            Self::Icosahedral => "icosahedral",
            Self::SymmetricRankDeficient => "symmetric-rank-deficient",
            Self::ConditionedFallback => "conditioned-fallback",
            Self::GenericConditioned => "generic-conditioned-extension",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub order: usize,
    pub directions: Vec<Direction>,
    pub rationale: DirectionRationale,
    /// Numerical rank of the reduced design.
    pub rank: usize,
    pub condition_number: f64,
}

impl DirectionSet {
    fn new(order: usize, directions: Vec<Direction>, rationale: DirectionRationale) -> Self {
        let sv = design_singular_values(&directions, order);
        let rank = numerical_rank(&sv, RANK_TOL);
        let condition_number = condition(&sv, order);
        Self {
            order,
            directions,
            rationale,
            rank,
            condition_number,
        }
    }

    pub fn is_rank_deficient(&self) -> bool {
        self.rank < 2 * self.order + 1
    }
}

fn condition(sv: &[f64], order: usize) -> f64 {
    let needed = 2 * order + 1;
    match (sv.first(), sv.get(needed - 1)) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Rows of monomials `n1^k n2^l n3^(r-k-l)`, one per direction.
pub fn design_matrix(directions: &[Direction], order: usize) -> DMatrix<f64> {
    let cols = MomentComponents::count(order);
    let mut d = DMatrix::zeros(directions.len(), cols);
    for (i, n) in directions.iter().enumerate() {
        for (j, v) in MomentComponents::monomials(order, n).into_iter().enumerate() {
            d[(i, j)] = v;
        }
    }
    d
}

/// Orthonormal basis of the component directions left free by the Casimir
/// constraints, `2r + 1` columns.
pub fn constraint_basis(order: usize) -> DMatrix<f64> {
    if order < 2 {
        let m = MomentComponents::count(order);
        return DMatrix::identity(m, m);
    }
    let l = laplacian_map(order).unwrap_or_else(|_| DMatrix::zeros(0, MomentComponents::count(order)));
    null_space(&l, RANK_TOL)
}

/// Design restricted to the constraint-free subspace.
pub fn reduced_design(directions: &[Direction], order: usize) -> DMatrix<f64> {
    design_matrix(directions, order) * constraint_basis(order)
}

/// Singular values of the reduced design, descending, padded with zeros up to
/// `2r + 1` entries.
pub fn design_singular_values(directions: &[Direction], order: usize) -> Vec<f64> {
    let mut sv = singular_values(&reduced_design(directions, order));
    sv.resize((2 * order + 1).max(sv.len()), 0.0);
    sv
}

pub fn stokes_axes() -> Vec<Direction> {
    (1..=3).filter_map(|j| Direction::axis(j).ok()).collect()
}

/// `(0, +-2, 1+sqrt5)`, `(+-2, 1+sqrt5, 0)`, `(1+sqrt5, 0, 2)` over
/// `sqrt(10 + 2 sqrt5)`.
pub fn icosahedral_directions() -> Vec<Direction> {
    let g = 1.0 + Float::sqrt(5.0);
    let norm = Float::sqrt(10.0 + 2.0 * Float::sqrt(5.0));
    [
        (0.0, 2.0, g),
        (0.0, -2.0, g),
        (2.0, g, 0.0),
        (-2.0, g, 0.0),
        (g, 0.0, 2.0),
    ]
    .iter()
    .filter_map(|&(x, y, z)| Direction::new(x / norm, y / norm, z / norm).ok())
    .collect()
}

fn diagonals() -> Vec<Direction> {
    let s = 1.0 / Float::sqrt(3.0);
    [(s, s, s), (-s, s, s), (s, -s, s), (-s, -s, s)]
        .iter()
        .filter_map(|&(x, y, z)| Direction::new(x, y, z).ok())
        .collect()
}

/// Axes plus the four body-diagonal lines.
pub fn symmetric_third_order_directions() -> Vec<Direction> {
    let mut d = stokes_axes();
    d.extend(diagonals());
    d
}

fn tilt_toward_diagonal(e: &Direction, angle: f64) -> Direction {
    let s = 1.0 / Float::sqrt(3.0);
    let d = [s, s, s];
    let ec = e.components();
    let dot: f64 = ec.iter().zip(&d).map(|(a, b)| a * b).sum();
    let w: Vec<f64> = d.iter().zip(&ec).map(|(a, b)| a - b * dot).collect();
    let wn = Float::sqrt(w.iter().map(|x| x * x).sum::<f64>());
    let (c, sn) = (Float::cos(angle), Float::sin(angle));
    Direction::normalized(
        c * ec[0] + sn * w[0] / wn,
        c * ec[1] + sn * w[1] / wn,
        c * ec[2] + sn * w[2] / wn,
    )
    .unwrap_or(*e)
}

fn perturbation_descent(start: Vec<Direction>, order: usize, rng: &mut ChaCha8Rng, base_step: f64) -> Vec<Direction> {
    let cost = |dirs: &[Direction]| condition(&design_singular_values(dirs, order), order);
    let mut current = start;
    let mut best = cost(&current);
    for it in 0..DESCENT_ITERATIONS {
        let step = base_step * (1.0 - it as f64 / DESCENT_ITERATIONS as f64) + 0.01;
        let i = rng.random_range(0..current.len());
        let c = current[i].components();
        let mut gauss = || -> f64 { rng.sample(StandardNormal) };
        let moved = Direction::normalized(c[0] + step * gauss(), c[1] + step * gauss(), c[2] + step * gauss());
        let Ok(moved) = moved else { continue };
        let mut candidate = current.clone();
        candidate[i] = moved;
        let value = cost(&candidate);
        if value < best {
            best = value;
            current = candidate;
        }
    }
    current
}

/// Axes tilted 30 degrees toward the diagonal plus the four diagonals,
/// then a seeded random-perturbation descent on the condition number.
pub fn third_order_fallback_directions() -> Vec<Direction> {
    let mut start: Vec<Direction> = stokes_axes()
        .iter()
        .map(|e| tilt_toward_diagonal(e, PI / 6.0))
        .collect();
    start.extend(diagonals());
    let mut rng = ChaCha8Rng::seed_from_u64(DESCENT_SEED ^ 3);
    perturbation_descent(start, 3, &mut rng, 0.2)
}

/// `2r + 1` directions from a seeded random start refined by the same
/// descent.
pub fn generic_directions(order: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<Direction> = (0..2 * order + 1)
        .map(|_| loop {
            let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            if let Ok(d) = Direction::normalized(v[0], v[1], v[2]) {
                break d;
            }
        })
        .collect();
    perturbation_descent(start, order, &mut rng, 0.3)
}

/// Candidate sets for an order. Third order returns the symmetric set
/// (flagged rank deficient) followed by the working fallback.
pub fn choose_directions(order: usize) -> Result<Vec<DirectionSet>> {
    Ok(match order {
        0 => {
            return Err(Error::InvalidParameter("measurement directions need order >= 1".into()));
        }
        1 => alloc::vec![DirectionSet::new(1, stokes_axes(), DirectionRationale::StokesAxes)],
        2 => alloc::vec![DirectionSet::new(2, icosahedral_directions(), DirectionRationale::Icosahedral)],
        3 => alloc::vec![
            DirectionSet::new(3, symmetric_third_order_directions(), DirectionRationale::SymmetricRankDeficient),
            DirectionSet::new(3, third_order_fallback_directions(), DirectionRationale::ConditionedFallback),
        ],
        r => alloc::vec![DirectionSet::new(
            r,
            generic_directions(r, DESCENT_SEED ^ r as u64),
            DirectionRationale::GenericConditioned,
        )],
    })
}

/// First full-rank set for an order.
pub fn working_directions(order: usize) -> Result<DirectionSet> {
    choose_directions(order)?
        .into_iter()
        .find(|s| !s.is_rank_deficient())
        .ok_or(Error::InvalidParameter(alloc::format!(
            "no full-rank direction set for order {order}"
        )))
}
