//! Invariant suites run by `stokes-lab verify` and the acceptance tests.

use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use stokes_core::factorials::{expansion_coefficients, first_kind_explicit, ratio, CentralFactorialTable};
use stokes_core::fock::stokes_operator;
use stokes_core::linalg::{c, commutator, factorial_f64, max_abs, max_abs_diff, CMatrix};
use stokes_core::menagerie::{
    closed_form_profile, noon, polarization_sector, single_photon_density, su2_coherent, tmsv,
    transformed_twin_fock, twin_fock, two_mode_coherent, unpolarized_two_photon, Family,
};
use stokes_core::moments::{direct_profile, moment_components, tensor};
use stokes_core::random::{random_direction, random_mixed_state, random_pure_state};
use stokes_core::tomography::{
    choose_directions, closed_form_second_order, design_singular_values, icosahedral_directions, run_tomography,
    DirectionRationale, TomographyConfig,
};
use stokes_core::{Block, BlockDiagonalState, Direction, EulerAngles, ManifoldState};

pub const SUITES: &[&str] = &["algebra", "profiles", "recurrence", "factorials", "tomography"];

/// `|a - b| / max(|b|, 1)`.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }

    fn bound(name: impl Into<String>, worst: f64, tol: f64) -> Self {
        Self::new(name, worst <= tol, format!("worst {worst:.3e} (tolerance {tol:.0e})"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

pub fn run_suite(name: &str) -> anyhow::Result<Vec<Check>> {
    match name {
        "algebra" => algebra(10),
        "profiles" => profiles(8, 6, 100),
        "recurrence" => recurrence(6, 50),
        "factorials" => factorials(12),
        "tomography" => tomography(),
        other => anyhow::bail!("unknown suite `{other}`; expected one of {}", SUITES.join(", ")),
    }
}

/// Commutators, `[S0, Sj] = 0` and the Casimir identity for `N <= max_n`.
pub fn algebra(max_n: usize) -> anyhow::Result<Vec<Check>> {
    let mut comm: f64 = 0.0;
    let mut number: f64 = 0.0;
    let mut casimir: f64 = 0.0;
    for n in 0..=max_n {
        let s: Vec<CMatrix> = (0..4)
            .map(|j| stokes_operator(j, n).map(|o| o.into_matrix()))
            .collect::<Result<_, _>>()?;
        for (a, b, k) in [(1, 2, 3), (2, 3, 1), (3, 1, 2)] {
            comm = comm.max(max_abs_diff(&commutator(&s[a], &s[b]), &(&s[k] * c(0.0, 2.0))));
        }
        for j in 1..4 {
            number = number.max(max_abs(&commutator(&s[0], &s[j])));
        }
        let lhs = &s[1] * &s[1] + &s[2] * &s[2] + &s[3] * &s[3];
        let rhs = &s[0] * (&s[0] + CMatrix::identity(n + 1, n + 1) * c(2.0, 0.0));
        casimir = casimir.max(max_abs_diff(&lhs, &rhs));
    }
    Ok(vec![
        Check::bound(format!("[Sa, Sb] = 2i eps Sc, N <= {max_n}"), comm, 1e-10),
        Check::bound(format!("[S0, Sj] = 0, N <= {max_n}"), number, 1e-10),
        Check::bound(format!("S1^2 + S2^2 + S3^2 = S0(S0 + 2), N <= {max_n}"), casimir, 1e-10),
    ])
}

fn brute_block(state: &BlockDiagonalState, r: usize, d: &Direction) -> anyhow::Result<f64> {
    let mut acc = 0.0;
    for b in state.blocks() {
        acc += b.probability * direct_profile(&b.state, r, d)?;
    }
    Ok(acc)
}

/// Closed-form profiles of the five families against `Tr(rho S_n^r)`.
pub fn profiles(max_n: usize, max_order: usize, directions: usize) -> anyhow::Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e0f_11e5);
    let dirs: Vec<Direction> = (0..directions).map(|_| random_direction(&mut rng)).collect();
    let mut worst = [0.0f64; 5];
    for n in 0..=max_n {
        let (theta, phi) = (0.37 + 0.2 * n as f64, -1.1 + 0.5 * n as f64);
        let coh = su2_coherent(n, theta, phi)?;
        let noon_state = if n > 0 { Some(noon(n)?) } else { None };
        let twin = (n % 2 == 0).then(|| twin_fock(n / 2));
        for r in 0..=max_order {
            for d in &dirs {
                let fam = Family::Su2Coherent { photons: n, theta, phi };
                worst[0] = worst[0].max(relative_error(closed_form_profile(&fam, r, d)?, direct_profile(&coh, r, d)?));
                if let Some(st) = &noon_state {
                    let v = closed_form_profile(&Family::Noon { photons: n }, r, d)?;
                    worst[1] = worst[1].max(relative_error(v, direct_profile(st, r, d)?));
                }
                if let Some(st) = &twin {
                    let v = closed_form_profile(&Family::TwinFock { m: n / 2 }, r, d)?;
                    worst[2] = worst[2].max(relative_error(v, direct_profile(st, r, d)?));
                }
            }
        }
    }
    let coherent_mean = 1.5;
    let coherent = two_mode_coherent(coherent_mean, 30)?;
    let tmsv_mean = 0.1;
    let squeezed = polarization_sector(&tmsv(tmsv_mean, &[], 15)?)?;
    for r in 0..=max_order {
        for d in &dirs {
            let v = closed_form_profile(&Family::TwoModeCoherent { mean: coherent_mean }, r, d)?;
            worst[3] = worst[3].max(relative_error(v, brute_block(&coherent, r, d)?));
            let v = closed_form_profile(&Family::Tmsv { mean: tmsv_mean }, r, d)?;
            worst[4] = worst[4].max(relative_error(v, brute_block(&squeezed, r, d)?));
        }
    }
    let mut twin_law: f64 = 0.0;
    for m in 0..=max_n / 2 {
        let big_n = 2.0 * m as f64;
        for d in &dirs {
            let s2 = 1.0 - d.z() * d.z();
            let law = big_n * (big_n + 2.0) * s2 / 2.0;
            twin_law = twin_law.max(relative_error(direct_profile(&twin_fock(m), 2, d)?, law));
        }
    }
    let mut noon_law: f64 = 0.0;
    for n in (1..=max_n).step_by(2) {
        let st = noon(n)?;
        for j in 0..36 {
            let phi = 2.0 * PI * j as f64 / 36.0;
            let d = Direction::from_spherical(PI / 2.0, phi);
            let law = factorial_f64(n) * (n as f64 * phi).cos();
            noon_law = noon_law.max(relative_error(direct_profile(&st, n, &d)?, law));
        }
    }
    let scope = format!("N <= {max_n}, r <= {max_order}, {directions} directions");
    Ok(vec![
        Check::bound(format!("SU(2) coherent closed form, {scope}"), worst[0], 1e-9),
        Check::bound(format!("NOON closed form, {scope}"), worst[1], 1e-9),
        Check::bound(format!("twin-Fock closed form, {scope}"), worst[2], 1e-9),
        Check::bound(
            format!("two-mode coherent closed form, mean {coherent_mean}, r <= {max_order}"),
            worst[3],
            1e-9,
        ),
        Check::bound(format!("TMSV closed form, mean {tmsv_mean}, r <= {max_order}"), worst[4], 1e-9),
        Check::bound("twin-Fock <S_n^2> = N(N+2) sin^2(Theta) / 2", twin_law, 1e-9),
        Check::bound("odd NOON equatorial profile N! cos(N Phi)", noon_law, 1e-9),
    ])
}

/// Profile recurrence against matrix powers, plus the low-manifold closed
/// forms in exact arithmetic.
pub fn recurrence(max_n: usize, states: usize) -> anyhow::Result<Vec<Check>> {
    let table = CentralFactorialTable::new(max_n + 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ecc);
    let mut worst: f64 = 0.0;
    for n in 0..=max_n {
        for i in 0..states {
            let st = random_mixed_state(&mut rng, n, 1 + i % (n + 1))?;
            let d = random_direction(&mut rng);
            let lower: std::collections::BTreeMap<usize, f64> = (0..=n)
                .map(|r| direct_profile(&st, r, &d).map(|v| (r, v)))
                .collect::<Result<_, _>>()?;
            for target in 0..=n + 5 {
                let got = table.profile_recurrence(n, &lower, target)?;
                worst = worst.max(relative_error(got, direct_profile(&st, target, &d)?));
            }
        }
    }
    let mut symbolic = true;
    for r in 1..=12usize {
        let zero = table.profile_recurrence_symbolic(0, r)?;
        symbolic &= zero.is_empty();
        let one = table.profile_recurrence_symbolic(1, r)?;
        symbolic &= one.len() == 1 && one.get(&(r % 2)) == Some(&ratio(1, 1));
        if r > 2 {
            let two = table.profile_recurrence_symbolic(2, r)?;
            let base = 2 - r % 2;
            symbolic &= two.len() == 1 && two.get(&base) == Some(&ratio(1 << (r - base), 1));
        }
        if r > 3 {
            let three = table.profile_recurrence_symbolic(3, r)?;
            let p = 3i64.pow(r as u32);
            let expected = if r % 2 == 1 {
                [(1, ratio(27 - p, 24)), (3, ratio(p - 3, 24))]
            } else {
                [(0, ratio(9 - p, 8)), (2, ratio(p - 1, 8))]
            };
            symbolic &= three.len() == 2 && expected.iter().all(|(k, v)| three.get(k) == Some(v));
        }
    }
    Ok(vec![
        Check::bound(
            format!("profile recurrence, {states} states per N <= {max_n}, r <= N + 5"),
            worst,
            1e-9,
        ),
        Check::new(
            "symbolic recurrence closed forms, N <= 3",
            symbolic,
            if symbolic { "all coefficients exact" } else { "coefficient mismatch" },
        ),
    ])
}

/// Explicit formula against expansion coefficients, known values and the
/// inverse relation of the two tables.
pub fn factorials(max_n: usize) -> anyhow::Result<Vec<Check>> {
    let mut agree = true;
    for n in 0..=max_n {
        for (k, v) in expansion_coefficients(n).iter().enumerate() {
            agree &= *v == first_kind_explicit(n, k);
        }
    }
    let table = CentralFactorialTable::new(max_n)?;
    let f42 = table.first_kind(4, 2)?;
    let defect = table.inverse_defect();
    let inverse = defect == ratio(0, 1);
    Ok(vec![
        Check::new(
            format!("explicit f(n, k) equals expansion coefficients, n <= {max_n}"),
            agree,
            if agree { "exact agreement" } else { "mismatch" },
        ),
        Check::new("f(4, 2) = -1", f42 == ratio(-1, 1), format!("f(4, 2) = {f42}")),
        Check::new(
            format!("f and F mutually inverse, n <= {max_n}"),
            inverse,
            format!("defect {defect}"),
        ),
    ])
}

/// Menagerie states on `N <= 3` (single manifolds and mixtures).
pub fn menagerie_low_states() -> anyhow::Result<Vec<(String, BlockDiagonalState)>> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push((format!("su2-coherent N={n}"), BlockDiagonalState::single(su2_coherent(n, 1.1, -0.4)?)));
        out.push((format!("NOON N={n}"), BlockDiagonalState::single(noon(n)?)));
        out.push((format!("maximally mixed N={n}"), BlockDiagonalState::single(ManifoldState::maximally_mixed(n))));
    }
    out.push(("twin-Fock m=1".into(), BlockDiagonalState::single(twin_fock(1))));
    out.push((
        "rotated twin-Fock m=1".into(),
        BlockDiagonalState::single(transformed_twin_fock(1, &EulerAngles::new(0.4, 1.3, -0.2))?),
    ));
    out.push((
        "unpolarized two-photon".into(),
        BlockDiagonalState::single(unpolarized_two_photon(0.45, 0.7)?),
    ));
    out.push((
        "single-photon density".into(),
        BlockDiagonalState::single(single_photon_density(0.7, 0.2, -0.1)?),
    ));
    let weights = [0.4, 0.3, 0.2, 0.1];
    let blocks = (0..=3)
        .map(|n| Ok(Block { probability: weights[n], state: su2_coherent(n, 0.8, 0.3)? }))
        .collect::<anyhow::Result<Vec<_>>>()?;
    out.push(("coherent-like mixture N<=3".into(), BlockDiagonalState::new(blocks)?));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let blocks = (1..=3)
        .map(|n| Ok(Block { probability: n as f64 / 6.0, state: random_mixed_state(&mut rng, n, n + 1)? }))
        .collect::<anyhow::Result<Vec<_>>>()?;
    out.push(("random mixture N<=3".into(), BlockDiagonalState::new(blocks)?));
    Ok(out)
}

/// Largest trace distance between reconstructed and true manifold states.
pub fn worst_trace_distance(state: &BlockDiagonalState, config: &TomographyConfig) -> anyhow::Result<f64> {
    let res = run_tomography(state, config)?;
    let mut worst: f64 = 0.0;
    for m in &res.manifolds {
        let truth = state
            .block(m.photons)
            .map(|b| &b.state)
            .ok_or_else(|| anyhow::anyhow!("reconstructed an unpopulated manifold N={}", m.photons))?;
        worst = worst.max(m.state.trace_distance(truth)?);
    }
    Ok(worst)
}

pub fn tomography() -> anyhow::Result<Vec<Check>> {
    let mut worst: f64 = 0.0;
    let mut worst_name = String::new();
    for (name, st) in menagerie_low_states()? {
        let d = worst_trace_distance(&st, &TomographyConfig::default())?;
        if d >= worst {
            worst = d;
            worst_name = name;
        }
    }
    let ico = icosahedral_directions();
    let mut rng = ChaCha8Rng::seed_from_u64(0x2c0);
    let mut second: f64 = 0.0;
    for _ in 0..100 {
        let st = random_pure_state(&mut rng, 2)?;
        let q: Vec<f64> = ico.iter().map(|d| direct_profile(&st, 2, d)).collect::<Result<_, _>>()?;
        let q: [f64; 5] = q.try_into().map_err(|_| anyhow::anyhow!("expected five icosahedral lines"))?;
        let direct = moment_components(&tensor(&st, 2)?)?;
        second = second.max(closed_form_second_order(&q, 2).max_abs_diff(&direct));
    }
    let sets = choose_directions(3)?;
    let symmetric = sets
        .iter()
        .find(|s| s.rationale == DirectionRationale::SymmetricRankDeficient)
        .ok_or_else(|| anyhow::anyhow!("no symmetric third-order set"))?;
    let fallback = sets
        .iter()
        .find(|s| s.rationale == DirectionRationale::ConditionedFallback)
        .ok_or_else(|| anyhow::anyhow!("no third-order fallback set"))?;
    let sv = design_singular_values(&symmetric.directions, 3);
    let ratio5 = sv[4] / sv[0];
    Ok(vec![
        Check::bound(
            format!("exact end-to-end reconstruction, menagerie N <= 3 (worst: {worst_name})"),
            worst,
            1e-7,
        ),
        Check::bound("second-order closed form vs tensor path, 100 states", second, 1e-9),
        Check::new(
            "symmetric third-order set has rank 4",
            symmetric.rank == 4 && ratio5 < 1e-12,
            format!("rank {}, sigma5/sigma1 = {ratio5:.2e}", symmetric.rank),
        ),
        Check::new(
            "third-order fallback full rank, condition < 100",
            fallback.rank == 7 && fallback.condition_number < 100.0,
            format!("rank {}, condition {:.2}", fallback.rank, fallback.condition_number),
        ),
    ])
}
