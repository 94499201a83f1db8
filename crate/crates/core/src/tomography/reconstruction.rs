use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{c, complex_least_squares, hermitize, numerical_rank, project_psd, trace, CMatrix, CVector};
use crate::menagerie::ManifoldState;
use crate::moments::{
    assemble_tensor, assemble_tensor_order2, assemble_tensor_order3, ordered_product, MomentComponents,
    PolarizationTensor,
};

/// Tensors of orders `1..=R` from the matching component sets, climbing one
/// order at a time. Orders 2 and 3 use the written-out forms.
pub fn assemble_all_tensors(components: &[MomentComponents], photons: usize) -> Result<Vec<PolarizationTensor>> {
    let mut out: Vec<PolarizationTensor> = Vec::with_capacity(components.len());
    let mut lower = PolarizationTensor::unit(Some(photons));
    for (i, m) in components.iter().enumerate() {
        if m.order() != i + 1 {
            return Err(Error::MissingOrder(i + 1));
        }
        let t = match m.order() {
            2 => assemble_tensor_order2(m, &lower)?,
            3 => assemble_tensor_order3(m, &lower)?,
            _ => assemble_tensor(m, &lower)?,
        };
        let defect = t.hermiticity_defect();
        if defect > 1e-9 * t.max_abs().max(1.0) {
            return Err(Error::InconsistentTensor(alloc::format!(
                "order-{} tensor violates Hermiticity by {defect:e}",
                t.order()
            )));
        }
        out.push(t.clone());
        lower = t;
    }
    Ok(out)
}

/// Inverted density matrix with its physicality diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityReconstruction {
    pub state: ManifoldState,
    /// Hermitian, unit-trace solution before positivity was restored.
    pub raw: CMatrix,
    /// Trace distance moved by the positivity projection.
    pub projection_distance: f64,
    pub clipped: bool,
    /// Rank of the linear map `rho -> (Tr(rho O))` over the operator set.
    pub rank: usize,
}

/// `rho_N` from `Tr(rho O) = value` for `O` in the identity and the ordered
/// products `S1^k S2^l S3^(r-k-l)`, `r <= N`, whose values are the tensor
/// elements `T_{1..1 2..2 3..3}`.
pub fn reconstruct_density(tensors: &[PolarizationTensor], photons: usize) -> Result<DensityReconstruction> {
    let d = photons + 1;
    let mut rows: Vec<(CMatrix, f64)> = Vec::new();
    let mut rhs = Vec::new();
    rows.push((CMatrix::identity(d, d), 1.0));
    rhs.push(c(1.0, 0.0));
    for r in 1..=photons {
        let t = tensors
            .iter()
            .find(|t| t.order() == r)
            .ok_or(Error::MissingOrder(r))?;
        for (k, l) in MomentComponents::pairs(r) {
            let op = ordered_product(k, l, r, photons)?.into_matrix();
            let mut idx = alloc::vec![1; k];
            idx.extend(core::iter::repeat_n(2, l));
            idx.extend(core::iter::repeat_n(3, r - k - l));
            let scale = op.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
            rhs.push(t.at(&idx) / scale);
            rows.push((op, scale));
        }
    }
    let mut a = CMatrix::zeros(rows.len(), d * d);
    for (row, (op, scale)) in rows.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                a[(row, i * d + j)] = op[(j, i)] / *scale;
            }
        }
    }
    let (x, sv) = complex_least_squares(&a, &CVector::from_vec(rhs), 1e-12);
    let rank = numerical_rank(&sv, 1e-10);
    if rank < d * d {
        return Err(Error::Inversion(alloc::format!(
            "operator set spans rank {rank} of {} on manifold {photons}",
            d * d
        )));
    }
    let rho = CMatrix::from_fn(d, d, |i, j| x[i * d + j]);
    let h = hermitize(&rho);
    let tr = trace(&h).re;
    if tr.abs() < 1e-12 {
        return Err(Error::NotPhysical("reconstructed trace vanishes".into()));
    }
    let raw = h / c(tr, 0.0);
    let projected = project_psd(&raw);
    Ok(DensityReconstruction {
        state: ManifoldState::mixed(photons, projected.density.clone())?,
        raw,
        projection_distance: projected.distance,
        clipped: projected.clipped,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::menagerie::{single_photon_density, twin_fock};
    use crate::moments::{moment_components, tensor};
    use crate::random::{random_mixed_state, random_pure_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn direct(st: &ManifoldState) -> Vec<PolarizationTensor> {
        (1..=st.photons()).map(|r| tensor(st, r).unwrap()).collect()
    }

    #[test]
    fn assembled_tensors_match_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=4 {
            let st = random_mixed_state(&mut rng, n, 2).unwrap();
            let comps: Vec<MomentComponents> = direct(&st).iter().map(|t| moment_components(t).unwrap()).collect();
            let built = assemble_all_tensors(&comps, n).unwrap();
            for (a, b) in built.iter().zip(direct(&st)) {
                assert!(a.max_abs_diff(&b) < 1e-8 * b.max_abs().max(1.0));
            }
        }
        let st = ManifoldState::fock(1, 0);
        let comps = [moment_components(&tensor(&st, 1).unwrap()).unwrap()];
        let t = assemble_all_tensors(&comps, 1).unwrap();
        assert!((t[0].get(&[3]).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!(assemble_all_tensors(&comps[..0], 1).unwrap().is_empty());
    }

    #[test]
    fn single_photon_parameters() {
        let st = single_photon_density(0.8, 0.1, -0.3).unwrap();
        let rec = reconstruct_density(&direct(&st), 1).unwrap();
        let s = direct(&st)[0].clone();
        let pi0 = (1.0 + s.get(&[3]).unwrap().re) / 2.0;
        let r = s.get(&[1]).unwrap().re / 2.0;
        let i = -s.get(&[2]).unwrap().re / 2.0;
        assert!((pi0 - 0.8).abs() < 1e-12 && (r - 0.1).abs() < 1e-12 && (i + 0.3).abs() < 1e-12);
        assert!(rec.state.trace_distance(&st).unwrap() < 1e-10);
    }

    #[test]
    fn exact_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 0..=6 {
            let st = random_pure_state(&mut rng, n).unwrap();
            let rec = reconstruct_density(&direct(&st), n).unwrap();
            assert_eq!(rec.rank, (n + 1) * (n + 1));
            assert!(rec.state.trace_distance(&st).unwrap() < 1e-8, "N={n}");
        }
        for n in 1..=4 {
            let mixed = ManifoldState::maximally_mixed(n);
            let ts = direct(&mixed);
            for t in ts.iter().filter(|t| t.order() % 2 == 1) {
                let m = moment_components(t).unwrap();
                assert!(m.values().iter().all(|v| v.abs() < 1e-12));
            }
            let rec = reconstruct_density(&ts, n).unwrap();
            assert!(rec.state.trace_distance(&mixed).unwrap() < 1e-10);
        }
        assert!(matches!(
            reconstruct_density(&direct(&twin_fock(1))[..1], 2),
            Err(Error::MissingOrder(2))
        ));
    }
}
