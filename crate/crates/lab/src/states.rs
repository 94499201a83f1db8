//! Named state families as the command line exposes them.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail};
use serde_json::{json, Value};
use stokes_core::fock::max_manifold;
use stokes_core::menagerie::{
    noon, polarization_sector, su2_coherent, tmsv, twin_fock, two_mode_coherent, unpolarized_two_photon,
};
use stokes_core::{BlockDiagonalState, Error, ManifoldState};

use crate::io::{read_state, StateJson};

pub const FAMILIES: &[&str] = &[
    "noon",
    "su2-coherent",
    "fock",
    "twin-fock",
    "coherent",
    "tmsv",
    "unpolarized",
    "maximally-mixed",
];

/// Family parameters; unused ones are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StateParams {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub nbar: Option<f64>,
    pub mmax: Option<usize>,
    pub nmax: Option<usize>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub a: Option<f64>,
}

fn need<T: Copy>(value: Option<T>, flag: &str, family: &str) -> anyhow::Result<T> {
    value.ok_or_else(|| anyhow!("family `{family}` needs --{flag}"))
}

/// Tries truncations up to the manifold cap until the discarded tail is
/// within bounds.
fn auto_truncate<F>(explicit: Option<usize>, step: usize, mut build: F) -> anyhow::Result<(usize, BlockDiagonalState)>
where
    F: FnMut(usize) -> stokes_core::Result<BlockDiagonalState>,
{
    if let Some(t) = explicit {
        return Ok((t, build(t)?));
    }
    let mut last = None;
    let mut t = 0;
    while t * step <= max_manifold() {
        match build(t) {
            Ok(s) => return Ok((t, s)),
            Err(e @ Error::Truncation { .. }) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
        t += 1;
    }
    Err(last.map_or_else(|| anyhow!("no admissible truncation"), anyhow::Error::from))
}

/// Builds a named family, returning the state and the parameters actually
/// used.
pub fn build_family(family: &str, p: &StateParams) -> anyhow::Result<(BlockDiagonalState, BTreeMap<String, Value>)> {
    let mut params = BTreeMap::new();
    let state = match family {
        "noon" => {
            let n = need(p.n, "n", family)?;
            params.insert("n".into(), json!(n));
            BlockDiagonalState::single(noon(n)?)
        }
        "su2-coherent" => {
            let n = need(p.n, "n", family)?;
            let theta = p.theta.unwrap_or(0.0);
            let phi = p.phi.unwrap_or(0.0);
            params.insert("n".into(), json!(n));
            params.insert("theta".into(), json!(theta));
            params.insert("phi".into(), json!(phi));
            BlockDiagonalState::single(su2_coherent(n, theta, phi)?)
        }
        "fock" => {
            let n = need(p.n, "n", family)?;
            let k = p.k.unwrap_or(0);
            if k > n {
                bail!("--k {k} exceeds --n {n}");
            }
            params.insert("n".into(), json!(n));
            params.insert("k".into(), json!(k));
            BlockDiagonalState::single(ManifoldState::basis_state(n, k)?)
        }
        "twin-fock" => {
            let n = need(p.n, "n", family)?;
            if n % 2 == 1 {
                bail!("twin-Fock states need an even total photon number, got --n {n}");
            }
            params.insert("n".into(), json!(n));
            stokes_core::fock::check_manifold(n)?;
            BlockDiagonalState::single(twin_fock(n / 2))
        }
        "coherent" => {
            let nbar = need(p.nbar, "nbar", family)?;
            let (nmax, s) = auto_truncate(p.nmax, 1, |t| two_mode_coherent(nbar, t))?;
            params.insert("nbar".into(), json!(nbar));
            params.insert("nmax".into(), json!(nmax));
            s
        }
        "tmsv" => {
            let nbar = need(p.nbar, "nbar", family)?;
            let (mmax, s) = auto_truncate(p.mmax, 2, |t| polarization_sector(&tmsv(nbar, &[], t)?))?;
            params.insert("nbar".into(), json!(nbar));
            params.insert("mmax".into(), json!(mmax));
            s
        }
        "unpolarized" => {
            let a = need(p.a, "a", family)?;
            let theta = p.theta.unwrap_or(0.0);
            params.insert("a".into(), json!(a));
            params.insert("theta".into(), json!(theta));
            BlockDiagonalState::single(unpolarized_two_photon(a, theta)?)
        }
        "maximally-mixed" => {
            let n = need(p.n, "n", family)?;
            params.insert("n".into(), json!(n));
            stokes_core::fock::check_manifold(n)?;
            BlockDiagonalState::single(ManifoldState::maximally_mixed(n))
        }
        other => bail!("unknown state family `{other}`; expected one of {} or a .json file", FAMILIES.join(", ")),
    };
    Ok((state, params))
}

/// A family name, or a path to a state JSON file.
pub fn resolve(spec: &str, p: &StateParams) -> anyhow::Result<StateJson> {
    let path = Path::new(spec);
    if spec.ends_with(".json") || (path.exists() && !FAMILIES.contains(&spec)) {
        let state = read_state(path)?;
        let text = std::fs::read_to_string(path)?;
        let original: StateJson = serde_json::from_str(&text)?;
        return Ok(StateJson::from_state(&original.kind, original.params, &state));
    }
    let (state, params) = build_family(spec, p)?;
    Ok(StateJson::from_state(spec, params, &state))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_build() {
        let p = StateParams {
            n: Some(4),
            nbar: Some(0.5),
            a: Some(0.3),
            ..StateParams::default()
        };
        for f in FAMILIES {
            let (s, _) = build_family(f, &p).unwrap();
            assert!(!s.blocks().is_empty(), "{f}");
        }
        assert!(build_family("noon", &StateParams::default()).is_err());
        assert!(build_family("nope", &p).is_err());
        let odd = StateParams { n: Some(3), ..p.clone() };
        assert!(build_family("twin-fock", &odd).is_err());
    }

    #[test]
    fn truncation_is_chosen_automatically() {
        let p = StateParams {
            nbar: Some(2.0),
            ..StateParams::default()
        };
        let (s, params) = build_family("coherent", &p).unwrap();
        let nmax = params["nmax"].as_u64().unwrap() as usize;
        assert_eq!(s.max_photons(), nmax);
        let p = StateParams {
            nbar: Some(0.5),
            mmax: Some(16),
            ..StateParams::default()
        };
        let (s, _) = build_family("tmsv", &p).unwrap();
        assert!(s.manifolds().iter().all(|n| n % 2 == 0));
        assert!((s.probability(0) - 0.8).abs() < 1e-9);
    }
}
