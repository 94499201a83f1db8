//! Stokes moment profiles sampled on a `(Theta, Phi)` grid, written as CSV
//! or JSON depending on the file extension.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use stokes_core::{Direction, StokesProfile};

pub const DEFAULT_THETA_POINTS: usize = 181;
pub const DEFAULT_PHI_POINTS: usize = 361;

/// Profile values with `values[i][j]` at `(theta[i], phi[j])`. Both axes
/// include their end points, so the poles and `Phi = 2 pi` are present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub order: usize,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub photons: Option<usize>,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

pub fn grid(points: usize, span: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| span * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Parses `"181x361"`.
pub fn parse_resolution(spec: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = spec
        .split_once(['x', 'X'])
        .with_context(|| format!("mesh resolution `{spec}` must look like 181x361"))?;
    let t: usize = a.trim().parse().with_context(|| format!("bad theta count `{a}`"))?;
    let p: usize = b.trim().parse().with_context(|| format!("bad phi count `{b}`"))?;
    if t < 2 || p < 2 {
        bail!("mesh needs at least 2 points per axis");
    }
    Ok((t, p))
}

pub fn profile_mesh(profile: &StokesProfile, theta_points: usize, phi_points: usize) -> Mesh {
    let theta = grid(theta_points, PI);
    let phi = grid(phi_points, 2.0 * PI);
    let values = theta
        .iter()
        .map(|&t| phi.iter().map(|&p| profile.eval(&Direction::from_spherical(t, p))).collect())
        .collect();
    Mesh {
        order: profile.order(),
        photons: profile.photons(),
        theta,
        phi,
        values,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Csv,
    Json,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("csv") => Ok(Self::Csv),
            Some("json") => Ok(Self::Json),
            _ => bail!("cannot infer mesh format from `{}`; use .csv or .json", path.display()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    theta: f64,
    phi: f64,
    value: f64,
}

pub fn write_mesh_to<W: Write>(mesh: &Mesh, format: MeshFormat, out: W) -> anyhow::Result<()> {
    match format {
        MeshFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for (i, &theta) in mesh.theta.iter().enumerate() {
                for (j, &phi) in mesh.phi.iter().enumerate() {
                    w.serialize(Row {
                        theta,
                        phi,
                        value: mesh.values[i][j],
                    })?;
                }
            }
            w.flush()?;
        }
        MeshFormat::Json => {
            let mut out = out;
            serde_json::to_writer(&mut out, mesh)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> anyhow::Result<()> {
    let format = MeshFormat::from_path(path)?;
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    write_mesh_to(mesh, format, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Reads a mesh back. CSV files do not carry the order, which is left at 0.
pub fn read_mesh(path: &Path) -> anyhow::Result<Mesh> {
    match MeshFormat::from_path(path)? {
        MeshFormat::Json => {
            let text = std::fs::read_to_string(path)?;
            Ok(serde_json::from_str(&text)?)
        }
        MeshFormat::Csv => {
            let mut r = csv::Reader::from_path(path)?;
            let mut theta: Vec<f64> = Vec::new();
            let mut phi: Vec<f64> = Vec::new();
            let mut values: Vec<Vec<f64>> = Vec::new();
            for row in r.deserialize() {
                let row: Row = row?;
                if theta.last() != Some(&row.theta) {
                    theta.push(row.theta);
                    values.push(Vec::new());
                }
                if theta.len() == 1 {
                    phi.push(row.phi);
                }
                if let Some(last) = values.last_mut() {
                    last.push(row.value);
                }
            }
            if values.iter().any(|v| v.len() != phi.len()) {
                bail!("{} is not a rectangular mesh", path.display());
            }
            Ok(Mesh {
                order: 0,
                photons: None,
                theta,
                phi,
                values,
            })
        }
    }
}

/// Sign changes of `values - mean(values)` around a closed loop, ignoring
/// entries within `tol` of the mean.
pub fn sign_alternations(values: &[f64], tol: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| (*v - mean).abs() > tol)
        .map(|v| *v > mean)
        .collect();
    let n = signs.len();
    (0..n).filter(|&i| signs[i] != signs[(i + 1) % n]).count()
}
