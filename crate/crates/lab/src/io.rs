//! JSON forms of states, matrices, measurement records and reconstruction
//! reports. Complex numbers are `[re, im]` pairs; matrices are row-major.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use stokes_core::linalg::{CMatrix, CVector};
use stokes_core::moments::{MomentComponents, PolarizationTensor};
use stokes_core::tomography::{
    DirectionSet, ManifoldReconstruction, MeasurementRecord, MeasurementSetting, ReconstructionResult,
};
use stokes_core::{Block, BlockDiagonalState, Direction, ManifoldState};

pub type Pair = [f64; 2];

fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    #[serde(rename = "N")]
    pub photons: usize,
    pub rows: Vec<Vec<Pair>>,
}

impl MatrixJson {
    pub fn from_matrix(photons: usize, m: &CMatrix) -> Self {
        Self {
            photons,
            rows: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> anyhow::Result<CMatrix> {
        let d = self.photons + 1;
        if self.rows.len() != d || self.rows.iter().any(|r| r.len() != d) {
            bail!("matrix for N={} must be {d}x{d}", self.photons);
        }
        Ok(CMatrix::from_fn(d, d, |i, j| complex(&self.rows[i][j])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockJson {
    #[serde(rename = "N")]
    pub photons: usize,
    #[serde(rename = "pN")]
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value>,
    pub blocks: Vec<BlockJson>,
}

impl StateJson {
    pub fn from_state(kind: &str, params: BTreeMap<String, Value>, state: &BlockDiagonalState) -> Self {
        let blocks = state
            .blocks()
            .iter()
            .map(|b| {
                let n = b.photons();
                match b.state.amplitudes() {
                    Some(v) => BlockJson {
                        photons: n,
                        probability: b.probability,
                        vector: Some(v.iter().map(|z| pair(*z)).collect()),
                        matrix: None,
                    },
                    None => BlockJson {
                        photons: n,
                        probability: b.probability,
                        vector: None,
                        matrix: Some(MatrixJson::from_matrix(n, &b.state.density())),
                    },
                }
            })
            .collect();
        Self {
            kind: kind.to_string(),
            params,
            blocks,
        }
    }

    pub fn to_state(&self) -> anyhow::Result<BlockDiagonalState> {
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let state = match (&b.vector, &b.matrix) {
                (Some(v), None) => {
                    let amps = CVector::from_iterator(v.len(), v.iter().map(complex));
                    if amps.len() != b.photons + 1 {
                        bail!("vector for N={} needs {} amplitudes", b.photons, b.photons + 1);
                    }
                    ManifoldState::pure(b.photons, amps)?
                }
                (None, Some(m)) => {
                    if m.photons != b.photons {
                        bail!("matrix N={} does not match block N={}", m.photons, b.photons);
                    }
                    ManifoldState::mixed(b.photons, m.to_matrix()?)?
                }
                _ => bail!("block N={} needs exactly one of `vector` or `matrix`", b.photons),
            };
            blocks.push(Block {
                probability: b.probability,
                state,
            });
        }
        Ok(BlockDiagonalState::new(blocks)?)
    }
}

pub fn read_state(path: &Path) -> anyhow::Result<BlockDiagonalState> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let json: StateJson = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    json.to_state()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountJson {
    #[serde(rename = "N")]
    pub photons: usize,
    pub s: i64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordJson {
    pub direction: [f64; 3],
    pub shots: u64,
    pub seed: u64,
    #[serde(default)]
    pub stream: u64,
    pub counts: Vec<CountJson>,
}

impl RecordJson {
    pub fn from_record(r: &MeasurementRecord) -> Self {
        Self {
            direction: r.setting.direction.components(),
            shots: r.setting.shots,
            seed: r.setting.seed,
            stream: r.setting.stream,
            counts: r
                .counts
                .iter()
                .map(|(&(photons, s), &count)| CountJson { photons, s, count })
                .collect(),
        }
    }

    pub fn to_record(&self) -> anyhow::Result<MeasurementRecord> {
        let [x, y, z] = self.direction;
        let setting = MeasurementSetting::new(Direction::new(x, y, z)?, self.shots, self.seed, self.stream)?;
        let mut counts = BTreeMap::new();
        for c in &self.counts {
            if (c.s.unsigned_abs() as usize) > c.photons || (c.photons as i64 - c.s) % 2 != 0 {
                bail!("outcome s={} is impossible on manifold N={}", c.s, c.photons);
            }
            *counts.entry((c.photons, c.s)).or_insert(0) += c.count;
        }
        Ok(MeasurementRecord { setting, counts })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub k: usize,
    pub l: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentsJson {
    pub order: usize,
    pub components: Vec<ComponentJson>,
}

impl ComponentsJson {
    pub fn from_components(m: &MomentComponents) -> Self {
        Self {
            order: m.order(),
            components: MomentComponents::pairs(m.order())
                .into_iter()
                .map(|(k, l)| ComponentJson { k, l, value: m.get(k, l) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorJson {
    pub order: usize,
    /// Leftmost index slowest, indices `1..=3`.
    pub elements: Vec<Pair>,
}

impl TensorJson {
    pub fn from_tensor(t: &PolarizationTensor) -> Self {
        Self {
            order: t.order(),
            elements: t.elements().iter().map(|z| pair(*z)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsJson {
    pub condition_number: f64,
    pub projection_distance: f64,
    pub residual: f64,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldReportJson {
    #[serde(rename = "N")]
    pub photons: usize,
    #[serde(rename = "pN")]
    pub probability: f64,
    pub moment_components: Vec<ComponentsJson>,
    pub tensors: Vec<TensorJson>,
    pub rho: MatrixJson,
    pub diagnostics: DiagnosticsJson,
    /// Trace distance to the input state, when it is known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_distance: Option<f64>,
}

impl ManifoldReportJson {
    pub fn from_reconstruction(m: &ManifoldReconstruction, truth: Option<&ManifoldState>) -> anyhow::Result<Self> {
        let trace_distance = match truth {
            Some(t) => Some(m.state.trace_distance(t)?),
            None => None,
        };
        Ok(Self {
            photons: m.photons,
            probability: m.probability,
            moment_components: m.components.iter().map(ComponentsJson::from_components).collect(),
            tensors: m.tensors.iter().map(TensorJson::from_tensor).collect(),
            rho: MatrixJson::from_matrix(m.photons, &m.state.density()),
            diagnostics: DiagnosticsJson {
                condition_number: m.diagnostics.condition_number,
                projection_distance: m.diagnostics.projection_distance,
                residual: m.diagnostics.residual,
                clipped: m.diagnostics.clipped,
            },
            trace_distance,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSetJson {
    pub order: usize,
    pub rationale: String,
    pub rank: usize,
    pub condition_number: f64,
    pub directions: Vec<[f64; 3]>,
}

impl DirectionSetJson {
    pub fn from_set(s: &DirectionSet) -> Self {
        Self {
            order: s.order,
            rationale: s.rationale.tag().to_string(),
            rank: s.rank,
            condition_number: s.condition_number,
            directions: s.directions.iter().map(Direction::components).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyReportJson {
    /// `"exact"` or `"sampled"`.
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub direction_sets: Vec<DirectionSetJson>,
    pub manifolds: Vec<ManifoldReportJson>,
    pub skipped: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub records: Vec<RecordJson>,
}

impl TomographyReportJson {
    pub fn from_result(
        result: &ReconstructionResult,
        truth: Option<&BlockDiagonalState>,
        shots: Option<u64>,
        seed: Option<u64>,
    ) -> anyhow::Result<Self> {
        let manifolds = result
            .manifolds
            .iter()
            .map(|m| {
                let t = truth.and_then(|s| s.block(m.photons)).map(|b| &b.state);
                ManifoldReportJson::from_reconstruction(m, t)
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(Self {
            mode: if shots.is_some() { "sampled" } else { "exact" }.to_string(),
            shots,
            seed,
            direction_sets: result.direction_sets.iter().map(DirectionSetJson::from_set).collect(),
            manifolds,
            skipped: result.skipped.clone(),
            records: result.records.iter().map(RecordJson::from_record).collect(),
        })
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
