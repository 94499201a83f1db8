use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stokes_core::fock::{set_max_manifold, DEFAULT_MAX_MANIFOLD};
use stokes_core::linalg::min_eigenvalue;
use stokes_core::factorials::CentralFactorialTable;
use stokes_core::tomography::{run_tomography, ShotMode, ThirdOrderChoice, TomographyConfig};
use stokes_core::StokesProfile;

use crate::io::{to_json_string, TomographyReportJson};
use crate::mesh::{parse_resolution, profile_mesh, write_mesh, write_mesh_to, MeshFormat};
use crate::states::{build_family, resolve, StateParams};
use crate::verify::{run_suite, SUITES};

pub const NMAX_ENV: &str = "STOKES_LAB_NMAX";

#[derive(Debug, Parser)]
#[command(name = "stokes-lab", version, about = "Quantum polarization moments and polarization tomography")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a named state as JSON.
    State {
        /// noon, su2-coherent, fock, twin-fock, coherent, tmsv, unpolarized, maximally-mixed
        family: String,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a Stokes moment profile on a (Theta, Phi) mesh.
    Profile {
        #[command(flatten)]
        source: StateArgs,
        #[arg(long)]
        order: usize,
        /// Grid size as THETAxPHI.
        #[arg(long, default_value = "181x361")]
        mesh: String,
        /// Output file; .csv or .json. CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate measurements and reconstruct the polarization sector.
    Tomography {
        #[command(flatten)]
        source: StateArgs,
        /// Largest manifold reconstructed.
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, value_enum, default_value_t = DirectionChoice::Default)]
        directions: DirectionChoice,
        /// Shots per setting, or `inf` for exact moments.
        #[arg(long, default_value = "inf")]
        shots: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an invariant suite.
    Verify {
        /// algebra, profiles, recurrence, factorials or tomography
        suite: String,
    },
    /// Print the central factorial tables f(n, k) and F(n, k) as CSV, or JSON
    /// when --out ends in .json.
    Factorials {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionChoice {
    /// Axes, icosahedral lines, conditioned third-order set, generic sets beyond.
    Default,
    /// The symmetric seven-line third-order set.
    Symmetric,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub mmax: Option<usize>,
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
}

impl ParamArgs {
    fn to_params(&self) -> StateParams {
        StateParams {
            n: self.n,
            k: self.k,
            nbar: self.nbar,
            mmax: self.mmax,
            nmax: self.nmax,
            theta: self.theta,
            phi: self.phi,
            a: self.a,
        }
    }
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Family name or state JSON file.
    #[arg(long)]
    pub state: String,
    #[command(flatten)]
    pub params: ParamArgs,
}

/// Applies `STOKES_LAB_NMAX` when set.
pub fn apply_manifold_cap(value: Option<&str>) -> anyhow::Result<usize> {
    let cap = match value {
        Some(v) => v
            .trim()
            .parse::<usize>()
            .with_context(|| format!("{NMAX_ENV} must be a non-negative integer, got `{v}`"))?,
        None => DEFAULT_MAX_MANIFOLD,
    };
    set_max_manifold(cap);
    Ok(cap)
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn parse_shots(spec: &str) -> anyhow::Result<Option<u64>> {
    if spec.eq_ignore_ascii_case("inf") {
        return Ok(None);
    }
    let n: u64 = spec
        .parse()
        .with_context(|| format!("--shots must be a positive integer or `inf`, got `{spec}`"))?;
    if n == 0 {
        bail!("--shots must be positive");
    }
    Ok(Some(n))
}

#[derive(Serialize)]
struct FactorialTables {
    max_n: usize,
    /// `f[n][k]` as exact fractions.
    f: Vec<Vec<String>>,
    #[serde(rename = "F")]
    second: Vec<Vec<String>>,
}

/// Runs a parsed command, writing results to files or stdout.
pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::State { family, params, out } => {
            let (state, used) = build_family(&family, &params.to_params())?;
            let json = crate::io::StateJson::from_state(&family, used, &state);
            emit(&to_json_string(&json)?, out.as_deref())
        }
        Command::Profile {
            source,
            order,
            mesh,
            out,
        } => {
            let (t, p) = parse_resolution(&mesh)?;
            let state = resolve(&source.state, &source.params.to_params())?.to_state()?;
            let profile = StokesProfile::averaged(&state, order)?;
            let m = profile_mesh(&profile, t, p);
            match out {
                Some(path) => write_mesh(&m, &path),
                None => write_mesh_to(&m, MeshFormat::Csv, std::io::stdout().lock()),
            }
        }
        Command::Tomography {
            source,
            order,
            directions,
            shots,
            seed,
            out,
        } => {
            let shots = parse_shots(&shots)?;
            let state = resolve(&source.state, &source.params.to_params())?.to_state()?;
            let config = TomographyConfig {
                mode: match shots {
                    None => ShotMode::Exact,
                    Some(shots) => ShotMode::Sampled { shots, seed },
                },
                max_photons: order,
                third_order: match directions {
                    DirectionChoice::Default => ThirdOrderChoice::Fallback,
                    DirectionChoice::Symmetric => ThirdOrderChoice::Symmetric,
                },
            };
            let result = run_tomography(&state, &config)?;
            for m in &result.manifolds {
                let rho = m.state.density();
                let trace: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
                if (trace - 1.0).abs() > 1e-12 || min_eigenvalue(&rho) < -1e-12 {
                    bail!("reconstructed state on N={} is not physical", m.photons);
                }
            }
            let report = TomographyReportJson::from_result(&result, Some(&state), shots, shots.map(|_| seed))?;
            emit(&to_json_string(&report)?, out.as_deref())
        }
        Command::Verify { suite } => {
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut failed = 0;
            let mut text = String::new();
            for name in names {
                for check in run_suite(name)? {
                    if !check.passed {
                        failed += 1;
                    }
                    text.push_str(&format!("{check}\n"));
                }
            }
            emit(&text, None)?;
            if failed > 0 {
                bail!("{failed} check(s) failed");
            }
            Ok(())
        }
        Command::Factorials { n, out } => {
            let table = CentralFactorialTable::new(n)?;
            let mut f = Vec::with_capacity(n + 1);
            let mut second = Vec::with_capacity(n + 1);
            for i in 0..=n {
                f.push((0..=i).map(|k| table.first_kind(i, k).map(|q| q.to_string())).collect::<Result<Vec<_>, _>>()?);
                second.push((0..=i).map(|k| table.second_kind(i, k).map(|q| q.to_string())).collect::<Result<Vec<_>, _>>()?);
            }
            let json = matches!(out.as_deref().map(MeshFormat::from_path), Some(Ok(MeshFormat::Json)));
            let text = if json {
                to_json_string(&FactorialTables { max_n: n, f, second })?
            } else {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["table", "n", "k", "value"])?;
                for (name, rows) in [("f", &f), ("F", &second)] {
                    for (i, row) in rows.iter().enumerate() {
                        for (k, v) in row.iter().enumerate() {
                            w.write_record([name, &i.to_string(), &k.to_string(), v])?;
                        }
                    }
                }
                String::from_utf8(w.into_inner()?)?
            };
            emit(&text, out.as_deref())
        }
    }
}

/// Entry point shared by the binary: parses, applies the cap, runs, and maps
/// failures to exit code 1.
pub fn main_with_args<I, T>(args: I, nmax: Option<String>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = apply_manifold_cap(nmax.as_deref()).and_then(|_| run(cli));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
