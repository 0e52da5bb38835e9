//! JSON experiment configurations.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::builder::{BuildOptions, OrbitalSet};
use crate::error::{Error, Result};
use crate::lower::LoweringOptions;
use crate::synth::{Axis, SynthOptions};
use crate::C64;

/// How the single-particle orbitals are given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalSpec {
    /// Computational basis states `|r⟩`.
    Integers(Vec<usize>),
    /// Amplitude vectors as `[re, im]` pairs.
    Amplitudes(Vec<Vec<[f64; 2]>>),
    /// JSON file holding an `amplitudes` array.
    AmplitudeFile(PathBuf),
    /// Haar-like random orthonormal orbitals; `seed` falls back to `--seed`.
    Random { n: usize, seed: Option<u64> },
}

impl OrbitalSpec {
    pub fn resolve(&self, eta: usize, default_seed: u64, base: &Path) -> Result<OrbitalSet> {
        match self {
            OrbitalSpec::Integers(v) => OrbitalSet::from_integers(eta, v),
            OrbitalSpec::Amplitudes(v) => OrbitalSet::from_amplitudes(eta, to_complex(v)),
            OrbitalSpec::AmplitudeFile(p) => {
                let path = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                let text = fs::read_to_string(&path)?;
                #[derive(Deserialize)]
                struct File {
                    amplitudes: Vec<Vec<[f64; 2]>>,
                }
                let f: File = serde_json::from_str(&text)?;
                OrbitalSet::from_amplitudes(eta, to_complex(&f.amplitudes))
            }
            OrbitalSpec::Random { n, seed } => {
                OrbitalSet::random(*n, eta, seed.unwrap_or(default_seed))
            }
        }
    }
}

fn to_complex(v: &[Vec<[f64; 2]>]) -> Vec<Vec<C64>> {
    v.iter()
        .map(|o| o.iter().map(|[re, im]| C64::new(*re, *im)).collect())
        .collect()
}

fn check_eta(eta: usize) -> Result<()> {
    if eta == 0 || eta > 8 {
        return Err(Error::config("eta", format!("must be in 1..=8, got {eta}")));
    }
    Ok(())
}

fn check_orbitals(set: &OrbitalSet, n: usize) -> Result<()> {
    if set.len() != n {
        return Err(Error::config(
            "orbitals",
            format!("{} orbitals given for n = {n}", set.len()),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub n: usize,
    pub eta: usize,
    pub orbitals: OrbitalSpec,
    #[serde(default)]
    pub options: BuildOptions,
    /// Lower to Clifford+T before writing.
    #[serde(default)]
    pub lowering: Option<LoweringOptions>,
}

impl BuildConfig {
    pub fn orbital_set(&self, default_seed: u64, base: &Path) -> Result<OrbitalSet> {
        check_eta(self.eta)?;
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        let set = self
            .orbitals
            .resolve(self.eta, default_seed, base)
            .map_err(|e| field_error("orbitals", e))?;
        check_orbitals(&set, self.n)?;
        Ok(set)
    }
}

/// Wraps non-config errors with the offending field name.
fn field_error(field: &str, e: Error) -> Error {
    match e {
        Error::Config { .. } | Error::Io(_) => e,
        other => Error::config(field, other.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseStudyConfig {
    pub n: usize,
    pub eta: usize,
    pub orbitals: OrbitalSpec,
    pub clifford_infidelities: Vec<f64>,
    pub t_infidelities: Vec<f64>,
    pub rs_errors: Vec<f64>,
    /// Add a noiseless row without rotation synthesis.
    #[serde(default = "yes")]
    pub include_ideal: bool,
    #[serde(default = "yes")]
    pub reuse_ancillas: bool,
    #[serde(default = "noise_study_synth")]
    pub synth: SynthOptions,
    #[serde(default = "default_cap")]
    pub qubit_cap: usize,
    /// Plain-text synthesis cache, read if present and rewritten after.
    #[serde(default)]
    pub synth_cache: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

fn default_cap() -> usize {
    crate::sim::DENSITY_QUBIT_CAP
}

fn noise_study_synth() -> SynthOptions {
    SynthOptions {
        epsilon_floor: 1e-3,
        ..SynthOptions::default()
    }
}

impl NoiseStudyConfig {
    pub fn validate(&self) -> Result<()> {
        check_eta(self.eta)?;
        if self.n < 2 {
            return Err(Error::config(
                "n",
                "noise study needs at least two particles",
            ));
        }
        for (field, list) in [
            ("clifford_infidelities", &self.clifford_infidelities),
            ("t_infidelities", &self.t_infidelities),
        ] {
            if list.is_empty() {
                return Err(Error::config(field, "must not be empty"));
            }
            if let Some(x) = list
                .iter()
                .find(|x| !(0.0..=crate::sim::noise::MAX_INFIDELITY).contains(*x))
            {
                return Err(Error::config(field, format!("{x} is outside [0, 0.25]")));
            }
        }
        if self.rs_errors.is_empty() {
            return Err(Error::config("rs_errors", "must not be empty"));
        }
        if let Some(x) = self
            .rs_errors
            .iter()
            .find(|x| **x < self.synth.epsilon_floor || **x >= 1.0)
        {
            return Err(Error::config(
                "rs_errors",
                format!("{x} is outside [{}, 1)", self.synth.epsilon_floor),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcesConfig {
    pub min_n: u64,
    pub max_n: u64,
    /// `(N, split)` pairs for hybrid cost rows.
    #[serde(default)]
    pub hybrid: Vec<(u64, u64)>,
}

impl ResourcesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_n < 2 {
            return Err(Error::config("min_n", "must be at least 2"));
        }
        if self.max_n < self.min_n {
            return Err(Error::config("max_n", "must be at least min_n"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Circuit in the text format, relative to the config file.
    pub circuit: PathBuf,
    pub eta: usize,
    pub orbitals: OrbitalSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    /// Rotation angle in radians.
    pub theta: f64,
    pub axis: Axis,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub synth: SynthOptions,
    #[serde(default)]
    pub cache: Option<PathBuf>,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::config("theta", "must be finite"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilons", "must not be empty"));
        }
        if let Some(e) = self
            .epsilons
            .iter()
            .find(|e| **e < self.synth.epsilon_floor)
        {
            return Err(Error::config(
                "epsilons",
                format!("{e} is below the floor {}", self.synth.epsilon_floor),
            ));
        }
        Ok(())
    }
}

/// Reads and parses a JSON config.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::config("<document>", e.to_string()))
}
