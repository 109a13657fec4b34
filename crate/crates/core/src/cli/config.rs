//! Flat TOML run configuration.
//!
//! A config file holds one experiment. Keys not present take the defaults of
//! that experiment (see [`ExperimentConfig::defaults_for`]); unknown keys are
//! rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clt::log_spaced;
use crate::error::{Error, Result};
use crate::field::{TestFunction, GAUSSIAN_CUTOFF};
use crate::lattice::Lattice;
use crate::random::{DensityParams, MeasureKind, MeasureParams, PointwiseMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    CovarianceConvergence,
    Clt,
    GibbsLimit,
    RoomCorridor,
    Decay,
    Counterexample,
    MagneticDecay,
    Cook,
    TheoremA,
    SobolevNorm,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 10] = [
        ExperimentName::CovarianceConvergence,
        ExperimentName::Clt,
        ExperimentName::GibbsLimit,
        ExperimentName::RoomCorridor,
        ExperimentName::Decay,
        ExperimentName::Counterexample,
        ExperimentName::MagneticDecay,
        ExperimentName::Cook,
        ExperimentName::TheoremA,
        ExperimentName::SobolevNorm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::CovarianceConvergence => "covariance-convergence",
            ExperimentName::Clt => "clt",
            ExperimentName::GibbsLimit => "gibbs-limit",
            ExperimentName::RoomCorridor => "room-corridor",
            ExperimentName::Decay => "decay",
            ExperimentName::Counterexample => "counterexample",
            ExperimentName::MagneticDecay => "magnetic-decay",
            ExperimentName::Cook => "cook",
            ExperimentName::TheoremA => "theorem-a",
            ExperimentName::SobolevNorm => "sobolev-norm",
        }
    }

    /// Experiments that draw from the configured initial measure.
    pub fn uses_measure(&self) -> bool {
        matches!(
            self,
            ExperimentName::CovarianceConvergence
                | ExperimentName::Clt
                | ExperimentName::GibbsLimit
                | ExperimentName::RoomCorridor
                | ExperimentName::TheoremA
        )
    }

    /// Experiments driven by the magnetic flow.
    pub fn is_magnetic(&self) -> bool {
        matches!(
            self,
            ExperimentName::MagneticDecay | ExperimentName::Cook | ExperimentName::TheoremA
        )
    }

    /// Experiments that evolve a test pair and so need `t + r < L/2`.
    pub fn needs_window(&self) -> bool {
        matches!(
            self,
            ExperimentName::Clt
                | ExperimentName::RoomCorridor
                | ExperimentName::Decay
                | ExperimentName::MagneticDecay
                | ExperimentName::Cook
                | ExperimentName::TheoremA
        )
    }

    /// Smallest sample count the experiment accepts (0 when it draws none).
    pub fn min_samples(&self) -> usize {
        match self {
            ExperimentName::Clt | ExperimentName::Counterexample | ExperimentName::TheoremA => 1000,
            ExperimentName::RoomCorridor => 100,
            _ => 0,
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|e| e.as_str() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapName {
    Identity,
    Erf,
    Tanh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PsiShape {
    Gaussian,
    Bump,
}

/// One run. Every key is optional in the file.
///
/// | key | meaning |
/// |---|---|
/// | `experiment` | which experiment to run |
/// | `dim`, `points`, `box_length` | lattice `n`, `N`, `L` |
/// | `mass` | `m` |
/// | `measure` | `gaussian`, `mapped` or `counterexample` |
/// | `d0`, `d1`, `r0` | spectral density amplitudes and correlation radius |
/// | `map`, `map_width` | pointwise map of the mapped measure |
/// | `times` | evaluation times (checkpoints for `cook`) |
/// | `samples`, `seed` | Monte Carlo size and master seed |
/// | `output_dir` | where CSV files and the manifest go |
/// | `psi_shape`, `psi_width`, `psi_a0`, `psi_a1`, `psi_offset` | test pair |
/// | `psi_variance` | rescale the pair to this limiting variance (0 keeps it) |
/// | `lags` | covariance lags, in lattice steps along the first axis |
/// | `scales` | correlation rescalings `r` for the Gibbs limit |
/// | `room_width`, `corridor_width` | room-corridor layout |
/// | `potential_radius`, `potential_amplitude` | magnetic potential |
/// | `local_radius` | ball radius of the local decay norm |
/// | `energy_horizon` | time over which the magnetic energy is tracked |
/// | `horizon`, `quadrature_step` | Cook integral range and node spacing |
/// | `increment_times` | early and late time of the Cook increment ratio |
/// | `sobolev_s`, `sobolev_alpha`, `temperature`, `refinements` | ultraviolet study |
/// | `envelope_distance`, `envelope_t_min`, `envelope_t_max`, `envelope_points` | near-cone fit |
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentName,
    pub dim: usize,
    pub points: usize,
    pub box_length: f64,
    pub mass: f64,
    pub measure: MeasureKind,
    pub d0: f64,
    pub d1: f64,
    pub r0: f64,
    pub map: MapName,
    pub map_width: f64,
    pub times: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub psi_shape: PsiShape,
    pub psi_width: f64,
    pub psi_a0: f64,
    pub psi_a1: f64,
    pub psi_offset: f64,
    pub psi_variance: f64,
    pub lags: Vec<usize>,
    pub scales: Vec<f64>,
    pub room_width: f64,
    pub corridor_width: f64,
    pub potential_radius: f64,
    pub potential_amplitude: f64,
    pub local_radius: f64,
    pub energy_horizon: f64,
    pub horizon: f64,
    pub quadrature_step: f64,
    pub increment_times: Vec<f64>,
    pub sobolev_s: f64,
    pub sobolev_alpha: f64,
    pub temperature: f64,
    pub refinements: Vec<usize>,
    pub envelope_distance: f64,
    pub envelope_t_min: f64,
    pub envelope_t_max: f64,
    pub envelope_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults_for(ExperimentName::Counterexample)
    }
}

impl ExperimentConfig {
    /// Shared baseline: a 1D desk grid with the compact-correlation Gaussian
    /// measure and a unit Gaussian test pair.
    fn baseline(experiment: ExperimentName) -> Self {
        ExperimentConfig {
            experiment,
            dim: 1,
            points: 512,
            box_length: 400.0,
            mass: 1.0,
            measure: MeasureKind::Gaussian,
            d0: 1.0,
            d1: 1.0,
            r0: 2.0,
            map: MapName::Identity,
            map_width: 0.2,
            times: vec![25.0, 50.0, 100.0],
            samples: 0,
            seed: 20_240_601,
            output_dir: PathBuf::from("out"),
            psi_shape: PsiShape::Gaussian,
            psi_width: 1.0,
            psi_a0: 1.0,
            psi_a1: 1.0,
            psi_offset: 0.0,
            psi_variance: 0.0,
            lags: (0..=16).collect(),
            scales: vec![1.0, 0.5, 0.25, 0.125],
            room_width: 4.0,
            corridor_width: 2.0,
            potential_radius: 6.0,
            potential_amplitude: 0.5,
            local_radius: 10.0,
            energy_horizon: 5.0,
            horizon: 48.0,
            quadrature_step: 0.5,
            increment_times: vec![5.0, 40.0],
            sobolev_s: -1.0,
            sobolev_alpha: -1.0,
            temperature: 1.0,
            refinements: vec![128, 256, 512, 1024],
            envelope_distance: 1.0,
            envelope_t_min: 100.0,
            envelope_t_max: 10_000.0,
            envelope_points: 25,
        }
    }

    /// Defaults of one experiment: parameters at which its in-experiment
    /// checks are expected to pass.
    pub fn defaults_for(experiment: ExperimentName) -> Self {
        let base = Self::baseline(experiment);
        let magnetic = ExperimentConfig {
            dim: 2,
            points: 256,
            box_length: 128.0,
            r0: 3.0,
            ..base.clone()
        };
        match experiment {
            ExperimentName::CovarianceConvergence => base,
            ExperimentName::Clt => ExperimentConfig {
                points: 1024,
                measure: MeasureKind::Mapped,
                map: MapName::Erf,
                samples: 10_000,
                times: vec![0.0, 22.5, 45.0, 90.0, 180.0],
                psi_variance: 1.5,
                ..base
            },
            ExperimentName::GibbsLimit => ExperimentConfig {
                box_length: 64.0,
                times: vec![],
                ..base
            },
            ExperimentName::RoomCorridor => ExperimentConfig {
                dim: 2,
                points: 224,
                box_length: 224.0,
                r0: 3.0,
                psi_width: 2.0,
                samples: 2000,
                times: vec![20.0, 40.0, 80.0],
                ..base
            },
            ExperimentName::Decay => ExperimentConfig {
                points: 2048,
                box_length: 512.0,
                psi_width: 1.5,
                times: log_spaced(20.0, 200.0, 12),
                ..base
            },
            ExperimentName::Counterexample => ExperimentConfig {
                points: 256,
                box_length: 64.0,
                measure: MeasureKind::Counterexample,
                psi_shape: PsiShape::Bump,
                psi_width: 3.0,
                psi_a0: 1.5,
                psi_a1: -0.8,
                samples: 1000,
                times: (0..=48).map(|i| 0.5 * i as f64).collect(),
                ..base
            },
            ExperimentName::MagneticDecay => ExperimentConfig {
                times: (1..=24).map(|i| 2.0 * i as f64).collect(),
                ..magnetic
            },
            ExperimentName::Cook => ExperimentConfig {
                times: vec![10.0, 20.0, 40.0],
                ..magnetic
            },
            ExperimentName::TheoremA => ExperimentConfig {
                samples: 2000,
                times: vec![48.0],
                psi_variance: 1.5,
                ..magnetic
            },
            ExperimentName::SobolevNorm => ExperimentConfig {
                box_length: 32.0,
                points: 128,
                times: vec![1.0, 10.0, 100.0],
                ..base
            },
        }
    }

    /// Parse TOML text, filling absent keys from the experiment's defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let experiment = match user.get("experiment") {
            None => ExperimentName::Counterexample,
            Some(toml::Value::String(s)) => s.parse()?,
            Some(other) => return Err(Error::Config(format!("`experiment` must be a string, got {other}"))),
        };
        let defaults = toml::Table::try_from(Self::defaults_for(experiment))
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut merged = defaults;
        for (k, v) in user {
            merged.insert(k, v);
        }
        merged
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.dim, self.points, self.box_length)
    }

    pub fn pointwise_map(&self) -> PointwiseMap {
        match self.map {
            MapName::Identity => PointwiseMap::Identity,
            MapName::Erf => PointwiseMap::Erf { width: self.map_width },
            MapName::Tanh => PointwiseMap::Tanh { width: self.map_width },
        }
    }

    pub fn measure_params(&self) -> MeasureParams {
        let map = if self.measure == MeasureKind::Mapped {
            self.pointwise_map()
        } else {
            PointwiseMap::Identity
        };
        MeasureParams {
            kind: self.measure,
            density: DensityParams {
                d0: self.d0,
                d1: self.d1,
                r0: self.r0,
            },
            scale: 1.0,
            map0: map,
            map1: map,
        }
    }

    /// Radius `r` of the ball holding the test pair.
    pub fn psi_support(&self) -> f64 {
        match self.psi_shape {
            PsiShape::Gaussian => self.psi_offset.abs() + GAUSSIAN_CUTOFF * self.psi_width,
            PsiShape::Bump => self.psi_width,
        }
    }

    /// The test pair before any variance normalization.
    pub fn test_function(&self, lattice: Lattice) -> Result<TestFunction> {
        match self.psi_shape {
            PsiShape::Gaussian if self.psi_offset == 0.0 => {
                TestFunction::gaussian(lattice, self.psi_width, self.psi_a0, self.psi_a1)
            }
            PsiShape::Gaussian => TestFunction::gaussian_at(
                lattice,
                [self.psi_offset, 0.0, 0.0],
                self.psi_width,
                self.psi_a0,
                self.psi_a1,
            ),
            PsiShape::Bump => TestFunction::bump(lattice, self.psi_width, self.psi_a0, self.psi_a1),
        }
    }

    pub fn max_time(&self) -> f64 {
        self.times.iter().cloned().fold(0.0, f64::max)
    }

    /// Largest time reached by the evolution of the test pair.
    pub fn evolution_horizon(&self) -> f64 {
        match self.experiment {
            ExperimentName::Cook => self.horizon.max(self.max_time()),
            _ => self.max_time(),
        }
    }
}
