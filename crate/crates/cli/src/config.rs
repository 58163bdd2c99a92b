//! Experiment configuration. Every table rejects unknown keys so a
//! misspelling fails before any computation starts.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use solitonq_core::classical::Absorber;
use solitonq_core::{GridSpec, McmcConfig, Segment, SolitonParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    BetheEval,
    Eigencheck,
    Sample,
    QTable,
    Protocol,
    Epr,
    Classical,
    FullPipeline,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::BetheEval,
        Kind::Eigencheck,
        Kind::Sample,
        Kind::QTable,
        Kind::Protocol,
        Kind::Epr,
        Kind::Classical,
        Kind::FullPipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::BetheEval => "bethe-eval",
            Kind::Eigencheck => "eigencheck",
            Kind::Sample => "sample",
            Kind::QTable => "q-table",
            Kind::Protocol => "protocol",
            Kind::Epr => "epr",
            Kind::Classical => "classical",
            Kind::FullPipeline => "full-pipeline",
        }
    }
}

impl FromStr for Kind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown experiment kind '{s}'"))
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; must match the kind given on the command line.
    pub kind: Option<Kind>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: SolitonParams,
    #[serde(default)]
    pub mcmc: McmcConfig,
    #[serde(default)]
    pub grid: GridSpec,
    pub bethe: Option<BetheSection>,
    pub eigencheck: Option<EigencheckSection>,
    pub sample: Option<SampleSection>,
    pub q_table: Option<QTableSection>,
    pub protocol: Option<ProtocolSection>,
    pub epr: Option<EprSection>,
    pub classical: Option<ClassicalSection>,
    pub pipeline: Option<PipelineSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BetheSection {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub p: f64,
    /// Pulse-center state for the time-dependent amplitude; the eigenstate
    /// amplitude alone is reported when absent.
    pub dp: Option<f64>,
    pub phase_accum: f64,
    /// Points of the profile scan along the first photon's coordinate.
    pub profile_points: usize,
    pub profile_halfwidth: f64,
}

impl Default for BetheSection {
    fn default() -> Self {
        Self {
            xs: vec![0.0],
            ys: vec![0.0],
            p: 0.0,
            dp: None,
            phase_accum: 0.0,
            profile_points: 201,
            profile_halfwidth: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EigencheckSection {
    pub p: f64,
    /// Extra grid sizes for a convergence curve.
    pub refine: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    /// Pulse-center momentum spread; the shot-noise value for `q` is used
    /// when absent.
    pub dp: Option<f64>,
    /// q used for the shot-noise `dp` (2 when absent).
    pub q: Option<f64>,
    pub pair_covariances: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QTableSection {
    pub ns: Vec<usize>,
    pub tolerance: f64,
}

impl Default for QTableSection {
    fn default() -> Self {
        Self { ns: vec![2, 4], tolerance: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    /// Ramp `c -> c / gamma` over `duration`, unless `segments` is given.
    pub gamma: f64,
    pub duration: f64,
    pub segments: Vec<Segment>,
    /// Dispersion of the compensating medium; `-b` when absent.
    pub b_prime: Option<f64>,
    /// q entering the shot-noise `dp` and the covariance model; 2 when absent.
    pub q: Option<f64>,
    pub dp: Option<f64>,
    /// Points of the `t'` scan around the compensation length.
    pub scan_points: usize,
    /// Largest gamma of the enhancement curve.
    pub gamma_max: f64,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            gamma: 4.0,
            duration: 100.0,
            segments: Vec::new(),
            b_prime: None,
            q: None,
            dp: None,
            scan_points: 101,
            gamma_max: 1000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EprSource {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EprSection {
    pub gammas: Vec<f64>,
    pub duration: f64,
    pub q: Option<f64>,
    pub source: EprSource,
}

impl Default for EprSection {
    fn default() -> Self {
        Self { gammas: vec![1.0, 2.0, 4.0, 8.0], duration: 100.0, q: None, source: EprSource::Analytic }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicalMode {
    /// Free propagation of the stationary soliton.
    Soliton,
    /// Slow ramp `c -> c / gamma` with a width and radiation check.
    Ramp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSection {
    pub mode: ClassicalMode,
    pub points: usize,
    /// Box half-width in units of the soliton width.
    pub halfwidth: f64,
    /// Soliton power; `n + m` when absent.
    pub power: Option<f64>,
    /// Duration in soliton periods (ramp duration in ramp mode).
    pub periods: f64,
    pub gamma: f64,
    pub dt: Option<f64>,
    pub absorber: Option<Absorber>,
    /// Intermediate binary snapshots written besides the final one.
    pub snapshots: usize,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        Self {
            mode: ClassicalMode::Soliton,
            points: 2048,
            halfwidth: 40.0,
            power: None,
            periods: 5.0,
            gamma: 2.0,
            dt: None,
            absorber: None,
            snapshots: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Adiabatic,
    DispersionManagement,
    Epr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    pub stages: Vec<Stage>,
    pub gamma: f64,
    pub duration: f64,
    pub segments: Vec<Segment>,
    pub b_prime: Option<f64>,
    pub q: Option<f64>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        Self {
            stages: vec![Stage::Adiabatic, Stage::DispersionManagement, Stage::Epr],
            gamma: 4.0,
            duration: 100.0,
            segments: Vec::new(),
            b_prime: None,
            q: None,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Fills the kind, seed and every section the kind uses, so the echoed
    /// file reproduces the run on its own.
    pub fn resolve(mut self, kind: Kind, seed: Option<u64>) -> Result<Self, CliError> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(CliError::Validation(format!(
                    "config is for '{k}' but '{kind}' was requested"
                )));
            }
        }
        self.kind = Some(kind);
        let seed = seed.or(self.seed).unwrap_or(self.mcmc.seed);
        self.seed = Some(seed);
        self.mcmc.seed = seed;
        match kind {
            Kind::BetheEval => {
                self.bethe.get_or_insert_with(Default::default);
            }
            Kind::Eigencheck => {
                self.eigencheck.get_or_insert_with(Default::default);
            }
            Kind::Sample => {
                self.sample.get_or_insert_with(Default::default);
            }
            Kind::QTable => {
                self.q_table.get_or_insert_with(Default::default);
            }
            Kind::Protocol => {
                self.protocol.get_or_insert_with(Default::default);
            }
            Kind::Epr => {
                self.epr.get_or_insert_with(Default::default);
            }
            Kind::Classical => {
                self.classical.get_or_insert_with(Default::default);
            }
            Kind::FullPipeline => {
                self.pipeline.get_or_insert_with(Default::default);
            }
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_valid() {
        let c = ExperimentConfig::parse("").unwrap().resolve(Kind::Sample, None).unwrap();
        assert_eq!(c.params, SolitonParams::manakov(1, 1));
        assert_eq!(c.seed, Some(1));
        assert!(c.sample.is_some());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("[params]\nbb = 1.0\n").is_err());
        assert!(ExperimentConfig::parse("[mcmc]\nchain = 2\n").is_err());
        assert!(ExperimentConfig::parse("[protocol]\ngama = 2.0\n").is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn kind_mismatch_rejected() {
        let c = ExperimentConfig::parse("kind = \"epr\"\n").unwrap();
        assert!(c.resolve(Kind::Sample, None).is_err());
    }

    #[test]
    fn seed_precedence_and_echo() {
        let c = ExperimentConfig::parse("seed = 5\n[params]\nB = 0.5\n").unwrap();
        let r = c.resolve(Kind::Protocol, Some(9)).unwrap();
        assert_eq!(r.mcmc.seed, 9);
        let again = ExperimentConfig::parse(&r.to_toml()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn stage_names() {
        let c = ExperimentConfig::parse(
            "[pipeline]\nstages = [\"adiabatic\", \"dispersion-management\"]\ngamma = 2.0\n",
        )
        .unwrap();
        let p = c.pipeline.unwrap();
        assert_eq!(p.stages, vec![Stage::Adiabatic, Stage::DispersionManagement]);
        assert_eq!(p.gamma, 2.0);
    }
}
