//! Experiment configuration: a sectioned TOML file with one level of tables.
//!
//! ```toml
//! [tenor]
//! t0 = 0.0
//! delta = 0.5
//! n = 10
//!
//! [curve]
//! flat_rate = 0.04        # or: file = "curve.csv"
//!
//! [driver]
//! type = "brownian"       # brownian | jump-normal | jump-double-exp
//! diffusion = 1.0
//! seed = 7
//!
//! [vols]
//! flat = 0.2              # or: per_rate = [..] with one value per rate
//!
//! [models]
//! list = ["lmm-exact", "lmm-frozen", "lmm-taylor"]
//!
//! [pricing]
//! strikes = [0.03, 0.04, 0.05]
//! n_paths = 100000
//! steps_per_period = 4
//!
//! [output]
//! dir = "out"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use libor_core::affine::AffineLiborModel;
use libor_core::cir::CirParams;
use libor_core::mfm::MfmSettings;
use libor_core::{InitialCurve, JumpLaw, LevyCharacteristics, TenorStructure, VolatilitySurface};
use serde::{Deserialize, Serialize};

use crate::error::LabError;
use crate::io::read_curve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub tenor: TenorSection,
    pub curve: CurveSection,
    pub driver: DriverSection,
    pub vols: VolsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affine: Option<AffineSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mfm: Option<MfmSection>,
    pub models: ModelsSection,
    pub pricing: PricingSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenorSection {
    #[serde(default)]
    pub t0: f64,
    pub delta: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriverType {
    Brownian,
    JumpNormal,
    JumpDoubleExp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSection {
    #[serde(rename = "type")]
    pub kind: DriverType,
    #[serde(default)]
    pub drift: f64,
    #[serde(default = "one")]
    pub diffusion: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump_sd: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub up_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_down: Option<f64>,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_rate: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSection {
    pub mean_reversion: f64,
    pub long_run_level: f64,
    pub vol_of_vol: f64,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfmSection {
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_grid_nodes")]
    pub grid_nodes: usize,
    #[serde(default = "default_width")]
    pub width: f64,
}

fn default_quad_order() -> usize {
    MfmSettings::default().quad_order
}

fn default_grid_nodes() -> usize {
    MfmSettings::default().grid_nodes
}

fn default_width() -> f64 {
    MfmSettings::default().width
}

impl Default for MfmSection {
    fn default() -> Self {
        let s = MfmSettings::default();
        Self {
            quad_order: s.quad_order,
            grid_nodes: s.grid_nodes,
            width: s.width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "lmm-exact")]
    LmmExact,
    #[serde(rename = "lmm-frozen")]
    LmmFrozen,
    #[serde(rename = "lmm-picard1")]
    LmmPicard1,
    #[serde(rename = "lmm-taylor")]
    LmmTaylor,
    #[serde(rename = "fpm")]
    Fpm,
    #[serde(rename = "mfm")]
    Mfm,
    #[serde(rename = "affine")]
    Affine,
}

impl ModelKind {
    pub const ALL: [ModelKind; 7] = [
        ModelKind::LmmExact,
        ModelKind::LmmFrozen,
        ModelKind::LmmPicard1,
        ModelKind::LmmTaylor,
        ModelKind::Fpm,
        ModelKind::Mfm,
        ModelKind::Affine,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::LmmExact => "lmm-exact",
            ModelKind::LmmFrozen => "lmm-frozen",
            ModelKind::LmmPicard1 => "lmm-picard1",
            ModelKind::LmmTaylor => "lmm-taylor",
            ModelKind::Fpm => "fpm",
            ModelKind::Mfm => "mfm",
            ModelKind::Affine => "affine",
        }
    }

    /// The LIBOR market model scheme behind an `lmm-*` entry.
    pub fn lmm_scheme(self) -> Option<libor_core::Scheme> {
        use libor_core::Scheme;
        match self {
            ModelKind::LmmExact => Some(Scheme::Exact),
            ModelKind::LmmFrozen => Some(Scheme::Frozen),
            ModelKind::LmmPicard1 => Some(Scheme::Picard1),
            ModelKind::LmmTaylor => Some(Scheme::Taylor),
            _ => None,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown model '{s}'"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelsSection {
    pub list: Vec<ModelKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingSection {
    pub strikes: Vec<f64>,
    pub n_paths: usize,
    #[serde(default = "default_steps")]
    pub steps_per_period: usize,
    #[serde(default)]
    pub antithetic: bool,
    #[serde(default = "default_chunk")]
    pub chunk_size: usize,
}

fn default_steps() -> usize {
    4
}

fn default_chunk() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default)]
    pub dump_paths: usize,
}

/// Command-line overrides applied on top of a parsed file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub quad_order: Option<usize>,
}

impl ExperimentConfig {
    /// Parses TOML text; errors carry the line, column and field.
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, LabError> {
        toml::to_string(self).map_err(|e| LabError::Config(e.to_string()))
    }

    /// Reads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg =
            Self::parse(&text).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(f) = &cfg.curve.file {
            if f.is_relative() {
                cfg.curve.file = Some(base.join(f));
            }
        }
        if cfg.output.dir.is_relative() {
            cfg.output.dir = base.join(&cfg.output.dir);
        }
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.driver.seed = s;
        }
        if let Some(p) = o.paths {
            self.pricing.n_paths = p;
        }
        if let Some(d) = &o.out_dir {
            self.output.dir = d.clone();
        }
        if let Some(q) = o.quad_order {
            self.mfm.get_or_insert_with(MfmSection::default).quad_order = q;
        }
    }

    /// Checks cross-field requirements that the schema cannot express.
    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |field: &str, msg: &str| Err(LabError::Config(format!("[{field}] {msg}")));
        if self.tenor.t0 != 0.0 {
            return bad("tenor.t0", "the tenor structure must start at time zero");
        }
        if !(self.tenor.delta > 0.0) || self.tenor.n == 0 {
            return bad("tenor", "need delta > 0 and n >= 1");
        }
        match (&self.curve.file, self.curve.flat_rate) {
            (Some(_), Some(_)) | (None, None) => {
                return bad("curve", "give exactly one of `file` and `flat_rate`")
            }
            (Some(f), None) if !f.exists() => {
                return bad("curve.file", &format!("{} does not exist", f.display()))
            }
            _ => {}
        }
        match (self.vols.flat, &self.vols.per_rate) {
            (Some(_), Some(_)) | (None, None) => {
                return bad("vols", "give exactly one of `flat` and `per_rate`")
            }
            (None, Some(v)) if v.len() != self.tenor.n => {
                return bad("vols.per_rate", "need one value per rate (n values)")
            }
            _ => {}
        }
        let need = |v: Option<f64>, field: &str| -> Result<f64, LabError> {
            v.ok_or_else(|| {
                LabError::Config(format!("[driver.{field}] required for this driver type"))
            })
        };
        match self.driver.kind {
            DriverType::Brownian => {}
            DriverType::JumpNormal => {
                need(self.driver.intensity, "intensity")?;
                need(self.driver.jump_mean, "jump_mean")?;
                need(self.driver.jump_sd, "jump_sd")?;
            }
            DriverType::JumpDoubleExp => {
                need(self.driver.intensity, "intensity")?;
                need(self.driver.up_probability, "up_probability")?;
                need(self.driver.eta_up, "eta_up")?;
                need(self.driver.eta_down, "eta_down")?;
            }
        }
        if self.models.list.is_empty() {
            return bad("models.list", "no models requested");
        }
        if self.models.list.contains(&ModelKind::LmmPicard1)
            && self.driver.kind != DriverType::Brownian
        {
            return bad("models.list", "lmm-picard1 requires a Brownian-only driver");
        }
        if self.models.list.contains(&ModelKind::Affine) && self.affine.is_none() {
            return bad("affine", "the affine model needs an [affine] section");
        }
        if self.pricing.n_paths < 2 {
            return bad("pricing.n_paths", "need at least two paths");
        }
        if self.pricing.chunk_size < 2 {
            return bad("pricing.chunk_size", "need at least two paths per chunk");
        }
        if self.pricing.antithetic
            && (!self.pricing.n_paths.is_multiple_of(2)
                || !self.pricing.chunk_size.is_multiple_of(2))
        {
            return bad(
                "pricing",
                "antithetic sampling needs even n_paths and chunk_size",
            );
        }
        if self.pricing.steps_per_period < 4 {
            return bad(
                "pricing.steps_per_period",
                "the LIBOR schemes need at least 4 steps per period",
            );
        }
        if self.pricing.strikes.iter().any(|k| !(*k > 0.0)) {
            return bad("pricing.strikes", "strikes must be positive");
        }
        Ok(())
    }

    pub fn tenor(&self) -> Result<TenorStructure, LabError> {
        Ok(TenorStructure::new(self.tenor.delta, self.tenor.n)?)
    }

    pub fn curve(&self) -> Result<InitialCurve, LabError> {
        let tenor = self.tenor()?;
        match (&self.curve.file, self.curve.flat_rate) {
            (Some(f), _) => read_curve(f, &tenor),
            (None, Some(r)) => Ok(InitialCurve::flat(tenor, r)?),
            (None, None) => Err(LabError::Config("[curve] missing".into())),
        }
    }

    pub fn chars(&self) -> Result<LevyCharacteristics, LabError> {
        let d = &self.driver;
        let ch = match d.kind {
            DriverType::Brownian => LevyCharacteristics::brownian(d.drift, d.diffusion)?,
            DriverType::JumpNormal => LevyCharacteristics::new(
                d.drift,
                d.diffusion,
                d.intensity.unwrap_or(0.0),
                JumpLaw::Normal {
                    mean: d.jump_mean.unwrap_or(0.0),
                    sd: d.jump_sd.unwrap_or(0.0),
                },
            )?,
            DriverType::JumpDoubleExp => LevyCharacteristics::new(
                d.drift,
                d.diffusion,
                d.intensity.unwrap_or(0.0),
                JumpLaw::DoubleExponential {
                    p: d.up_probability.unwrap_or(0.5),
                    eta_up: d.eta_up.unwrap_or(1.0),
                    eta_down: d.eta_down.unwrap_or(1.0),
                },
            )?,
        };
        Ok(ch)
    }

    pub fn vols(&self) -> Result<VolatilitySurface, LabError> {
        let tenor = self.tenor()?;
        match (self.vols.flat, &self.vols.per_rate) {
            (Some(v), _) => Ok(VolatilitySurface::flat(&tenor, v)?),
            (None, Some(v)) => Ok(VolatilitySurface::per_rate(&tenor, v)?),
            (None, None) => Err(LabError::Config("[vols] missing".into())),
        }
    }

    pub fn cir(&self) -> Result<CirParams, LabError> {
        let a = self
            .affine
            .as_ref()
            .ok_or_else(|| LabError::Config("[affine] missing".into()))?;
        Ok(CirParams::new(
            a.mean_reversion,
            a.long_run_level,
            a.vol_of_vol,
            a.x0,
        )?)
    }

    pub fn affine_model(&self) -> Result<AffineLiborModel, LabError> {
        Ok(AffineLiborModel::fit_initial_curve(
            self.curve()?,
            self.cir()?,
        )?)
    }

    pub fn mfm_settings(&self) -> MfmSettings {
        let m = self.mfm.clone().unwrap_or_default();
        MfmSettings {
            quad_order: m.quad_order,
            grid_nodes: m.grid_nodes,
            width: m.width,
        }
    }

    pub fn has(&self, m: ModelKind) -> bool {
        self.models.list.contains(&m)
    }
}
