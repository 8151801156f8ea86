//! Run configuration: one TOML document, unknown keys rejected, dotted
//! `key=value` overrides applied before deserialization.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::construction::{ConstructionParams, GSpec};
use crate::error::{Error, Result};
use crate::evolve::EvolveConfig;
use crate::gluing::GluingPlan;
use crate::sobolev::{Method, Resolution, SobolevSpec};

/// Version of the config grammar, the CSV column set and the JSON summaries.
pub const SCHEMA_VERSION: &str = "polar-euler/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SobolevMonitor {
    pub orders: Vec<f64>,
    pub method: Method,
    pub homogeneous: bool,
    pub resolution: Resolution,
}

impl Default for SobolevMonitor {
    fn default() -> Self {
        SobolevMonitor { orders: vec![0.5], method: Method::Hankel, homogeneous: true, resolution: Resolution::default() }
    }
}

impl SobolevMonitor {
    pub fn specs(&self) -> Vec<SobolevSpec> {
        self.orders
            .iter()
            .map(|&s| SobolevSpec {
                s,
                method: self.method,
                homogeneous: self.homogeneous,
                resolution: self.resolution.clone(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Diagnostics {
    pub pseudo: bool,
    pub inflation: bool,
    pub exp_decay: bool,
    pub loglip: bool,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics { pseudo: true, inflation: true, exp_decay: false, loglip: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    pub n_list: Vec<usize>,
    pub r_probe: f64,
    /// Bump support of `g`.
    pub g_lo: f64,
    pub g_hi: f64,
    /// Radial nodes of the log grid covering the probe and the support.
    pub nodes: usize,
}

impl Default for DecayConfig {
    fn default() -> Self {
        DecayConfig { n_list: vec![4, 8, 16, 32], r_probe: 1.0 / 24.0, g_lo: 1.0, g_hi: 2.0, nodes: 1024 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogLipConfig {
    pub pairs: usize,
}

impl Default for LogLipConfig {
    fn default() -> Self {
        LogLipConfig { pairs: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegNormConfig {
    pub eta: f64,
    /// Angular frequency of `g cos(Nα − Kr)`.
    pub n: usize,
    pub g: GSpec,
}

impl Default for NegNormConfig {
    fn default() -> Self {
        NegNormConfig { eta: 0.25, n: 3, g: GSpec { amp: Some(1.0), ..GSpec::default() } }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    Lambda,
    N,
    Beta,
    S,
    K,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Full build + evolve per value.
    Evolve,
    /// Build only; reports the initial norm of the first monitored order.
    Build,
    /// `max|v_r|` at the probe radius for `g(r)cos(Nα)`.
    ExpDecay,
    /// `sup|v_r|` on the support for `g(r)cos(Nα)`.
    VrScaling,
    /// `‖g cos(Nα − Kr)‖_{Ḣ^{−η}}`.
    NegNorm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub mode: SweepMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { axis: SweepAxis::N, values: vec![8.0, 16.0, 32.0, 64.0], mode: SweepMode::ExpDecay }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Falls back to `$POLAR_EULER_OUT`, then `./out`.
    pub dir: Option<PathBuf>,
    /// Write a field checkpoint every this many monitor rows.
    pub checkpoint_stride: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub construction: ConstructionParams,
    pub evolve: EvolveConfig,
    pub sobolev: SobolevMonitor,
    pub diagnostics: Diagnostics,
    pub decay: DecayConfig,
    pub loglip: LogLipConfig,
    pub negnorm: NegNormConfig,
    pub sweep: SweepConfig,
    pub glue: GluingPlan,
    pub output: OutputConfig,
}

fn config_err(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, &[])
    }

    /// Parses `text` and applies `key.path=value` overrides in order.
    pub fn parse_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = text.parse().map_err(config_err)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc).try_into().map_err(config_err)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_with(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(config_err)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }

    /// Evolution settings with the monitored norms filled in.
    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig { sobolev: self.sobolev.specs(), ..self.evolve.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |r: Result<()>| r.map_err(|e| Error::Config(e.to_string()));
        for spec in self.sobolev.specs() {
            wrap(spec.validate())?;
        }
        wrap(self.evolve_config().validate())?;
        wrap(self.glue.validate())?;
        if self.sweep.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("sweep values must increase strictly".into()));
        }
        // TOML integers are signed
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(format!("seed {} exceeds {}", self.seed, i64::MAX)));
        }
        if self.sweep.values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        if self.output.checkpoint_stride == Some(0) {
            return Err(Error::Config("checkpoint_stride must be >= 1".into()));
        }
        if !(self.negnorm.eta > 0.0 && self.negnorm.eta < 1.0) {
            return Err(Error::Config(format!("negnorm.eta must lie in (0, 1), got {}", self.negnorm.eta)));
        }
        Ok(())
    }

    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        cli.map(Path::to_path_buf)
            .or_else(|| self.output.dir.clone())
            .or_else(|| std::env::var_os("POLAR_EULER_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// `a.b.c=value`: the value is read as a TOML literal, or as a bare string
/// when it does not parse as one.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let mut table = doc;
    for part in &path[..path.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override `{key}` descends into a non-table")))?;
    }
    table.insert(path[path.len() - 1].to_string(), value);
    Ok(())
}
