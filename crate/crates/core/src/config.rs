//! JSON run configuration shared by the command-line tools.

use crate::channel::{derive_seed, ChannelConfig};
use crate::editecc::{InnerMode, Scheme};
use crate::error::{Error, Result};
use crate::pipeline::SchemeConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepGrid {
    pub coverages: Vec<f64>,
    pub trials: usize,
    pub modes: Vec<InnerMode>,
    /// Size of the random test file; defaults to the block capacity.
    pub file_bytes: Option<usize>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            coverages: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            trials: 200,
            modes: vec![InnerMode::Detection, InnerMode::Decoding],
            file_bytes: None,
        }
    }
}

/// Fallback output locations used when a command is not given one.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub design: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub reads: Option<PathBuf>,
    pub truth: Option<PathBuf>,
    pub recovered: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Scheme,
    #[serde(default)]
    pub k_p: Option<usize>,
    #[serde(default)]
    pub n_oligos: Option<usize>,
    /// Segment width in bits; only checked against the scheme.
    #[serde(default)]
    pub l_d: Option<usize>,
    #[serde(default)]
    pub channel: ChannelConfig,
    #[serde(default)]
    pub sweep: SweepGrid,
    #[serde(default)]
    pub mode: InnerMode,
    #[serde(default)]
    pub master_seed: u64,
    /// Attach primers to designs and simulated reads, trim them on decode.
    #[serde(default)]
    pub primers: bool,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn new(scheme: Scheme) -> Self {
        RunConfig {
            scheme,
            k_p: None,
            n_oligos: None,
            l_d: None,
            channel: ChannelConfig::default(),
            sweep: SweepGrid::default(),
            mode: InnerMode::default(),
            master_seed: 0,
            primers: false,
            outputs: OutputPaths::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let full = SchemeConfig::full(self.scheme);
        let cfg = SchemeConfig::desk(self.scheme, self.k_p.unwrap_or(full.k_p), self.n_oligos.unwrap_or(full.n_oligos));
        if let Some(l) = self.l_d {
            if l != cfg.segment_bits() {
                return Err(Error::InvalidConfig(format!(
                    "l_d = {l} but scheme {} segments are {} bits",
                    u8::from(self.scheme),
                    cfg.segment_bits()
                )));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Channel parameters seeded from the master seed and `labels`.
    pub fn channel_for(&self, labels: &[u64]) -> ChannelConfig {
        ChannelConfig { master_seed: derive_seed(self.master_seed, labels), ..self.channel }
    }

    pub fn primer_pair(&self) -> Option<(&'static str, &'static str)> {
        self.primers.then_some((crate::pipeline::PRIMER_5, crate::pipeline::PRIMER_3))
    }

    pub fn validate(&self) -> Result<()> {
        self.scheme_config()?;
        self.channel.validate()?;
        let g = &self.sweep;
        if g.trials == 0 {
            return Err(Error::InvalidConfig("sweep needs at least one trial".into()));
        }
        if g.coverages.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidConfig("coverages must be positive".into()));
        }
        Ok(())
    }
}
