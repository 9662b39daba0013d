//! Run configuration: a JSON file, optionally named by `VOCALIS_CONFIG`,
//! overridden by command-line flags.
//!
//! ```json
//! {
//!   "grid_ms": 200, "window_ms": 200, "seed": 20240601,
//!   "bootstrap_resamples": 10000, "confidence": 0.95, "zero_policy": "wilcoxon",
//!   "frames_per_pitch": 5,
//!   "server": { "bind": "127.0.0.1", "port": 8080, "reference_dir": "refs", "tick_hz": 30 }
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vocalis_core::dsp::rms::DEFAULT_RMS_WINDOW_MS;
use vocalis_core::dsp::MvcProtocol;
use vocalis_core::geometry::DEFAULT_FRAMES_PER_PITCH;
use vocalis_core::stats::effect::{BootstrapConfig, DEFAULT_BOOTSTRAP_RESAMPLES, DEFAULT_BOOTSTRAP_SEED};
use vocalis_core::stats::wilcoxon::ZeroPolicy;
use vocalis_core::stats::PairedTestConfig;
use vocalis_engine::metrics::DEFAULT_GRID_MS;
use vocalis_engine::{MetricsConfig, ServerConfig};

use crate::error::CliError;

pub const CONFIG_ENV: &str = "VOCALIS_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid_ms: f64,
    /// RMS window, also used as the hop.
    pub window_ms: f64,
    pub seed: u64,
    pub bootstrap_resamples: usize,
    pub confidence: f64,
    pub zero_policy: ZeroPolicy,
    pub frames_per_pitch: usize,
    pub server: ServerConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid_ms: DEFAULT_GRID_MS,
            window_ms: DEFAULT_RMS_WINDOW_MS,
            seed: DEFAULT_BOOTSTRAP_SEED,
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
            confidence: 0.95,
            zero_policy: ZeroPolicy::Wilcoxon,
            frames_per_pitch: DEFAULT_FRAMES_PER_PITCH,
            server: ServerConfig::default(),
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid_ms: Option<f64>,
    pub window_ms: Option<f64>,
    pub seed: Option<u64>,
    pub bind: Option<String>,
    pub port: Option<u16>,
    pub reference_dir: Option<PathBuf>,
    pub tick_hz: Option<f64>,
}

impl Config {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::from(e).in_file(path))?;
        serde_json::from_str(&text).map_err(|e| CliError::from(e).in_file(path))
    }

    /// Flag path first, then the environment fallback, then defaults.
    pub fn resolve(flag: Option<&Path>, env: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match flag.or(env) {
            Some(path) => Self::read(path)?,
            None => Self::default(),
        };
        if let Some(v) = overrides.grid_ms {
            cfg.grid_ms = v;
        }
        if let Some(v) = overrides.window_ms {
            cfg.window_ms = v;
        }
        if let Some(v) = overrides.seed {
            cfg.seed = v;
        }
        if let Some(v) = &overrides.bind {
            cfg.server.bind = v.clone();
        }
        if let Some(v) = overrides.port {
            cfg.server.port = v;
        }
        if let Some(v) = &overrides.reference_dir {
            cfg.server.reference_dir = Some(v.clone());
        }
        if let Some(v) = overrides.tick_hz {
            cfg.server.tick_hz = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("grid_ms", self.grid_ms), ("window_ms", self.window_ms), ("tick_hz", self.server.tick_hz)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::input(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(CliError::input(format!("confidence must lie in (0, 1), got {}", self.confidence)));
        }
        if self.bootstrap_resamples == 0 {
            return Err(CliError::input("bootstrap_resamples must be positive"));
        }
        Ok(())
    }

    pub fn metrics(&self) -> MetricsConfig {
        MetricsConfig { grid_ms: self.grid_ms, ..self.server.metrics }
    }

    pub fn server(&self) -> ServerConfig {
        ServerConfig { metrics: self.metrics(), ..self.server.clone() }
    }

    pub fn protocol(&self) -> MvcProtocol {
        MvcProtocol::default()
    }

    pub fn paired_test(&self) -> PairedTestConfig {
        PairedTestConfig {
            zero_policy: self.zero_policy,
            bootstrap: BootstrapConfig { resamples: self.bootstrap_resamples, seed: self.seed, confidence: self.confidence },
        }
    }
}
