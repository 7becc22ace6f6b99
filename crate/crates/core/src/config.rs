//! Engine configuration: a TOML file plus `key=value` overrides.
//!
//! Every knob has a default so the engine runs with no config file at all
//! (offline modes need none). Unknown keys are rejected, both in the file
//! and in overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::AnalyzerConfig;
use crate::provider::PriceSheet;
use crate::sandbox::ExecLimits;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProviderConfig {
    pub base_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_output_tokens: Option<u32>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".to_string(),
            model_id: "offline-mock".to_string(),
            api_key_env: "SYMSOLVE_API_KEY".to_string(),
            temperature: 0.0,
            max_output_tokens: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsConfig {
    pub wall_seconds: f64,
    pub memory_mb: u64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            wall_seconds: 10.0,
            memory_mb: 512,
        }
    }
}

impl LimitsConfig {
    pub fn to_exec_limits(&self) -> ExecLimits {
        ExecLimits {
            wall_seconds: self.wall_seconds,
            memory_bytes: self.memory_mb * 1024 * 1024,
            network_allowed: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SwitchConfig {
    /// "zero_shot" or "trained".
    pub mode: String,
    pub model_path: Option<PathBuf>,
    pub threshold: f64,
}

impl Default for SwitchConfig {
    fn default() -> Self {
        Self {
            mode: "zero_shot".to_string(),
            model_path: None,
            threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchSettings {
    pub seed: u64,
    pub calibration_fraction: f64,
    pub concurrency: usize,
    pub pot_max_retries: u32,
    pub max_iterations: u32,
}

impl Default for BenchSettings {
    fn default() -> Self {
        Self {
            seed: 17,
            calibration_fraction: 0.2,
            concurrency: 8,
            pot_max_retries: 3,
            max_iterations: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CacheConfig {
    /// record | replay | passthrough
    pub mode: String,
    pub dir: Option<PathBuf>,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            mode: "passthrough".to_string(),
            dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SandboxConfig {
    pub interpreter: String,
    pub max_concurrent: usize,
}

impl Default for SandboxConfig {
    fn default() -> Self {
        Self {
            interpreter: "python3".to_string(),
            max_concurrent: 8,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineConfig {
    pub provider: ProviderConfig,
    pub prices: PriceSheet,
    pub limits: LimitsConfig,
    pub switch: SwitchConfig,
    pub bench: BenchSettings,
    pub cache: CacheConfig,
    pub sandbox: SandboxConfig,
    pub analyzer: AnalyzerConfig,
}

impl EngineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    /// Apply one `section.key=value` override on top of the parsed config.
    /// Unknown keys are rejected.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{spec}' is not key=value")))?;
        let key = key.trim();
        let value = value.trim();
        let parse_f64 = || -> Result<f64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("override '{key}' needs a number")))
        };
        let parse_u64 = || -> Result<u64> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("override '{key}' needs an integer")))
        };
        match key {
            "provider.base_url" => self.provider.base_url = value.to_string(),
            "provider.model_id" => self.provider.model_id = value.to_string(),
            "provider.api_key_env" => self.provider.api_key_env = value.to_string(),
            "provider.temperature" => self.provider.temperature = parse_f64()?,
            "prices.usd_per_million_input" => self.prices.usd_per_million_input = parse_f64()?,
            "prices.usd_per_million_output" => self.prices.usd_per_million_output = parse_f64()?,
            "limits.wall_seconds" => self.limits.wall_seconds = parse_f64()?,
            "limits.memory_mb" => self.limits.memory_mb = parse_u64()?,
            "switch.mode" => self.switch.mode = value.to_string(),
            "switch.model_path" => self.switch.model_path = Some(PathBuf::from(value)),
            "switch.threshold" => self.switch.threshold = parse_f64()?,
            "bench.seed" => self.bench.seed = parse_u64()?,
            "bench.calibration_fraction" => self.bench.calibration_fraction = parse_f64()?,
            "bench.concurrency" => self.bench.concurrency = parse_u64()? as usize,
            "bench.pot_max_retries" => self.bench.pot_max_retries = parse_u64()? as u32,
            "bench.max_iterations" => self.bench.max_iterations = parse_u64()? as u32,
            "cache.mode" => self.cache.mode = value.to_string(),
            "cache.dir" => self.cache.dir = Some(PathBuf::from(value)),
            "sandbox.interpreter" => self.sandbox.interpreter = value.to_string(),
            "sandbox.max_concurrent" => self.sandbox.max_concurrent = parse_u64()? as usize,
            other => return Err(Error::Config(format!("unknown override key '{other}'"))),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let cfg = EngineConfig::default();
        assert_eq!(cfg.bench.max_iterations, 30);
        assert_eq!(cfg.provider.temperature, 0.0);
        assert_eq!(cfg.limits.memory_mb, 512);
        assert!(!cfg.limits.to_exec_limits().network_allowed);
    }

    #[test]
    fn parses_partial_toml() {
        let cfg: EngineConfig =
            toml::from_str("[provider]\nmodel_id = \"m\"\n\n[bench]\nseed = 5\n").expect("parses");
        assert_eq!(cfg.provider.model_id, "m");
        assert_eq!(cfg.bench.seed, 5);
        assert_eq!(cfg.bench.concurrency, 8);
    }

    #[test]
    fn rejects_unknown_keys() {
        let result: std::result::Result<EngineConfig, _> =
            toml::from_str("[provider]\nmodle_id = \"typo\"\n");
        assert!(result.is_err());
    }

    #[test]
    fn overrides_apply_after_parse() {
        let mut cfg = EngineConfig::default();
        cfg.apply_override("bench.seed=99").expect("applies");
        cfg.apply_override("provider.model_id = live-model")
            .expect("applies");
        assert_eq!(cfg.bench.seed, 99);
        assert_eq!(cfg.provider.model_id, "live-model");
        assert!(cfg.apply_override("nope.nothing=1").is_err());
        assert!(cfg.apply_override("no-equals").is_err());
    }
}
