use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fxswap_core::market_data::{load_fx_csv, load_fx_pair_csvs, FxSeries};
use fxswap_core::{BacktestConfig, Currency, ScenarioSpec};
use serde::Deserialize;

pub const DEFAULT_FX: &str = "data/fx_sample.csv";

/// Optional run settings read from `--config <file>`. Relative paths are
/// resolved against the file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fx: Option<PathBuf>,
    pub fx_eur: Option<PathBuf>,
    pub fx_sgd: Option<PathBuf>,
    /// Preset names or scenario file paths.
    pub scenarios: Option<Vec<String>>,
    pub volumes_eur: Option<Vec<f64>>,
    pub gas_levels_eur: Option<Vec<f64>>,
    pub tvl_levels_chf: Option<Vec<f64>>,
    pub l1_gas_eur: Option<f64>,
    pub l2_divisor: Option<f64>,
    pub pay: Option<Currency>,
    pub receive: Option<Currency>,
}

impl RunConfig {
    /// `"default"` yields the built-in settings.
    pub fn load(arg: Option<&str>) -> Result<Self> {
        let path = match arg {
            None | Some("default") => return Ok(Self::default()),
            Some(p) => Path::new(p),
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: Self = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.fx, &mut cfg.fx_eur, &mut cfg.fx_sgd].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(names) = &mut cfg.scenarios {
            for n in names.iter_mut() {
                if ScenarioSpec::preset(n).is_none() && Path::new(n).is_relative() {
                    *n = base.join(&*n).display().to_string();
                }
            }
        }
        Ok(cfg)
    }

    pub fn apply(&self, mut cfg: BacktestConfig) -> Result<BacktestConfig> {
        if let Some(names) = &self.scenarios {
            cfg.scenarios = resolve_scenarios(names)?;
        }
        if let Some(v) = &self.volumes_eur {
            cfg.volumes_eur = v.clone();
        }
        if let Some(v) = &self.gas_levels_eur {
            cfg.gas_levels_eur = v.clone();
        }
        if let Some(v) = &self.tvl_levels_chf {
            cfg.tvl_levels_chf = v.clone();
        }
        if let Some(g) = self.l1_gas_eur {
            cfg.gas.l1_gas_eur = g;
        }
        if let Some(d) = self.l2_divisor {
            cfg.gas.l2_divisor = d;
        }
        if let Some(c) = self.pay {
            cfg.pay = c;
        }
        if let Some(c) = self.receive {
            cfg.receive = c;
        }
        Ok(cfg)
    }

    /// FX source: explicit flags win over the config file, which wins over
    /// the bundled sample.
    pub fn load_series(&self, fx: Option<&Path>, pair: Option<(&Path, &Path)>) -> Result<FxSeries> {
        if let Some(path) = fx {
            return load_fx_csv(path).context("loading FX file");
        }
        if let Some((eur, sgd)) = pair {
            return load_fx_pair_csvs(eur, sgd).context("loading FX pair files");
        }
        match (&self.fx, &self.fx_eur, &self.fx_sgd) {
            (Some(path), None, None) => load_fx_csv(path).context("loading FX file"),
            (None, Some(eur), Some(sgd)) => load_fx_pair_csvs(eur, sgd).context("loading FX pair files"),
            (None, None, None) => load_fx_csv(DEFAULT_FX).context("loading FX file"),
            _ => bail!("config needs either fx or both fx_eur and fx_sgd"),
        }
    }
}

pub fn resolve_scenarios(names: &[String]) -> Result<Vec<ScenarioSpec>> {
    names
        .iter()
        .map(|n| ScenarioSpec::resolve(n).with_context(|| format!("scenario {n:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "fx = \"fx.csv\"\nscenarios = [\"l1-mariana\", \"mine.toml\"]\nvolumes_eur = [5.0]\n").unwrap();
        let cfg = RunConfig::load(Some(path.to_str().unwrap())).unwrap();
        assert_eq!(cfg.fx.unwrap(), dir.path().join("fx.csv"));
        let names = cfg.scenarios.unwrap();
        assert_eq!(names[0], "l1-mariana");
        assert_eq!(names[1], dir.path().join("mine.toml").display().to_string());
    }

    #[test]
    fn unknown_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "volume = [5.0]\n").unwrap();
        assert!(RunConfig::load(Some(path.to_str().unwrap())).is_err());
    }

    #[test]
    fn overrides_apply() {
        let rc = RunConfig {
            volumes_eur: Some(vec![2.0]),
            l1_gas_eur: Some(30.0),
            ..RunConfig::default()
        };
        let cfg = rc.apply(BacktestConfig::default()).unwrap();
        assert_eq!(cfg.volumes_eur, vec![2.0]);
        assert_eq!(cfg.gas.l1_gas_eur, 30.0);
        assert_eq!(cfg.scenarios.len(), 2);
    }
}
