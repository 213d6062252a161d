//! Run configuration: a `key = value` or JSON file plus overrides.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use lda_core::annual_loss::DEFAULT_DRAWS;
use lda_core::selection::{QsGrid, SelectionMode, DEFAULT_BOOTSTRAP};
use lda_core::SeverityFamily;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "AIC_AD")]
    AicAd,
    #[serde(rename = "QS")]
    Qs,
}

impl Mode {
    pub fn selection(self) -> SelectionMode {
        match self {
            Mode::AicAd => SelectionMode::Aic,
            Mode::Qs => SelectionMode::QuantileScore,
        }
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "AIC_AD" | "AIC" => Ok(Mode::AicAd),
            "QS" => Ok(Mode::Qs),
            _ => Err(ConfigError::Invalid(format!("unknown mode {s:?}; expected AIC_AD or QS"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Family codes (`LGN`, `BUR`, ...) or names.
    pub candidates: Vec<String>,
    pub seed: u64,
    /// Simulated annual losses per ORC.
    pub draws: usize,
    pub bootstrap: usize,
    /// AD test level.
    pub ad_level: f64,
    pub qs_lo: f64,
    pub qs_hi: f64,
    pub qs_points: usize,
    pub mode: Mode,
    /// Capital quantile level.
    pub alpha: f64,
    /// ORCs with fewer reported losses are not fitted.
    pub min_obs: usize,
    pub restarts: usize,
    /// Redraw non-positive severities in the annual-loss simulation.
    pub reject_nonpositive: bool,
    /// Fit with the censored likelihood where below-threshold counts exist.
    pub censored: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = QsGrid::default();
        Self {
            candidates: SeverityFamily::ALL.iter().map(|f| f.code().to_owned()).collect(),
            seed: 0,
            draws: DEFAULT_DRAWS,
            bootstrap: DEFAULT_BOOTSTRAP,
            ad_level: 0.95,
            qs_lo: grid.lo,
            qs_hi: grid.hi,
            qs_points: grid.points,
            mode: Mode::AicAd,
            alpha: 0.999,
            min_obs: 30,
            restarts: 4,
            reject_nonpositive: false,
            censored: false,
        }
    }
}

impl RunConfig {
    /// Load from a file; JSON if it parses as a JSON object, otherwise
    /// `key = value` lines with `#` comments.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let c = if text.trim_start().starts_with('{') {
            serde_json::from_str(text)?
        } else {
            let mut c = Self::default();
            for (i, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| ConfigError::Line { line: i + 1, message: format!("expected key = value, got {line:?}") })?;
                c.set(k.trim(), v.trim()).map_err(|e| ConfigError::Line { line: i + 1, message: e.to_string() })?;
            }
            c
        };
        c.validate()?;
        Ok(c)
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
            v.parse().map_err(|_| ConfigError::Invalid(format!("{key}: cannot parse {v:?}")))
        }
        match key {
            "candidates" => {
                self.candidates = value.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect()
            }
            "seed" => self.seed = num(key, value)?,
            "draws" | "M" => self.draws = num(key, value)?,
            "bootstrap" | "B" => self.bootstrap = num(key, value)?,
            "ad_level" => self.ad_level = num(key, value)?,
            "qs_lo" => self.qs_lo = num(key, value)?,
            "qs_hi" => self.qs_hi = num(key, value)?,
            "qs_points" => self.qs_points = num(key, value)?,
            "mode" => self.mode = value.parse()?,
            "alpha" => self.alpha = num(key, value)?,
            "min_obs" => self.min_obs = num(key, value)?,
            "restarts" => self.restarts = num(key, value)?,
            "reject_nonpositive" => self.reject_nonpositive = num(key, value)?,
            "censored" => self.censored = num(key, value)?,
            _ => return Err(ConfigError::Invalid(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.families()?;
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_owned()));
        if self.candidates.is_empty() {
            return bad("candidates must not be empty");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.ad_level > 0.0 && self.ad_level < 1.0) {
            return bad("ad_level must lie in (0, 1)");
        }
        if !(0.0 < self.qs_lo && self.qs_lo < self.qs_hi && self.qs_hi < 1.0) || self.qs_points < 2 {
            return bad("QS grid needs 0 < qs_lo < qs_hi < 1 and at least 2 points");
        }
        if self.draws < 4 {
            return bad("draws must be at least 4");
        }
        if self.min_obs < 1 {
            return bad("min_obs must be at least 1");
        }
        Ok(())
    }

    pub fn families(&self) -> Result<Vec<SeverityFamily>, ConfigError> {
        self.candidates
            .iter()
            .map(|c| c.parse::<SeverityFamily>().map_err(|_| ConfigError::Invalid(format!("unknown family {c:?}"))))
            .collect()
    }

    pub fn grid(&self) -> QsGrid {
        QsGrid { lo: self.qs_lo, hi: self.qs_hi, points: self.qs_points }
    }
}

/// Output directory: explicit value, else `LDA_OUTPUT_DIR`, else `lda-out`.
pub fn output_dir(explicit: Option<PathBuf>) -> PathBuf {
    explicit
        .or_else(|| std::env::var_os("LDA_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lda-out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::default();
        assert_eq!(c.draws, 250_000);
        assert_eq!(c.alpha, 0.999);
        assert_eq!(c.families().unwrap().len(), 9);
        c.validate().unwrap();
    }

    #[test]
    fn key_value_and_json_agree() {
        let kv = RunConfig::parse("# run\nseed = 7\nmode = QS\ncandidates = LGN, BUR\ndraws=1000\n").unwrap();
        let js = RunConfig::parse(r#"{"seed": 7, "mode": "QS", "candidates": ["LGN", "BUR"], "draws": 1000}"#).unwrap();
        assert_eq!(kv, js);
        assert_eq!(kv.mode, Mode::Qs);
    }

    #[test]
    fn rejects_unknown() {
        assert!(RunConfig::parse("sede = 1\n").is_err());
        assert!(RunConfig::parse("candidates = LGN, XYZ\n").is_err());
        assert!(RunConfig::parse(r#"{"sede": 1}"#).is_err());
        assert!(RunConfig::parse("alpha = 1.5\n").is_err());
    }
}
