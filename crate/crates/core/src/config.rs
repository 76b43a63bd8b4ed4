//! Run configuration: flat `key = value` files merged over defaults, then
//! command-line overrides applied through the same keys.

use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bounds::{ConditioningKind, Regime};
use crate::channel::{mw_to_dbm, ChannelParams};
use crate::error::{Error, Result};
use crate::figures::ContourOptions;
use crate::monte_carlo::{ExperimentConfig, SchemeSelection};
use crate::output::Format;
use crate::protocol::{ExchangeMode, FrameSizes};

pub const KEYS: &[&str] = &[
    "pt_mw",
    "threshold_dbm",
    "k_db",
    "alpha",
    "sigma_db",
    "rts_bits",
    "coop_rts_bits",
    "cts_bits",
    "hts_bits",
    "data_bits",
    "lambda",
    "scheme",
    "class",
    "trials",
    "seed",
    "mode",
    "max_backoffs",
    "conditioning",
    "window_half_width",
    "workers",
    "r_k",
    "resolution",
    "out",
    "format",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pt_mw: f64,
    pub threshold_dbm: f64,
    pub k_db: f64,
    pub alpha: f64,
    pub sigma_db: f64,
    pub frames: FrameSizes,
    /// Retry cap for sampled exchanges.
    pub max_backoffs: u32,
    pub experiment: ExperimentConfig,
    pub contour: ContourOptions,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ch = ChannelParams::reference();
        Self {
            pt_mw: 1.0,
            threshold_dbm: ch.threshold_dbm(),
            k_db: ch.k_db(),
            alpha: ch.alpha(),
            sigma_db: ch.sigma_db(),
            frames: FrameSizes::default(),
            max_backoffs: ExchangeMode::DEFAULT_MAX_BACKOFFS,
            experiment: ExperimentConfig::default(),
            contour: ContourOptions::default(),
            out: None,
            format: Format::Csv,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: `{value}` is not a valid number")))
}

fn wrap<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Config(format!("`{key}`: {e}")))
}

/// Parses `A`, `B`, `C`, `D` (both Type D regimes), `D1`, `D2` or `all`, comma-separated.
pub fn parse_regimes(s: &str) -> Result<Vec<Regime>> {
    let mut out: Vec<Regime> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let add: Vec<Regime> = match part.to_ascii_uppercase().as_str() {
            "ALL" => Regime::ALL.to_vec(),
            "D" => vec![Regime::D1, Regime::D2],
            _ => vec![part.parse()?],
        };
        for r in add {
            if !out.contains(&r) {
                out.push(r);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("class", "no link class given"));
    }
    Ok(out)
}

impl RunConfig {
    /// Applies one override. Invariants that involve several keys are checked by [`RunConfig::finish`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let v = value.trim();
        let exp = &mut self.experiment;
        match key {
            "pt_mw" => self.pt_mw = num(key, v)?,
            "threshold_dbm" => self.threshold_dbm = num(key, v)?,
            "k_db" => self.k_db = num(key, v)?,
            "alpha" => self.alpha = num(key, v)?,
            "sigma_db" => self.sigma_db = num(key, v)?,
            "rts_bits" => self.frames.rts = num(key, v)?,
            "coop_rts_bits" => self.frames.coop_rts = num(key, v)?,
            "cts_bits" => self.frames.cts = num(key, v)?,
            "hts_bits" => self.frames.hts = num(key, v)?,
            "data_bits" => self.frames.data = num(key, v)?,
            "lambda" => {
                exp.densities = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            "scheme" => exp.scheme = wrap(key, v.parse::<SchemeSelection>())?,
            "class" => exp.regimes = wrap(key, parse_regimes(v))?,
            "trials" => exp.trials = num(key, v)?,
            "seed" => exp.seed = num(key, v)?,
            "mode" => {
                exp.mode = match v.to_ascii_lowercase().as_str() {
                    "analytic" => ExchangeMode::Analytic,
                    "sampled" => ExchangeMode::Sampled {
                        max_backoffs: self.max_backoffs,
                    },
                    other => return Err(Error::Config(format!("`mode`: expected analytic or sampled, got `{other}`"))),
                }
            }
            "max_backoffs" => self.max_backoffs = num(key, v)?,
            "conditioning" => exp.conditioning = wrap(key, v.parse::<ConditioningKind>())?,
            "window_half_width" => exp.window_half_width = num(key, v)?,
            "workers" => exp.workers = Some(num(key, v)?),
            "r_k" => self.contour.r_k = Some(num(key, v)?),
            "resolution" => self.contour.resolution = num(key, v)?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = wrap(key, v.parse::<Format>())?,
            other => {
                return Err(Error::Config(format!(
                    "unknown key `{other}` (valid keys: {})",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    /// Builds the channel and validates every invariant; call after the last [`RunConfig::set`].
    pub fn finish(mut self) -> Result<Self> {
        if !(self.pt_mw > 0.0) {
            return Err(Error::Config(format!("`pt_mw`: must be > 0, got {}", self.pt_mw)));
        }
        let channel = ChannelParams::new(mw_to_dbm(self.pt_mw), self.threshold_dbm, self.k_db, self.alpha, self.sigma_db)
            .map_err(|e| Error::Config(e.to_string()))?;
        self.experiment.channel = channel;
        if let ExchangeMode::Sampled { max_backoffs } = &mut self.experiment.mode {
            *max_backoffs = self.max_backoffs;
        }
        self.experiment.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.contour.resolution > 0.0 && self.contour.resolution.is_finite()) {
            return Err(Error::Config(format!("`resolution`: must be > 0, got {}", self.contour.resolution)));
        }
        Ok(self)
    }

    pub fn channel(&self) -> ChannelParams {
        self.experiment.channel
    }

    /// Every setting that can change numeric output, one `key=value` per line in fixed order.
    pub fn canonical(&self) -> String {
        let e = &self.experiment;
        let mut s = String::new();
        let lambda: Vec<String> = e.densities.iter().map(|d| format!("{d:?}")).collect();
        let class: Vec<String> = e.regimes.iter().map(Regime::to_string).collect();
        let mode = match e.mode {
            ExchangeMode::Analytic => "analytic".to_string(),
            ExchangeMode::Sampled { max_backoffs } => format!("sampled/{max_backoffs}"),
        };
        for (k, v) in [
            ("pt_mw", format!("{:?}", self.pt_mw)),
            ("threshold_dbm", format!("{:?}", self.threshold_dbm)),
            ("k_db", format!("{:?}", self.k_db)),
            ("alpha", format!("{:?}", self.alpha)),
            ("sigma_db", format!("{:?}", self.sigma_db)),
            ("lambda", lambda.join(",")),
            ("scheme", e.scheme.to_string()),
            ("class", class.join(",")),
            ("trials", e.trials.to_string()),
            ("seed", e.seed.to_string()),
            ("mode", mode),
            ("conditioning", e.conditioning.to_string()),
            ("window_half_width", format!("{:?}", e.window_half_width)),
            ("r_k", format!("{:?}", self.contour.r_k)),
            ("resolution", format!("{:?}", self.contour.resolution)),
        ] {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    apply_str(&mut cfg, text)?;
    cfg.finish()
}

pub fn apply_str(cfg: &mut RunConfig, text: &str) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{line}`", n + 1)))?;
        cfg.set(k, v).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("line {}: {m}", n + 1)),
            other => other,
        })?;
    }
    Ok(())
}

pub fn parse_config_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_reference() {
        let c = parse_config_str("").unwrap();
        assert_eq!(c.channel(), ChannelParams::reference());
        assert_eq!(c.frames, FrameSizes::default());
        assert_eq!(c.experiment.densities.len(), 10);
    }

    #[test]
    fn invariant_violations_are_rejected() {
        for text in ["alpha = 9", "sigma_db = 0", "trials = 1", "lambda = -0.1", "resolution = 0", "pt_mw = 0"] {
            assert!(matches!(parse_config_str(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let e = parse_config_str("colour = red").unwrap_err().to_string();
        assert!(e.contains("unknown key `colour`") && e.contains("line 1"));
        assert!(parse_config_str("alpha three").is_err());
        assert!(parse_config_str("alpha = three").is_err());
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config_str(
            "# sweep\nlambda = 0.001, 0.002\nclass = D\nmode = sampled\nmax_backoffs = 5\nconditioning = k=4\n",
        )
        .unwrap();
        assert_eq!(c.experiment.densities, vec![0.001, 0.002]);
        assert_eq!(c.experiment.regimes, vec![Regime::D1, Regime::D2]);
        assert_eq!(c.experiment.mode, ExchangeMode::Sampled { max_backoffs: 5 });
        assert_eq!(c.experiment.conditioning, ConditioningKind::KNearest { k: 4 });
    }

    #[test]
    fn hash_tracks_numeric_settings_only() {
        let a = parse_config_str("seed = 3").unwrap();
        let b = parse_config_str("seed = 3\nworkers = 2\nformat = json").unwrap();
        let c = parse_config_str("seed = 4").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
