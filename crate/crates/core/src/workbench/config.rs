use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::arithmetic::is_prime;
use crate::numerics::{QuadratureSpec, Scheme};
use crate::spectral::TestFunctionSpec;
use crate::{Error, Result};

/// Inputs of a moment computation, read from flat `key = value` text.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkbenchConfig {
    pub k: u32,
    /// 1 for the untwisted moment.
    pub p: u64,
    pub t: f64,
    pub theta: f64,
    pub a0: u32,
    pub quadrature: QuadratureSpec,
    /// Lattice step of the μ-plane sums.
    pub spectral_step: f64,
    /// Truncation of the u-line for the maximal Eisenstein term; `None` reaches
    /// as far as the test-function window.
    pub u_height: Option<f64>,
    /// Number of eigenform coefficients to build or load.
    pub n_max: usize,
    pub maass_data_path: Option<PathBuf>,
    pub cache_dir: PathBuf,
    pub output_path: PathBuf,
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        Self {
            k: 12,
            p: 1,
            t: 10.0,
            theta: 0.5,
            a0: 2,
            quadrature: QuadratureSpec::default(),
            spectral_step: 0.1,
            u_height: None,
            n_max: 20_000,
            maass_data_path: None,
            cache_dir: PathBuf::from("cache"),
            output_path: PathBuf::from("report.json"),
        }
    }
}

/// Keys accepted in config files and as command-line flags, in canonical order.
pub const CONFIG_KEYS: [&str; 15] = [
    "k",
    "p",
    "T",
    "theta",
    "A0",
    "step",
    "height",
    "tolerance",
    "scheme",
    "spectral_step",
    "u_height",
    "n_max",
    "maass_data_path",
    "cache_dir",
    "output_path",
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("{key} = {value:?} is not a valid number"))
}

impl WorkbenchConfig {
    /// Reads a config on top of the defaults. Later lines override earlier ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, got {line:?}"),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|message| Error::Validation { line: i + 1, message })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let q = &mut self.quadrature;
        match key {
            "k" => self.k = parse_num(key, value)?,
            "p" => self.p = parse_num(key, value)?,
            "T" => self.t = parse_num(key, value)?,
            "theta" => self.theta = parse_num(key, value)?,
            "A0" => self.a0 = parse_num(key, value)?,
            "step" => q.step = parse_num(key, value)?,
            "height" => q.height = parse_num(key, value)?,
            "tolerance" => q.tolerance = parse_num(key, value)?,
            "scheme" => {
                q.scheme = match value {
                    "trapezoid" => Scheme::Trapezoid,
                    "double_exponential" => Scheme::DoubleExponential,
                    _ => return Err(format!("unknown scheme {value:?}")),
                }
            }
            "spectral_step" => self.spectral_step = parse_num(key, value)?,
            "u_height" => {
                self.u_height = match value {
                    "auto" | "" => None,
                    v => Some(parse_num(key, v)?),
                }
            }
            "n_max" => self.n_max = parse_num(key, value)?,
            "maass_data_path" => {
                self.maass_data_path = match value {
                    "" | "none" => None,
                    v => Some(PathBuf::from(v)),
                }
            }
            "cache_dir" => self.cache_dir = PathBuf::from(value),
            "output_path" => self.output_path = PathBuf::from(value),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Checks everything a moment computation needs.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !self.k.is_multiple_of(4) || !matches!(self.k, 12 | 16 | 20) {
            return bad(format!("k = {} must be 12, 16 or 20 (k ≡ 0 mod 4)", self.k));
        }
        if self.p != 1 && !is_prime(self.p) {
            return bad(format!("p = {} must be 1 or a prime", self.p));
        }
        if !(self.spectral_step > 0.0 && self.spectral_step < 1.0) {
            return bad(format!("spectral_step = {} outside (0, 1)", self.spectral_step));
        }
        if let Some(h) = self.u_height {
            if !(h > 0.0 && h.is_finite()) {
                return bad(format!("u_height = {h} must be positive"));
            }
        }
        if self.n_max < 100 {
            return bad(format!("n_max = {} below 100", self.n_max));
        }
        if (self.p as usize) > self.n_max {
            return bad(format!("p = {} beyond n_max = {}", self.p, self.n_max));
        }
        self.quadrature.validate()?;
        self.test_spec()?;
        Ok(())
    }

    pub fn test_spec(&self) -> Result<TestFunctionSpec> {
        TestFunctionSpec::with_default_direction(self.t, self.theta, self.a0)
    }

    /// Text form of one key, as [`WorkbenchConfig::canonical`] writes it.
    pub fn get(&self, key: &str) -> Option<String> {
        let q = &self.quadrature;
        let path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        Some(match key {
            "k" => self.k.to_string(),
            "p" => self.p.to_string(),
            "T" => format!("{:?}", self.t),
            "theta" => format!("{:?}", self.theta),
            "A0" => self.a0.to_string(),
            "step" => format!("{:?}", q.step),
            "height" => format!("{:?}", q.height),
            "tolerance" => format!("{:?}", q.tolerance),
            "scheme" => match q.scheme {
                Scheme::Trapezoid => "trapezoid".into(),
                Scheme::DoubleExponential => "double_exponential".into(),
            },
            "spectral_step" => format!("{:?}", self.spectral_step),
            "u_height" => self.u_height.map_or("auto".to_string(), |h| format!("{h:?}")),
            "n_max" => self.n_max.to_string(),
            "maass_data_path" => path(&self.maass_data_path),
            "cache_dir" => self.cache_dir.display().to_string(),
            "output_path" => self.output_path.display().to_string(),
            _ => return None,
        })
    }

    /// Every key in canonical order; parses back to the same config.
    pub fn canonical(&self) -> String {
        CONFIG_KEYS
            .iter()
            .map(|k| format!("{k} = {}\n", self.get(k).unwrap_or_default()))
            .collect()
    }

    /// SHA-256 of the keys that affect numerical output (paths excluded).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for k in CONFIG_KEYS.iter().filter(|k| !matches!(**k, "cache_dir" | "output_path")) {
            h.update(format!("{k}={}\n", self.get(k).unwrap_or_default()).as_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}
