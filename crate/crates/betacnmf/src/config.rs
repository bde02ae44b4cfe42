//! Error taxonomy, the benchmark configuration, and the flat
//! `key = value` config/manifest format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use betacnmf_core::Method;

/// Application error with a scriptable exit code:
/// 1 usage, 2 I/O, 3 parse/consistency, 4 numerical failure.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Io(String),
    Parse(String),
    Numerical(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Io(_) => 2,
            AppError::Parse(_) => 3,
            AppError::Numerical(_) => 4,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Usage(m) => write!(f, "usage error: {m}"),
            AppError::Io(m) => write!(f, "I/O error: {m}"),
            AppError::Parse(m) => write!(f, "parse error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, AppError>;

/// Effective benchmark configuration. Serialized one `key = value` per
/// line into the output manifest; re-running from the manifest reproduces
/// all non-timing outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub k: usize,
    pub rank: usize,
    pub n: usize,
    pub lags: usize,
    pub betas: Vec<f64>,
    pub n_matrices: usize,
    pub n_inits: usize,
    pub max_iters: usize,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    pub eps: f64,
}

impl Default for BenchConfig {
    /// Desk-scale defaults: small enough that a full sweep runs in
    /// minutes.
    fn default() -> Self {
        BenchConfig {
            k: 100,
            rank: 5,
            n: 50,
            lags: 4,
            betas: vec![0.0, 1.0, 2.0],
            n_matrices: 10,
            n_inits: 3,
            max_iters: 200,
            methods: Method::ALL.to_vec(),
            master_seed: 42,
            eps: betacnmf_core::DEFAULT_EPS,
        }
    }
}

impl BenchConfig {
    /// The scale used in the original experiment.
    pub fn paper_scale() -> Self {
        BenchConfig {
            k: 1000,
            rank: 10,
            n: 100,
            lags: 16,
            n_matrices: 100,
            n_inits: 10,
            max_iters: 1000,
            ..BenchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.k,
            self.rank,
            self.n,
            self.lags,
            self.n_matrices,
            self.n_inits,
            self.max_iters,
        ];
        if counts.iter().any(|&c| c == 0) {
            return Err(AppError::Parse("all counts must be >= 1".into()));
        }
        if self.betas.is_empty() || self.methods.is_empty() {
            return Err(AppError::Parse("need at least one beta and one method".into()));
        }
        if !(self.eps > 0.0) {
            return Err(AppError::Parse("eps must be > 0".into()));
        }
        Ok(())
    }

    /// Flat manifest form; parseable by [`parse_config_str`].
    pub fn to_manifest(&self) -> String {
        let join_f64 = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let methods = self
            .methods
            .iter()
            .map(|m| m.tag().to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "K = {}\nI = {}\nN = {}\nM = {}\nbeta = {}\nn_matrices = {}\nn_inits = {}\nmax_iters = {}\nmethods = {}\nmaster_seed = {}\neps = {}\n",
            self.k,
            self.rank,
            self.n,
            self.lags,
            join_f64(&self.betas),
            self.n_matrices,
            self.n_inits,
            self.max_iters,
            methods,
            self.master_seed,
            self.eps,
        )
    }
}

/// Parsed `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_str(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            AppError::Parse(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| AppError::Parse(format!("invalid value for {key}: '{value}'")))
}

pub fn parse_beta_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_value("beta", s.trim()))
        .collect()
}

pub fn parse_method_list(value: &str) -> Result<Vec<Method>> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Method>()
                .map_err(|e| AppError::Usage(e.to_string()))
        })
        .collect()
}

/// Apply config-file values over the defaults. Unknown keys are rejected
/// so a typo cannot silently fall back to a default.
pub fn apply_file(cfg: &mut BenchConfig, map: &BTreeMap<String, String>) -> Result<()> {
    for (key, value) in map {
        match key.as_str() {
            "K" => cfg.k = parse_value(key, value)?,
            "I" => cfg.rank = parse_value(key, value)?,
            "N" => cfg.n = parse_value(key, value)?,
            "M" => cfg.lags = parse_value(key, value)?,
            "beta" => cfg.betas = parse_beta_list(value)?,
            "n_matrices" => cfg.n_matrices = parse_value(key, value)?,
            "n_inits" => cfg.n_inits = parse_value(key, value)?,
            "max_iters" => cfg.max_iters = parse_value(key, value)?,
            "methods" => cfg.methods = parse_method_list(value)?,
            "master_seed" => cfg.master_seed = parse_value(key, value)?,
            "eps" => cfg.eps = parse_value(key, value)?,
            _ => return Err(AppError::Parse(format!("unknown config key '{key}'"))),
        }
    }
    Ok(())
}

/// Master seed from the `BETACNMF_SEED` environment variable, used when
/// neither a flag nor a config file supplies one.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var("BETACNMF_SEED") {
        Ok(v) => parse_value("BETACNMF_SEED", &v).map(Some),
        Err(_) => Ok(None),
    }
}
