use std::path::Path;

use ghmm_canon::{Error, Result, Tolerances};
use serde::Deserialize;

pub const TOL_ENV: &str = "GHMM_CANON_TOL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Table,
}

/// Settings read from `--config`; every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    pub max_len: Option<usize>,
    pub word_cap: Option<u128>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

/// Fully resolved settings: defaults, then the config file, then the
/// environment, then command-line flags.
#[derive(Clone, Debug)]
pub struct Settings {
    pub tol: Tolerances,
    pub max_len: Option<usize>,
    pub word_cap: u128,
    pub format: Format,
    pub seed: u64,
}

impl CliConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Input(format!("invalid config {}: {e}", path.display())))
    }
}

fn parse_tol(text: &str, origin: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("{origin}: cannot parse tolerance {text:?}")))
}

pub fn resolve(
    config: Option<&Path>,
    env_tol: Option<String>,
    flag_tol: Option<f64>,
    flag_format: Option<Format>,
) -> Result<Settings> {
    let file = match config {
        Some(p) => CliConfig::load(p)?,
        None => CliConfig::default(),
    };
    let mut tol = file.tolerances.unwrap_or_default();
    if let Some(t) = env_tol {
        tol.equivalence = parse_tol(&t, TOL_ENV)?;
    }
    if let Some(t) = flag_tol {
        tol.equivalence = t;
    }
    let fields = [
        ("structural", tol.structural),
        ("clamp", tol.clamp),
        ("residue", tol.residue),
        ("rank_rel", tol.rank_rel),
        ("prob_floor", tol.prob_floor),
        ("cond_cap", tol.cond_cap),
        ("equivalence", tol.equivalence),
        ("degenerate", tol.degenerate),
    ];
    if let Some((name, v)) = fields.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Input(format!("tolerance {name} must be positive, got {v}")));
    }
    let word_cap = file.word_cap.unwrap_or(ghmm_canon::equivalence::DEFAULT_WORD_CAP);
    if word_cap < 1 {
        return Err(Error::Input("word_cap must be at least 1".into()));
    }
    Ok(Settings {
        tol,
        max_len: file.max_len,
        word_cap,
        format: flag_format.or(file.format).unwrap_or(Format::Json),
        seed: file.seed.unwrap_or(0),
    })
}
