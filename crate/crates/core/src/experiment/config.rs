//! Flat key=value run configuration.
//!
//! A run is described by a small text file, one `key = value` per line, with
//! `#` comments. Command-line overrides use the same keys, so grid-search
//! scripts can generate configs with nothing fancier than `printf`. Every
//! knob has a default; an empty config describes a complete synthetic run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::eval::Protocol;
use crate::kg::{GrowthRegime, SyntheticSpec};
use crate::store::Hyperparameters;
use crate::trainer::TrainOptions;

/// Everything one training run depends on.
///
/// The data comes either from `data_dir` (snapshot directories on disk) or,
/// when that is unset, from the built-in generator configured by
/// `synthetic`. Mixing both in one config is rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data_dir: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub hp: Hyperparameters,
    pub options: TrainOptions,
    pub protocol: Protocol,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: None,
            synthetic: SyntheticSpec {
                regime: GrowthRegime::Equal,
                snapshots: 3,
                entities: 500,
                triples: 6000,
                relations: 20,
                seed: 0,
            },
            hp: Hyperparameters::default(),
            options: TrainOptions::default(),
            protocol: Protocol::Filtered,
            output_dir: PathBuf::from("run"),
        }
    }
}

/// Which data source a key belongs to, for the one-source rule.
#[derive(PartialEq)]
enum KeySource {
    Directory,
    Synthetic,
    Neutral,
}

impl RunConfig {
    /// Reads a config file and applies `key=value` overrides on top.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self, Error> {
        let text = fs::read_to_string(path)
            .map_err(|err| Error::Config(format!("cannot read {}: {err}", path.display())))?;
        Self::from_text(&text, overrides)
    }

    /// Parses config text plus overrides; `load` without the file system.
    pub fn from_text(text: &str, overrides: &[(String, String)]) -> Result<Self, Error> {
        let mut config = RunConfig::default();
        let mut saw_directory = false;
        let mut saw_synthetic = false;
        for (number, line) in text.lines().enumerate() {
            let Some((key, value)) = split_line(line) else {
                if line.trim().is_empty() || line.trim_start().starts_with('#') {
                    continue;
                }
                return Err(Error::Config(format!(
                    "line {}: expected 'key = value', got '{}'",
                    number + 1,
                    line.trim()
                )));
            };
            match config.set(key, value)? {
                KeySource::Directory => saw_directory = true,
                KeySource::Synthetic => saw_synthetic = true,
                KeySource::Neutral => {}
            }
        }
        for (key, value) in overrides {
            match config.set(key, value)? {
                KeySource::Directory => saw_directory = true,
                KeySource::Synthetic => saw_synthetic = true,
                KeySource::Neutral => {}
            }
        }
        if saw_directory && saw_synthetic {
            return Err(Error::Config(
                "config mixes data_dir with synthetic_* keys; pick one data source".into(),
            ));
        }
        config.validate()?;
        Ok(config)
    }

    /// Builds a config from key/value pairs alone.
    pub fn from_pairs<'a>(
        pairs: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Self, Error> {
        let owned: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self::from_text("", &owned)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<KeySource, Error> {
        let mut source = KeySource::Neutral;
        match key {
            "data_dir" => {
                self.data_dir = Some(PathBuf::from(value));
                source = KeySource::Directory;
            }
            "synthetic_regime" => {
                self.synthetic.regime = value.parse().map_err(Error::Config)?;
                source = KeySource::Synthetic;
            }
            "synthetic_snapshots" => {
                self.synthetic.snapshots = parse_num(key, value)?;
                source = KeySource::Synthetic;
            }
            "synthetic_entities" => {
                self.synthetic.entities = parse_num(key, value)?;
                source = KeySource::Synthetic;
            }
            "synthetic_triples" => {
                self.synthetic.triples = parse_num(key, value)?;
                source = KeySource::Synthetic;
            }
            "synthetic_relations" => {
                self.synthetic.relations = parse_num(key, value)?;
                source = KeySource::Synthetic;
            }
            "synthetic_seed" => {
                self.synthetic.seed = parse_num(key, value)?;
                source = KeySource::Synthetic;
            }
            "dim" => self.hp.dim = parse_num(key, value)?,
            "margin" => self.hp.margin = parse_num(key, value)?,
            "lambda_obs" => self.hp.lambda_obs = parse_num(key, value)?,
            "lambda_init" => self.hp.lambda_init = parse_num(key, value)?,
            "beta" => self.hp.beta = parse_num(key, value)?,
            "tau" => self.hp.tau = parse_num(key, value)?,
            "clusters" => self.hp.clusters = parse_num(key, value)?,
            "eta" => self.hp.eta = parse_num(key, value)?,
            "alpha_mode" => self.hp.alpha_mode = value.parse().map_err(Error::Config)?,
            "learning_rate" => self.hp.learning_rate = parse_num(key, value)?,
            "epochs" => self.hp.epochs = parse_num(key, value)?,
            "batch_size" => self.hp.batch_size = parse_num(key, value)?,
            "seed" => self.hp.seed = parse_num(key, value)?,
            "negatives" => self.hp.negatives = parse_num(key, value)?,
            "reassign_every" => self.hp.reassign_every = parse_num(key, value)?,
            "normalize_entities" => self.hp.normalize_entities = parse_bool(key, value)?,
            "exact_betweenness_limit" => self.hp.exact_betweenness_limit = parse_num(key, value)?,
            "betweenness_pivots" => self.hp.betweenness_pivots = parse_num(key, value)?,
            "disable_bayes" => self.options.disable_bayes = parse_bool(key, value)?,
            "disable_fcc" => self.options.disable_fcc = parse_bool(key, value)?,
            "freeze_old_centroids" => {
                self.options.freeze_inherited_centroids = parse_bool(key, value)?
            }
            "protocol" => self.protocol = value.parse().map_err(Error::Config)?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            other => {
                return Err(Error::Config(format!("unknown config key '{other}'")));
            }
        }
        Ok(source)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.hp.validate().map_err(Error::Model)?;
        if self.data_dir.is_none() {
            self.synthetic.validate().map_err(Error::Data)?;
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(Error::Config("output_dir must not be empty".into()));
        }
        Ok(())
    }

    /// The full effective configuration as config-file text, every key
    /// explicit, in a fixed order. Writing this into the run directory makes
    /// the run reproducible from its artifacts alone.
    pub fn resolved_text(&self) -> String {
        let mut out = String::new();
        match &self.data_dir {
            Some(dir) => {
                let _ = writeln!(out, "data_dir = {}", dir.display());
            }
            None => {
                let _ = writeln!(out, "synthetic_regime = {}", self.synthetic.regime);
                let _ = writeln!(out, "synthetic_snapshots = {}", self.synthetic.snapshots);
                let _ = writeln!(out, "synthetic_entities = {}", self.synthetic.entities);
                let _ = writeln!(out, "synthetic_triples = {}", self.synthetic.triples);
                let _ = writeln!(out, "synthetic_relations = {}", self.synthetic.relations);
                let _ = writeln!(out, "synthetic_seed = {}", self.synthetic.seed);
            }
        }
        let hp = &self.hp;
        let _ = writeln!(out, "dim = {}", hp.dim);
        let _ = writeln!(out, "margin = {}", hp.margin);
        let _ = writeln!(out, "lambda_obs = {}", hp.lambda_obs);
        let _ = writeln!(out, "lambda_init = {}", hp.lambda_init);
        let _ = writeln!(out, "beta = {}", hp.beta);
        let _ = writeln!(out, "tau = {}", hp.tau);
        let _ = writeln!(out, "clusters = {}", hp.clusters);
        let _ = writeln!(out, "eta = {}", hp.eta);
        let _ = writeln!(out, "alpha_mode = {}", hp.alpha_mode);
        let _ = writeln!(out, "learning_rate = {}", hp.learning_rate);
        let _ = writeln!(out, "epochs = {}", hp.epochs);
        let _ = writeln!(out, "batch_size = {}", hp.batch_size);
        let _ = writeln!(out, "seed = {}", hp.seed);
        let _ = writeln!(out, "negatives = {}", hp.negatives);
        let _ = writeln!(out, "reassign_every = {}", hp.reassign_every);
        let _ = writeln!(out, "normalize_entities = {}", hp.normalize_entities);
        let _ = writeln!(
            out,
            "exact_betweenness_limit = {}",
            hp.exact_betweenness_limit
        );
        let _ = writeln!(out, "betweenness_pivots = {}", hp.betweenness_pivots);
        let _ = writeln!(out, "disable_bayes = {}", self.options.disable_bayes);
        let _ = writeln!(out, "disable_fcc = {}", self.options.disable_fcc);
        let _ = writeln!(
            out,
            "freeze_old_centroids = {}",
            self.options.freeze_inherited_centroids
        );
        let _ = writeln!(out, "protocol = {}", self.protocol);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        out
    }
}

fn split_line(line: &str) -> Option<(&str, &str)> {
    let body = line.split('#').next().unwrap_or("");
    let (key, value) = body.split_once('=')?;
    let key = key.trim();
    let value = value.trim();
    if key.is_empty() || value.is_empty() {
        return None;
    }
    Some((key, value))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("key '{key}': cannot parse '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Error> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        other => Err(Error::Config(format!(
            "key '{key}': expected a boolean, got '{other}'"
        ))),
    }
}
