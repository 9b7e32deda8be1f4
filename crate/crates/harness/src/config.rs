//! Experiment configuration, read from TOML.
//!
//! ```toml
//! output = "runs/pilot.jsonl"
//! parallelism = 8
//! seeds = { start = 0, end = 200 }   # or an explicit list: seeds = [1, 2, 3]
//!
//! [game]            # any GameConfig field; omitted ones keep their defaults
//! max_turns = 200
//!
//! [episode]
//! deadline_ms = 30000
//! round_cap = 8
//!
//! [fault]           # optional
//! probability = 0.05
//! burst = 3
//!
//! [[conditions]]
//! name = "builtin"
//! kind = "builtin"
//!
//! [[conditions]]
//! name = "conquest"
//! kind = "script"
//! script = "fixed-conquest"
//!
//! [[conditions]]
//! name = "llm"
//! kind = "llm"
//! model = "some-model"   # url and model fall back to the environment
//! ```

use std::collections::{BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use stratagem_core::{GameConfig, VictoryKind};
use stratagem_strategist::{EpisodeConfig, Script};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Who plays player 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategistKind {
    /// No external strategist; the builtin AI keeps player 0.
    Builtin,
    Script { script: Script },
    /// Randomized mock that mixes valid and invalid calls.
    Mock { seed: u64 },
    Llm {
        #[serde(default)]
        url: Option<String>,
        #[serde(default)]
        model: Option<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub name: String,
    #[serde(flatten)]
    pub kind: StrategistKind,
}

impl Condition {
    pub fn builtin() -> Self {
        Self { name: "builtin".into(), kind: StrategistKind::Builtin }
    }

    pub fn script(script: Script) -> Self {
        let name = serde_json::to_value(&script).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or("custom".into());
        Self { name, kind: StrategistKind::Script { script } }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    List(Vec<u64>),
    Range { start: u64, end: u64 },
}

impl Seeds {
    pub fn to_vec(&self) -> Vec<u64> {
        match self {
            Seeds::List(v) => v.clone(),
            Seeds::Range { start, end } => (*start..*end).collect(),
        }
    }
}

/// Each episode starts a burst of `burst` failing episodes with chance
/// `probability`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultPlan {
    pub probability: f64,
    pub burst: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameOverrides {
    pub map_width: Option<i32>,
    pub map_height: Option<i32>,
    pub player_count: Option<usize>,
    pub max_turns: Option<u32>,
    pub archetype_pool_size: Option<usize>,
    pub victory_toggles: Option<BTreeSet<VictoryKind>>,
}

impl GameOverrides {
    pub fn config(&self, seed: u64) -> GameConfig {
        let d = GameConfig::with_seed(seed);
        GameConfig {
            map_width: self.map_width.unwrap_or(d.map_width),
            map_height: self.map_height.unwrap_or(d.map_height),
            player_count: self.player_count.unwrap_or(d.player_count),
            max_turns: self.max_turns.unwrap_or(d.max_turns),
            archetype_pool_size: self.archetype_pool_size.unwrap_or(d.archetype_pool_size),
            victory_toggles: self.victory_toggles.clone().unwrap_or(d.victory_toggles),
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeSettings {
    #[serde(default = "default_deadline_ms")]
    pub deadline_ms: u64,
    #[serde(default = "default_round_cap")]
    pub round_cap: u32,
}

fn default_deadline_ms() -> u64 {
    stratagem_strategist::episode::DEFAULT_DEADLINE.as_millis() as u64
}

fn default_round_cap() -> u32 {
    stratagem_strategist::episode::DEFAULT_ROUND_CAP
}

impl Default for EpisodeSettings {
    fn default() -> Self {
        Self { deadline_ms: default_deadline_ms(), round_cap: default_round_cap() }
    }
}

impl From<EpisodeSettings> for EpisodeConfig {
    fn from(s: EpisodeSettings) -> Self {
        EpisodeConfig { deadline: Duration::from_millis(s.deadline_ms), round_cap: s.round_cap }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub conditions: Vec<Condition>,
    pub seeds: Seeds,
    #[serde(default)]
    pub game: GameOverrides,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub fault: Option<FaultPlan>,
    #[serde(default)]
    pub episode: EpisodeSettings,
    pub output: PathBuf,
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl ExperimentConfig {
    pub fn new(conditions: Vec<Condition>, seeds: Seeds, output: impl Into<PathBuf>) -> Self {
        Self {
            conditions,
            seeds,
            game: GameOverrides::default(),
            parallelism: default_parallelism(),
            fault: None,
            episode: EpisodeSettings::default(),
            output: output.into(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config file; a relative `output` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        if cfg.output.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output = dir.join(&cfg.output);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.conditions.is_empty() {
            return bad("at least one condition is required".into());
        }
        let mut names = HashSet::new();
        for c in &self.conditions {
            if !names.insert(c.name.as_str()) {
                return bad(format!("condition name {:?} is used twice", c.name));
            }
        }
        let seeds = self.seeds.to_vec();
        if seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        if seeds.iter().collect::<HashSet<_>>().len() != seeds.len() {
            return bad("seeds must be distinct".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if self.episode.deadline_ms == 0 || self.episode.round_cap == 0 {
            return bad("episode deadline and round cap must be positive".into());
        }
        if let Some(f) = self.fault {
            if !(0.0..=1.0).contains(&f.probability) || f.burst == 0 {
                return bad("fault probability must be in [0, 1] and burst at least 1".into());
            }
        }
        self.game.config(0).validate().map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
