//! Experiment orchestration: one game per (condition, seed), records in a
//! schema-versioned JSONL store, batch runs that resume where they stopped.

pub mod batch;
pub mod config;
pub mod fault;
pub mod game;
pub mod record;

pub use batch::{run_batch, BatchOptions, BatchReport, ConditionSummary};
pub use config::{Condition, ConfigError, EpisodeSettings, ExperimentConfig, FaultPlan, GameOverrides, Seeds, StrategistKind};
pub use fault::FaultInjector;
pub use game::{crash_record, event_log_text, guarded, make_strategist, play, replay, run_game, GameRun, HarnessError};
pub use record::{
    gap_exclusion, read_records, ChangeEvent, EpisodeSummary, Exclusion, GameOutcome, GameRecord, RecordError,
    RecordReader, RecordWriter, GAP_LIMIT, SCHEMA_VERSION,
};
