//! Game records and their line-delimited JSON store.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use stratagem_core::engine::PlayerId;
use stratagem_core::{GameConfig, VictoryKind};
use stratagem_strategist::Outcome;

use crate::config::{FaultPlan, StrategistKind};

pub const SCHEMA_VERSION: u32 = 1;

/// Consecutive gap episodes that exclude a game.
pub const GAP_LIMIT: u32 = 15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameOutcome {
    Victory { kind: VictoryKind, winner: PlayerId },
    DrawByTime,
    /// Player 0 was knocked out; the game may still have been won by someone.
    Player0Eliminated { turn: u32, victory: Option<(VictoryKind, PlayerId)> },
}

impl GameOutcome {
    /// The victory, if anyone won.
    pub fn victory(&self) -> Option<(VictoryKind, PlayerId)> {
        match self {
            GameOutcome::Victory { kind, winner } => Some((*kind, *winner)),
            GameOutcome::DrawByTime => None,
            GameOutcome::Player0Eliminated { victory, .. } => *victory,
        }
    }

    pub fn player0_won(&self) -> bool {
        matches!(self.victory(), Some((_, 0)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Exclusion {
    None,
    Crash { reason: String },
    Gap15 { first_turn: u32, length: u32 },
}

impl Exclusion {
    pub fn is_excluded(&self) -> bool {
        !matches!(self, Exclusion::None)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChangeEvent {
    /// Player 0's active strategy set differs from the previous turn's.
    Strategy { turn: u32, grand: String, economic: Vec<String>, military: Vec<String> },
    /// Persona parameters that moved, with their new values.
    Persona { turn: u32, changed: BTreeMap<String, i64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub turn: u32,
    pub outcome: Outcome,
    pub rounds: u32,
    pub tool_calls: u32,
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub latency_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRecord {
    pub schema: u32,
    pub condition: String,
    /// Who played player 0, so the game can be replayed from the record.
    pub strategist: StrategistKind,
    pub fault: Option<FaultPlan>,
    pub seed: u64,
    pub config: GameConfig,
    /// Archetype name per player.
    pub archetypes: Vec<String>,
    pub outcome: GameOutcome,
    /// Turns played.
    pub game_length: u32,
    pub survived_turns: Vec<u32>,
    pub final_scores: Vec<i64>,
    pub peak_scores: Vec<i64>,
    /// Player 0's grand strategy on each survived turn.
    pub grand_by_turn: Vec<String>,
    pub changes: Vec<ChangeEvent>,
    /// Player 0's adopted policies and ideologies, in order.
    pub policies: Vec<String>,
    pub ideology: Option<String>,
    pub episodes: Vec<EpisodeSummary>,
    pub exclusion: Exclusion,
}

impl GameRecord {
    pub fn key(&self) -> (String, u64) {
        (self.condition.clone(), self.seed)
    }

    /// Equality up to wall-clock latency, which is the only field that
    /// legitimately varies between replays of a non-LLM game.
    pub fn same_replay(&self, other: &GameRecord) -> bool {
        let strip = |r: &GameRecord| {
            let mut r = r.clone();
            r.episodes.iter_mut().for_each(|e| e.latency_ms = 0);
            r
        };
        strip(self) == strip(other)
    }

    pub fn strategy_changes(&self) -> usize {
        self.changes.iter().filter(|c| matches!(c, ChangeEvent::Strategy { .. })).count()
    }

    pub fn persona_changes(&self) -> usize {
        self.changes.iter().filter(|c| matches!(c, ChangeEvent::Persona { .. })).count()
    }
}

/// Finds the first run of at least [`GAP_LIMIT`] consecutive gap episodes.
pub fn gap_exclusion(episodes: &[EpisodeSummary]) -> Exclusion {
    let mut run = 0u32;
    let mut start = 0u32;
    let mut found: Option<(u32, u32)> = None;
    for e in episodes {
        if e.outcome.is_gap() {
            if run == 0 {
                start = e.turn;
            }
            run += 1;
            if run >= GAP_LIMIT {
                found = Some((start, run));
            }
        } else {
            if found.is_some() {
                break;
            }
            run = 0;
        }
    }
    match found {
        Some((first_turn, length)) => Exclusion::Gap15 { first_turn, length },
        None => Exclusion::None,
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("record store I/O: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
    #[error("line {line}: record schema {found} needs migration to {expected}")]
    Migration { line: usize, found: u64, expected: u32 },
}

/// Appends records, one JSON object per line, flushing after each.
pub struct RecordWriter {
    out: BufWriter<File>,
    path: PathBuf,
}

impl RecordWriter {
    /// Opens `path` for appending. A torn final line from an interrupted
    /// run is cut off first so the file stays line-aligned.
    pub fn append(path: &Path) -> io::Result<Self> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
        trim_torn_tail(&mut file)?;
        Ok(Self { out: BufWriter::new(file), path: path.to_path_buf() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&mut self, record: &GameRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.out.flush()
    }
}

fn trim_torn_tail(file: &mut File) -> io::Result<()> {
    let len = file.metadata()?.len();
    let mut end = len;
    let mut buf = vec![0u8; 8192];
    while end > 0 {
        let start = end.saturating_sub(buf.len() as u64);
        let chunk = &mut buf[..(end - start) as usize];
        file.seek(SeekFrom::Start(start))?;
        io::Read::read_exact(file, chunk)?;
        if let Some(i) = chunk.iter().rposition(|b| *b == b'\n') {
            end = start + i as u64 + 1;
            break;
        }
        end = start;
    }
    if end < len {
        file.set_len(end)?;
    }
    Ok(())
}

/// Streams records from a store without holding more than one line.
pub struct RecordReader<R> {
    lines: io::Lines<R>,
    line: usize,
}

impl RecordReader<BufReader<File>> {
    pub fn open(path: &Path) -> io::Result<Self> {
        Ok(Self::new(BufReader::new(File::open(path)?)))
    }
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R) -> Self {
        Self { lines: reader.lines(), line: 0 }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<GameRecord, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.lines.next()? {
                Ok(t) => t,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if text.trim().is_empty() {
                continue;
            }
            return Some(parse_line(&text, self.line));
        }
    }
}

pub fn parse_line(text: &str, line: usize) -> Result<GameRecord, RecordError> {
    let raw: Value = serde_json::from_str(text).map_err(|source| RecordError::Parse { line, source })?;
    let found = raw.get("schema").and_then(Value::as_u64).unwrap_or(0);
    if found != SCHEMA_VERSION as u64 {
        return Err(RecordError::Migration { line, found, expected: SCHEMA_VERSION });
    }
    serde_json::from_value(raw).map_err(|source| RecordError::Parse { line, source })
}

/// Reads a whole store into memory.
pub fn read_records(path: &Path) -> Result<Vec<GameRecord>, RecordError> {
    RecordReader::open(path)?.collect()
}

/// Sibling directory holding per-game transcripts for a store.
pub fn transcript_dir(store: &Path) -> PathBuf {
    let mut name = store.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".transcripts");
    store.with_file_name(name)
}

pub fn transcript_path(store: &Path, condition: &str, seed: u64) -> PathBuf {
    transcript_dir(store).join(format!("{condition}-{seed}.jsonl"))
}
