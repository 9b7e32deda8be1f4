//! Batch runs over conditions × seeds with resumable JSONL output.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use stratagem_strategist::EpisodeConfig;

use crate::config::{Condition, ExperimentConfig};
use crate::game::{guarded, run_game, GameRun, HarnessError};
use crate::record::{transcript_dir, transcript_path, GameRecord, RecordReader, RecordWriter};

#[derive(Clone, Copy, Debug, Default)]
pub struct BatchOptions {
    /// Stop after this many new games.
    pub limit: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionSummary {
    pub games: usize,
    pub player0_wins: usize,
    pub excluded: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BatchReport {
    pub ran: usize,
    pub skipped: usize,
    /// Totals over the whole store, keyed by condition name.
    pub per_condition: BTreeMap<String, ConditionSummary>,
}

impl fmt::Display for BatchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, s) in &self.per_condition {
            writeln!(f, "{name}: {} games, {} player-0 wins, {} excluded", s.games, s.player0_wins, s.excluded)?;
        }
        write!(f, "ran {} new games, skipped {} already stored", self.ran, self.skipped)
    }
}

fn stored_keys(cfg: &ExperimentConfig) -> Result<HashSet<(String, u64)>, HarnessError> {
    if !cfg.output.exists() {
        return Ok(HashSet::new());
    }
    let mut keys = HashSet::new();
    for r in RecordReader::open(&cfg.output)? {
        match r {
            Ok(r) => {
                keys.insert(r.key());
            }
            // a torn last line is dropped when the writer reopens the store
            Err(crate::record::RecordError::Parse { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(keys)
}

fn play_one(cfg: &ExperimentConfig, cond: &Condition, seed: u64, episode: &EpisodeConfig) -> GameRun {
    let config = cfg.game.config(seed);
    guarded(cond, &config, cfg.fault, || run_game(cond, &config, episode, cfg.fault))
}

fn write_transcript(cfg: &ExperimentConfig, run: &GameRun) -> std::io::Result<()> {
    if run.transcript.is_empty() {
        return Ok(());
    }
    let path = transcript_path(&cfg.output, &run.record.condition, run.record.seed);
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for t in &run.transcript {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Runs every (condition, seed) pair not already in the output store.
/// Records go through one writer; a write failure stops the batch with
/// everything written so far intact, so a rerun picks up where it left off.
pub fn run_batch(cfg: &ExperimentConfig, opts: BatchOptions) -> Result<BatchReport, HarnessError> {
    cfg.validate()?;
    let done = stored_keys(cfg)?;
    let mut jobs = Vec::new();
    let mut skipped = 0;
    for cond in &cfg.conditions {
        for seed in cfg.seeds.to_vec() {
            if done.contains(&(cond.name.clone(), seed)) {
                skipped += 1;
            } else {
                jobs.push((cond, seed));
            }
        }
    }
    if let Some(l) = opts.limit {
        jobs.truncate(l);
    }
    let writer = Mutex::new(RecordWriter::append(&cfg.output)?);
    fs::create_dir_all(transcript_dir(&cfg.output))?;
    let failed: Mutex<Option<std::io::Error>> = Mutex::new(None);
    let halt = AtomicBool::new(false);
    let episode = EpisodeConfig::from(cfg.episode);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.parallelism).build().expect("thread pool");
    let ran = pool.install(|| {
        jobs.par_iter()
            .filter(|(cond, seed)| {
                if halt.load(Ordering::SeqCst) {
                    return false;
                }
                let run = play_one(cfg, cond, *seed, &episode);
                let res = write_transcript(cfg, &run).and_then(|_| writer.lock().unwrap().write(&run.record));
                match res {
                    Ok(()) => true,
                    Err(e) => {
                        halt.store(true, Ordering::SeqCst);
                        failed.lock().unwrap().get_or_insert(e);
                        false
                    }
                }
            })
            .count()
    });
    if let Some(e) = failed.into_inner().unwrap() {
        return Err(e.into());
    }
    let mut per_condition: BTreeMap<String, ConditionSummary> = BTreeMap::new();
    for r in RecordReader::open(&cfg.output)? {
        let r = r?;
        tally(per_condition.entry(r.condition.clone()).or_default(), &r);
    }
    Ok(BatchReport { ran, skipped, per_condition })
}

fn tally(s: &mut ConditionSummary, r: &GameRecord) {
    s.games += 1;
    if r.exclusion.is_excluded() {
        s.excluded += 1;
    } else if r.outcome.player0_won() {
        s.player0_wins += 1;
    }
}
