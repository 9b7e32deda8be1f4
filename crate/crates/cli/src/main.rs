use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::AtomicBool;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use stratagem_analytics::{analyze, ScoreTiming};
use stratagem_bridge::{serve_stream, GameHost, RestServer};
use stratagem_core::{GameConfig, Session};
use stratagem_harness::{
    event_log_text, replay, run_batch, run_game, BatchOptions, Condition, ExperimentConfig, RecordReader, RecordWriter,
    StrategistKind,
};
use stratagem_strategist::{EpisodeConfig, Script};

#[derive(Parser)]
#[command(name = "stratagem", version, about = "Mini-4X strategy simulator with pluggable macro strategists")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Timing {
    Peak,
    Final,
}

#[derive(Subcommand)]
enum Command {
    /// Play one game and print its record as JSON.
    Run {
        /// builtin, mock, llm, or a script preset (always-keep, fixed-conquest, rotate-grand).
        #[arg(long, default_value = "builtin")]
        condition: String,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        max_turns: Option<u32>,
        /// Append the record to this store instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a TOML file.
    Batch {
        #[arg(long)]
        config: PathBuf,
        /// Stop after this many new games.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Host one game over the framed stream protocol and REST.
    Serve {
        /// Stream protocol port on 127.0.0.1.
        #[arg(long, default_value_t = 8736)]
        port: u16,
        /// REST bind address.
        #[arg(long, env = stratagem_bridge::rest::BIND_ENV, default_value = stratagem_bridge::rest::DEFAULT_BIND)]
        rest: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Let clients advance turns; otherwise the server advances once
        /// player 0 closes its episode or the turn deadline passes.
        #[arg(long)]
        test_mode: bool,
        #[arg(long, default_value_t = 30)]
        turn_deadline_secs: u64,
    },
    /// Compute metrics and regressions from a record store.
    Analyze {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "peak")]
        score_timing: Timing,
    },
    /// Replay a stored game and print its event log.
    Replay {
        #[arg(long)]
        record: PathBuf,
        /// Pick the record with this seed when the store holds several.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        condition: Option<String>,
    },
}

fn parse_condition(name: &str) -> Result<Condition> {
    let kind = match name {
        "builtin" => StrategistKind::Builtin,
        "mock" => StrategistKind::Mock { seed: 0 },
        "llm" => StrategistKind::Llm { url: None, model: None },
        other => StrategistKind::Script { script: other.parse::<Script>()? },
    };
    Ok(Condition { name: name.to_string(), kind })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { condition, seed, max_turns, out } => {
            let cond = parse_condition(&condition)?;
            let mut cfg = GameConfig::with_seed(seed);
            if let Some(t) = max_turns {
                cfg.max_turns = t;
            }
            let run = run_game(&cond, &cfg, &EpisodeConfig::default(), None)?;
            match out {
                Some(path) => RecordWriter::append(&path)?.write(&run.record)?,
                None => println!("{}", serde_json::to_string_pretty(&run.record)?),
            }
        }
        Command::Batch { config, limit } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_batch(&cfg, BatchOptions { limit })?;
            println!("{report}");
        }
        Command::Serve { port, rest, seed, test_mode, turn_deadline_secs } => {
            serve(port, &rest, seed, test_mode, Duration::from_secs(turn_deadline_secs))?
        }
        Command::Analyze { input, out, score_timing } => {
            let records = stratagem_harness::read_records(&input)?;
            let timing = match score_timing {
                Timing::Peak => ScoreTiming::Peak,
                Timing::Final => ScoreTiming::Final,
            };
            for p in analyze(&records, timing, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Replay { record, seed, condition } => {
            let mut chosen = None;
            for r in RecordReader::open(&record).with_context(|| format!("opening {}", record.display()))? {
                let r = r?;
                if seed.map_or(true, |s| s == r.seed) && condition.as_ref().map_or(true, |c| *c == r.condition) {
                    chosen = Some(r);
                    break;
                }
            }
            let Some(rec) = chosen else { bail!("no matching record in {}", record.display()) };
            let run = replay(&rec, &EpisodeConfig::default())?;
            print!("{}", event_log_text(&run.events));
            let same = run.record.same_replay(&rec);
            eprintln!("replayed {} seed {}: record {}", rec.condition, rec.seed, if same { "reproduced" } else { "differs" });
        }
    }
    Ok(())
}

fn serve(port: u16, rest: &str, seed: u64, test_mode: bool, deadline: Duration) -> Result<()> {
    let mut session = Session::new(GameConfig::with_seed(seed))?;
    session.attach_external(0)?;
    let host = Arc::new(Mutex::new(GameHost::new(session, test_mode)));
    let listener = TcpListener::bind(("127.0.0.1", port))?;
    let rest = RestServer::start(host.clone(), rest)?;
    eprintln!("stream on {}, REST on {}", listener.local_addr()?, rest.url());
    let stream_host = host.clone();
    let stop = Arc::new(AtomicBool::new(false));
    let stream = std::thread::spawn(move || serve_stream(stream_host, listener, stop));
    if !test_mode {
        let mut turn_start = Instant::now();
        loop {
            std::thread::sleep(Duration::from_millis(10));
            let mut h = host.lock().unwrap_or_else(|p| p.into_inner());
            if h.session.is_terminal() {
                eprintln!("game over at turn {}: {:?}", h.turn(), h.session.state.victory);
                break;
            }
            if h.decisions_closed() || turn_start.elapsed() >= deadline {
                h.advance().map_err(|e| anyhow::anyhow!(e.message))?;
                turn_start = Instant::now();
            }
        }
    }
    stream.join().expect("stream thread")?;
    Ok(())
}
