#![allow(dead_code)]

use std::collections::BTreeMap;

use stratagem_core::{GameConfig, VictoryKind};
use stratagem_harness::{ChangeEvent, StrategistKind, EpisodeSummary, Exclusion, GameOutcome, GameRecord, SCHEMA_VERSION};
use stratagem_strategist::Outcome;

/// A record with the given essentials; everything else neutral.
pub fn record(condition: &str, seed: u64, outcome: GameOutcome, survived0: u32, length: u32, peaks: Vec<i64>) -> GameRecord {
    let n = peaks.len();
    GameRecord {
        schema: SCHEMA_VERSION,
        condition: condition.into(),
        strategist: StrategistKind::Builtin,
        fault: None,
        seed,
        config: GameConfig::with_seed(seed),
        archetypes: vec!["Warlord".into(); n],
        outcome,
        game_length: length,
        survived_turns: std::iter::once(survived0).chain(std::iter::repeat(length).take(n - 1)).collect(),
        final_scores: peaks.clone(),
        peak_scores: peaks,
        grand_by_turn: vec!["Conquest".into(); survived0 as usize],
        changes: Vec::new(),
        policies: Vec::new(),
        ideology: None,
        episodes: Vec::new(),
        exclusion: Exclusion::None,
    }
}

pub fn win(kind: VictoryKind, winner: u8) -> GameOutcome {
    GameOutcome::Victory { kind, winner }
}

pub fn strategy_change(turn: u32) -> ChangeEvent {
    ChangeEvent::Strategy { turn, grand: "Culture".into(), economic: vec![], military: vec![] }
}

pub fn persona_change(turn: u32) -> ChangeEvent {
    ChangeEvent::Persona { turn, changed: BTreeMap::from([("Boldness".to_string(), 7)]) }
}

pub fn episode(turn: u32, input: u64, output: u64) -> EpisodeSummary {
    EpisodeSummary { turn, outcome: Outcome::Completed, rounds: 1, tool_calls: 1, input_tokens: input, output_tokens: output, latency_ms: 1 }
}

/// Four hand-built games of one condition "c". Expected metrics, worked
/// by hand: 2 wins of 4; score ratios 1, 0.5, 0.2, 1 (mean 0.675);
/// survived turns 50 + 100 + 25 + 75 = 250 with 3 strategy and 4 persona
/// changes (1.2 and 1.6 per 100); Conquest on 155 of 250 turns.
pub fn fixture() -> Vec<GameRecord> {
    let mut a = record("c", 1, win(VictoryKind::Domination, 0), 50, 50, vec![100, 80, 50, 20]);
    a.changes = vec![strategy_change(10)];
    a.ideology = Some("Autocracy".into());
    let mut b = record("c", 2, win(VictoryKind::Science, 2), 100, 100, vec![60, 90, 120, 30]);
    b.changes = vec![strategy_change(3), persona_change(4), strategy_change(40)];
    b.grand_by_turn = [vec!["Conquest".to_string(); 80], vec!["Culture".to_string(); 20]].concat();
    let c = record(
        "c",
        3,
        GameOutcome::Player0Eliminated { turn: 25, victory: Some((VictoryKind::Domination, 1)) },
        25,
        120,
        vec![40, 200, 10, 10],
    );
    let mut d = record("c", 4, win(VictoryKind::Domination, 0), 75, 75, vec![150, 150, 10, 5]);
    d.changes = vec![persona_change(1), persona_change(2), persona_change(3)];
    d.grand_by_turn = vec!["Spaceship".into(); 75];
    vec![a, b, c, d]
}

/// Solves a dense square system by Gauss-Jordan elimination with partial
/// pivoting. Rows are plain vectors so nothing is shared with the
/// library's linear algebra.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let m = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= m * a[col][c];
                }
                b[r] -= m * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Normal equations (XᵀX)β = Xᵀy.
pub fn normal_equations(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, yi) in x.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    solve(xtx, xty)
}

/// Unpenalized logistic fit by Newton-Raphson.
pub fn newton_logistic(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x[0].len();
    let mut beta = vec![0.0; p];
    for _ in 0..100 {
        let mut h = vec![vec![0.0; p]; p];
        let mut g = vec![0.0; p];
        for (row, yi) in x.iter().zip(y) {
            let eta: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let pr = 1.0 / (1.0 + (-eta).exp());
            for i in 0..p {
                g[i] += row[i] * (yi - pr);
                for j in 0..p {
                    h[i][j] += row[i] * row[j] * pr * (1.0 - pr);
                }
            }
        }
        let step = solve(h, g);
        let mut moved = 0.0f64;
        for i in 0..p {
            beta[i] += step[i];
            moved = moved.max(step[i].abs());
        }
        if moved < 1e-13 {
            break;
        }
    }
    beta
}
