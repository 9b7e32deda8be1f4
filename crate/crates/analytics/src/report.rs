//! Text report and CSV tables. Output depends only on the inputs, so
//! regenerating from the same records gives identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;

use stratagem_harness::GameRecord;

use crate::design::{deviation_design_matrix, Factor};
use crate::error::AnalyticsError;
use crate::metrics::{compute_metrics, score_ratio, MetricsSummary, ScoreTiming};
use crate::regression::{fit_logistic_l1, fit_ols, LogisticOptions, RegressionResult};

/// Penalty used for the win-probability model.
pub const WIN_LAMBDA: f64 = 0.01;

fn f(v: f64) -> String {
    if v.is_nan() {
        "NA".to_string()
    } else {
        format!("{v:.6}")
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), AnalyticsError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `report.txt` and the CSV tables into `out`, returning the paths.
pub fn emit_report(
    summary: &MetricsSummary,
    regressions: &[(String, Result<RegressionResult, String>)],
    out: &Path,
) -> Result<Vec<PathBuf>, AnalyticsError> {
    fs::create_dir_all(out)?;
    let conds = &summary.conditions;
    let mut t = String::new();
    let timing = match summary.score_timing {
        ScoreTiming::Peak => "peak",
        ScoreTiming::Final => "final",
    };
    writeln!(t, "Games analyzed: {} ({} excluded)", conds.values().map(|c| c.games).sum::<usize>(), summary.excluded).unwrap();

    writeln!(t, "\n== Win rate (95% CI) ==").unwrap();
    for (name, c) in conds {
        writeln!(t, "{name}: {} / {} = {:.4} [{:.4}, {:.4}]", c.wins, c.games, c.win_rate.value, c.win_rate.lo, c.win_rate.hi).unwrap();
    }
    writeln!(t, "\n== Score ratio ({timing} scores) ==").unwrap();
    for (name, c) in conds {
        writeln!(t, "{name}: {:.4}", c.score_ratio).unwrap();
    }
    writeln!(t, "\n== Survival and game length ==").unwrap();
    for (name, c) in conds {
        writeln!(t, "{name}: survival {:.4}, mean length {:.2} turns", c.survival_rate, c.mean_length).unwrap();
    }
    writeln!(t, "\n== Victory distribution ==").unwrap();
    for (name, c) in conds {
        let parts: Vec<String> = c.victories.iter().map(|(k, v)| format!("{k} {v:.4}")).collect();
        writeln!(t, "{name}: {}", parts.join(", ")).unwrap();
    }
    writeln!(t, "\n== Grand strategy adoption (share of survived turns) ==").unwrap();
    for (name, c) in conds {
        let parts: Vec<String> = c.adoption.iter().map(|(k, v)| format!("{k} {v:.4}")).collect();
        writeln!(t, "{name}: {}", parts.join(", ")).unwrap();
    }
    writeln!(t, "\n== Change rates (per 100 survived turns) ==").unwrap();
    for (name, c) in conds {
        writeln!(t, "{name}: strategy {:.4}, persona {:.4}", c.strategy_change_rate, c.persona_change_rate).unwrap();
    }
    writeln!(t, "\n== Ideology shares ==").unwrap();
    for (name, c) in conds {
        let parts: Vec<String> = c.ideology.iter().map(|(k, v)| format!("{k} {v:.4}")).collect();
        writeln!(t, "{name}: {}", parts.join(", ")).unwrap();
    }
    writeln!(t, "\n== Token usage per episode ==").unwrap();
    for (name, c) in conds {
        let tk = &c.tokens;
        if tk.points.is_empty() {
            writeln!(t, "{name}: no episodes").unwrap();
            continue;
        }
        let coefs = |v: &Option<Vec<f64>>| v.as_ref().map_or("n/a".into(), |v| v.iter().map(|x| f(*x)).collect::<Vec<_>>().join(", "));
        writeln!(
            t,
            "{name}: linear [{}]; quadratic [{}]; quadratic term significant: {}",
            coefs(&tk.linear),
            coefs(&tk.quadratic),
            tk.quadratic_significant.map_or("n/a".into(), |b| b.to_string())
        )
        .unwrap();
    }
    writeln!(t, "\n== Regressions ==").unwrap();
    if regressions.is_empty() {
        writeln!(t, "none").unwrap();
    }
    for (model, r) in regressions {
        match r {
            Ok(r) => {
                let lambda = r.lambda.map_or(String::new(), |l| format!(", lambda {l}"));
                writeln!(t, "{model} (n={}{lambda}):", r.diagnostics.n).unwrap();
                for i in 0..r.names.len() {
                    writeln!(
                        t,
                        "  {:<28} coef {:>12}  se {:>12}  p {:>10}  marginal {:>12}",
                        r.names[i],
                        f(r.coefficients[i]),
                        f(r.std_errors[i]),
                        f(r.p_values[i]),
                        f(r.marginal_effects[i])
                    )
                    .unwrap();
                }
            }
            Err(e) => writeln!(t, "{model}: not estimated ({e})").unwrap(),
        }
    }

    let mut paths = Vec::new();
    let report = out.join("report.txt");
    fs::write(&report, t)?;
    paths.push(report);

    let mut table = |name: &str, header: &[&str], rows: Vec<Vec<String>>| -> Result<(), AnalyticsError> {
        let p = out.join(name);
        write_csv(&p, header, rows)?;
        paths.push(p);
        Ok(())
    };
    table(
        "summary.csv",
        &["condition", "games", "wins", "win_rate", "ci_lo", "ci_hi", "score_ratio", "survival_rate", "mean_length"],
        conds
            .iter()
            .map(|(n, c)| {
                vec![
                    n.clone(),
                    c.games.to_string(),
                    c.wins.to_string(),
                    f(c.win_rate.value),
                    f(c.win_rate.lo),
                    f(c.win_rate.hi),
                    f(c.score_ratio),
                    f(c.survival_rate),
                    f(c.mean_length),
                ]
            })
            .collect(),
    )?;
    let long = |get: &dyn Fn(&crate::metrics::ConditionMetrics) -> &std::collections::BTreeMap<String, f64>| {
        conds.iter().flat_map(|(n, c)| get(c).iter().map(move |(k, v)| vec![n.clone(), k.clone(), f(*v)])).collect::<Vec<_>>()
    };
    table("adoption.csv", &["condition", "grand_strategy", "fraction"], long(&|c| &c.adoption))?;
    table("victories.csv", &["condition", "victory", "share"], long(&|c| &c.victories))?;
    table("ideology.csv", &["condition", "ideology", "share"], long(&|c| &c.ideology))?;
    table(
        "change_rates.csv",
        &["condition", "strategy_per_100_turns", "persona_per_100_turns"],
        conds.iter().map(|(n, c)| vec![n.clone(), f(c.strategy_change_rate), f(c.persona_change_rate)]).collect(),
    )?;
    table(
        "token_curve.csv",
        &["condition", "turn", "mean_input_tokens", "mean_output_tokens"],
        conds
            .iter()
            .flat_map(|(n, c)| c.tokens.points.iter().map(move |(t, i, o)| vec![n.clone(), t.to_string(), f(*i), f(*o)]))
            .collect(),
    )?;
    table(
        "policies.csv",
        &["condition", "seed", "step", "policy"],
        conds
            .iter()
            .flat_map(|(n, c)| {
                c.policies.iter().flat_map(move |(seed, seq)| {
                    seq.iter().enumerate().map(move |(i, p)| vec![n.clone(), seed.to_string(), (i + 1).to_string(), p.clone()])
                })
            })
            .collect(),
    )?;
    table(
        "regressions.csv",
        &["model", "term", "coefficient", "std_error", "p_value", "marginal_effect"],
        regressions
            .iter()
            .filter_map(|(m, r)| r.as_ref().ok().map(|r| (m, r)))
            .flat_map(|(m, r)| {
                (0..r.names.len()).map(move |i| {
                    vec![
                        m.clone(),
                        r.names[i].clone(),
                        f(r.coefficients[i]),
                        f(r.std_errors[i]),
                        f(r.p_values[i]),
                        f(r.marginal_effects[i]),
                    ]
                })
            })
            .collect(),
    )?;
    Ok(paths)
}

/// The standard models: score ratio by OLS and player-0 wins by
/// L1-penalized logistic regression, both on deviation-coded condition
/// and archetype. Factors with a single level are left out.
pub fn standard_regressions(records: &[GameRecord], timing: ScoreTiming) -> Vec<(String, Result<RegressionResult, String>)> {
    let rs: Vec<GameRecord> = records.iter().filter(|r| !r.exclusion.is_excluded()).cloned().collect();
    let factors: Vec<Factor> = [Factor::Condition, Factor::Archetype]
        .into_iter()
        .filter(|f| deviation_design_matrix(&rs, &[*f]).is_ok())
        .collect();
    if factors.is_empty() {
        return Vec::new();
    }
    let design = match deviation_design_matrix(&rs, &factors) {
        Ok(d) => d,
        Err(e) => return vec![("design".into(), Err(e.to_string()))],
    };
    let ratio = DVector::from_iterator(rs.len(), rs.iter().map(|r| score_ratio(r, timing)));
    let won = DVector::from_iterator(rs.len(), rs.iter().map(|r| if r.outcome.player0_won() { 1.0 } else { 0.0 }));
    vec![
        ("score_ratio_ols".into(), fit_ols(&design.x, &ratio, &design.names).map_err(|e| e.to_string())),
        (
            "win_logistic_l1".into(),
            fit_logistic_l1(&design.x, &won, &design.names, LogisticOptions::new(WIN_LAMBDA)).map_err(|e| e.to_string()),
        ),
    ]
}

/// Metrics, standard regressions and report files in one call.
pub fn analyze(records: &[GameRecord], timing: ScoreTiming, out: &Path) -> Result<Vec<PathBuf>, AnalyticsError> {
    let summary = compute_metrics(records, timing)?;
    emit_report(&summary, &standard_regressions(records, timing), out)
}
