//! Deviation (sum) coded design matrices.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use stratagem_harness::GameRecord;

use crate::error::AnalyticsError;
use crate::regression::INTERCEPT;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    Condition,
    /// Player 0's archetype.
    Archetype,
}

impl Factor {
    pub fn name(self) -> &'static str {
        match self {
            Factor::Condition => "condition",
            Factor::Archetype => "archetype",
        }
    }

    fn level(self, r: &GameRecord) -> String {
        match self {
            Factor::Condition => r.condition.clone(),
            Factor::Archetype => r.archetypes.first().cloned().unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    /// Per factor: its name and sorted levels. The last level is the reference.
    pub factors: Vec<(String, Vec<String>)>,
}

/// Codes one categorical column: k sorted levels become k-1 columns, the
/// last level is the reference and is coded -1 in all of them.
pub fn deviation_code(name: &str, values: &[String]) -> Result<(Vec<String>, Vec<String>, DMatrix<f64>), AnalyticsError> {
    let levels: Vec<String> = values.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    if levels.len() < 2 {
        return Err(AnalyticsError::SingleLevel(name.to_string()));
    }
    let k = levels.len();
    let m = DMatrix::from_fn(values.len(), k - 1, |i, j| {
        let at = levels.binary_search(&values[i]).expect("level present");
        if at == k - 1 {
            -1.0
        } else if at == j {
            1.0
        } else {
            0.0
        }
    });
    let cols = levels[..k - 1].iter().map(|l| format!("{name}[{l}]")).collect();
    Ok((cols, levels, m))
}

/// Intercept plus the coded columns of every factor, in the given order.
pub fn deviation_design_matrix(records: &[GameRecord], factors: &[Factor]) -> Result<DesignMatrix, AnalyticsError> {
    let n = records.len();
    let mut names = vec![INTERCEPT.to_string()];
    let mut blocks = vec![DMatrix::from_element(n, 1, 1.0)];
    let mut levels = Vec::new();
    for f in factors {
        let values: Vec<String> = records.iter().map(|r| f.level(r)).collect();
        let (cols, lv, m) = deviation_code(f.name(), &values)?;
        names.extend(cols);
        blocks.push(m);
        levels.push((f.name().to_string(), lv));
    }
    let width = blocks.iter().map(|b| b.ncols()).sum();
    let mut x = DMatrix::zeros(n, width);
    let mut at = 0;
    for b in blocks {
        x.view_mut((0, at), (n, b.ncols())).copy_from(&b);
        at += b.ncols();
    }
    Ok(DesignMatrix { names, x, factors: levels })
}

/// The effect of a factor's reference level: minus the sum of the others.
pub fn reference_effect(effects: &[f64]) -> f64 {
    -effects.iter().sum::<f64>()
}
