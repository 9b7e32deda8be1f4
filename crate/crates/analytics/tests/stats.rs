mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{newton_logistic, normal_equations};
use stratagem_analytics::*;

fn names(p: usize) -> Vec<String> {
    std::iter::once(INTERCEPT.to_string()).chain((1..p).map(|i| format!("x{i}"))).collect()
}

fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| std::iter::once(1.0).chain((1..p).map(|_| rng.random_range(-2.0..2.0))).collect()).collect()
}

fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

#[test]
fn ols_exact_line() {
    let x = DMatrix::from_fn(10, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
    let y = DVector::from_fn(10, |i, _| 2.0 * i as f64);
    let r = fit_ols(&x, &y, &names(2)).unwrap();
    assert!((r.coefficients[1] - 2.0).abs() < 1e-12);
    assert!(r.coefficients[0].abs() < 1e-12);
    assert!(r.diagnostics.rss.unwrap() < 1e-20);
}

#[test]
fn ols_names_duplicated_column() {
    let x = DMatrix::from_fn(8, 3, |i, j| if j == 0 { 1.0 } else { i as f64 });
    let y = DVector::from_fn(8, |i, _| i as f64);
    let n = vec![INTERCEPT.to_string(), "a".into(), "a_copy".into()];
    match fit_ols(&x, &y, &n) {
        Err(AnalyticsError::RankDeficient(cols)) => assert_eq!(cols, vec!["a_copy".to_string()]),
        other => panic!("expected rank error, got {other:?}"),
    }
    assert!(fit_ols(&DMatrix::zeros(2, 3), &DVector::zeros(2), &names(3)).is_err());
}

#[test]
fn ols_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows = random_design(&mut rng, 200, 5);
    let truth = [0.5, -1.0, 2.0, 0.25, 3.0];
    let y: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(truth).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-1.0..1.0))
        .collect();
    let fit = fit_ols(&to_matrix(&rows), &DVector::from_column_slice(&y), &names(5)).unwrap();
    let oracle = normal_equations(&rows, &y);
    for (a, b) in fit.coefficients.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }
    // residuals are orthogonal to every column
    let x = to_matrix(&rows);
    let resid = DVector::from_column_slice(&y) - &x * DVector::from_column_slice(&fit.coefficients);
    assert!((x.transpose() * resid).amax() < 1e-8);
    assert!(fit.p_values.iter().all(|p| (0.0..=1.0).contains(p)));
    assert!(fit.p_values[2] < 1e-6);
}

#[test]
fn polynomial_recovers_exact_curves() {
    let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let line: Vec<f64> = x.iter().map(|v| 3.0 * v + 1.0).collect();
    let l = fit_polynomial(&x, &line, 1).unwrap();
    assert!((l.fit.coefficients[0] - 1.0).abs() < 1e-8 && (l.fit.coefficients[1] - 3.0).abs() < 1e-8);
    assert_eq!(l.quadratic_significant, None);

    let par: Vec<f64> = x.iter().map(|v| 0.75 * v * v - 2.0 * v + 5.0).collect();
    let q = fit_polynomial(&x, &par, 2).unwrap();
    assert!((q.fit.coefficients[2] - 0.75).abs() < 1e-8);
    assert!((q.fit.coefficients[1] + 2.0).abs() < 1e-8);
    assert!((q.fit.coefficients[0] - 5.0).abs() < 1e-8);
    assert_eq!(q.quadratic_significant, Some(true));

    let flat = vec![4.0; 50];
    let c = fit_polynomial(&x, &flat, 2).unwrap();
    assert!(c.fit.coefficients[1].abs() < 1e-8 && c.fit.coefficients[2].abs() < 1e-8);

    assert!(matches!(fit_polynomial(&[1.0, 1.0, 2.0], &[1.0, 2.0, 3.0], 2), Err(AnalyticsError::Underdetermined { .. })));
}

fn logistic_data(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = random_design(&mut rng, n, 4);
    let truth = [-0.3, 1.2, -0.8, 0.4];
    let y = rows
        .iter()
        .map(|r| {
            let eta: f64 = r.iter().zip(truth).map(|(a, b)| a * b).sum();
            if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) { 1.0 } else { 0.0 }
        })
        .collect();
    (rows, y)
}

#[test]
fn logistic_without_penalty_matches_newton() {
    let (rows, y) = logistic_data(5, 400);
    let fit = fit_logistic_l1(&to_matrix(&rows), &DVector::from_column_slice(&y), &names(4), LogisticOptions::new(0.0)).unwrap();
    let oracle = newton_logistic(&rows, &y);
    for (a, b) in fit.coefficients.iter().zip(&oracle) {
        assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
    }
    assert!(fit.p_values.iter().all(|p| p.is_finite()));
}

#[test]
fn large_penalty_leaves_only_the_intercept() {
    let (rows, y) = logistic_data(6, 300);
    let fit = fit_logistic_l1(&to_matrix(&rows), &DVector::from_column_slice(&y), &names(4), LogisticOptions::new(1e3)).unwrap();
    assert!(fit.coefficients[1..].iter().all(|c| *c == 0.0));
    // the intercept is the log-odds of the base rate
    let rate = y.iter().sum::<f64>() / y.len() as f64;
    assert!((fit.coefficients[0] - (rate / (1.0 - rate)).ln()).abs() < 1e-5);
    assert!(fit.p_values[1..].iter().all(|p| p.is_nan()));
}

#[test]
fn separable_data_gets_the_separating_direction() {
    // y = 1 exactly when x1 - x2 > 0
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rows: Vec<Vec<f64>> = (0..120)
        .map(|_| vec![1.0, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .filter(|r: &Vec<f64>| (r[1] - r[2]).abs() > 0.1)
        .collect();
    let y: Vec<f64> = rows.iter().map(|r| if r[1] - r[2] > 0.0 { 1.0 } else { 0.0 }).collect();
    let fit = fit_logistic_l1(&to_matrix(&rows), &DVector::from_column_slice(&y), &names(3), LogisticOptions::new(0.01)).unwrap();
    assert!(fit.coefficients[1] > 0.0 && fit.coefficients[2] < 0.0, "{:?}", fit.coefficients);
    assert!(fit.marginal_effects[1] > 0.0);
}

#[test]
fn logistic_rejects_bad_input() {
    let x = DMatrix::from_element(3, 1, 1.0);
    let n = vec![INTERCEPT.to_string()];
    assert!(matches!(
        fit_logistic_l1(&x, &DVector::from_column_slice(&[0.0, 2.0, 1.0]), &n, LogisticOptions::new(0.1)),
        Err(AnalyticsError::NonBinary(_))
    ));
    assert!(matches!(
        fit_logistic_l1(&x, &DVector::from_column_slice(&[0.0, 1.0, 1.0]), &n, LogisticOptions::new(-1.0)),
        Err(AnalyticsError::BadLambda(_))
    ));
    // separable with no penalty runs off to infinity
    let xs = DMatrix::from_row_slice(4, 2, &[1.0, -2.0, 1.0, -1.0, 1.0, 1.0, 1.0, 2.0]);
    let ys = DVector::from_column_slice(&[0.0, 0.0, 1.0, 1.0]);
    let opts = LogisticOptions { max_iter: 2000, ..LogisticOptions::new(0.0) };
    assert!(matches!(fit_logistic_l1(&xs, &ys, &names(2), opts), Err(AnalyticsError::NotConverged(_))));
}

fn levels(k: usize, per: usize) -> Vec<String> {
    (0..k).flat_map(|l| std::iter::repeat(format!("L{l}")).take(per)).collect()
}

#[test]
fn two_levels_give_one_signed_column() {
    let (cols, lv, m) = deviation_code("condition", &levels(2, 3)).unwrap();
    assert_eq!(cols, vec!["condition[L0]"]);
    assert_eq!(lv, vec!["L0", "L1"]);
    assert_eq!(m.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]);
    assert!(matches!(deviation_code("c", &levels(1, 4)), Err(AnalyticsError::SingleLevel(_))));
}

#[test]
fn reference_effect_is_minus_the_sum() {
    // eight levels with known sum-to-zero effects; the fit recovers the
    // seven coded ones and the eighth follows from them
    let effects = [0.4, -0.2, 0.1, 0.3, -0.5, 0.25, -0.05];
    let reference = -effects.iter().sum::<f64>();
    let vals = levels(8, 5);
    let (cols, _, m) = deviation_code("archetype", &vals).unwrap();
    assert_eq!(cols.len(), 7);
    let n = vals.len();
    let mut x = DMatrix::from_element(n, 8, 1.0);
    x.view_mut((0, 1), (n, 7)).copy_from(&m);
    let y = DVector::from_fn(n, |i, _| {
        let l: usize = vals[i][1..].parse().unwrap();
        2.0 + if l == 7 { reference } else { effects[l] }
    });
    let mut nm = vec![INTERCEPT.to_string()];
    nm.extend(cols);
    let fit = fit_ols(&x, &y, &nm).unwrap();
    assert!((fit.coefficients[0] - 2.0).abs() < 1e-10);
    for (a, b) in fit.coefficients[1..].iter().zip(effects) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!((reference_effect(&fit.coefficients[1..]) - reference).abs() < 1e-10);
}

proptest! {
    #[test]
    fn balanced_coded_columns_sum_to_zero(k in 2usize..9, per in 1usize..6, shuffle in any::<u64>()) {
        let mut vals = levels(k, per);
        let mut rng = ChaCha8Rng::seed_from_u64(shuffle);
        use rand::seq::SliceRandom;
        vals.shuffle(&mut rng);
        let (cols, _, m) = deviation_code("f", &vals).unwrap();
        prop_assert_eq!(cols.len(), k - 1);
        for c in 0..m.ncols() {
            prop_assert_eq!(m.column(c).sum(), 0.0);
        }
    }

    #[test]
    fn ols_residuals_are_orthogonal(seed in any::<u64>(), n in 8usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = random_design(&mut rng, n, 3);
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let x = to_matrix(&rows);
        let fit = fit_ols(&x, &DVector::from_column_slice(&y), &names(3)).unwrap();
        let resid = DVector::from_column_slice(&y) - &x * DVector::from_column_slice(&fit.coefficients);
        prop_assert!((x.transpose() * resid).amax() < 1e-8);
    }
}
