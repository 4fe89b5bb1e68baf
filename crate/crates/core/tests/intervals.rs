use fewshot_eval::stats::quantiles::{normal_quantile, regularized_beta};
use fewshot_eval::stats::{normal_critical, student_critical};
use fewshot_eval::{
    compare_intervals, conclusive_probability_bound, normal_ci, paired_ci, paired_series, paired_verdict, student_ci,
    AccuracySeries, Symbol,
};
use proptest::prelude::*;
use statrs::distribution::{Beta, ContinuousCDF, Normal, StudentsT};

// Cornish–Fisher expansion of the Student quantile in powers of 1/ν; accurate
// to ~1e-12 for ν in the thousands.
fn cornish_fisher(dof: f64, p: f64) -> f64 {
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(p);
    let g1 = (z.powi(3) + z) / 4.0;
    let g2 = (5.0 * z.powi(5) + 16.0 * z.powi(3) + 3.0 * z) / 96.0;
    let g3 = (3.0 * z.powi(7) + 19.0 * z.powi(5) + 17.0 * z.powi(3) - 15.0 * z) / 384.0;
    z + g1 / dof + g2 / dof.powi(2) + g3 / dof.powi(3)
}

#[test]
fn student_critical_matches_reference_quantiles() {
    for &p in &[0.8, 0.9, 0.95, 0.99] {
        for &dof in &[1usize, 2, 3, 4, 5, 7, 10, 15, 24, 30, 60, 120] {
            let oracle = StudentsT::new(0.0, 1.0, dof as f64).unwrap().inverse_cdf(0.5 + 0.5 * p);
            let ours = student_critical(dof, p).unwrap();
            assert!(
                (ours - oracle).abs() < 1e-8 * oracle.max(1.0),
                "dof {dof} p {p}: {ours} vs {oracle}"
            );
        }
        for &dof in &[2000usize, 5000, 100_000, 1_000_000] {
            let oracle = cornish_fisher(dof as f64, 0.5 + 0.5 * p);
            let ours = student_critical(dof, p).unwrap();
            assert!((ours - oracle).abs() < 1e-10, "dof {dof} p {p}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn normal_critical_matches_reference_quantiles() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for &p in &[0.5, 0.8, 0.9, 0.95, 0.99, 0.999] {
        let oracle = n.inverse_cdf(0.5 + 0.5 * p);
        assert!((normal_critical(p).unwrap() - oracle).abs() < 1e-12);
    }
    for &p in &[1e-10, 1e-4, 0.01, 0.2, 0.6] {
        assert!((normal_quantile(p) - n.inverse_cdf(p)).abs() < 1e-9);
    }
}

#[test]
fn incomplete_beta_matches_reference() {
    for &(a, b) in &[(0.5, 0.5), (2.0, 3.0), (15.0, 0.5), (300.0, 0.5), (1.5, 40.0)] {
        let dist = Beta::new(a, b).unwrap();
        for &x in &[0.01, 0.2, 0.5, 0.77, 0.99] {
            let (ours, oracle) = (regularized_beta(a, b, x), dist.cdf(x));
            assert!((ours - oracle).abs() < 1e-12, "I_{x}({a},{b}): {ours} vs {oracle}");
        }
    }
}

#[test]
fn two_point_series() {
    let s = AccuracySeries::new(vec![1.0, 0.0]).unwrap();
    let ci = normal_ci(&s, 0.95).unwrap();
    assert_eq!(ci.mean, 0.5);
    assert!((ci.half_width - 0.98).abs() < 1e-3);
    // one degree of freedom
    let open = student_ci(&s, 0.95).unwrap();
    assert!((open.half_width - 12.7062 * 0.5).abs() < 1e-3);
}

#[test]
fn probability_bound() {
    let b = conclusive_probability_bound(0.95).unwrap();
    assert!((b - 0.950625).abs() <= f64::EPSILON, "{b}");
    assert!(conclusive_probability_bound(1.0).is_err());
}

fn grid_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u32..=75).prop_map(|k| k as f64 / 75.0), n)
}

proptest! {
    #[test]
    fn paired_mean_is_difference_of_means(pair in (2usize..80).prop_flat_map(|n| (grid_values(n), grid_values(n)))) {
        let (a, b) = pair;
        let (sa, sb) = (AccuracySeries::new(a).unwrap(), AccuracySeries::new(b).unwrap());
        let ps = paired_series(&sa, &sb).unwrap();
        prop_assert_eq!(ps.mean(), sa.mean() - sb.mean());
        let d = paired_ci(&ps, 0.95).unwrap();
        prop_assert_eq!(d.mean, sa.mean() - sb.mean());
        // swapping the methods flips the verdict
        let back = paired_ci(&paired_series(&sb, &sa).unwrap(), 0.95).unwrap();
        prop_assert_eq!(paired_verdict(&back).symbol, paired_verdict(&d).symbol.flipped());
    }

    #[test]
    fn paired_and_unpaired_never_disagree_in_sign(pair in (2usize..80).prop_flat_map(|n| (grid_values(n), grid_values(n)))) {
        let (a, b) = pair;
        let (sa, sb) = (AccuracySeries::new(a).unwrap(), AccuracySeries::new(b).unwrap());
        let paired = paired_verdict(&paired_ci(&paired_series(&sa, &sb).unwrap(), 0.95).unwrap()).symbol;
        let open = compare_intervals(&student_ci(&sa, 0.95).unwrap(), &student_ci(&sb, 0.95).unwrap()).unwrap().symbol;
        prop_assert!(!(paired.is_conclusive() && open == paired.flipped()));
        let swapped = compare_intervals(&student_ci(&sb, 0.95).unwrap(), &student_ci(&sa, 0.95).unwrap()).unwrap().symbol;
        prop_assert_eq!(swapped, open.flipped());
    }

    #[test]
    fn student_interval_is_wider_than_normal(values in (2usize..200).prop_flat_map(grid_values)) {
        let s = AccuracySeries::new(values).unwrap();
        let (n, t) = (normal_ci(&s, 0.95).unwrap(), student_ci(&s, 0.95).unwrap());
        prop_assert!(t.half_width >= n.half_width);
        prop_assert_eq!(n.mean, t.mean);
        prop_assert!(n.lower() <= n.mean && n.mean <= n.upper());
    }
}

#[test]
fn constant_shift_gives_zero_width_paired_interval() {
    let a: Vec<f64> = (0..50).map(|i| (i % 7) as f64 / 8.0).collect();
    let b: Vec<f64> = a.iter().map(|x| x + 0.125).collect();
    let ps = paired_series(&AccuracySeries::new(a).unwrap(), &AccuracySeries::new(b).unwrap()).unwrap();
    let ci = paired_ci(&ps, 0.95).unwrap();
    assert_eq!(ci.half_width, 0.0);
    assert_eq!(paired_verdict(&ci).symbol, Symbol::Minus);
}
