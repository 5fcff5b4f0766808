use ergolab_core::poisson::{
    count_distribution, count_partition_entropy, independence_check, poisson_pmf, sample_configs,
    suspension_pentropy, PoissonWindow,
};
use ergolab_core::rank_one::{RankOne, RankOneSpec};
use ergolab_core::rational::{q, to_f64};
use ergolab_core::sets::{Ambient, RationalIntervalSet};

fn unit_window() -> PoissonWindow {
    PoissonWindow::new(RankOne::new(RankOneSpec::InfiniteL), 1).unwrap()
}

fn half(l: i64, r: i64) -> RationalIntervalSet {
    RationalIntervalSet::interval(q(l, 2), q(r, 2), Ambient::Ray).unwrap()
}

#[test]
fn empty_frequency_matches_formula() {
    let w = unit_window();
    assert_eq!(w.mass(), &q(1, 1));
    let s = sample_configs(&w, 100_000, 7).unwrap();
    let e = (-1f64).exp();
    let empty = s.configs.iter().filter(|c| c.is_empty()).count() as f64 / 1e5;
    let sigma = (e * (1.0 - e) / 1e5).sqrt();
    assert!((empty - e).abs() <= 3.0 * sigma, "{empty}");
    let mean = s.totals().iter().map(|&c| c as f64).sum::<f64>() / 1e5;
    assert!((mean - 1.0).abs() <= 3.0 / 1e5f64.sqrt());
    assert!(s.configs.iter().flatten().all(|x| (0.0..1.0).contains(x)));
}

#[test]
fn samples_are_reproducible() {
    let w = PoissonWindow::new(RankOne::new(RankOneSpec::InfiniteL), 3).unwrap();
    let a = sample_configs(&w, 10_000, 3).unwrap();
    let b = sample_configs(&w, 10_000, 3).unwrap();
    assert_eq!(a.configs, b.configs);
    assert_ne!(a.configs, sample_configs(&w, 10_000, 4).unwrap().configs);
}

#[test]
fn reference_pmf_and_moments() {
    let w = unit_window();
    let s = sample_configs(&w, 100_000, 11).unwrap();
    let d = count_distribution(&w, &s, &half(0, 1)).unwrap();
    let reference: Vec<f64> = d.rows.iter().take(3).map(|r| r.reference).collect();
    for (r, want) in reference.iter().zip([0.6065, 0.3033, 0.0758]) {
        assert!((r - want).abs() < 5e-5);
    }
    assert!(d.rows.iter().all(|r| r.pass));
    assert!(d.p_value > 1e-4, "{d:?}");
    let sd = (0.5f64 / 1e5).sqrt();
    assert!((d.mean - 0.5).abs() <= 4.0 * sd);
    // Var of the sample variance of Poisson(μ) is ≈ (μ + 2μ²)/n.
    assert!((d.variance - 0.5).abs() <= 4.0 * ((0.5 + 2.0 * 0.25) / 1e5f64).sqrt());
    let empty = RationalIntervalSet::empty(Ambient::Ray);
    let d = count_distribution(&w, &s, &empty).unwrap();
    assert_eq!(d.rows[0].empirical, 1.0);
    assert!(count_distribution(&w, &s, &half(1, 3)).is_err());
}

#[test]
fn window_mean_on_larger_tower() {
    let eng = RankOne::new(RankOneSpec::InfiniteL);
    let w = PoissonWindow::new(eng.clone(), 3).unwrap();
    assert_eq!(w.mass(), &eng.total(3).unwrap());
    let s = sample_configs(&w, 20_000, 5).unwrap();
    let d = count_distribution(&w, &s, w.support()).unwrap();
    let m = to_f64(w.mass());
    assert!((d.mean - m).abs() <= 3.0 * (m / 2e4).sqrt());
}

#[test]
fn disjoint_halves_are_independent() {
    let w = unit_window();
    let s = sample_configs(&w, 100_000, 21).unwrap();
    let r = independence_check(&w, &s, &half(0, 1), &half(1, 2)).unwrap();
    assert_eq!(r.cells.len(), 9);
    assert!(r.pass, "{r:?}");
    assert!(independence_check(&w, &s, &half(0, 1), &half(0, 1)).is_err());
}

#[test]
fn pmf_sums_to_one() {
    let total: f64 = (0..60).map(|k| poisson_pmf(3.5, k)).sum();
    assert!((total - 1.0).abs() < 1e-12);
    let e = (-1f64).exp();
    let p = [e, e, 1.0 - 2.0 * e];
    let h: f64 = p.iter().map(|x| -x * x.ln()).sum();
    assert!((count_partition_entropy(1.0) - h).abs() < 1e-15);
}

#[test]
fn suspension_entropy_on_disjoint_translates() {
    let eng = RankOne::new(RankOneSpec::InfiniteL);
    let a = eng.level_set(3, vec![0, 1, 2, 3]).unwrap();
    assert_eq!(eng.measure(&a), q(1, 1));
    let w = PoissonWindow::new(eng.clone(), 4).unwrap();
    let r = suspension_pentropy(&w, &a, 3, 3, 100_000, 1).unwrap();
    assert_eq!(r.certified_pairs, 3);
    assert!((0.9..=1.02).contains(&r.ratio), "{r:?}");
    let one = suspension_pentropy(&w, &a, 3, 1, 20_000, 9).unwrap();
    assert!((one.estimate - one.single_plugin).abs() < 1e-15);
    // Window too shallow for the translates.
    let low = PoissonWindow::new(eng.clone(), 3).unwrap();
    assert!(suspension_pentropy(&low, &a, 3, 3, 100, 1).is_err());
    // L beyond the spacer guarantee.
    assert!(suspension_pentropy(&w, &a, 3, 4, 100, 1).is_err());
}
