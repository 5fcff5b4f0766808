use ergolab_core::rank_one::layout::Layout;
use ergolab_core::rank_one::{shifted_meet, Correlator, LevelSet, RankOne, RankOneSpec};
use ergolab_core::rational::{q, q_u128, Bounds, Q};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_levels(rng: &mut ChaCha8Rng, eng: &RankOne, stage: usize) -> LevelSet {
    let h = eng.height(stage).unwrap() as u64;
    let k = rng.random_range(1..=h.min(6));
    let levels = (0..k).map(|_| rng.random_range(0..h) as u128).collect();
    eng.level_set(stage, levels).unwrap()
}

#[test]
fn heights_match_recurrence() {
    let katok = RankOne::new(RankOneSpec::Katok);
    let stair = RankOne::new(RankOneSpec::Staircase);
    let hk: Vec<u128> = (1..=8).map(|j| katok.height(j).unwrap()).collect();
    let hs: Vec<u128> = (1..=8).map(|j| stair.height(j).unwrap()).collect();
    assert_eq!(hk, vec![1, 3, 14, 87, 700, 7005, 84066, 1176931]);
    assert_eq!(hs, vec![1, 5, 21, 94, 485, 2931, 20545, 164396]);
    for eng in [&katok, &stair] {
        for j in 1..eng.max_stage() {
            let s = eng.build_stage(j).unwrap();
            assert_eq!(s.total, &s.width * q_u128(s.h));
            assert!(eng.total(j + 1).unwrap() >= s.total);
        }
    }
}

#[test]
fn layout_geometry_matches_engine() {
    for spec in [RankOneSpec::Katok, RankOneSpec::Staircase, RankOneSpec::InfiniteL] {
        let eng = RankOne::new(spec.clone());
        let lay = Layout::build(&spec, 4, 1 << 16).unwrap();
        for j in 1..=4 {
            for l in 0..lay.height(j) {
                let (a, b) = eng.level_interval(j, l as u128).unwrap();
                assert_eq!(&(a, b), lay.level(j, l), "{spec} stage {j} level {l}");
            }
        }
    }
}

#[test]
fn brute_force_oracle_agrees() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let specs = [RankOneSpec::Katok, RankOneSpec::Staircase, RankOneSpec::InfiniteL];
    let layouts: Vec<Layout> = specs
        .iter()
        .map(|s| Layout::build(s, 6, 1 << 16).unwrap())
        .collect();
    for t in 0..50 {
        let idx = t % specs.len();
        let eng = RankOne::new(specs[idx].clone());
        let h4 = eng.height(4).unwrap() as i64;
        let (ja, jb) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let a = random_levels(&mut rng, &eng, ja);
        let b = random_levels(&mut rng, &eng, jb);
        let n = rng.random_range(-h4..=h4);
        let oracle = layouts[idx].shifted_meet(&a, &b, n).unwrap();
        let mut c = Correlator::new(&eng, &a, &b).unwrap();
        let at_same = c.bounds_at(n as i128, 6).unwrap();
        assert_eq!(at_same, oracle, "{} {a} {b} n={n}", specs[idx]);
        let tol = q(1, 1 << 20);
        let fine = c.meet(n as i128, &tol).unwrap().bounds;
        assert!(fine.within(&oracle), "{fine} not within {oracle}");
    }
}

#[test]
fn bounds_nest_with_depth() {
    let eng = RankOne::new(RankOneSpec::Staircase);
    let a = eng.level_set(2, vec![0, 1, 3]).unwrap();
    let b = eng.level_set(3, vec![2, 7, 11, 20]).unwrap();
    for n in [-40i128, -5, 3, 21, 60] {
        let mut c = Correlator::new(&eng, &a, &b).unwrap();
        let mut prev: Option<Bounds> = None;
        for j in 3..=12 {
            let cur = c.bounds_at(n, j).unwrap();
            if let Some(p) = &prev {
                assert!(cur.within(p));
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn adjoint_symmetry() {
    let eng = RankOne::new(RankOneSpec::Katok);
    let a = eng.level_set(3, vec![1, 5]).unwrap();
    let b = eng.level_set(2, vec![0, 2]).unwrap();
    for n in [-30i128, -3, 0, 14, 50] {
        let x = shifted_meet(&eng, &a, &b, n, None).unwrap().bounds;
        let y = shifted_meet(&eng, &b, &a, -n, None).unwrap().bounds;
        assert!(x.lo <= y.hi && y.lo <= x.hi);
    }
}

#[test]
fn infinite_l_progression_translates_are_disjoint() {
    let eng = RankOne::new(RankOneSpec::InfiniteL);
    for j in 1..=4 {
        let h = eng.height(j).unwrap() as i128;
        let x = eng.tower(j).unwrap();
        let mut c = Correlator::new(&eng, &x, &x).unwrap();
        for p in 1..=j as i128 {
            // T^{p h}X ∩ T^{p' h}X has measure μ(T^{(p-p')h}X ∩ X)
            let b = c.bounds_at(p * h, j + 1).unwrap();
            assert_eq!(b.hi, Q::from_integer(0.into()), "j={j} p={p}");
        }
    }
}

#[test]
fn unreachable_tolerance_reports_best_bounds() {
    let eng = RankOne::with_cap(RankOneSpec::Katok, 4);
    let a = eng.tower(2).unwrap();
    let err = shifted_meet(&eng, &a, &a, 3, Some(&q(1, 1 << 40))).unwrap_err();
    match err {
        ergolab_core::Error::Resource { best: Some(b), .. } => assert!(b.lo <= b.hi),
        other => panic!("unexpected {other:?}"),
    }
}

proptest! {
    #[test]
    fn random_specs_obey_recurrence(
        table in prop::collection::vec((2u64..=6).prop_flat_map(|r| prop::collection::vec(0u64..=8, r as usize)), 1..12)
    ) {
        let cuts: Vec<u64> = table.iter().map(|s| s.len() as u64).collect();
        let spec = RankOneSpec::custom(cuts.clone(), table.clone()).unwrap();
        let eng = RankOne::new(spec);
        for j in 1..eng.max_stage() {
            let h = eng.height(j).unwrap();
            let next = eng.height(j + 1).unwrap();
            let s: u128 = table[j - 1].iter().map(|&x| x as u128).sum();
            prop_assert_eq!(next, h * cuts[j - 1] as u128 + s);
            prop_assert_eq!(eng.width(j + 1).unwrap(), eng.width(j).unwrap() / q_u128(cuts[j - 1] as u128));
        }
    }

    #[test]
    fn refinement_conserves_measure(levels in prop::collection::vec(0u128..14, 1..6), k in 0usize..3) {
        let eng = RankOne::new(RankOneSpec::Katok);
        let ls = eng.level_set(3, levels).unwrap();
        let fine = eng.refine(&ls, 3 + k).unwrap();
        prop_assert_eq!(eng.measure(&fine), eng.measure(&ls));
        let factor: usize = (3..3 + k).map(|j| 2 * j).product();
        prop_assert_eq!(fine.len(), ls.len() * factor);
    }
}
