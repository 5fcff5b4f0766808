use std::f64::consts::{PI, TAU};

use ergolab_core::rank_one::{RankOne, RankOneSpec};
use ergolab_core::rational::{q, Bounds};
use ergolab_core::sets::{Ambient, CylinderSet, MeasSet, RationalIntervalSet};
use ergolab_core::spectral::{
    autocovariance, eigen_scan, fejer_density, toeplitz_min_eig, wiener_atom, FunctionSpec,
};
use ergolab_core::systems::{fibonacci, System};
use ergolab_core::{Model, ModelSet};

fn interval(l: (i64, i64), r: (i64, i64)) -> ModelSet {
    ModelSet::Meas(MeasSet::Interval(
        RationalIntervalSet::interval(q(l.0, l.1), q(r.0, r.1), Ambient::Unit).unwrap(),
    ))
}

fn bernoulli_f() -> (Model, FunctionSpec) {
    let a = MeasSet::Cylinder(CylinderSet::from_assignment(&[(0, false)]).unwrap());
    (Model::System(System::bernoulli()), FunctionSpec::indicator(a.into(), true))
}

fn golden_f() -> (Model, FunctionSpec) {
    let m = Model::System(System::rotation(fibonacci(15)).unwrap());
    (m, FunctionSpec::indicator(interval((0, 1), (1, 2)), true))
}

#[test]
fn bernoulli_autocovariance_is_white() {
    let (m, f) = bernoulli_f();
    let ac = autocovariance(&m, &f, 20, None).unwrap();
    assert_eq!(ac.values[0], Bounds::exact(q(1, 4)));
    assert!(ac.values[1..].iter().all(|v| *v == Bounds::zero()));
    let d = fejer_density(&ac, 20, 512).unwrap();
    assert!(d.rho.iter().all(|r| (r - 0.25).abs() < 1e-9));
    for angle in [0.0, 1.0, 2.5] {
        assert!(wiener_atom(&ac, angle, 20).unwrap() <= 1.0 / 20.0);
    }
}

#[test]
fn rotation_autocovariance_is_bounded_and_psd() {
    let (m, f) = golden_f();
    let ac = autocovariance(&m, &f, 100, None).unwrap();
    assert_eq!(ac.values[0], Bounds::exact(q(1, 4)));
    assert!(ac.values.iter().all(|v| v.lo <= q(1, 4) && v.lo >= q(-1, 4)));
    assert!(toeplitz_min_eig(&ac, 12).unwrap() >= -1e-9);
    let d = fejer_density(&ac, 100, 4096).unwrap();
    assert!(d.min() >= -1e-9);
    assert!((d.mean() - 0.25).abs() <= 2.0 * 0.25 / 4096.0 + 1e-9);
}

#[test]
fn golden_density_peaks_at_rotation_angle() {
    let (m, f) = golden_f();
    let ac = autocovariance(&m, &f, 400, None).unwrap();
    let d = fejer_density(&ac, 400, 4096).unwrap();
    let (k, _) = d
        .rho
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &r)| if r > b.1 { (i, r) } else { b });
    let alpha = TAU * 610.0 / 987.0;
    let peak = d.theta[k];
    let dist = (peak - alpha).rem_euclid(TAU).min((alpha - peak).rem_euclid(TAU));
    let dist_conj = (peak - (TAU - alpha)).abs();
    assert!(dist.min(dist_conj) < 2.0 * TAU / 4096.0);
}

#[test]
fn golden_atom_mass_and_scan() {
    let (m, f) = golden_f();
    let ac = autocovariance(&m, &f, 2000, None).unwrap();
    let alpha = TAU * 610.0 / 987.0;
    let mass = wiener_atom(&ac, alpha, 2000).unwrap();
    let target = 1.0 / (PI * PI);
    assert!((mass - target).abs() <= 0.15 * target, "mass {mass}");
    let scan = eigen_scan(&ac, 2000, 4096, 0.01).unwrap();
    // odd multiples ±a, ±3a carry mass 1/(π²k²) > 0.01; even multiples carry none
    let expect: Vec<f64> = [1.0, 3.0, -1.0, -3.0]
        .iter()
        .map(|k| (k * alpha).rem_euclid(TAU))
        .collect();
    assert_eq!(scan.atoms.len(), 4);
    for e in expect {
        assert!(scan.atoms.iter().any(|a| (a.angle - e).abs() < 2.0 * TAU / 4096.0));
    }
}

#[test]
fn atom_and_off_atom_estimates_cross() {
    let (m, f) = golden_f();
    let ac = autocovariance(&m, &f, 500, None).unwrap();
    let alpha = TAU * 610.0 / 987.0;
    let off = alpha + 0.5;
    let on: Vec<f64> = [50, 100, 200, 500].iter().map(|&n| wiener_atom(&ac, alpha, n).unwrap()).collect();
    let away: Vec<f64> = [50, 100, 200, 500].iter().map(|&n| wiener_atom(&ac, off, n).unwrap()).collect();
    assert!(on.windows(2).all(|w| w[1] >= w[0] - 1e-3));
    assert!(away[3] < away[0]);
    assert!(on[3] > away[3]);
}

#[test]
fn finite_rotation_atoms_form_a_group() {
    let m = Model::System(System::rotation(q(3, 8)).unwrap());
    let f = FunctionSpec::indicator(interval((0, 1), (1, 8)), true);
    let ac = autocovariance(&m, &f, 2000, None).unwrap();
    let scan = eigen_scan(&ac, 2000, 4096, 0.01).unwrap();
    assert_eq!(scan.atoms.len(), 7);
    for a in &scan.atoms {
        assert!((a.mass - 1.0 / 64.0).abs() < 1e-9);
    }
    assert!(scan.closed);
}

#[test]
fn bernoulli_scan_is_empty() {
    let (m, f) = bernoulli_f();
    let ac = autocovariance(&m, &f, 500, None).unwrap();
    let scan = eigen_scan(&ac, 500, 4096, 0.01).unwrap();
    assert!(scan.atoms.is_empty());
}

#[test]
fn toeplitz_psd_on_presets() {
    let presets: Vec<(Model, FunctionSpec)> = vec![
        bernoulli_f(),
        golden_f(),
        {
            let a = MeasSet::parse("0..1/2 x 0..1/2", ergolab_core::sets::Family::Rectangle).unwrap();
            (Model::System(System::baker()), FunctionSpec::indicator(a.into(), true))
        },
        {
            let eng = RankOne::new(RankOneSpec::Katok);
            let a = eng.level_set(2, vec![0, 1]).unwrap();
            (Model::RankOne(eng), FunctionSpec::indicator(a.into(), true))
        },
        {
            let eng = RankOne::new(RankOneSpec::Staircase);
            let a = eng.level_set(2, vec![1, 3]).unwrap();
            (Model::RankOne(eng), FunctionSpec::indicator(a.into(), true))
        },
    ];
    for (m, f) in presets {
        let ac = autocovariance(&m, &f, 12, Some(&q(1, 1 << 30))).unwrap();
        assert!(toeplitz_min_eig(&ac, 12).unwrap() >= -1e-9, "{}", m.name());
    }
}


#[test]
fn low_threshold_drops_side_lobes() {
    let (m, f) = golden_f();
    let ac = autocovariance(&m, &f, 2000, None).unwrap();
    let scan = eigen_scan(&ac, 2000, 4096, 0.005).unwrap();
    assert_eq!(scan.atoms.len(), 4, "{:?}", scan.atoms);
    let m = Model::System(System::rotation(q(3, 8)).unwrap());
    let f = FunctionSpec::indicator(interval((0, 1), (1, 8)), true);
    let ac = autocovariance(&m, &f, 512, None).unwrap();
    let scan = eigen_scan(&ac, 512, 4096, 0.001).unwrap();
    assert_eq!(scan.atoms.len(), 7);
    assert!(scan.closed);
}
