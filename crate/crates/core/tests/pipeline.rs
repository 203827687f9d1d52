//! End-to-end checks across datasets, symbolic extraction and evaluation.

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tp_eqln::datasets::{toy_function, Split, TaskKind};
use tp_eqln::metrics::{evaluate_model, keypoint_errors, trajectory_mse};
use tp_eqln::reference::{open_box_network, toy_network};
use tp_eqln::symbolic::{extract, parse, simplify, Census, DEFAULT_COEF_EPSILON};

#[test]
fn toy_tree_matches_the_generator() {
    let e = &extract(&toy_network().unwrap())[0];
    // −0.5·cos(−1.8) − 0.2·sin(−0.8) + 1.3·σ(0)
    let at_origin = -0.5 * (-1.8f64).cos() - 0.2 * (-0.8f64).sin() + 1.3 * 0.5;
    assert!((e.evaluate(&[0.0, 0.0]).unwrap() - at_origin).abs() < 1e-12);
    assert!((at_origin - 0.9071).abs() < 1e-4);

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let (t, g) = (rng.random_range(0.0..10.0), rng.random_range(0.0..3.0));
        let v = e.evaluate(&[g, t / 10.0]).unwrap();
        assert!((v - toy_function(t, g)).abs() < 1e-9, "t={t} γ={g}");
    }
}

#[test]
fn toy_tree_census() {
    let e = simplify(&extract(&toy_network().unwrap())[0], DEFAULT_COEF_EPSILON);
    let c = Census::of(&e);
    assert_eq!((c.sin, c.cos, c.sigmoid, c.sech, c.product), (1, 1, 1, 0, 1));
    let back = parse(&e.to_text_with(12), &e.vars).unwrap();
    assert_eq!(Census::of(&back), c);
}

#[test]
fn oracle_scores_zero_on_its_generator() {
    let ds = TaskKind::Phi4.generate(0, None).unwrap();
    let report = evaluate_model(&open_box_network().unwrap(), &ds).unwrap();
    assert_eq!(report.summaries.len(), 2);
    for d in &report.demos {
        assert!(d.mse < 1e-24 && d.endpoint_err < 1e-24, "demo {}: {}", d.demo, d.mse);
    }
    let summary = report.to_summary_csv();
    assert_eq!(summary.lines().count(), 3);
}

#[test]
fn demo_order_does_not_change_scores() {
    let ds = TaskKind::Phi4.generate(0, Some(60)).unwrap();
    let mut shuffled = ds.clone();
    shuffled.demos.reverse();
    shuffled.demos.swap(0, 3);
    let net = {
        let mut n = open_box_network().unwrap();
        n.layers_mut()[0].bias[1] = 0.3;
        n
    };
    let a = evaluate_model(&net, &ds).unwrap();
    let b = evaluate_model(&net, &shuffled).unwrap();
    for d in &a.demos {
        let m = b.demos.iter().find(|x| x.gamma == d.gamma).unwrap();
        assert_eq!(d.mse.to_bits(), m.mse.to_bits());
        assert_eq!(d.split, m.split);
    }
    for split in [Split::Training, Split::Extrapolation] {
        let (x, y) = (a.mse(split), b.mse(split));
        assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0), "{split:?}: {x} vs {y}");
    }
}

fn traj(rows: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((rows, 3), |_| rng.random_range(-1.0..1.0))
}

proptest! {
    #[test]
    fn trajectory_mse_is_symmetric(rows in 1..80usize, s in any::<u64>()) {
        let (a, b) = (traj(rows, s), traj(rows, s ^ 5));
        let ab = trajectory_mse(a.view(), b.view()).unwrap();
        prop_assert_eq!(ab.to_bits(), trajectory_mse(b.view(), a.view()).unwrap().to_bits());
        prop_assert_eq!(trajectory_mse(a.view(), a.view()).unwrap(), 0.0);
        let k = keypoint_errors(a.view(), a.view()).unwrap();
        prop_assert_eq!((k.peak_err, k.peak_xz_err, k.endpoint_err), (0.0, 0.0, 0.0));
    }
}
