mod common;

use common::random_matrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randfnn::linalg::{Matrix, SolverConfig};
use randfnn::model::{hidden_outputs, predict, rmse, sigmoid, train_readout, HiddenLayer, ReadoutWeights, TrainedNetwork};

fn layer(rng: &mut ChaCha8Rng, n: usize, m: usize, scale: f64) -> HiddenLayer {
    let w = Matrix::from_fn(n, m, |_, _| rng.gen_range(-scale..scale));
    let b = (0..m).map(|_| rng.gen_range(-scale..scale)).collect();
    HiddenLayer::new(w, b).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // 1/(1 + e^-z) rounds to exactly 1.0 in f64 once z exceeds about 36.7, so
    // the open interval is checked where it is representable and the closed
    // one everywhere.
    #[test]
    fn outputs_are_in_unit_interval(seed in any::<u64>(), n in 1usize..6, m in 1usize..40, scale in 0.1f64..1000.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layer(&mut rng, n, m, scale);
        let x = random_matrix(&mut rng, 30, n);
        let h = hidden_outputs(&l, &x).unwrap();
        for r in 0..30 {
            for i in 0..m {
                let z = l.pre_activation(i, x.row(r));
                let v = h[(r, i)];
                prop_assert!((0.0..=1.0).contains(&v));
                if z.abs() <= 36.0 {
                    prop_assert!(v > 0.0 && v < 1.0, "z {z} gave {v}");
                }
            }
        }
    }

    #[test]
    fn least_squares_beats_perturbed_readouts(seed in any::<u64>(), m in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layer(&mut rng, 2, m, 5.0);
        let x = Matrix::from_fn(60, 2, |_, _| rng.gen_range(0.0..1.0));
        let y: Vec<f64> = (0..60).map(|r| (6.0 * x[(r, 0)]).sin() + x[(r, 1)]).collect();
        let beta = train_readout(&l, &x, &y, &SolverConfig::default()).unwrap();
        let net = TrainedNetwork::new(l.clone(), beta.clone(), None).unwrap();
        let best = rmse(&predict(&net, &x).unwrap(), &y).unwrap();
        for _ in 0..100 {
            let step = rng.gen_range(1e-6..1.0);
            let other: Vec<f64> = beta.beta.iter().map(|b| b + step * rng.gen_range(-1.0..1.0)).collect();
            let net = TrainedNetwork::new(l.clone(), ReadoutWeights { beta: other }, None).unwrap();
            let e = rmse(&predict(&net, &x).unwrap(), &y).unwrap();
            prop_assert!(best <= e * (1.0 + 1e-12) + 1e-15, "{best} > {e}");
        }
    }

    #[test]
    fn node_order_does_not_matter(seed in any::<u64>(), m in 2usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = layer(&mut rng, 3, m, 3.0);
        let beta: Vec<f64> = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let mut perm: Vec<usize> = (0..m).collect();
        randfnn::RngStream::new(seed).shuffle(&mut perm);
        let w = Matrix::from_fn(3, m, |j, i| l.weights()[(j, perm[i])]);
        let b = perm.iter().map(|&p| l.biases()[p]).collect();
        let pb = perm.iter().map(|&p| beta[p]).collect();
        let x = random_matrix(&mut rng, 20, 3);
        let a = predict(&TrainedNetwork::new(l, ReadoutWeights { beta }, None).unwrap(), &x).unwrap();
        let c = predict(
            &TrainedNetwork::new(HiddenLayer::new(w, b).unwrap(), ReadoutWeights { beta: pb }, None).unwrap(),
            &x,
        )
        .unwrap();
        for (p, q) in a.iter().zip(&c) {
            prop_assert!((p - q).abs() <= 1e-12 * (1.0 + p.abs()));
        }
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let l = layer(&mut rng, 4, 64, 10.0);
    let x = random_matrix(&mut rng, 3000, 4);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| hidden_outputs(&l, &x).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    for r in (0..3000).step_by(97) {
        for i in 0..64 {
            assert_eq!(one[(r, i)], sigmoid(l.pre_activation(i, x.row(r))));
        }
    }
}
