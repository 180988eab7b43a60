mod common;

use ndarray::{array, Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqstar::activation::{sigmoid, ReluMode, SmoothRelaxation};
use seqstar::layer::{
    conv1d_reach, lstm_reach, lstm_step_reach, Conv1d, FullyConnected, LayerSpec, Lstm, LstmStateStars, OutputMode,
    ReachMode, SequenceStar,
};
use seqstar::network::{NetworkSpec, SequenceTensor};
use seqstar::{Error, Star};

fn random_lstm(rng: &mut ChaCha8Rng, input: usize, hidden: usize, mode: OutputMode) -> Lstm {
    let mut l = Lstm::zeros(input, hidden, mode);
    let mut fill = |a: &mut Array2<f64>| a.mapv_inplace(|_| rng.gen_range(-1.0..1.0));
    for w in [&mut l.w_i, &mut l.w_f, &mut l.w_g, &mut l.w_o, &mut l.r_i, &mut l.r_f, &mut l.r_g, &mut l.r_o] {
        fill(w);
    }
    for b in [&mut l.b_i, &mut l.b_f, &mut l.b_g, &mut l.b_o] {
        b.mapv_inplace(|_| rng.gen_range(-0.5..0.5));
    }
    l
}

fn boxed_sequence(values: &Array2<f64>, radius: f64) -> SequenceStar {
    let (n_f, t_s) = values.dim();
    let center: Vec<f64> = (0..t_s).flat_map(|t| (0..n_f).map(move |f| (f, t))).map(|(f, t)| values[[f, t]]).collect();
    let lo: Vec<f64> = center.iter().map(|v| v - radius).collect();
    let hi: Vec<f64> = center.iter().map(|v| v + radius).collect();
    SequenceStar::new(Star::from_box(&lo, &hi).unwrap(), n_f, t_s).unwrap()
}

fn sample(seq: &SequenceStar, rng: &mut ChaCha8Rng) -> Array2<f64> {
    seq.unstack(&seq.star().sample(rng, 1).unwrap())
}

#[test]
fn scalar_cell_matches_hand_computation() {
    let mut l = Lstm::zeros(1, 1, OutputMode::Sequence);
    l.w_i[[0, 0]] = 0.5;
    l.w_f[[0, 0]] = -0.3;
    l.w_g[[0, 0]] = 0.8;
    l.w_o[[0, 0]] = 1.2;
    l.r_i[[0, 0]] = 0.1;
    l.r_f[[0, 0]] = 0.4;
    l.r_g[[0, 0]] = -0.6;
    l.r_o[[0, 0]] = 0.2;
    l.b_i[0] = 0.05;
    l.b_f[0] = 1.0;
    l.b_g[0] = -0.1;
    l.b_o[0] = 0.0;

    let xs = [0.7, -1.3, 2.0];
    let (mut h, mut c) = (0.0f64, 0.0f64);
    let mut expected = Vec::new();
    for &x in &xs {
        let i = 1.0 / (1.0 + (-(0.5 * x + 0.1 * h + 0.05)).exp());
        let f = 1.0 / (1.0 + (-(-0.3 * x + 0.4 * h + 1.0)).exp());
        let g = (0.8 * x - 0.6 * h - 0.1).tanh();
        let o = 1.0 / (1.0 + (-(1.2 * x + 0.2 * h)).exp());
        c = f * c + i * g;
        h = o * c.tanh();
        expected.push(h);
    }
    let out = LayerSpec::Lstm(l).forward(&array![[0.7, -1.3, 2.0]]).unwrap();
    for (t, e) in expected.iter().enumerate() {
        assert!((out[[0, t]] - e).abs() < 1e-14);
    }
}

#[test]
fn lstm_reach_contains_sampled_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..3 {
        let lstm = random_lstm(&mut rng, 2, 2, OutputMode::Sequence);
        let values = Array2::from_shape_fn((2, 4), |_| rng.gen_range(-1.0..1.0));
        let input = boxed_sequence(&values, 0.3);
        for mode in [SmoothRelaxation::Interval, SmoothRelaxation::Secant] {
            let out = lstm_reach(&input, &lstm, mode).unwrap();
            assert_eq!((out.features(), out.steps()), (2, 4));
            let r = out.star().range_of(None).unwrap();
            let layer = LayerSpec::Lstm(lstm.clone());
            for _ in 0..1000 {
                let y = layer.forward(&sample(&input, &mut rng)).unwrap();
                for t in 0..4 {
                    for f in 0..2 {
                        let i = out.index(f, t);
                        let v = y[[f, t]];
                        assert!(
                            v >= r.lower[i] - 1e-7 && v <= r.upper[i] + 1e-7,
                            "trial {trial} {mode:?}: h[{f}] at step {t} = {v} outside [{}, {}]",
                            r.lower[i],
                            r.upper[i]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn point_input_reaches_the_forward_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lstm = random_lstm(&mut rng, 3, 4, OutputMode::Last);
    let values = Array2::from_shape_fn((3, 5), |_| rng.gen_range(-2.0..2.0));
    let out = lstm_reach(&SequenceStar::point(&values).unwrap(), &lstm, SmoothRelaxation::Interval).unwrap();
    assert_eq!(out.star().num_vars(), 0);
    let y = LayerSpec::Lstm(lstm).forward(&values).unwrap();
    for k in 0..4 {
        assert!((out.star().center()[k] - y[[k, 0]]).abs() < 1e-12);
    }
}

#[test]
fn variable_growth_per_step() {
    let hidden = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lstm = random_lstm(&mut rng, 2, hidden, OutputMode::Last);
    let x = Star::from_box(&[-0.5, 0.2], &[0.5, 0.6]).unwrap();
    let m0 = x.num_vars();

    let first = lstm_step_reach(&x, &LstmStateStars::zeros(hidden), &lstm, SmoothRelaxation::Interval).unwrap();
    // four gates, i ⊙ g, tanh(c), o ⊙ tanh(c); f ⊙ c₀ is exact
    assert_eq!(first.hidden.num_vars() - m0, 7 * hidden);

    let m1 = first.hidden.num_vars();
    let x2 = Star::from_box(&[-0.5, 0.2], &[0.5, 0.6]).unwrap();
    let second = lstm_step_reach(&x2, &first, &lstm, SmoothRelaxation::Interval).unwrap();
    assert_eq!(second.hidden.num_vars() - m1 - x2.num_vars(), 8 * hidden);
    assert_eq!(second.cell.num_vars(), second.hidden.num_vars());
}

#[test]
fn exact_mode_is_rejected_for_lstm_networks() {
    let net = NetworkSpec::new(
        "lstm",
        1,
        vec![LayerSpec::Lstm(Lstm::zeros(1, 2, OutputMode::Last))],
        vec![],
    )
    .unwrap();
    let mode = ReachMode {
        relu: ReluMode::ExactSplit,
        ..ReachMode::default()
    };
    let input = SequenceStar::point(&array![[1.0, 2.0]]).unwrap();
    assert!(matches!(net.reach(&input, &mode), Err(Error::UnsupportedMode(_))));
    assert!(net.reach(&input, &ReachMode::default()).is_ok());
}

/// Zero-padded direct convolution.
fn conv_oracle(conv: &Conv1d, x: &Array2<f64>) -> Array2<f64> {
    let (oc, ic, k) = conv.weights.dim();
    let p = conv.padding;
    let mut padded = Array2::zeros((ic, x.ncols() + 2 * p));
    padded.slice_mut(ndarray::s![.., p..p + x.ncols()]).assign(x);
    let span = conv.dilation * (k - 1) + 1;
    let t_out = (padded.ncols() - span) / conv.stride + 1;
    Array2::from_shape_fn((oc, t_out), |(o, t)| {
        let mut acc = conv.bias[o];
        for c in 0..ic {
            for j in 0..k {
                acc += conv.weights[[o, c, j]] * padded[[c, t * conv.stride + j * conv.dilation]];
            }
        }
        acc
    })
}

fn random_conv(rng: &mut ChaCha8Rng, oc: usize, ic: usize, k: usize, stride: usize, padding: usize, dilation: usize) -> Conv1d {
    Conv1d {
        weights: Array3::from_shape_fn((oc, ic, k), |_| rng.gen_range(-1.0..1.0)),
        bias: Array1::from_shape_fn(oc, |_| rng.gen_range(-1.0..1.0)),
        stride,
        padding,
        dilation,
    }
}

#[test]
fn conv_forward_and_point_reach_match_direct_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (stride, padding, dilation) in [(1, 0, 1), (1, 1, 1), (2, 1, 1), (1, 2, 2), (3, 0, 2)] {
        let conv = random_conv(&mut rng, 3, 2, 3, stride, padding, dilation);
        let x = Array2::from_shape_fn((2, 9), |_| rng.gen_range(-2.0..2.0));
        let expected = conv_oracle(&conv, &x);
        let y = LayerSpec::Conv1d(conv.clone()).forward(&x).unwrap();
        assert_eq!(y.dim(), expected.dim());
        assert_eq!(conv.output_len(9), Some(expected.ncols()));
        let reached = conv1d_reach(&SequenceStar::point(&x).unwrap(), &conv).unwrap();
        let r = reached.unstack(reached.star().center());
        for (a, b) in y.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in r.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn conv_reach_over_a_box_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let conv = random_conv(&mut rng, 2, 2, 3, 1, 1, 1);
    let x = Array2::from_shape_fn((2, 5), |_| rng.gen_range(-1.0..1.0));
    let radius = 0.2;
    let reached = conv1d_reach(&boxed_sequence(&x, radius), &conv).unwrap();
    let r = reached.star().range_of(None).unwrap();
    let center = conv_oracle(&conv, &x);
    // linear in the input: extreme values are center ± radius·Σ|impulse response|
    let mut spread = Array2::<f64>::zeros(center.dim());
    for f in 0..2 {
        for t in 0..5 {
            let mut e = x.clone();
            e[[f, t]] += 1.0;
            spread += &(conv_oracle(&conv, &e) - &center).mapv(f64::abs);
        }
    }
    for o in 0..2 {
        for t in 0..center.ncols() {
            let i = reached.index(o, t);
            assert!((r.lower[i] - (center[[o, t]] - radius * spread[[o, t]])).abs() < 1e-9);
            assert!((r.upper[i] - (center[[o, t]] + radius * spread[[o, t]])).abs() < 1e-9);
        }
    }
}

#[test]
fn conv_with_too_short_input_is_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let conv = random_conv(&mut rng, 1, 1, 5, 1, 0, 1);
    assert_eq!(conv.output_len(4), None);
    assert!(conv1d_reach(&SequenceStar::point(&array![[1.0, 2.0, 3.0, 4.0]]).unwrap(), &conv).is_err());
}

#[test]
fn fully_connected_acts_per_step_and_reports_the_last() {
    let net = NetworkSpec::new(
        "fc",
        2,
        vec![LayerSpec::FullyConnected(FullyConnected {
            weights: array![[1.0, -1.0]],
            bias: array![0.5],
        })],
        vec![],
    )
    .unwrap();
    let x = SequenceTensor::new(array![[1.0, 4.0], [2.0, 1.0]], None).unwrap();
    assert_eq!(net.forward(&x).unwrap(), vec![3.5]);
    assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
}
