use rand::Rng;

use strokesig_core::baselines::{KnnModel, LogRegModel};
use strokesig_core::rng::seeded;
use strokesig_core::signal_io::Label;
use strokesig_core::Example;

fn cloud(n: usize, dim: usize, seed: u64) -> Vec<Example> {
    let mut rng = seeded(seed);
    (0..n)
        .map(|_| {
            let stroke = rng.random::<bool>();
            let shift = if stroke { 0.7 } else { -0.7 };
            let x = (0..dim).map(|_| rng.random_range(-2.0..2.0) + shift).collect();
            Example::new(x, if stroke { Label::Stroke } else { Label::Normal })
        })
        .collect()
}

/// Exhaustive scan: sort every stored point by (distance, index), vote over
/// the first k, break a vote tie with the single nearest label.
fn knn_oracle(train: &[Example], k: usize, x: &[f64]) -> Label {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, e)| (e.x.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(), i))
        .collect();
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let top = &d[..k.min(d.len())];
    let strokes = top.iter().filter(|(_, i)| train[*i].label == Label::Stroke).count();
    let normals = top.len() - strokes;
    match strokes.cmp(&normals) {
        std::cmp::Ordering::Greater => Label::Stroke,
        std::cmp::Ordering::Less => Label::Normal,
        std::cmp::Ordering::Equal => train[top[0].1].label,
    }
}

#[test]
fn knn_matches_exhaustive_scan() {
    let train = cloud(120, 4, 1);
    let queries = cloud(200, 4, 2);
    for k in [1, 4, 5] {
        let model = KnnModel::fit(&train, k).unwrap();
        for q in &queries {
            assert_eq!(model.predict(&q.x).unwrap(), knn_oracle(&train, k, &q.x), "k={k}");
        }
    }
}

#[test]
fn logreg_optimum_has_vanishing_numeric_gradient() {
    let rows = cloud(60, 3, 3);
    let model = LogRegModel::fit(&rows, 1.0).unwrap();
    let h = 1e-6;
    let mut sq = 0.0;
    for j in 0..=3 {
        let shifted = |delta: f64| {
            let mut m = model.clone();
            if j < 3 {
                m.weights[j] += delta;
            } else {
                m.bias += delta;
            }
            m.loss(&rows)
        };
        let g = (shifted(h) - shifted(-h)) / (2.0 * h);
        sq += g * g;
    }
    // finite differences carry ~1e-10 rounding noise per component
    assert!(sq.sqrt() <= 1e-6, "numeric gradient norm {}", sq.sqrt());
}

#[test]
fn logreg_separable_one_d_is_finite_and_exact() {
    let rows: Vec<Example> = (0..20)
        .map(|i| {
            let x = i as f64 - 9.5;
            Example::new(vec![x], if x > 0.0 { Label::Stroke } else { Label::Normal })
        })
        .collect();
    let model = LogRegModel::fit(&rows, 10.0).unwrap();
    assert!(model.weights[0].is_finite() && model.bias.is_finite());
    for e in &rows {
        assert_eq!(model.predict(&e.x).unwrap().0, e.label);
    }
}
