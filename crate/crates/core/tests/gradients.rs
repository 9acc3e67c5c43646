mod oracles;

use mlood_core::harness::{LinearModel, ToyConfig};
use mlood_core::{LabeledDataset, Matrix, Rng};
use oracles::{central_diff, relative_error};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};

fn random_model(rng: &mut Rng, k: usize, d: usize) -> LinearModel {
    let n = Normal::new(0.0, 0.5).unwrap();
    let w = Matrix::new(k, d, (0..k * d).map(|_| n.sample(rng)).collect()).unwrap();
    LinearModel::new(w, (0..k).map(|_| n.sample(rng)).collect()).unwrap()
}

fn random_batch(rng: &mut Rng, rows: usize, k: usize, d: usize) -> LabeledDataset {
    let x = Matrix::new(rows, d, (0..rows * d).map(|_| rng.random()).collect()).unwrap();
    let y = Matrix::new(rows, k, (0..rows * k).map(|_| f64::from(rng.random_bool(0.4))).collect()).unwrap();
    LabeledDataset::new(x, y).unwrap()
}

fn flatten(m: &LinearModel) -> Vec<f64> {
    let mut p = m.weights().as_slice().to_vec();
    p.extend_from_slice(m.bias());
    p
}

fn unflatten(p: &[f64], k: usize, d: usize) -> LinearModel {
    LinearModel::new(Matrix::new(k, d, p[..k * d].to_vec()).unwrap(), p[k * d..].to_vec()).unwrap()
}

#[test]
fn parameter_gradient_matches_finite_differences() {
    let (k, d) = (3, 5);
    let mut rng = Rng::new(101);
    for _ in 0..10 {
        let model = random_model(&mut rng, k, d);
        let batch = random_batch(&mut rng, 7, k, d);
        let (dw, db) = model.bce_param_grad(&batch).unwrap();
        let mut analytic = dw.as_slice().to_vec();
        analytic.extend(db);
        let fd = central_diff(|p| unflatten(p, k, d).bce_loss(&batch).unwrap(), &flatten(&model), 1e-5);
        let err = relative_error(&analytic, &fd);
        assert!(err < 1e-5, "relative error {err}");
    }
}

#[test]
fn input_gradient_matches_finite_differences() {
    let (k, d) = (4, 6);
    let mut rng = Rng::new(202);
    for t in 0..10 {
        let model = random_model(&mut rng, k, d);
        let x: Vec<f64> = (0..d).map(|_| rng.random()).collect();
        let label = t % k;
        let target = f64::from(t % 2 == 0);
        let loss = |z: &[f64]| {
            let f = model.logits_row(z)[label];
            mlood_core::scoring::softplus(f) - target * f
        };
        let fd = central_diff(loss, &x, 1e-5);
        let g = model.bce_input_grad(&x, label, target).unwrap();
        assert!(relative_error(&g, &fd) < 1e-5);
    }
}

#[test]
fn default_config_dimensions_are_supported() {
    let cfg = ToyConfig::default();
    let mut rng = Rng::new(0);
    let m = LinearModel::random_init(cfg.k, cfg.d, &mut rng);
    assert_eq!((m.num_labels(), m.dim()), (cfg.k, cfg.d));
}
