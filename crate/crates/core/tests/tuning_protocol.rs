use mlood_core::baselines::fit_mahalanobis;
use mlood_core::harness::{gen_task, train, LinearModel, ToyConfig, TrainConfig};
use mlood_core::method::Aggregator;
use mlood_core::tuning::{
    mahalanobis_objective, odin_epsilons, odin_objective, synth_validation, tune_mahalanobis, tune_odin,
    ValidationPart, MAHALANOBIS_EPSILONS, ODIN_TEMPERATURES,
};
use mlood_core::{Matrix, Rng, ToyTask};

fn setup() -> (ToyTask, LinearModel) {
    let task = gen_task(&ToyConfig {
        n_train: 400,
        n_test_in: 10,
        n_test_ood: 10,
        seed: 9,
        ..ToyConfig::default()
    })
    .unwrap();
    let init = LinearModel::random_init(task.config.k, task.config.d, &mut Rng::new(9));
    let cfg = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let model = train(&init, &task.train, &cfg).unwrap();
    (task, model)
}

fn in_val(task: &ToyTask) -> Matrix {
    task.train.inputs().select_rows(&(0..200).collect::<Vec<_>>()).unwrap()
}

#[test]
fn odin_search_is_reproducible_by_recomputation() {
    let (task, model) = setup();
    let val = synth_validation(task.train.inputs(), 40, &Rng::new(1)).unwrap();
    let in_val = in_val(&task);
    let res = tune_odin(&model, &val, &in_val).unwrap();
    assert_eq!(res.grid_trace.len(), 84);
    let eps = odin_epsilons();
    let ood = val.union();
    for (idx, point) in res.grid_trace.iter().enumerate() {
        let (t, e) = (ODIN_TEMPERATURES[idx / 21], eps[idx % 21]);
        assert_eq!(point.params["temperature"], t);
        assert_eq!(point.params["epsilon"], e);
        let again = odin_objective(&model, &in_val, &ood, t, e, Aggregator::Max).unwrap();
        assert_eq!(point.fpr95, again);
    }
    let min = res.grid_trace.iter().map(|g| g.fpr95).fold(f64::INFINITY, f64::min);
    assert_eq!(res.objective, min);
    let first_best = res
        .grid_trace
        .iter()
        .filter(|g| g.fpr95 == min)
        .min_by(|a, b| {
            a.params["epsilon"]
                .total_cmp(&b.params["epsilon"])
                .then(a.params["temperature"].total_cmp(&b.params["temperature"]))
        })
        .unwrap();
    assert_eq!(res.best_params, first_best.params);
}

#[test]
fn mahalanobis_search_covers_the_listed_magnitudes() {
    let (task, _) = setup();
    let fitted = fit_mahalanobis(task.train.inputs(), task.train.labels(), None).unwrap();
    let val = synth_validation(task.train.inputs(), 40, &Rng::new(2)).unwrap();
    let in_val = in_val(&task);
    let res = tune_mahalanobis(&fitted, &val, &in_val, Aggregator::Max).unwrap();
    let listed: Vec<f64> = res.grid_trace.iter().map(|g| g.params["epsilon"]).collect();
    assert_eq!(listed, MAHALANOBIS_EPSILONS);
    for g in &res.grid_trace {
        let again = mahalanobis_objective(&fitted, &in_val, &val.union(), g.params["epsilon"], Aggregator::Max).unwrap();
        assert_eq!(g.fpr95, again);
    }
    assert!(res.grid_trace.iter().all(|g| g.fpr95 >= res.objective));
}

#[test]
fn geometric_part_never_exceeds_arithmetic_part() {
    let (task, _) = setup();
    let val = synth_validation(task.train.inputs(), 100, &Rng::new(3)).unwrap();
    let geo = val.part(ValidationPart::PairGeomMean);
    let ari = val.part(ValidationPart::PairArithMean);
    for (g, a) in geo.as_slice().iter().zip(ari.as_slice()) {
        assert!(g <= a);
    }
}

#[test]
fn validation_parts_have_equal_counts() {
    let (task, _) = setup();
    let val = synth_validation(task.train.inputs(), 25, &Rng::new(4)).unwrap();
    for p in ValidationPart::ALL {
        assert_eq!(val.part(p).shape(), (25, task.config.d));
    }
    assert_eq!(val.union().rows(), 125);
}
