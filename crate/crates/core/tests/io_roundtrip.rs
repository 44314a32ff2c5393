use ordgeo::io::{self, load_oms, save_oms, to_oms_json};
use ordgeo::sprinkle::sprinkle;
use ordgeo::{ModelSpacetime, OrderMode, SigmaMatrix, SigmaSource, SprinkleConfig};

fn small_sprinkle(seed: u64) -> ordgeo::OrderedMeasureSpace {
    let dim = 2 + (seed % 2) as usize;
    let model = ModelSpacetime::minkowski(dim, 0.5, (0.0, 1.0)).unwrap();
    sprinkle(&SprinkleConfig::with_points(model, 5 + (seed as usize * 7) % 60, seed)).unwrap()
}

#[test]
fn hundred_sprinkles_round_trip_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..100 {
        let x = small_sprinkle(seed);
        for closed in [false, true] {
            let path = dir.path().join(format!("s{seed}_{closed}.oms.json"));
            save_oms(&x, &path, closed).unwrap();
            let y = load_oms(&path).unwrap();
            assert_eq!(y.ids(), x.ids());
            assert_eq!(y.weights(), x.weights());
            assert_eq!(y.coords(), x.coords());
            for mode in [OrderMode::Causal, OrderMode::Chrono] {
                assert_eq!(y.relation(mode), x.relation(mode), "seed {seed}");
            }
            let again = to_oms_json(&y, closed).unwrap();
            assert_eq!(again.as_bytes(), std::fs::read(&path).unwrap().as_slice(), "seed {seed}");
        }
    }
}

#[test]
fn open_and_closed_forms_describe_the_same_space() {
    let x = small_sprinkle(11);
    let open = io::from_oms_json(&to_oms_json(&x, false).unwrap()).unwrap();
    let closed = io::from_oms_json(&to_oms_json(&x, true).unwrap()).unwrap();
    assert_eq!(to_oms_json(&open, true).unwrap(), to_oms_json(&closed, true).unwrap());
}

#[test]
fn sigma_lormat_round_trip_preserves_entries() {
    let x = small_sprinkle(4);
    let model = ModelSpacetime::minkowski(2, 0.5, (0.0, 1.0)).unwrap();
    let sigma = SigmaMatrix::exact(&x, &model).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sigma.lormat");
    io::write_sigma_lormat(&x, &sigma, &path).unwrap();
    let back = io::read_sigma_lormat(&x, &path, SigmaSource::ExactModel).unwrap();
    assert_eq!(back, sigma);
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..8], io::LORMAT_MAGIC);
    assert_eq!(bytes.len(), 16 + 8 * x.len() * x.len());
}

#[test]
fn compare_identical_sigma_is_all_zero() {
    let x = small_sprinkle(6);
    let model = ModelSpacetime::minkowski(2, 0.5, (0.0, 1.0)).unwrap();
    let sigma = SigmaMatrix::exact(&x, &model).unwrap();
    let cmp = io::compare_sigma(&x, &sigma, &sigma, 0).unwrap();
    assert!(cmp.n_pairs > 0);
    assert_eq!(cmp.max, Some(0.0));
    let none = io::compare_sigma(&x, &sigma, &sigma, usize::MAX).unwrap();
    assert!(none.empty);
    assert_eq!(none.median, None);
}
