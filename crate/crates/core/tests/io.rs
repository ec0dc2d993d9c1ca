use bdagar::graph::OrderedRegionGraph;
use bdagar::io::{
    join_geojson, load_dataset_from, read_values_csv, simulate_dataset, write_dataset_csv, write_values_csv,
    RegionValue, RunConfig, SimulationTruth,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn truth(beta1: Vec<f64>, beta2: Vec<f64>, sigma2: f64, tau: f64, eta: [f64; 2]) -> SimulationTruth {
    SimulationTruth {
        beta1,
        beta2,
        sigma2: [sigma2; 2],
        tau: [tau; 2],
        rho: [0.5, 0.5],
        eta,
        seed: 1,
        model: Default::default(),
        disease_names: ["a".into(), "b".into()],
        w: None,
    }
}

#[test]
fn toy_csv_shape() {
    let g = OrderedRegionGraph::path(3).unwrap();
    let csv = "region,y_a,y_b,x1\nv0,1,2,0.5\nv1,2,3,0.1\nv2,3,4,-0.2\n";
    let d = load_dataset_from(csv.as_bytes(), &g, &RunConfig::default()).unwrap();
    assert_eq!((d.k(), d.p(0), d.p(1)), (3, 2, 2));

    let bad = "region,y_a,y_b,x1\nv0,1,2,0.5\nv1,2,3,0.1\nzz,3,4,-0.2\n";
    let e = load_dataset_from(bad.as_bytes(), &g, &RunConfig::default()).unwrap_err();
    assert!(e.to_string().contains("\"zz\""));
}

#[test]
fn simulated_means_match_intercepts() {
    // η = 0 and huge τ leave y = β + N(0, 1) noise
    let g = OrderedRegionGraph::path(1).unwrap();
    let t = truth(vec![5.0], vec![-3.0], 1.0, 1e12, [0.0, 0.0]);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 10_000;
    let mut sums = [0.0; 2];
    for _ in 0..n {
        let sim = simulate_dataset(&g, &t, &mut rng).unwrap();
        sums[0] += sim.dataset.outcomes[0][0];
        sums[1] += sim.dataset.outcomes[1][0];
    }
    let tol = 4.0 / (n as f64).sqrt();
    assert!((sums[0] / n as f64 - 5.0).abs() < tol);
    assert!((sums[1] / n as f64 + 3.0).abs() < tol);
}

#[test]
fn noise_free_limit() {
    let g = OrderedRegionGraph::grid(3, 3).unwrap();
    let t = truth(vec![1.0, 2.0], vec![-1.0, 0.5, 0.25], 1e-12, 1e12, [0.5, 0.1]);
    let sim = simulate_dataset(&g, &t, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    for i in 0..2 {
        let beta = nalgebra::DVector::from_column_slice(if i == 0 { &t.beta1 } else { &t.beta2 });
        let xb = &sim.dataset.covariates[i] * beta;
        assert!((&sim.dataset.outcomes[i] - xb).amax() < 1e-3);
    }
}

#[test]
fn same_seed_same_bytes() {
    let g = OrderedRegionGraph::grid(2, 2).unwrap();
    let t = truth(vec![1.0, 2.0], vec![0.0], 0.5, 2.0, [0.3, 0.1]);
    let bytes = |seed| {
        let sim = simulate_dataset(&g, &t, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut buf = Vec::new();
        write_dataset_csv(&sim.dataset, &mut buf).unwrap();
        buf
    };
    assert_eq!(bytes(4), bytes(4));
    assert_ne!(bytes(4), bytes(5));
}

#[test]
fn values_csv_edge_cases() {
    let one = vec![RegionValue {
        region: "only".into(),
        mean: std::f64::consts::FRAC_1_SQRT_2,
        lo: 0.5,
        hi: 0.9,
    }];
    let mut buf = Vec::new();
    write_values_csv(&one, &mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "region,mean,lo,hi\nonly,0.707107,0.500000,0.900000\n"
    );

    let mut buf = Vec::new();
    write_values_csv(&[], &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "region,mean,lo,hi\n");

    let names = vec![
        RegionValue {
            region: "Zürich".into(),
            mean: 1.0,
            lo: 0.0,
            hi: 2.0,
        },
        RegionValue {
            region: "東京".into(),
            mean: -1.0,
            lo: -2.0,
            hi: 0.0,
        },
    ];
    let mut buf = Vec::new();
    write_values_csv(&names, &mut buf).unwrap();
    let back = read_values_csv(buf.as_slice()).unwrap();
    assert_eq!(
        back.iter().map(|v| v.region.as_str()).collect::<Vec<_>>(),
        ["Zürich", "東京"]
    );
}

#[test]
fn geojson_join_is_stable() {
    let geo = r#"{"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"id": "x"}, "geometry": null},
        {"type": "Feature", "properties": {"id": "y"}, "geometry": null}]}"#;
    let values: Vec<RegionValue> = ["x", "y"]
        .iter()
        .map(|id| RegionValue {
            region: id.to_string(),
            mean: 0.25,
            lo: 0.0,
            hi: 0.5,
        })
        .collect();
    let a = join_geojson(&values, geo, "id", "rate").unwrap();
    let b = join_geojson(&values, geo, "id", "rate").unwrap();
    assert_eq!(a, b);
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(doc["features"][1]["properties"]["rate"], 0.25);

    let missing = r#"{"type": "FeatureCollection", "features": [
        {"type": "Feature", "properties": {"id": "x"}}, {"type": "Feature", "properties": {}}]}"#;
    assert!(join_geojson(&values, missing, "id", "rate")
        .unwrap_err()
        .to_string()
        .contains("feature 1"));
    assert!(join_geojson(&values, "{not json", "id", "rate").is_err());
}
