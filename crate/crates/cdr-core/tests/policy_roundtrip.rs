//! Serialization round-trips for trained policies and query records.
//!
//! A policy written to disk and loaded back must make bit-identical routing
//! decisions, and the JSONL corpus format must survive a write/read cycle
//! without perturbing any float.

use cdr_core::routing::{
    fit_linear, fit_neural, fit_tree, policy_from_json, policy_to_json, RoutingPolicy,
};
use cdr_core::rng::StreamKey;
use cdr_core::{
    extract_features, generate_corpus, ClusteringConfig, CorpusSpec, EngineProfiles,
    FeatureVector, SimulatedQuery, Strategy, TrainConfig, UtilityConfig,
};

fn corpus(n: usize, seed: u64) -> Vec<SimulatedQuery> {
    let spec = CorpusSpec { n_queries: n, seed, ..CorpusSpec::default() };
    generate_corpus(&spec, &EngineProfiles::default(), &UtilityConfig::default()).unwrap()
}

fn training_data(queries: &[SimulatedQuery]) -> Vec<(FeatureVector, Strategy)> {
    let clustering = ClusteringConfig::default();
    queries
        .iter()
        .map(|q| {
            let f = extract_features(&q.record, None, &clustering).unwrap();
            (f, q.oracle_label)
        })
        .collect()
}

fn fitted_policies() -> Vec<RoutingPolicy> {
    let data = training_data(&corpus(300, 21));
    let config = TrainConfig { epochs: 40, ..TrainConfig::default() };
    vec![
        RoutingPolicy::Linear(fit_linear(&data, &config).unwrap()),
        RoutingPolicy::Neural(fit_neural(&data, &[8, 4], &config).unwrap()),
        RoutingPolicy::Tree(fit_tree(&data, 3).unwrap()),
    ]
}

fn random_features(n: usize, seed: u64) -> Vec<FeatureVector> {
    let key = StreamKey::root(seed);
    (0..n)
        .map(|i| {
            let mut s = key.child(i as u64).stream();
            FeatureVector::new(s.next_f64(), s.next_f64(), 3.0 * s.next_f64(), s.next_f64())
                .unwrap()
        })
        .collect()
}

#[test]
fn every_policy_kind_survives_a_json_round_trip_bit_exactly() {
    let probes = random_features(200, 400);
    for policy in fitted_policies() {
        let text = policy_to_json(&policy);
        let restored = policy_from_json(&text).unwrap();
        assert_eq!(restored, policy, "{} struct equality", policy.kind());
        for f in &probes {
            let a = policy.score(f);
            let b = restored.score(f);
            assert_eq!(
                a.to_bits(),
                b.to_bits(),
                "{}: score diverged after round trip",
                policy.kind()
            );
        }
        // Serializing the restored policy reproduces the exact bytes.
        assert_eq!(policy_to_json(&restored), text);
    }
}

#[test]
fn unsupported_format_version_is_rejected() {
    let text = policy_to_json(&fitted_policies()[0]);
    let tampered = text.replace("\"version\": 1", "\"version\": 2");
    assert_ne!(tampered, text, "tamper target not found in serialized policy");
    let err = policy_from_json(&tampered).unwrap_err();
    assert!(
        err.to_string().contains("version"),
        "error should mention the version: {err}"
    );
}

#[test]
fn malformed_documents_are_rejected() {
    for bad in [
        "",
        "not json",
        "{}",
        r#"{"version": 1}"#,
        r#"{"version": 1, "policy": {"kind": "oracle", "parameters": {}}}"#,
    ] {
        assert!(policy_from_json(bad).is_err(), "accepted {bad:?}");
    }
}

#[test]
fn corpus_jsonl_round_trip_is_lossless() {
    let queries = corpus(120, 33);
    let jsonl: String = queries
        .iter()
        .map(|q| serde_json::to_string(q).unwrap() + "\n")
        .collect();
    let restored: Vec<SimulatedQuery> = jsonl
        .lines()
        .map(|line| serde_json::from_str(line).unwrap())
        .collect();
    assert_eq!(restored, queries);

    // Feature extraction agrees bit-for-bit on the restored records.
    let clustering = ClusteringConfig::default();
    for (orig, back) in queries.iter().zip(&restored) {
        let a = extract_features(&orig.record, None, &clustering).unwrap();
        let b = extract_features(&back.record, None, &clustering).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn unknown_fields_in_query_records_are_rejected() {
    let queries = corpus(1, 9);
    let mut value = serde_json::to_value(&queries[0]).unwrap();
    value
        .as_object_mut()
        .unwrap()
        .insert("surprise".into(), serde_json::Value::Bool(true));
    let text = serde_json::to_string(&value).unwrap();
    assert!(serde_json::from_str::<SimulatedQuery>(&text).is_err());
}
