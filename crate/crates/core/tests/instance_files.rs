use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sbls::bundled::{paper_a, PAPER_A_JSON, PAPER_B_JSON};
use sbls::format::{parse_instance, serialize_instance, FormatError, InstanceFile};
use sbls::generators::{gen_planted, gen_random};
use sbls::oracle::{global_brute, solve_restricted, OracleConfig, SupportPair};
use sbls::solvers::{multistart, SolveConfig};

#[test]
fn seeded_instances_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..50 {
        let (l, m, n) = (rng.gen_range(1..6), rng.gen_range(2..7), rng.gen_range(2..7));
        let (s, t) = (rng.gen_range(1..m), rng.gen_range(1..n));
        let (inst, z) = if seed % 2 == 0 {
            let (i, z) = gen_planted(l, m, n, s, t, seed).unwrap();
            (i, Some(z))
        } else {
            (gen_random(l, m, n, s, t, seed).unwrap(), None)
        };
        let text = serialize_instance(&inst, z.as_ref(), None);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back.instance, inst);
        assert_eq!(back.known_point, z);
        assert_eq!(serialize_instance(&back.instance, back.known_point.as_ref(), None), text);
    }
}

#[test]
fn bundled_files_reserialize_to_equal_instances() {
    for text in [PAPER_A_JSON, PAPER_B_JSON] {
        let p = parse_instance(text).unwrap();
        let file = InstanceFile::from_instance(&p.instance, p.known_point.as_ref(), p.label.as_deref());
        let again = parse_instance(&serde_json::to_string(&file).unwrap()).unwrap();
        assert_eq!(again, p);
    }
}

#[test]
fn error_messages_are_distinct() {
    let base = PAPER_A_JSON;
    let cases = [
        base.replace("\"b\": [5.0, 0.0]", "\"b\": [5.0, 0.0"),
        base.replace("[2, 3, 1, 1.0]", "[2, 3, 4, 1.0]"),
        base.replace("[2, 3, 1, 1.0]", "[2, 2, 2, 1.0]"),
        base.replace("\"b\": [5.0, 0.0]", "\"b\": [5.0, 0.0, 1.0]"),
        base.replace("\"label\"", "\"note\""),
    ];
    let errors: Vec<FormatError> = cases.iter().map(|c| parse_instance(c).unwrap_err()).collect();
    assert!(matches!(errors[0], FormatError::Json(_)));
    assert!(matches!(errors[1], FormatError::IndexOutOfRange { axis: 'k', index: 4, bound: 3, .. }));
    assert!(matches!(errors[2], FormatError::DuplicateEntry { i: 2, j: 2, k: 2 }));
    assert!(matches!(errors[3], FormatError::DimensionMismatch { what: "b", expected: 2, got: 3 }));
    assert!(errors[4].to_string().contains("`note`"));
    let messages: std::collections::HashSet<String> = errors.iter().map(|e| e.to_string()).collect();
    assert_eq!(messages.len(), errors.len());
}

#[test]
fn example_a_restricted_solve_closed_form() {
    let inst = paper_a().instance;
    // x = (1,0,0) and only y1 free: both residual rows are y1 - b_i.
    let pair = SupportPair { s1: vec![0], s2: vec![0] };
    let (p, f) = solve_restricted(&inst, &pair, &OracleConfig::default()).unwrap();
    assert_eq!(p.x(), &[1.0, 0.0, 0.0]);
    assert!((p.y()[0] - 2.5).abs() <= 1e-12);
    assert!((f - 6.25).abs() <= 1e-12);
}

#[test]
fn example_a_multistart_reaches_oracle_value() {
    let inst = paper_a().instance;
    let oracle = global_brute(&inst, &OracleConfig::default()).unwrap();
    assert!(oracle.certified);
    let best = multistart(&inst, &SolveConfig { n_starts: 20, seed: 7, ..SolveConfig::default() }).unwrap();
    assert!(best.best.f <= oracle.f + 1e-8, "multistart {} vs oracle {}", best.best.f, oracle.f);
}
