use tabula::seed::stream_rng;
use tabula::sql::random::{random_query, random_store, RandomShape};
use tabula::sql::{execute, parse, reference_execute, serialize_result};

#[test]
fn five_hundred_random_queries_agree() {
    let mut mismatches = Vec::new();
    for i in 0..500u64 {
        let mut rng = stream_rng(2024, "differential", i);
        let store = random_store(&mut rng, RandomShape::default());
        let q = random_query(&mut rng, &store);
        let fast = execute(&q, &store).unwrap_or_else(|e| panic!("query {i} `{q}`: {e}"));
        let slow = reference_execute(&q, &store).unwrap();
        if !fast.same_as(&slow) {
            mismatches.push(format!("{i}: {q}\n{}\nvs\n{}", serialize_result(&fast), serialize_result(&slow)));
        }
        let reparsed = parse(&q.to_string()).unwrap_or_else(|e| panic!("query {i} `{q}`: {e}"));
        assert_eq!(reparsed, q, "round trip of `{q}`");
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n\n"));
}
