//! Differential testing: random relations and queries through the hash-join
//! evaluator and the cross-product reference, plus a print/parse round trip.
//!
//! cargo run --release --example differential -- [queries] [seed]

use tabula::seed::stream_rng;
use tabula::sql::random::{random_query, random_store, RandomShape};
use tabula::sql::{execute, parse, reference_execute};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let count = args.next().flatten().unwrap_or(2000);
    let seed = args.next().flatten().unwrap_or(2024);
    let (mut agree, mut round_trip, mut joins, mut grouped) = (0, 0, 0, 0);
    for i in 0..count {
        let mut rng = stream_rng(seed, "differential", i);
        let store = random_store(&mut rng, RandomShape::default());
        let q = random_query(&mut rng, &store);
        joins += usize::from(!q.joins.is_empty());
        grouped += usize::from(!q.group_by.is_empty());
        let fast = execute(&q, &store).unwrap();
        let slow = reference_execute(&q, &store).unwrap();
        if fast.same_as(&slow) {
            agree += 1;
        } else {
            println!("mismatch on query {i}: {q}");
        }
        round_trip += usize::from(parse(&q.to_string()).as_ref() == Ok(&q));
    }
    println!("{count} queries ({joins} with joins, {grouped} grouped)");
    println!("agreement {agree}/{count}, round trip {round_trip}/{count}");
}
