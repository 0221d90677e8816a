//! Run the two reference queries over the bundled fixture tables with both
//! evaluators.
//!
//! cargo run --example sql_fixtures

use std::path::PathBuf;

use tabula::sql::{cross_check, involved_cells, parse, serialize_result, Store};

fn main() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let store = Store::load_dir(&dir).unwrap();
    for sql in [
        "SELECT Venue, AVG(Attendance) AS avg_attendance FROM multi_hop GROUP BY Venue HAVING AVG(Attendance) > 13000",
        "SELECT * FROM precise_retrieval WHERE Opponent = 'Houston Oilers'",
        "SELECT Venue, COUNT(*) AS games FROM multi_hop GROUP BY Venue ORDER BY games DESC LIMIT 2",
    ] {
        let q = parse(sql).unwrap();
        let (result, agree) = cross_check(&q, &store).unwrap();
        println!("{q}");
        println!("{}", serialize_result(&result));
        println!("evaluators agree: {agree}, involved cells: {}\n", involved_cells(&q, &store).unwrap());
    }
    match parse("SELECT Venue FROM multi_hop WHERE Attendance >") {
        Err(e) => println!("malformed query: {e}"),
        Ok(q) => println!("unexpectedly parsed {q}"),
    }
}
