//! Lookup tables of unrelated words: the answer depends only on position,
//! so the task probes retrieval without semantic shortcuts.
//!
//! cargo run --example no_semantic -- [rows] [cols] [seed]

use tabula::sql::{execute, parse, serialize_result, Store};
use tabula::table::{default_word_pool, generate_no_semantic, render, RenderOptions};

fn main() {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<u64>().ok());
    let n = args.next().flatten().unwrap_or(6) as usize;
    let m = args.next().flatten().unwrap_or(4) as usize;
    let seed = args.next().flatten().unwrap_or(3);
    let task = generate_no_semantic(n, m, &default_word_pool(), seed).unwrap();
    println!("{}\n", render(std::slice::from_ref(&task.table), &RenderOptions::default()).unwrap().text);
    println!("{}\n", task.question);
    println!("answer: {}", task.answer);

    let sql = format!(
        "SELECT \"{}\" FROM \"{}\" WHERE \"#\" = '{}'",
        task.column_name,
        task.table.name(),
        task.row_name.replace('\'', "''")
    );
    let store = Store::from_tables([&task.table]).unwrap();
    let result = execute(&parse(&sql).unwrap(), &store).unwrap();
    println!("{sql}\n{}", serialize_result(&result));
}
