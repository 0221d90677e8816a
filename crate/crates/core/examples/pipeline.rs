//! The whole pipeline through the command-line entry point: demo corpus,
//! ingest, synthesize, filter. Writes into a temporary directory.
//!
//! cargo run --release --example pipeline -- [count]

fn tabula(args: &[&str]) -> i32 {
    let argv = std::iter::once("tabula").chain(args.iter().copied());
    tabula::cli::run(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

fn main() {
    let count = std::env::args().nth(1).unwrap_or_else(|| "50".into());
    let dir = std::env::temp_dir().join(format!("tabula-pipeline-{}", std::process::id()));
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();

    println!("$ tabula demo-corpus");
    assert_eq!(tabula(&["demo-corpus", "-o", &p("corpus"), "--count", "120", "--seed", "1"]), 0);
    println!("\n$ tabula ingest");
    assert_eq!(tabula(&["ingest", &p("corpus"), "-m", &p("manifest.toml")]), 0);
    println!("\n$ tabula synthesize");
    let code = tabula(&[
        "synthesize", "--manifest", &p("manifest.toml"), "--count", &count, "--seed", "7",
        "--variant", "canonical-markdown", "--variant", "noise-injected", "-o", &p("export.jsonl"),
    ]);
    assert!(code == 0 || code == 2);
    println!("\n$ tabula filter --solver coin");
    assert_eq!(
        tabula(&[
            "filter", "-i", &p("export.jsonl"), "--solver", "coin",
            "--retained", &p("retained.jsonl"), "--audit", &p("audit.jsonl"),
        ]),
        0
    );
    println!("\noutputs in {}", dir.display());
}
