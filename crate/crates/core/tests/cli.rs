use std::path::{Path, PathBuf};

use tabula::cli::{read_export, run};
use tabula::synth::TaskDimension;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn tabula(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("tabula").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn version_and_usage_errors() {
    let (code, out, _) = tabula(&["--version"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("tabula 0.1.0"));
    assert_eq!(tabula(&["nope"]).0, 1);
    assert_eq!(tabula(&["synthesize", "--count", "x"]).0, 1);
}

#[test]
fn ingest_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.toml");
    let (code, out, _) = tabula(&["ingest", p(&fixtures()), "-m", p(&manifest), "--json"]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(stats["tables"], 2);

    let m = tabula::synth::Manifest::load(&manifest).unwrap();
    let names: Vec<_> = m.tables.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["multi_hop", "precise_retrieval"]);

    // Recount density from the loaded tables.
    let corpus = tabula::synth::Corpus::from_manifest(&manifest).unwrap();
    let (mut cells, mut tokens) = (0usize, 0usize);
    for t in corpus.tables() {
        for c in t.rows().iter().flatten() {
            cells += 1;
            tokens += c.split_whitespace().count();
        }
    }
    let density = stats["tokens_per_cell"].as_f64().unwrap();
    assert!((density - tokens as f64 / cells as f64).abs() < 1e-12);
}

#[test]
fn ingest_reports_engineered_density() {
    // 10 cells: 4 of five tokens and 6 of five plus one extra on two -> 52 tokens.
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("a,b\n");
    let five = "w w w w w";
    let six = "w w w w w w";
    for row in 0..5 {
        let b = if row < 2 { six } else { five };
        csv.push_str(&format!("{five},{b}\n"));
    }
    std::fs::write(dir.path().join("t.csv"), csv).unwrap();
    let manifest = dir.path().join("m.toml");
    let (code, out, _) = tabula(&["ingest", p(dir.path()), "-m", p(&manifest), "--json"]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(&out).unwrap();
    let density = stats["tokens_per_cell"].as_f64().unwrap();
    assert!((density - 5.2).abs() <= 0.05, "{density}");
}

#[test]
fn ingest_empty_and_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.toml");
    assert_eq!(tabula(&["ingest", p(dir.path()), "-m", p(&manifest)]).0, 2);
    assert!(!manifest.exists());

    std::fs::write(dir.path().join("bad.md"), "no table here\n").unwrap();
    std::fs::write(dir.path().join("ok.csv"), "x,y\n1,2\n").unwrap();
    let (code, _, err) = tabula(&["ingest", p(dir.path()), "-m", p(&manifest)]);
    assert_eq!(code, 0);
    assert!(err.contains("bad.md"), "{err}");
}

fn demo(dir: &Path) -> PathBuf {
    let corpus = dir.join("corpus");
    assert_eq!(tabula(&["demo-corpus", "-o", p(&corpus), "--count", "90", "--seed", "4"]).0, 0);
    corpus.join("manifest.toml")
}

#[test]
fn synthesize_mix_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo(dir.path());
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let (code, report, err) = tabula(&[
            "synthesize",
            "--manifest",
            p(&manifest),
            "--count",
            "100",
            "--seed",
            "11",
            "--weights",
            "1,1,1",
            "-o",
            p(out),
        ]);
        assert_eq!(code, 0, "{err}");
        assert!(report.contains("built 100/100"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let file = read_export(&text).unwrap();
    assert_eq!(file.records.len(), 100);
    assert_eq!(file.summary.unwrap().built, 100);
    for d in TaskDimension::ALL {
        let n = file.records.iter().filter(|r| r.meta.dimension == d).count();
        assert!(n >= 20, "{d}: {n}");
    }
}

#[test]
fn synthesize_large_budget_lengths() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.jsonl");
    let (code, _, err) = tabula(&[
        "synthesize",
        "--demo-corpus",
        "200",
        "--count",
        "12",
        "--seed",
        "3",
        "--budget",
        "16384",
        "-o",
        p(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let file = read_export(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for r in &file.records {
        let recount = r.context.split_whitespace().count();
        assert_eq!(recount, r.meta.token_length);
        assert!((14746..=18022).contains(&recount) || r.meta.under_budget, "{recount}");
    }
}

#[test]
fn synthesize_config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = demo(dir.path());
    let config = dir.path().join("pipeline.toml");
    std::fs::write(
        &config,
        format!(
            "seed = 5\ncount = 4\n[corpus]\nmanifests = [{:?}]\n[output]\nexport = \"out/x.jsonl\"\n",
            p(&manifest)
        ),
    )
    .unwrap();
    assert_eq!(tabula(&["synthesize", "-c", p(&config), "--count", "6"]).0, 0);
    let text = std::fs::read_to_string(dir.path().join("out/x.jsonl")).unwrap();
    let file = read_export(&text).unwrap();
    assert_eq!(file.records.len(), 6);
    assert_eq!(file.summary.unwrap().seed, 5);

    std::fs::write(&config, "[mix]\nprecise_retrieval = 0\nmulti_hop = 0\ngrounding = 0\n").unwrap();
    assert_eq!(tabula(&["synthesize", "-c", p(&config), "--demo-corpus", "10"]).0, 1);
}

#[test]
fn filter_stubs() {
    let dir = tempfile::tempdir().unwrap();
    let export = dir.path().join("e.jsonl");
    assert_eq!(
        tabula(&["synthesize", "--demo-corpus", "60", "--count", "20", "--seed", "2", "-o", p(&export)]).0,
        0
    );
    let retained = dir.path().join("r.jsonl");
    let audit = dir.path().join("a.jsonl");
    for (solver, line) in [("oracle", "discard-trivial: 20"), ("wrong", "discard-noise: 20")] {
        let (code, out, _) = tabula(&[
            "filter",
            "-i",
            p(&export),
            "--solver",
            solver,
            "--retained",
            p(&retained),
            "--audit",
            p(&audit),
        ]);
        assert_eq!(code, 0);
        assert!(out.contains("retain: 0") && out.contains(line), "{out}");
        assert_eq!(std::fs::read_to_string(&retained).unwrap(), "");
        let audit_text = std::fs::read_to_string(&audit).unwrap();
        assert_eq!(audit_text.lines().count(), 20);
        let first: serde_json::Value = serde_json::from_str(audit_text.lines().next().unwrap()).unwrap();
        assert_eq!(first["N"], 8);
        assert_eq!(first["deterministic"], true);
    }
    assert_eq!(tabula(&["filter", "-i", p(&export)]).0, 1);
    assert_eq!(tabula(&["filter", "-i", p(&export), "--solver", "psychic"]).0, 1);
    let (code, _, err) = tabula(&[
        "filter",
        "-i",
        p(&export),
        "--solver-cmd",
        "/nonexistent/solver",
        "-n",
        "2",
    ]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn mi_analyze_reports() {
    let (code, out, _) = tabula(&["mi-analyze", "--mode", "analytic", "--random-model", "5,8,1", "--json"]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    let i_same = r["i_same"].as_f64().unwrap();
    let peaks = r["peaks"].as_array().unwrap();
    assert_eq!(peaks.len(), 199);
    for pk in peaks {
        assert!((pk["value"].as_f64().unwrap() - i_same).abs() <= 1e-12);
    }
    assert_eq!(r["table"]["finite_supremum"], 995);
    assert_eq!(r["table"]["unbounded_asymptotic"], true);

    let tau = format!("{}", i_same * 1.5);
    let (_, out, _) = tabula(&["mi-analyze", "--mode", "analytic", "--random-model", "5,8,1", "--tau", &tau, "--json"]);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["table"]["unbounded_asymptotic"], false);

    let (_, out, _) = tabula(&["mi-analyze", "--mode", "analytic", "--disjoint", "5", "--tau", "0.1"]);
    assert!(out.contains("d* = 100"), "{out}");

    assert_eq!(tabula(&["mi-analyze", "--mode", "analytic"]).0, 1);
}

#[test]
fn mi_analyze_empirical_flags_unreliable_lags() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("lags.csv");
    let (code, out, _) = tabula(&[
        "mi-analyze",
        "--mode",
        "empirical",
        "--random-model",
        "3,4,2",
        "--rows",
        "20",
        "--draws",
        "10",
        "--csv",
        p(&csv),
        "--json",
    ]);
    assert_eq!(code, 0);
    let r: serde_json::Value = serde_json::from_str(&out).unwrap();
    let unreliable = r["unreliable_lags"].as_array().unwrap().len();
    assert!(unreliable > 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    // Every lag is present: unreliable ones are flagged, not dropped.
    assert_eq!(text.lines().count(), 1 + r["d_max"].as_u64().unwrap() as usize);
    assert_eq!(text.lines().filter(|l| l.ends_with(",false")).count(), unreliable);
}

#[test]
fn sql_fixture_and_errors() {
    let store = fixtures();
    let q = "SELECT Venue, AVG(Attendance) AS avg_attendance FROM multi_hop GROUP BY Venue HAVING AVG(Attendance) > 13000";
    let (code, out, _) = tabula(&["sql", "-s", p(&store), "--oracle", q]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "| Venue | avg_attendance |\n| --- | --- |\n| Malmö Stadion | 15976.0 |\n| Olympia | 13385.0 |\n| Råsunda | 25983.2 |\nAGREE\n"
    );
    let (code, _, err) = tabula(&["sql", "-s", p(&store), "SELECT FROM multi_hop"]);
    assert_eq!(code, 2);
    assert!(err.contains("byte 7") && err.contains('^'), "{err}");
    let (code, out, _) = tabula(&["sql", "--explain", "SELECT * FROM t"]);
    assert_eq!(code, 0);
    assert!(serde_json::from_str::<serde_json::Value>(&out).is_ok());
}
