//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use tabula::filter::{decide, filter_stream, CoinSolver, Decision, FilterTask, OracleSolver, WrongSolver};
use tabula::info::{
    analytic_lag_profile, dominance_ratio, effective_distance, empirical_lag_profile, ColumnModel,
    DependencySource, EmpiricalOptions, PowerLawModel,
};
use tabula::seed::{rng_from_seed, stream_rng};
use tabula::sql::ast::SelectQuery;
use tabula::sql::random::{random_query, random_store, RandomShape};
use tabula::sql::{execute, involved_cells, parse, reference_execute, serialize_result, Store};
use tabula::synth::{
    build_instance, demo_corpus, plan_instance, Corpus, DimensionMix, InstancePlan, SynthConfig, SynthError,
    TableCountRange, TaskDimension, TaskInstance,
};
use tabula::table::{
    default_word_pool, generate_no_semantic, load_table_file, render, RenderOptions, RenderVariant, Table,
};

const PEAK_TOLERANCE: f64 = 1e-12;
const PEAK_RUNTIME: Duration = Duration::from_secs(10);
const EMPIRICAL_TOLERANCE: f64 = 0.02;
const EMPIRICAL_MIN_PAIRS: u64 = 100_000;
const EMPIRICAL_RUNTIME: Duration = Duration::from_secs(60);
const VARIANCE_TOLERANCE: f64 = 1e-12;
const SIGMAS: f64 = 3.0;

const MODEL_SEED: u64 = 1;
const ROWS: usize = 200;
const COLS: usize = 5;

fn model() -> ColumnModel {
    ColumnModel::random(COLS, 8, &mut rng_from_seed(MODEL_SEED))
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn periodic_peaks() -> Check {
    let start = Instant::now();
    let model = model();
    ensure(model.satisfies_distinctiveness(), || "model columns not pairwise distinct".into())?;
    ensure(model.alphabet_size() <= 16, || "alphabet above 16".into())?;
    let profile = analytic_lag_profile(&model, ROWS, (ROWS - 1) * COLS).map_err(|e| e.to_string())?;
    let i_same = model.i_same();
    let mut worst: f64 = 0.0;
    for k in 1..ROWS {
        let v = profile.value(k * COLS).ok_or(format!("lag {} missing", k * COLS))?;
        worst = worst.max((v - i_same).abs());
    }
    let elapsed = start.elapsed();
    ensure(worst <= PEAK_TOLERANCE, || format!("max deviation {worst:.3e}"))?;
    ensure(elapsed < PEAK_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "i_same {i_same:.12}, max |peak - i_same| {worst:.2e} over k in [1, 199], {elapsed:.2?}"
    ))
}

fn empirical_agreement() -> Check {
    let start = Instant::now();
    let model = model();
    let samples: Vec<_> = (0..200u64)
        .map(|i| model.sample_sequence(ROWS, &mut stream_rng(MODEL_SEED, "acceptance-sample", i)))
        .collect();
    let d_max = 600;
    let empirical = empirical_lag_profile(
        &samples,
        d_max,
        EmpiricalOptions {
            min_pairs: Some(EMPIRICAL_MIN_PAIRS),
        },
    )
    .map_err(|e| e.to_string())?;
    let analytic = analytic_lag_profile(&model, ROWS, d_max).map_err(|e| e.to_string())?;
    let mut reliable = 0;
    let mut worst: f64 = 0.0;
    for (e, a) in empirical.values().iter().zip(analytic.values()) {
        if e.reliable {
            ensure(e.pairs >= EMPIRICAL_MIN_PAIRS, || format!("lag {} reliable with {} pairs", e.lag, e.pairs))?;
            reliable += 1;
            worst = worst.max((e.value - a.value).abs());
        }
    }
    let elapsed = start.elapsed();
    ensure(reliable >= 100, || format!("only {reliable} reliable lags"))?;
    ensure(worst <= EMPIRICAL_TOLERANCE, || format!("max gap {worst:.4} nats"))?;
    ensure(elapsed < EMPIRICAL_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{reliable} reliable lags (>= 1e5 pairs), max gap {worst:.4} nats, {} flagged unreliable, {elapsed:.2?}",
        empirical.values().len() - reliable
    ))
}

fn variance_identity() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let mut rng = stream_rng(3, "variance-model", i);
        let m = 2 + (i % 7) as usize;
        let k = 2 + (i % 15) as usize;
        let model = ColumnModel::random(m, k, &mut rng);
        let r = model.same_column_joint();
        let q = model.mixture();
        let reported = model.cross_column_variance();
        for a in 0..model.alphabet_size() {
            let diag = r.get(a, a) - q.probs()[a].powi(2);
            // Population variance over columns, two-pass.
            let col: Vec<f64> = model.columns().iter().map(|c| c.probs()[a]).collect();
            let mean = col.iter().sum::<f64>() / m as f64;
            let var = col.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / m as f64;
            worst = worst.max((diag - var).abs()).max((reported.per_symbol[a] - var).abs());
        }
    }
    ensure(worst <= VARIANCE_TOLERANCE, || format!("max deviation {worst:.3e}"))?;
    Ok(format!(
        "200 models, R(a,a) - Q(a)^2 = Var_j P_j(a) to {worst:.2e} (no 1/m factor)"
    ))
}

fn dichotomy() -> Check {
    let model = model();
    let i_same = model.i_same();
    let tau = i_same / 2.0;
    let profile = analytic_lag_profile(&model, ROWS, (ROWS - 1) * COLS).map_err(|e| e.to_string())?;
    let table = effective_distance(DependencySource::Table { profile: &profile, i_same }, tau)
        .map_err(|e| e.to_string())?;
    ensure(table.finite_supremum == Some(995), || format!("table supremum {:?}", table.finite_supremum))?;
    ensure(table.unbounded_asymptotic, || "table not flagged unbounded".into())?;

    let text = PowerLawModel::new(1.0, 0.5).map_err(|e| e.to_string())?;
    let report = effective_distance(DependencySource::Text(&text), tau).map_err(|e| e.to_string())?;
    let formula = (1.0 / tau).powf(2.0).floor() as u64;
    let mut scan = 0u64;
    while text.text_mi((scan + 1) as f64).map_err(|e| e.to_string())? >= tau {
        scan += 1;
    }
    let got = report.finite_supremum.ok_or("text supremum missing")?;
    ensure(!report.unbounded_asymptotic, || "text flagged unbounded".into())?;
    ensure(got.abs_diff(scan) <= 1 && got.abs_diff(formula) <= 1, || {
        format!("text d* {got}, scan {scan}, formula {formula}")
    })?;
    Ok(format!(
        "tau {tau:.6}: table sup 995 and unbounded, text d* {got} (scan {scan}, formula {formula})"
    ))
}

fn dominance() -> Check {
    let model = ColumnModel::disjoint_point_masses(COLS);
    let text = PowerLawModel::new(1.0, 0.5).map_err(|e| e.to_string())?;
    let ratio = |k: u64| dominance_ratio(&model, &text, k).map_err(|e| e.to_string());
    let mut prev = ratio(1)?;
    for k in 2..ROWS as u64 {
        let r = ratio(k)?;
        ensure(r > prev, || format!("not increasing at k = {k}"))?;
        prev = r;
    }
    let at_199 = prev;
    // The ratio grows like sqrt(k); find where it first clears 100.
    let mut k = 1;
    while ratio(k)? <= 100.0 {
        k += 1;
        ensure(k < 1_000_000, || "ratio never exceeds 100".into())?;
    }
    Ok(format!(
        "strictly increasing on [1, 199] (ratio at 199 = {at_199:.2}); exceeds 100 from k = {k} (lag {}, needs n >= {})",
        k * COLS as u64,
        k + 1
    ))
}

fn sql_differential() -> Check {
    let (mut agree, mut round_trip) = (0, 0);
    for i in 0..500u64 {
        let mut rng = stream_rng(2024, "differential", i);
        let store = random_store(&mut rng, RandomShape::default());
        let q = random_query(&mut rng, &store);
        let fast = execute(&q, &store).map_err(|e| format!("query {i}: {e}"))?;
        let slow = reference_execute(&q, &store).map_err(|e| format!("query {i}: {e}"))?;
        agree += usize::from(fast.same_as(&slow));
        round_trip += usize::from(parse(&q.to_string()).as_ref() == Ok(&q));
    }
    ensure(agree == 500 && round_trip == 500, || {
        format!("agreement {agree}/500, round trip {round_trip}/500")
    })?;
    Ok("500/500 evaluator agreement, 500/500 print/parse round trip".into())
}

fn fixture_reproduction() -> Check {
    let dir = fixtures();
    let multi = load_table_file(&dir.join("multi_hop.md")).map_err(|e| e.to_string())?;
    let retrieval = load_table_file(&dir.join("precise_retrieval.md")).map_err(|e| e.to_string())?;
    let store = Store::from_tables([&multi, &retrieval]).map_err(|e| e.to_string())?;
    let run = |sql: &str| -> Result<String, String> {
        let q = parse(sql).map_err(|e| e.to_string())?;
        let fast = execute(&q, &store).map_err(|e| e.to_string())?;
        let slow = reference_execute(&q, &store).map_err(|e| e.to_string())?;
        ensure(fast.same_as(&slow), || format!("evaluators disagree on {sql}"))?;
        Ok(serialize_result(&fast))
    };
    let multi_sql = "SELECT Venue, AVG(Attendance) AS avg_attendance FROM multi_hop GROUP BY Venue HAVING AVG(Attendance) > 13000";
    let multi_block = "| Venue | avg_attendance |\n| --- | --- |\n| Malmö Stadion | 15976.0 |\n| Olympia | 13385.0 |\n| Råsunda | 25983.2 |";
    let retrieval_sql = "SELECT * FROM precise_retrieval WHERE Opponent = 'Houston Oilers'";
    let retrieval_block = "| Week | Date | Opponent | Location | Time ( ET ) | Result | Record |\n\
                           | --- | --- | --- | --- | --- | --- | --- |\n\
                           | 13 | Sun. Dec. 3 | Houston Oilers | Three Rivers Stadium | 1:00pm | L 23–16 | 6–7 |";
    ensure(run(multi_sql)? == multi_block, || "multi-hop answer block differs".into())?;
    ensure(run(retrieval_sql)? == retrieval_block, || "retrieval answer block differs".into())?;

    // The generator reaches the multi-hop query on its own.
    let corpus = Corpus::new(vec![multi, retrieval]).map_err(|e| e.to_string())?;
    let mut config = SynthConfig::default();
    config.difficulty.table_count = TableCountRange { min: 1, max: 1 };
    let inst = build_instance(TaskDimension::MultiHop, &config, &corpus, 111).map_err(|e| e.to_string())?;
    ensure(inst.sql == multi_sql && inst.answer == multi_block, || {
        format!("generated `{}`", inst.sql)
    })?;
    Ok("both answer blocks byte-exact; generator seed 111 yields the multi-hop query".into())
}

fn pipeline_config() -> SynthConfig {
    SynthConfig {
        variants: RenderVariant::ALL.to_vec(),
        noise_rate: 0.1,
        ..SynthConfig::default()
    }
}

type Built = (InstancePlan, Result<TaskInstance, SynthError>);

/// Plans are independent, so build them on all cores and keep index order.
fn run_pipeline(config: &SynthConfig, corpus: &Corpus, root: u64, count: u64) -> Vec<Built> {
    let mix = DimensionMix::default();
    let plans: Vec<_> = (0..count).map(|i| plan_instance(root, i, &mix, &config.variants)).collect();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = plans.len().div_ceil(jobs).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = plans
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|p| (*p, p.build(config, corpus))).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

fn dimension_ok(d: TaskDimension, q: &SelectQuery) -> bool {
    match d {
        TaskDimension::PreciseRetrieval => q.selection.is_some() && !q.has_aggregate(),
        TaskDimension::MultiHop => q.has_aggregate(),
        TaskDimension::Grounding => !q.joins.is_empty(),
    }
}

fn export_bytes(built: &[Built]) -> String {
    built
        .iter()
        .map(|(plan, r)| match r {
            Ok(inst) => tabula::cli::ExportRecord::from(inst).to_line(),
            Err(e) => format!("{} error {e}", plan.index),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn pipeline_soundness(built: &[Built], config: &SynthConfig, corpus: &Corpus) -> Check {
    let mut problems = Vec::new();
    let (mut flagged, mut ok) = (0, 0);
    for (plan, res) in built {
        let inst = match res {
            Ok(i) => i,
            Err(e) => {
                problems.push(format!("{}: {e}", plan.index));
                continue;
            }
        };
        let mut bad = |m: String| problems.push(format!("{}: {m}", inst.id));
        let Ok(q) = parse(&inst.sql) else {
            bad("SQL does not parse".into());
            continue;
        };
        let store = match Store::from_tables(&inst.tables) {
            Ok(s) => s,
            Err(e) => {
                bad(e.to_string());
                continue;
            }
        };
        match execute(&q, &store) {
            Ok(r) if serialize_result(&r) == inst.answer => {}
            _ => bad("re-execution differs".into()),
        }
        if involved_cells(&q, &store).ok() != Some(inst.meta.involved_cells) {
            bad("involved cells differ".into());
        }
        if !config.difficulty.cell_bucket.contains(inst.meta.involved_cells) {
            bad(format!("{} cells outside the bucket", inst.meta.involved_cells));
        }
        let tokens = inst.context.split_whitespace().count();
        let (lo, hi) = config.difficulty.token_bounds();
        if tokens != inst.meta.token_length || inst.tables.len() != inst.meta.table_count {
            bad("recorded length or table count differs".into());
        }
        if inst.meta.under_budget {
            flagged += 1;
        } else if !(lo..=hi).contains(&tokens) || !config.difficulty.table_count.contains(inst.tables.len()) {
            bad(format!("{tokens} tokens outside [{lo}, {hi}] and not flagged"));
        }
        if !dimension_ok(inst.meta.dimension, &q) {
            bad(format!("{} AST shape wrong", inst.meta.dimension));
        }
        ok += 1;
    }
    let rerun = run_pipeline(config, corpus, 7, built.len() as u64);
    let identical = export_bytes(&rerun) == export_bytes(built);
    ensure(problems.is_empty(), || format!("{} problems, first: {}", problems.len(), problems[0]))?;
    ensure(identical, || "re-run differs".into())?;
    Ok(format!(
        "{ok}/{} instances consistent, {flagged} under budget (flagged), re-run byte-identical",
        built.len()
    ))
}

fn filter_rule(built: &[Built]) -> Check {
    let tasks: Vec<FilterTask> = built
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok())
        .map(|i| FilterTask::new(&i.id, &i.context, &i.question, &i.sql, &i.answer))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let t = tasks.len();
    let oracle = filter_stream(&tasks, &OracleSolver, 8, 7).map_err(|e| e.to_string())?;
    ensure(oracle.count(Decision::DiscardTrivial) == t, || "oracle not all trivial".into())?;
    let wrong = filter_stream(&tasks, &WrongSolver, 8, 7).map_err(|e| e.to_string())?;
    ensure(wrong.count(Decision::DiscardNoise) == t, || "wrong solver not all noise".into())?;

    let coin = filter_stream(&tasks, &CoinSolver::default(), 8, 7).map_err(|e| e.to_string())?;
    let p = 1.0 - 2.0 * 0.5f64.powi(8);
    let frac = coin.retained.len() as f64 / t as f64;
    let sigma = (p * (1.0 - p) / t as f64).sqrt();
    ensure((frac - p).abs() <= SIGMAS * sigma, || {
        format!("coin retained {frac:.5}, expected {p} ± {:.5}", SIGMAS * sigma)
    })?;

    let mut vectors = 0;
    for n in 1..=6u32 {
        for bits in 0..(1u32 << n) {
            let v: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
            let expected = match bits.count_ones() {
                0 => Decision::DiscardNoise,
                c if c == n => Decision::DiscardTrivial,
                _ => Decision::Retain,
            };
            ensure(decide(&v) == expected, || format!("decide({v:?}) = {:?}", decide(&v)))?;
            vectors += 1;
        }
    }
    Ok(format!(
        "{t} tasks: oracle all trivial, wrong all noise, coin retained {frac:.4} vs {p} ± {:.4}; {vectors} verdict vectors checked",
        SIGMAS * sigma
    ))
}

fn render_variants() -> Check {
    let corpus = demo_corpus(21, 60);
    for t in corpus.tables() {
        let plain = render(std::slice::from_ref(t), &RenderOptions::new(RenderVariant::NoDelimiter))
            .map_err(|e| e.to_string())?;
        let zero = render(
            std::slice::from_ref(t),
            &RenderOptions::noise(0.0, vec!["x".into()], 9),
        )
        .map_err(|e| e.to_string())?;
        ensure(plain.text == zero.text, || format!("{}: noise_rate 0 differs", t.name()))?;
    }

    // 143 x 7 = 1001 data cells, so 1000 boundaries between them.
    let headers: Vec<String> = (0..7).map(|j| format!("c{j}")).collect();
    let rows: Vec<Vec<String>> = (0..143).map(|i| (0..7).map(|j| format!("v{i}_{j}")).collect()).collect();
    let table = Table::new("noise", headers, rows).map_err(|e| e.to_string())?;
    let rate = 0.3;
    let snippet = "NOISE_SNIPPET".to_string();
    let rendered = render(
        std::slice::from_ref(&table),
        &RenderOptions::noise(rate, vec![snippet.clone()], 2024),
    )
    .map_err(|e| e.to_string())?;
    let b = rendered.noise_boundaries as f64;
    ensure(rendered.noise_boundaries == 1000, || format!("only {b} boundaries"))?;
    let counted = rendered.text.matches(&snippet).count();
    ensure(counted == rendered.noise_inserts, || "reported insert count differs from the text".into())?;
    let mean = rate * b;
    let sd = (b * rate * (1.0 - rate)).sqrt();
    ensure((counted as f64 - mean).abs() <= SIGMAS * sd, || {
        format!("{counted} inserts, expected {mean} ± {:.1}", SIGMAS * sd)
    })?;

    let pool = default_word_pool();
    for i in 0..500u64 {
        let n = 2 + (i % 19) as usize;
        let m = 2 + (i % 7) as usize;
        let task = generate_no_semantic(n, m, &pool, i).map_err(|e| e.to_string())?;
        let t = &task.table;
        let rows: Vec<_> = t.rows().iter().filter(|r| r[0] == task.row_name).collect();
        let cols: Vec<_> = (0..t.n_cols()).filter(|&j| t.headers()[j] == task.column_name).collect();
        ensure(rows.len() == 1 && cols.len() == 1 && cols[0] > 0, || format!("table {i}: lookup not unique"))?;
        ensure(rows[0][cols[0]] == task.answer, || format!("table {i}: answer differs from the cell"))?;
        ensure(
            task.question.contains(&format!("\"{}\"", task.row_name))
                && task.question.contains(&format!("\"{}\"", task.column_name)),
            || format!("table {i}: question does not name the cell"),
        )?;
    }
    Ok(format!(
        "noise 0 = no-delimiter on 60 tables; {counted} inserts over {b} boundaries (expected {mean} ± {:.1}); 500 no-semantic lookups consistent",
        SIGMAS * sd
    ))
}

fn main() {
    let mut results: Vec<(u32, &str, Check)> = Vec::new();
    let guard = |f: &dyn Fn() -> Check| -> Check {
        catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        })
    };
    results.push((1, "periodic peaks", guard(&periodic_peaks)));
    results.push((2, "empirical vs analytic MI", guard(&empirical_agreement)));
    results.push((3, "diagonal variance identity", guard(&variance_identity)));
    results.push((4, "effective-distance dichotomy", guard(&dichotomy)));
    results.push((5, "dominance ratio", guard(&dominance)));
    results.push((6, "SQL differential", guard(&sql_differential)));
    results.push((7, "fixture reproduction", guard(&fixture_reproduction)));

    let config = pipeline_config();
    let corpus = demo_corpus(1, 150);
    let built = run_pipeline(&config, &corpus, 7, 1000);
    results.push((8, "pipeline soundness", guard(&|| pipeline_soundness(&built, &config, &corpus))));
    results.push((9, "filter rule", guard(&|| filter_rule(&built))));
    results.push((10, "render variants", guard(&render_variants)));

    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
