//! `synthesize` and `filter`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::export::{read_export, ExportRecord, HistogramEntry, RunSummary};
use super::{CliError, ExitStatus, FilterArgs, PipelineConfig, SynthesizeArgs};
use crate::external::ExternalCommand;
use crate::filter::{builtin_solver, filter_stream, resolve_timeout, CommandSolver, Decision, FilterTask, SolverAdapter};
use crate::synth::{
    demo_corpus, plan_instance, CellBucket, Corpus, DimensionMix, SynthError, TableCountRange, TaskInstance,
};
use crate::table::RenderVariant;

fn parse_weights(s: &str) -> Result<DimensionMix, CliError> {
    let w: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("--weights {s:?}: expected three numbers")))?;
    match w[..] {
        [precise_retrieval, multi_hop, grounding] => Ok(DimensionMix {
            precise_retrieval,
            multi_hop,
            grounding,
        }),
        _ => Err(CliError::Usage(format!("--weights {s:?}: expected three numbers"))),
    }
}

fn parse_bucket(s: &str) -> Result<CellBucket, CliError> {
    toml::Value::String(s.to_string())
        .try_into()
        .map_err(|_| CliError::Usage(format!("unknown bucket {s:?} (small, medium, large)")))
}

/// Config file first, then flags on top.
fn synth_settings(args: &SynthesizeArgs) -> Result<PipelineConfig, CliError> {
    let mut c = PipelineConfig::load_or_default(args.config.as_deref())?;
    if !args.manifests.is_empty() {
        c.corpus.manifests = args.manifests.clone();
    }
    if let Some(n) = args.demo_corpus {
        c.corpus.manifests.clear();
        c.corpus.demo = Some(super::config::DemoConfig {
            count: n,
            seed: c.corpus.demo.map_or(0, |d| d.seed),
        });
    }
    if let Some(v) = args.count {
        c.count = v;
    }
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(p) = &args.out {
        c.output.export = (p.as_os_str() != "-").then(|| p.clone());
    }
    if let Some(w) = &args.weights {
        c.mix = parse_weights(w)?;
    }
    if let Some(b) = &args.bucket {
        c.difficulty.cell_bucket = parse_bucket(b)?;
    }
    if let Some(b) = args.budget {
        c.difficulty.target_tokens = b;
    }
    let TableCountRange { min, max } = c.difficulty.table_count;
    c.difficulty.table_count = TableCountRange {
        min: args.min_tables.unwrap_or(min),
        max: args.max_tables.unwrap_or(max),
    };
    if !args.variants.is_empty() {
        c.render.variants = args
            .variants
            .iter()
            .map(|v| RenderVariant::parse(v).ok_or_else(|| CliError::Usage(format!("unknown render variant {v:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(r) = args.noise_rate {
        c.render.noise_rate = r;
    }
    if let Some(r) = &args.rewriter {
        c.rewriter = Some(r.clone());
    }
    c.validate()?;
    Ok(c)
}

fn load_corpus(c: &PipelineConfig) -> Result<Corpus, CliError> {
    if c.corpus.manifests.is_empty() {
        let Some(demo) = c.corpus.demo else {
            return Err(CliError::Usage(
                "no corpus: pass --manifest, --demo-corpus or set [corpus] in the config".into(),
            ));
        };
        if demo.count == 0 {
            return Err(CliError::Usage("demo corpus count must be at least 1".into()));
        }
        return Ok(demo_corpus(demo.seed, demo.count));
    }
    let mut tables = Vec::new();
    for m in &c.corpus.manifests {
        tables.extend(Corpus::from_manifest(m)?.tables().iter().cloned());
    }
    Ok(Corpus::new(tables)?)
}

fn failure_kind(e: &SynthError) -> &'static str {
    match e {
        SynthError::Exhausted { .. } => "exhausted",
        SynthError::NoTemplate { .. } => "no-template",
        SynthError::Overflow { .. } => "overflow",
        SynthError::Command(_) => "command",
        _ => "other",
    }
}

/// Output sink: a file or the `out` stream.
enum Sink<'a> {
    File(BufWriter<File>, PathBuf),
    Stream(&'a mut dyn Write),
}

impl Sink<'_> {
    fn line(&mut self, line: &str) -> Result<(), CliError> {
        // One write per line, flushed, so a killed run leaves whole lines.
        let mut buf = String::with_capacity(line.len() + 1);
        buf.push_str(line);
        buf.push('\n');
        match self {
            Sink::File(w, p) => {
                w.write_all(buf.as_bytes()).and_then(|_| w.flush()).map_err(|e| CliError::io(p.display(), e))
            }
            Sink::Stream(w) => Ok(w.write_all(buf.as_bytes())?),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

type Built = (crate::synth::InstancePlan, Result<TaskInstance, SynthError>);

/// Build `count` planned instances on `jobs` threads, in index order.
fn build_batch(
    indexes: std::ops::Range<u64>,
    c: &PipelineConfig,
    synth: &crate::synth::SynthConfig,
    corpus: &Corpus,
    jobs: usize,
) -> Vec<Built> {
    let plans: Vec<_> = indexes
        .map(|i| plan_instance(c.seed, i, &c.mix, &synth.variants))
        .collect();
    let chunk = plans.len().div_ceil(jobs.max(1)).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = plans
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(|p| (*p, p.build(synth, corpus))).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("synthesis worker"))
            .collect()
    })
}

pub(super) fn synthesize(
    args: &SynthesizeArgs,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<ExitStatus, CliError> {
    let c = synth_settings(args)?;
    let synth = c.synth_config()?;
    let corpus = load_corpus(&c)?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    let to_file = c.output.export.is_some();
    let mut sink = match &c.output.export {
        Some(p) => Sink::File(create(p)?, p.clone()),
        None => Sink::Stream(&mut *out),
    };
    let mut summary = RunSummary {
        seed: c.seed,
        requested: c.count,
        corpus_digest: corpus.digest(),
        ..RunSummary::default()
    };
    let mut histogram: BTreeMap<(String, String, String), u64> = BTreeMap::new();
    let mut messages = Vec::new();
    let batch = (jobs as u64 * 8).max(1);
    let mut start = 0;
    while start < c.count {
        let end = (start + batch).min(c.count);
        for (plan, built) in build_batch(start..end, &c, &synth, &corpus, jobs) {
            match built {
                Ok(inst) => {
                    sink.line(&ExportRecord::from(&inst).to_line())?;
                    summary.built += 1;
                    summary.under_budget += u64::from(inst.meta.under_budget);
                    let bucket = inst.meta.cell_bucket.map_or("none", CellBucket::as_str);
                    *histogram
                        .entry((
                            inst.meta.dimension.to_string(),
                            bucket.to_string(),
                            inst.meta.render_variant.to_string(),
                        ))
                        .or_default() += 1;
                }
                Err(e) => {
                    summary.failed += 1;
                    *summary.failures.entry(failure_kind(&e).to_string()).or_default() += 1;
                    if let SynthError::Exhausted { histogram, .. } = &e {
                        for (k, v) in histogram {
                            *summary.retry_reasons.entry(k.clone()).or_default() += u64::from(*v);
                        }
                    }
                    messages.push(format!("instance {}: {e}", plan.index));
                }
            }
        }
        start = end;
    }
    summary.histogram = histogram
        .into_iter()
        .map(|((dimension, bucket, variant), count)| HistogramEntry {
            dimension,
            bucket,
            variant,
            count,
        })
        .collect();
    sink.line(&summary.to_line())?;
    drop(sink);

    for m in messages.iter().take(20) {
        writeln!(err, "{m}")?;
    }
    if messages.len() > 20 {
        writeln!(err, "... {} more failures", messages.len() - 20)?;
    }
    let report: &mut dyn Write = if to_file { out } else { err };
    writeln!(
        report,
        "built {}/{} ({} under budget, {} failed)",
        summary.built, summary.requested, summary.under_budget, summary.failed
    )?;
    for (kind, n) in &summary.failures {
        writeln!(report, "  failure {kind}: {n}")?;
    }
    writeln!(report, "{:<18} {:<7} {:<19} {:>6}", "dimension", "bucket", "variant", "count")?;
    for h in &summary.histogram {
        writeln!(report, "{:<18} {:<7} {:<19} {:>6}", h.dimension, h.bucket, h.variant, h.count)?;
    }
    Ok(if summary.failed > 0 {
        ExitStatus::Data
    } else {
        ExitStatus::Success
    })
}

fn filter_settings(args: &FilterArgs) -> Result<PipelineConfig, CliError> {
    let mut c = PipelineConfig::load_or_default(args.config.as_deref())?;
    if let Some(p) = &args.input {
        c.output.export = Some(p.clone());
    }
    if let Some(s) = &args.solver {
        c.filter.solver = Some(s.clone());
        c.filter.command = None;
    }
    if let Some(s) = &args.solver_cmd {
        c.filter.command = Some(s.clone());
        c.filter.solver = None;
    }
    if let Some(n) = args.attempts {
        c.filter.attempts = n;
    }
    if let Some(t) = args.timeout {
        c.filter.timeout_secs = Some(t);
    }
    if let Some(s) = args.seed {
        c.seed = s;
    }
    if let Some(p) = &args.retained {
        c.output.retained = Some(p.clone());
    }
    if let Some(p) = &args.audit {
        c.output.audit = Some(p.clone());
    }
    c.validate()?;
    Ok(c)
}

fn solver_for(c: &PipelineConfig, timeout_flag: Option<f64>) -> Result<Box<dyn SolverAdapter>, CliError> {
    match (&c.filter.solver, &c.filter.command) {
        (_, Some(cmd)) => {
            // Flag beats the environment, which beats the config file.
            let timeout = timeout_flag.unwrap_or_else(|| resolve_timeout(c.filter.timeout_secs));
            let command = ExternalCommand::from_line(cmd, timeout);
            if command.argv.is_empty() {
                return Err(CliError::Usage("empty solver command".into()));
            }
            Ok(Box::new(CommandSolver::new(command)))
        }
        (Some(name), None) => {
            builtin_solver(name).ok_or_else(|| CliError::Usage(format!("unknown solver {name:?} (oracle, wrong, coin)")))
        }
        (None, None) => Err(CliError::Usage("no solver: pass --solver or --solver-cmd".into())),
    }
}

pub(super) fn filter(args: &FilterArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let c = filter_settings(args)?;
    let solver = solver_for(&c, args.timeout)?;
    let input = c
        .output
        .export
        .clone()
        .ok_or_else(|| CliError::Usage("no input: pass --input or set output.export".into()))?;
    let text = std::fs::read_to_string(&input).map_err(|e| CliError::io(input.display(), e))?;
    let file = read_export(&text)?;
    for w in &file.warnings {
        writeln!(err, "warning: {w}")?;
    }
    let tasks = file
        .records
        .iter()
        .map(|r| FilterTask::new(&r.id, &r.context, &r.question, &r.sql, &r.answer))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Data(e.to_string()))?;
    let outcome = filter_stream(&tasks, solver.as_ref(), c.filter.attempts, c.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;

    if let Some(p) = &c.output.retained {
        let mut w = Sink::File(create(p)?, p.clone());
        for &i in &outcome.retained {
            w.line(&file.records[i].to_line())?;
        }
    }
    if let Some(p) = &c.output.audit {
        let mut w = Sink::File(create(p)?, p.clone());
        for r in &outcome.records {
            w.line(&serde_json::to_string(r).expect("record serializes"))?;
        }
    }
    let failures: u32 = outcome.records.iter().map(|r| r.solver_failures).sum();
    writeln!(out, "tasks: {}", outcome.records.len())?;
    for d in [Decision::Retain, Decision::DiscardNoise, Decision::DiscardTrivial] {
        writeln!(out, "{}: {}", d.as_str(), outcome.count(d))?;
    }
    writeln!(out, "solver failures: {failures}")?;
    let total = u64::from(c.filter.attempts) * outcome.records.len() as u64;
    if total > 0 && u64::from(failures) == total {
        if let Some(e) = outcome.records.iter().flat_map(|r| r.errors.first()).next() {
            return Err(CliError::External(format!("every solver attempt failed: {e}")));
        }
    }
    Ok(ExitStatus::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_and_buckets() {
        assert_eq!(parse_weights("1, 2,0").unwrap().weights(), [1.0, 2.0, 0.0]);
        assert!(parse_weights("1,2").is_err());
        assert!(parse_weights("a,b,c").is_err());
        assert_eq!(parse_bucket("large").unwrap(), CellBucket::Large);
        assert_eq!(parse_bucket("0-30").unwrap(), CellBucket::Small);
        assert!(parse_bucket("huge").is_err());
    }
}
