//! Pass-rate filtration: run a solver `N` times per task, verify each
//! answer against the gold result, and keep only tasks it sometimes solves.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::external::{CommandError, ExternalCommand};
use crate::seed::{derive_seed, stream_rng};
use crate::sql::{parse, parse_markdown_result, parse_number, ResultTable, TextTable};
use rand::Rng;

/// Relative tolerance for numeric cells.
pub const NUMERIC_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_ATTEMPTS: u32 = 8;
pub const DEFAULT_TIMEOUT_SECS: f64 = 120.0;
/// Overrides the configured external-solver timeout, in seconds.
pub const TIMEOUT_ENV: &str = "TABULA_SOLVER_TIMEOUT";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FilterError {
    #[error("N must be at least 1")]
    ZeroAttempts,
    #[error("task {id}: gold answer is not a markdown table")]
    BadGold { id: String },
    #[error("task {id}: gold SQL does not parse: {message}")]
    BadSql { id: String, message: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("{0}")]
    Other(String),
}

/// What a solver sees. `gold` is for stub solvers only and is never sent to
/// external commands.
#[derive(Debug, Clone, Serialize)]
pub struct SolverRequest<'a> {
    pub context: &'a str,
    pub question: &'a str,
    pub attempt: u32,
    pub seed: u64,
    #[serde(skip)]
    pub gold: &'a str,
}

pub trait SolverAdapter: Send + Sync {
    fn name(&self) -> &str;

    /// Identical requests give identical answers.
    fn deterministic(&self) -> bool;

    /// Attempts may run in parallel.
    fn concurrent_safe(&self) -> bool {
        false
    }

    fn solve(&self, request: &SolverRequest<'_>) -> Result<String, SolverError>;
}

/// Echoes the gold answer.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleSolver;

impl SolverAdapter for OracleSolver {
    fn name(&self) -> &str {
        "oracle"
    }
    fn deterministic(&self) -> bool {
        true
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
    fn solve(&self, r: &SolverRequest<'_>) -> Result<String, SolverError> {
        Ok(r.gold.to_string())
    }
}

/// Never produces a table.
#[derive(Debug, Clone, Copy, Default)]
pub struct WrongSolver;

impl SolverAdapter for WrongSolver {
    fn name(&self) -> &str {
        "wrong"
    }
    fn deterministic(&self) -> bool {
        true
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
    fn solve(&self, _: &SolverRequest<'_>) -> Result<String, SolverError> {
        Ok("I could not find the answer.".into())
    }
}

/// Gold with probability `p`, otherwise wrong; the flip is seeded by the
/// request.
#[derive(Debug, Clone, Copy)]
pub struct CoinSolver {
    pub p: f64,
}

impl Default for CoinSolver {
    fn default() -> Self {
        Self { p: 0.5 }
    }
}

impl SolverAdapter for CoinSolver {
    fn name(&self) -> &str {
        "coin"
    }
    fn deterministic(&self) -> bool {
        false
    }
    fn concurrent_safe(&self) -> bool {
        true
    }
    fn solve(&self, r: &SolverRequest<'_>) -> Result<String, SolverError> {
        if stream_rng(r.seed, "coin", u64::from(r.attempt)).random::<f64>() < self.p {
            OracleSolver.solve(r)
        } else {
            WrongSolver.solve(r)
        }
    }
}

/// An external program: JSON `{context, question, attempt, seed}` on
/// stdin, the answer on stdout.
#[derive(Debug, Clone)]
pub struct CommandSolver {
    pub command: ExternalCommand,
}

impl CommandSolver {
    pub fn new(command: ExternalCommand) -> Self {
        Self { command }
    }
}

impl SolverAdapter for CommandSolver {
    fn name(&self) -> &str {
        self.command.argv.first().map(String::as_str).unwrap_or("command")
    }
    fn deterministic(&self) -> bool {
        false
    }
    fn solve(&self, r: &SolverRequest<'_>) -> Result<String, SolverError> {
        let payload = serde_json::to_string(r).map_err(|e| SolverError::Other(e.to_string()))?;
        Ok(self.command.run(&payload)?)
    }
}

/// `TABULA_SOLVER_TIMEOUT` if set and valid, else `configured`, else 120 s.
pub fn resolve_timeout(configured: Option<f64>) -> f64 {
    std::env::var(TIMEOUT_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|t| t.is_finite() && *t > 0.0)
        .or(configured)
        .unwrap_or(DEFAULT_TIMEOUT_SECS)
}

/// A stub solver by name: `oracle`, `wrong` or `coin`.
pub fn builtin_solver(name: &str) -> Option<Box<dyn SolverAdapter>> {
    match name {
        "oracle" => Some(Box::new(OracleSolver)),
        "wrong" => Some(Box::new(WrongSolver)),
        "coin" => Some(Box::new(CoinSolver::default())),
        _ => None,
    }
}

fn cells_match(candidate: &str, gold: &str) -> bool {
    let (c, g) = (candidate.trim(), gold.trim());
    if c == g {
        return true;
    }
    match (parse_number(c), parse_number(g)) {
        (Some(x), Some(y)) => (x - y).abs() <= NUMERIC_TOLERANCE * x.abs().max(y.abs()),
        _ => false,
    }
}

fn rows_match(a: &[String], b: &[String]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| cells_match(x, y))
}

/// Compare a candidate answer with a gold table given as strings.
///
/// Column names are trimmed and case-folded, cells trimmed, and cells that
/// both parse as numbers are equal within [`NUMERIC_TOLERANCE`] relative.
/// A bare value is accepted for a 1×1 gold. Never panics.
pub fn verify_text(candidate: &str, gold: &TextTable, ordered: bool) -> bool {
    let Some(cand) = parse_markdown_result(candidate) else {
        return gold.header.len() == 1
            && gold.rows.len() == 1
            && !candidate.trim().is_empty()
            && cells_match(candidate, &gold.rows[0][0]);
    };
    let fold = |h: &[String]| -> Vec<String> { h.iter().map(|s| s.trim().to_lowercase()).collect() };
    if fold(&cand.header) != fold(&gold.header) || cand.rows.len() != gold.rows.len() {
        return false;
    }
    if ordered {
        return cand.rows.iter().zip(&gold.rows).all(|(a, b)| rows_match(a, b));
    }
    // Multiset comparison; greedy matching is exact unless the tolerance
    // makes two gold rows interchangeable.
    let mut used = vec![false; cand.rows.len()];
    gold.rows.iter().all(|g| {
        match (0..cand.rows.len()).find(|&i| !used[i] && rows_match(&cand.rows[i], g)) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        }
    })
}

/// [`verify_text`] against a typed result.
pub fn verify(candidate: &str, gold: &ResultTable, ordered: bool) -> bool {
    let text = TextTable {
        header: gold.columns.clone(),
        rows: gold.cell_strings(),
    };
    verify_text(candidate, &text, ordered)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    DiscardNoise,
    DiscardTrivial,
    Retain,
}

impl Decision {
    pub fn as_str(self) -> &'static str {
        match self {
            Decision::DiscardNoise => "discard-noise",
            Decision::DiscardTrivial => "discard-trivial",
            Decision::Retain => "retain",
        }
    }
}

/// `P = 0` is noise, `P = 1` trivial, anything between is kept.
pub fn decide(verdicts: &[bool]) -> Decision {
    let passes = verdicts.iter().filter(|v| **v).count();
    if passes == 0 {
        Decision::DiscardNoise
    } else if passes == verdicts.len() {
        Decision::DiscardTrivial
    } else {
        Decision::Retain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassRateRecord {
    pub id: String,
    #[serde(rename = "N")]
    pub n: u32,
    pub verdicts: Vec<bool>,
    #[serde(rename = "P")]
    pub p: f64,
    pub decision: Decision,
    /// Attempts where the solver itself failed (counted as false).
    pub solver_failures: u32,
    pub solver: String,
    pub deterministic: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

/// A task as the filter sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterTask {
    pub id: String,
    pub context: String,
    pub question: String,
    /// Serialized gold answer, handed to stub solvers.
    pub answer: String,
    pub gold: TextTable,
    pub ordered: bool,
}

impl FilterTask {
    /// `ordered` is taken from the gold SQL's ORDER BY.
    pub fn new(id: &str, context: &str, question: &str, sql: &str, answer: &str) -> Result<Self, FilterError> {
        let q = parse(sql).map_err(|e| FilterError::BadSql {
            id: id.to_string(),
            message: e.to_string(),
        })?;
        let gold = parse_markdown_result(answer).ok_or_else(|| FilterError::BadGold { id: id.to_string() })?;
        Ok(Self {
            id: id.to_string(),
            context: context.to_string(),
            question: question.to_string(),
            answer: answer.to_string(),
            gold,
            ordered: q.is_ordered(),
        })
    }
}

/// Seed for attempt `k` of task `id` under `root`.
pub fn attempt_seed(root: u64, id: &str, k: u32) -> u64 {
    derive_seed(root, &format!("filter/{id}"), u64::from(k))
}

pub fn pass_rate(
    task: &FilterTask,
    solver: &dyn SolverAdapter,
    n: u32,
    root: u64,
) -> Result<PassRateRecord, FilterError> {
    if n == 0 {
        return Err(FilterError::ZeroAttempts);
    }
    let run = |k: u32| {
        let request = SolverRequest {
            context: &task.context,
            question: &task.question,
            attempt: k,
            seed: attempt_seed(root, &task.id, k),
            gold: &task.answer,
        };
        solver.solve(&request)
    };
    let answers: Vec<Result<String, SolverError>> = if solver.concurrent_safe() && n > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..n).map(|k| s.spawn(move || run(k))).collect();
            handles.into_iter().map(|h| h.join().expect("solver thread")).collect()
        })
    } else {
        (0..n).map(run).collect()
    };
    let mut verdicts = Vec::with_capacity(n as usize);
    let mut failures = 0;
    let mut errors = Vec::new();
    for a in answers {
        match a {
            Ok(text) => verdicts.push(verify_text(&text, &task.gold, task.ordered)),
            Err(e) => {
                failures += 1;
                errors.push(e.to_string());
                verdicts.push(false);
            }
        }
    }
    let passes = verdicts.iter().filter(|v| **v).count();
    Ok(PassRateRecord {
        id: task.id.clone(),
        n,
        p: passes as f64 / f64::from(n),
        decision: decide(&verdicts),
        verdicts,
        solver_failures: failures,
        solver: solver.name().to_string(),
        deterministic: solver.deterministic(),
        errors,
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    /// Input indexes of retained tasks, in input order.
    pub retained: Vec<usize>,
    /// One record per input task, in input order.
    pub records: Vec<PassRateRecord>,
}

impl FilterOutcome {
    pub fn count(&self, d: Decision) -> usize {
        self.records.iter().filter(|r| r.decision == d).count()
    }
}

pub fn filter_stream(
    tasks: &[FilterTask],
    solver: &dyn SolverAdapter,
    n: u32,
    root: u64,
) -> Result<FilterOutcome, FilterError> {
    let mut out = FilterOutcome::default();
    for (i, t) in tasks.iter().enumerate() {
        let rec = pass_rate(t, solver, n, root)?;
        if rec.decision == Decision::Retain {
            out.retained.push(i);
        }
        out.records.push(rec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sql::{serialize_result, Value};

    fn gold() -> ResultTable {
        ResultTable::new(
            vec!["Venue".into(), "avg".into()],
            vec![
                vec![Value::Text("Olympia".into()), Value::Number(13385.0)],
                vec![Value::Text("Råsunda".into()), Value::Number(25983.2)],
            ],
            false,
        )
    }

    fn task(answer: &str, sql: &str) -> FilterTask {
        FilterTask::new("t", "ctx", "q", sql, answer).unwrap()
    }

    #[test]
    fn verify_examples() {
        let g = gold();
        let text = serialize_result(&g);
        assert!(verify(&text, &g, false));
        assert!(verify("| venue | AVG |\n|---|---|\n| Olympia | 13385 |\n|  Råsunda | 25983.20 |", &g, false));
        let swapped = "| Venue | avg |\n| --- | --- |\n| Råsunda | 25983.2 |\n| Olympia | 13385.0 |";
        assert!(verify(swapped, &g, false));
        assert!(!verify(swapped, &g, true));
        assert!(!verify("| Venue | avg |\n| --- | --- |\n| Olympia | 13385.0 |", &g, false));
        assert!(!verify("twelve", &g, false));
        assert!(!verify("| Venue | avg |\n| --- | --- |\n| Olympia | 13386 |\n| Råsunda | 25983.2 |", &g, false));
    }

    #[test]
    fn single_value_fallback() {
        let g = ResultTable::new(vec!["n".into()], vec![vec![Value::Number(25983.2)]], false);
        assert!(verify("25983.20", &g, false));
        assert!(verify("  25983.2\n", &g, false));
        assert!(!verify("25983.3", &g, false));
        assert!(!verify("", &g, false));
    }

    #[test]
    fn decision_rule() {
        assert_eq!(decide(&[true, true, false, true]), Decision::Retain);
        assert_eq!(decide(&[false; 3]), Decision::DiscardNoise);
        assert_eq!(decide(&[true; 3]), Decision::DiscardTrivial);
        assert_eq!(decide(&[true]), Decision::DiscardTrivial);
        assert_eq!(decide(&[false]), Decision::DiscardNoise);
    }

    #[test]
    fn stub_solvers() {
        let answer = serialize_result(&gold());
        let t = task(&answer, "SELECT a FROM b");
        let r = pass_rate(&t, &OracleSolver, 4, 0).unwrap();
        assert_eq!((r.p, r.decision), (1.0, Decision::DiscardTrivial));
        let r = pass_rate(&t, &WrongSolver, 4, 0).unwrap();
        assert_eq!((r.p, r.decision), (0.0, Decision::DiscardNoise));
        assert_eq!(pass_rate(&t, &WrongSolver, 0, 0), Err(FilterError::ZeroAttempts));
        let a = pass_rate(&t, &CoinSolver::default(), 8, 3).unwrap();
        let b = pass_rate(&t, &CoinSolver::default(), 8, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ordered_flag_comes_from_sql() {
        let answer = serialize_result(&gold());
        assert!(task(&answer, "SELECT a FROM b ORDER BY a").ordered);
        assert!(!task(&answer, "SELECT a FROM b").ordered);
        assert!(matches!(
            FilterTask::new("x", "", "", "SELECT", &answer),
            Err(FilterError::BadSql { .. })
        ));
        assert!(matches!(
            FilterTask::new("x", "", "", "SELECT a FROM b", "nope"),
            Err(FilterError::BadGold { .. })
        ));
    }

    #[test]
    fn empty_stream() {
        let out = filter_stream(&[], &OracleSolver, 8, 0).unwrap();
        assert!(out.retained.is_empty() && out.records.is_empty());
    }

    #[cfg(unix)]
    #[test]
    fn command_solver_failures_are_tallied() {
        let answer = serialize_result(&gold());
        let t = task(&answer, "SELECT a FROM b");
        let failing = CommandSolver::new(ExternalCommand::new(vec!["sh".into(), "-c".into(), "exit 2".into()], 5.0));
        let r = pass_rate(&t, &failing, 3, 0).unwrap();
        assert_eq!(r.solver_failures, 3);
        assert_eq!(r.decision, Decision::DiscardNoise);
        // Sees the request as JSON and answers with a fixed table.
        let script = format!("grep -q '\"question\":\"q\"' && printf '%b' '{}'", answer.replace('\n', "\\n"));
        let echo = CommandSolver::new(ExternalCommand::new(vec!["sh".into(), "-c".into(), script], 5.0));
        let r = pass_rate(&t, &echo, 2, 0).unwrap();
        assert_eq!(r.verdicts, vec![true, true], "{:?}", r.errors);
    }
}
