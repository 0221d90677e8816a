//! `mi-analyze`.

use std::io::Write;

use serde::Serialize;

use super::{AnalysisMode, CliError, ExitStatus, MiAnalyzeArgs};
use crate::info::{
    analytic_lag_profile, effective_distance, empirical_lag_profile, max_lag, ColumnModel, DependencySource,
    EffectiveDistanceReport, EmpiricalOptions, InfoError, LagProfile, PowerLawModel,
};
use crate::seed::{rng_from_seed, stream_rng};
use crate::table::{load_table_file, LinearizedSequence};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub k: usize,
    pub lag: usize,
    pub value: f64,
    pub i_same: f64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub k: u64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextReport {
    pub c: f64,
    pub alpha: f64,
    #[serde(flatten)]
    pub distance: EffectiveDistanceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub mode: &'static str,
    pub n_rows: usize,
    pub n_cols: usize,
    pub samples: usize,
    pub d_max: usize,
    pub i_same: f64,
    /// `model`, or `estimated` from reliable empirical peaks.
    pub i_same_source: &'static str,
    pub peaks: Vec<Peak>,
    pub max_peak_deviation: f64,
    pub unreliable_lags: Vec<usize>,
    pub table: EffectiveDistanceReport,
    pub text: TextReport,
    pub dominance: Vec<Dominance>,
}

fn info(e: InfoError) -> CliError {
    CliError::Data(e.to_string())
}

fn model_from_args(args: &MiAnalyzeArgs) -> Result<Option<ColumnModel>, CliError> {
    if let Some(p) = &args.model {
        return ColumnModel::load(p).map(Some).map_err(info);
    }
    if let Some(m) = args.disjoint {
        if m < 1 {
            return Err(CliError::Usage("--disjoint needs at least one column".into()));
        }
        return Ok(Some(ColumnModel::disjoint_point_masses(m)));
    }
    if let Some(spec) = &args.random_model {
        let parts: Vec<u64> = spec
            .split(',')
            .map(|x| x.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("--random-model {spec:?}: expected m,k,seed")))?;
        let [m, k, seed] = parts[..] else {
            return Err(CliError::Usage(format!("--random-model {spec:?}: expected m,k,seed")));
        };
        if m < 1 || k < 1 {
            return Err(CliError::Usage("--random-model needs m >= 1 and k >= 1".into()));
        }
        return Ok(Some(ColumnModel::random(m as usize, k as usize, &mut rng_from_seed(seed))));
    }
    Ok(None)
}

/// Dominance lags: a roughly logarithmic ladder up to `k_max`.
fn ladder(k_max: u64) -> Vec<u64> {
    let mut ks = Vec::new();
    let mut base = 1;
    while base <= k_max {
        for step in [1, 2, 5] {
            let k = base * step;
            if k <= k_max {
                ks.push(k);
            }
        }
        base *= 10;
    }
    if ks.last() != Some(&k_max) && k_max > 0 {
        ks.push(k_max);
    }
    ks
}

pub fn analyze(args: &MiAnalyzeArgs) -> Result<(AnalysisReport, LagProfile), CliError> {
    let model = model_from_args(args)?;
    let (profile, n, m, samples) = match args.mode {
        AnalysisMode::Analytic => {
            let model = model
                .as_ref()
                .ok_or_else(|| CliError::Usage("analytic mode needs --model, --random-model or --disjoint".into()))?;
            let (n, m) = (args.rows, model.n_cols());
            let d_max = args.d_max.unwrap_or((n.saturating_sub(1)) * m);
            (analytic_lag_profile(model, n, d_max).map_err(info)?, n, m, 0)
        }
        AnalysisMode::Empirical => {
            let seqs: Vec<LinearizedSequence> = if !args.samples.is_empty() {
                args.samples
                    .iter()
                    .map(|p| load_table_file(p).map(|t| t.linearize()).map_err(|e| CliError::Data(e.to_string())))
                    .collect::<Result<_, _>>()?
            } else if let (Some(model), Some(k)) = (&model, args.draws) {
                (0..k as u64)
                    .map(|i| model.sample_sequence(args.rows, &mut stream_rng(args.seed, "mi-sample", i)))
                    .collect()
            } else {
                return Err(CliError::Usage(
                    "empirical mode needs --sample files, or a model with --draws".into(),
                ));
            };
            let Some(first) = seqs.first() else {
                return Err(CliError::Usage("no samples".into()));
            };
            let (n, m) = first.source_dims();
            if let Some(bad) = seqs.iter().position(|s| s.source_dims() != (n, m)) {
                return Err(CliError::Data(format!(
                    "sample {} has shape {:?}, expected {:?}",
                    bad + 1,
                    seqs[bad].source_dims(),
                    (n, m)
                )));
            }
            let d_max = args.d_max.unwrap_or((n.saturating_sub(1) * m).min(max_lag(n, m)));
            let options = EmpiricalOptions {
                min_pairs: args.min_pairs,
            };
            (empirical_lag_profile(&seqs, d_max, options).map_err(info)?, n, m, seqs.len())
        }
    };
    let d_max = profile.d_max;
    let peak_values: Vec<_> = (1..)
        .map(|k| k * m)
        .take_while(|&lag| lag <= d_max)
        .filter_map(|lag| profile.at(lag))
        .collect();
    let (i_same, source) = match (&model, args.mode) {
        (Some(model), _) => (model.i_same(), "model"),
        (None, _) => {
            let reliable: Vec<f64> = peak_values.iter().filter(|v| v.reliable).map(|v| v.value).collect();
            if reliable.is_empty() {
                return Err(CliError::Data("no reliable peak lag to estimate the same-column MI".into()));
            }
            (reliable.iter().sum::<f64>() / reliable.len() as f64, "estimated")
        }
    };
    let peaks: Vec<Peak> = peak_values
        .iter()
        .map(|v| Peak {
            k: v.lag / m,
            lag: v.lag,
            value: v.value,
            i_same,
            reliable: v.reliable,
        })
        .collect();
    let max_peak_deviation = peaks
        .iter()
        .filter(|p| p.reliable)
        .map(|p| (p.value - i_same).abs())
        .fold(0.0, f64::max);
    let tau = args.tau.unwrap_or(i_same / 2.0);
    let table = effective_distance(DependencySource::Table { profile: &profile, i_same }, tau).map_err(info)?;
    let power = PowerLawModel::new(args.c, args.alpha).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = TextReport {
        c: args.c,
        alpha: args.alpha,
        distance: effective_distance(DependencySource::Text(&power), tau).map_err(info)?,
    };
    let dominance = ladder((d_max / m) as u64)
        .into_iter()
        .map(|k| {
            power
                .text_mi((k as usize * m) as f64)
                .map(|t| Dominance { k, ratio: i_same / t })
                .map_err(info)
        })
        .collect::<Result<_, _>>()?;
    let report = AnalysisReport {
        mode: profile.mode.as_str(),
        n_rows: n,
        n_cols: m,
        samples,
        d_max,
        i_same,
        i_same_source: source,
        unreliable_lags: profile.values().iter().filter(|v| !v.reliable).map(|v| v.lag).collect(),
        peaks,
        max_peak_deviation,
        table,
        text,
        dominance,
    };
    Ok((report, profile))
}

fn write_report(r: &AnalysisReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "mode: {}  rows: {}  cols: {}  samples: {}  d_max: {}",
        r.mode, r.n_rows, r.n_cols, r.samples, r.d_max
    )?;
    writeln!(out, "i_same: {:.12} ({})", r.i_same, r.i_same_source)?;
    if !r.unreliable_lags.is_empty() {
        writeln!(out, "unreliable lags: {} (below the pair threshold)", r.unreliable_lags.len())?;
    }
    writeln!(out, "\npeaks")?;
    writeln!(out, "{:>5} {:>6} {:>18} {:>18} {:>8}", "k", "lag", "value", "i_same", "reliable")?;
    for p in &r.peaks {
        writeln!(
            out,
            "{:>5} {:>6} {:>18.12} {:>18.12} {:>8}",
            p.k, p.lag, p.value, p.i_same, p.reliable
        )?;
    }
    writeln!(out, "max |peak - i_same|: {:.3e}", r.max_peak_deviation)?;
    let sup = |d: &EffectiveDistanceReport| d.finite_supremum.map_or("none".to_string(), |v| v.to_string());
    writeln!(out, "\neffective distance (tau = {:.12})", r.table.tau)?;
    writeln!(
        out,
        "  table: supremum {} within d_max, unbounded {}",
        sup(&r.table),
        r.table.unbounded_asymptotic
    )?;
    writeln!(
        out,
        "  text (C = {}, alpha = {}): d* = {}, unbounded {}",
        r.text.c,
        r.text.alpha,
        sup(&r.text.distance),
        r.text.distance.unbounded_asymptotic
    )?;
    writeln!(out, "\ndominance (i_same / text MI at lag k m)")?;
    for d in &r.dominance {
        writeln!(out, "{:>5} {:>14.6}", d.k, d.ratio)?;
    }
    Ok(())
}

pub(super) fn run(args: &MiAnalyzeArgs, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    let (report, profile) = analyze(args)?;
    if let Some(p) = &args.csv {
        if p.as_os_str() == "-" {
            write!(out, "{}", profile.to_csv())?;
        } else {
            std::fs::write(p, profile.to_csv()).map_err(|e| CliError::io(p.display(), e))?;
        }
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serializes"))?;
    } else {
        write_report(&report, out)?;
    }
    Ok(ExitStatus::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_shape() {
        assert_eq!(ladder(199), vec![1, 2, 5, 10, 20, 50, 100, 199]);
        assert_eq!(ladder(1), vec![1]);
        assert_eq!(ladder(100), vec![1, 2, 5, 10, 20, 50, 100]);
        assert!(ladder(0).is_empty());
    }
}
