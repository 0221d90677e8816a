//! Lag profiles `Ī_table(d)`: MI of the pair distribution of
//! `(W_t, W_{t+d})` pooled over data-region positions `m < t ≤ L − d`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::dist::{plugin_mutual_information, JointDist};
use super::model::ColumnModel;
use super::InfoError;
use crate::table::LinearizedSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMode {
    Analytic,
    Empirical,
}

impl ProfileMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileMode::Analytic => "analytic",
            ProfileMode::Empirical => "empirical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagValue {
    pub lag: usize,
    /// Nats.
    pub value: f64,
    /// Pooled pair count behind an empirical value (positions for analytic).
    pub pairs: u64,
    pub reliable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileMeta {
    pub n_rows: usize,
    pub n_cols: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagProfile {
    pub d_max: usize,
    pub mode: ProfileMode,
    pub meta: ProfileMeta,
    values: Vec<LagValue>,
}

impl LagProfile {
    /// Values for lags `1..=d_max`, in order.
    pub fn values(&self) -> &[LagValue] {
        &self.values
    }

    pub fn at(&self, lag: usize) -> Option<&LagValue> {
        lag.checked_sub(1).and_then(|i| self.values.get(i))
    }

    pub fn value(&self, lag: usize) -> Option<f64> {
        self.at(lag).map(|v| v.value)
    }

    /// `lag,value,mode,reliable` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,value,mode,reliable\n");
        for v in &self.values {
            let _ = writeln!(
                out,
                "{},{:.15e},{},{}",
                v.lag,
                v.value,
                self.mode.as_str(),
                v.reliable
            );
        }
        out
    }
}

/// Largest lag with a defined data-region pair: `L − m − 1 = mn − 1`.
pub fn max_lag(n_rows: usize, n_cols: usize) -> usize {
    (n_rows * n_cols).saturating_sub(1)
}

fn check_range(d_max: usize, n_rows: usize, n_cols: usize) -> Result<(), InfoError> {
    let limit = max_lag(n_rows, n_cols);
    if d_max == 0 || d_max > limit {
        return Err(InfoError::LagOutOfRange { d_max, limit });
    }
    Ok(())
}

/// Number of data-region positions `t ∈ S_d` with `col(t) = c`, per column.
fn column_weights(n_rows: usize, n_cols: usize, lag: usize) -> Vec<u64> {
    let span = n_rows * n_cols - lag;
    let full = (span / n_cols) as u64;
    let rest = span % n_cols;
    (0..n_cols)
        .map(|c| full + u64::from(c < rest))
        .collect()
}

/// Analytic profile of an `n`-row table drawn from `model`.
///
/// Position `t` in column `c` paired with `t + d` in column
/// `c' = c + d (mod m)` contributes `P_c ⊗ P_{c'}`; pooling over `S_d`
/// weights each column by how often it starts a pair. At `d = km` the
/// weights are uniform and the pooled joint is exactly `R`.
pub fn analytic_lag_profile(
    model: &ColumnModel,
    n_rows: usize,
    d_max: usize,
) -> Result<LagProfile, InfoError> {
    let m = model.n_cols();
    check_range(d_max, n_rows, m)?;
    let k = model.alphabet_size();
    let probs: Vec<&[f64]> = model.columns().iter().map(|c| c.probs()).collect();
    let values = (1..=d_max)
        .map(|lag| {
            let weights = column_weights(n_rows, m, lag);
            let total: u64 = weights.iter().sum();
            let mut mass = vec![0.0; k * k];
            for (c, &w) in weights.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                let w = w as f64 / total as f64;
                let (p, q) = (probs[c], probs[(c + lag) % m]);
                for a in 0..k {
                    let wa = w * p[a];
                    for b in 0..k {
                        mass[a * k + b] += wa * q[b];
                    }
                }
            }
            let joint = JointDist::from_parts_unchecked(model.alphabet().to_vec(), mass);
            LagValue {
                lag,
                value: joint.mutual_information(),
                pairs: total,
                reliable: true,
            }
        })
        .collect();
    Ok(LagProfile {
        d_max,
        mode: ProfileMode::Analytic,
        meta: ProfileMeta {
            n_rows,
            n_cols: m,
            samples: 0,
        },
        values,
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EmpiricalOptions {
    /// Pairs required per lag before a value counts as reliable.
    /// Defaults to `10 · |alphabet|²`.
    pub min_pairs: Option<u64>,
}

/// Plug-in profile pooled over all positions of all samples.
pub fn empirical_lag_profile(
    samples: &[LinearizedSequence],
    d_max: usize,
    options: EmpiricalOptions,
) -> Result<LagProfile, InfoError> {
    let first = samples.first().ok_or(InfoError::NoSamples)?;
    let (n_rows, n_cols) = first.source_dims();
    if samples.iter().any(|s| s.source_dims() != (n_rows, n_cols)) {
        return Err(InfoError::Shape("samples disagree on table dimensions".into()));
    }
    check_range(d_max, n_rows, n_cols)?;

    let mut symbols: BTreeMap<&str, usize> = BTreeMap::new();
    for s in samples {
        for tok in s.data_tokens() {
            symbols.entry(tok.as_str()).or_insert(0);
        }
    }
    for (i, v) in symbols.values_mut().enumerate() {
        *v = i;
    }
    let k = symbols.len();
    let coded: Vec<Vec<usize>> = samples
        .iter()
        .map(|s| s.data_tokens().iter().map(|t| symbols[t.as_str()]).collect())
        .collect();
    let min_pairs = options.min_pairs.unwrap_or(10 * (k as u64) * (k as u64));

    let mut counts = vec![0u64; k * k];
    let values = (1..=d_max)
        .map(|lag| {
            counts.iter_mut().for_each(|c| *c = 0);
            let mut pairs = 0u64;
            for seq in &coded {
                for (a, b) in seq.iter().zip(&seq[lag..]) {
                    counts[a * k + b] += 1;
                }
                pairs += (seq.len() - lag) as u64;
            }
            LagValue {
                lag,
                value: plugin_mutual_information(&counts, k, k),
                pairs,
                reliable: pairs >= min_pairs,
            }
        })
        .collect();
    Ok(LagProfile {
        d_max,
        mode: ProfileMode::Empirical,
        meta: ProfileMeta {
            n_rows,
            n_cols,
            samples: samples.len(),
        },
        values,
    })
}
