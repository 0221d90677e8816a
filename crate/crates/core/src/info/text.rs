//! The power-law text baseline and the comparisons against it.

use serde::{Deserialize, Serialize};

use super::lag::LagProfile;
use super::model::ColumnModel;
use super::InfoError;

/// Below 2^53 consecutive integer lags are distinct doubles.
const MAX_EXACT_LAG: f64 = 9_007_199_254_740_992.0;

/// `I_text(d) = C · d^(−α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawModel {
    c: f64,
    alpha: f64,
}

impl Default for PowerLawModel {
    fn default() -> Self {
        Self { c: 1.0, alpha: 0.5 }
    }
}

impl PowerLawModel {
    pub fn new(c: f64, alpha: f64) -> Result<Self, InfoError> {
        if !(c > 0.0 && c.is_finite() && alpha > 0.0 && alpha.is_finite()) {
            return Err(InfoError::InvalidPowerLaw { c, alpha });
        }
        Ok(Self { c, alpha })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn text_mi(&self, d: f64) -> Result<f64, InfoError> {
        if !(d >= 1.0) {
            return Err(InfoError::InvalidLag(d));
        }
        Ok(self.c * d.powf(-self.alpha))
    }

    /// Largest integer lag with `I_text(d) ≥ τ`; 0 when even `d = 1` falls short.
    pub fn last_lag_above(&self, tau: f64) -> Result<u64, InfoError> {
        check_tau(tau)?;
        let d_star = (self.c / tau).powf(1.0 / self.alpha);
        if !(d_star < MAX_EXACT_LAG) {
            // `as` saturates, and integer steps mean nothing out here.
            return Ok(d_star as u64);
        }
        // powf can land a hair on either side of an exact threshold; settle
        // against the defining inequality.
        let holds = |d: u64| self.c * (d as f64).powf(-self.alpha) >= tau;
        let mut d = d_star.floor() as u64;
        while holds(d + 1) {
            d += 1;
        }
        while d >= 1 && !holds(d) {
            d -= 1;
        }
        Ok(d)
    }
}

fn check_tau(tau: f64) -> Result<(), InfoError> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(InfoError::InvalidTau(tau));
    }
    Ok(())
}

/// `I^same / I_text(k·m)`.
pub fn dominance_ratio(model: &ColumnModel, text: &PowerLawModel, k: u64) -> Result<f64, InfoError> {
    if k == 0 {
        return Err(InfoError::InvalidLag(0.0));
    }
    let peak = model.i_same();
    if peak <= 0.0 {
        return Err(InfoError::DegenerateModel);
    }
    let lag = k as f64 * model.n_cols() as f64;
    Ok(peak / text.text_mi(lag)?)
}

pub enum DependencySource<'a> {
    /// A lag profile together with the model's same-column MI.
    Table { profile: &'a LagProfile, i_same: f64 },
    Text(&'a PowerLawModel),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveDistanceReport {
    pub tau: f64,
    /// Largest lag with dependency ≥ τ: within the profile range for tables,
    /// over all lags for text.
    pub finite_supremum: Option<u64>,
    /// Peaks at every multiple of `m` clear τ, so the distance has no bound
    /// as the table grows.
    pub unbounded_asymptotic: bool,
}

pub fn effective_distance(
    source: DependencySource<'_>,
    tau: f64,
) -> Result<EffectiveDistanceReport, InfoError> {
    check_tau(tau)?;
    Ok(match source {
        DependencySource::Table { profile, i_same } => EffectiveDistanceReport {
            tau,
            finite_supremum: profile
                .values()
                .iter()
                .rev()
                .find(|v| v.value >= tau)
                .map(|v| v.lag as u64),
            unbounded_asymptotic: tau < i_same,
        },
        DependencySource::Text(model) => {
            let last = model.last_lag_above(tau)?;
            EffectiveDistanceReport {
                tau,
                finite_supremum: (last >= 1).then_some(last),
                unbounded_asymptotic: false,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::analytic_lag_profile;
    use crate::seed::rng_from_seed;

    #[test]
    fn text_mi_values() {
        let p = PowerLawModel::default();
        assert_eq!(p.text_mi(1.0).unwrap(), 1.0);
        assert!((p.text_mi(100.0).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(PowerLawModel::new(2.0, 1.0).unwrap().text_mi(4.0).unwrap(), 0.5);
        assert!(p.text_mi(0.5).is_err());
        assert!(PowerLawModel::new(0.0, 0.5).is_err());
        assert!(PowerLawModel::new(1.0, -1.0).is_err());
    }

    #[test]
    fn text_distance_matches_a_scan() {
        for (c, alpha, tau) in [(1.0, 0.5, 0.01), (1.0, 0.5, 0.1), (2.0, 1.0, 0.3), (1.0, 0.7, 0.05)] {
            let p = PowerLawModel::new(c, alpha).unwrap();
            let mut d = 1u64;
            while p.text_mi((d + 1) as f64).unwrap() >= tau {
                d += 1;
            }
            let got = p.last_lag_above(tau).unwrap();
            assert!(got.abs_diff(d) <= 1, "c={c} alpha={alpha} tau={tau}: {got} vs {d}");
        }
        assert_eq!(PowerLawModel::default().last_lag_above(0.01).unwrap(), 10000);
        assert_eq!(PowerLawModel::default().last_lag_above(0.1).unwrap(), 100);
    }

    #[test]
    fn doubling_k_scales_by_two_to_alpha() {
        let model = ColumnModel::disjoint_point_masses(5);
        let text = PowerLawModel::new(1.0, 0.5).unwrap();
        for k in [1u64, 3, 17] {
            let r1 = dominance_ratio(&model, &text, k).unwrap();
            let r2 = dominance_ratio(&model, &text, 2 * k).unwrap();
            assert!((r2 / r1 - 2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_models_are_signalled() {
        let alphabet = vec!["a".to_string(), "b".to_string()];
        let flat = ColumnModel::from_rows(alphabet, vec![vec![0.5, 0.5]; 3]).unwrap();
        assert_eq!(
            dominance_ratio(&flat, &PowerLawModel::default(), 1),
            Err(InfoError::DegenerateModel)
        );
    }

    #[test]
    fn table_report_above_peak() {
        let model = ColumnModel::random(5, 6, &mut rng_from_seed(2));
        let profile = analytic_lag_profile(&model, 20, 99).unwrap();
        let peak = model.i_same();
        let report = effective_distance(
            DependencySource::Table { profile: &profile, i_same: peak },
            peak * 1.5,
        )
        .unwrap();
        assert!(!report.unbounded_asymptotic);
        assert!(effective_distance(DependencySource::Text(&PowerLawModel::default()), 0.0).is_err());
    }
}
