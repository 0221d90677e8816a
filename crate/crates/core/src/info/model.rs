//! The column-mixture generative model of a table: column `j` draws every
//! cell i.i.d. from its own categorical distribution `P_j`.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::{entropy, kl_from_probs, CategoricalDist, Divergence, JointDist};
use super::InfoError;
use crate::table::{LinearizedSequence, Table};

/// KL below this counts as "indistinguishable" for the distinctiveness check.
pub const DISTINCT_KL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnModel {
    alphabet: Vec<String>,
    columns: Vec<CategoricalDist>,
}

/// Per-symbol across-column variance of `P_j(a)` and its total `σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossColumnVariance {
    pub per_symbol: Vec<f64>,
    pub sigma_squared: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    symbols: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl ColumnModel {
    pub fn new(columns: Vec<CategoricalDist>) -> Result<Self, InfoError> {
        let first = columns
            .first()
            .ok_or_else(|| InfoError::Shape("a column model needs at least one column".into()))?;
        let alphabet = first.alphabet().to_vec();
        if columns.iter().any(|c| c.alphabet() != alphabet.as_slice()) {
            return Err(InfoError::AlphabetMismatch);
        }
        Ok(Self { alphabet, columns })
    }

    pub fn from_rows(alphabet: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, InfoError> {
        let columns = rows
            .into_iter()
            .map(|probs| CategoricalDist::new(alphabet.clone(), probs))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(columns)
    }

    /// `m` columns with disjoint point masses: column `j` always emits `v{j}`.
    pub fn disjoint_point_masses(m: usize) -> Self {
        let alphabet: Vec<String> = (1..=m).map(|j| format!("v{j}")).collect();
        let rows = (0..m)
            .map(|j| (0..m).map(|a| if a == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::from_rows(alphabet, rows).expect("point masses are valid distributions")
    }

    /// `m` random columns over `k` symbols, each a flat-Dirichlet draw.
    pub fn random<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Self {
        let alphabet: Vec<String> = (0..k).map(|a| format!("s{a}")).collect();
        let columns = (0..m)
            .map(|_| {
                // -ln(U) with U in (0, 1] gives Exp(1) weights.
                let w: Vec<f64> = (0..k)
                    .map(|_| -(1.0 - rng.random::<f64>()).ln() + f64::MIN_POSITIVE)
                    .collect();
                CategoricalDist::from_weights(alphabet.clone(), &w)
                    .expect("positive weights normalize")
            })
            .collect();
        Self::new(columns).expect("shared alphabet")
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn columns(&self) -> &[CategoricalDist] {
        &self.columns
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    fn prob(&self, column: usize, symbol: usize) -> f64 {
        self.columns[column].probs()[symbol]
    }

    /// `Q(v) = (1/m) Σ_j P_j(v)`.
    pub fn mixture(&self) -> CategoricalDist {
        let m = self.n_cols() as f64;
        let probs = (0..self.alphabet_size())
            .map(|a| (0..self.n_cols()).map(|j| self.prob(j, a)).sum::<f64>() / m)
            .collect();
        CategoricalDist::new(self.alphabet.clone(), probs).expect("mixture of distributions")
    }

    /// `R(a, b) = (1/m) Σ_j P_j(a) P_j(b)`: the joint of two cells from one
    /// uniformly chosen column, conditionally independent given the column.
    pub fn same_column_joint(&self) -> JointDist {
        let k = self.alphabet_size();
        let m = self.n_cols() as f64;
        let mut mass = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                mass[a * k + b] =
                    (0..self.n_cols()).map(|j| self.prob(j, a) * self.prob(j, b)).sum::<f64>() / m;
            }
        }
        JointDist::from_parts_unchecked(self.alphabet.clone(), mass)
    }

    /// Joint of two cells whose columns are picked independently:
    /// `(1/m²) Σ_{j,l} P_j(a) P_l(b)`.
    pub fn independent_column_joint(&self) -> JointDist {
        let k = self.alphabet_size();
        let m = self.n_cols();
        let mut mass = vec![0.0; k * k];
        for a in 0..k {
            for b in 0..k {
                let mut s = 0.0;
                for j in 0..m {
                    for l in 0..m {
                        s += self.prob(j, a) * self.prob(l, b);
                    }
                }
                mass[a * k + b] = s / (m * m) as f64;
            }
        }
        JointDist::from_parts_unchecked(self.alphabet.clone(), mass)
    }

    /// Same-column MI `D_KL(R ‖ Q ⊗ Q)` in nats.
    ///
    /// This is the conditional-independence value; dependence between cells
    /// of one column can only raise it.
    pub fn i_same(&self) -> f64 {
        let q = self.mixture();
        let qq = JointDist::product(&q, &q).expect("same alphabet");
        // R(a,b) > 0 implies Q(a), Q(b) > 0, so this is always finite.
        self.same_column_joint()
            .kl_to(&qq)
            .expect("same alphabet")
            .as_f64()
    }

    pub fn cross_column_variance(&self) -> CrossColumnVariance {
        let m = self.n_cols() as f64;
        let per_symbol: Vec<f64> = (0..self.alphabet_size())
            .map(|a| {
                let mean = (0..self.n_cols()).map(|j| self.prob(j, a)).sum::<f64>() / m;
                let second = (0..self.n_cols()).map(|j| self.prob(j, a).powi(2)).sum::<f64>() / m;
                second - mean * mean
            })
            .collect();
        let sigma_squared = per_symbol.iter().sum();
        CrossColumnVariance {
            per_symbol,
            sigma_squared,
        }
    }

    /// `I(T_J; J) = H(Q) − (1/m) Σ_j H(P_j)`.
    pub fn column_type_mi(&self) -> f64 {
        let mean_h = self.columns.iter().map(|c| entropy(c.probs())).sum::<f64>() / self.n_cols() as f64;
        (entropy(self.mixture().probs()) - mean_h).max(0.0)
    }

    /// `D_KL(P_j ‖ P_k)` for zero-based column indices.
    pub fn pairwise_kl(&self, j: usize, k: usize) -> Divergence {
        kl_from_probs(self.columns[j].probs(), self.columns[k].probs())
    }

    fn distinguishable(&self, j: usize, k: usize) -> bool {
        match self.pairwise_kl(j, k) {
            Divergence::Infinite => true,
            Divergence::Finite(v) => v > DISTINCT_KL_TOLERANCE,
        }
    }

    /// Every pair of distinct columns is distinguishable.
    pub fn satisfies_distinctiveness(&self) -> bool {
        let m = self.n_cols();
        (0..m).all(|j| (0..m).all(|k| j == k || self.distinguishable(j, k)))
    }

    /// At least one pair of columns is distinguishable.
    pub fn has_distinguishable_pair(&self) -> bool {
        let m = self.n_cols();
        (0..m).any(|j| (j + 1..m).any(|k| self.distinguishable(j, k)))
    }

    /// Draw an `n`-row table; headers are `c1..cm`.
    pub fn sample_table<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Table {
        let samplers: Vec<WeightedIndex<f64>> = self
            .columns
            .iter()
            .map(|c| WeightedIndex::new(c.probs()).expect("valid distribution"))
            .collect();
        let headers = (1..=self.n_cols()).map(|j| format!("c{j}")).collect();
        let rows = (0..n)
            .map(|_| {
                samplers
                    .iter()
                    .map(|s| self.alphabet[s.sample(rng)].clone())
                    .collect()
            })
            .collect();
        Table::new("sample", headers, rows).expect("n >= 1 and m >= 1")
    }

    pub fn sample_sequence<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> LinearizedSequence {
        self.sample_table(n, rng).linearize()
    }

    pub fn to_toml(&self) -> String {
        let file = ModelFile {
            symbols: self.alphabet.clone(),
            columns: self.columns.iter().map(|c| c.probs().to_vec()).collect(),
        };
        toml::to_string(&file).expect("model serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, InfoError> {
        let file: ModelFile =
            toml::from_str(text).map_err(|e| InfoError::ModelFile(e.to_string()))?;
        Self::from_rows(file.symbols, file.columns)
    }

    pub fn load(path: &Path) -> Result<Self, InfoError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| InfoError::ModelFile(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), InfoError> {
        std::fs::write(path, self.to_toml())
            .map_err(|e| InfoError::ModelFile(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    fn identical(m: usize) -> ColumnModel {
        let alphabet = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        ColumnModel::from_rows(alphabet, vec![vec![0.2, 0.3, 0.5]; m]).unwrap()
    }

    #[test]
    fn mixture_examples() {
        let q = ColumnModel::disjoint_point_masses(2).mixture();
        assert_eq!(q.probs(), &[0.5, 0.5]);
        assert_eq!(identical(4).mixture().probs(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn mixture_is_per_symbol_mean() {
        let model = ColumnModel::random(3, 5, &mut rng_from_seed(1));
        let q = model.mixture();
        for a in 0..5 {
            let mut brute = 0.0;
            for col in model.columns() {
                brute += col.probs()[a];
            }
            assert!((q.probs()[a] - brute / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn joint_examples() {
        let r = ColumnModel::disjoint_point_masses(2).same_column_joint();
        assert_eq!(r.mass(), &[0.5, 0.0, 0.0, 0.5]);
        let model = identical(3);
        let r = model.same_column_joint();
        let p = &model.columns()[0];
        let pp = JointDist::product(p, p).unwrap();
        for (x, y) in r.mass().iter().zip(pp.mass()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn i_same_examples() {
        let v = ColumnModel::disjoint_point_masses(2).i_same();
        // R = diag(1/2, 1/2), Q⊗Q = all 1/4: 2 · 1/2 · log 2.
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert!(identical(4).i_same().abs() < 1e-15);
    }

    #[test]
    fn variance_examples() {
        let v = ColumnModel::disjoint_point_masses(2).cross_column_variance();
        assert_eq!(v.per_symbol, vec![0.25, 0.25]);
        assert_eq!(v.sigma_squared, 0.5);
        assert!(identical(3).cross_column_variance().sigma_squared.abs() < 1e-15);
    }

    #[test]
    fn column_type_examples() {
        assert!(identical(3).column_type_mi().abs() < 1e-15);
        let v = ColumnModel::disjoint_point_masses(2).column_type_mi();
        assert!((v - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn distinctiveness_checks() {
        assert!(ColumnModel::disjoint_point_masses(3).satisfies_distinctiveness());
        assert!(!identical(3).has_distinguishable_pair());
        let alphabet = vec!["a".to_string(), "b".to_string()];
        let partial =
            ColumnModel::from_rows(alphabet, vec![vec![0.5, 0.5], vec![0.5, 0.5], vec![1.0, 0.0]])
                .unwrap();
        assert!(partial.has_distinguishable_pair());
        assert!(!partial.satisfies_distinctiveness());
    }

    #[test]
    fn toml_round_trip() {
        let model = ColumnModel::random(3, 4, &mut rng_from_seed(5));
        let back = ColumnModel::from_toml(&model.to_toml()).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn sampled_tables_use_the_alphabet() {
        let model = ColumnModel::disjoint_point_masses(3);
        let t = model.sample_table(4, &mut rng_from_seed(0));
        for row in t.rows() {
            assert_eq!(row, &["v1", "v2", "v3"]);
        }
    }
}
