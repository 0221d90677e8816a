//! Discrete distributions, KL divergence, entropy and mutual information.
//! All logarithms are natural; every quantity is in nats.

use serde::{Deserialize, Serialize};

use super::InfoError;

/// Tolerance on total probability mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoricalDist {
    alphabet: Vec<String>,
    probs: Vec<f64>,
}

impl CategoricalDist {
    pub fn new(alphabet: Vec<String>, probs: Vec<f64>) -> Result<Self, InfoError> {
        if alphabet.len() != probs.len() {
            return Err(InfoError::Shape(format!(
                "{} symbols but {} probabilities",
                alphabet.len(),
                probs.len()
            )));
        }
        if alphabet.is_empty() {
            return Err(InfoError::Shape("empty alphabet".into()));
        }
        let mut sorted: Vec<&String> = alphabet.iter().collect();
        sorted.sort();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(InfoError::DuplicateSymbol(w[0].clone()));
        }
        check_mass(&probs)?;
        Ok(Self { alphabet, probs })
    }

    /// Normalize nonnegative weights into a distribution.
    pub fn from_weights(alphabet: Vec<String>, weights: &[f64]) -> Result<Self, InfoError> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(InfoError::Mass(total));
        }
        Self::new(alphabet, weights.iter().map(|w| w / total).collect())
    }

    pub fn point_mass(alphabet: Vec<String>, symbol: usize) -> Result<Self, InfoError> {
        let mut probs = vec![0.0; alphabet.len()];
        *probs
            .get_mut(symbol)
            .ok_or_else(|| InfoError::Shape(format!("symbol index {symbol} out of range")))? = 1.0;
        Self::new(alphabet, probs)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob_of(&self, symbol: &str) -> Option<f64> {
        self.alphabet
            .iter()
            .position(|s| s == symbol)
            .map(|i| self.probs[i])
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

fn check_mass(probs: &[f64]) -> Result<(), InfoError> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(InfoError::Mass(f64::NAN));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(InfoError::Mass(total));
    }
    Ok(())
}

/// KL divergence, with support violations as a distinguished value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }

    /// Infinite maps to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// `D_KL(p ‖ q)` over a shared alphabet.
pub fn kl_divergence(p: &CategoricalDist, q: &CategoricalDist) -> Result<Divergence, InfoError> {
    if p.alphabet != q.alphabet {
        return Err(InfoError::AlphabetMismatch);
    }
    Ok(kl_from_probs(&p.probs, &q.probs))
}

/// `Σ p log(p/q)` with `0 log(0/q) = 0`. Panics if the slices differ in length.
pub fn kl_from_probs(p: &[f64], q: &[f64]) -> Divergence {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Divergence::Infinite;
        }
        total += pi * (pi / qi).ln();
    }
    Divergence::Finite(total.max(0.0))
}

/// Shannon entropy `-Σ p log p`.
pub fn entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// A probability matrix over `alphabet × alphabet`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    alphabet: Vec<String>,
    mass: Vec<f64>,
}

impl JointDist {
    pub fn new(alphabet: Vec<String>, mass: Vec<f64>) -> Result<Self, InfoError> {
        let k = alphabet.len();
        if mass.len() != k * k {
            return Err(InfoError::Shape(format!(
                "joint over {k} symbols needs {} entries, got {}",
                k * k,
                mass.len()
            )));
        }
        check_mass(&mass)?;
        Ok(Self { alphabet, mass })
    }

    /// `a ⊗ b`.
    pub fn product(a: &CategoricalDist, b: &CategoricalDist) -> Result<Self, InfoError> {
        if a.alphabet != b.alphabet {
            return Err(InfoError::AlphabetMismatch);
        }
        let mass = a
            .probs
            .iter()
            .flat_map(|&pa| b.probs.iter().map(move |&pb| pa * pb))
            .collect();
        Ok(Self {
            alphabet: a.alphabet.clone(),
            mass,
        })
    }

    pub(crate) fn from_parts_unchecked(alphabet: Vec<String>, mass: Vec<f64>) -> Self {
        Self { alphabet, mass }
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.mass[a * self.size() + b]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// Distribution of the first coordinate.
    pub fn row_marginal(&self) -> Vec<f64> {
        let k = self.size();
        (0..k).map(|a| (0..k).map(|b| self.get(a, b)).sum()).collect()
    }

    /// Distribution of the second coordinate.
    pub fn col_marginal(&self) -> Vec<f64> {
        let k = self.size();
        (0..k).map(|b| (0..k).map(|a| self.get(a, b)).sum()).collect()
    }

    /// `I(X;Y) = D_KL(P_XY ‖ P_X ⊗ P_Y)`, using this joint's own marginals.
    pub fn mutual_information(&self) -> f64 {
        let rows = self.row_marginal();
        let cols = self.col_marginal();
        let k = self.size();
        let mut total = 0.0;
        for a in 0..k {
            for b in 0..k {
                let p = self.get(a, b);
                if p > 0.0 {
                    total += p * (p / (rows[a] * cols[b])).ln();
                }
            }
        }
        total.max(0.0)
    }

    /// `D_KL(self ‖ other)`.
    pub fn kl_to(&self, other: &JointDist) -> Result<Divergence, InfoError> {
        if self.alphabet != other.alphabet {
            return Err(InfoError::AlphabetMismatch);
        }
        Ok(kl_from_probs(&self.mass, &other.mass))
    }
}

/// Plug-in MI of a `rows × cols` contingency table of counts.
/// Zero cells contribute nothing; an empty table has MI 0.
pub fn plugin_mutual_information(counts: &[u64], rows: usize, cols: usize) -> f64 {
    assert_eq!(counts.len(), rows * cols);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let mut row_sum = vec![0u64; rows];
    let mut col_sum = vec![0u64; cols];
    for a in 0..rows {
        for b in 0..cols {
            let c = counts[a * cols + b];
            row_sum[a] += c;
            col_sum[b] += c;
        }
    }
    let mut mi = 0.0;
    for a in 0..rows {
        for b in 0..cols {
            let c = counts[a * cols + b];
            if c > 0 {
                let c = c as f64;
                mi += (c / n) * ((c * n) / (row_sum[a] as f64 * col_sum[b] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn kl_examples() {
        let p = CategoricalDist::new(ab(), vec![1.0, 0.0]).unwrap();
        let q = CategoricalDist::new(ab(), vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), Divergence::Finite(0.0));
        // 1·log(1/0.5) + 0 = log 2
        let d = kl_divergence(&p, &q).unwrap().finite().unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        assert!(kl_divergence(&q, &p).unwrap().is_infinite());
    }

    #[test]
    fn alphabet_mismatch() {
        let p = CategoricalDist::new(ab(), vec![0.5, 0.5]).unwrap();
        let q = CategoricalDist::new(vec!["a".into(), "c".into()], vec![0.5, 0.5]).unwrap();
        assert_eq!(kl_divergence(&p, &q), Err(InfoError::AlphabetMismatch));
    }

    #[test]
    fn dist_validation() {
        assert!(matches!(
            CategoricalDist::new(ab(), vec![0.5, 0.6]),
            Err(InfoError::Mass(_))
        ));
        assert!(matches!(
            CategoricalDist::new(vec!["a".into(), "a".into()], vec![0.5, 0.5]),
            Err(InfoError::DuplicateSymbol(_))
        ));
        assert!(matches!(
            CategoricalDist::new(ab(), vec![-0.5, 1.5]),
            Err(InfoError::Mass(_))
        ));
    }

    #[test]
    fn entropy_of_uniform() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
    }

    #[test]
    fn product_joint_has_zero_mi() {
        let p = CategoricalDist::new(ab(), vec![0.3, 0.7]).unwrap();
        let j = JointDist::product(&p, &p).unwrap();
        assert!(j.mutual_information() < 1e-15);
    }

    #[test]
    fn plugin_mi_on_exact_counts() {
        // Counts proportional to the joint [[0.4, 0.1], [0.1, 0.4]].
        let counts = [400, 100, 100, 400];
        let closed_form = 0.4 * (0.4f64 / 0.25).ln() * 2.0 + 0.1 * (0.1f64 / 0.25).ln() * 2.0;
        assert!((plugin_mutual_information(&counts, 2, 2) - closed_form).abs() < 1e-14);
        assert_eq!(plugin_mutual_information(&[0, 0, 0, 0], 2, 2), 0.0);
    }
}
