//! Transport plans between two clouds of `n` points each: permutations (the
//! vertices of the Birkhoff polytope, scaled so every row and column sums to
//! one) and general doubly stochastic couplings.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GwError, Result};
use crate::tol;

/// A bijection `i -> perm[i]` matching point `i` of the first cloud to point
/// `perm[i]` of the second.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    map: Vec<usize>,
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = GwError;

    fn try_from(map: Vec<usize>) -> Result<Self> {
        Permutation::new(map)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.map
    }
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &j in &map {
            if j >= n {
                return Err(GwError::InvalidPermutation(format!(
                    "index {j} out of range for n = {n}"
                )));
            }
            if seen[j] {
                return Err(GwError::InvalidPermutation(format!("index {j} repeated")));
            }
            seen[j] = true;
        }
        Ok(Permutation { map })
    }

    #[must_use]
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut map: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            map.swap(i, j);
        }
        Permutation { map }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.map.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[must_use]
    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    #[must_use]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    #[must_use]
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Permutation { map: inv }
    }

    /// The corresponding permutation matrix as a dense coupling.
    #[must_use]
    pub fn to_coupling(&self) -> Coupling {
        let n = self.map.len();
        let mut plan = Array2::zeros((n, n));
        for (i, &j) in self.map.iter().enumerate() {
            plan[[i, j]] = 1.0;
        }
        Coupling { n, plan }
    }
}

/// A doubly stochastic matrix: nonnegative entries, every row and every
/// column summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    n: usize,
    plan: Array2<f64>,
}

impl Coupling {
    /// Validates double stochasticity within `tau` (absolute slack on each
    /// row/column sum and entrywise nonnegativity).
    pub fn from_matrix(plan: Array2<f64>, tau: f64) -> Result<Self> {
        let (rows, cols) = plan.dim();
        if rows != cols {
            return Err(GwError::InvalidCoupling(format!(
                "matrix is {rows}x{cols}, expected square"
            )));
        }
        if rows == 0 {
            return Err(GwError::InvalidCoupling("empty matrix".into()));
        }
        for ((i, j), &v) in plan.indexed_iter() {
            if !v.is_finite() || v < -tau {
                return Err(GwError::InvalidCoupling(format!(
                    "entry ({i}, {j}) = {v} is negative or non-finite"
                )));
            }
        }
        for i in 0..rows {
            let rs: f64 = plan.row(i).sum();
            if (rs - 1.0).abs() > tau {
                return Err(GwError::InvalidCoupling(format!("row {i} sums to {rs}")));
            }
            let cs: f64 = plan.column(i).sum();
            if (cs - 1.0).abs() > tau {
                return Err(GwError::InvalidCoupling(format!("column {i} sums to {cs}")));
            }
        }
        Ok(Coupling { n: rows, plan })
    }

    /// The max-entropy coupling with all entries `1/n`.
    #[must_use]
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "empty coupling");
        Coupling {
            n,
            plan: Array2::from_elem((n, n), 1.0 / n as f64),
        }
    }

    /// Convex combination of `k` uniformly random permutation matrices with
    /// uniformly random simplex weights; doubly stochastic by construction.
    pub fn random_mixture<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        assert!(n > 0 && k > 0, "empty mixture");
        // Exponential spacings normalize to a uniform point on the simplex.
        let mut weights: Vec<f64> = (0..k)
            .map(|_| -(1.0 - rng.random::<f64>()).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let mut plan = Array2::zeros((n, n));
        for &w in &weights {
            let perm = Permutation::random(n, rng);
            for (i, &j) in perm.as_slice().iter().enumerate() {
                plan[[i, j]] += w;
            }
        }
        Coupling { n, plan }
    }

    #[must_use]
    pub fn n(&self) -> usize {
        self.n
    }

    #[must_use]
    pub fn plan(&self) -> ArrayView2<'_, f64> {
        self.plan.view()
    }

    /// Largest deviation of any row/column sum from one (diagnostic).
    #[must_use]
    pub fn marginal_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            worst = worst.max((self.plan.row(i).sum() - 1.0).abs());
            worst = worst.max((self.plan.column(i).sum() - 1.0).abs());
        }
        worst
    }

    /// Returns the permutation if this coupling is a 0/1 matrix (within
    /// [`tol::MARGINAL`]).
    #[must_use]
    pub fn as_permutation(&self) -> Option<Permutation> {
        let mut map = vec![usize::MAX; self.n];
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.plan[[i, j]];
                if (v - 1.0).abs() <= tol::MARGINAL {
                    if map[i] != usize::MAX {
                        return None;
                    }
                    map[i] = j;
                } else if v.abs() > tol::MARGINAL {
                    return None;
                }
            }
            if map[i] == usize::MAX {
                return None;
            }
        }
        Permutation::new(map).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn permutation_validates() {
        assert!(Permutation::new(vec![1, 0, 2]).is_ok());
        assert!(Permutation::new(vec![1, 1, 2]).is_err());
        assert!(Permutation::new(vec![3, 0, 1]).is_err());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        let inv = p.inverse();
        for i in 0..4 {
            assert_eq!(inv.apply(p.apply(i)), i);
        }
    }

    #[test]
    fn permutation_coupling_has_unit_marginals() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        let c = p.to_coupling();
        assert_eq!(c.marginal_residual(), 0.0);
        assert_eq!(c.as_permutation().unwrap(), p);
    }

    #[test]
    fn uniform_is_doubly_stochastic() {
        let c = Coupling::uniform(7);
        assert!(c.marginal_residual() <= 1e-12);
        assert!(c.as_permutation().is_none());
    }

    #[test]
    fn random_mixture_is_doubly_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for k in 1..6 {
            let c = Coupling::random_mixture(9, k, &mut rng);
            assert!(c.marginal_residual() <= 1e-12, "k = {k}");
            assert!(Coupling::from_matrix(c.plan.clone(), 1e-9).is_ok());
        }
    }

    #[test]
    fn random_permutation_is_deterministic_per_seed() {
        let a = Permutation::random(20, &mut ChaCha8Rng::seed_from_u64(7));
        let b = Permutation::random(20, &mut ChaCha8Rng::seed_from_u64(7));
        assert_eq!(a, b);
    }

    #[test]
    fn from_matrix_rejects_bad_input() {
        let bad = Array2::from_elem((2, 3), 0.5);
        assert!(Coupling::from_matrix(bad, 1e-9).is_err());
        let neg = Array2::from_shape_vec((2, 2), vec![1.1, -0.1, -0.1, 1.1]).unwrap();
        assert!(Coupling::from_matrix(neg, 1e-9).is_err());
        let bad_rows = Array2::from_elem((2, 2), 0.4);
        assert!(Coupling::from_matrix(bad_rows, 1e-9).is_err());
    }
}
