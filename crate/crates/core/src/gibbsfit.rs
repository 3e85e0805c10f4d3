//! Local Gibbs reconstruction of chain distributions.
//!
//! For a strictly positive distribution `p` on `len` sites the window
//! Hamiltonians `h_{j..k} = −ln p_{j..k}` combine into
//! `h^ℓ = Σ_{j=1}^{len−ℓ} h_{j..j+ℓ} − Σ_{j=1}^{len−ℓ−1} h_{j+1..j+ℓ}`.
//! Its Gibbs distribution has unit partition function, and `S(p‖p^ℓ)` equals
//! the sum of the conditional mutual informations that the truncation
//! discards.
//!
//! Sites are 1-based in the public API. Tables are indexed with `x_1` as the
//! most significant digit.

use crate::error::{Error, Result};
use crate::matcore::{shannon_entropy, ProbVec};

/// Weight given to the uniform distribution by [`ChainDistribution::smoothed`]
/// when callers want the conventional repair.
pub const DEFAULT_SMOOTHING: f64 = 1e-8;

/// Probability table over `d^len` strings.
///
/// Zero entries are allowed here; operations that need strict positivity
/// check for it and report [`Error::NonPositiveMarginal`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDistribution {
    len: usize,
    d: usize,
    table: Vec<f64>,
}

impl ChainDistribution {
    pub fn new(len: usize, d: usize, table: Vec<f64>) -> Result<Self> {
        if len == 0 || d == 0 {
            return Err(Error::InvalidDistribution {
                reason: "chain must have at least one site and one symbol".into(),
            });
        }
        let expected = crate::enumerate::string_count(d, len);
        if expected != table.len() as u128 {
            return Err(Error::InvalidDistribution {
                reason: format!("table has {} entries, expected {expected}", table.len()),
            });
        }
        let table = ProbVec::new(table)?.into_inner();
        Ok(Self { len, d, table })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Never true; a chain has at least one site.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn min_entry(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.min_entry() > 0.0
    }

    /// `(1−ε)·p + ε·uniform`
    pub fn smoothed(&self, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::OutOfRange { value: eps });
        }
        let u = 1.0 / self.table.len() as f64;
        let mixed: Vec<f64> = self
            .table
            .iter()
            .map(|p| (1.0 - eps) * p + eps * u)
            .collect();
        let total: f64 = mixed.iter().sum();
        Self::new(
            self.len,
            self.d,
            mixed.into_iter().map(|p| p / total).collect(),
        )
    }

    fn check_range(&self, j: usize, k: usize) -> Result<()> {
        if j < 1 || j > k || k > self.len {
            return Err(Error::RangeError {
                j,
                k,
                len: self.len,
            });
        }
        Ok(())
    }

    /// Marginal on sites `j..=k` (1-based), indexed with `x_j` most significant.
    pub fn marginal(&self, j: usize, k: usize) -> Result<ProbVec> {
        self.check_range(j, k)?;
        let width = self.d.pow((k - j + 1) as u32);
        let tail = self.d.pow((self.len - k) as u32);
        let mut out = vec![0.0; width];
        for (idx, &p) in self.table.iter().enumerate() {
            out[(idx / tail) % width] += p;
        }
        // sums of a valid table stay within the ProbVec tolerance
        ProbVec::new(out)
    }

    /// `H(p_{j..k})`; zero for an empty range `j > k`.
    pub fn block_entropy(&self, j: usize, k: usize) -> Result<f64> {
        if j > k {
            return Ok(0.0);
        }
        Ok(shannon_entropy(&self.marginal(j, k)?))
    }
}

/// Window terms of `h^ℓ`, stored as `−ln` of the source marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalHamiltonian {
    len: usize,
    d: usize,
    ell: usize,
    /// `window_terms[j−1] = h_{j..j+ℓ}` for `j = 1..len−ℓ`.
    window_terms: Vec<Vec<f64>>,
    /// `overlap_terms[j−1] = h_{j+1..j+ℓ}` for `j = 1..len−ℓ−1`.
    overlap_terms: Vec<Vec<f64>>,
}

impl LocalHamiltonian {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn window_terms(&self) -> &[Vec<f64>] {
        &self.window_terms
    }

    pub fn overlap_terms(&self) -> &[Vec<f64>] {
        &self.overlap_terms
    }

    /// `h^ℓ(x)` for the string with table index `idx`.
    pub fn energy(&self, idx: usize) -> f64 {
        let d = self.d;
        let window = d.pow((self.ell + 1) as u32);
        let overlap = d.pow(self.ell as u32);
        let mut h = 0.0;
        for (j0, term) in self.window_terms.iter().enumerate() {
            // sites j0+1 ..= j0+ℓ+1
            let tail = d.pow((self.len - (j0 + self.ell + 1)) as u32);
            h += term[(idx / tail) % window];
        }
        for (j0, term) in self.overlap_terms.iter().enumerate() {
            // sites j0+2 ..= j0+ℓ+1
            let tail = d.pow((self.len - (j0 + self.ell + 1)) as u32);
            h -= term[(idx / tail) % overlap];
        }
        h
    }
}

fn check_ell(len: usize, ell: usize) -> Result<()> {
    let max = len.saturating_sub(2);
    if ell < 1 || ell > max {
        return Err(Error::EllOutOfRange { ell, max });
    }
    Ok(())
}

fn neg_log_marginal(p: &ChainDistribution, j: usize, k: usize) -> Result<Vec<f64>> {
    let m = p.marginal(j, k)?;
    if m.weights().iter().any(|&w| w <= 0.0) {
        return Err(Error::NonPositiveMarginal { j, k });
    }
    Ok(m.weights().iter().map(|w| -w.ln()).collect())
}

/// Builds `h^ℓ` from the marginals of `p`.
pub fn local_hamiltonian(p: &ChainDistribution, ell: usize) -> Result<LocalHamiltonian> {
    check_ell(p.len, ell)?;
    let windows = (1..=p.len - ell)
        .map(|j| neg_log_marginal(p, j, j + ell))
        .collect::<Result<Vec<_>>>()?;
    let overlaps = (1..p.len - ell)
        .map(|j| neg_log_marginal(p, j + 1, j + ell))
        .collect::<Result<Vec<_>>>()?;
    Ok(LocalHamiltonian {
        len: p.len,
        d: p.d,
        ell,
        window_terms: windows,
        overlap_terms: overlaps,
    })
}

fn energies(h: &LocalHamiltonian) -> Vec<f64> {
    (0..h.d.pow(h.len as u32))
        .map(|idx| h.energy(idx))
        .collect()
}

fn log_sum_exp_neg(values: &[f64]) -> f64 {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = values.iter().map(|h| (min - h).exp()).sum();
    -min + s.ln()
}

/// `ln Z(h) = ln Σ_x e^{−h(x)}`, evaluated with a shifted exponent.
pub fn log_partition_function(h: &LocalHamiltonian) -> f64 {
    log_sum_exp_neg(&energies(h))
}

/// `Z(h)`
pub fn partition_function(h: &LocalHamiltonian) -> f64 {
    log_partition_function(h).exp()
}

/// `p^ℓ(x) = e^{−h(x)} / Z`
pub fn gibbs_distribution(h: &LocalHamiltonian) -> Result<ChainDistribution> {
    let e = energies(h);
    let log_z = log_sum_exp_neg(&e);
    ChainDistribution::new(h.len, h.d, e.iter().map(|v| (-v - log_z).exp()).collect())
}

/// `S(p1‖p2) = Σ p1 ln(p1/p2)`
pub fn relative_entropy(p1: &ChainDistribution, p2: &ChainDistribution) -> Result<f64> {
    if p1.len != p2.len || p1.d != p2.d {
        return Err(Error::ShapeMismatch {
            expected: (p1.len, p1.d),
            found: (p2.len, p2.d),
        });
    }
    let mut s = 0.0;
    for (&a, &b) in p1.table.iter().zip(&p2.table) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            return Err(Error::InvalidDistribution {
                reason: "reference distribution vanishes on the support".into(),
            });
        }
        s += a * (a / b).ln();
    }
    Ok(s)
}

/// `I(1..k : k+ℓ+1 | k+1..k+ℓ)` for `k = 1..len−ℓ−1`.
pub fn cmi_terms(p: &ChainDistribution, ell: usize) -> Result<Vec<f64>> {
    check_ell(p.len, ell)?;
    (1..p.len - ell)
        .map(|k| {
            Ok(
                p.block_entropy(1, k + ell)? + p.block_entropy(k + 1, k + ell + 1)?
                    - p.block_entropy(k + 1, k + ell)?
                    - p.block_entropy(1, k + ell + 1)?,
            )
        })
        .collect()
}

/// Both sides of `S(p‖p^ℓ) = Σ_k I(1..k : k+ℓ+1 | k+1..k+ℓ)`.
pub fn cmi_decomposition_check(p: &ChainDistribution, ell: usize) -> Result<(f64, f64)> {
    let h = local_hamiltonian(p, ell)?;
    let lhs = relative_entropy(p, &gibbs_distribution(&h)?)?;
    let rhs = cmi_terms(p, ell)?.iter().sum();
    Ok((lhs, rhs))
}

/// Checks that every discarded CMI is at most `xi(ℓ)` and that
/// `S(p‖p^ℓ) ≤ (len−ℓ−1)·xi(ℓ)`. Both must hold.
pub fn tail_bound_check(
    p: &ChainDistribution,
    ell: usize,
    xi: impl Fn(usize) -> f64,
) -> Result<bool> {
    let bound = xi(ell);
    let slack = 1e-12;
    let premise = cmi_terms(p, ell)?.iter().all(|&i| i <= bound + slack);
    let (lhs, _) = cmi_decomposition_check(p, ell)?;
    let conclusion = lhs <= (p.len - ell - 1) as f64 * bound + slack;
    Ok(premise && conclusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::seeded_rng;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn random_positive(len: usize, d: usize, seed: u64) -> ChainDistribution {
        let mut rng = seeded_rng(seed);
        let raw: Vec<f64> = (0..d.pow(len as u32))
            .map(|_| rng.random::<f64>() + 0.05)
            .collect();
        let total: f64 = raw.iter().sum();
        ChainDistribution::new(len, d, raw.iter().map(|v| v / total).collect()).unwrap()
    }

    fn markov_chain(len: usize, init: [f64; 2], trans: [[f64; 2]; 2]) -> ChainDistribution {
        let table = (0..1usize << len)
            .map(|idx| {
                let bits: Vec<usize> = (0..len).map(|i| (idx >> (len - 1 - i)) & 1).collect();
                let mut p = init[bits[0]];
                for w in bits.windows(2) {
                    p *= trans[w[0]][w[1]];
                }
                p
            })
            .collect();
        ChainDistribution::new(len, 2, table).unwrap()
    }

    fn product(len: usize, px: [f64; 2]) -> ChainDistribution {
        markov_chain(len, px, [px, px])
    }

    #[test]
    fn marginal_examples() {
        let p = random_positive(4, 2, 1);
        assert_eq!(p.marginal(1, 4).unwrap().weights(), p.table());
        let u = ChainDistribution::new(3, 2, vec![0.125; 8]).unwrap();
        assert_eq!(u.marginal(2, 3).unwrap().weights(), &[0.25; 4]);

        let eps = 1e-3;
        let mut table = vec![eps; 8];
        table[0] = 0.5 - 3.0 * eps;
        table[7] = 0.5 - 3.0 * eps;
        let p = ChainDistribution::new(3, 2, table).unwrap();
        let m = p.marginal(2, 3).unwrap();
        let expect = [0.5 - 2.0 * eps, 2.0 * eps, 2.0 * eps, 0.5 - 2.0 * eps];
        for (a, b) in m.weights().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(matches!(p.marginal(0, 2), Err(Error::RangeError { .. })));
        assert!(matches!(p.marginal(3, 2), Err(Error::RangeError { .. })));
        assert!(matches!(p.marginal(1, 4), Err(Error::RangeError { .. })));
    }

    #[test]
    fn product_hamiltonian_is_pointwise_exact() {
        let p = product(4, [0.3, 0.7]);
        for ell in 1..=2 {
            let h = local_hamiltonian(&p, ell).unwrap();
            for idx in 0..16 {
                assert_abs_diff_eq!(h.energy(idx), -p.table()[idx].ln(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn window_terms_are_negative_log_marginals() {
        let p = random_positive(5, 2, 2);
        let h = local_hamiltonian(&p, 2).unwrap();
        assert_eq!(h.window_terms().len(), 3);
        assert_eq!(h.overlap_terms().len(), 2);
        for (j0, term) in h.window_terms().iter().enumerate() {
            let m = p.marginal(j0 + 1, j0 + 3).unwrap();
            for (t, w) in term.iter().zip(m.weights()) {
                assert_abs_diff_eq!(*t, -w.ln(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn markov_chain_is_two_local_gibbs() {
        let p = markov_chain(6, [0.4, 0.6], [[0.9, 0.1], [0.35, 0.65]]);
        for ell in 1..=4 {
            let h = local_hamiltonian(&p, ell).unwrap();
            let q = gibbs_distribution(&h).unwrap();
            assert!(relative_entropy(&p, &q).unwrap() <= 1e-10);
            for (a, b) in p.table().iter().zip(q.table()) {
                assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn partition_function_is_one() {
        for seed in 0..5 {
            let p = random_positive(6, 2, seed);
            for ell in 1..=4 {
                let h = local_hamiltonian(&p, ell).unwrap();
                assert_abs_diff_eq!(partition_function(&h), 1.0, epsilon = 1e-9);
            }
        }
        let u = ChainDistribution::new(4, 3, vec![1.0 / 81.0; 81]).unwrap();
        let q = gibbs_distribution(&local_hamiltonian(&u, 1).unwrap()).unwrap();
        for v in q.table() {
            assert_abs_diff_eq!(*v, 1.0 / 81.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn relative_entropy_examples() {
        let p1 = ChainDistribution::new(1, 2, vec![0.9, 0.1]).unwrap();
        let p2 = ChainDistribution::new(1, 2, vec![0.5, 0.5]).unwrap();
        assert_eq!(relative_entropy(&p1, &p1).unwrap(), 0.0);
        let forward = relative_entropy(&p1, &p2).unwrap();
        let oracle = 0.9 * (0.9_f64 / 0.5).ln() + 0.1 * (0.1_f64 / 0.5).ln();
        assert_abs_diff_eq!(forward, oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(forward, 0.368064, epsilon = 1e-6);
        let backward = relative_entropy(&p2, &p1).unwrap();
        assert!((forward - backward).abs() > 0.1);
        let p3 = ChainDistribution::new(2, 2, vec![0.25; 4]).unwrap();
        assert!(matches!(
            relative_entropy(&p1, &p3),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn decomposition_identity() {
        let p = product(5, [0.2, 0.8]);
        let (lhs, rhs) = cmi_decomposition_check(&p, 2).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs, 0.0, epsilon = 1e-12);
        for seed in 0..10 {
            let p = random_positive(6, 2, 100 + seed);
            let (lhs, rhs) = cmi_decomposition_check(&p, 2).unwrap();
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-10);
        }
    }

    #[test]
    fn widest_window_leaves_one_term() {
        let p = random_positive(5, 2, 7);
        let ell = 3;
        let terms = cmi_terms(&p, ell).unwrap();
        assert_eq!(terms.len(), 1);
        // I(1 : 5 | 2..4)
        let i = p.block_entropy(1, 4).unwrap() + p.block_entropy(2, 5).unwrap()
            - p.block_entropy(2, 4).unwrap()
            - p.block_entropy(1, 5).unwrap();
        assert_abs_diff_eq!(terms[0], i, epsilon = 1e-15);
        let (lhs, _) = cmi_decomposition_check(&p, ell).unwrap();
        assert_abs_diff_eq!(lhs, i, epsilon = 1e-10);
    }

    #[test]
    fn positivity_and_range_checks() {
        let mut table = vec![0.25; 4];
        table.extend([0.0; 4]);
        let p = ChainDistribution::new(3, 2, table).unwrap();
        assert!(!p.is_strictly_positive());
        assert!(matches!(
            local_hamiltonian(&p, 1),
            Err(Error::NonPositiveMarginal { .. })
        ));
        let s = p.smoothed(DEFAULT_SMOOTHING).unwrap();
        assert!(s.is_strictly_positive());
        assert!(local_hamiltonian(&s, 1).is_ok());
        assert!(matches!(
            local_hamiltonian(&s, 2),
            Err(Error::EllOutOfRange { .. })
        ));
        assert!(matches!(
            local_hamiltonian(&s, 0),
            Err(Error::EllOutOfRange { .. })
        ));
    }

    #[test]
    fn tail_bound_examples() {
        let p = random_positive(6, 2, 3);
        assert!(tail_bound_check(&p, 2, |_| 10.0).unwrap());
        let q = product(6, [0.4, 0.6]);
        assert!(tail_bound_check(&q, 1, |_| 0.0).unwrap());
        let terms = cmi_terms(&p, 1).unwrap();
        let smallest = terms.iter().copied().fold(f64::INFINITY, f64::min);
        if terms.iter().any(|&t| t > smallest + 1e-9) {
            assert!(!tail_bound_check(&p, 1, |_| smallest).unwrap());
        }
    }
}
