//! The repeated-measurement process started from the maximally mixed state.
//!
//! Along outcomes `x_1, x_2, …` the operator `W_n = A_{x_n}⋯A_{x_1}` defines
//! `M_n = W_n†W_n / Tr(W_n†W_n)`, a density operator and a martingale with
//! `E(M_n) = 𝟙/D`. Under purity it converges to a rank-one projector.
//!
//! Trajectory `i` of a run with seed `s` draws from ChaCha8 seeded with `s`
//! on stream `i` (see [`crate::random::stream_rng`]), so runs are portable
//! and independent of thread count.

use rand::Rng;
use rayon::prelude::*;

use crate::enumerate::{map_products, ordered_sum};
use crate::error::{Error, Result};
use crate::matcore::{herm_eigenvalues, identity, trace, CMat};
use crate::mpschain::KrausFamily;
use crate::random::stream_rng;
use crate::restriction::MeasurementString;

/// Conditional weights below this are treated as zero.
pub const MIN_CONDITIONAL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq)]
pub struct MartingaleTrace {
    pub outcomes: MeasurementString,
    /// `M_1..M_N`, each with unit trace.
    pub m_ops: Vec<CMat>,
    /// `P(x_1..x_n)` for `n = 1..N`.
    pub probs: Vec<f64>,
}

impl MartingaleTrace {
    pub fn len(&self) -> usize {
        self.m_ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_ops.is_empty()
    }

    /// Eigenvalues of each `M_n`, non-increasing.
    pub fn spectra(&self) -> Vec<Vec<f64>> {
        self.m_ops.iter().map(herm_eigenvalues).collect()
    }
}

/// Unnormalized next-symbol weights `‖A_y W‖²_F`, zeroing relative weights
/// below [`MIN_CONDITIONAL`]. Returns the weights and their total.
fn next_weights(k: &KrausFamily, w: &CMat) -> (Vec<f64>, f64) {
    let raw: Vec<f64> = k.ops().iter().map(|a| (a * w).norm_squared()).collect();
    let total: f64 = raw.iter().sum();
    let kept: Vec<f64> = raw
        .into_iter()
        .map(|p| if p < MIN_CONDITIONAL * total { 0.0 } else { p })
        .collect();
    let total = kept.iter().sum();
    (kept, total)
}

fn unit_trace(w: &CMat) -> CMat {
    let m = w.adjoint() * w;
    let t = trace(&m).re;
    m.unscale(t)
}

/// One trajectory of length `n` drawn from `stream_rng(seed, 0)`.
pub fn sample_trajectory(k: &KrausFamily, n: usize, seed: u64) -> Result<MartingaleTrace> {
    sample_trajectory_stream(k, n, seed, 0)
}

/// Trajectory number `index` of the run with the given seed.
pub fn sample_trajectory_stream(
    k: &KrausFamily,
    n: usize,
    seed: u64,
    index: u64,
) -> Result<MartingaleTrace> {
    if n == 0 {
        return Err(Error::EmptyString);
    }
    let mut rng = stream_rng(seed, index);
    let dim = k.bond_dim();
    // W is kept at unit Frobenius norm; the path probability is tracked
    // separately as a product of conditionals
    let mut w = identity(dim).unscale((dim as f64).sqrt());
    let mut prob = 1.0;
    let mut outcomes = Vec::with_capacity(n);
    let mut m_ops = Vec::with_capacity(n);
    let mut probs = Vec::with_capacity(n);
    for _ in 0..n {
        let (weights, total) = next_weights(k, &w);
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        // the last positive weight absorbs round-off at the upper end
        let last = weights
            .iter()
            .rposition(|&p| p > 0.0)
            .ok_or(Error::ZeroProbabilityPath)?;
        let mut y = last;
        for (i, &p) in weights.iter().enumerate() {
            acc += p;
            if p > 0.0 && u < acc {
                y = i;
                break;
            }
        }
        prob *= weights[y] / total;
        w = k.op(y) * w;
        let norm = w.norm();
        w.unscale_mut(norm);
        outcomes.push(y);
        m_ops.push(unit_trace(&w));
        probs.push(prob);
    }
    Ok(MartingaleTrace {
        outcomes: MeasurementString::new(outcomes, k.d())?,
        m_ops,
        probs,
    })
}

/// Trajectories `0..count` of one run, in index order.
pub fn sample_trajectories(
    k: &KrausFamily,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<MartingaleTrace>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_trajectory_stream(k, n, seed, i))
        .collect()
}

/// Normalized `W` along `x`, failing on a zero-probability step.
fn normalized_path(k: &KrausFamily, x: &MeasurementString) -> Result<CMat> {
    let dim = k.bond_dim();
    let mut w = identity(dim).unscale((dim as f64).sqrt());
    for &s in x.symbols() {
        let (weights, _) = next_weights(k, &w);
        if weights.get(s).copied().unwrap_or(0.0) == 0.0 {
            return Err(Error::ZeroProbabilityPath);
        }
        w = k.op(s) * w;
        let norm = w.norm();
        w.unscale_mut(norm);
    }
    Ok(w)
}

/// `‖Σ_y P(y|x) M(x,y) − M(x)‖_F`, enumerating the next symbol.
pub fn martingale_step_check(k: &KrausFamily, x: &MeasurementString) -> Result<f64> {
    if let Some(&symbol) = x.symbols().iter().find(|&&s| s >= k.d()) {
        return Err(Error::SymbolOutOfRange { symbol, d: k.d() });
    }
    let w = normalized_path(k, x)?;
    let m = unit_trace(&w);
    let (weights, total) = next_weights(k, &w);
    let mut expect = CMat::zeros(m.nrows(), m.ncols());
    for (y, &p) in weights.iter().enumerate() {
        if p > 0.0 {
            expect += unit_trace(&(k.op(y) * &w)).scale(p / total);
        }
    }
    Ok((expect - m).norm())
}

/// `‖Σ_x P(x) M_n(x) − 𝟙/D‖_F` over all `dⁿ` strings.
pub fn mean_m_check(k: &KrausFamily, n: usize, guard: u64) -> Result<f64> {
    let dim = k.bond_dim();
    let terms = map_products(k.ops(), &identity(dim), n, guard, |_, w| {
        let g = w.adjoint() * w;
        let t = trace(&g).re;
        if t > 0.0 {
            // P(x) = t/D and M = g/t
            g.unscale(t).scale(t / dim as f64)
        } else {
            CMat::zeros(dim, dim)
        }
    })?;
    let mut mean = CMat::zeros(dim, dim);
    for t in terms {
        mean += t;
    }
    Ok((mean - identity(dim).unscale(dim as f64)).norm())
}

/// `D·E(√(λ₁λ₂(M_n)))` by enumeration; equals `w(n)`.
pub fn purification_statistic(k: &KrausFamily, n: usize, guard: u64) -> Result<f64> {
    let dim = k.bond_dim();
    if dim < 2 {
        return Ok(0.0);
    }
    let terms = map_products(k.ops(), &identity(dim), n, guard, |_, w| {
        let g = w.adjoint() * w;
        let t = trace(&g).re;
        if t <= 0.0 {
            return 0.0;
        }
        let ev = herm_eigenvalues(&g.unscale(t));
        let prob = t / dim as f64;
        prob * (ev[0].max(0.0) * ev[1].max(0.0)).sqrt()
    })?;
    Ok(dim as f64 * ordered_sum(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_GUARD;
    use crate::puritycert::{haar_kraus, w_value};
    use crate::zoo;
    use approx::assert_abs_diff_eq;

    fn families() -> Vec<KrausFamily> {
        vec![
            zoo::aklt(),
            zoo::aklt_pauli(),
            zoo::jordan(4).unwrap(),
            zoo::clock(3).unwrap(),
            zoo::markov(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap(),
            haar_kraus(3, 5, 11).unwrap(),
        ]
    }

    #[test]
    fn trace_invariants() {
        for k in families() {
            let tr = sample_trajectory(&k, 8, 5).unwrap();
            assert_eq!(tr.len(), 8);
            for (i, m) in tr.m_ops.iter().enumerate() {
                assert_abs_diff_eq!(trace(m).re, 1.0, epsilon = 1e-10);
                assert!(herm_eigenvalues(m).last().unwrap() > &-1e-10);
                // path probability from the explicit product
                let w = k.product(&tr.outcomes.symbols()[..=i]).unwrap();
                let p = (w.adjoint() * &w).trace().re / k.bond_dim() as f64;
                assert_abs_diff_eq!(tr.probs[i], p, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let k = haar_kraus(3, 4, 1).unwrap();
        assert_eq!(
            sample_trajectory(&k, 20, 9).unwrap(),
            sample_trajectory(&k, 20, 9).unwrap()
        );
        let a = sample_trajectories(&k, 6, 16, 3).unwrap();
        let b: Vec<_> = (0..16)
            .map(|i| sample_trajectory_stream(&k, 6, 3, i).unwrap())
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn examples() {
        let markov = zoo::markov(&[vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        for m in sample_trajectory(&markov, 6, 2).unwrap().spectra() {
            assert!(m[1].abs() < 1e-12);
        }
        let clock = zoo::clock(3).unwrap();
        for m in sample_trajectory(&clock, 6, 2).unwrap().m_ops {
            assert!((m - identity(3).unscale(3.0)).norm() < 1e-12);
        }
        // AKLT: M_n has rank two exactly on the all-zero string
        let aklt = zoo::aklt();
        for i in 0..50 {
            let tr = sample_trajectory_stream(&aklt, 4, 1, i).unwrap();
            for (step, ev) in tr.spectra().iter().enumerate() {
                let all_zero = tr.outcomes.symbols()[..=step].iter().all(|&s| s == 0);
                assert_eq!(ev[1] > 1e-12, all_zero);
            }
        }
    }

    #[test]
    fn forbidden_branches_are_never_sampled() {
        let aklt = zoo::aklt();
        for i in 0..200 {
            let tr = sample_trajectory_stream(&aklt, 6, 0, i).unwrap();
            assert!(tr.probs.iter().all(|&p| p > 0.0));
        }
        let x = MeasurementString::new(vec![1, 1], 3).unwrap();
        assert!(matches!(
            martingale_step_check(&aklt, &x),
            Err(Error::ZeroProbabilityPath)
        ));
    }

    #[test]
    fn martingale_step() {
        for k in families() {
            for i in 0..10 {
                let tr = sample_trajectory_stream(&k, 5, 4, i).unwrap();
                for len in 1..=5 {
                    let x = MeasurementString::new(tr.outcomes.symbols()[..len].to_vec(), k.d())
                        .unwrap();
                    assert!(martingale_step_check(&k, &x).unwrap() <= 1e-10);
                }
            }
        }
        let x = MeasurementString::new(vec![0, 0], 3).unwrap();
        assert!(martingale_step_check(&zoo::aklt(), &x).unwrap() <= 1e-12);
    }

    #[test]
    fn mean_and_purification() {
        for k in families() {
            for n in 1..=4 {
                assert!(mean_m_check(&k, n, DEFAULT_GUARD).unwrap() <= 1e-10);
                let s = purification_statistic(&k, n, DEFAULT_GUARD).unwrap();
                assert_abs_diff_eq!(s, w_value(&k, n, DEFAULT_GUARD).unwrap(), epsilon = 1e-9);
            }
        }
        let s = purification_statistic(&zoo::aklt_pauli(), 3, DEFAULT_GUARD).unwrap();
        assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
        let s = purification_statistic(&zoo::aklt(), 3, DEFAULT_GUARD).unwrap();
        assert_abs_diff_eq!(s, 1.0 / 27.0, epsilon = 1e-12);
    }
}
