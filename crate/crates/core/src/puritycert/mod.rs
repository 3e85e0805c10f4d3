//! Certificates for the purity condition.
//!
//! A family is pure when no projector of rank ≥ 2 satisfies
//! `P A_{x_1}†⋯A_{x_n}† A_{x_n}⋯A_{x_1} P ∝ P` for every string of every
//! length. Two finite certificates are offered:
//!
//! * the span test: once the products `W†W` at some length span all of
//!   `L(C^D)`, no such projector exists (sufficient only);
//! * the correctable-subspace search, which bounds the largest surviving
//!   projector rank at each length from below and above.
//!
//! The decay series `w(n)` and `f(n)` and the typicality constructions live
//! in the submodules.

mod decay;
mod typicality;

pub use decay::{
    estimate_rate, f_series, submultiplicativity_violations, w_series, w_value, w_value_exterior,
    DecaySeries, ZERO_FLOOR,
};
pub use typicality::{
    build_r_operator, constructive_purity_family, constructive_q_set, constructive_strings,
    haar_kraus,
};

use std::fmt::Write as _;

use crate::enumerate::map_products;
use crate::error::{Error, Result};
use crate::matcore::{
    gram_rank, herm_eigen, herm_eigenvalues, identity, operator_norm, trace, CMat,
};
use crate::mpschain::KrausFamily;

/// Relative threshold for the Gram rank in the span test.
pub const SPAN_RANK_TOL: f64 = 1e-10;

/// Nodes visited by one correctable-subspace search before giving up.
pub const DEFAULT_SEARCH_BUDGET: usize = 1_000_000;

/// Eigenvalues of a compression closer than this (relative) share a branch.
const CLUSTER_TOL: f64 = 1e-8;

/// All `dⁿ` operators `W†W`, in lexicographic string order.
pub fn product_set(k: &KrausFamily, n: usize, guard: u64) -> Result<Vec<CMat>> {
    map_products(k.ops(), &identity(k.bond_dim()), n, guard, |_, w| {
        w.adjoint() * w
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpanTest {
    /// Least length whose products span `L(C^D)`.
    pub passed_at: Option<usize>,
    /// Gram rank at lengths `1, 2, …`; stops at the first pass.
    pub ranks: Vec<usize>,
}

/// Gram rank of the product set for `n = 1..=n_max`, stopping at rank `D²`.
pub fn span_purity_test(k: &KrausFamily, n_max: usize, guard: u64) -> Result<SpanTest> {
    let full = k.bond_dim() * k.bond_dim();
    let mut ranks = Vec::new();
    for n in 1..=n_max {
        let rank = gram_rank(&product_set(k, n, guard)?, SPAN_RANK_TOL)?;
        ranks.push(rank);
        if rank == full {
            return Ok(SpanTest {
                passed_at: Some(n),
                ranks,
            });
        }
    }
    Ok(SpanTest {
        passed_at: None,
        ranks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectableLevel {
    pub n: usize,
    /// Rank of the best projector found by the search.
    pub max_rank: usize,
    /// No projector of larger rank can pass, by eigenvalue interlacing.
    pub upper_bound: usize,
    pub projector: CMat,
    /// `max_M ‖PMP − (Tr(PMP)/r)P‖ / ‖M‖` for the reported projector.
    pub proportionality_residual: f64,
}

impl CorrectableLevel {
    /// The search result is provably the maximum.
    pub fn certified(&self) -> bool {
        self.max_rank == self.upper_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectableReport {
    pub tol: f64,
    pub levels: Vec<CorrectableLevel>,
}

impl CorrectableReport {
    pub fn ranks(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.max_rank).collect()
    }
}

fn is_scalar(c: &CMat, tol: f64, scale: f64) -> bool {
    let r = c.nrows();
    if r <= 1 {
        return true;
    }
    let mean = trace(c) / num_complex::Complex64::new(r as f64, 0.0);
    let dev = c - identity(r) * mean;
    dev.norm() <= tol * scale
}

struct Search<'a> {
    ms: &'a [CMat],
    norms: Vec<f64>,
    tol: f64,
    best_rank: usize,
    best_basis: Option<CMat>,
    nodes: usize,
    budget: usize,
}

impl Search<'_> {
    fn run(&mut self, basis: CMat, start: usize) -> Result<()> {
        let r = basis.ncols();
        if r <= self.best_rank {
            return Ok(());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::SearchBudgetExceeded {
                budget: self.budget,
            });
        }
        for i in start..self.ms.len() {
            let c = basis.adjoint() * &self.ms[i] * &basis;
            if is_scalar(&c, self.tol, self.norms[i]) {
                continue;
            }
            // a passing subspace of V is spanned within one eigenspace of the
            // compression in the typical case; branch largest first
            let spec = herm_eigen(&c, 1e-8)?;
            let vecs = spec.vectors.as_ref().expect("herm_eigen returns vectors");
            let gap = CLUSTER_TOL * self.norms[i].max(f64::MIN_POSITIVE);
            let mut clusters: Vec<Vec<usize>> = Vec::new();
            for (idx, &v) in spec.values.iter().enumerate() {
                match clusters.last_mut() {
                    Some(cl) if spec.values[*cl.last().unwrap()] - v <= gap => cl.push(idx),
                    _ => clusters.push(vec![idx]),
                }
            }
            clusters.sort_by_key(|cl| std::cmp::Reverse(cl.len()));
            for cl in clusters {
                let sub = CMat::from_fn(r, cl.len(), |row, col| vecs[(row, cl[col])]);
                self.run(&basis * sub, i + 1)?;
            }
            return Ok(());
        }
        self.best_rank = r;
        self.best_basis = Some(basis);
        Ok(())
    }
}

/// Largest `r` compatible with two necessary conditions.
///
/// If `PMP = c_M P` with rank `r`, the `r` Ritz values of `M` all equal
/// `c_M`, and interlacing forces `λ_{D−r+1}(M) ≤ c_M ≤ λ_r(M)` for every
/// constraint. Completeness of the length-`n` products gives `Σ c_M = 1`,
/// so some `c_M > 0`, and that `M` has `λ_r(M) > 0`.
fn interlacing_bound(all: &[CMat], top: &[CMat], dim: usize, tol: f64) -> usize {
    let spectra = |ms: &[CMat]| -> Vec<(Vec<f64>, f64)> {
        ms.iter()
            .map(|m| (herm_eigenvalues(m), operator_norm(m)))
            .collect()
    };
    let all = spectra(all);
    let top = spectra(top);
    (1..=dim)
        .rev()
        .find(|&r| {
            all.iter()
                .all(|(ev, norm)| ev[dim - r] - ev[r - 1] <= tol * norm + 1e-15)
                && top.iter().any(|(ev, norm)| ev[r - 1] > tol * norm)
        })
        .unwrap_or(1)
}

fn proportionality_residual(ms: &[CMat], p: &CMat) -> f64 {
    let r = trace(p).re.round().max(1.0);
    ms.iter()
        .map(|m| {
            let pmp = p * m * p;
            let mean = trace(&pmp) / num_complex::Complex64::new(r, 0.0);
            let norm = operator_norm(m);
            if norm == 0.0 {
                0.0
            } else {
                (pmp - p * mean).norm() / norm
            }
        })
        .fold(0.0, f64::max)
}

/// Correctable-subspace ranks for lengths `1..=n_max`.
///
/// Level `n` is searched over the products of every length up to `n`. The
/// constraints at length `n` already imply those at shorter lengths (sum
/// over the last symbol), so the optimum is unchanged. Putting the shorter
/// products first only makes the pruning cheaper.
pub fn correctable_subspace(
    k: &KrausFamily,
    n_max: usize,
    tol: f64,
    guard: u64,
) -> Result<CorrectableReport> {
    correctable_subspace_with_budget(k, n_max, tol, guard, DEFAULT_SEARCH_BUDGET)
}

pub fn correctable_subspace_with_budget(
    k: &KrausFamily,
    n_max: usize,
    tol: f64,
    guard: u64,
    budget: usize,
) -> Result<CorrectableReport> {
    let dim = k.bond_dim();
    let mut ms: Vec<CMat> = Vec::new();
    let mut levels = Vec::with_capacity(n_max);
    let mut previous: Option<CMat> = None;
    for n in 1..=n_max {
        let top = product_set(k, n, guard)?;
        ms.extend(top.iter().cloned());
        let norms = ms.iter().map(operator_norm).collect();
        let mut search = Search {
            ms: &ms,
            norms,
            tol,
            best_rank: 0,
            best_basis: None,
            nodes: 0,
            budget,
        };
        // warm start: the previous level's projector, when it still passes
        if let Some(p) = &previous {
            let basis = orthonormal_range(p);
            if basis.ncols() > 0 && is_feasible(&ms, &search.norms, &basis, tol) {
                search.best_rank = basis.ncols();
                search.best_basis = Some(basis);
            }
        }
        search.run(identity(dim), 0)?;
        let basis = search
            .best_basis
            .take()
            .expect("every one-dimensional subspace passes");
        let projector = &basis * basis.adjoint();
        let upper = interlacing_bound(&ms, &top, dim, tol).max(search.best_rank);
        levels.push(CorrectableLevel {
            n,
            max_rank: search.best_rank,
            upper_bound: upper,
            proportionality_residual: proportionality_residual(&ms, &projector),
            projector: projector.clone(),
        });
        previous = Some(projector);
    }
    Ok(CorrectableReport { tol, levels })
}

fn is_feasible(ms: &[CMat], norms: &[f64], basis: &CMat, tol: f64) -> bool {
    ms.iter()
        .zip(norms)
        .all(|(m, &norm)| is_scalar(&(basis.adjoint() * m * basis), tol, norm))
}

fn orthonormal_range(p: &CMat) -> CMat {
    let spec = herm_eigen(p, 1e-6).expect("projector is Hermitian");
    let vecs = spec.vectors.expect("herm_eigen returns vectors");
    let r = spec.values.iter().filter(|&&v| v > 0.5).count();
    vecs.columns(0, r).into_owned()
}

/// `‖A_x P − P A_x P‖ ≤ tol` for every `x`: the range of `P` is invariant.
pub fn is_invariant_subspace(k: &KrausFamily, p: &CMat, tol: f64) -> bool {
    k.ops().iter().all(|a| (a * p - p * a * p).norm() <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PurityStatus {
    /// The span test passed.
    SatisfiedCertified,
    /// The largest correctable rank is provably 1 at some length.
    SatisfiedUpToN,
    /// A rank ≥ 2 projector survives every length searched.
    ViolatedUpToN,
    Undetermined,
}

impl PurityStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::SatisfiedCertified => "SatisfiedCertified",
            Self::SatisfiedUpToN => "SatisfiedUpToN",
            Self::ViolatedUpToN => "ViolatedUpToN",
            Self::Undetermined => "Undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PurityVerdict {
    pub status: PurityStatus,
    pub n_max: usize,
    /// Length at which the deciding certificate was obtained.
    pub decided_at: Option<usize>,
    /// For `ViolatedUpToN`: the surviving subspace is invariant under every
    /// `A_x`, so the violation holds at all lengths.
    pub extends_to_all_n: bool,
    pub span: SpanTest,
    pub correctable: CorrectableReport,
    pub evidence: String,
}

/// Tolerance used by [`purity_verdict`] for the correctable search.
pub const VERDICT_TOL: f64 = 1e-9;

pub fn purity_verdict(k: &KrausFamily, n_max: usize, guard: u64) -> Result<PurityVerdict> {
    purity_verdict_with_tol(k, n_max, VERDICT_TOL, guard)
}

/// [`purity_verdict`] with an explicit tolerance for the correctable search.
pub fn purity_verdict_with_tol(
    k: &KrausFamily,
    n_max: usize,
    tol: f64,
    guard: u64,
) -> Result<PurityVerdict> {
    let span = span_purity_test(k, n_max, guard)?;
    let correctable = correctable_subspace(k, n_max, tol, guard)?;
    let mut evidence = String::new();
    let _ = write!(
        evidence,
        "span ranks {:?} (full rank {}); correctable ranks {:?}; upper bounds {:?}",
        span.ranks,
        k.bond_dim() * k.bond_dim(),
        correctable.ranks(),
        correctable
            .levels
            .iter()
            .map(|l| l.upper_bound)
            .collect::<Vec<_>>(),
    );

    let mut status = PurityStatus::Undetermined;
    let mut decided_at = None;
    let mut extends_to_all_n = false;
    if let Some(n) = span.passed_at {
        status = PurityStatus::SatisfiedCertified;
        decided_at = Some(n);
    } else if let Some(level) = correctable.levels.iter().find(|l| l.upper_bound == 1) {
        status = PurityStatus::SatisfiedUpToN;
        decided_at = Some(level.n);
    } else if let Some(last) = correctable.levels.last() {
        if last.max_rank >= 2 && last.proportionality_residual < 1e-12 {
            let scale = k.ops().iter().map(operator_norm).fold(1.0, f64::max);
            if is_invariant_subspace(k, &last.projector, 1e-12 * scale) {
                status = PurityStatus::ViolatedUpToN;
                decided_at = Some(last.n);
                extends_to_all_n = true;
            }
        }
    }
    let _ = write!(evidence, "; status {} at n_max {}", status.as_str(), n_max);
    Ok(PurityVerdict {
        status,
        n_max,
        decided_at,
        extends_to_all_n,
        span,
        correctable,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::DEFAULT_GUARD;
    use crate::matcore::{diag_real, from_real_rows};
    use crate::mpschain::povm_sum;
    use crate::zoo;

    #[test]
    fn product_set_examples() {
        let k = zoo::aklt();
        let p = product_set(&k, 1, DEFAULT_GUARD).unwrap();
        assert!((&p[0] - identity(2).scale(1.0 / 3.0)).norm() < 1e-15);
        assert!((&p[1] - diag_real(&[2.0 / 3.0, 0.0])).norm() < 1e-15);
        assert!((&p[2] - diag_real(&[0.0, 2.0 / 3.0])).norm() < 1e-15);
        for n in 1..=4 {
            let set = product_set(&k, n, DEFAULT_GUARD).unwrap();
            let total = set.iter().fold(CMat::zeros(2, 2), |acc, m| acc + m);
            assert!((total - identity(2)).norm() < 1e-12);
        }
        let h = haar_kraus(3, 4, 2).unwrap();
        let set = product_set(&h, 1, DEFAULT_GUARD).unwrap();
        assert!(
            (povm_sum(h.ops()) - set.iter().fold(CMat::zeros(3, 3), |a, m| a + m)).norm() < 1e-14
        );
    }

    #[test]
    fn span_test_examples() {
        let t = span_purity_test(&zoo::aklt(), 4, DEFAULT_GUARD).unwrap();
        assert_eq!(t.passed_at, None);
        assert!(t.ranks.iter().all(|&r| r <= 2));
        let t = span_purity_test(&zoo::aklt_pauli(), 4, DEFAULT_GUARD).unwrap();
        assert_eq!(t.passed_at, None);
        assert!(t.ranks.iter().all(|&r| r == 1));
        let t = span_purity_test(&haar_kraus(3, 5, 0).unwrap(), 5, DEFAULT_GUARD).unwrap();
        assert!(t.passed_at.unwrap() <= 5);
    }

    #[test]
    fn correctable_examples() {
        let rep = correctable_subspace(&zoo::aklt_pauli(), 3, 1e-9, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.ranks(), vec![2, 2, 2]);
        assert!(rep.levels.iter().all(|l| l.certified()));

        let rep = correctable_subspace(&zoo::aklt(), 2, 1e-9, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.ranks(), vec![1, 1]);
        assert_eq!(rep.levels[0].upper_bound, 1);

        let rep = correctable_subspace(&zoo::jordan(4).unwrap(), 5, 1e-9, DEFAULT_GUARD).unwrap();
        assert_eq!(rep.ranks(), vec![4, 3, 2, 1, 1]);
        for l in &rep.levels {
            assert!(l.certified());
            assert!(l.proportionality_residual < 1e-12);
        }
    }

    #[test]
    fn upper_bound_examples() {
        // M = diag(1, −1) admits the rank-1 projector onto (1, 1)/√2 with
        // PMP = 0, outside both eigenspaces; ranks above 1 are excluded
        let m = diag_real(&[1.0, -1.0]);
        assert_eq!(
            interlacing_bound(std::slice::from_ref(&m), std::slice::from_ref(&m), 2, 1e-9),
            1
        );
        let m = diag_real(&[1.0, 0.5, 0.0]);
        assert_eq!(
            interlacing_bound(std::slice::from_ref(&m), std::slice::from_ref(&m), 3, 1e-9),
            2
        );
        // rank-one constraints leave only rank one
        let ms = [diag_real(&[1.0, 0.0, 0.0]), diag_real(&[0.0, 1.0, 0.0])];
        assert_eq!(interlacing_bound(&ms, &ms, 3, 1e-9), 1);
    }

    #[test]
    fn budget_is_enforced() {
        let k = haar_kraus(4, 3, 1).unwrap();
        assert!(matches!(
            correctable_subspace_with_budget(&k, 2, 1e-9, DEFAULT_GUARD, 1),
            Err(Error::SearchBudgetExceeded { budget: 1 })
        ));
    }

    #[test]
    fn verdicts() {
        let v = purity_verdict(&zoo::aklt(), 3, DEFAULT_GUARD).unwrap();
        assert_eq!(v.status, PurityStatus::SatisfiedUpToN);
        assert_eq!(v.decided_at, Some(1));

        let v = purity_verdict(&zoo::aklt_pauli(), 3, DEFAULT_GUARD).unwrap();
        assert_eq!(v.status, PurityStatus::ViolatedUpToN);
        assert!(v.extends_to_all_n);

        let v = purity_verdict(&haar_kraus(3, 5, 3).unwrap(), 3, DEFAULT_GUARD).unwrap();
        assert_eq!(v.status, PurityStatus::SatisfiedCertified);

        let v = purity_verdict(&zoo::jordan(4).unwrap(), 4, DEFAULT_GUARD).unwrap();
        assert_eq!(v.status, PurityStatus::SatisfiedUpToN);
        assert_eq!(v.decided_at, Some(4));

        // block-diagonal unitary pair: the first block is invariant and
        // every product acts as a scalar on it
        let s = 0.5_f64.sqrt();
        let a0 = from_real_rows(3, 3, &[s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0]);
        let a1 = from_real_rows(3, 3, &[0.0, s, 0.0, s, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let k = KrausFamily::new(vec![a0, a1]).unwrap();
        let v = purity_verdict(&k, 3, DEFAULT_GUARD).unwrap();
        assert_eq!(v.status, PurityStatus::ViolatedUpToN);
        assert_eq!(v.correctable.levels.last().unwrap().max_rank, 2);
    }
}
