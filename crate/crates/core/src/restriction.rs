//! Classical restriction of the middle block.
//!
//! A context fixes `σ = E^{|A|}(|L⟩⟨L|)` and `F = √(E*^{|C|}(|R⟩⟨R|))`. A
//! string `x` of length `N` on the middle block then has weight
//! `Tr[F W σ W† F†]` with `W = A_{x_N}⋯A_{x_1}`. Dividing by
//! `K²(N) = Tr(F†F·E^N(σ))` gives its probability. The post-measurement state
//! on `C` is isospectral to the normalized `F W σ W† F†`.

use crate::enumerate::{check_guard, map_products, ordered_sum, DEFAULT_GUARD};
use crate::error::{Error, Result};
use crate::gibbsfit::ChainDistribution;
use crate::matcore::{
    check_density_operator, entropy_of_eigenvalues, herm_eigen, identity, shannon_entropy,
    singular_values, CMat, Spectrum,
};
use crate::mpschain::{
    fixed_point, left_environment, right_environment, sqrt_env, transfer_apply, BoundaryPair,
    ChainGeometry, KrausFamily,
};

/// Contexts with `K² < MIN_K2` are rejected.
pub const MIN_K2: f64 = 1e-12;

/// A string is treated as impossible when `p < ZERO_WEIGHT / dⁿ`.
pub const ZERO_WEIGHT: f64 = 1e-14;

/// Symbols `x_1..x_N` measured on the middle block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementString(Vec<usize>);

impl MeasurementString {
    pub fn new(symbols: Vec<usize>, d: usize) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyString);
        }
        if let Some(&symbol) = symbols.iter().find(|&&x| x >= d) {
            return Err(Error::SymbolOutOfRange { symbol, d });
        }
        Ok(Self(symbols))
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RestrictionContext {
    kraus: KrausFamily,
    sigma: CMat,
    sqrt_sigma: CMat,
    f_op: CMat,
    f_dag_f: CMat,
    guard: u64,
}

impl RestrictionContext {
    /// Environments from boundary vectors and the outer block lengths.
    pub fn finite(
        kraus: &KrausFamily,
        boundaries: &BoundaryPair,
        len_a: usize,
        len_c: usize,
    ) -> Result<Self> {
        let sigma = left_environment(kraus, &boundaries.left, len_a)?;
        let f_dag_f = right_environment(kraus, &boundaries.right, len_c)?;
        let f_op = sqrt_env(&f_dag_f)?;
        Self::build(kraus.clone(), sigma, f_op)
    }

    /// Infinite outer blocks: `σ = ρ`, `F = 𝟙`, `K² = 1`.
    pub fn infinite(kraus: &KrausFamily) -> Result<Self> {
        let rho = fixed_point(kraus, 1e-10)?.rho;
        Self::build(kraus.clone(), rho, identity(kraus.bond_dim()))
    }

    /// Arbitrary density operator `σ` and `F` with `F†F ⪯ 𝟙`.
    pub fn from_parts(kraus: &KrausFamily, sigma: CMat, f_op: CMat) -> Result<Self> {
        Self::build(kraus.clone(), sigma, f_op)
    }

    fn build(kraus: KrausFamily, sigma: CMat, f_op: CMat) -> Result<Self> {
        let dim = kraus.bond_dim();
        crate::matcore::ensure_shape(&sigma, dim, dim)?;
        crate::matcore::ensure_shape(&f_op, dim, dim)?;
        check_density_operator(&sigma)?;
        let f_dag_f = f_op.adjoint() * &f_op;
        let top = herm_eigen(&f_dag_f, 1e-8)?.max();
        if top > 1.0 + 1e-10 {
            return Err(Error::FNotContractive {
                max_eigenvalue: top,
            });
        }
        let sqrt_sigma = sqrt_env(&sigma)?;
        Ok(Self {
            kraus,
            sigma,
            sqrt_sigma,
            f_op,
            f_dag_f,
            guard: DEFAULT_GUARD,
        })
    }

    /// Overrides the enumeration guard.
    pub fn with_guard(mut self, guard: u64) -> Self {
        self.guard = guard;
        self
    }

    pub fn kraus(&self) -> &KrausFamily {
        &self.kraus
    }

    pub fn sigma(&self) -> &CMat {
        &self.sigma
    }

    pub fn sqrt_sigma(&self) -> &CMat {
        &self.sqrt_sigma
    }

    pub fn f_op(&self) -> &CMat {
        &self.f_op
    }

    pub fn guard(&self) -> u64 {
        self.guard
    }

    /// `K²(N) = Tr(F†F·E^N(σ))`
    pub fn k2(&self, n: usize) -> Result<f64> {
        let mut chi = self.sigma.clone();
        for _ in 0..n {
            chi = transfer_apply(&self.kraus, &chi)?;
        }
        let k2 = (&self.f_dag_f * chi).trace().re;
        if k2 < MIN_K2 {
            return Err(Error::VanishingNormalization { k2 });
        }
        Ok(k2)
    }

    /// `F W √σ` for the given string.
    fn dressed(&self, symbols: &[usize]) -> Result<CMat> {
        Ok(&self.f_op * self.kraus.product(symbols)? * &self.sqrt_sigma)
    }
}

/// Unnormalized eigenvalues of `F W σ W† F†`, i.e. squared singular values
/// of `F W √σ`, sorted non-increasing.
fn weight_eigenvalues(y: &CMat) -> Vec<f64> {
    singular_values(y).values.iter().map(|s| s * s).collect()
}

fn check_string(ctx: &RestrictionContext, x: &MeasurementString) -> Result<()> {
    let d = ctx.kraus.d();
    if let Some(&symbol) = x.symbols().iter().find(|&&s| s >= d) {
        return Err(Error::SymbolOutOfRange { symbol, d });
    }
    Ok(())
}

/// `p(x) = Tr[F W σ W† F†] / K²`
pub fn string_probability(ctx: &RestrictionContext, x: &MeasurementString) -> Result<f64> {
    check_string(ctx, x)?;
    let y = ctx.dressed(x.symbols())?;
    Ok(y.norm_squared() / ctx.k2(x.len())?)
}

/// Spectrum of the post-measurement state on `C`, normalized to sum one.
pub fn post_measurement_spectrum(
    ctx: &RestrictionContext,
    x: &MeasurementString,
) -> Result<Spectrum> {
    check_string(ctx, x)?;
    let y = ctx.dressed(x.symbols())?;
    let eig = weight_eigenvalues(&y);
    let total: f64 = eig.iter().sum();
    let k2 = ctx.k2(x.len())?;
    let uniform = 1.0 / (ctx.kraus.d() as f64).powi(x.len() as i32);
    if total / k2 < ZERO_WEIGHT * uniform {
        return Err(Error::ZeroProbabilityString);
    }
    Ok(Spectrum {
        values: eig.iter().map(|v| v / total).collect(),
        vectors: None,
    })
}

/// Per-string eigenvalue data in lexicographic order.
fn enumerate_weights(ctx: &RestrictionContext, n: usize) -> Result<Vec<Vec<f64>>> {
    if n == 0 {
        return Err(Error::EmptyString);
    }
    let init = &ctx.sqrt_sigma;
    map_products(ctx.kraus.ops(), init, n, ctx.guard, |_, w| {
        weight_eigenvalues(&(&ctx.f_op * w))
    })
}

/// Aggregate statistics of the restriction at one length `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictionSummary {
    pub n: usize,
    pub k2: f64,
    /// `Σ_x p(x)`; one up to round-off.
    pub probability_sum: f64,
    /// `⟨S⟩ = Σ p(x) S[Ψ_C(x)]`
    pub avg_entropy: f64,
    /// `Q = 1 − Σ λ₁(X)/K²`
    pub avg_purity_q: f64,
    /// `Σ λ₂(X)/K²`, the lower end of the `Q` sandwich.
    pub q_lower: f64,
    /// `(D−1)·Σ λ₂(X)/K²`
    pub q_upper: f64,
    /// `f(N) = Σ ν₁ν₂(F W √σ)`
    pub f_value: f64,
}

impl RestrictionSummary {
    pub fn quantum_cmi(&self) -> f64 {
        2.0 * self.avg_entropy
    }
}

pub fn summarize(ctx: &RestrictionContext, n: usize) -> Result<RestrictionSummary> {
    let k2 = ctx.k2(n)?;
    let rows = enumerate_weights(ctx, n)?;
    let threshold = ZERO_WEIGHT / (ctx.kraus.d() as f64).powi(n as i32);
    let dim = ctx.kraus.bond_dim() as f64;

    let weights: Vec<f64> = rows.iter().map(|e| e.iter().sum::<f64>()).collect();
    let probability_sum = ordered_sum(weights.iter().map(|w| w / k2));
    let mut entropies = Vec::with_capacity(rows.len());
    for (eig, &w) in rows.iter().zip(&weights) {
        let p = w / k2;
        if p < threshold {
            entropies.push(0.0);
            continue;
        }
        let normalized: Vec<f64> = eig.iter().map(|v| v / w).collect();
        entropies.push(p * entropy_of_eigenvalues(&normalized)?);
    }
    let avg_entropy = ordered_sum(entropies);
    let top_sum = ordered_sum(rows.iter().map(|e| e.first().copied().unwrap_or(0.0)));
    let second_sum = ordered_sum(rows.iter().map(|e| e.get(1).copied().unwrap_or(0.0)));
    let f_value = ordered_sum(rows.iter().map(|e| {
        let l1 = e.first().copied().unwrap_or(0.0);
        let l2 = e.get(1).copied().unwrap_or(0.0);
        (l1 * l2).sqrt()
    }));
    Ok(RestrictionSummary {
        n,
        k2,
        probability_sum,
        avg_entropy,
        avg_purity_q: (1.0 - top_sum / k2).clamp(0.0, 1.0),
        q_lower: second_sum / k2,
        q_upper: (dim - 1.0) * second_sum / k2,
        f_value,
    })
}

/// `⟨S⟩(N)` over all `dᴺ` strings.
pub fn average_entropy(ctx: &RestrictionContext, n: usize) -> Result<f64> {
    Ok(summarize(ctx, n)?.avg_entropy)
}

/// Post-measurement quantum CMI, `2⟨S⟩` for a pure global state.
pub fn quantum_cmi(ctx: &RestrictionContext, n: usize) -> Result<f64> {
    Ok(summarize(ctx, n)?.quantum_cmi())
}

/// Average impurity `Q = 1 − Σ p‖Ψ_C‖`.
pub fn average_purity_q(ctx: &RestrictionContext, n: usize) -> Result<f64> {
    Ok(summarize(ctx, n)?.avg_purity_q)
}

/// `−Q ln Q + Q(1 + ln(D−1))`, the entropy ceiling implied by `Q`.
pub fn entropy_bound_from_q(q: f64, dim: usize) -> f64 {
    let xlnx = if q > 0.0 { q * q.ln() } else { 0.0 };
    -xlnx + q * (1.0 + ((dim.max(2) - 1) as f64).ln())
}

/// Full-chain distribution `p(x) = |⟨R|W|L⟩|² / K²` over `d^{|Λ|}` strings.
pub fn chain_distribution(
    kraus: &KrausFamily,
    boundaries: &BoundaryPair,
    geometry: &ChainGeometry,
    guard: u64,
) -> Result<ChainDistribution> {
    let len = geometry.total();
    check_guard(kraus.d(), len, guard)?;
    let dim = kraus.bond_dim();
    if boundaries.dim() != dim {
        return Err(Error::ShapeMismatch {
            expected: (dim, 1),
            found: (boundaries.dim(), 1),
        });
    }
    let left = CMat::from_column_slice(dim, 1, boundaries.left.as_slice());
    let r_adj = boundaries.right.adjoint();
    let amplitudes = map_products(kraus.ops(), &left, len, guard, |_, w| {
        (&r_adj * w)[(0, 0)].norm_sqr()
    })?;
    let k2 = ordered_sum(amplitudes.iter().copied());
    if k2 < MIN_K2 {
        return Err(Error::VanishingNormalization { k2 });
    }
    ChainDistribution::new(len, kraus.d(), amplitudes.iter().map(|a| a / k2).collect())
}

/// `H(AB) + H(BC) − H(B) − H(ABC)` from marginal Shannon entropies.
pub fn classical_cmi(p: &ChainDistribution, geometry: &ChainGeometry) -> Result<f64> {
    if geometry.total() != p.len() {
        return Err(Error::GeometryMismatch {
            expected: geometry.total(),
            found: p.len(),
        });
    }
    let a = geometry.len_a;
    let b = geometry.len_b;
    let len = p.len();
    let h = |j: usize, k: usize| -> Result<f64> { Ok(shannon_entropy(&p.marginal(j, k)?)) };
    let h_ab = h(1, a + b)?;
    let h_bc = h(a + 1, len)?;
    let h_b = h(a + 1, a + b)?;
    let h_abc = h(1, len)?;
    Ok(h_ab + h_bc - h_b - h_abc)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmiReport {
    pub n: usize,
    pub classical_cmi: f64,
    pub quantum_cmi: f64,
    pub avg_entropy: f64,
    pub avg_purity_q: f64,
}

/// Classical and quantum CMI of one finite chain.
pub fn cmi_report(
    kraus: &KrausFamily,
    boundaries: &BoundaryPair,
    geometry: &ChainGeometry,
    guard: u64,
) -> Result<CmiReport> {
    let ctx = RestrictionContext::finite(kraus, boundaries, geometry.len_a, geometry.len_c)?
        .with_guard(guard);
    let summary = summarize(&ctx, geometry.len_b)?;
    let p = chain_distribution(kraus, boundaries, geometry, guard)?;
    Ok(CmiReport {
        n: geometry.len_b,
        classical_cmi: classical_cmi(&p, geometry)?,
        quantum_cmi: summary.quantum_cmi(),
        avg_entropy: summary.avg_entropy,
        avg_purity_q: summary.avg_purity_q,
    })
}
