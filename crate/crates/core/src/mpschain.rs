//! Kraus families, boundaries and the transfer operator.
//!
//! Products are ordered so that `A_{x_1}` acts first: the string `x_1..x_N`
//! maps to `W = A_{x_N} ⋯ A_{x_1}`.

use nalgebra::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{
    ensure_finite, ensure_shape, herm_eigen, hermitian_part, identity, outer, psd_inv_sqrt,
    psd_sqrt, unvec_col, vec_col, CMat, CVec, ONE,
};

/// Default residual allowed in `Σ A_x†A_x = 𝟙`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Eigenvalues of the transfer matrix within this distance of 1 count toward
/// the fixed space.
pub const FIXED_SPACE_TOL: f64 = 1e-8;

/// A left-normalized family `{A_x}` of `D x D` matrices, `Σ A_x†A_x = 𝟙`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausFamily {
    ops: Vec<CMat>,
    dim: usize,
}

impl KrausFamily {
    pub fn new(ops: Vec<CMat>) -> Result<Self> {
        Self::with_tolerance(ops, NORMALIZATION_TOL)
    }

    /// Accepts the family when `‖Σ A†A − 𝟙‖_op ≤ tol`.
    pub fn with_tolerance(ops: Vec<CMat>, tol: f64) -> Result<Self> {
        let dim = validate_shapes(&ops)?;
        let residual = normalization_residual(&ops);
        if residual > tol {
            return Err(Error::NotNormalized { residual, tol });
        }
        Ok(Self { ops, dim })
    }

    /// Physical dimension `d`.
    pub fn d(&self) -> usize {
        self.ops.len()
    }

    /// Bond dimension `D`.
    pub fn bond_dim(&self) -> usize {
        self.dim
    }

    pub fn ops(&self) -> &[CMat] {
        &self.ops
    }

    pub fn op(&self, x: usize) -> &CMat {
        &self.ops[x]
    }

    /// `A_{x_N} ⋯ A_{x_1}` for the symbols in order `x_1..x_N`.
    pub fn product(&self, symbols: &[usize]) -> Result<CMat> {
        let mut w = identity(self.dim);
        for &x in symbols {
            if x >= self.d() {
                return Err(Error::SymbolOutOfRange {
                    symbol: x,
                    d: self.d(),
                });
            }
            w = &self.ops[x] * w;
        }
        Ok(w)
    }
}

fn validate_shapes(ops: &[CMat]) -> Result<usize> {
    let first = ops.first().ok_or_else(|| Error::InvalidKraus {
        reason: "empty family".into(),
    })?;
    let dim = first.nrows();
    if dim == 0 {
        return Err(Error::InvalidKraus {
            reason: "zero bond dimension".into(),
        });
    }
    for a in ops {
        ensure_shape(a, dim, dim)?;
        ensure_finite(a)?;
    }
    Ok(dim)
}

/// `Σ A_x†A_x`
pub fn povm_sum(ops: &[CMat]) -> CMat {
    let dim = ops.first().map_or(0, |a| a.ncols());
    ops.iter()
        .fold(CMat::zeros(dim, dim), |acc, a| acc + a.adjoint() * a)
}

/// Operator norm of `Σ A_x†A_x − 𝟙`.
pub fn normalization_residual(ops: &[CMat]) -> f64 {
    let s = povm_sum(ops);
    let dim = s.nrows();
    crate::matcore::operator_norm(&(s - identity(dim)))
}

/// Rescales `A_x ↦ A_x S^{-1/2}` with `S = Σ A†A`. Never applied implicitly.
pub fn renormalize(ops: Vec<CMat>) -> Result<KrausFamily> {
    validate_shapes(&ops)?;
    let s_inv_half = psd_inv_sqrt(&povm_sum(&ops)).map_err(|_| Error::InvalidKraus {
        reason: "Σ A†A is singular".into(),
    })?;
    KrausFamily::new(ops.into_iter().map(|a| a * &s_inv_half).collect())
}

/// Unit boundary vectors `|L⟩`, `|R⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPair {
    pub left: CVec,
    pub right: CVec,
}

impl BoundaryPair {
    pub fn new(left: CVec, right: CVec) -> Result<Self> {
        for (which, v) in [("L", &left), ("R", &right)] {
            let norm = v.norm();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
                return Err(Error::BoundaryNotNormalized { which, norm });
            }
        }
        if left.len() != right.len() {
            return Err(Error::ShapeMismatch {
                expected: (left.len(), 1),
                found: (right.len(), 1),
            });
        }
        Ok(Self { left, right })
    }

    /// Normalizes both vectors first; zero vectors are rejected.
    pub fn normalized(left: CVec, right: CVec) -> Result<Self> {
        let unit = |v: CVec, which: &'static str| {
            let norm = v.norm();
            if norm == 0.0 || !norm.is_finite() {
                Err(Error::BoundaryNotNormalized { which, norm })
            } else {
                Ok(v / Complex64::new(norm, 0.0))
            }
        };
        Self::new(unit(left, "L")?, unit(right, "R")?)
    }

    /// `L = R = |k⟩`
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[k] = ONE;
        Self {
            left: v.clone(),
            right: v,
        }
    }

    pub fn dim(&self) -> usize {
        self.left.len()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::ShapeMismatch {
                expected: (dim, 1),
                found: (self.dim(), 1),
            });
        }
        Ok(())
    }
}

/// Block lengths `|A|, |B|, |C|` with `|B| ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainGeometry {
    pub len_a: usize,
    pub len_b: usize,
    pub len_c: usize,
}

impl ChainGeometry {
    pub fn new(len_a: usize, len_b: usize, len_c: usize) -> Result<Self> {
        if len_b == 0 {
            return Err(Error::InvalidGeometry {
                reason: "middle block must contain at least one site".into(),
            });
        }
        Ok(Self {
            len_a,
            len_b,
            len_c,
        })
    }

    pub fn total(&self) -> usize {
        self.len_a + self.len_b + self.len_c
    }
}

/// `E(χ) = Σ A_x χ A_x†`
pub fn transfer_apply(k: &KrausFamily, chi: &CMat) -> Result<CMat> {
    ensure_shape(chi, k.dim, k.dim)?;
    Ok(k.ops.iter().fold(CMat::zeros(k.dim, k.dim), |acc, a| {
        acc + a * chi * a.adjoint()
    }))
}

/// `E*(Q) = Σ A_x† Q A_x`
pub fn transfer_adjoint_apply(k: &KrausFamily, q: &CMat) -> Result<CMat> {
    ensure_shape(q, k.dim, k.dim)?;
    Ok(k.ops.iter().fold(CMat::zeros(k.dim, k.dim), |acc, a| {
        acc + a.adjoint() * q * a
    }))
}

/// `T = Σ conj(A_x) ⊗ A_x`, so that `vec(E(χ)) = T vec(χ)` with column stacking.
pub fn transfer_matrix(k: &KrausFamily) -> CMat {
    let n = k.dim * k.dim;
    k.ops.iter().fold(CMat::zeros(n, n), |acc, a| {
        acc + a.map(|z| z.conj()).kronecker(a)
    })
}

/// Eigenvalues of `T`, sorted by decreasing modulus.
pub fn transfer_spectrum(k: &KrausFamily) -> Result<Vec<Complex64>> {
    let t = transfer_matrix(k);
    let schur = Schur::try_new(t, f64::EPSILON, 10_000).ok_or(Error::NonConvergent)?;
    let mut values: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or(Error::NonConvergent)?
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    Ok(values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFixedPoint {
    pub rho: CMat,
    /// `1 − |λ₂|` with `λ₂` the first eigenvalue outside the fixed space.
    pub gap: f64,
    pub primitive: bool,
    /// Number of transfer-matrix eigenvalues within [`FIXED_SPACE_TOL`] of 1.
    pub multiplicity: usize,
}

/// Fixed point of the transfer operator.
///
/// `rho` is the spectral projection of `𝟙/D` onto the eigenvalue-1 space of
/// `T`, Hermitized, clipped to its positive part and normalized. For a
/// one-dimensional fixed space this is the unique fixed point; otherwise it is
/// the fixed point reached by the Cesàro mean from the maximally mixed state.
pub fn fixed_point(k: &KrausFamily, tol: f64) -> Result<TransferFixedPoint> {
    let dim = k.dim;
    let n = dim * dim;
    let spectrum = transfer_spectrum(k)?;
    let one = ONE;
    let multiplicity = spectrum
        .iter()
        .filter(|z| (**z - one).norm() < FIXED_SPACE_TOL)
        .count()
        .max(1);
    let second = spectrum
        .iter()
        .filter(|z| (**z - one).norm() >= FIXED_SPACE_TOL)
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let gap = 1.0 - second;

    let shifted = transfer_matrix(k) - CMat::identity(n, n);
    let svd = shifted.svd(true, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let null = &order[..multiplicity];
    let u = svd.u.as_ref().ok_or(Error::NonConvergent)?;
    let v_t = svd.v_t.as_ref().ok_or(Error::NonConvergent)?;
    // right null vectors are rows of V†, left null vectors are columns of U
    let right = CMat::from_fn(n, multiplicity, |r, c| v_t[(null[c], r)].conj());
    let left = CMat::from_fn(n, multiplicity, |r, c| u[(r, null[c])]);
    let overlap = left.adjoint() * &right;
    let overlap_inv = overlap.try_inverse().ok_or(Error::NonConvergent)?;
    let start = vec_col(&identity(dim)) / Complex64::new(dim as f64, 0.0);
    let projected = &right * (overlap_inv * (left.adjoint() * start));
    let raw = hermitian_part(&unvec_col(&projected, dim, dim));

    let spec = herm_eigen(&raw, 1e-8)?;
    let vecs = spec.vectors.as_ref().expect("herm_eigen returns vectors");
    let sign = if spec.values.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let clipped: Vec<f64> = spec.values.iter().map(|&x| (sign * x).max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= 0.0 {
        return Err(Error::NonConvergent);
    }
    let scaled = CMat::from_fn(dim, dim, |r, c| vecs[(r, c)] * (clipped[c] / total));
    let rho = hermitian_part(&(scaled * vecs.adjoint()));

    let min_eig = herm_eigen(&rho, 1e-8)?.min();
    let peripheral = spectrum
        .iter()
        .filter(|z| (**z - one).norm() >= FIXED_SPACE_TOL)
        .any(|z| z.norm() >= 1.0 - tol);
    let primitive = multiplicity == 1 && !peripheral && min_eig > tol;
    Ok(TransferFixedPoint {
        rho,
        gap,
        primitive,
        multiplicity,
    })
}

/// `σ = Eⁿ(|L⟩⟨L|)`
pub fn left_environment(k: &KrausFamily, left: &CVec, n: usize) -> Result<CMat> {
    let mut sigma = outer(left, left);
    ensure_shape(&sigma, k.dim, k.dim)?;
    for _ in 0..n {
        sigma = transfer_apply(k, &sigma)?;
    }
    Ok(hermitian_part(&sigma))
}

/// `F†F = E*ⁿ(|R⟩⟨R|)`
pub fn right_environment(k: &KrausFamily, right: &CVec, n: usize) -> Result<CMat> {
    let mut q = outer(right, right);
    ensure_shape(&q, k.dim, k.dim)?;
    for _ in 0..n {
        q = transfer_adjoint_apply(k, &q)?;
    }
    Ok(hermitian_part(&q))
}

/// Principal square root of an environment operator.
pub fn sqrt_env(m: &CMat) -> Result<CMat> {
    psd_sqrt(m)
}

/// `K² = ⟨R| E^{|Λ|}(|L⟩⟨L|) |R⟩`; equals `|⟨R|L⟩|²` for an empty chain.
pub fn normalization_k2(
    k: &KrausFamily,
    boundaries: &BoundaryPair,
    geometry: &ChainGeometry,
) -> Result<f64> {
    boundaries.check_dim(k.dim)?;
    let sigma = left_environment(k, &boundaries.left, geometry.total())?;
    let r = &boundaries.right;
    let value = (r.adjoint() * sigma * r)[(0, 0)];
    Ok(value.re)
}
