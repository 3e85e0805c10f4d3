//! Dense complex linear algebra shared by every analysis module.
//!
//! Matrices are `nalgebra` dynamic matrices over `Complex64`. The wrappers here
//! add the checks and orderings the rest of the crate relies on: spectra come
//! back sorted non-increasing, Hermitian inputs are validated, and entropies
//! are evaluated in nats.

mod entropy;
mod special;

pub use entropy::{
    binary_entropy, entropy_of_eigenvalues, g_func, shannon_entropy, von_neumann_entropy, ProbVec,
};
pub use special::{clock_shift_basis, exterior_square, gram_matrix, gram_rank, pair_count};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Real values sorted non-increasing, optionally with orthonormal vectors
/// stored column-wise in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<CMat>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `k`-th largest value (0-based), zero past the end.
    pub fn nth(&self, k: usize) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.nth(0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from real row-major entries.
pub fn from_real_rows(rows: usize, cols: usize, entries: &[f64]) -> CMat {
    assert_eq!(entries.len(), rows * cols);
    CMat::from_fn(rows, cols, |i, j| c(entries[i * cols + j], 0.0))
}

pub fn diag_real(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { ZERO })
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `|u><v|`
pub fn outer(u: &CVec, v: &CVec) -> CMat {
    u * v.adjoint()
}

pub fn is_finite(m: &CMat) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    if is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_square(m: &CMat) -> Result<usize> {
    if m.nrows() == m.ncols() {
        Ok(m.nrows())
    } else {
        Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub(crate) fn ensure_shape(m: &CMat, rows: usize, cols: usize) -> Result<()> {
    if m.shape() == (rows, cols) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: (rows, cols),
            found: m.shape(),
        })
    }
}

/// `(M + M^dagger) / 2`
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest singular value.
pub fn operator_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// Eigen-decomposition of a Hermitian matrix.
///
/// The symmetry check is relative: `‖H − H†‖_F ≤ tol·‖H‖_F`. The Hermitian
/// part is what gets diagonalized, so tiny asymmetries from round-off never
/// leak into complex eigenvalues.
pub fn herm_eigen(h: &CMat, tol: f64) -> Result<Spectrum> {
    ensure_square(h)?;
    ensure_finite(h)?;
    let scale = h.norm();
    let asymmetry = (h - h.adjoint()).norm();
    if asymmetry > tol * scale.max(f64::MIN_POSITIVE) && asymmetry > 0.0 {
        return Err(Error::NonHermitian {
            asymmetry: asymmetry / scale.max(f64::MIN_POSITIVE),
        });
    }
    let eig = hermitian_part(h).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(h.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    Ok(Spectrum {
        values,
        vectors: Some(vectors),
    })
}

/// Eigenvalues only, sorted non-increasing. Input is assumed Hermitian up to
/// round-off; the Hermitian part is diagonalized.
pub fn herm_eigenvalues(h: &CMat) -> Vec<f64> {
    let mut values: Vec<f64> = hermitian_part(h)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Singular values sorted non-increasing.
pub fn singular_values(o: &CMat) -> Spectrum {
    let mut values: Vec<f64> = if o.is_empty() {
        Vec::new()
    } else {
        o.clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Spectrum {
        values,
        vectors: None,
    }
}

/// Principal square root of a positive semi-definite matrix.
///
/// Eigenvalues down to `−1e-10·max(1, ‖M‖)` are treated as zero; anything more
/// negative is rejected.
pub fn psd_sqrt(m: &CMat) -> Result<CMat> {
    let spec = herm_eigen(m, 1e-8)?;
    let floor = -1e-10 * spec.max().abs().max(1.0);
    if spec.min() < floor {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min(),
        });
    }
    let v = spec.vectors.as_ref().expect("herm_eigen returns vectors");
    let roots: Vec<f64> = spec.values.iter().map(|&x| x.max(0.0).sqrt()).collect();
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |i, k| v[(i, k)] * roots[k]);
    Ok(hermitian_part(&(scaled * v.adjoint())))
}

/// Inverse square root on the support; used when re-normalizing Kraus families.
pub(crate) fn psd_inv_sqrt(m: &CMat) -> Result<CMat> {
    let spec = herm_eigen(m, 1e-8)?;
    if spec.min() <= 0.0 {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min(),
        });
    }
    let v = spec.vectors.as_ref().expect("herm_eigen returns vectors");
    let scaled = CMat::from_fn(v.nrows(), v.ncols(), |i, k| {
        v[(i, k)] / spec.values[k].sqrt()
    });
    Ok(hermitian_part(&(scaled * v.adjoint())))
}

/// Checks `rho ⪰ 0` (to 1e-10) and `Tr rho = 1` (to 1e-8).
pub fn check_density_operator(rho: &CMat) -> Result<()> {
    ensure_square(rho)?;
    ensure_finite(rho)?;
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::NotDensityOperator {
            reason: format!("trace {tr} differs from 1"),
        });
    }
    let spec = herm_eigen(rho, 1e-8).map_err(|e| Error::NotDensityOperator {
        reason: e.to_string(),
    })?;
    if spec.min() < -1e-10 {
        return Err(Error::NotDensityOperator {
            reason: format!("negative eigenvalue {:.3e}", spec.min()),
        });
    }
    Ok(())
}

/// Column-stacking vectorization.
pub fn vec_col(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.iter().copied())
}

/// Inverse of [`vec_col`] for a `rows x cols` matrix.
pub fn unvec_col(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_iterator(rows, cols, v.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_hermitian, random_matrix, rng};
    use approx::assert_abs_diff_eq;

    #[test]
    fn herm_eigen_diagonal_and_identity() {
        let s = herm_eigen(&diag_real(&[-1.0, 1.0]), 1e-12).unwrap();
        assert_eq!(s.values, vec![1.0, -1.0]);
        let s = herm_eigen(&identity(3), 1e-12).unwrap();
        for v in s.values {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn herm_eigen_trace_and_reconstruction() {
        let mut r = rng(11);
        for _ in 0..20 {
            let h = random_hermitian(&mut r, 4);
            let s = herm_eigen(&h, 1e-12).unwrap();
            let direct: f64 = (0..4).map(|i| h[(i, i)].re).sum();
            assert_abs_diff_eq!(s.values.iter().sum::<f64>(), direct, epsilon = 1e-10);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            let v = s.vectors.unwrap();
            let lam = diag_real(&s.values);
            let rebuilt = &v * lam * v.adjoint();
            assert!((rebuilt - &h).norm() <= 1e-10 * h.norm());
        }
    }

    #[test]
    fn herm_eigen_rejects_bad_input() {
        let m = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            herm_eigen(&m, 1e-10),
            Err(Error::NonHermitian { .. })
        ));
        let m = CMat::zeros(2, 3);
        assert!(matches!(
            herm_eigen(&m, 1e-10),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn singular_value_examples() {
        let s = singular_values(&diag_real(&[2.0, 3.0]));
        assert_eq!(s.values, vec![3.0, 2.0]);

        let u = CVec::from_vec(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        let v = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let s = singular_values(&outer(&u, &v));
        assert_abs_diff_eq!(s.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.values[1], 0.0, epsilon = 1e-14);

        let mut r = rng(3);
        let o = random_matrix(&mut r, 3, 3);
        let prod: f64 = singular_values(&o).values.iter().product();
        assert_abs_diff_eq!(prod, o.determinant().norm(), epsilon = 1e-9);
    }

    #[test]
    fn singular_values_square_to_gram_eigenvalues() {
        let mut r = rng(5);
        for (rows, cols) in [(2, 3), (4, 2), (3, 3)] {
            let o = random_matrix(&mut r, rows, cols);
            let nu = singular_values(&o);
            let lam = herm_eigenvalues(&(o.adjoint() * &o));
            for (j, n) in nu.values.iter().enumerate() {
                assert_abs_diff_eq!(n * n, lam[j], epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        let s = psd_sqrt(&identity(2).scale(0.5)).unwrap();
        assert!((s - identity(2).scale(0.5_f64.sqrt())).norm() < 1e-14);
        let s = psd_sqrt(&diag_real(&[4.0, 1.0])).unwrap();
        assert!((s - diag_real(&[2.0, 1.0])).norm() < 1e-14);
        let mut r = rng(8);
        let g = random_matrix(&mut r, 4, 4);
        let m = &g * g.adjoint();
        let s = psd_sqrt(&m).unwrap();
        assert!((&s * &s - &m).norm() <= 1e-10 * m.norm().max(1.0));
        assert!(matches!(
            psd_sqrt(&diag_real(&[1.0, -0.5])),
            Err(Error::NotPsd { .. })
        ));
    }
}
