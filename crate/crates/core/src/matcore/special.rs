use std::f64::consts::PI;

use num_complex::Complex64;

use super::{herm_eigenvalues, CMat};
use crate::error::{Error, Result};

/// `C(n, 2)`
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(pair_count(n));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    out
}

/// Degree-two exterior power of `O: C^{D1} -> C^{D2}`.
///
/// Both antisymmetric subspaces use the basis `(|i>|j> − |j>|i>)/√2`, `i < j`,
/// in lexicographic order. In that basis the entries are the 2x2 minors
/// `O_ik O_jl − O_il O_jk`. The operator norm equals `ν₁(O)·ν₂(O)`.
pub fn exterior_square(o: &CMat) -> Result<CMat> {
    let (d2, d1) = o.shape();
    for dim in [d1, d2] {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { dim, min: 2 });
        }
    }
    let rows = pairs(d2);
    let cols = pairs(d1);
    Ok(CMat::from_fn(rows.len(), cols.len(), |r, s| {
        let (i, j) = rows[r];
        let (k, l) = cols[s];
        o[(i, k)] * o[(j, l)] - o[(i, l)] * o[(j, k)]
    }))
}

/// `ω^p` with `ω = e^{2πi/D}`, reducing the exponent first so that equal
/// phases come out bit-identical.
fn root_of_unity(dim: usize, power: usize) -> Complex64 {
    let p = power % dim;
    if p == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, 2.0 * PI * p as f64 / dim as f64)
}

/// Generalized Pauli basis `U_{jk} = Λ₁^j Λ₃^k`, returned in order `j·D + k`.
///
/// `Λ₁|n> = |n+1 mod D>` is the shift and `Λ₃|n> = ω^n|n>` the clock, so
/// `U_{jk}|n> = ω^{kn}|n+j mod D>`.
pub fn clock_shift_basis(dim: usize) -> Result<Vec<CMat>> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { dim, min: 2 });
    }
    let mut out = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            let mut u = CMat::zeros(dim, dim);
            for n in 0..dim {
                u[((n + j) % dim, n)] = root_of_unity(dim, k * n);
            }
            out.push(u);
        }
    }
    Ok(out)
}

fn common_shape(set: &[CMat]) -> Result<(usize, usize)> {
    let shape = set.first().map(|m| m.shape()).unwrap_or((0, 0));
    for m in set {
        if m.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: m.shape(),
            });
        }
    }
    Ok(shape)
}

/// Hilbert–Schmidt Gram matrix `M_{x,x'} = Tr(Q_x† Q_x')`.
pub fn gram_matrix(set: &[CMat]) -> Result<CMat> {
    common_shape(set)?;
    let n = set.len();
    let mut g = CMat::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = set[a].dotc(&set[b]);
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

/// Rank of the Gram matrix: the number of eigenvalues above `tol·λ_max`.
///
/// The nonzero spectrum of `V†V` equals that of `VV†`, where the columns of
/// `V` are the vectorized members, so the rank is read off the
/// `(rows·cols)`-dimensional frame operator. That keeps the cost independent
/// of the number of members.
pub fn gram_rank(set: &[CMat], tol: f64) -> Result<usize> {
    let (rows, cols) = common_shape(set)?;
    let m = rows * cols;
    if set.is_empty() || m == 0 {
        return Ok(0);
    }
    let mut frame = CMat::zeros(m, m);
    for q in set {
        let v = nalgebra::DVector::from_iterator(m, q.iter().copied());
        frame.gerc(Complex64::new(1.0, 0.0), &v, &v, Complex64::new(1.0, 0.0));
    }
    let values = herm_eigenvalues(&frame);
    let top = values.first().copied().unwrap_or(0.0);
    if top <= 0.0 {
        return Ok(0);
    }
    Ok(values.iter().filter(|&&v| v > tol * top).count())
}
