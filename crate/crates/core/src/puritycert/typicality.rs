use crate::error::{Error, Result};
use crate::matcore::{clock_shift_basis, herm_eigen, identity, psd_sqrt, CMat, ONE};
use crate::mpschain::KrausFamily;
use crate::random::{haar_unitary, seeded_rng};

/// Kraus family `A_x = ⟨a_x|U|a_0⟩` of a Haar-random unitary on `C^D ⊗ C^d`.
///
/// Composite index of `|i⟩|a_x⟩` is `i·d + x`.
pub fn haar_kraus(dim: usize, d: usize, seed: u64) -> Result<KrausFamily> {
    for n in [dim, d] {
        if n < 2 {
            return Err(Error::DimensionTooSmall { dim: n, min: 2 });
        }
    }
    let u = haar_unitary(&mut seeded_rng(seed), dim * d);
    kraus_from_unitary(&u, dim, d)
}

fn kraus_from_unitary(u: &CMat, dim: usize, d: usize) -> Result<KrausFamily> {
    let ops = (0..d)
        .map(|x| CMat::from_fn(dim, dim, |i, j| u[(i * d + x, j * d)]))
        .collect();
    KrausFamily::new(ops)
}

fn check_odd(dim: usize) -> Result<()> {
    if dim < 3 {
        return Err(Error::DimensionTooSmall { dim, min: 3 });
    }
    if dim.is_multiple_of(2) {
        return Err(Error::EvenDimension { dim });
    }
    Ok(())
}

/// Clock/shift indices `(j, k)` whose coefficients are free for a Hermitian
/// operator; their negatives are fixed by conjugation.
fn free_indices(dim: usize) -> Vec<(usize, usize)> {
    let h = (dim - 1) / 2;
    let mut out = Vec::new();
    out.extend((1..=h).map(|n| (n, 0)));
    out.extend((1..=h).map(|m| (0, m)));
    for n in 1..=h {
        out.extend((1..=h).map(|m| (n, m)));
    }
    for n in 1..=h {
        out.extend((h + 1..dim).map(|m| (n, m)));
    }
    out
}

/// `R = 𝟙/2 + c Σ_free (U_f + U_f†)` with `c = 1/(2(D²−1))`.
///
/// There are `(D²−1)/2` free terms, so the perturbation has norm at most
/// `1/2` and `0 ⪯ R ⪯ 𝟙`. Every `U_{jk}` is a free index or the adjoint of
/// one (up to phase), so all overlaps `Tr(U_{jk}†R)` are nonzero.
pub fn build_r_operator(dim: usize) -> Result<CMat> {
    check_odd(dim)?;
    let basis = clock_shift_basis(dim)?;
    let c = 1.0 / (2.0 * (dim * dim - 1) as f64);
    let mut r = identity(dim).scale(0.5);
    for (j, k) in free_indices(dim) {
        let u = &basis[j * dim + k];
        r += (u + u.adjoint()).scale(c);
    }
    let min = herm_eigen(&r, 1e-12)?.min();
    if min < -1e-12 {
        return Err(Error::ContractViolation {
            what: format!("R has eigenvalue {min:.3e}"),
        });
    }
    Ok(r)
}

/// Appends canonical basis vectors, orthogonalized in order, until `cols`
/// spans the whole space.
fn complete_to_unitary(v: &CMat) -> Result<CMat> {
    let n = v.nrows();
    let mut cols: Vec<crate::matcore::CVec> = v.column_iter().map(|c| c.into_owned()).collect();
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let mut cand = crate::matcore::CVec::zeros(n);
        cand[e] = ONE;
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &cols {
                let proj = q.dotc(&cand);
                cand -= q * proj;
            }
        }
        let norm = cand.norm();
        if norm > 1e-6 {
            cols.push(cand / num_complex::Complex64::new(norm, 0.0));
        }
    }
    if cols.len() != n {
        return Err(Error::CompletionFailed {
            residual: (n - cols.len()) as f64,
        });
    }
    Ok(CMat::from_columns(&cols))
}

/// A constructive family whose length-`(2D−1)` products span `L(C^D)`.
///
/// The first `D` columns of the unitary (those with ancilla input `|a_0⟩`)
/// are fixed by `A_0 = √R/2, A_1 = Λ₁/2, A_2 = √(𝟙−R)/2, A_3 = Λ₃/2,
/// A_4 = 𝟙/2` and `A_x = 0` for `x ≥ 5`. The remaining columns are a
/// deterministic Gram–Schmidt completion.
pub fn constructive_purity_family(dim: usize, d: usize) -> Result<KrausFamily> {
    check_odd(dim)?;
    if d < 5 {
        return Err(Error::DimensionTooSmall { dim: d, min: 5 });
    }
    let r = build_r_operator(dim)?;
    let basis = clock_shift_basis(dim)?;
    let blocks = [
        psd_sqrt(&r)?,
        basis[dim].clone(),
        psd_sqrt(&(identity(dim) - &r))?,
        basis[1].clone(),
        identity(dim),
    ];
    let n = dim * d;
    // columns j·d of U, reordered to the front
    let mut v = CMat::zeros(n, dim);
    for (x, b) in blocks.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                v[(i * d + x, j)] = b[(i, j)] * 0.5;
            }
        }
    }
    let front = complete_to_unitary(&v)?;
    // place column c of `front` at position j·d for the first D, then fill
    let mut u = CMat::zeros(n, n);
    let mut rest = dim..n;
    for slot in 0..n {
        let src = if slot % d == 0 {
            slot / d
        } else {
            rest.next().expect("column count matches")
        };
        u.set_column(slot, &front.column(src));
    }
    let residual = (u.adjoint() * &u - identity(n)).norm();
    if residual > 1e-10 {
        return Err(Error::CompletionFailed { residual });
    }
    kraus_from_unitary(&u, dim, d)
}

/// Strings `(4^{2D−2−j−k}, 3^k, 1^j, 0)` for `j, k = 0..D−1`, in order `j·D + k`.
pub fn constructive_strings(dim: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(dim * dim);
    for j in 0..dim {
        for k in 0..dim {
            let mut s = vec![4; 2 * dim - 2 - j - k];
            s.extend(std::iter::repeat_n(3, k));
            s.extend(std::iter::repeat_n(1, j));
            s.push(0);
            out.push(s);
        }
    }
    out
}

/// The `D²` products `W†W` along [`constructive_strings`]; each equals
/// `U_{jk}† R U_{jk}` up to a positive factor.
pub fn constructive_q_set(k: &KrausFamily) -> Result<Vec<CMat>> {
    constructive_strings(k.bond_dim())
        .iter()
        .map(|s| {
            let w = k.product(s)?;
            Ok(w.adjoint() * w)
        })
        .collect()
}
