//! Builtin Kraus families.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matcore::{c, from_real_rows, CMat};
use crate::mpschain::KrausFamily;

/// Spin-1 AKLT tensor in the `{0, +, −}` basis, left-normalized.
///
/// `A_0 = −σ_z/√3`, `A_+ = √(2/3)|1⟩⟨0|`, `A_− = −√(2/3)|0⟩⟨1|`.
pub fn aklt() -> KrausFamily {
    let a = 1.0 / 3.0_f64.sqrt();
    let b = (2.0 / 3.0_f64).sqrt();
    KrausFamily::new(vec![
        from_real_rows(2, 2, &[-a, 0.0, 0.0, a]),
        from_real_rows(2, 2, &[0.0, 0.0, b, 0.0]),
        from_real_rows(2, 2, &[0.0, -b, 0.0, 0.0]),
    ])
    .expect("AKLT family is normalized")
}

/// AKLT tensor in the Pauli basis: `σ_x/√3, σ_y/√3, σ_z/√3`.
pub fn aklt_pauli() -> KrausFamily {
    let s = 1.0 / 3.0_f64.sqrt();
    KrausFamily::new(vec![
        from_real_rows(2, 2, &[0.0, s, s, 0.0]),
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -s), c(0.0, s), c(0.0, 0.0)]),
        from_real_rows(2, 2, &[s, 0.0, 0.0, -s]),
    ])
    .expect("Pauli family is normalized")
}

/// Nilpotent shift plus a sink on a `(dim + 1)`-dimensional bond space:
/// `A_0 = Σ_{k<dim} |k+1⟩⟨k|`, `A_1 = |dim⟩⟨dim|`.
pub fn jordan(dim: usize) -> Result<KrausFamily> {
    if dim < 1 {
        return Err(Error::DimensionTooSmall { dim, min: 1 });
    }
    let n = dim + 1;
    let mut a0 = CMat::zeros(n, n);
    for k in 0..dim {
        a0[(k + 1, k)] = c(1.0, 0.0);
    }
    let mut a1 = CMat::zeros(n, n);
    a1[(dim, dim)] = c(1.0, 0.0);
    KrausFamily::new(vec![a0, a1])
}

/// Classical Markov chain with row-stochastic `P[i][j] = P(j|i)`.
///
/// Symbol `i·m + j` carries `√P(j|i)|j⟩⟨i|`, so every Kraus operator has rank one.
pub fn markov(p: &[Vec<f64>]) -> Result<KrausFamily> {
    let m = p.len();
    if m == 0 {
        return Err(Error::DimensionTooSmall { dim: 0, min: 1 });
    }
    for row in p {
        if row.len() != m {
            return Err(Error::ShapeMismatch {
                expected: (m, m),
                found: (m, row.len()),
            });
        }
        if row.iter().any(|&x| !x.is_finite() || x < 0.0) {
            return Err(Error::InvalidDistribution {
                reason: "transition probabilities must be non-negative".into(),
            });
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution {
                reason: format!("transition row sums to {total}"),
            });
        }
    }
    let mut ops = Vec::with_capacity(m * m);
    for (i, row) in p.iter().enumerate() {
        for (j, &pij) in row.iter().enumerate() {
            let mut a = CMat::zeros(m, m);
            a[(j, i)] = c(pij.sqrt(), 0.0);
            ops.push(a);
        }
    }
    KrausFamily::new(ops)
}

/// Unitary clock model on `dim` levels with `dim²` symbols.
///
/// Symbol `xi·dim + xj` carries `(1/dim) Σ_k ω^{k·xj} |k⟩⟨k+xi mod dim|`, a
/// unitary divided by `dim`. The transfer operator is the full depolarizer.
pub fn clock(dim: usize) -> Result<KrausFamily> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { dim, min: 2 });
    }
    let mut ops = Vec::with_capacity(dim * dim);
    for xi in 0..dim {
        for xj in 0..dim {
            let mut a = CMat::zeros(dim, dim);
            for k in 0..dim {
                let phase = 2.0 * PI * ((k * xj) % dim) as f64 / dim as f64;
                a[(k, (k + xi) % dim)] = Complex64::from_polar(1.0 / dim as f64, phase);
            }
            ops.push(a);
        }
    }
    KrausFamily::new(ops)
}

/// Amplitude damping: `A_0 = diag(1, √(1−γ))`, `A_1 = √γ|0⟩⟨1|`.
pub fn damping(gamma: f64) -> Result<KrausFamily> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange { value: gamma });
    }
    KrausFamily::new(vec![
        from_real_rows(2, 2, &[1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]),
        from_real_rows(2, 2, &[0.0, gamma.sqrt(), 0.0, 0.0]),
    ])
}
