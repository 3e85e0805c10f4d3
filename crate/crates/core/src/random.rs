//! Seeded random matrices.
//!
//! Every generator here is `ChaCha8Rng`, seeded from a `u64`. Independent
//! streams (one per trajectory, one per seed in a sweep) are obtained with
//! [`stream_rng`], which keeps the seed and selects ChaCha stream `stream`.

use nalgebra::linalg::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{hermitian_part, trace, CMat};

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of iid standard complex Gaussians (unit variance per entry),
/// filled row by row.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    CMat::from_row_slice(rows, cols, &entries)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the columns of `Q`
/// rephased by `conj(r_ii)/|r_ii|`.
pub fn haar_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    let g = ginibre(rng, dim, dim);
    let qr = QR::new(g);
    let r = qr.r();
    let mut q = qr.q();
    for i in 0..dim {
        let rii = r[(i, i)];
        let norm = rii.norm();
        let phase = if norm > 0.0 {
            rii / norm
        } else {
            Complex64::new(1.0, 0.0)
        };
        // Q R = (Q Λ)(Λ† R) with Λ = diag(r_ii/|r_ii|) makes diag(R) positive.
        let mut col = q.column_mut(i);
        col *= phase;
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMat {
    hermitian_part(&ginibre(rng, dim, dim))
}

/// Random density operator `G G† / Tr(G G†)` with `G` a `dim x rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> CMat {
    let g = ginibre(rng, dim, rank.max(1));
    let m = &g * g.adjoint();
    let tr = trace(&m);
    hermitian_part(&(m / tr))
}

/// Random `F` with `F†F ⪯ 1`: a Ginibre matrix divided by its operator norm
/// and shrunk by `scale ∈ (0, 1]`.
pub fn random_contraction<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> CMat {
    let g = ginibre(rng, dim, dim);
    let norm = crate::matcore::operator_norm(&g);
    g * Complex64::new(scale / norm, 0.0)
}
