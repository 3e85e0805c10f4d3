use rand_chacha::ChaCha8Rng;

use crate::matcore::CMat;

pub fn rng(seed: u64) -> ChaCha8Rng {
    crate::random::seeded_rng(seed)
}

pub fn random_matrix(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    crate::random::ginibre(r, rows, cols)
}

pub fn random_hermitian(r: &mut ChaCha8Rng, n: usize) -> CMat {
    crate::random::random_hermitian(r, n)
}
