//! Exhaustive enumeration of measurement strings.
//!
//! Strings of length `n` over `d` symbols are visited in lexicographic order
//! with `x_1` most significant. Work is split into prefix chunks that run on
//! the rayon pool. Results come back in string order regardless of the
//! thread count, and callers reduce them sequentially, so sums are
//! bit-identical across runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matcore::CMat;

/// Default cap on `dⁿ`.
pub const DEFAULT_GUARD: u64 = 2_000_000;

/// Prefix chunks are made at least this numerous when `n` allows.
const MIN_CHUNKS: usize = 64;

/// `dⁿ`, saturating at `u128::MAX`.
pub fn string_count(d: usize, n: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..n {
        total = total.saturating_mul(d as u128);
    }
    total
}

/// Errors with [`Error::EnumerationTooLarge`] when `dⁿ > guard`.
pub fn check_guard(d: usize, n: usize, guard: u64) -> Result<usize> {
    let requested = string_count(d, n);
    if requested > guard as u128 {
        return Err(Error::EnumerationTooLarge { requested, guard });
    }
    Ok(requested as usize)
}

/// Symbols `x_1..x_n` of the string with lexicographic index `idx`.
pub fn index_to_symbols(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % d;
        idx /= d;
    }
    out
}

/// Applies `f(symbols, A_{x_n}⋯A_{x_1}·init)` to every string of length `n`.
///
/// Results are returned in lexicographic string order.
pub fn map_products<T, F>(ops: &[CMat], init: &CMat, n: usize, guard: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[usize], &CMat) -> T + Sync,
{
    let d = ops.len();
    check_guard(d, n, guard)?;
    let mut depth = 0;
    let mut chunks = 1usize;
    while depth < n && chunks < MIN_CHUNKS {
        depth += 1;
        chunks *= d;
    }
    let per_chunk: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let prefix = index_to_symbols(chunk, d, depth);
            let mut w = init.clone();
            for &x in &prefix {
                w = &ops[x] * w;
            }
            let mut out = Vec::new();
            let mut symbols = prefix;
            walk(ops, &w, n, &mut symbols, &f, &mut out);
            out
        })
        .collect();
    Ok(per_chunk.into_iter().flatten().collect())
}

fn walk<T, F>(ops: &[CMat], w: &CMat, n: usize, symbols: &mut Vec<usize>, f: &F, out: &mut Vec<T>)
where
    F: Fn(&[usize], &CMat) -> T,
{
    if symbols.len() == n {
        out.push(f(symbols, w));
        return;
    }
    for (x, a) in ops.iter().enumerate() {
        let next = a * w;
        symbols.push(x);
        walk(ops, &next, n, symbols, f, out);
        symbols.pop();
    }
}

/// Left-to-right sum; the reduction order is part of the determinism contract.
pub fn ordered_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |acc, v| acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::identity;
    use crate::zoo;

    #[test]
    fn order_is_lexicographic_and_products_match() {
        let k = zoo::aklt();
        let seen = map_products(k.ops(), &identity(2), 4, DEFAULT_GUARD, |s, w| {
            (s.to_vec(), w.clone())
        })
        .unwrap();
        assert_eq!(seen.len(), 81);
        for (idx, (symbols, w)) in seen.iter().enumerate() {
            assert_eq!(symbols, &index_to_symbols(idx, 3, 4));
            assert!((w - k.product(symbols).unwrap()).norm() < 1e-15);
        }
    }

    #[test]
    fn guard_and_empty_string() {
        assert!(matches!(
            check_guard(3, 20, DEFAULT_GUARD),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert_eq!(check_guard(2, 10, 1024).unwrap(), 1024);
        let out = map_products(zoo::aklt().ops(), &identity(2), 0, 10, |s, _| s.len()).unwrap();
        assert_eq!(out, vec![0]);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let k = zoo::aklt_pauli();
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    let v = map_products(k.ops(), &identity(2), 6, DEFAULT_GUARD, |_, w| {
                        w.norm_squared()
                    })
                    .unwrap();
                    ordered_sum(v)
                })
        };
        let one = run(1);
        assert_eq!(one.to_bits(), run(4).to_bits());
        assert_eq!(one.to_bits(), run(7).to_bits());
    }
}
