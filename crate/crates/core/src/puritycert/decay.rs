use crate::enumerate::{map_products, ordered_sum};
use crate::error::{Error, Result};
use crate::matcore::{
    check_density_operator, exterior_square, herm_eigen, identity, operator_norm, singular_values,
    CMat,
};
use crate::mpschain::{sqrt_env, KrausFamily};

/// Series entries at or below this value count as zero in rate fits.
pub const ZERO_FLOOR: f64 = 1e-14;

/// Values `v(n)` with least-squares and Fekete rate estimates.
///
/// Rates are `None` when fewer than two positive values exist; `all_zero`
/// marks a series with no positive value, whose rate is `−∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub values: Vec<(usize, f64)>,
    pub fitted_rate: Option<f64>,
    pub fekete_rate: Option<f64>,
    /// Lengths whose value was dropped from the fit as zero.
    pub dropped: Vec<usize>,
    pub all_zero: bool,
}

impl DecaySeries {
    pub fn new(values: Vec<(usize, f64)>) -> Self {
        let (positive, dropped): (Vec<_>, Vec<_>) =
            values.iter().partition(|(_, v)| *v > ZERO_FLOOR);
        let dropped = dropped.into_iter().map(|(n, _)| n).collect();
        let all_zero = positive.is_empty();
        let fitted_rate = if positive.len() >= 2 {
            Some(least_squares_slope(&positive))
        } else {
            None
        };
        let fekete_rate = positive
            .iter()
            .filter(|(n, _)| *n > 0)
            .map(|(n, v)| v.ln() / *n as f64)
            .reduce(f64::min);
        Self {
            values,
            fitted_rate,
            fekete_rate,
            dropped,
            all_zero,
        }
    }

    pub fn value_at(&self, n: usize) -> Option<f64> {
        self.values.iter().find(|(m, _)| *m == n).map(|(_, v)| *v)
    }
}

fn least_squares_slope(points: &[(usize, f64)]) -> f64 {
    let m = points.len() as f64;
    let mean_x = points.iter().map(|(n, _)| *n as f64).sum::<f64>() / m;
    let mean_y = points.iter().map(|(_, v)| v.ln()).sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (n, v) in points {
        let dx = *n as f64 - mean_x;
        sxy += dx * (v.ln() - mean_y);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// `(fitted_rate, fekete_rate)`; needs at least three positive values.
pub fn estimate_rate(series: &DecaySeries) -> Result<(f64, f64)> {
    if series.all_zero {
        return Err(Error::AllZeroSeries);
    }
    let found = series.values.len() - series.dropped.len();
    if found < 3 {
        return Err(Error::TooFewPoints { found, needed: 3 });
    }
    Ok((
        series.fitted_rate.expect("three positive points"),
        series.fekete_rate.expect("three positive points"),
    ))
}

fn nu12(o: &CMat) -> f64 {
    let s = singular_values(o);
    s.nth(0) * s.nth(1)
}

/// `w(n) = Σ_x ν₁ν₂(A_{x_n}⋯A_{x_1})`
pub fn w_value(k: &KrausFamily, n: usize, guard: u64) -> Result<f64> {
    let terms = map_products(k.ops(), &identity(k.bond_dim()), n, guard, |_, w| nu12(w))?;
    Ok(ordered_sum(terms))
}

/// `w(n)` through `Σ_x ‖∧²(A_{x_n}⋯A_{x_1})‖`.
pub fn w_value_exterior(k: &KrausFamily, n: usize, guard: u64) -> Result<f64> {
    if k.bond_dim() < 2 {
        return Ok(0.0);
    }
    let terms = map_products(k.ops(), &identity(k.bond_dim()), n, guard, |_, w| {
        exterior_square(w).map(|e| operator_norm(&e))
    })?;
    Ok(ordered_sum(terms.into_iter().collect::<Result<Vec<_>>>()?))
}

/// `w(1..=n_max)`. Both evaluations are computed and must agree to 1e-9.
pub fn w_series(k: &KrausFamily, n_max: usize, guard: u64) -> Result<DecaySeries> {
    let mut values = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let a = w_value(k, n, guard)?;
        let b = w_value_exterior(k, n, guard)?;
        if (a - b).abs() > 1e-9 {
            return Err(Error::ContractViolation {
                what: format!("w({n}) differs between routes: {a} vs {b}"),
            });
        }
        values.push((n, a));
    }
    Ok(DecaySeries::new(values))
}

/// Pairs `(n, m, excess)` with `w(n+m) > w(n)·w(m) + 1e-12`.
pub fn submultiplicativity_violations(series: &DecaySeries) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for &(n, vn) in &series.values {
        for &(m, vm) in &series.values {
            if m < n {
                continue;
            }
            if let Some(vnm) = series.value_at(n + m) {
                let excess = vnm - vn * vm;
                if excess > 1e-12 {
                    out.push((n, m, excess));
                }
            }
        }
    }
    out
}

/// `f(n) = Σ_x ν₁ν₂(F A_{x_n}⋯A_{x_1} √σ)` for `n = 1..=n_max`.
pub fn f_series(
    k: &KrausFamily,
    sigma: &CMat,
    f_op: &CMat,
    n_max: usize,
    guard: u64,
) -> Result<DecaySeries> {
    let dim = k.bond_dim();
    crate::matcore::ensure_shape(sigma, dim, dim)?;
    crate::matcore::ensure_shape(f_op, dim, dim)?;
    check_density_operator(sigma)?;
    let top = herm_eigen(&(f_op.adjoint() * f_op), 1e-8)?.max();
    if top > 1.0 + 1e-10 {
        return Err(Error::FNotContractive {
            max_eigenvalue: top,
        });
    }
    let root = sqrt_env(sigma)?;
    let mut values = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let terms = map_products(k.ops(), &root, n, guard, |_, w| nu12(&(f_op * w)))?;
        values.push((n, ordered_sum(terms)));
    }
    Ok(DecaySeries::new(values))
}
