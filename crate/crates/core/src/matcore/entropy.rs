use super::{herm_eigen, trace, CMat};
use crate::error::{Error, Result};

/// Eigenvalues in `[-NEG_CLAMP, 0)` are read as zero.
const NEG_CLAMP: f64 = 1e-10;

/// A probability vector: non-negative weights summing to one (to 1e-10).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVec(Vec<f64>);

impl ProbVec {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution {
                reason: "empty".into(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidDistribution {
                reason: format!("weight {w} is negative or not finite"),
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidDistribution {
                reason: format!("weights sum to {total}"),
            });
        }
        Ok(Self(weights))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `H(p) = −Σ p ln p` in nats.
pub fn shannon_entropy(p: &ProbVec) -> f64 {
    -p.0.iter().map(|&x| xlnx(x)).sum::<f64>()
}

/// Entropy of a spectrum that already sums to one. Negative values down to
/// −1e-10 are clamped to zero and values above one to one.
pub fn entropy_of_eigenvalues(values: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &v in values {
        if v < -NEG_CLAMP {
            return Err(Error::NotDensityOperator {
                reason: format!("negative eigenvalue {v:.3e}"),
            });
        }
        s -= xlnx(v.clamp(0.0, 1.0));
    }
    Ok(s)
}

/// `S(rho) = −Tr rho ln rho` in nats.
pub fn von_neumann_entropy(rho: &CMat) -> Result<f64> {
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
        return Err(Error::NotDensityOperator {
            reason: format!("trace {tr} differs from 1"),
        });
    }
    let spec = herm_eigen(rho, 1e-8).map_err(|e| match e {
        Error::NonHermitian { .. } => Error::NotDensityOperator {
            reason: e.to_string(),
        },
        other => other,
    })?;
    entropy_of_eigenvalues(&spec.values)
}

fn check_unit(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfRange { value: t })
    }
}

/// `H_B(t) = −t ln t − (1−t) ln(1−t)`, zero at both ends.
pub fn binary_entropy(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(-xlnx(t) - xlnx(1.0 - t))
}

/// `g(t) = t − t ln t`, with `g(0) = 0`. Dominates the binary entropy on [0, 1].
pub fn g_func(t: f64) -> Result<f64> {
    check_unit(t)?;
    Ok(t - xlnx(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{diag_real, identity};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::LN_2;

    #[test]
    fn von_neumann_examples() {
        let s = von_neumann_entropy(&identity(2).scale(0.5)).unwrap();
        assert_abs_diff_eq!(s, LN_2, epsilon = 1e-14);
        assert_eq!(von_neumann_entropy(&diag_real(&[1.0, 0.0])).unwrap(), 0.0);
        let expected = -0.75 * 0.75_f64.ln() - 0.25 * 0.25_f64.ln();
        let s = von_neumann_entropy(&diag_real(&[0.75, 0.25])).unwrap();
        assert_abs_diff_eq!(s, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(s, 0.562335, epsilon = 1e-6);
    }

    #[test]
    fn von_neumann_clamps_tiny_negatives_only() {
        let s = von_neumann_entropy(&diag_real(&[1.0 + 5e-11, -5e-11])).unwrap();
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        assert!(matches!(
            von_neumann_entropy(&diag_real(&[1.1, -0.1])),
            Err(Error::NotDensityOperator { .. })
        ));
        assert!(matches!(
            von_neumann_entropy(&diag_real(&[0.5, 0.4])),
            Err(Error::NotDensityOperator { .. })
        ));
    }

    #[test]
    fn shannon_examples() {
        assert_eq!(
            shannon_entropy(&ProbVec::new(vec![1.0, 0.0, 0.0]).unwrap()),
            0.0
        );
        assert_abs_diff_eq!(
            shannon_entropy(&ProbVec::uniform(4)),
            4.0_f64.ln(),
            epsilon = 1e-14
        );
        let h = shannon_entropy(&ProbVec::new(vec![0.5, 0.25, 0.25]).unwrap());
        assert_abs_diff_eq!(h, 1.5 * LN_2, epsilon = 1e-14);
        assert_abs_diff_eq!(h, 1.039721, epsilon = 1e-6);
        assert!(ProbVec::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVec::new(vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn binary_entropy_examples() {
        assert_abs_diff_eq!(binary_entropy(0.5).unwrap(), LN_2, epsilon = 1e-15);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        let expected = -0.1 * 0.1_f64.ln() - 0.9 * 0.9_f64.ln();
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.325083, epsilon = 1e-6);
        assert!(matches!(binary_entropy(1.5), Err(Error::OutOfRange { .. })));
        assert!(matches!(g_func(-0.1), Err(Error::OutOfRange { .. })));
        assert_eq!(g_func(0.0).unwrap(), 0.0);
    }

    #[test]
    fn binary_entropy_sandwich_on_grid() {
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            let hb = binary_entropy(t).unwrap();
            assert!(hb <= g_func(t).unwrap() + 1e-15, "t = {t}");
            assert!(hb >= 4.0 * LN_2 * t * (1.0 - t) - 1e-15, "t = {t}");
        }
        // g is monotone on the grid
        let g: Vec<f64> = (0..=100)
            .map(|i| g_func(i as f64 / 100.0).unwrap())
            .collect();
        assert!(g.windows(2).all(|w| w[1] >= w[0]));
    }
}
