//! The `analyze` pipeline and its JSON report.
//!
//! Two contexts appear side by side. The infinite context uses the transfer
//! fixed point as left environment and no right block; the finite context
//! is a chain `(lenA, N, lenC)` with explicit boundary vectors, on which the
//! classical CMI of the measured distribution is also evaluated.

use mpscmi::enumerate::string_count;
use mpscmi::gibbsfit::{
    cmi_terms, gibbs_distribution, local_hamiltonian, log_partition_function, partition_function,
    relative_entropy, ChainDistribution,
};
use mpscmi::matcore::CVec;
use mpscmi::mpschain::{fixed_point, normalization_residual, BoundaryPair, ChainGeometry};
use mpscmi::puritycert::{purity_verdict_with_tol, w_value, DecaySeries, PurityVerdict};
use mpscmi::restriction::{chain_distribution, cmi_report, summarize, RestrictionContext};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::model::Model;

pub const SCHEMA: &str = "mpscmi.analyze";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeSettings {
    pub n_max: usize,
    /// `None` runs every valid window width.
    pub ell: Option<usize>,
    /// `(lenA, lenB, lenC)`; `lenB` sizes the chain of the Gibbs block.
    pub geometry: Option<(usize, usize, usize)>,
    pub seed: u64,
    pub guard: u64,
    pub tol: f64,
    pub smoothing: Option<f64>,
}

impl Default for AnalyzeSettings {
    fn default() -> Self {
        Self {
            n_max: 6,
            ell: None,
            geometry: None,
            seed: 0,
            guard: mpscmi::enumerate::DEFAULT_GUARD,
            tol: mpscmi::puritycert::VERDICT_TOL,
            smoothing: None,
        }
    }
}

pub const DEFAULT_GEOMETRY: (usize, usize, usize) = (2, 2, 2);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub schema_version: u32,
    pub library_version: &'static str,
    pub model: ModelInfo,
    pub settings: SettingsInfo,
    pub diagnostics: Diagnostics,
    pub table: Vec<Row>,
    pub rates: Rates,
    pub purity: PurityBlock,
    pub gibbs: GibbsBlock,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelInfo {
    pub label: String,
    pub d: usize,
    #[serde(rename = "D")]
    pub bond_dim: usize,
    pub boundaries: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SettingsInfo {
    pub nmax: usize,
    pub ell: Option<usize>,
    pub geometry: [usize; 3],
    pub seed: u64,
    pub guard: u64,
    pub tol: f64,
    pub smoothing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub normalization_residual: f64,
    pub transfer_gap: f64,
    pub primitive: bool,
    pub fixed_space_multiplicity: usize,
}

/// One length `N` of the measured block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub n: usize,
    pub p_sum: f64,
    pub avg_entropy: f64,
    pub quantum_cmi: f64,
    pub q: f64,
    pub q_lower: f64,
    pub q_upper: f64,
    pub f: f64,
    pub w: f64,
    pub finite_avg_entropy: f64,
    pub finite_quantum_cmi: f64,
    pub finite_classical_cmi: f64,
}

/// Least-squares and Fekete rates of `ln v(N)`; `null` when undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rates {
    /// Lengths with `w(N) = 0`, left out of the `w` fits.
    pub w_zero_at: Vec<usize>,
    pub w_fitted: Option<f64>,
    pub w_fekete: Option<f64>,
    pub entropy_fitted: Option<f64>,
    pub finite_entropy_fitted: Option<f64>,
    pub f_fitted: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrectableEntry {
    pub n: usize,
    pub max_rank: usize,
    pub upper_bound: usize,
    pub certified: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurityBlock {
    pub status: &'static str,
    pub n_max: usize,
    pub decided_at: Option<usize>,
    pub extends_to_all_n: bool,
    pub span_ranks: Vec<usize>,
    pub span_passed_at: Option<usize>,
    pub correctable: Vec<CorrectableEntry>,
    pub evidence: String,
}

impl From<&PurityVerdict> for PurityBlock {
    fn from(v: &PurityVerdict) -> Self {
        Self {
            status: v.status.as_str(),
            n_max: v.n_max,
            decided_at: v.decided_at,
            extends_to_all_n: v.extends_to_all_n,
            span_ranks: v.span.ranks.clone(),
            span_passed_at: v.span.passed_at,
            correctable: v
                .correctable
                .levels
                .iter()
                .map(|l| CorrectableEntry {
                    n: l.n,
                    max_rank: l.max_rank,
                    upper_bound: l.upper_bound,
                    certified: l.certified(),
                    residual: l.proportionality_residual,
                })
                .collect(),
            evidence: v.evidence.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GibbsEntry {
    pub ell: usize,
    pub relative_entropy: f64,
    pub cmi_sum: f64,
    pub partition_function: f64,
    pub log_partition_function: f64,
}

/// The Gibbs reconstruction needs strictly positive marginals. Without
/// smoothing, a distribution with zeros is reported as skipped.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GibbsBlock {
    Computed {
        len: usize,
        smoothing: Option<f64>,
        min_entry: f64,
        terms: Vec<GibbsEntry>,
    },
    Skipped {
        len: usize,
        reason: String,
    },
}

fn uniform_vector(dim: usize) -> CVec {
    CVec::from_element(dim, Complex64::new(1.0 / (dim as f64).sqrt(), 0.0))
}

/// Model boundaries if given, else `L = R = (1, …, 1)/√D`.
pub fn boundaries_for(model: &Model) -> CliResult<(BoundaryPair, &'static str)> {
    match &model.boundaries {
        Some(b) => Ok((b.clone(), "model")),
        None => {
            let v = uniform_vector(model.kraus.bond_dim());
            Ok((BoundaryPair::new(v.clone(), v)?, "uniform"))
        }
    }
}

fn gibbs_block(p: &ChainDistribution, settings: &AnalyzeSettings) -> CliResult<GibbsBlock> {
    let len = p.len();
    let max_ell = len.saturating_sub(2);
    let ells: Vec<usize> = match settings.ell {
        Some(ell) => vec![ell],
        None => (1..=max_ell).collect(),
    };
    let p = match settings.smoothing {
        Some(eps) => p.smoothed(eps)?,
        None => p.clone(),
    };
    let mut terms = Vec::with_capacity(ells.len());
    for ell in ells {
        let h = match local_hamiltonian(&p, ell) {
            Ok(h) => h,
            Err(mpscmi::Error::NonPositiveMarginal { j, k }) => {
                return Ok(GibbsBlock::Skipped {
                    len,
                    reason: format!(
                        "marginal over sites {j}..={k} has a zero entry; rerun with --smooth"
                    ),
                })
            }
            Err(e) => return Err(e.into()),
        };
        let q = gibbs_distribution(&h)?;
        terms.push(GibbsEntry {
            ell,
            relative_entropy: relative_entropy(&p, &q)?,
            cmi_sum: cmi_terms(&p, ell)?.iter().sum(),
            partition_function: partition_function(&h),
            log_partition_function: log_partition_function(&h),
        });
    }
    Ok(GibbsBlock::Computed {
        len,
        smoothing: settings.smoothing,
        min_entry: p.min_entry(),
        terms,
    })
}

fn fitted(values: Vec<(usize, f64)>) -> Option<f64> {
    DecaySeries::new(values).fitted_rate
}

pub fn analyze(model: &Model, settings: &AnalyzeSettings) -> CliResult<Report> {
    let k = &model.kraus;
    if settings.n_max == 0 {
        return Err(CliError::Guard(mpscmi::Error::EmptyString));
    }
    let (a, b, c) = settings
        .geometry
        .or(model.geometry.map(|g| (g.len_a, g.len_b, g.len_c)))
        .unwrap_or(DEFAULT_GEOMETRY);
    let gibbs_geometry = ChainGeometry::new(a, b, c)?;
    // every enumeration is checked up front so that a guard violation is
    // reported before any work is done
    let largest = (a + settings.n_max + c).max(gibbs_geometry.total());
    if string_count(k.d(), largest) > settings.guard as u128 {
        return Err(CliError::Guard(mpscmi::Error::EnumerationTooLarge {
            requested: string_count(k.d(), largest),
            guard: settings.guard,
        }));
    }
    let (bp, boundary_source) = boundaries_for(model)?;

    let fp = fixed_point(k, 1e-10)?;
    let infinite = RestrictionContext::infinite(k)?.with_guard(settings.guard);

    let mut table = Vec::with_capacity(settings.n_max);
    for n in 1..=settings.n_max {
        let s = summarize(&infinite, n)?;
        let geometry = ChainGeometry::new(a, n, c)?;
        let finite = cmi_report(k, &bp, &geometry, settings.guard)?;
        table.push(Row {
            n,
            p_sum: s.probability_sum,
            avg_entropy: s.avg_entropy,
            quantum_cmi: s.quantum_cmi(),
            q: s.avg_purity_q,
            q_lower: s.q_lower,
            q_upper: s.q_upper,
            f: s.f_value,
            w: w_value(k, n, settings.guard)?,
            finite_avg_entropy: finite.avg_entropy,
            finite_quantum_cmi: finite.quantum_cmi,
            finite_classical_cmi: finite.classical_cmi,
        });
    }

    let w_series = DecaySeries::new(table.iter().map(|r| (r.n, r.w)).collect());
    let rates = Rates {
        w_zero_at: w_series.dropped.clone(),
        w_fitted: w_series.fitted_rate,
        w_fekete: w_series.fekete_rate,
        entropy_fitted: fitted(table.iter().map(|r| (r.n, r.avg_entropy)).collect()),
        finite_entropy_fitted: fitted(table.iter().map(|r| (r.n, r.finite_avg_entropy)).collect()),
        f_fitted: fitted(table.iter().map(|r| (r.n, r.f)).collect()),
    };

    let verdict = purity_verdict_with_tol(k, settings.n_max, settings.tol, settings.guard)?;
    let p = chain_distribution(k, &bp, &gibbs_geometry, settings.guard)?;
    let gibbs = gibbs_block(&p, settings)?;

    let report = Report {
        schema: SCHEMA,
        schema_version: SCHEMA_VERSION,
        library_version: env!("CARGO_PKG_VERSION"),
        model: ModelInfo {
            label: model.label.clone(),
            d: k.d(),
            bond_dim: k.bond_dim(),
            boundaries: boundary_source,
        },
        settings: SettingsInfo {
            nmax: settings.n_max,
            ell: settings.ell,
            geometry: [a, b, c],
            seed: settings.seed,
            guard: settings.guard,
            tol: settings.tol,
            smoothing: settings.smoothing,
        },
        diagnostics: Diagnostics {
            normalization_residual: normalization_residual(k.ops()),
            transfer_gap: fp.gap,
            primitive: fp.primitive,
            fixed_space_multiplicity: fp.multiplicity,
        },
        table,
        rates,
        purity: PurityBlock::from(&verdict),
        gibbs,
    };
    ensure_finite(&report)?;
    Ok(report)
}

/// Rejects reports with a non-finite number; JSON would print it as `null`.
fn ensure_finite(report: &Report) -> CliResult<()> {
    let mut values: Vec<f64> = Vec::new();
    for r in &report.table {
        values.extend([
            r.p_sum,
            r.avg_entropy,
            r.quantum_cmi,
            r.q,
            r.q_lower,
            r.q_upper,
            r.f,
            r.w,
            r.finite_avg_entropy,
            r.finite_quantum_cmi,
            r.finite_classical_cmi,
        ]);
    }
    let rates = &report.rates;
    values.extend(
        [
            rates.w_fitted,
            rates.w_fekete,
            rates.entropy_fitted,
            rates.finite_entropy_fitted,
            rates.f_fitted,
        ]
        .into_iter()
        .flatten(),
    );
    values.extend([
        report.diagnostics.normalization_residual,
        report.diagnostics.transfer_gap,
    ]);
    values.extend(report.purity.correctable.iter().map(|c| c.residual));
    if let GibbsBlock::Computed {
        terms, min_entry, ..
    } = &report.gibbs
    {
        values.push(*min_entry);
        for t in terms {
            values.extend([
                t.relative_entropy,
                t.cmi_sum,
                t.partition_function,
                t.log_partition_function,
            ]);
        }
    }
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Numeric(mpscmi::Error::NonFinite))
    }
}

pub fn to_json(report: &Report) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn table_csv(report: &Report) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.table {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Write(e.to_string()))
}
