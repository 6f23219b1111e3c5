//! Period counts `P_n`, least-period counts `Q_n`, the truncated dynamical
//! zeta function and the Bowen growth proxy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_report, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::polymap::{Field, PolyMap};
use crate::series;
use crate::solver::{bezout_bound, solve, Completeness, SolveConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub solve: SolveConfig,
    pub eta: f64,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            solve: SolveConfig::default(),
            eta: DEFAULT_ETA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFlag {
    /// Some orbit has a multiplier modulus within eta of 1.
    Marginal,
    /// Some point failed the isolation certificate.
    Nonisolated,
    /// Enumeration not known to be complete (count is a lower bound).
    Incomplete,
    /// More points than `D^{nN}` over C: a solver defect.
    BezoutViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub n: usize,
    /// Isolated fixed points of the n-th iterate over the map's field.
    pub p: Option<u64>,
    /// Isolated points of least period exactly n.
    pub q: Option<u64>,
    pub complex_p: Option<u64>,
    pub bezout_bound: u128,
    pub completeness: Option<Completeness>,
    pub method: Option<String>,
    pub flags: Vec<RowFlag>,
    pub unavailable: Option<String>,
}

impl CensusRow {
    pub fn is_exact(&self) -> bool {
        self.unavailable.is_none() && self.flags.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusTable {
    pub map_hash: String,
    pub field: Field,
    pub dimension: usize,
    pub degree: u32,
    pub n_max: usize,
    pub rows: Vec<CensusRow>,
}

impl CensusTable {
    /// A table from externally supplied counts (no solver involved).
    pub fn from_counts(p: &[u64]) -> Self {
        CensusTable {
            map_hash: String::new(),
            field: Field::Complex,
            dimension: 1,
            degree: 1,
            n_max: p.len(),
            rows: p
                .iter()
                .enumerate()
                .map(|(i, &v)| CensusRow {
                    n: i + 1,
                    p: Some(v),
                    q: None,
                    complex_p: None,
                    bezout_bound: u128::MAX,
                    completeness: None,
                    method: None,
                    flags: Vec::new(),
                    unavailable: None,
                })
                .collect(),
        }
    }

    pub fn p(&self) -> Vec<Option<u64>> {
        self.rows.iter().map(|r| r.p).collect()
    }

    pub fn any_flagged(&self) -> bool {
        self.rows.iter().any(|r| !r.is_exact())
    }

    /// `P_n = sum_{d | n} Q_d` on every n whose divisor rows are all exact.
    /// Returns the first violating n.
    pub fn mobius_violation(&self) -> Option<usize> {
        for row in &self.rows {
            let n = row.n;
            let divisors: Vec<&CensusRow> = self.rows.iter().filter(|r| n % r.n == 0).collect();
            if divisors.iter().any(|r| !r.is_exact() || r.q.is_none()) {
                continue;
            }
            let sum: u64 = divisors.iter().map(|r| r.q.unwrap_or(0)).sum();
            if Some(sum) != row.p {
                return Some(n);
            }
        }
        None
    }

    pub fn bezout_violation(&self) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.flags.contains(&RowFlag::BezoutViolation))
            .map(|r| r.n)
    }

    /// CSV with columns `n,P_n,Q_n,log_P_n_over_n` (empty cells when unavailable).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,P_n,Q_n,log_P_n_over_n\n");
        for r in &self.rows {
            let p = r.p.map(|v| v.to_string()).unwrap_or_default();
            let q = r.q.map(|v| v.to_string()).unwrap_or_default();
            let b =
                r.p.filter(|&v| v >= 1)
                    .map(|v| format!("{:.12}", (v as f64).ln() / r.n as f64))
                    .unwrap_or_default();
            out.push_str(&format!("{},{p},{q},{b}\n", r.n));
        }
        out
    }
}

fn census_row(map: &PolyMap, n: usize, config: &CensusConfig) -> CensusRow {
    let bound = bezout_bound(map.dim(), map.degree(), n);
    let mut row = CensusRow {
        n,
        p: None,
        q: None,
        complex_p: None,
        bezout_bound: bound,
        completeness: None,
        method: None,
        flags: Vec::new(),
        unavailable: None,
    };
    let report = match solve(map, n, &config.solve) {
        Ok(r) => r,
        Err(e) => {
            row.unavailable = Some(e.to_string());
            return row;
        }
    };
    row.method = Some(report.method.clone());
    row.completeness = Some(report.completeness);
    row.complex_p = report.complex_count.map(|c| c as u64);
    row.p = Some(report.isolated_count() as u64);
    if report.check_bezout().is_err() {
        row.flags.push(RowFlag::BezoutViolation);
    }
    if report.has_nonisolated() {
        row.flags.push(RowFlag::Nonisolated);
    }
    let complete = report.completeness == Completeness::Certified || report.deficit == Some(0);
    if !complete {
        row.flags.push(RowFlag::Incomplete);
    }
    match classify_report(map, &report, config.eta) {
        Ok(orbits) => {
            if orbits.iter().any(|o| !o.is_hyperbolic()) {
                row.flags.push(RowFlag::Marginal);
            }
            let q: usize = orbits
                .iter()
                .filter(|o| o.least_period == n)
                .map(|o| o.points.len())
                .sum::<usize>();
            // orbit points are isolated unless flagged; subtract flagged ones
            let flagged_in_q = orbits
                .iter()
                .filter(|o| o.least_period == n)
                .flat_map(|o| o.points.iter())
                .filter(|x| {
                    report
                        .points
                        .iter()
                        .any(|p| &p.location == *x && !p.isolated_certificate)
                })
                .count();
            row.q = Some((q - flagged_in_q) as u64);
        }
        Err(e) => {
            row.unavailable = Some(format!("orbit partition failed: {e}"));
        }
    }
    row
}

/// Solve every period `1..=n_max` and assemble the table. Failed periods
/// are marked unavailable, never silently zero.
pub fn build_census(map: &PolyMap, n_max: usize, config: &CensusConfig) -> Result<CensusTable> {
    if n_max == 0 {
        return Err(Error::InvalidConfig("n_max must be >= 1".into()));
    }
    let rows: Vec<CensusRow> = (1..=n_max)
        .into_par_iter()
        .map(|n| census_row(map, n, config))
        .collect();
    Ok(CensusTable {
        map_hash: map.hash(),
        field: map.field(),
        dimension: map.dim(),
        degree: map.degree(),
        n_max,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaTruncation {
    pub order: usize,
    /// `c_0 .. c_M` of `exp(sum P_n z^n / n)`.
    pub coefficients: Vec<f64>,
    /// Cauchy-Hadamard estimate from the trailing `ceil(M/2)` coefficients.
    #[serde(with = "series::extended_f64")]
    pub radius_estimate: f64,
    /// Least C with `P_n <= e^{C n}` over the range; `None` when every P_n is 0.
    pub am_constant: Option<f64>,
    pub counts: Vec<u64>,
}

impl ZetaTruncation {
    /// Max relative deviation between `zeta'/zeta` and `sum P_n z^{n-1}`.
    pub fn log_derivative_error(&self) -> f64 {
        let q = series::divide(&series::derivative(&self.coefficients), &self.coefficients);
        q.iter()
            .zip(&self.counts)
            .map(|(a, &b)| {
                let b = b as f64;
                (a - b).abs() / b.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

pub fn zeta_from_counts(counts: &[u64]) -> ZetaTruncation {
    let m = counts.len();
    let coefficients = series::zeta_exp(&counts.iter().map(|&v| v as f64).collect::<Vec<_>>());
    let tail = m.div_ceil(2);
    let growth = ((m + 1 - tail)..=m)
        .filter(|&n| n >= 1 && coefficients[n] != 0.0)
        .map(|n| coefficients[n].abs().powf(1.0 / n as f64))
        .fold(0.0, f64::max);
    let radius_estimate = if growth > 0.0 {
        1.0 / growth
    } else {
        f64::INFINITY
    };
    let am_constant = counts
        .iter()
        .enumerate()
        .filter(|(_, &p)| p >= 1)
        .map(|(i, &p)| (p as f64).ln() / (i + 1) as f64)
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    ZetaTruncation {
        order: m,
        coefficients,
        radius_estimate,
        am_constant,
        counts: counts.to_vec(),
    }
}

/// Truncated zeta function through order `order`; refuses flagged rows.
pub fn zeta_truncation(table: &CensusTable, order: usize) -> Result<ZetaTruncation> {
    if order == 0 || order > table.n_max {
        return Err(Error::InvalidConfig(format!(
            "zeta order {order} outside 1..={}",
            table.n_max
        )));
    }
    let mut counts = Vec::with_capacity(order);
    for row in &table.rows[..order] {
        if let Some(reason) = &row.unavailable {
            return Err(Error::FlaggedRow {
                n: row.n,
                reason: format!("unavailable ({reason})"),
            });
        }
        if !row.flags.is_empty() {
            return Err(Error::FlaggedRow {
                n: row.n,
                reason: format!("flagged {:?}", row.flags),
            });
        }
        counts.push(row.p.unwrap_or(0));
    }
    Ok(zeta_from_counts(&counts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthStats {
    /// `log P_n / n`, `None` where `P_n` is 0 or unavailable.
    pub bowen_sequence: Vec<Option<f64>>,
    pub window: usize,
    /// Max of the sequence over the trailing window (the right-hand side
    /// of Bowen's equation, not the topological entropy).
    pub bowen_limsup_proxy: Option<f64>,
}

pub const DEFAULT_BOWEN_WINDOW: usize = 3;

pub fn growth_stats(table: &CensusTable) -> GrowthStats {
    growth_stats_window(table, DEFAULT_BOWEN_WINDOW)
}

pub fn growth_stats_window(table: &CensusTable, window: usize) -> GrowthStats {
    let seq: Vec<Option<f64>> = table
        .rows
        .iter()
        .map(|r| {
            r.p.filter(|&v| v >= 1)
                .map(|v| (v as f64).ln() / r.n as f64)
        })
        .collect();
    let start = seq.len().saturating_sub(window.max(1));
    let proxy = seq[start..]
        .iter()
        .flatten()
        .copied()
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        });
    GrowthStats {
        bowen_sequence: seq,
        window,
        bowen_limsup_proxy: proxy,
    }
}
