//! Orbit multipliers and hyperbolicity / transversality classification.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polymap::{PolyMap, C64};
use crate::solver::{orbit_partition, SolveReport};

/// Default marginality tolerance `eta`.
pub const DEFAULT_ETA: f64 = 1e-8;
/// Default gap allowed when checking that an orbit closes.
pub const DEFAULT_CLOSURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Every multiplier modulus is farther than eta from 1.
    Hyperbolic,
    /// Some multiplier modulus is within eta of 1 (not certifiable in floating point).
    Marginal,
    /// Marginal and algebraically confirmed: the orbit contains a multiple root.
    Nonhyperbolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub points: Vec<Vec<C64>>,
    pub least_period: usize,
    pub multipliers: Vec<C64>,
    pub classification: Classification,
    pub margin: f64,
    /// `|det(M - lambda I)|` at each reported multiplier.
    pub char_residual: Vec<f64>,
}

impl OrbitRecord {
    pub fn is_hyperbolic(&self) -> bool {
        self.classification == Classification::Hyperbolic
    }

    /// Upgrade a marginal record once a multiple root confirms a unit multiplier.
    pub fn confirm_nonhyperbolic(&mut self) {
        if self.classification == Classification::Marginal {
            self.classification = Classification::Nonhyperbolic;
        }
    }

    /// Multipliers of the period-`n` iterate (`n` a multiple of the least period).
    pub fn multipliers_at(&self, n: usize) -> Vec<C64> {
        let power = (n / self.least_period) as i32;
        self.multipliers.iter().map(|l| l.powi(power)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransversalityVerdict {
    pub period_n: usize,
    pub resonant_roots: Vec<C64>,
    pub transversal: bool,
}

/// Product of Jacobians around the cycle: `J(x_{d-1}) ... J(x_0)`.
pub fn cycle_product(map: &PolyMap, orbit: &[Vec<C64>]) -> Result<DMatrix<C64>> {
    let n = map.dim();
    let mut acc = DMatrix::<C64>::identity(n, n);
    for x in orbit {
        let j = map.jacobian_complexified(x)?;
        acc = j.0 * acc;
    }
    if acc.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(acc)
    } else {
        Err(Error::Overflow { step: orbit.len() })
    }
}

pub fn eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let mut ev: Vec<C64> = if m.nrows() == 1 {
        vec![m[(0, 0)]]
    } else {
        m.clone()
            .try_schur(f64::EPSILON, 10_000)
            .and_then(|s| s.eigenvalues())
            .ok_or(Error::Eigen)?
            .iter()
            .copied()
            .collect()
    };
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(ev)
}

/// Multipliers of a cycle and its classification at tolerance `eta`.
pub fn multipliers(map: &PolyMap, orbit: &[Vec<C64>], eta: f64) -> Result<OrbitRecord> {
    multipliers_with(map, orbit, eta, DEFAULT_CLOSURE_TOL)
}

pub fn multipliers_with(
    map: &PolyMap,
    orbit: &[Vec<C64>],
    eta: f64,
    closure_tol: f64,
) -> Result<OrbitRecord> {
    if orbit.is_empty() {
        return Err(Error::InconsistentOrbit("empty orbit".into()));
    }
    let d = orbit.len();
    let mut gap: f64 = 0.0;
    for i in 0..d {
        let y = map.evaluate_complexified(&orbit[i])?;
        let next = &orbit[(i + 1) % d];
        gap = gap.max(
            y.iter()
                .zip(next)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max),
        );
    }
    if !(gap <= closure_tol) {
        return Err(Error::OrbitNotClosed { gap });
    }
    let product = cycle_product(map, orbit)?;
    let ev = eigenvalues(&product)?;
    let margin = ev
        .iter()
        .map(|l| (l.norm() - 1.0).abs())
        .fold(f64::INFINITY, f64::min);
    let n = product.nrows();
    let char_residual = ev
        .iter()
        .map(|&l| {
            let shifted = &product - DMatrix::<C64>::identity(n, n) * l;
            shifted.lu().determinant().norm()
        })
        .collect();
    Ok(OrbitRecord {
        points: orbit.to_vec(),
        least_period: d,
        multipliers: ev,
        classification: if margin > eta {
            Classification::Hyperbolic
        } else {
            Classification::Marginal
        },
        margin,
        char_residual,
    })
}

/// Does some multiplier lie within `tol` of the unit-circle value `lambda0`?
pub fn check_lambda0(record: &OrbitRecord, lambda0: C64, tol: f64) -> Result<bool> {
    if (lambda0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::OffUnitCircle {
            re: lambda0.re,
            im: lambda0.im,
        });
    }
    Ok(record
        .multipliers
        .iter()
        .any(|l| (l - lambda0).norm() <= tol))
}

/// Test each multiplier against all `period_n`-th roots of unity.
pub fn check_transversal(
    record: &OrbitRecord,
    period_n: usize,
    tol: f64,
) -> Result<TransversalityVerdict> {
    if period_n == 0 {
        return Err(Error::InvalidConfig("period_n must be >= 1".into()));
    }
    let mut resonant = Vec::new();
    for l in &record.multipliers {
        for j in 0..period_n {
            let w = C64::from_polar(1.0, std::f64::consts::TAU * j as f64 / period_n as f64);
            if (l - w).norm() <= tol {
                resonant.push(w);
            }
        }
    }
    Ok(TransversalityVerdict {
        period_n,
        transversal: resonant.is_empty(),
        resonant_roots: resonant,
    })
}

/// Partition a solve report into cycles and classify each one. Orbits that
/// contain a nonisolated (multiple) root and are marginal are confirmed
/// nonhyperbolic.
pub fn classify_report(map: &PolyMap, report: &SolveReport, eta: f64) -> Result<Vec<OrbitRecord>> {
    let orbits = orbit_partition(&report.points, map, report.tolerances.orbit_match)?;
    orbits
        .into_iter()
        .map(|o| {
            let mut rec = multipliers(map, &o.points, eta)?;
            if o.indices
                .iter()
                .any(|&i| !report.points[i].isolated_certificate)
            {
                rec.confirm_nonhyperbolic();
            }
            Ok(rec)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polymap::Field;
    use crate::solver::{solve_univariate, SolveConfig};
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn record_with(multipliers: Vec<C64>) -> OrbitRecord {
        let margin = multipliers
            .iter()
            .map(|l| (l.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min);
        OrbitRecord {
            points: vec![vec![c(0.0, 0.0)]],
            least_period: 1,
            char_residual: vec![0.0; multipliers.len()],
            classification: if margin > DEFAULT_ETA {
                Classification::Hyperbolic
            } else {
                Classification::Marginal
            },
            multipliers,
            margin,
        }
    }

    #[test]
    fn squaring_fixed_point_one() {
        let m = PolyMap::power_map(1, 2, Field::Complex).unwrap();
        let r = multipliers(&m, &[vec![c(1.0, 0.0)]], DEFAULT_ETA).unwrap();
        assert_eq!(r.multipliers, vec![c(2.0, 0.0)]);
        assert!(r.is_hyperbolic());
        assert_eq!(r.margin, 1.0);
    }

    #[test]
    fn squaring_two_cycle() {
        let m = PolyMap::power_map(1, 2, Field::Complex).unwrap();
        let orbit = vec![
            vec![C64::from_polar(1.0, TAU / 3.0)],
            vec![C64::from_polar(1.0, 2.0 * TAU / 3.0)],
        ];
        let r = multipliers(&m, &orbit, DEFAULT_ETA).unwrap();
        assert!((r.multipliers[0] - c(4.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.least_period, 2);
    }

    #[test]
    fn model_map_moduli() {
        // (z1^3, z2^3) on the fixed point (1, 0): multipliers 0 and 3
        let m = PolyMap::power_map(2, 3, Field::Complex).unwrap();
        let r = multipliers(&m, &[vec![c(1.0, 0.0), c(0.0, 0.0)]], DEFAULT_ETA).unwrap();
        let mut moduli: Vec<f64> = r.multipliers.iter().map(|l| l.norm()).collect();
        moduli.sort_by(f64::total_cmp);
        assert!(moduli[0] < 1e-14 && (moduli[1] - 3.0).abs() < 1e-12);
        assert!(r.char_residual.iter().all(|&x| x <= 1e-6));
    }

    #[test]
    fn unclosed_orbit_rejected() {
        let m = PolyMap::power_map(1, 2, Field::Complex).unwrap();
        assert!(matches!(
            multipliers(&m, &[vec![c(0.5, 0.0)]], DEFAULT_ETA),
            Err(Error::OrbitNotClosed { .. })
        ));
    }

    #[test]
    fn lambda0_checks() {
        let m = PolyMap::power_map(1, 2, Field::Complex).unwrap();
        let zero = multipliers(&m, &[vec![c(0.0, 0.0)]], DEFAULT_ETA).unwrap();
        assert!(!check_lambda0(&zero, c(1.0, 0.0), 1e-6).unwrap());

        let parabolic = PolyMap::univariate_real(&[0.0, 1.0, 1.0]).unwrap();
        let r = multipliers(&parabolic, &[vec![c(0.0, 0.0)]], DEFAULT_ETA).unwrap();
        assert!(check_lambda0(&r, c(1.0, 0.0), 1e-6).unwrap());
        assert_eq!(r.classification, Classification::Marginal);

        assert!(matches!(
            check_lambda0(&r, c(2.0, 0.0), 1e-6),
            Err(Error::OffUnitCircle { .. })
        ));
    }

    #[test]
    fn transversality_examples() {
        let v = check_transversal(&record_with(vec![c(2.0, 0.0)]), 5, 1e-9).unwrap();
        assert!(v.transversal);

        let w = C64::from_polar(1.0, TAU / 3.0);
        let v = check_transversal(&record_with(vec![w]), 3, 1e-9).unwrap();
        assert!(!v.transversal);
        assert_eq!(v.resonant_roots.len(), 1);
        assert!((v.resonant_roots[0] - w).norm() < 1e-12);

        assert!(check_transversal(&record_with(vec![w]), 0, 1e-9).is_err());
    }

    #[test]
    fn classify_report_flags_parabolic() {
        let m = PolyMap::univariate_real(&[0.0, 1.0, 1.0]).unwrap();
        let rep = solve_univariate(&m, 1, &SolveConfig::default()).unwrap();
        let recs = classify_report(&m, &rep, DEFAULT_ETA).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].classification, Classification::Nonhyperbolic);
    }
}
