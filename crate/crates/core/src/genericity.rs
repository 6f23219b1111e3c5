//! Monte-Carlo experiments over coefficient space: how often do random
//! polynomial maps have nearly nonhyperbolic orbits, and do they ever hit
//! a prescribed unit-circle multiplier?

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{check_lambda0, classify_report, OrbitRecord, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::polymap::{mu, Field, PolyMap, C64};
use crate::solver::{solve, Completeness, Method, SeedPlan, SolveConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoefficientLaw {
    Uniform { low: f64, high: f64 },
}

/// Which periodic orbits a trial inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitField {
    /// All orbits of the complexified map.
    Complex,
    /// Real orbits only.
    Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub dimension: usize,
    pub degree: u32,
    pub k_max: usize,
    pub trials: usize,
    pub rng_seed: u64,
    pub law: CoefficientLaw,
    pub eps_ladder: Vec<f64>,
    pub lambda0: Vec<C64>,
    pub lambda0_tol: f64,
    pub eta: f64,
    pub orbit_field: OrbitField,
    /// Required when `dimension >= 2`.
    pub seed_plan: Option<SeedPlan>,
    /// Positive/negative controls run through the same pipeline, reported apart.
    #[serde(default)]
    pub planted: Vec<PolyMap>,
    pub solve: SolveConfig,
}

pub fn default_lambda0() -> Vec<C64> {
    vec![
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::from_polar(1.0, std::f64::consts::TAU / 3.0),
    ]
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            dimension: 1,
            degree: 2,
            k_max: 4,
            trials: 1000,
            rng_seed: 0,
            law: CoefficientLaw::Uniform {
                low: -1.0,
                high: 1.0,
            },
            eps_ladder: vec![1e-2, 1e-3, 1e-4],
            lambda0: default_lambda0(),
            lambda0_tol: 1e-6,
            eta: DEFAULT_ETA,
            orbit_field: OrbitField::Complex,
            seed_plan: None,
            planted: Vec::new(),
            solve: SolveConfig::default(),
        }
    }
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.k_max == 0 || self.dimension == 0 || self.degree == 0 {
            return Err(Error::InvalidConfig(
                "dimension, degree and k_max must be >= 1".into(),
            ));
        }
        if self.eps_ladder.iter().any(|&e| !(e > 0.0))
            || self.eps_ladder.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(Error::InvalidConfig(
                "epsilon ladder must be positive and strictly decreasing".into(),
            ));
        }
        for l in &self.lambda0 {
            if (l.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::OffUnitCircle { re: l.re, im: l.im });
            }
        }
        let CoefficientLaw::Uniform { low, high } = self.law;
        if !(low < high) {
            return Err(Error::InvalidConfig("uniform law needs low < high".into()));
        }
        if self.dimension == 1 {
            let top = (self.degree as u128).checked_pow(self.k_max as u32);
            if top.is_none_or(|d| d > self.solve.degree_cap) {
                return Err(Error::DegreeCap {
                    degree: top.unwrap_or(u128::MAX),
                    cap: self.solve.degree_cap,
                });
            }
        } else if self.seed_plan.is_none() {
            return Err(Error::InvalidConfig("N >= 2 requires a seed plan".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsFrequency {
    pub eps: f64,
    /// Trials with some orbit of margin < eps.
    pub count: usize,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSummary {
    pub min: f64,
    pub p01: f64,
    pub p10: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lambda0Hits {
    pub lambda0: C64,
    /// Sampled trials with an orbit multiplier within tolerance of lambda0.
    pub hits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlOutcome {
    pub map_hash: String,
    pub min_margin: f64,
    pub lambda0_hits: Vec<Lambda0Hits>,
    /// Some lambda0 was hit.
    pub detected: bool,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenericityReport {
    pub config: SampleConfig,
    pub trials_used: usize,
    pub failures: usize,
    pub failure_examples: Vec<String>,
    pub eps_frequencies: Vec<EpsFrequency>,
    pub margin_summary: Option<MarginSummary>,
    pub lambda0_hits: Vec<Lambda0Hits>,
    pub controls: Vec<ControlOutcome>,
}

impl GenericityReport {
    /// CSV `eps,frequency` for log-log plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,frequency\n");
        for f in &self.eps_frequencies {
            out.push_str(&format!("{:e},{}\n", f.eps, f.frequency));
        }
        out
    }
}

struct TrialOutcome {
    min_margin: f64,
    hits: Vec<bool>,
}

/// Orbits of least period k for every k <= k_max.
fn trial_orbits(map: &PolyMap, config: &SampleConfig) -> Result<Vec<OrbitRecord>> {
    let solve_map = match config.orbit_field {
        OrbitField::Complex if map.field() == Field::Real => {
            PolyMap::from_file(crate::polymap::MapFile {
                field: Field::Complex,
                ..map.to_file()
            })?
        }
        _ => map.clone(),
    };
    let mut solve_cfg = config.solve.clone();
    if let Some(plan) = &config.seed_plan {
        solve_cfg.fallback_plan = Some(plan.clone());
        solve_cfg.rng_seed = config.rng_seed;
    }
    if config.dimension == 1 {
        solve_cfg.method = Method::Univariate;
    }
    let mut out = Vec::new();
    for k in 1..=config.k_max {
        let report = solve(&solve_map, k, &solve_cfg)?;
        let complete = report.completeness == Completeness::Certified
            || (config.dimension >= 2 && report.deficit == Some(0));
        if !complete {
            return Err(Error::InvalidConfig(format!(
                "incomplete enumeration at k = {k} (deficit {:?})",
                report.deficit
            )));
        }
        let orbits = classify_report(&solve_map, &report, config.eta)?;
        out.extend(orbits.into_iter().filter(|o| o.least_period == k));
    }
    Ok(out)
}

fn evaluate_trial(map: &PolyMap, config: &SampleConfig) -> Result<TrialOutcome> {
    let orbits = trial_orbits(map, config)?;
    let min_margin = orbits
        .iter()
        .map(|o| o.margin)
        .fold(f64::INFINITY, f64::min);
    let hits = config
        .lambda0
        .iter()
        .map(|&l| {
            orbits
                .iter()
                .map(|o| check_lambda0(o, l, config.lambda0_tol))
                .collect::<Result<Vec<bool>>>()
                .map(|v| v.into_iter().any(|b| b))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(TrialOutcome { min_margin, hits })
}

/// The coefficient vector drawn for `trial`; independent of scheduling.
pub fn sample_map(config: &SampleConfig, trial: u64) -> Result<PolyMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    rng.set_stream(trial);
    let CoefficientLaw::Uniform { low, high } = config.law;
    let len = mu(config.dimension, config.degree) * config.dimension;
    let values: Vec<C64> = (0..len)
        .map(|_| C64::new(rng.gen_range(low..high), 0.0))
        .collect();
    PolyMap::from_coefficient_vector(config.dimension, config.degree, Field::Real, &values)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

pub fn run_sampler(config: &SampleConfig) -> Result<GenericityReport> {
    config.validate()?;
    let outcomes: Vec<Result<TrialOutcome>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| sample_map(config, t).and_then(|m| evaluate_trial(&m, config)))
        .collect();

    let mut used = Vec::new();
    let mut failures = 0;
    let mut failure_examples = Vec::new();
    for o in outcomes {
        match o {
            Ok(t) => used.push(t),
            Err(e) => {
                failures += 1;
                if failure_examples.len() < 5 {
                    failure_examples.push(e.to_string());
                }
            }
        }
    }
    if used.is_empty() {
        return Err(Error::AllTrialsFailed);
    }
    let n = used.len();
    let eps_frequencies = config
        .eps_ladder
        .iter()
        .map(|&eps| {
            let count = used.iter().filter(|t| t.min_margin < eps).count();
            EpsFrequency {
                eps,
                count,
                frequency: count as f64 / n as f64,
            }
        })
        .collect();
    let mut margins: Vec<f64> = used
        .iter()
        .map(|t| t.min_margin)
        .filter(|m| m.is_finite())
        .collect();
    margins.sort_by(f64::total_cmp);
    let margin_summary = (!margins.is_empty()).then(|| MarginSummary {
        min: margins[0],
        p01: quantile(&margins, 0.01),
        p10: quantile(&margins, 0.10),
        median: quantile(&margins, 0.5),
    });
    let lambda0_hits = config
        .lambda0
        .iter()
        .enumerate()
        .map(|(i, &l)| Lambda0Hits {
            lambda0: l,
            hits: used.iter().filter(|t| t.hits[i]).count(),
        })
        .collect();
    let controls = config
        .planted
        .iter()
        .map(|m| match evaluate_trial(m, config) {
            Ok(t) => ControlOutcome {
                map_hash: m.hash(),
                min_margin: t.min_margin,
                detected: t.hits.iter().any(|&h| h),
                lambda0_hits: config
                    .lambda0
                    .iter()
                    .zip(&t.hits)
                    .map(|(&l, &h)| Lambda0Hits {
                        lambda0: l,
                        hits: h as usize,
                    })
                    .collect(),
                failure: None,
            },
            Err(e) => ControlOutcome {
                map_hash: m.hash(),
                min_margin: f64::NAN,
                lambda0_hits: Vec::new(),
                detected: false,
                failure: Some(e.to_string()),
            },
        })
        .collect();
    Ok(GenericityReport {
        config: config.clone(),
        trials_used: n,
        failures,
        failure_examples,
        eps_frequencies,
        margin_summary,
        lambda0_hits,
        controls,
    })
}

/// The planted parabolic control `x -> x + x^2` (multiplier 1 at 0).
pub fn parabolic_control() -> PolyMap {
    PolyMap::univariate_real(&[0.0, 1.0, 1.0]).expect("valid control")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingFit {
    Slope {
        slope: f64,
        intercept: f64,
        rungs: usize,
    },
    Degenerate {
        reason: String,
    },
}

/// Least-squares slope of log frequency against log eps over nonzero rungs.
pub fn margin_scaling(report: &GenericityReport) -> ScalingFit {
    let pts: Vec<(f64, f64)> = report
        .eps_frequencies
        .iter()
        .map(|f| (f.eps, f.frequency))
        .collect();
    fit_loglog(&pts)
}

pub fn fit_loglog(points: &[(f64, f64)]) -> ScalingFit {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(_, f)| *f > 0.0)
        .map(|(e, f)| (e.ln(), f.ln()))
        .collect();
    if pts.is_empty() {
        return ScalingFit::Degenerate {
            reason: "all-zero".into(),
        };
    }
    if pts.len() < 3 {
        return ScalingFit::Degenerate {
            reason: format!("only {} nonzero rungs", pts.len()),
        };
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    ScalingFit::Slope {
        slope,
        intercept: my - slope * mx,
        rungs: pts.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> SampleConfig {
        SampleConfig {
            k_max: 3,
            trials,
            rng_seed: 11,
            ..SampleConfig::default()
        }
    }

    #[test]
    fn validation() {
        assert!(SampleConfig {
            trials: 0,
            ..small(1)
        }
        .validate()
        .is_err());
        assert!(SampleConfig {
            eps_ladder: vec![1e-3, 1e-2],
            ..small(1)
        }
        .validate()
        .is_err());
        assert!(SampleConfig {
            k_max: 9,
            ..small(1)
        }
        .validate()
        .is_err());
        assert!(SampleConfig {
            lambda0: vec![C64::new(0.5, 0.0)],
            ..small(1)
        }
        .validate()
        .is_err());
    }

    #[test]
    fn deterministic_and_monotone() {
        let cfg = small(60);
        let a = run_sampler(&cfg).unwrap();
        let b = run_sampler(&cfg).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        for w in a.eps_frequencies.windows(2) {
            assert!(w[0].frequency >= w[1].frequency);
        }
    }

    #[test]
    fn planted_control_detected() {
        let cfg = SampleConfig {
            planted: vec![
                parabolic_control(),
                PolyMap::power_map(1, 2, Field::Real).unwrap(),
            ],
            ..small(5)
        };
        let r = run_sampler(&cfg).unwrap();
        assert!(r.controls[0].detected, "{:?}", r.controls[0]);
        assert_eq!(r.controls[0].lambda0_hits[0].hits, 1);
        assert!(!r.controls[1].detected);
    }

    #[test]
    fn scaling_fits() {
        assert_eq!(
            fit_loglog(&[(1e-2, 0.0), (1e-3, 0.0), (1e-4, 0.0)]),
            ScalingFit::Degenerate {
                reason: "all-zero".into()
            }
        );
        let synthetic: Vec<(f64, f64)> = [1e-2, 1e-3, 1e-4, 1e-5]
            .iter()
            .map(|&e| (e, 3.0 * e))
            .collect();
        match fit_loglog(&synthetic) {
            ScalingFit::Slope { slope, .. } => assert!((slope - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sample_map_is_scheduling_independent() {
        let cfg = small(3);
        assert_eq!(sample_map(&cfg, 2).unwrap(), sample_map(&cfg, 2).unwrap());
        assert_ne!(sample_map(&cfg, 1).unwrap(), sample_map(&cfg, 2).unwrap());
    }
}
