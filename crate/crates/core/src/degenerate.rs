//! One-dimensional laboratory for degenerate fixed points: detect the
//! normal form `x + l x^(k+1)` at a parabolic point, and split such a point
//! into many certified hyperbolic fixed points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::DEFAULT_ETA;
use crate::error::{Error, Result};
use crate::polymap::{PolyMap, C64};
use crate::solver::{solve_newton, solve_univariate, Completeness, SeedPlan, SolveConfig};

/// Local model `x -> x + leading * x^(order+1)` studied on `[-window, window]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub order: u32,
    pub leading: f64,
    pub window: f64,
}

impl NormalForm {
    pub fn new(order: u32, leading: f64, window: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig("degeneracy order must be >= 1".into()));
        }
        if leading == 0.0 || !leading.is_finite() {
            return Err(Error::InvalidConfig(
                "leading coefficient must be nonzero and finite".into(),
            ));
        }
        if !(window > 0.0) || !window.is_finite() {
            return Err(Error::InvalidConfig("window must be positive".into()));
        }
        Ok(NormalForm {
            order,
            leading,
            window,
        })
    }

    pub fn to_map(&self) -> PolyMap {
        let mut c = vec![0.0; self.order as usize + 2];
        c[1] = 1.0;
        c[self.order as usize + 1] = self.leading;
        PolyMap::univariate_real(&c).expect("normal form is a valid map")
    }

    /// Taylor coefficients of `f(x) - x` at 0.
    pub fn taylor_displacement(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.order as usize + 2];
        c[self.order as usize + 1] = self.leading;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Degeneracy {
    Degenerate { normal_form: NormalForm },
    Hyperbolic { multiplier: f64 },
    MarginalNonUnit { multiplier: f64 },
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn real_coeffs(map: &PolyMap) -> Result<Vec<f64>> {
    if map.dim() != 1 {
        return Err(Error::Unsupported(map.dim()));
    }
    let c = map.univariate_coeffs()?;
    if c.iter().any(|z| z.im != 0.0) {
        return Err(Error::InvalidConfig(
            "degeneracy analysis needs a real map".into(),
        ));
    }
    Ok(c.iter().map(|z| z.re).collect())
}

/// Taylor coefficients of `f` at `x0`.
fn taylor_at(a: &[f64], x0: f64) -> Vec<f64> {
    (0..a.len())
        .map(|j| {
            (j..a.len())
                .map(|i| a[i] * binomial(i, j) * x0.powi((i - j) as i32))
                .sum()
        })
        .collect()
}

/// Classify the fixed point `x0` of a real univariate map: degenerate
/// (multiplier 1, with its normal form), hyperbolic, or marginal with a
/// non-unit multiplier (e.g. -1).
pub fn detect_degeneracy(map: &PolyMap, x0: f64, eta: f64) -> Result<Degeneracy> {
    let a = real_coeffs(map)?;
    let t = taylor_at(&a, x0);
    let scale =
        a.iter().fold(1.0f64, |m, v| m.max(v.abs())) * (1.0 + x0.abs()).powi(a.len() as i32);
    let gap = (t[0] - x0).abs();
    if gap > 1e-8 * (1.0 + x0.abs()) {
        return Err(Error::InvalidConfig(format!(
            "{x0} is not a fixed point (|f(x0) - x0| = {gap:e})"
        )));
    }
    let multiplier = t.get(1).copied().unwrap_or(0.0);
    if (multiplier - 1.0).abs() > eta {
        return Ok(if (multiplier.abs() - 1.0).abs() > eta {
            Degeneracy::Hyperbolic { multiplier }
        } else {
            Degeneracy::MarginalNonUnit { multiplier }
        });
    }
    let flat = 1e-12 * scale;
    match (2..t.len()).find(|&j| t[j].abs() > flat) {
        Some(j) => Ok(Degeneracy::Degenerate {
            normal_form: NormalForm::new((j - 1) as u32, t[j], 1.0)?,
        }),
        None => Err(Error::FlatAtDegree { x0 }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Largest target count accepted.
    pub cap: usize,
    pub eta: f64,
    /// Verification attempts; each retry halves the spacing.
    pub max_attempts: usize,
    /// Preferred root spacing before window and multiplier limits apply.
    pub spacing: f64,
    pub solve: SolveConfig,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            cap: 64,
            eta: DEFAULT_ETA,
            max_attempts: 8,
            spacing: 0.2,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedFixedPoint {
    pub x: f64,
    pub multiplier: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandContext {
    pub n1: u64,
    pub a_n1: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub target: usize,
    pub spacing: f64,
    pub amplitude: f64,
    pub roots: Vec<f64>,
    pub window: f64,
    pub seed: NormalForm,
    pub map: PolyMap,
    /// Max-abs coefficient difference between the constructed and seed maps.
    pub perturbation_norm: f64,
    /// A priori bound on `perturbation_norm`.
    pub perturbation_bound: f64,
    /// Smallest `||multiplier| - 1|` over the certified points.
    pub certification_margin: f64,
    pub fixed_points: Vec<CertifiedFixedPoint>,
    pub attempts: usize,
    pub context: Option<DemandContext>,
}

/// Roots on a grid of spacing `delta` centred at 0.
pub fn grid_roots(m: usize, delta: f64) -> Vec<f64> {
    (1..=m)
        .map(|i| (i as f64 - (m as f64 + 1.0) / 2.0) * delta)
        .collect()
}

/// Ascending coefficients of `c * prod (x - r)`.
fn scaled_product(c: f64, roots: &[f64]) -> Vec<f64> {
    let mut p = vec![c];
    for &r in roots {
        let mut next = vec![0.0; p.len() + 1];
        for (i, &v) in p.iter().enumerate() {
            next[i + 1] += v;
            next[i] -= r * v;
        }
        p = next;
    }
    p
}

fn max_coeff_diff(a: &[f64], b: &[f64]) -> f64 {
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).unwrap_or(&0.0) - b.get(i).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}

/// Fixed points of `map` in `[-window, window]`, each with its multiplier,
/// provided the enumeration is certified complete.
pub fn certified_fixed_points(
    map: &PolyMap,
    window: f64,
    config: &SolveConfig,
) -> Result<(Vec<CertifiedFixedPoint>, Option<usize>)> {
    let a = real_coeffs(map)?;
    let report = solve_univariate(map, 1, config)?;
    if report.completeness != Completeness::Certified {
        return Err(Error::SplitVerification {
            attempts: 1,
            detail: format!("enumeration not certified (deficit {:?})", report.deficit),
        });
    }
    let mut pts: Vec<CertifiedFixedPoint> = report
        .points
        .iter()
        .filter(|p| p.isolated_certificate && p.is_real() && p.location[0].re.abs() <= window)
        .map(|p| {
            let x = p.location[0].re;
            let multiplier = taylor_at(&a, x).get(1).copied().unwrap_or(0.0);
            CertifiedFixedPoint {
                x,
                multiplier,
                margin: (multiplier.abs() - 1.0).abs(),
            }
        })
        .collect();
    pts.sort_by(|p, q| p.x.total_cmp(&q.x));
    Ok((pts, report.complex_count))
}

/// Replace the degenerate point of `seed` by `m` hyperbolic fixed points:
/// `x -> x + c * prod (x - x_i)` with `c` the seed's leading coefficient and
/// the `x_i` on a centred grid inside the window.
pub fn split(seed: &NormalForm, m: usize, config: &SplitConfig) -> Result<SplitPlan> {
    if m == 0 {
        return Err(Error::InvalidConfig("target count must be >= 1".into()));
    }
    if m > config.cap {
        return Err(Error::SplitCap {
            requested: m as u64,
            cap: config.cap as u64,
            largest_feasible: None,
        });
    }
    let c = seed.leading;
    let w = seed.window;
    let mut delta = config.spacing.min(2.0 * w / (m as f64 + 1.0));
    if m >= 2 {
        // keep every |c prod'(x_i)| <= 0.9 so no multiplier approaches -1
        let fact: f64 = (1..m).map(|i| i as f64).product();
        delta = delta.min((0.9 / (c.abs() * fact)).powf(1.0 / (m - 1) as f64));
    }
    let seed_coeffs = {
        let mut s = vec![0.0; seed.order as usize + 2];
        s[1] = 1.0;
        s[seed.order as usize + 1] = c;
        s
    };
    let mut last_detail = String::new();
    for attempt in 1..=config.max_attempts {
        let roots = grid_roots(m, delta);
        let mut coeffs = scaled_product(c, &roots);
        coeffs[1] += 1.0;
        let map = PolyMap::univariate_real(&coeffs)?;
        let outcome = certified_fixed_points(&map, w, &config.solve);
        match outcome {
            Ok((pts, complex_count)) => {
                let margin = pts.iter().map(|p| p.margin).fold(f64::INFINITY, f64::min);
                if pts.len() == m && complex_count == Some(m) && margin >= 10.0 * config.eta {
                    let spread: f64 = roots.iter().map(|r| 1.0 + r.abs()).product();
                    let perturbation_bound = if m == seed.order as usize + 1 {
                        c.abs() * (spread - 1.0)
                    } else {
                        c.abs() * (spread + 1.0)
                    };
                    return Ok(SplitPlan {
                        target: m,
                        spacing: delta,
                        amplitude: c,
                        roots,
                        window: w,
                        seed: seed.clone(),
                        perturbation_norm: max_coeff_diff(&coeffs, &seed_coeffs),
                        perturbation_bound,
                        map,
                        certification_margin: margin,
                        fixed_points: pts,
                        attempts: attempt,
                        context: None,
                    });
                }
                last_detail = format!(
                    "found {} certified points (complex count {:?}), margin {margin:e}",
                    pts.len(),
                    complex_count
                );
            }
            Err(e) => last_detail = e.to_string(),
        }
        delta *= 0.5;
    }
    Err(Error::SplitVerification {
        attempts: config.max_attempts,
        detail: last_detail,
    })
}

/// Perturb every coefficient of the plan's map by `fraction * margin` with
/// random signs and recount certified hyperbolic fixed points in the window.
pub fn persistence_count(
    plan: &SplitPlan,
    fraction: f64,
    rng_seed: u64,
    config: &SplitConfig,
) -> Result<usize> {
    let size = fraction * plan.certification_margin;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let perturbed = plan.map.map_coefficients(|_, z| {
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        z + C64::new(sign * size, 0.0)
    })?;
    let (pts, _) = certified_fixed_points(&perturbed, plan.window, &config.solve)?;
    Ok(pts.iter().filter(|p| p.margin >= 10.0 * config.eta).count())
}

/// Named target sequences `a_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandSequence {
    One,
    Linear,
    SelfPower,
}

impl DemandSequence {
    pub fn value(self, n: u64) -> Option<u64> {
        match self {
            DemandSequence::One => Some(1),
            DemandSequence::Linear => Some(n),
            DemandSequence::SelfPower => n.checked_pow(n as u32),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandOutcome {
    pub plan: SplitPlan,
    pub n1: u64,
    pub a_n1: u64,
    pub required: u64,
    /// Real points fixed by the `n1`-th iterate of the constructed map.
    pub p_n1: u64,
    pub method: String,
    pub satisfied: bool,
}

/// Build a map with at least `n1 * a(n1)` hyperbolic points fixed by its
/// `n1`-th iterate, and count them.
pub fn demand_schedule<A>(
    a: A,
    n1: u64,
    seed: &NormalForm,
    config: &SplitConfig,
) -> Result<DemandOutcome>
where
    A: Fn(u64) -> Option<u64>,
{
    if n1 == 0 {
        return Err(Error::InvalidConfig("n1 must be >= 1".into()));
    }
    let demand = |n: u64| a(n).and_then(|v| v.checked_mul(n));
    let cap = config.cap as u64;
    let required = demand(n1)
        .filter(|&m| m <= cap)
        .ok_or_else(|| Error::SplitCap {
            requested: demand(n1).unwrap_or(u64::MAX),
            cap,
            largest_feasible: (1..=n1)
                .filter(|&n| demand(n).is_some_and(|m| m <= cap))
                .max(),
        })?;
    let a_n1 = a(n1).expect("checked above");
    let mut plan = split(seed, required as usize, config)?;
    plan.context = Some(DemandContext { n1, a_n1 });

    let degree = plan.map.degree() as u128;
    let k = n1 as usize;
    let fits = degree
        .checked_pow(n1 as u32)
        .is_some_and(|d| d <= config.solve.degree_cap);
    let (report, method) = if fits {
        (solve_univariate(&plan.map, k, &config.solve)?, "univariate")
    } else {
        let reach = 1.5 * plan.window;
        let seeds = SeedPlan {
            lower: -reach,
            upper: reach,
            resolution: 200 * required as usize,
            random: 0,
            complex: false,
        };
        (
            solve_newton(&plan.map, k, &seeds, config.solve.rng_seed, &config.solve)?,
            "newton",
        )
    };
    let p_n1 = report
        .points
        .iter()
        .filter(|p| p.isolated_certificate && p.is_real())
        .count() as u64;
    Ok(DemandOutcome {
        plan,
        n1,
        a_n1,
        required,
        p_n1,
        method: method.into(),
        satisfied: p_n1 >= required,
    })
}
