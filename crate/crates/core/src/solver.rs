//! Enumeration of period-k points: solutions of `P^(k)(x) - x = 0`.
//!
//! Three routes are available:
//! - `solve_univariate`: N = 1, companion-matrix roots of the expanded
//!   iterate, refined against the orbit recurrence (certified completeness);
//! - `solve_simultaneous`: N = 1 beyond the expansion cap, Aberth iteration
//!   on the orbit recurrence only, never expanding the iterate;
//! - `solve_newton`: any N, damped Newton from a seed plan (heuristic).

use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::OrbitRecord;
use crate::error::{Error, Result};
use crate::polymap::{iterate_degree, Field, PolyMap, C64, DEFAULT_SYMBOLIC_CAP};
use crate::roots;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Acceptance bound on `max |P^(n)(x) - x|`.
    pub residual: f64,
    /// Max-norm distance below which two roots are the same point.
    pub dedup: f64,
    /// Smallest singular value of the Newton Jacobian certifying isolation.
    pub singular: f64,
    /// Newton polishing target.
    pub polish: f64,
    /// Imaginary parts below this (relative) are treated as real roots.
    pub real: f64,
    /// Radius for merging nonisolated approximations of one multiple root.
    pub cluster: f64,
    /// Matching tolerance when following points around an orbit.
    pub orbit_match: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-10,
            dedup: 1e-7,
            singular: 1e-8,
            polish: 1e-12,
            real: 1e-8,
            cluster: 1e-4,
            orbit_match: 1e-6,
        }
    }
}

/// Newton seeding: a uniform grid on `[lower, upper]` per real axis (both
/// real and imaginary parts when `complex`), plus `random` uniform draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub lower: f64,
    pub upper: f64,
    pub resolution: usize,
    pub random: usize,
    pub complex: bool,
}

impl SeedPlan {
    pub fn seeds(&self, dim: usize, rng_seed: u64) -> Vec<Vec<C64>> {
        let axes = if self.complex { 2 * dim } else { dim };
        let grid: Vec<f64> = match self.resolution {
            0 => Vec::new(),
            1 => vec![0.5 * (self.lower + self.upper)],
            r => (0..r)
                .map(|i| self.lower + (self.upper - self.lower) * i as f64 / (r - 1) as f64)
                .collect(),
        };
        let to_point = |coords: &[f64]| -> Vec<C64> {
            (0..dim)
                .map(|i| {
                    if self.complex {
                        C64::new(coords[2 * i], coords[2 * i + 1])
                    } else {
                        C64::new(coords[i], 0.0)
                    }
                })
                .collect()
        };
        let mut out = Vec::new();
        if !grid.is_empty() {
            let total = grid.len().pow(axes as u32);
            let mut coords = vec![0.0; axes];
            for mut idx in 0..total {
                for c in coords.iter_mut() {
                    *c = grid[idx % grid.len()];
                    idx /= grid.len();
                }
                out.push(to_point(&coords));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for _ in 0..self.random {
            let coords: Vec<f64> = (0..axes)
                .map(|_| rng.gen_range(self.lower..=self.upper))
                .collect();
            out.push(to_point(&coords));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    /// Univariate companion path within the expansion cap, simultaneous
    /// iteration beyond it; requires a seed plan when N >= 2.
    Auto,
    Univariate,
    Simultaneous,
    Newton {
        plan: SeedPlan,
        rng_seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub tolerances: Tolerances,
    /// Cap on `D^k` for the expanded (companion) path.
    pub degree_cap: u128,
    /// Cap on `D^k` for the simultaneous path.
    pub simultaneous_cap: u128,
    pub method: Method,
    /// Seed plan used by `Auto` when N >= 2.
    pub fallback_plan: Option<SeedPlan>,
    pub rng_seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tolerances: Tolerances::default(),
            degree_cap: DEFAULT_SYMBOLIC_CAP,
            simultaneous_cap: 4096,
            method: Method::Auto,
            fallback_plan: None,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub location: Vec<C64>,
    pub period_n: usize,
    pub residual: f64,
    pub newton_converged: bool,
    pub isolated_certificate: bool,
    /// Number of merged root approximations (root multiplicity on the
    /// univariate paths, 1 on the Newton path).
    pub multiplicity: usize,
    /// Smallest singular value of `d_x P^(n) - I` at the root.
    pub sigma_min: f64,
}

impl PeriodicPoint {
    pub fn is_real(&self) -> bool {
        self.location.iter().all(|z| z.im == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Completeness {
    Certified,
    Heuristic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub seeds: usize,
    pub diverged: usize,
    pub unconverged: usize,
    pub rejected_residual: usize,
    pub multiple_roots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub map_hash: String,
    pub period: usize,
    pub method: String,
    pub field: Field,
    pub tolerances: Tolerances,
    pub seed_plan: Option<SeedPlan>,
    pub rng_seed: Option<u64>,
    /// Reported points (real points only when the map's field is real).
    pub points: Vec<PeriodicPoint>,
    /// Distinct points found over C, when the route saw all of C^N.
    pub complex_count: Option<usize>,
    pub real_count: usize,
    pub bezout_bound: u128,
    /// Degree of `P^(k)(x) - x` after cancellation (univariate routes).
    pub iterate_degree: Option<u128>,
    /// Sum of multiplicities of the points found over C.
    pub multiplicity_total: Option<u128>,
    /// `bezout_bound - multiplicity_total`, when known.
    pub deficit: Option<i128>,
    pub completeness: Completeness,
    pub degree_note: Option<String>,
    pub diagnostics: Diagnostics,
    #[serde(default)]
    pub orbits: Vec<OrbitRecord>,
}

impl SolveReport {
    /// Isolated points with certificates: the periodic-point count.
    pub fn isolated_count(&self) -> usize {
        self.points
            .iter()
            .filter(|p| p.isolated_certificate)
            .count()
    }

    pub fn has_nonisolated(&self) -> bool {
        self.points.iter().any(|p| !p.isolated_certificate)
    }

    /// The complex count must never exceed `D^{kN}`.
    pub fn check_bezout(&self) -> Result<()> {
        if let Some(c) = self.complex_count {
            if c as u128 > self.bezout_bound {
                return Err(Error::InconsistentOrbit(format!(
                    "Bezout ceiling violated: {c} points > {}",
                    self.bezout_bound
                )));
            }
        }
        Ok(())
    }
}

pub fn bezout_bound(dim: usize, degree: u32, k: usize) -> u128 {
    (degree as u128).saturating_pow((k * dim) as u32)
}

/// Dispatch per `config.method`.
pub fn solve(map: &PolyMap, k: usize, config: &SolveConfig) -> Result<SolveReport> {
    match &config.method {
        Method::Univariate => solve_univariate(map, k, config),
        Method::Simultaneous => solve_simultaneous(map, k, config),
        Method::Newton { plan, rng_seed } => solve_newton(map, k, plan, *rng_seed, config),
        Method::Auto => {
            if map.dim() == 1 {
                let d = map.degree() as u128;
                if d.checked_pow(k as u32)
                    .is_some_and(|v| v <= config.degree_cap)
                {
                    solve_univariate(map, k, config)
                } else {
                    solve_simultaneous(map, k, config)
                }
            } else {
                let plan = config
                    .fallback_plan
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("N >= 2 requires a seed plan".into()))?;
                solve_newton(map, k, plan, config.rng_seed, config)
            }
        }
    }
}

/// All period-k points of a univariate map via companion-matrix roots of
/// the expanded iterate, refined against the orbit recurrence.
pub fn solve_univariate(map: &PolyMap, k: usize, config: &SolveConfig) -> Result<SolveReport> {
    if map.dim() != 1 {
        return Err(Error::Unsupported(map.dim()));
    }
    let iterate = map.compose_symbolic(k, config.degree_cap)?;
    let mut f = iterate.univariate_coeffs()?;
    f[1] -= C64::new(1.0, 0.0);
    let f = roots::trim(&f).to_vec();
    if f.is_empty() {
        return Err(Error::NonisolatedContinuum);
    }
    let iterate_deg = (f.len() - 1) as u128;
    // an unconverged eigensolve only costs the starting guesses
    let guesses = roots::companion_roots(&f)
        .unwrap_or_else(|_| roots::circle_guesses(f.len() - 1, periodic_radius(map)));
    let radius = clamp_radius(map);
    let mut report =
        univariate_from_guesses(map, k, guesses, radius, iterate_deg, "univariate", config);
    if report.completeness != Completeness::Certified && map.effective_degree() >= 2 {
        // expanded coefficients can be too ill-conditioned to seed every root
        let circle = roots::circle_guesses(iterate_deg as usize, periodic_radius(map));
        let retry =
            univariate_from_guesses(map, k, circle, radius, iterate_deg, "univariate", config);
        let score = |r: &SolveReport| (r.completeness == Completeness::Certified, r.complex_count);
        if score(&retry) > score(&report) {
            report = retry;
        }
    }
    if iterate_deg < bezout_bound(1, map.degree(), k) {
        report.degree_note = Some(format!(
            "iterate minus identity has degree {iterate_deg} < D^k = {}",
            report.bezout_bound
        ));
    }
    Ok(report)
}

/// Period-k points of a univariate map by Aberth iteration on the orbit
/// recurrence, without expanding the iterate.
pub fn solve_simultaneous(map: &PolyMap, k: usize, config: &SolveConfig) -> Result<SolveReport> {
    if map.dim() != 1 {
        return Err(Error::Unsupported(map.dim()));
    }
    let d_eff = map.effective_degree();
    if d_eff <= 1 {
        // affine: the expanded route is exact and tiny
        let cfg = SolveConfig {
            degree_cap: u128::MAX,
            ..config.clone()
        };
        let mut r = solve_univariate(map, k, &cfg)?;
        r.method = "simultaneous".into();
        return Ok(r);
    }
    let degree = iterate_degree(d_eff, k, config.simultaneous_cap)?;
    let guesses = roots::circle_guesses(degree as usize, periodic_radius(map));
    let mut report = univariate_from_guesses(
        map,
        k,
        guesses,
        clamp_radius(map),
        degree,
        "simultaneous",
        config,
    );
    if d_eff < map.degree() {
        report.degree_note = Some(format!(
            "effective degree {d_eff} < declared degree {}",
            map.degree()
        ));
    }
    Ok(report)
}

/// Radius outside which every orbit of a univariate map of effective degree
/// >= 2 escapes (`|P(z)| >= 2|z|`), so all periodic points lie inside it.
pub fn escape_radius(map: &PolyMap) -> f64 {
    let coeffs = map.univariate_coeffs().unwrap_or_default();
    let d = map.effective_degree() as usize;
    if d < 2 {
        return f64::INFINITY;
    }
    let tail: f64 = coeffs[..d].iter().map(|c| c.norm()).sum();
    ((2.0 + tail) / coeffs[d].norm()).max(1.0)
}

/// Radius beyond which `|P(z)| > |z|` strictly, so no periodic point of a
/// univariate map of effective degree >= 2 lies outside it: the positive
/// root of `|a_d| r^d - sum_{i<d} |a_i| r^i - r`.
pub fn periodic_radius(map: &PolyMap) -> f64 {
    let coeffs = map.univariate_coeffs().unwrap_or_default();
    let d = map.effective_degree() as usize;
    if d < 2 {
        return f64::INFINITY;
    }
    // g is increasing in r and shares its positive root with the polynomial
    let g = |r: f64| {
        let tail: f64 = coeffs[..d]
            .iter()
            .enumerate()
            .map(|(i, c)| c.norm() * r.powi(i as i32 - d as i32))
            .sum();
        coeffs[d].norm() - tail - r.powi(1 - d as i32)
    };
    let (mut lo, mut hi) = (0.0, escape_radius(map));
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn clamp_radius(map: &PolyMap) -> f64 {
    periodic_radius(map) * (1.0 + 1e-6)
}

struct Candidate {
    z: C64,
    residual: f64,
    deriv: f64,
    converged: bool,
    multiplicity: usize,
}

fn polish_1d(map: &PolyMap, k: usize, mut z: C64, tol: f64) -> (C64, f64, f64, bool) {
    let mut best = match map.displacement_1d(z, k) {
        Some((f, df)) => (z, f.norm(), df.norm()),
        None => return (z, f64::INFINITY, 0.0, false),
    };
    for _ in 0..30 {
        let Some((f, df)) = map.displacement_1d(z, k) else {
            break;
        };
        if df.is_zero() {
            break;
        }
        let step = f / df;
        let next = z - step;
        match map.displacement_1d(next, k) {
            Some((fn_, dfn)) if fn_.norm() <= best.1 => {
                best = (next, fn_.norm(), dfn.norm());
                z = next;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            _ => break,
        }
    }
    (best.0, best.1, best.2, best.1 <= tol)
}

fn canonical_cmp(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

fn max_dist(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn univariate_from_guesses(
    map: &PolyMap,
    k: usize,
    guesses: Vec<C64>,
    radius: f64,
    iterate_deg: u128,
    method: &str,
    config: &SolveConfig,
) -> SolveReport {
    let tol = &config.tolerances;
    let eval = |z: C64| map.displacement_1d(z, k);
    let (refined, _) = roots::aberth(eval, guesses, radius, 2000, 1e-14);

    let mut diagnostics = Diagnostics::default();
    let mut cands: Vec<Candidate> = refined
        .into_iter()
        .map(|z| {
            let (z, residual, deriv, converged) = polish_1d(map, k, z, tol.polish);
            Candidate {
                z,
                residual,
                deriv,
                converged,
                multiplicity: 1,
            }
        })
        .collect();
    cands.sort_by(|a, b| canonical_cmp(&[a.z], &[b.z]));

    let mut merged: Vec<Candidate> = Vec::new();
    for c in cands {
        match merged.iter_mut().find(|m| (m.z - c.z).norm() <= tol.dedup) {
            Some(m) => absorb(m, c),
            None => merged.push(c),
        }
    }
    // approximations of one multiple root spread by ~eps^(1/m)
    let mut clustered: Vec<Candidate> = Vec::new();
    for c in merged {
        let weak = c.multiplicity > 1 || c.deriv < tol.singular;
        match clustered.iter_mut().find(|m| {
            weak && (m.multiplicity > 1 || m.deriv < tol.singular)
                && (m.z - c.z).norm() <= tol.cluster
        }) {
            Some(m) => absorb(m, c),
            None => clustered.push(c),
        }
    }

    let mut all_points = Vec::new();
    let mut multiplicity_total: u128 = 0;
    for c in clustered {
        if !(c.residual <= tol.residual) {
            diagnostics.rejected_residual += c.multiplicity;
            continue;
        }
        if c.multiplicity > 1 {
            diagnostics.multiple_roots += 1;
        }
        multiplicity_total += c.multiplicity as u128;
        let isolated = c.multiplicity == 1 && c.deriv >= tol.singular;
        all_points.push(PeriodicPoint {
            location: vec![c.z],
            period_n: k,
            residual: c.residual,
            newton_converged: c.converged,
            isolated_certificate: isolated,
            multiplicity: c.multiplicity,
            sigma_min: c.deriv,
        });
    }
    diagnostics.unconverged = all_points.iter().filter(|p| !p.newton_converged).count();

    let complex_count = all_points.len();
    let mut real_points: Vec<PeriodicPoint> = all_points
        .iter()
        .filter(|p| p.location[0].im.abs() <= tol.real * p.location[0].norm().max(1.0))
        .cloned()
        .map(|mut p| {
            let x = C64::new(p.location[0].re, 0.0);
            let (z, residual, deriv, converged) = polish_1d(map, k, x, tol.polish);
            p.location = vec![C64::new(z.re, 0.0)];
            p.residual = residual;
            p.sigma_min = deriv;
            p.newton_converged = converged;
            p.isolated_certificate = p.multiplicity == 1 && deriv >= tol.singular;
            p
        })
        .collect();
    real_points.sort_by(|a, b| canonical_cmp(&a.location, &b.location));
    let real_count = real_points.len();

    let bound = bezout_bound(1, map.degree(), k);
    let completeness = if multiplicity_total == iterate_deg {
        Completeness::Certified
    } else {
        Completeness::Heuristic
    };
    let points = match map.field() {
        Field::Real => real_points,
        Field::Complex => all_points,
    };
    SolveReport {
        map_hash: map.hash(),
        period: k,
        method: method.into(),
        field: map.field(),
        tolerances: *tol,
        seed_plan: None,
        rng_seed: None,
        points,
        complex_count: Some(complex_count),
        real_count,
        bezout_bound: bound,
        iterate_degree: Some(iterate_deg),
        multiplicity_total: Some(multiplicity_total),
        deficit: Some(bound as i128 - multiplicity_total as i128),
        completeness,
        degree_note: None,
        diagnostics,
        orbits: Vec::new(),
    }
}

fn absorb(into: &mut Candidate, c: Candidate) {
    into.multiplicity += c.multiplicity;
    if c.residual < into.residual {
        into.z = c.z;
        into.residual = c.residual;
        into.deriv = c.deriv;
        into.converged = c.converged;
    }
}

enum NewtonOutcome {
    Converged(Vec<C64>),
    Diverged,
    Unconverged,
}

fn residual_of(map: &PolyMap, x: &[C64], k: usize) -> Option<(Vec<C64>, DMatrix<C64>, f64)> {
    let (y, jac) = map.iterate_complexified(x, k).ok()?;
    let f: Vec<C64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
    let r = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = x.len();
    let jf = jac.0 - DMatrix::<C64>::identity(n, n);
    Some((f, jf, r))
}

fn damped_newton(map: &PolyMap, k: usize, seed: &[C64], tol: f64) -> NewtonOutcome {
    let mut x = seed.to_vec();
    let Some((mut f, mut jf, mut r)) = residual_of(map, &x, k) else {
        return NewtonOutcome::Diverged;
    };
    for _ in 0..100 {
        if r <= tol {
            break;
        }
        let rhs = DVector::from_iterator(f.len(), f.iter().map(|z| -z));
        let Some(dx) = jf.clone().lu().solve(&rhs) else {
            return NewtonOutcome::Unconverged;
        };
        let mut t = 1.0;
        let mut accepted = None;
        while t >= 1.0 / 1024.0 {
            let trial: Vec<C64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d * t).collect();
            if let Some(next) = residual_of(map, &trial, k) {
                if next.2 < (1.0 - 0.25 * t) * r || next.2 <= tol {
                    accepted = Some((trial, next));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((nx, (nf, njf, nr))) = accepted else {
            return if r.is_finite() && r < 1e3 {
                NewtonOutcome::Unconverged
            } else {
                NewtonOutcome::Diverged
            };
        };
        let step = max_dist(&nx, &x);
        x = nx;
        f = nf;
        jf = njf;
        r = nr;
        if step <= 1e-16 * x.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            break;
        }
    }
    if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        NewtonOutcome::Diverged
    } else {
        NewtonOutcome::Converged(x)
    }
}

fn sigma_min(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.min()
}

/// Period-k points from damped Newton on `P^(k)(x) - x` over a seed plan.
pub fn solve_newton(
    map: &PolyMap,
    k: usize,
    plan: &SeedPlan,
    rng_seed: u64,
    config: &SolveConfig,
) -> Result<SolveReport> {
    if k == 0 {
        return Err(Error::InvalidConfig("period must be >= 1".into()));
    }
    let tol = &config.tolerances;
    let seeds = plan.seeds(map.dim(), rng_seed);
    if seeds.is_empty() {
        return Err(Error::NoSeeds);
    }
    let outcomes: Vec<NewtonOutcome> = seeds
        .par_iter()
        .map(|s| damped_newton(map, k, s, tol.polish))
        .collect();
    let mut diagnostics = Diagnostics {
        seeds: seeds.len(),
        ..Diagnostics::default()
    };
    let mut found: Vec<Vec<C64>> = Vec::new();
    for o in outcomes {
        match o {
            NewtonOutcome::Converged(x) => found.push(x),
            NewtonOutcome::Diverged => diagnostics.diverged += 1,
            NewtonOutcome::Unconverged => diagnostics.unconverged += 1,
        }
    }

    let accept = |x: &[C64]| -> Option<(f64, f64)> {
        let (_, jf, r) = residual_of(map, x, k)?;
        (r <= tol.residual).then(|| (r, sigma_min(&jf)))
    };
    let before = found.len();
    found.retain(|x| accept(x).is_some());
    diagnostics.rejected_residual = before - found.len();

    let mut unique = dedup_points(found, tol.dedup);
    // images of period-k points are period-k points
    for _ in 0..k {
        let images: Vec<Vec<C64>> = unique
            .iter()
            .filter_map(|x| map.evaluate_complexified(x).ok())
            .filter_map(|y| match damped_newton(map, k, &y, tol.polish) {
                NewtonOutcome::Converged(z) if accept(&z).is_some() => Some(z),
                _ => None,
            })
            .collect();
        let before = unique.len();
        unique.extend(images);
        unique = dedup_points(unique, tol.dedup);
        if unique.len() == before {
            break;
        }
    }

    let all_points: Vec<PeriodicPoint> = unique
        .into_iter()
        .filter_map(|x| {
            let (r, s) = accept(&x)?;
            Some(PeriodicPoint {
                location: x,
                period_n: k,
                residual: r,
                newton_converged: true,
                isolated_certificate: s >= tol.singular,
                multiplicity: 1,
                sigma_min: s,
            })
        })
        .collect();
    let real_points: Vec<PeriodicPoint> = all_points
        .iter()
        .filter(|p| {
            p.location
                .iter()
                .all(|z| z.im.abs() <= tol.real * z.norm().max(1.0))
        })
        .cloned()
        .map(|mut p| {
            for z in p.location.iter_mut() {
                z.im = 0.0;
            }
            p
        })
        .collect();
    let sees_complex = plan.complex;
    let bound = bezout_bound(map.dim(), map.degree(), k);
    let complex_count = sees_complex.then_some(all_points.len());
    let real_count = real_points.len();
    let points = match map.field() {
        Field::Real => real_points,
        Field::Complex => all_points,
    };
    Ok(SolveReport {
        map_hash: map.hash(),
        period: k,
        method: "newton".into(),
        field: map.field(),
        tolerances: *tol,
        seed_plan: Some(plan.clone()),
        rng_seed: Some(rng_seed),
        complex_count,
        real_count,
        bezout_bound: bound,
        iterate_degree: None,
        multiplicity_total: complex_count.map(|c| c as u128),
        deficit: complex_count.map(|c| bound as i128 - c as i128),
        completeness: Completeness::Heuristic,
        degree_note: None,
        diagnostics,
        points,
        orbits: Vec::new(),
    })
}

/// Canonical-order greedy deduplication in max-norm.
fn dedup_points(mut pts: Vec<Vec<C64>>, tol: f64) -> Vec<Vec<C64>> {
    pts.sort_by(|a, b| canonical_cmp(a, b));
    let mut out: Vec<Vec<C64>> = Vec::new();
    for p in pts {
        if !out.iter().any(|q| max_dist(q, &p) <= tol) {
            out.push(p);
        }
    }
    out
}

/// A cycle of period points with its least period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    /// Indices into the input point list, in orbit order.
    pub indices: Vec<usize>,
    pub points: Vec<Vec<C64>>,
    pub least_period: usize,
}

/// Group period-n points into cycles by following the map.
pub fn orbit_partition(
    points: &[PeriodicPoint],
    map: &PolyMap,
    match_tol: f64,
) -> Result<Vec<Orbit>> {
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    let period_n = first.period_n;
    if points.iter().any(|p| p.period_n != period_n) {
        return Err(Error::InconsistentOrbit("mixed period_n".into()));
    }
    let images: Vec<Vec<C64>> = points
        .iter()
        .map(|p| map.evaluate_complexified(&p.location))
        .collect::<Result<_>>()?;
    let successor: Vec<usize> = images
        .iter()
        .enumerate()
        .map(|(i, y)| {
            points
                .iter()
                .enumerate()
                .map(|(j, q)| (j, max_dist(&q.location, y)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .filter(|(_, d)| *d <= match_tol)
                .map(|(j, _)| j)
                .ok_or_else(|| {
                    Error::InconsistentOrbit(format!("image of point {i} matches no input point"))
                })
        })
        .collect::<Result<_>>()?;

    let mut assigned = vec![false; points.len()];
    let mut orbits = Vec::new();
    for start in 0..points.len() {
        if assigned[start] {
            continue;
        }
        let mut cycle = vec![start];
        assigned[start] = true;
        let mut cur = successor[start];
        while cur != start {
            if assigned[cur] || cycle.len() > period_n {
                return Err(Error::InconsistentOrbit(format!(
                    "point {start} does not return to itself within {period_n} steps"
                )));
            }
            assigned[cur] = true;
            cycle.push(cur);
            cur = successor[cur];
        }
        let d = cycle.len();
        if period_n % d != 0 {
            return Err(Error::InconsistentOrbit(format!(
                "least period {d} does not divide {period_n}"
            )));
        }
        orbits.push(Orbit {
            points: cycle.iter().map(|&i| points[i].location.clone()).collect(),
            indices: cycle,
            least_period: d,
        });
    }
    Ok(orbits)
}
