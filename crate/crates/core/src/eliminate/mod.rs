//! Exact elimination of `x` from the period/multiplier system of a
//! univariate polynomial `a_0 + a_1 x + ... + a_D x^D`:
//!
//! `F1 = P^(k)(x) - x`, `F2 = (P^(k))'(x) - lambda`.
//!
//! The Sylvester resultant `R(a, lambda)` vanishes exactly when some period-k
//! point has multiplier `lambda` (away from vanishing leading coefficients).

pub mod bareiss;
pub mod sparse;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use sparse::SparsePoly;

pub const MAX_DEGREE: u32 = 2;
pub const MAX_PERIOD: usize = 2;
const CERTIFICATE_TRIES: usize = 2000;

/// `a_0, ..., a_D, x, lambda`.
pub fn system_vars(degree: u32) -> Vec<String> {
    let mut v: Vec<String> = (0..=degree).map(|i| format!("a_{i}")).collect();
    v.push("x".into());
    v.push("lambda".into());
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolySystem {
    pub degree: u32,
    pub period: usize,
    pub f1: SparsePoly,
    pub f2: SparsePoly,
}

pub fn build_system(degree: u32, period: usize) -> Result<PolySystem> {
    if degree == 0 || period == 0 {
        return Err(Error::EliminationScope(
            "degree and period must be >= 1".into(),
        ));
    }
    if degree > MAX_DEGREE || period > MAX_PERIOD {
        return Err(Error::EliminationScope(format!(
            "(D, k) = ({degree}, {period}) exceeds D <= {MAX_DEGREE}, k <= {MAX_PERIOD}"
        )));
    }
    let vars = system_vars(degree);
    let xi = degree as usize + 1;
    let x = SparsePoly::var(&vars, xi);
    let lambda = SparsePoly::var(&vars, xi + 1);
    // P(x) by Horner
    let mut p = SparsePoly::zero(&vars);
    for i in (0..=degree as usize).rev() {
        p = &(&p * &x) + &SparsePoly::var(&vars, i);
    }
    let mut iterate = x.clone();
    for _ in 0..period {
        iterate = p.substitute(xi, &iterate);
    }
    Ok(PolySystem {
        degree,
        period,
        f1: &iterate - &x,
        f2: &iterate.derivative(xi) - &lambda,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    /// Variable name to exact rational value.
    pub point: BTreeMap<String, String>,
    /// Exact value at the point (nonzero).
    pub value: String,
}

impl Certificate {
    fn values(&self, vars: &[String]) -> Result<Vec<BigRational>> {
        vars.iter()
            .map(|v| {
                self.point
                    .get(v)
                    .ok_or_else(|| Error::InvalidConfig(format!("certificate lacks {v}")))
                    .and_then(|s| parse_rational(s))
            })
            .collect()
    }

    /// Re-evaluate exactly: the polynomial is nonzero at the point.
    pub fn validates(&self, poly: &SparsePoly) -> bool {
        self.values(poly.vars())
            .map(|pt| !poly.eval(&pt).is_zero())
            .unwrap_or(false)
    }
}

fn rational_text(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Deterministic search over small rationals for a point where some of
/// `polys` is nonzero; the first nonzero one supplies the value.
fn find_certificate(polys: &[&SparsePoly]) -> Option<(Certificate, Vec<BigRational>)> {
    let vars = polys[0].vars();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for attempt in 0..CERTIFICATE_TRIES {
        let pt: Vec<BigRational> = vars
            .iter()
            .map(|_| {
                if attempt == 0 {
                    BigRational::one()
                } else {
                    BigRational::new(
                        rng.gen_range(-9i64..=9).into(),
                        rng.gen_range(1i64..=5).into(),
                    )
                }
            })
            .collect();
        let vals: Vec<BigRational> = polys.iter().map(|p| p.eval(&pt)).collect();
        if vals.iter().any(|v| !v.is_zero()) {
            let point = vars
                .iter()
                .cloned()
                .zip(pt.iter().map(rational_text))
                .collect();
            let value = vals.iter().map(rational_text).collect::<Vec<_>>().join(",");
            return Some((Certificate { point, value }, vals));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationResult {
    /// `R(a, lambda)`, with `x` eliminated.
    pub resultant: SparsePoly,
    pub degrees: BTreeMap<String, u32>,
    pub certificate: Certificate,
}

impl EliminationResult {
    /// Coefficients of `R(a, lambda)` in lambda (lowest first) at exact `a`.
    pub fn specialize(&self, a: &[BigRational]) -> Result<Vec<BigRational>> {
        let li = self.lambda_index()?;
        if a.len() != li {
            return Err(Error::DimensionMismatch {
                expected: li,
                got: a.len(),
            });
        }
        let mut pt = a.to_vec();
        pt.push(BigRational::zero());
        Ok(self
            .resultant
            .coeffs_in(li)
            .iter()
            .map(|c| c.eval(&pt))
            .collect())
    }

    fn lambda_index(&self) -> Result<usize> {
        self.resultant
            .var_index("lambda")
            .ok_or_else(|| Error::InvalidConfig("resultant has no lambda".into()))
    }
}

fn sylvester(p: &[SparsePoly], q: &[SparsePoly], vars: &[String]) -> Vec<Vec<SparsePoly>> {
    // p, q lowest power first
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut rows = vec![vec![SparsePoly::zero(vars); size]; size];
    for i in 0..n {
        for (j, c) in p.iter().rev().enumerate() {
            rows[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in q.iter().rev().enumerate() {
            rows[n + i][i + j] = c.clone();
        }
    }
    rows
}

/// Sylvester resultant with respect to `x`, by fraction-free elimination.
pub fn resultant_x(f1: &SparsePoly, f2: &SparsePoly) -> Result<EliminationResult> {
    let xi = f1
        .var_index("x")
        .ok_or_else(|| Error::InvalidConfig("no variable x".into()))?;
    if f1.is_zero() || f2.is_zero() {
        return Err(Error::ZeroResultant("an input polynomial is zero".into()));
    }
    let vars = f1.vars().to_vec();
    let p = f1.coeffs_in(xi);
    let q = f2.coeffs_in(xi);
    let det = bareiss::determinant(sylvester(&p, &q, &vars), &vars)?;
    if det.is_zero() {
        return Err(Error::ZeroResultant(format!(
            "leading x-coefficients {} and {}",
            p.last().expect("nonempty"),
            q.last().expect("nonempty")
        )));
    }
    let resultant = det.without_var(xi)?;
    let degrees = resultant
        .vars()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), resultant.degree_in(i).unwrap_or(0)))
        .collect();
    let (certificate, _) = find_certificate(&[&resultant])
        .ok_or_else(|| Error::ZeroResultant("no nonzero certificate found".into()))?;
    Ok(EliminationResult {
        resultant,
        degrees,
        certificate,
    })
}

/// Build the system for `(D, k)` and eliminate `x`.
pub fn eliminate(degree: u32, period: usize) -> Result<(PolySystem, EliminationResult)> {
    let system = build_system(degree, period)?;
    let result = resultant_x(&system.f1, &system.f2)?;
    Ok((system, result))
}

/// An exact complex number `re + i im` with rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussianRational { re, im }
    }

    /// Parse `"RE,IM"` (each an integer, `p/q`, or a decimal) or a lone `"RE"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut parts = text.split(',');
        let re = parse_rational(parts.next().unwrap_or("").trim())?;
        let im = match parts.next() {
            Some(s) => parse_rational(s.trim())?,
            None => BigRational::zero(),
        };
        if parts.next().is_some() {
            return Err(Error::InvalidConfig(format!("bad complex value {text:?}")));
        }
        Ok(GaussianRational { re, im })
    }

    pub fn is_unit(&self) -> bool {
        &self.re * &self.re + &self.im * &self.im == BigRational::one()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    pub fn text(&self) -> String {
        format!("{},{}", rational_text(&self.re), rational_text(&self.im))
    }
}

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::InvalidConfig(format!("bad rational {text:?}"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let whole: BigInt = match int {
            "" | "-" | "+" => BigInt::zero(),
            s => s.parse().map_err(|_| bad())?,
        };
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let mag = whole.abs() * &scale + f;
        let numer = if negative { -mag } else { mag };
        return Ok(BigRational::new(numer, scale));
    }
    text.parse::<BigInt>()
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// `R(a, lambda0)` as a polynomial in `a`, split into real and imaginary
/// integer parts after clearing the denominator of `lambda0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaSlice {
    pub lambda0: String,
    /// The slice equals `(re + i im) / scale`.
    pub scale: String,
    pub re: SparsePoly,
    pub im: SparsePoly,
    pub certificate: Certificate,
}

impl LambdaSlice {
    pub fn validates(&self) -> bool {
        let Ok(pt) = self.certificate.values(self.re.vars()) else {
            return false;
        };
        !self.re.eval(&pt).is_zero() || !self.im.eval(&pt).is_zero()
    }
}

pub fn lambda0_slice(
    result: &EliminationResult,
    lambda0: &GaussianRational,
) -> Result<LambdaSlice> {
    if !lambda0.is_unit() {
        let (re, im) = lambda0.to_f64();
        return Err(Error::OffUnitCircle { re, im });
    }
    let li = result.lambda_index()?;
    let coeffs = result.resultant.coeffs_in(li);
    let deg = coeffs.len() - 1;
    let r = lambda0.re.denom().lcm(lambda0.im.denom());
    let p = (&lambda0.re * BigRational::from_integer(r.clone())).to_integer();
    let q = (&lambda0.im * BigRational::from_integer(r.clone())).to_integer();
    let vars = result.resultant.vars();
    let mut re = SparsePoly::zero(vars);
    let mut im = SparsePoly::zero(vars);
    // (p + iq)^j, accumulated
    let (mut gr, mut gi) = (BigInt::one(), BigInt::zero());
    for (j, c) in coeffs.iter().enumerate() {
        let s = num_traits::pow(r.clone(), deg - j);
        re = &re + &c.scale(&(&gr * &s));
        im = &im + &c.scale(&(&gi * &s));
        let next = (&gr * &p - &gi * &q, &gr * &q + &gi * &p);
        gr = next.0;
        gi = next.1;
    }
    let re = re.without_var(li)?;
    let im = im.without_var(li)?;
    if re.is_zero() && im.is_zero() {
        return Err(Error::ZeroSlice);
    }
    let (certificate, _) = find_certificate(&[&re, &im]).ok_or(Error::ZeroSlice)?;
    Ok(LambdaSlice {
        lambda0: lambda0.text(),
        scale: num_traits::pow(r, deg).to_string(),
        re,
        im,
        certificate,
    })
}

fn trim_rat(mut p: Vec<BigRational>) -> Vec<BigRational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

/// Monic gcd in Q[x] (coefficients lowest first); empty for the zero polynomial.
pub fn gcd_q(a: Vec<BigRational>, b: Vec<BigRational>) -> Vec<BigRational> {
    let (mut a, mut b) = (trim_rat(a), trim_rat(b));
    while !b.is_empty() {
        // a mod b
        let lb = b.last().expect("nonempty").clone();
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let f = a.last().expect("nonempty") / &lb;
            for (i, c) in b.iter().enumerate() {
                a[shift + i] -= &f * c;
            }
            a = trim_rat(a);
            if a.is_empty() {
                break;
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    if let Some(l) = a.last().cloned() {
        for c in a.iter_mut() {
            *c /= &l;
        }
    }
    a
}

/// Do `F1` and `F2` share a root `x` once `a` and `lambda` are fixed?
pub fn common_root(system: &PolySystem, a: &[BigRational], lambda: &BigRational) -> Result<bool> {
    let d = system.degree as usize;
    if a.len() != d + 1 {
        return Err(Error::DimensionMismatch {
            expected: d + 1,
            got: a.len(),
        });
    }
    let mut pt = a.to_vec();
    pt.push(BigRational::zero());
    pt.push(lambda.clone());
    let uni = |f: &SparsePoly| -> Vec<BigRational> {
        f.coeffs_in(d + 1).iter().map(|c| c.eval(&pt)).collect()
    };
    Ok(gcd_q(uni(&system.f1), uni(&system.f2)).len() >= 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn systems_match_hand_forms() {
        let s = build_system(1, 1).unwrap();
        assert_eq!(s.f1.to_text(), "a_0 + a_1*x - x");
        assert_eq!(s.f2.to_text(), "a_1 - lambda");
        let s = build_system(2, 1).unwrap();
        assert_eq!(s.f1.to_text(), "a_0 + a_1*x + a_2*x^2 - x");
        assert_eq!(s.f2.to_text(), "a_1 + 2*a_2*x - lambda");
        let s = build_system(2, 2).unwrap();
        assert_eq!(s.f1.degree_in(3), Some(4));
        assert!(build_system(3, 1).is_err());
        assert!(build_system(2, 3).is_err());
    }

    #[test]
    fn degree_one_resultant() {
        let (_, r) = eliminate(1, 1).unwrap();
        assert_eq!(r.resultant.to_text(), "a_1 - lambda");
        assert!(r.certificate.validates(&r.resultant));
        let s = lambda0_slice(&r, &GaussianRational::parse("1,0").unwrap()).unwrap();
        assert_eq!(s.re.to_text(), "a_1 - 1");
        assert!(s.im.is_zero());
        assert!(s.validates());
    }

    #[test]
    fn quadratic_resultant_and_slices() {
        let (_, r) = eliminate(2, 1).unwrap();
        // squaring map a = (0, 0, 1): lambda (lambda - 2)
        assert_eq!(
            r.specialize(&[q(0), q(0), q(1)]).unwrap(),
            vec![q(0), q(-2), q(1)]
        );
        let s = lambda0_slice(&r, &GaussianRational::parse("1,0").unwrap()).unwrap();
        let v = s.re.eval(&[q(1), q(0), q(1)]);
        assert_eq!(v, q(3));
        let neg = lambda0_slice(&r, &GaussianRational::parse("-1,0").unwrap()).unwrap();
        assert!(neg.validates());
        let i = lambda0_slice(&r, &GaussianRational::parse("0,1").unwrap()).unwrap();
        assert!(i.validates() && !i.im.is_zero());
        let pythag = GaussianRational::parse("3/5,4/5").unwrap();
        assert!(lambda0_slice(&r, &pythag).unwrap().validates());
        assert!(matches!(
            lambda0_slice(&r, &GaussianRational::parse("1/2,0").unwrap()),
            Err(Error::OffUnitCircle { .. })
        ));
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(
            parse_rational("-3/6").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(
            parse_rational("0.25").unwrap(),
            BigRational::new(1.into(), 4.into())
        );
        assert_eq!(
            parse_rational("-1.5").unwrap(),
            BigRational::new((-3).into(), 2.into())
        );
        assert_eq!(
            parse_rational("-0.5").unwrap(),
            BigRational::new((-1).into(), 2.into())
        );
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(GaussianRational::parse("1,2,3").is_err());
    }

    #[test]
    fn gcd_detects_shared_roots() {
        // (x - 1)(x - 2) and (x - 1)(x + 5)
        let a = vec![q(2), q(-3), q(1)];
        let b = vec![q(-5), q(4), q(1)];
        assert_eq!(gcd_q(a, b), vec![q(-1), q(1)]);
        assert_eq!(gcd_q(vec![q(1), q(1)], vec![q(2), q(1)]), vec![q(1)]);
    }
}
