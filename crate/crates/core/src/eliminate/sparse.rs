//! Sparse multivariate polynomials with arbitrary-precision integer coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terms are keyed by exponent vectors in lexicographic order (first variable
/// most significant); zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl SparsePoly {
    pub fn zero(vars: &[String]) -> Self {
        SparsePoly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &[String], c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c.into());
        p
    }

    pub fn var(vars: &[String], index: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[index] = 1;
        let mut p = Self::zero(vars);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms<I>(vars: &[String], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        let mut p = Self::zero(vars);
        for (e, c) in terms {
            if e.len() != vars.len() {
                return Err(Error::DimensionMismatch {
                    expected: vars.len(),
                    got: e.len(),
                });
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    /// Coefficients with respect to `var`, lowest power first.
    pub fn coeffs_in(&self, var: usize) -> Vec<SparsePoly> {
        let deg = self.degree_in(var).unwrap_or(0) as usize;
        let mut out = vec![Self::zero(&self.vars); deg + 1];
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let p = std::mem::replace(&mut e2[var], 0) as usize;
            out[p].add_term(e2, c.clone());
        }
        out
    }

    /// Drop variable `var`, which must not occur.
    pub fn without_var(&self, var: usize) -> Result<Self> {
        if self.degree_in(var).unwrap_or(0) > 0 {
            return Err(Error::InvalidConfig(format!(
                "variable {} still occurs",
                self.vars[var]
            )));
        }
        let mut vars = self.vars.clone();
        vars.remove(var);
        let mut p = Self::zero(&vars);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.remove(var);
            p.add_term(e2, c.clone());
        }
        Ok(p)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut p = Self::zero(&self.vars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::constant(&self.vars, 1);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut p = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if e[var] > 0 {
                let mut e2 = e.clone();
                e2[var] -= 1;
                p.add_term(e2, c * BigInt::from(e[var]));
            }
        }
        p
    }

    /// Replace `var` by `value` (Horner in `var`).
    pub fn substitute(&self, var: usize, value: &SparsePoly) -> Self {
        let coeffs = self.coeffs_in(var);
        let mut acc = Self::zero(&self.vars);
        for c in coeffs.iter().rev() {
            acc = &(&acc * value) + c;
        }
        acc
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = BigRational::from_integer(c.clone());
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    fn leading(&self) -> Option<(&Vec<u32>, &BigInt)> {
        self.terms.iter().next_back()
    }

    /// `self / divisor`, failing unless the division is exact.
    pub fn div_exact(&self, divisor: &SparsePoly) -> Result<SparsePoly> {
        let (de, dc) = divisor
            .leading()
            .ok_or_else(|| Error::InexactDivision("division by zero polynomial".into()))?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut rem = self.clone();
        let mut quot = Self::zero(&self.vars);
        while let Some((re, rc)) = rem.leading() {
            if re.iter().zip(&de).any(|(a, b)| a < b) || !(rc % &dc).is_zero() {
                return Err(Error::InexactDivision(format!(
                    "leading term {} not divisible",
                    self.monomial_text(re)
                )));
            }
            let e: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let c = rc / &dc;
            let mut t = Self::zero(&self.vars);
            t.add_term(e, c);
            rem = &rem - &(&t * divisor);
            quot = &quot + &t;
        }
        Ok(quot)
    }

    fn monomial_text(&self, e: &[u32]) -> String {
        let parts: Vec<String> = self
            .vars
            .iter()
            .zip(e)
            .filter(|(_, &k)| k > 0)
            .map(|(v, &k)| {
                if k == 1 {
                    v.clone()
                } else {
                    format!("{v}^{k}")
                }
            })
            .collect();
        parts.join("*")
    }

    /// Canonical text: terms in decreasing lexicographic order.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono = self.monomial_text(e);
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => out.push_str(&mag.to_string()),
                (false, true) => out.push_str(&mono),
                (false, false) => out.push_str(&format!("{mag}*{mono}")),
            }
        }
        out
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .rev()
                .map(|(e, c)| TermJson {
                    exp: e.clone(),
                    coeff: c.to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PolyJson) -> Result<Self> {
        let terms = json
            .terms
            .iter()
            .map(|t| {
                t.coeff
                    .parse::<BigInt>()
                    .map(|c| (t.exp.clone(), c))
                    .map_err(|_| Error::InvalidMap(format!("bad coefficient {:?}", t.coeff)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(&json.vars, terms)
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    /// Decimal integer, arbitrary precision.
    pub coeff: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub vars: Vec<String>,
    pub terms: Vec<TermJson>,
}

impl Serialize for SparsePoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparsePoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let json = PolyJson::deserialize(d)?;
        SparsePoly::from_json(&json).map_err(serde::de::Error::custom)
    }
}

impl Add for &SparsePoly {
    type Output = SparsePoly;
    fn add(self, rhs: &SparsePoly) -> SparsePoly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }
}

impl Sub for &SparsePoly {
    type Output = SparsePoly;
    fn sub(self, rhs: &SparsePoly) -> SparsePoly {
        let mut p = self.clone();
        for (e, c) in &rhs.terms {
            p.add_term(e.clone(), -c);
        }
        p
    }
}

impl Neg for &SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        self.scale(&BigInt::from(-1))
    }
}

impl Mul for &SparsePoly {
    type Output = SparsePoly;
    // exponents add under multiplication
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: &SparsePoly) -> SparsePoly {
        let mut p = SparsePoly::zero(&self.vars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars() -> Vec<String> {
        ["a", "b", "x"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn arithmetic_and_text() {
        let v = vars();
        let a = SparsePoly::var(&v, 0);
        let x = SparsePoly::var(&v, 2);
        let one = SparsePoly::constant(&v, 1);
        let p = &(&a * &x) - &one;
        assert_eq!(p.to_text(), "a*x - 1");
        let sq = p.pow(2);
        assert_eq!(sq.to_text(), "a^2*x^2 - 2*a*x + 1");
        assert!((&p - &p).is_zero());
        assert_eq!((&p - &p).to_text(), "0");
    }

    #[test]
    fn exact_division() {
        let v = vars();
        let a = SparsePoly::var(&v, 0);
        let b = SparsePoly::var(&v, 1);
        let f = &a + &b;
        let g = &a - &b;
        let prod = &f * &g;
        assert_eq!(prod.div_exact(&g).unwrap(), f);
        assert!(matches!(
            (&prod + &SparsePoly::constant(&v, 1)).div_exact(&g),
            Err(Error::InexactDivision(_))
        ));
    }

    #[test]
    fn substitute_and_eval() {
        let v = vars();
        let x = SparsePoly::var(&v, 2);
        let a = SparsePoly::var(&v, 0);
        let p = &x.pow(2) + &a;
        let q = p.substitute(2, &(&x + &SparsePoly::constant(&v, 1)));
        assert_eq!(q.to_text(), "a + x^2 + 2*x + 1");
        let pt: Vec<BigRational> = [3, 0, 2]
            .iter()
            .map(|&n| BigRational::from_integer(n.into()))
            .collect();
        assert_eq!(q.eval(&pt), BigRational::from_integer(12.into()));
        assert_eq!(p.derivative(2).to_text(), "2*x");
    }

    #[test]
    fn json_round_trip() {
        let v = vars();
        let p = &SparsePoly::var(&v, 0).pow(3) - &SparsePoly::constant(&v, 7);
        let text = serde_json::to_string(&p).unwrap();
        let back: SparsePoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }
}
