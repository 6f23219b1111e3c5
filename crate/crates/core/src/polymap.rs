//! Polynomial self-maps of N-space: `P(a, x) = sum_{|alpha| <= D} a_alpha x^alpha`.
//!
//! Coefficients are stored sparsely, keyed by [`MultiIndex`] in graded
//! lexicographic order, so serialization and hashing are reproducible.
//! Every scalar is carried as `Complex<f64>`; a real-field map simply has
//! zero imaginary parts everywhere.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Degree cap for symbolic univariate composition.
pub const DEFAULT_SYMBOLIC_CAP: u128 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// Exponent vector `alpha` in `Z_+^N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Every multi-index with `|alpha| <= degree`, in canonical order.
pub fn all_multi_indices(dim: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if prefix.len() == dim {
            out.push(MultiIndex(prefix.clone()));
            return;
        }
        for e in 0..=budget {
            prefix.push(e);
            rec(dim, budget - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
    out.sort();
    out
}

/// `mu(N, D) = #{alpha in Z_+^N : |alpha| <= D} = C(N + D, D)`.
pub fn mu(dim: usize, degree: u32) -> usize {
    let mut acc: u128 = 1;
    for i in 1..=(degree as u128) {
        acc = acc * (dim as u128 + i) / i;
    }
    acc as usize
}

/// `N x N` linearization `d_x P` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian(pub DMatrix<C64>);

impl Jacobian {
    pub fn identity(n: usize) -> Self {
        Jacobian(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMap {
    dim: usize,
    degree: u32,
    field: Field,
    coeffs: BTreeMap<MultiIndex, Vec<C64>>,
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl PolyMap {
    pub fn new<I>(dim: usize, degree: u32, field: Field, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Vec<C64>)>,
    {
        if dim == 0 {
            return Err(Error::InvalidMap("dimension must be >= 1".into()));
        }
        if degree == 0 {
            return Err(Error::InvalidMap("degree must be >= 1".into()));
        }
        let mut table = BTreeMap::new();
        for (alpha, value) in coeffs {
            if alpha.len() != dim {
                return Err(Error::InvalidMap(format!(
                    "multi-index {alpha:?} has length {} (N = {dim})",
                    alpha.len()
                )));
            }
            let idx = MultiIndex(alpha);
            if idx.order() > degree {
                return Err(Error::InvalidMap(format!(
                    "multi-index {:?} has order {} > degree {degree}",
                    idx.0,
                    idx.order()
                )));
            }
            if value.len() != dim {
                return Err(Error::InvalidMap(format!(
                    "coefficient for {:?} has {} components (N = {dim})",
                    idx.0,
                    value.len()
                )));
            }
            if value.iter().any(|z| !finite(*z)) {
                return Err(Error::InvalidMap(format!(
                    "non-finite coefficient at {:?}",
                    idx.0
                )));
            }
            if field == Field::Real && value.iter().any(|z| z.im != 0.0) {
                return Err(Error::InvalidMap(format!(
                    "real-field map has a complex coefficient at {:?}",
                    idx.0
                )));
            }
            if table.contains_key(&idx) {
                return Err(Error::InvalidMap(format!(
                    "duplicate multi-index {:?}",
                    idx.0
                )));
            }
            table.insert(idx, value);
        }
        table.retain(|_, v: &mut Vec<C64>| v.iter().any(|z| !z.is_zero()));
        Ok(PolyMap {
            dim,
            degree,
            field,
            coeffs: table,
        })
    }

    /// Univariate real map from ascending coefficients `c_0 + c_1 x + ...`.
    pub fn univariate_real(coeffs: &[f64]) -> Result<Self> {
        let degree = coeffs.len().saturating_sub(1).max(1) as u32;
        Self::new(
            1,
            degree,
            Field::Real,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (vec![i as u32], vec![C64::new(*c, 0.0)])),
        )
    }

    /// Univariate complex map from ascending coefficients.
    pub fn univariate_complex(coeffs: &[C64]) -> Result<Self> {
        let degree = coeffs.len().saturating_sub(1).max(1) as u32;
        Self::new(
            1,
            degree,
            Field::Complex,
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| (vec![i as u32], vec![*c])),
        )
    }

    /// The homogeneous model map `(z_1, ..., z_N) -> (z_1^D, ..., z_N^D)`.
    pub fn power_map(dim: usize, degree: u32, field: Field) -> Result<Self> {
        let terms = (0..dim).map(|i| {
            let mut alpha = vec![0; dim];
            alpha[i] = degree;
            let mut value = vec![C64::zero(); dim];
            value[i] = C64::one();
            (alpha, value)
        });
        Self::new(dim, degree, field, terms)
    }

    /// `x -> s x` on N-space.
    pub fn linear_scale(dim: usize, s: f64) -> Result<Self> {
        let terms = (0..dim).map(|i| {
            let mut alpha = vec![0; dim];
            alpha[i] = 1;
            let mut value = vec![C64::zero(); dim];
            value[i] = C64::new(s, 0.0);
            (alpha, value)
        });
        Self::new(dim, 1, Field::Real, terms)
    }

    /// Map from a full coefficient vector `a in C^{mu N}`, laid out as
    /// `all_multi_indices` order, each index contributing N components.
    pub fn from_coefficient_vector(
        dim: usize,
        degree: u32,
        field: Field,
        values: &[C64],
    ) -> Result<Self> {
        let indices = all_multi_indices(dim, degree);
        if values.len() != indices.len() * dim {
            return Err(Error::InvalidMap(format!(
                "coefficient vector has length {}, expected {}",
                values.len(),
                indices.len() * dim
            )));
        }
        Self::new(
            dim,
            degree,
            field,
            indices
                .into_iter()
                .zip(values.chunks(dim))
                .map(|(idx, v)| (idx.0, v.to_vec())),
        )
    }

    pub fn coefficient_vector(&self) -> Vec<C64> {
        let zero = vec![C64::zero(); self.dim];
        all_multi_indices(self.dim, self.degree)
            .iter()
            .flat_map(|idx| self.coeffs.get(idx).unwrap_or(&zero).clone())
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn mu(&self) -> usize {
        mu(self.dim, self.degree)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Vec<C64>)> {
        self.coeffs.iter()
    }

    /// Highest order actually carrying a nonzero coefficient.
    pub fn effective_degree(&self) -> u32 {
        self.coeffs.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// Ascending coefficient list of length `degree + 1` (N = 1 only).
    pub fn univariate_coeffs(&self) -> Result<Vec<C64>> {
        if self.dim != 1 {
            return Err(Error::Unsupported(self.dim));
        }
        let mut out = vec![C64::zero(); self.degree as usize + 1];
        for (idx, v) in &self.coeffs {
            out[idx.0[0] as usize] = v[0];
        }
        Ok(out)
    }

    /// Apply `f` to every coefficient of the full table (absent entries see zero).
    pub fn map_coefficients<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, C64) -> C64,
    {
        let values: Vec<C64> = self
            .coefficient_vector()
            .into_iter()
            .enumerate()
            .map(|(i, z)| f(i, z))
            .collect();
        Self::from_coefficient_vector(self.dim, self.degree, self.field, &values)
    }

    /// The conjugate `y -> s P(y / s)` (linear change of coordinates `x = y / s`).
    pub fn conjugate_by_scale(&self, s: f64) -> Result<Self> {
        let terms = self.coeffs.iter().map(|(idx, v)| {
            let factor = s * s.powi(-(idx.order() as i32));
            (idx.0.clone(), v.iter().map(|z| z * factor).collect())
        });
        Self::new(self.dim, self.degree, self.field, terms)
    }

    fn check_point(&self, x: &[C64], strict_field: bool) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for (index, z) in x.iter().enumerate() {
            if !finite(*z) {
                return Err(Error::NonFiniteInput { index });
            }
            if strict_field && self.field == Field::Real && z.im != 0.0 {
                return Err(Error::ComplexPointOnRealMap { index });
            }
        }
        Ok(())
    }

    fn power_table(&self, x: &[C64]) -> Vec<Vec<C64>> {
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(self.degree as usize + 1);
                let mut acc = C64::one();
                row.push(acc);
                for _ in 0..self.degree {
                    acc *= xi;
                    row.push(acc);
                }
                row
            })
            .collect()
    }

    fn monomial(pows: &[Vec<C64>], alpha: &[u32], skip: Option<usize>) -> C64 {
        let mut m = C64::one();
        for (i, &e) in alpha.iter().enumerate() {
            let e = if Some(i) == skip { e - 1 } else { e };
            if e > 0 {
                m *= pows[i][e as usize];
            }
        }
        m
    }

    fn eval_unchecked(&self, x: &[C64]) -> Vec<C64> {
        let pows = self.power_table(x);
        let mut out = vec![C64::zero(); self.dim];
        for (idx, v) in &self.coeffs {
            let m = Self::monomial(&pows, &idx.0, None);
            for (o, c) in out.iter_mut().zip(v) {
                *o += c * m;
            }
        }
        out
    }

    fn jacobian_unchecked(&self, x: &[C64]) -> DMatrix<C64> {
        let pows = self.power_table(x);
        let n = self.dim;
        let mut jac = DMatrix::zeros(n, n);
        for (idx, v) in &self.coeffs {
            for j in 0..n {
                let e = idx.0[j];
                if e == 0 {
                    continue;
                }
                let d = Self::monomial(&pows, &idx.0, Some(j)) * e as f64;
                for i in 0..n {
                    jac[(i, j)] += v[i] * d;
                }
            }
        }
        jac
    }

    /// Exact polynomial evaluation. Real-field maps only accept real points;
    /// use [`PolyMap::evaluate_complexified`] to evaluate them over C.
    pub fn evaluate(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_point(x, true)?;
        self.finish_eval(self.eval_unchecked(x), 1)
    }

    /// Evaluation of the complexification (coefficients read over C).
    pub fn evaluate_complexified(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.check_point(x, false)?;
        self.finish_eval(self.eval_unchecked(x), 1)
    }

    pub fn evaluate_real(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z: Vec<C64> = x.iter().map(|&r| C64::new(r, 0.0)).collect();
        Ok(self
            .evaluate_complexified(&z)?
            .iter()
            .map(|z| z.re)
            .collect())
    }

    fn finish_eval(&self, y: Vec<C64>, step: usize) -> Result<Vec<C64>> {
        if y.iter().all(|z| finite(*z)) {
            Ok(y)
        } else {
            Err(Error::Overflow { step })
        }
    }

    /// Analytic Jacobian from the coefficient table.
    pub fn jacobian(&self, x: &[C64]) -> Result<Jacobian> {
        self.check_point(x, true)?;
        self.finish_jac(self.jacobian_unchecked(x), 1)
    }

    pub fn jacobian_complexified(&self, x: &[C64]) -> Result<Jacobian> {
        self.check_point(x, false)?;
        self.finish_jac(self.jacobian_unchecked(x), 1)
    }

    fn finish_jac(&self, m: DMatrix<C64>, step: usize) -> Result<Jacobian> {
        let j = Jacobian(m);
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::Overflow { step })
        }
    }

    /// `P^(k)(x)` and `d_x P^(k)` via the chain rule, Jacobians multiplied in orbit order.
    pub fn iterate(&self, x: &[C64], k: usize) -> Result<(Vec<C64>, Jacobian)> {
        self.check_point(x, true)?;
        self.iterate_unchecked(x, k)
    }

    pub fn iterate_complexified(&self, x: &[C64], k: usize) -> Result<(Vec<C64>, Jacobian)> {
        self.check_point(x, false)?;
        self.iterate_unchecked(x, k)
    }

    fn iterate_unchecked(&self, x: &[C64], k: usize) -> Result<(Vec<C64>, Jacobian)> {
        if k == 0 {
            return Err(Error::InvalidConfig("iterate requires k >= 1".into()));
        }
        let mut point = x.to_vec();
        let mut acc = DMatrix::identity(self.dim, self.dim);
        for step in 1..=k {
            let jac = self.jacobian_unchecked(&point);
            point = self.eval_unchecked(&point);
            acc = jac * acc;
            if !point.iter().all(|z| finite(*z)) || !acc.iter().all(|z| finite(*z)) {
                return Err(Error::Overflow { step });
            }
        }
        Ok((point, Jacobian(acc)))
    }

    /// Value and derivative of `P^(k)(z) - z` for N = 1, by orbit recurrence.
    pub(crate) fn displacement_1d(&self, z: C64, k: usize) -> Option<(C64, C64)> {
        let coeffs: Vec<C64> = (0..=self.degree as usize)
            .map(|i| {
                self.coeffs
                    .get(&MultiIndex(vec![i as u32]))
                    .map(|v| v[0])
                    .unwrap_or_default()
            })
            .collect();
        let mut w = z;
        let mut d = C64::one();
        for _ in 0..k {
            let mut p = C64::zero();
            let mut dp = C64::zero();
            for c in coeffs.iter().rev() {
                dp = dp * w + p;
                p = p * w + c;
            }
            w = p;
            d *= dp;
            if !finite(w) || !finite(d) {
                return None;
            }
        }
        Some((w - z, d - C64::one()))
    }

    /// Explicit univariate polynomial of the k-th iterate (degree `D^k`).
    pub fn compose_symbolic(&self, k: usize, cap: u128) -> Result<PolyMap> {
        let base = self.univariate_coeffs()?;
        let degree = iterate_degree(self.degree, k, cap)?;
        let mut acc = vec![C64::zero(), C64::one()];
        for _ in 0..k {
            acc = compose_dense(&base, &acc, |a, b| a * b, |a, b| a + b, C64::zero());
        }
        acc.resize(degree as usize + 1, C64::zero());
        if acc.iter().any(|z| !finite(*z)) {
            return Err(Error::Overflow { step: k });
        }
        let terms = acc
            .into_iter()
            .enumerate()
            .map(|(i, c)| (vec![i as u32], vec![c]));
        PolyMap::new(1, degree as u32, self.field, terms)
    }

    /// Exact rational expansion of the k-th iterate (real-field N = 1 maps).
    /// Each binary64 coefficient is converted exactly.
    pub fn compose_symbolic_exact(&self, k: usize, cap: u128) -> Result<Vec<BigRational>> {
        if self.field != Field::Real {
            return Err(Error::InvalidConfig(
                "exact composition needs a real-field map".into(),
            ));
        }
        let base: Vec<BigRational> = self
            .univariate_coeffs()?
            .iter()
            .map(|z| BigRational::from_float(z.re).expect("finite coefficient"))
            .collect();
        let degree = iterate_degree(self.degree, k, cap)?;
        let zero = BigRational::zero();
        let mut acc = vec![zero.clone(), BigRational::one()];
        for _ in 0..k {
            acc = compose_dense(&base, &acc, |a, b| a * b, |a, b| a + b, zero.clone());
        }
        acc.resize(degree as usize + 1, zero);
        Ok(acc)
    }

    pub fn to_file(&self) -> MapFile {
        MapFile {
            n: self.dim,
            degree: self.degree,
            field: self.field,
            coeffs: self
                .coeffs
                .iter()
                .map(|(idx, v)| CoeffEntry {
                    alpha: idx.0.clone(),
                    value: v.iter().map(|z| [z.re, z.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn from_file(file: MapFile) -> Result<Self> {
        Self::new(
            file.n,
            file.degree,
            file.field,
            file.coeffs.into_iter().map(|e| {
                (
                    e.alpha,
                    e.value
                        .into_iter()
                        .map(|[re, im]| C64::new(re, im))
                        .collect(),
                )
            }),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("map serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(serde_json::from_str(text)?)
    }

    /// SHA-256 of the canonical compact JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

/// `P(Q)` for dense ascending coefficient vectors, via Horner.
fn compose_dense<T, M, A>(p: &[T], q: &[T], mul: M, add: A, zero: T) -> Vec<T>
where
    T: Clone,
    M: Fn(&T, &T) -> T,
    A: Fn(&T, &T) -> T,
{
    let mut acc: Vec<T> = vec![p.last().cloned().unwrap_or_else(|| zero.clone())];
    for c in p.iter().rev().skip(1) {
        let mut next = vec![zero.clone(); acc.len() + q.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                next[i + j] = add(&next[i + j], &mul(a, b));
            }
        }
        next[0] = add(&next[0], c);
        acc = next;
    }
    acc
}

pub(crate) fn iterate_degree(degree: u32, k: usize, cap: u128) -> Result<u128> {
    if k == 0 {
        return Err(Error::InvalidConfig("period must be >= 1".into()));
    }
    let mut d: u128 = 1;
    for _ in 0..k {
        d = d.saturating_mul(degree as u128);
        if d > cap {
            return Err(Error::DegreeCap { degree: d, cap });
        }
    }
    Ok(d)
}

/// Exact rational from an integer.
pub fn rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub alpha: Vec<u32>,
    pub value: Vec<[f64; 2]>,
}

/// On-disk map format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub n: usize,
    pub degree: u32,
    pub field: Field,
    pub coeffs: Vec<CoeffEntry>,
}

impl Serialize for PolyMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = MapFile::deserialize(d)?;
        PolyMap::from_file(file).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn evaluate_examples() {
        let p = PolyMap::univariate_real(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.evaluate(&[c(2.0)]).unwrap(), vec![c(5.0)]);

        let zero = PolyMap::new(2, 3, Field::Real, Vec::new()).unwrap();
        assert_eq!(zero.evaluate(&[c(3.0), c(-1.0)]).unwrap(), vec![c(0.0); 2]);

        let sq = PolyMap::power_map(2, 2, Field::Complex).unwrap();
        assert_eq!(
            sq.evaluate(&[c(2.0), c(3.0)]).unwrap(),
            vec![c(4.0), c(9.0)]
        );
    }

    #[test]
    fn evaluate_errors() {
        let p = PolyMap::univariate_real(&[1.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            p.evaluate(&[c(1.0), c(2.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            p.evaluate(&[c(f64::NAN)]),
            Err(Error::NonFiniteInput { index: 0 })
        ));
        assert!(matches!(
            p.evaluate(&[C64::new(0.0, 1.0)]),
            Err(Error::ComplexPointOnRealMap { .. })
        ));
        assert!(p.evaluate_complexified(&[C64::new(0.0, 1.0)]).is_ok());
        let big = PolyMap::univariate_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            big.evaluate(&[c(1e200)]),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn jacobian_examples() {
        let p = PolyMap::univariate_real(&[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.jacobian(&[c(2.0)]).unwrap().entry(0, 0), c(4.0));
        let sq = PolyMap::power_map(2, 2, Field::Complex).unwrap();
        let j = sq.jacobian(&[c(1.0), c(1.0)]).unwrap();
        assert_eq!(j.0, DMatrix::from_diagonal_element(2, 2, c(2.0)));
    }

    #[test]
    fn iterate_examples() {
        let sq = PolyMap::univariate_real(&[0.0, 0.0, 1.0]).unwrap();
        let (x, j) = sq.iterate(&[c(1.0)], 3).unwrap();
        assert_eq!((x[0], j.entry(0, 0)), (c(1.0), c(8.0)));

        let p = PolyMap::univariate_real(&[1.0, 0.0, 1.0]).unwrap();
        let (x, j) = p.iterate(&[c(0.0)], 2).unwrap();
        assert_eq!((x[0], j.entry(0, 0)), (c(2.0), c(0.0)));

        let (x1, j1) = p.iterate(&[c(0.7)], 1).unwrap();
        assert_eq!(x1, p.evaluate(&[c(0.7)]).unwrap());
        assert_eq!(j1, p.jacobian(&[c(0.7)]).unwrap());
    }

    #[test]
    fn iterate_reports_overflow_step() {
        let sq = PolyMap::univariate_real(&[0.0, 0.0, 1.0]).unwrap();
        match sq.iterate(&[c(1e100)], 5) {
            Err(Error::Overflow { step }) => assert_eq!(step, 2),
            other => panic!("expected overflow, got {other:?}"),
        }
    }

    #[test]
    fn compose_examples() {
        let sq = PolyMap::univariate_real(&[0.0, 0.0, 1.0]).unwrap();
        let four = sq.compose_symbolic(2, DEFAULT_SYMBOLIC_CAP).unwrap();
        assert_eq!(
            four.univariate_coeffs().unwrap(),
            vec![c(0.0), c(0.0), c(0.0), c(0.0), c(1.0)]
        );

        let shift = PolyMap::univariate_real(&[1.0, 1.0]).unwrap();
        let five = shift.compose_symbolic(5, DEFAULT_SYMBOLIC_CAP).unwrap();
        assert_eq!(five.univariate_coeffs().unwrap(), vec![c(5.0), c(1.0)]);

        let p = PolyMap::univariate_real(&[1.0, 0.0, 1.0]).unwrap();
        let exact = p.compose_symbolic_exact(2, DEFAULT_SYMBOLIC_CAP).unwrap();
        let expect: Vec<BigRational> = [2, 0, 2, 0, 1].iter().map(|&n| rational(n)).collect();
        assert_eq!(exact, expect);
    }

    #[test]
    fn compose_refuses_beyond_cap_and_multivariate() {
        let sq = PolyMap::univariate_real(&[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(
            sq.compose_symbolic(9, DEFAULT_SYMBOLIC_CAP),
            Err(Error::DegreeCap { degree: 512, .. })
        ));
        let m = PolyMap::power_map(2, 2, Field::Real).unwrap();
        assert!(matches!(
            m.compose_symbolic(1, 256),
            Err(Error::Unsupported(2))
        ));
    }

    #[test]
    fn mu_counts_multi_indices() {
        for n in 1..4 {
            for d in 1..5 {
                assert_eq!(mu(n, d), all_multi_indices(n, d).len());
            }
        }
        assert_eq!(mu(2, 2), 6);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m = PolyMap::power_map(2, 3, Field::Complex).unwrap();
        let back = PolyMap::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.hash(), m.hash());

        let dup = r#"{"n":1,"degree":2,"field":"real","coeffs":[{"alpha":[1],"value":[[1,0]]},{"alpha":[1],"value":[[2,0]]}]}"#;
        assert!(PolyMap::from_json(dup).is_err());
        let too_high =
            r#"{"n":1,"degree":2,"field":"real","coeffs":[{"alpha":[3],"value":[[1,0]]}]}"#;
        assert!(PolyMap::from_json(too_high).is_err());
        let complex_in_real =
            r#"{"n":1,"degree":2,"field":"real","coeffs":[{"alpha":[2],"value":[[1,1]]}]}"#;
        assert!(PolyMap::from_json(complex_in_real).is_err());
    }

    #[test]
    fn graded_order_is_canonical() {
        let idx = all_multi_indices(2, 2);
        let orders: Vec<u32> = idx.iter().map(MultiIndex::order).collect();
        assert_eq!(orders, vec![0, 1, 1, 2, 2, 2]);
        assert_eq!(idx[1].exponents(), &[1, 0]);
    }
}
