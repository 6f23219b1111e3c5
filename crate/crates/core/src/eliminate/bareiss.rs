//! Fraction-free determinant over a polynomial ring.

use super::sparse::SparsePoly;
use crate::error::Result;

/// Bareiss elimination with row swaps; every division is exact.
pub fn determinant(mut m: Vec<Vec<SparsePoly>>, vars: &[String]) -> Result<SparsePoly> {
    let n = m.len();
    if n == 0 {
        return Ok(SparsePoly::constant(vars, 1));
    }
    let mut negate = false;
    let mut prev = SparsePoly::constant(vars, 1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(SparsePoly::zero(vars)),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev)?;
            }
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if negate { -&det } else { det })
}
