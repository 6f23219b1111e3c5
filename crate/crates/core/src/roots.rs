//! Univariate root finding: companion-matrix eigenvalues and simultaneous
//! (Aberth-Ehrlich) refinement.

use nalgebra::DMatrix;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::polymap::C64;

/// Strip trailing (highest-degree) zero coefficients.
pub fn trim(coeffs: &[C64]) -> &[C64] {
    let mut end = coeffs.len();
    while end > 0 && coeffs[end - 1].is_zero() {
        end -= 1;
    }
    &coeffs[..end]
}

/// All complex roots of `sum c_i x^i` as eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let c = trim(coeffs);
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = m.try_schur(f64::EPSILON, 10_000).ok_or(Error::Eigen)?;
    let ev = schur.eigenvalues().ok_or(Error::Eigen)?;
    Ok(ev.iter().copied().collect())
}

/// Horner evaluation of a polynomial and its derivative.
pub fn horner(coeffs: &[C64], x: C64) -> (C64, C64) {
    let mut p = C64::zero();
    let mut dp = C64::zero();
    for c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Aberth-Ehrlich iteration. `eval` returns `(f(z), f'(z))`, or `None` when
/// evaluation overflows (the iterate is then pulled back toward the origin).
/// Approximations leaving the disk of radius `radius` (which must contain
/// every root) are projected back onto its boundary.
/// Returns the refined approximations and whether every correction fell
/// below `tol` (relative) before `max_iter`.
pub fn aberth<F>(
    eval: F,
    mut z: Vec<C64>,
    radius: f64,
    max_iter: usize,
    tol: f64,
) -> (Vec<C64>, bool)
where
    F: Fn(C64) -> Option<(C64, C64)>,
{
    let n = z.len();
    // coincident starting values never separate under Aberth: spread them
    for i in 0..n {
        for j in 0..i {
            if (z[i] - z[j]).norm() <= 1e-12 * z[i].norm().max(1.0) {
                let theta = std::f64::consts::TAU * (i as f64 * 0.618_033_988_749);
                let bump = C64::from_polar(1e-6 * z[i].norm().max(1.0), theta);
                z[i] += bump;
            }
        }
    }
    let mut frozen = vec![false; n];
    for _ in 0..max_iter {
        let mut all_small = true;
        for i in 0..n {
            if frozen[i] {
                continue;
            }
            let zi = z[i];
            let Some((f, df)) = eval(zi) else {
                z[i] = zi * 0.5;
                all_small = false;
                continue;
            };
            if f.is_zero() {
                frozen[i] = true;
                continue;
            }
            let ratio = f / df;
            if !(ratio.re.is_finite() && ratio.im.is_finite()) {
                // critical point of f: nudge off it
                z[i] = zi + C64::new(1e-7, 1e-7) * zi.norm().max(1.0);
                all_small = false;
                continue;
            }
            let mut repulsion = C64::zero();
            for (j, zj) in z.iter().enumerate() {
                if j != i {
                    let d = zi - zj;
                    if !d.is_zero() {
                        repulsion += d.inv();
                    }
                }
            }
            let denom = C64::new(1.0, 0.0) - ratio * repulsion;
            let mut step = if denom.is_zero() {
                ratio
            } else {
                ratio / denom
            };
            if !(step.re.is_finite() && step.im.is_finite()) {
                step = ratio;
            }
            let mut next = zi - step;
            if next.norm() > radius {
                next = C64::from_polar(radius, next.arg() + 0.1);
            }
            z[i] = next;
            if step.norm() <= tol * zi.norm().max(1.0) {
                frozen[i] = true;
            } else {
                all_small = false;
            }
        }
        if all_small {
            return (z, true);
        }
    }
    (z, false)
}

/// Initial guesses on a circle, rotated off the real axis to break symmetry.
pub fn circle_guesses(n: usize, radius: f64) -> Vec<C64> {
    (0..n)
        .map(|i| {
            let theta = std::f64::consts::TAU * (i as f64 + 0.25) / n as f64 + 0.4;
            C64::from_polar(radius, theta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sorted(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| {
            a.re.partial_cmp(&b.re)
                .unwrap()
                .then(a.im.partial_cmp(&b.im).unwrap())
        });
        v
    }

    #[test]
    fn companion_quadratic() {
        // x^2 - 3x + 2
        let r = sorted(companion_roots(&[c(2.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)]).unwrap());
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn companion_handles_trailing_zeros_and_constants() {
        assert!(companion_roots(&[c(3.0, 0.0), c(0.0, 0.0)])
            .unwrap()
            .is_empty());
        let r = companion_roots(&[c(-4.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn aberth_cube_roots() {
        let coeffs = [c(-1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let (z, ok) = aberth(
            |x| Some(horner(&coeffs, x)),
            circle_guesses(3, 2.0),
            2.0,
            200,
            1e-14,
        );
        assert!(ok);
        for r in z {
            assert!((r.powu(3) - c(1.0, 0.0)).norm() < 1e-12);
        }
    }
}
