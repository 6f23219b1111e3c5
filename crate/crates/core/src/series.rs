//! Truncated formal power series over f64.

/// `exp(sum_{n>=1} counts[n-1] z^n / n)` through order `counts.len()`,
/// by the recurrence `n c_n = sum_{j=1}^{n} P_j c_{n-j}`.
pub fn zeta_exp(counts: &[f64]) -> Vec<f64> {
    let m = counts.len();
    let mut c = vec![0.0; m + 1];
    c[0] = 1.0;
    for n in 1..=m {
        let s: f64 = (1..=n).map(|j| counts[j - 1] * c[n - j]).sum();
        c[n] = s / n as f64;
    }
    c
}

/// Formal derivative.
pub fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, v)| i as f64 * v)
        .collect()
}

/// `num / den` truncated to `num.len()` terms; `den[0]` must be nonzero.
pub fn divide(num: &[f64], den: &[f64]) -> Vec<f64> {
    let mut q = vec![0.0; num.len()];
    for m in 0..num.len() {
        let s: f64 = (1..=m.min(den.len() - 1)).map(|j| den[j] * q[m - j]).sum();
        q[m] = (num[m] - s) / den[0];
    }
    q
}

/// Serde helper: f64 that may be infinite, written as `"inf"` in JSON.
pub mod extended_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad number {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_log_geometric() {
        // exp(sum (2z)^n / n) = 1 / (1 - 2z)
        let counts: Vec<f64> = (1..=10).map(|n| 2f64.powi(n)).collect();
        let c = zeta_exp(&counts);
        for (n, v) in c.iter().enumerate() {
            assert_eq!(*v, 2f64.powi(n as i32));
        }
    }

    #[test]
    fn log_derivative_recovers_counts() {
        let counts = [3.0, 5.0, 9.0, 17.0, 33.0];
        let c = zeta_exp(&counts);
        let q = divide(&derivative(&c), &c);
        for (a, b) in q.iter().zip(counts.iter()) {
            assert!((a - b).abs() <= 1e-12 * b);
        }
    }
}
