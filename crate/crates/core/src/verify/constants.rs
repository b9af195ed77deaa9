//! Closed-form constants of the inequalities under test.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::unit_ball_volume as omega;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantName {
    /// `b_{n,k}`
    B,
    /// `b_{n,1}`, the constant of the hyperplane case.
    B1,
    /// `c_{n,k}`
    C,
    /// `φ_{n,k,r}`
    Phi,
    /// `ϱ_{n,k}`
    Varrho,
    /// `h(n/k)`
    H,
}

impl ConstantName {
    pub const ALL: [ConstantName; 6] =
        [ConstantName::B, ConstantName::B1, ConstantName::C, ConstantName::Phi, ConstantName::Varrho, ConstantName::H];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstantName::B => "b",
            ConstantName::B1 => "b1",
            ConstantName::C => "c",
            ConstantName::Phi => "phi",
            ConstantName::Varrho => "varrho",
            ConstantName::H => "h",
        }
    }
}

impl fmt::Display for ConstantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstantName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "b" => ConstantName::B,
            "b1" | "b_n1" => ConstantName::B1,
            "c" => ConstantName::C,
            "phi" | "φ" => ConstantName::Phi,
            "varrho" | "rho" | "ϱ" => ConstantName::Varrho,
            "h" => ConstantName::H,
            other => return Err(Error::invalid(format!("unknown constant {other:?} (expected b, b1, c, phi, varrho or h)"))),
        })
    }
}

fn need(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid(what.to_string()))
    }
}

/// `h(t) = √t · (log(et))^{3/2}` for `t ≥ 1`.
pub fn h(t: f64) -> f64 {
    t.sqrt() * (1.0 + t.ln()).powf(1.5)
}

/// `b_{n,k}^k = ω_{n−1} / (ω_{n−k−1} ω_n^{k/n})`.
pub fn b_power(n: usize, k: usize) -> f64 {
    omega(n - 1) / (omega(n - k - 1) * omega(n).powf(k as f64 / n as f64))
}

/// `c_{n,k}^k = n ω_n^{(n−k)/n} / ((n−k) ω_{n−k})`.
pub fn c_power(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    nf * omega(n).powf((nf - kf) / nf) / ((nf - kf) * omega(n - k))
}

/// `φ_{n,k,r}^k = ω_{n−r} / (ω_{n−k−r} ω_n^{k/n})`.
pub fn phi_power(n: usize, k: usize, r: usize) -> f64 {
    omega(n - r) / (omega(n - k - r) * omega(n).powf(k as f64 / n as f64))
}

/// `ϱ_{n,k} = ω_{n−k−1} ω_{n−1}^{−(n−k−1)/(n−1)}`.
pub fn varrho(n: usize, k: usize) -> f64 {
    omega(n - k - 1) * omega(n - 1).powf(-((n - k - 1) as f64) / (n - 1) as f64)
}

/// `ω_{n−1}^{k+1} / (ω_n^k ω_{n−k−1})`, the constant of the Hölder bound
/// between `as(K)` and the Grassmannian mean of `as(K∩E)`.
pub fn holder_constant(n: usize, k: usize) -> f64 {
    omega(n - 1).powi(k as i32 + 1) / (omega(n).powi(k as i32) * omega(n - k - 1))
}

/// Evaluates a named constant. `r` is only read by `phi`.
pub fn paper_constant(name: ConstantName, n: usize, k: usize, r: usize) -> Result<f64> {
    match name {
        ConstantName::B => {
            need(n >= 3 && k >= 1 && k + 2 <= n, "b_{n,k} needs 1 ≤ k ≤ n − 2")?;
            Ok(b_power(n, k).powf(1.0 / k as f64))
        }
        ConstantName::B1 => {
            need(n >= 3, "b_{n,1} needs n ≥ 3")?;
            Ok(b_power(n, 1))
        }
        ConstantName::C => {
            need(k >= 1 && k < n, "c_{n,k} needs 1 ≤ k ≤ n − 1")?;
            Ok(c_power(n, k).powf(1.0 / k as f64))
        }
        ConstantName::Phi => {
            need(k >= 1 && r >= 1 && k + r < n, "φ_{n,k,r} needs k, r ≥ 1 and k + r < n")?;
            Ok(phi_power(n, k, r).powf(1.0 / k as f64))
        }
        ConstantName::Varrho => {
            need(n >= 3 && k >= 1 && k + 2 <= n, "ϱ_{n,k} needs 1 ≤ k ≤ n − 2")?;
            Ok(varrho(n, k))
        }
        ConstantName::H => {
            need(k >= 1 && k <= n, "h(n/k) needs 1 ≤ k ≤ n")?;
            Ok(h(n as f64 / k as f64))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn b_three_one() {
        let b = paper_constant(ConstantName::B, 3, 1, 0).unwrap();
        assert_relative_eq!(b, PI / (2.0 * (4.0 * PI / 3.0).powf(1.0 / 3.0)), max_relative = 1e-14);
        assert!((b - 0.9744).abs() < 5e-5);
        assert_eq!(paper_constant(ConstantName::B1, 3, 9, 0).unwrap(), b);
    }

    #[test]
    fn h_at_one() {
        assert_eq!(paper_constant(ConstantName::H, 4, 4, 0).unwrap(), 1.0);
    }

    #[test]
    fn b_stays_near_one() {
        for n in 3..=50 {
            for k in 1..=n - 2 {
                let b = paper_constant(ConstantName::B, n, k, 0).unwrap();
                assert!((0.5..=2.0).contains(&b), "b_{{{n},{k}}} = {b}");
            }
        }
    }

    #[test]
    fn phi_with_r_one_is_b() {
        for n in 4..=9 {
            for k in 1..n - 2 {
                assert_relative_eq!(
                    paper_constant(ConstantName::Phi, n, k, 1).unwrap(),
                    paper_constant(ConstantName::B, n, k, 0).unwrap(),
                    max_relative = 1e-14
                );
            }
        }
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(paper_constant(ConstantName::B, 3, 2, 0).is_err());
        assert!(paper_constant(ConstantName::C, 3, 3, 0).is_err());
        assert!(paper_constant(ConstantName::Phi, 5, 2, 3).is_err());
        assert!(paper_constant(ConstantName::H, 3, 0, 0).is_err());
        assert!("zeta".parse::<ConstantName>().is_err());
    }
}
