//! Problem parameters and exponent-regime classification.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Critical Sobolev exponent 2*_s = 6/(3 - 2s) in three dimensions.
pub fn critical_exponent(s: f64) -> f64 {
    6.0 / (3.0 - 2.0 * s)
}

/// theta_{s,alpha} = 3(alpha - 2) / (2 s alpha), the dilation-interpolation
/// exponent; lies in (0, 1) for alpha in (2, 2*_s).
pub fn theta(s: f64, alpha: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::invalid("s", format!("must lie in (0, 1), got {s}")));
    }
    let crit = critical_exponent(s);
    if !(alpha > 2.0 && alpha < crit) {
        return Err(Error::invalid(
            "alpha",
            format!("must lie in (2, {crit:.6}) for s = {s}, got {alpha}"),
        ));
    }
    Ok(3.0 * (alpha - 2.0) / (2.0 * s * alpha))
}

/// Exponent regime of the problem.
///
/// The L^2-critical exponent is 2 + 8s/3: `Mixed` has q below even 2 + 4s/3
/// and p above critical, `Supercritical` has both above critical. A nonempty
/// mixed or supercritical window requires s > 3/4 (otherwise 2 + 8s/3 already
/// exceeds 2*_s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Mixed,
    Supercritical,
    Unsupported,
}

/// (a, b, c, s, p, q, mu) with the admissibility contract
/// a, b, c > 0, s in (0, 1), 2 < q < p < 2*_s, mu >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s: f64,
    pub q: f64,
    pub p: f64,
    pub mu: f64,
}

impl ProblemParams {
    pub fn new(a: f64, b: f64, c: f64, s: f64, q: f64, p: f64, mu: f64) -> Result<Self> {
        let params = ProblemParams { a, b, c, s, q, p, mu };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(
                    match name {
                        "a" => "a",
                        "b" => "b",
                        _ => "c",
                    },
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::invalid("s", format!("must lie in (0, 1), got {}", self.s)));
        }
        let crit = critical_exponent(self.s);
        if !(2.0 < self.q && self.q < self.p && self.p < crit) {
            return Err(Error::invalid(
                "q,p",
                format!(
                    "exponents must satisfy 2 < q < p < 2*_s = {crit:.6}; got q = {}, p = {}",
                    self.q, self.p
                ),
            ));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(Error::invalid("mu", format!("must be finite and >= 0, got {}", self.mu)));
        }
        Ok(())
    }

    pub fn theta_q(&self) -> f64 {
        3.0 * (self.q - 2.0) / (2.0 * self.s * self.q)
    }

    pub fn theta_p(&self) -> f64 {
        3.0 * (self.p - 2.0) / (2.0 * self.s * self.p)
    }

    /// Regime classification; `Mixed` needs q < 2 + 4s/3 and p > 2 + 8s/3,
    /// `Supercritical` needs q > 2 + 8s/3.
    pub fn regime(&self) -> Regime {
        let low = 2.0 + 4.0 * self.s / 3.0;
        let l2_crit = 2.0 + 8.0 * self.s / 3.0;
        if self.q < low && self.p > l2_crit {
            debug_assert!(self.s > 0.75, "mixed window is empty for s <= 3/4");
            Regime::Mixed
        } else if self.q > l2_crit {
            Regime::Supercritical
        } else {
            Regime::Unsupported
        }
    }

    pub fn with_mu(&self, mu: f64) -> ProblemParams {
        ProblemParams { mu, ..*self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_printed_formula() {
        // s = 0.9, q = 3: 3*1/(2*0.9*3) = 0.5556 to 4 d.p.
        let t = theta(0.9, 3.0).unwrap();
        assert!((t - 0.5556).abs() < 5e-5);
        // p * theta_{s,p} = 3(p-2)/(2s) = 4.5 > 4 for p = 4.7, s = 0.9
        let tp = theta(0.9, 4.7).unwrap();
        assert!((4.7 * tp - 4.5).abs() < 1e-12);
    }

    #[test]
    fn theta_limit_alpha_to_two() {
        let mut prev = f64::INFINITY;
        for alpha in [2.1, 2.01, 2.001, 2.0001] {
            let t = theta(0.9, alpha).unwrap();
            assert!(t < prev && t > 0.0);
            prev = t;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn theta_rejects_out_of_range() {
        assert!(theta(0.9, 2.0).is_err());
        assert!(theta(0.9, 5.1).is_err()); // 2*_s = 5 at s = 0.9
        assert!(theta(1.0, 3.0).is_err());
    }

    #[test]
    fn regime_classification() {
        let mixed = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, 0.1).unwrap();
        assert_eq!(mixed.regime(), Regime::Mixed);
        let sup = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 4.5, 4.8, 1.0).unwrap();
        assert_eq!(sup.regime(), Regime::Supercritical);
        // q between 2 + 4s/3 and 2 + 8s/3 is neither
        let unsupported = ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.5, 4.7, 0.1).unwrap();
        assert_eq!(unsupported.regime(), Regime::Unsupported);
    }

    #[test]
    fn validation_rejects_bad_exponents() {
        assert!(ProblemParams::new(1.0, 1.0, 1.0, 0.9, 4.7, 4.7, 0.1).is_err());
        assert!(ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 5.2, 0.1).is_err());
        assert!(ProblemParams::new(0.0, 1.0, 1.0, 0.9, 3.0, 4.7, 0.1).is_err());
        assert!(ProblemParams::new(1.0, 1.0, 1.0, 0.9, 3.0, 4.7, -0.5).is_err());
    }
}
