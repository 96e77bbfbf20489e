//! Scalar decay-rule families shared by weight systems and the decay-class
//! machinery. All rules are positive on [1, inf) and, except for `Unit`,
//! eventually decreasing to zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum DecayRule {
    /// t^-r
    Power { r: f64 },
    /// t^-r * ln^eps(t + a)
    PowerLog { r: f64, eps: f64, a: f64 },
    /// ln^-r(t + a)
    Log { r: f64, a: f64 },
    /// exp(-lambda (t + a)^s); a defaults to 0
    Exp {
        lambda: f64,
        s: f64,
        #[serde(default)]
        a: f64,
    },
    /// constant 1
    Unit,
}

impl DecayRule {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            DecayRule::Power { r } => {
                if !(r > 0.0 && r.is_finite()) {
                    return bad(format!("power rule needs r > 0, got {r}"));
                }
            }
            DecayRule::PowerLog { r, eps, a } => {
                if !(r > 0.0 && r.is_finite()) || !eps.is_finite() || !(a > 0.0) {
                    return bad(format!("power-log rule needs r > 0, a > 0, got r={r} eps={eps} a={a}"));
                }
            }
            DecayRule::Log { r, a } => {
                if !(r > 0.0 && r.is_finite()) || !(a > 0.0) {
                    return bad(format!("log rule needs r > 0 and a > 0, got r={r} a={a}"));
                }
            }
            DecayRule::Exp { lambda, s, a } => {
                if !(lambda > 0.0) || !(s > 0.0) || !(a >= 0.0) {
                    return bad(format!("exp rule needs lambda > 0, s > 0, a >= 0, got lambda={lambda} s={s} a={a}"));
                }
            }
            DecayRule::Unit => {}
        }
        Ok(())
    }

    /// Rule value at real t >= 1.
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            DecayRule::Power { r } => t.powf(-r),
            DecayRule::PowerLog { r, eps, a } => t.powf(-r) * (t + a).ln().powf(eps),
            DecayRule::Log { r, a } => (t + a).ln().powf(-r),
            DecayRule::Exp { lambda, s, a } => (-lambda * (t + a).powf(s)).exp(),
            DecayRule::Unit => 1.0,
        }
    }

    /// Analytic derivative at t >= 1 (zero for the unit rule).
    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            DecayRule::Power { r } => -r * t.powf(-r - 1.0),
            DecayRule::PowerLog { r, eps, a } => {
                let l = (t + a).ln();
                -r * t.powf(-r - 1.0) * l.powf(eps) + t.powf(-r) * eps * l.powf(eps - 1.0) / (t + a)
            }
            DecayRule::Log { r, a } => {
                let l = (t + a).ln();
                -r * l.powf(-r - 1.0) / (t + a)
            }
            DecayRule::Exp { lambda, s, a } => {
                -lambda * s * (t + a).powf(s - 1.0) * self.value(t)
            }
            DecayRule::Unit => 0.0,
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, DecayRule::Unit)
    }

    /// Whether the rule is non-increasing on all of [1, inf).
    /// Power-log rules with eps > 0 may grow near 1 before their power
    /// factor wins; everything else is monotone by inspection.
    pub fn monotone_from(&self) -> f64 {
        match *self {
            DecayRule::PowerLog { r, eps, a } => {
                if eps <= 0.0 {
                    1.0
                } else {
                    // derivative sign flips where r ln(t+a) = eps t/(t+a)
                    let mut t = 1.0f64;
                    while self.derivative(t) > 0.0 && t < 1e12 {
                        t *= 2.0;
                    }
                    let _ = (r, a);
                    t
                }
            }
            _ => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_matches_finite_difference() {
        let rules = [
            DecayRule::Power { r: 1.5 },
            DecayRule::PowerLog { r: 2.0, eps: 1.0, a: 1.0 },
            DecayRule::Log { r: 1.0, a: 1.0 },
            DecayRule::Exp { lambda: 0.5, s: 0.7, a: 0.0 },
            DecayRule::Exp { lambda: 1.0, s: 2.0, a: 3.0 },
        ];
        for rule in rules {
            for t in [1.0, 2.5, 10.0, 123.0] {
                let h = 1e-6 * t;
                let fd = (rule.value(t + h) - rule.value(t - h)) / (2.0 * h);
                let an = rule.derivative(t);
                assert!(
                    (fd - an).abs() <= 1e-5 * an.abs().max(1e-12),
                    "{rule:?} t={t}: fd={fd} an={an}"
                );
            }
        }
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(DecayRule::Power { r: 0.0 }.validate().is_err());
        assert!(DecayRule::Log { r: 1.0, a: 0.0 }.validate().is_err());
        assert!(DecayRule::Exp { lambda: -1.0, s: 1.0, a: 0.0 }.validate().is_err());
        assert!(DecayRule::Power { r: 2.0 }.validate().is_ok());
    }
}
