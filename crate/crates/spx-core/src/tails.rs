//! Certified summation of infinite rearranged-modulus series
//! sum_{rank > skip} (rearranged psi)^beta.
//!
//! Finite tables are summed exactly. For rule systems the stream of levels
//! is cut once a family-specific remainder is available: an exact zeta-form
//! remainder for power families, a monotone integral bound for exp
//! families. Log-family tails diverge and are reported as such, as is any
//! shape without a derivable bound.

use crate::error::{Error, Result};
use crate::index::NormExponent;
use crate::kahan::Kahan;
use crate::psi::{PsiSystem, SystemKind};
use crate::rules::DecayRule;
use crate::special::upper_gamma;
use crate::zeta::{hurwitz_zeta, zeta_tail};

/// Relative tolerance the tail sums are certified to.
pub const TAIL_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
enum ShellKind {
    L1,
    Linf,
}

#[derive(Clone, Debug)]
enum TailFamily {
    FiniteTable,
    ScalarPower { r: f64 },
    ScalarExp { lambda: f64, s: f64, a: f64 },
    RadialPower { r: f64, d: usize, shell: ShellKind },
    RadialExp { lambda: f64, s: f64, a: f64, d: usize, shell: ShellKind },
    CrossPower { r: f64, d: usize },
    ProductExpStep { lambda: f64, a: f64, d: usize },
    Divergent(String),
    Uncertified(String),
}

fn classify(psi: &PsiSystem) -> TailFamily {
    match psi.kind() {
        SystemKind::Table(_) => TailFamily::FiniteTable,
        SystemKind::ScalarRule(rule) => match rule {
            DecayRule::Power { r } => TailFamily::ScalarPower { r: *r },
            DecayRule::Exp { lambda, s, a } => TailFamily::ScalarExp { lambda: *lambda, s: *s, a: *a },
            DecayRule::Log { .. } => {
                TailFamily::Divergent("log-family tails diverge for every exponent".into())
            }
            DecayRule::PowerLog { .. } => {
                TailFamily::Uncertified("no certified remainder for power-log rules".into())
            }
            DecayRule::Unit => TailFamily::Divergent("unit system has no decaying tail".into()),
        },
        SystemKind::Radial { rule, r, d } => {
            let shell = match r {
                NormExponent::Infinity => ShellKind::Linf,
                NormExponent::Finite(x) if *x == 1.0 => ShellKind::L1,
                NormExponent::Finite(_) => {
                    return TailFamily::Uncertified(
                        "certified radial tails need the l1 or sup norm".into(),
                    )
                }
            };
            match rule {
                DecayRule::Power { r } => TailFamily::RadialPower { r: *r, d: *d, shell },
                DecayRule::Exp { lambda, s, a } => TailFamily::RadialExp {
                    lambda: *lambda,
                    s: *s,
                    a: *a,
                    d: *d,
                    shell,
                },
                DecayRule::Log { .. } => {
                    TailFamily::Divergent("log-family lattice tails diverge".into())
                }
                DecayRule::PowerLog { .. } => {
                    TailFamily::Uncertified("no certified remainder for power-log rules".into())
                }
                DecayRule::Unit => TailFamily::Divergent("unit system has no decaying tail".into()),
            }
        }
        SystemKind::Product(rules) => {
            let first = &rules[0];
            match first {
                DecayRule::Power { r } => {
                    if rules.iter().all(|x| x == first) {
                        TailFamily::CrossPower { r: *r, d: rules.len() }
                    } else {
                        TailFamily::Uncertified(
                            "certified product tails need equal power rules on all axes".into(),
                        )
                    }
                }
                DecayRule::Exp { lambda, s, a } if *s == 1.0 => {
                    if rules.iter().all(|x| x == first) {
                        TailFamily::ProductExpStep { lambda: *lambda, a: *a, d: rules.len() }
                    } else {
                        TailFamily::Uncertified(
                            "certified product tails need equal exp rules on all axes".into(),
                        )
                    }
                }
                DecayRule::Log { .. } => {
                    TailFamily::Divergent("log-family lattice tails diverge".into())
                }
                DecayRule::Unit => TailFamily::Divergent("unit system has no decaying tail".into()),
                _ => TailFamily::Uncertified("no certified remainder for this product shape".into()),
            }
        }
    }
}

/// Number of lattice points with |k|_1 <= m (closed form).
pub fn l1_ball_count(d: usize, m: u64) -> f64 {
    let mut total = 0.0;
    for i in 0..=d.min(m as usize) {
        total += 2f64.powi(i as i32)
            * crate::special::binomial_u64(d as u64, i as u64)
            * crate::special::binomial_u64(m, i as u64);
    }
    total
}

/// Coefficients of the shell-count polynomial c_m = V_m - V_{m-1} in m.
fn shell_poly(d: usize, shell: &ShellKind) -> Vec<f64> {
    match shell {
        ShellKind::Linf => {
            // (2m+1)^d - (2m-1)^d = sum_{i: d-i odd} 2 C(d,i) 2^i m^i
            let mut coef = vec![0.0; d];
            for i in 0..d {
                if (d - i) % 2 == 1 {
                    coef[i] = 2.0 * crate::special::binomial_u64(d as u64, i as u64)
                        * 2f64.powi(i as i32);
                }
            }
            coef
        }
        ShellKind::L1 => {
            // sum_{i>=1} 2^i C(d,i) C(m-1, i-1); C(m-1,i-1) expanded in m
            let mut coef = vec![0.0; d];
            for i in 1..=d {
                // poly(m) = prod_{t=1}^{i-1} (m - t) / (i-1)!
                let mut poly = vec![1.0f64];
                for t in 1..i {
                    // multiply by (m - t)
                    let mut next = vec![0.0; poly.len() + 1];
                    for (j, &c) in poly.iter().enumerate() {
                        next[j + 1] += c;
                        next[j] -= c * t as f64;
                    }
                    poly = next;
                }
                let fact: f64 = (1..i).map(|x| x as f64).product::<f64>().max(1.0);
                let scale = 2f64.powi(i as i32) * crate::special::binomial_u64(d as u64, i as u64) / fact;
                for (j, &c) in poly.iter().enumerate() {
                    coef[j] += scale * c;
                }
            }
            coef
        }
    }
}

/// Exact sum_{m > M} c_m m^(-c) with c_m the shell polynomial.
fn radial_power_remainder(d: usize, shell: &ShellKind, c: f64, m: u64) -> f64 {
    let coef = shell_poly(d, shell);
    let mut total = 0.0;
    for (j, &a) in coef.iter().enumerate() {
        if a != 0.0 {
            total += a * zeta_tail(c - j as f64, m);
        }
    }
    total
}

/// sum_{product > N} over Z^d of w-weighted products^(-s), hyperbola method.
fn cross_tail_sum(d: usize, s: f64, n: u64) -> f64 {
    use std::collections::HashMap;
    let full_1 = 2.0 * hurwitz_zeta(s, 1.0) + 1.0;
    fn t1(s: f64, n: u64, full_1: f64) -> f64 {
        if n == 0 {
            full_1
        } else {
            2.0 * zeta_tail(s, n)
        }
    }
    fn rec(k: usize, n: u64, s: f64, full_1: f64, memo: &mut HashMap<(usize, u64), f64>) -> f64 {
        if n == 0 {
            return full_1.powi(k as i32);
        }
        if k == 1 {
            return t1(s, n, full_1);
        }
        if let Some(&v) = memo.get(&(k, n)) {
            return v;
        }
        let mut acc = Kahan::new();
        for a in 1..=n {
            let w = if a == 1 { 3.0 } else { 2.0 };
            acc.add(w * (a as f64).powf(-s) * rec(k - 1, n / a, s, full_1, memo));
        }
        acc.add(full_1.powi((k - 1) as i32) * t1(s, n, full_1));
        let v = acc.value();
        memo.insert((k, n), v);
        v
    }
    let mut memo = HashMap::new();
    rec(d, n, s, full_1, &mut memo)
}

enum Remainder {
    Exact(f64),
    Bound(f64),
    NotYet,
}

/// After the stream has emitted level `level` (1-based), what is known about
/// the rest of the series sum of value^beta?
fn remainder_after(family: &TailFamily, level: u64, beta: f64) -> Result<Remainder> {
    match family {
        TailFamily::FiniteTable => Ok(Remainder::NotYet),
        TailFamily::ScalarPower { r } => {
            let c = r * beta;
            if c <= 1.0 {
                return Err(Error::DivergentTail(format!(
                    "scalar power tail needs r*beta > 1, got {c}"
                )));
            }
            Ok(Remainder::Exact(zeta_tail(c, level)))
        }
        TailFamily::RadialPower { r, d, shell } => {
            let c = r * beta;
            if c <= *d as f64 {
                return Err(Error::DivergentTail(format!(
                    "radial power tail needs r*beta > d, got {c} with d={d}"
                )));
            }
            Ok(Remainder::Exact(radial_power_remainder(*d, shell, c, level)))
        }
        TailFamily::CrossPower { r, d } => {
            let s = r * beta;
            if s <= 1.0 {
                return Err(Error::DivergentTail(format!(
                    "hyperbolic-cross power tail needs r*beta > 1, got {s}"
                )));
            }
            Ok(Remainder::Exact(cross_tail_sum(*d, s, level)))
        }
        TailFamily::ScalarExp { lambda, s, a } => {
            let c = lambda * beta;
            let k = level as f64;
            // sum_{k' > K} e^{-c (k'+a)^s} <= int_K^inf e^{-c (x+a)^s} dx
            let bound = upper_gamma(1.0 / s, c * (k + a).powf(*s)) / (s * c.powf(1.0 / s));
            Ok(Remainder::Bound(bound))
        }
        TailFamily::RadialExp { lambda, s, a, d, shell } => {
            let c = lambda * beta;
            let m = level as f64;
            // need x^{d-1} e^{-c(x+a)^s} decreasing past m
            if (*d as f64 - 1.0) > c * s * m * (m + a).powf(s - 1.0) {
                return Ok(Remainder::NotYet);
            }
            let amax = match shell {
                ShellKind::Linf => 2.0 * *d as f64 * 3f64.powi(*d as i32 - 1),
                ShellKind::L1 => 3f64.powi(*d as i32),
            };
            let bound = amax * upper_gamma(*d as f64 / s, c * (m + a).powf(*s))
                / (s * c.powf(*d as f64 / s));
            Ok(Remainder::Bound(bound))
        }
        TailFamily::ProductExpStep { lambda, a, d } => {
            // level ell covers products-of-steps L = d + ell - 1
            let big_l = *d as u64 + level - 1;
            let c = lambda * beta;
            let q = (-c).exp();
            // majorant: sum_{L > big_l} 3^d (L+1)^d q^L e^{-c d a}
            let pre = 3f64.powi(*d as i32) * (-c * *d as f64 * a).exp();
            let mut term_l = big_l + 1;
            let mut acc = Kahan::new();
            let mut iters = 0;
            loop {
                let t = pre * ((term_l + 1) as f64).powi(*d as i32) * q.powf(term_l as f64);
                acc.add(t);
                term_l += 1;
                iters += 1;
                if t < 1e-18 * acc.value().max(1e-300) || iters > 200_000 {
                    break;
                }
            }
            if iters > 200_000 {
                return Ok(Remainder::NotYet);
            }
            Ok(Remainder::Bound(acc.value()))
        }
        TailFamily::Divergent(msg) => Err(Error::DivergentTail(msg.clone())),
        TailFamily::Uncertified(msg) => Err(Error::DivergentTail(msg.clone())),
    }
}

/// Consistency probe: the value the stream should carry at a given level.
fn expected_level_value(psi: &PsiSystem, family: &TailFamily, level: u64) -> Option<f64> {
    match family {
        TailFamily::ScalarPower { .. } | TailFamily::ScalarExp { .. } => match psi.kind() {
            SystemKind::ScalarRule(rule) => Some(rule.value(level as f64)),
            _ => None,
        },
        TailFamily::RadialPower { .. } | TailFamily::RadialExp { .. } => match psi.kind() {
            SystemKind::Radial { rule, .. } => Some(rule.value(level.max(1) as f64)),
            _ => None,
        },
        TailFamily::CrossPower { r, .. } => Some((level as f64).powf(-r)),
        TailFamily::ProductExpStep { lambda, a, d } => {
            Some((-lambda * ((*d as u64 + level - 1) as f64 + *d as f64 * a)).exp())
        }
        _ => None,
    }
}

/// Certified sum over ranks > `skip` of the rearranged modulus to the power
/// `beta`, to relative tolerance `rel_tol`.
pub fn rearranged_power_tail(psi: &PsiSystem, beta: f64, skip: u64, rel_tol: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("tail exponent must be positive, got {beta}")));
    }
    let family = classify(psi);
    if let TailFamily::Divergent(msg) | TailFamily::Uncertified(msg) = &family {
        return Err(Error::DivergentTail(msg.clone()));
    }
    // Fail fast on divergence regardless of how the stream goes.
    if !matches!(family, TailFamily::FiniteTable) {
        remainder_after(&family, 1, beta)?;
    }

    let mut levels = psi.levels();
    let mut partial = Kahan::new();
    let mut cum: u64 = 0;
    let mut level_no: u64 = 0;
    loop {
        let group = match levels.next_level() {
            Ok(Some(g)) => g,
            Ok(None) => {
                // finite system exhausted; the partial sum is the whole tail
                return Ok(partial.value());
            }
            Err(Error::BudgetExceeded { budget, context }) => {
                return Err(if matches!(family, TailFamily::FiniteTable) {
                    Error::BudgetExceeded { budget, context }
                } else {
                    Error::DivergentTail(format!(
                        "no certified remainder reached within budget ({context})"
                    ))
                });
            }
            Err(e) => return Err(e),
        };
        level_no += 1;
        let count = group.indices.len() as u64;
        let lo = cum.max(skip);
        cum += count;
        if cum > lo {
            let used = (cum - lo) as f64;
            partial.add(used * group.value.powf(beta));
        }
        if let Some(expect) = expected_level_value(psi, &family, level_no) {
            if (group.value - expect).abs() > 1e-9 * expect.abs().max(1e-300) {
                return Err(Error::DivergentTail(format!(
                    "level {level_no} value {} does not match the rule's {expect}; cannot certify",
                    group.value
                )));
            }
        }
        if cum >= skip {
            match remainder_after(&family, level_no, beta)? {
                Remainder::Exact(rem) => {
                    return Ok(partial.value() + rem);
                }
                Remainder::Bound(bound) => {
                    let p = partial.value();
                    if bound <= rel_tol * p.max(1e-300) || (p == 0.0 && bound == 0.0) {
                        return Ok(p);
                    }
                }
                Remainder::NotYet => {}
            }
        }
    }
}

/// Whole-series sum: sum over all ranks of rearranged^beta.
pub fn total_power_sum(psi: &PsiSystem, beta: f64) -> Result<f64> {
    rearranged_power_tail(psi, beta, 0, TAIL_REL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::PsiSystem;

    #[test]
    fn finite_table_tail_is_exact() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5, 0.25, 0.125]).unwrap();
        let got = rearranged_power_tail(&psi, 2.0, 1, TAIL_REL_TOL).unwrap();
        let expect = 0.25 + 0.0625 + 0.015625;
        assert_eq!(got, expect);
    }

    #[test]
    fn scalar_power_tail_matches_zeta() {
        let psi = PsiSystem::scalar_rule(DecayRule::Power { r: 1.0 }).unwrap();
        // sum_{k>2} k^-2 = pi^2/6 - 1 - 1/4
        let got = rearranged_power_tail(&psi, 2.0, 2, TAIL_REL_TOL).unwrap();
        let expect = std::f64::consts::PI.powi(2) / 6.0 - 1.25;
        assert!((got - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn scalar_power_divergence_detected() {
        let psi = PsiSystem::scalar_rule(DecayRule::Power { r: 0.5 }).unwrap();
        assert!(matches!(
            rearranged_power_tail(&psi, 2.0, 0, TAIL_REL_TOL),
            Err(Error::DivergentTail(_))
        ));
    }

    #[test]
    fn geometric_tail_certified() {
        // e^{-k ln 2} = 2^-k; sum_{k>=1} 4^-k = 1/3
        let psi = PsiSystem::scalar_rule(DecayRule::Exp {
            lambda: std::f64::consts::LN_2,
            s: 1.0,
            a: 0.0,
        })
        .unwrap();
        let got = rearranged_power_tail(&psi, 2.0, 0, 1e-13).unwrap();
        assert!((got - 1.0 / 3.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn subexponential_tail_certified() {
        let psi = PsiSystem::scalar_rule(DecayRule::Exp { lambda: 1.0, s: 0.5, a: 0.0 }).unwrap();
        let got = rearranged_power_tail(&psi, 1.0, 0, 1e-12).unwrap();
        let brute: f64 = (1..20_000).map(|k| (-(k as f64).sqrt()).exp()).sum();
        assert!((got - brute).abs() < 1e-9 * brute, "got {got} brute {brute}");
    }

    #[test]
    fn radial_sup_power_tail_matches_brute_force() {
        let psi = PsiSystem::radial(DecayRule::Power { r: 2.0 }, NormExponent::Infinity, 2).unwrap();
        // beta=2: c = 4 > d = 2; brute force over a large box
        let got = rearranged_power_tail(&psi, 2.0, 0, TAIL_REL_TOL).unwrap();
        let mut brute = Kahan::new();
        let big = 3000i64;
        for m in 1..=big {
            let c_m = ((2 * m + 1).pow(2) - (2 * m - 1).pow(2)) as f64;
            brute.add(c_m * (m as f64).powf(-4.0));
        }
        brute.add(1.0); // origin carries rule(1) = 1
        // missing far tail of the brute force: ~ int 8 x^-3 dx = 4 big^-2
        let brute_v = brute.value() + 4.0 / (big as f64).powi(2);
        assert!((got - brute_v).abs() < 1e-5, "got {got} brute {brute_v}");
    }

    #[test]
    fn radial_l1_power_tail_with_skip() {
        let psi = PsiSystem::radial(DecayRule::Power { r: 3.0 }, NormExponent::Finite(1.0), 2).unwrap();
        let beta = 1.0;
        // skip cuts inside the second shell: ranks 1..5 are the l1 unit ball
        let got = rearranged_power_tail(&psi, beta, 7, TAIL_REL_TOL).unwrap();
        let full = rearranged_power_tail(&psi, beta, 0, TAIL_REL_TOL).unwrap();
        // first 7 ranks: 5 at value 1, then 2 at 2^-3
        let head = 5.0 * 1.0 + 2.0 * 0.125;
        assert!((full - head - got).abs() < 1e-12 * full);
    }

    #[test]
    fn cross_power_tail_matches_brute_force() {
        let psi = PsiSystem::product(vec![DecayRule::Power { r: 2.0 }, DecayRule::Power { r: 2.0 }])
            .unwrap();
        let got = rearranged_power_tail(&psi, 1.0, 0, TAIL_REL_TOL).unwrap();
        // sum over Z^2 of (k1' k2')^-2 = (2 zeta(2) + 1)^2
        let z2 = std::f64::consts::PI.powi(2) / 6.0;
        let expect = (2.0 * z2 + 1.0).powi(2);
        assert!((got - expect).abs() < 1e-10 * expect, "got {got} expect {expect}");
    }

    #[test]
    fn cross_power_tail_with_skip_matches_brute_force() {
        let r = 1.5;
        let psi = PsiSystem::product(vec![DecayRule::Power { r }, DecayRule::Power { r }]).unwrap();
        let skip = 37u64;
        let got = rearranged_power_tail(&psi, 2.0, skip, TAIL_REL_TOL).unwrap();
        // brute force: gather all products over a huge cross, sort, skip
        let n_big = 50_000u64;
        let mut vals: Vec<f64> = Vec::new();
        for a in 1..=n_big {
            for b in 1..=(n_big / a) {
                let w = (if a == 1 { 3 } else { 2 }) * (if b == 1 { 3 } else { 2 });
                let v = ((a * b) as f64).powf(-r * 2.0);
                for _ in 0..w {
                    vals.push(v);
                }
            }
        }
        vals.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let brute: f64 = vals.iter().skip(skip as usize).sum();
        // brute force misses products > n_big; r*beta=3 so the miss is ~ n^-2 log n
        assert!((got - brute).abs() < 1e-6 * brute, "got {got} brute {brute}");
    }

    #[test]
    fn product_exp_step_tail() {
        let lambda = 0.7;
        let psi = PsiSystem::product(vec![
            DecayRule::Exp { lambda, s: 1.0, a: 0.0 },
            DecayRule::Exp { lambda, s: 1.0, a: 0.0 },
        ])
        .unwrap();
        let got = rearranged_power_tail(&psi, 1.0, 0, 1e-12).unwrap();
        // sum over Z^2 e^{-lambda(k1'+k2')} = (3 e^-l + 2 sum_{a>=2} e^-la)^2
        let q = (-lambda) as f64;
        let base = 3.0 * q.exp() + 2.0 * q.exp() * q.exp() / (1.0 - q.exp());
        let expect = base * base;
        assert!((got - expect).abs() < 1e-10 * expect, "got {got} expect {expect}");
    }

    #[test]
    fn log_family_is_divergent() {
        let psi = PsiSystem::scalar_rule(DecayRule::Log { r: 3.0, a: 1.0 }).unwrap();
        assert!(matches!(
            rearranged_power_tail(&psi, 5.0, 0, TAIL_REL_TOL),
            Err(Error::DivergentTail(_))
        ));
    }
}
