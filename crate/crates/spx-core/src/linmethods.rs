//! Blockwise linear summation methods on l1 shells and their errors.
//!
//! Each method multiplies the shell of indices with |k|_1 = nu by a
//! scalar lambda_nu: truncation (partial sums), Fejer averaging, the
//! generalized Abel-Poisson family rho^{nu^s}, and the Taylor-Abel-
//! Poisson family, which keeps the first r shells intact and damps the
//! rest with a binomial tail of the rho power series. The module also
//! provides the two shell-wise derivative scales (power and falling-
//! factorial), Poisson multiplier norms, and rate tables pairing a
//! method error with a majorant over a parameter sweep.

use crate::element::{SpElement, MIN_COEFF};
use crate::error::{Error, Result};
use crate::kahan::Kahan;
use crate::special::{binomial_u64, ln_gamma};

/// Multiplier assigned to the zero shell by the Abel-Poisson family.
/// The defining sum starts at nu = 1; keeping the mean intact is the
/// convention that makes the family degenerate to the identity as
/// rho -> 1- and agree with the Taylor-Abel-Poisson family at r = 1.
pub const ABEL_POISSON_ZERO_SHELL: f64 = 1.0;

/// Switch point above which binomial terms move to log space.
const LN_SPACE_FROM: u64 = 60;

/// A shell-wise multiplier method: the rule nu -> lambda_nu.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MultiplierMethod {
    /// lambda_nu = 1 for nu <= n, else 0.
    Partial { n: u64 },
    /// lambda_nu = 1 - nu/(n+1) for nu <= n, else 0.
    Fejer { n: u64 },
    /// lambda_nu = rho^{nu^s} for nu >= 1, lambda_0 = 1.
    AbelPoisson { rho: f64, s: f64 },
    /// lambda_nu = 1 for nu < r, else the binomial tail weight.
    Tap { rho: f64, r: u32 },
}

pub fn partial(n: u64) -> MultiplierMethod {
    MultiplierMethod::Partial { n }
}

pub fn fejer(n: u64) -> MultiplierMethod {
    MultiplierMethod::Fejer { n }
}

pub fn abel_poisson(rho: f64, s: f64) -> Result<MultiplierMethod> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("abel-poisson needs rho in [0,1), got {rho}")));
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("abel-poisson needs s > 0, got {s}")));
    }
    Ok(MultiplierMethod::AbelPoisson { rho, s })
}

pub fn tap(rho: f64, r: u32) -> Result<MultiplierMethod> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("tap needs rho in [0,1), got {rho}")));
    }
    if r == 0 {
        return Err(Error::InvalidParameter("tap needs r >= 1".into()));
    }
    Ok(MultiplierMethod::Tap { rho, r })
}

impl MultiplierMethod {
    pub fn multiplier(&self, nu: u64) -> f64 {
        match *self {
            MultiplierMethod::Partial { n } => {
                if nu <= n {
                    1.0
                } else {
                    0.0
                }
            }
            MultiplierMethod::Fejer { n } => {
                if nu <= n {
                    1.0 - nu as f64 / (n as f64 + 1.0)
                } else {
                    0.0
                }
            }
            MultiplierMethod::AbelPoisson { rho, s } => {
                if nu == 0 {
                    ABEL_POISSON_ZERO_SHELL
                } else if rho == 0.0 {
                    0.0
                } else {
                    // rho^{nu^s} through logs so large shells underflow
                    // gracefully instead of rounding through powf
                    ((nu as f64).powf(s) * rho.ln()).exp()
                }
            }
            MultiplierMethod::Tap { rho, r } => {
                if nu < r as u64 {
                    1.0
                } else {
                    tap_weight(nu, r, rho)
                }
            }
        }
    }
}

/// Tail weight of the Taylor-Abel-Poisson method in its binomial form:
/// sum over k < r of C(nu,k) (1-rho)^k rho^{nu-k}.
pub fn tap_weight(nu: u64, r: u32, rho: f64) -> f64 {
    if rho == 0.0 {
        // every term carries rho^{nu-k} with nu - k >= 1
        return if nu < r as u64 { 1.0 } else { 0.0 };
    }
    let mut acc = Kahan::new();
    let kmax = (r as u64 - 1).min(nu);
    if nu <= LN_SPACE_FROM {
        for k in 0..=kmax {
            let term = binomial_u64(nu, k)
                * (1.0 - rho).powi(k as i32)
                * rho.powi((nu - k) as i32);
            acc.add(term);
        }
    } else {
        let ln_rho = rho.ln();
        let ln_one_minus = (1.0 - rho).ln();
        for k in 0..=kmax {
            let ln_binom = ln_gamma(nu as f64 + 1.0)
                - ln_gamma(k as f64 + 1.0)
                - ln_gamma((nu - k) as f64 + 1.0);
            acc.add((ln_binom + k as f64 * ln_one_minus + (nu - k) as f64 * ln_rho).exp());
        }
    }
    acc.value()
}

/// The same weight through the Taylor form: sum over k < r of
/// (1-rho)^k / k! times the k-th derivative of rho^nu, evaluated with
/// an explicit falling-factorial product. Kept as an independent
/// computation so the two forms can cross-check each other.
pub fn tap_weight_taylor(nu: u64, r: u32, rho: f64) -> f64 {
    if rho == 0.0 {
        return if nu < r as u64 { 1.0 } else { 0.0 };
    }
    let mut acc = Kahan::new();
    let kmax = (r as u64 - 1).min(nu);
    let nuf = nu as f64;
    // falling factorial nu (nu-1) ... (nu-k+1) and k! grown in step
    let mut falling = 1.0f64;
    let mut factorial = 1.0f64;
    for k in 0..=kmax {
        if k > 0 {
            falling *= nuf - (k as f64 - 1.0);
            factorial *= k as f64;
        }
        let kf = k as f64;
        let power = ((nuf - kf) * rho.ln()).exp();
        acc.add(falling / factorial * (1.0 - rho).powf(kf) * power);
    }
    acc.value()
}

/// Apply the method shell-wise: coefficient at k is scaled by
/// lambda_{|k|_1}. Modes whose scaled modulus falls below the
/// coefficient floor are dropped, matching annihilation semantics.
pub fn apply_method(f: &SpElement, method: &MultiplierMethod) -> Result<SpElement> {
    let pairs = f.iter().filter_map(|(ix, c)| {
        let lambda = method.multiplier(ix.l1());
        let scaled = c * lambda;
        if scaled.norm() < MIN_COEFF {
            None
        } else {
            Some((ix.clone(), scaled))
        }
    });
    SpElement::from_pairs(f.domain(), pairs)
}

/// Error of the method on f in the p-norm: the norm of f - A(f),
/// computed coefficientwise as |1 - lambda_nu| |c| without forming the
/// difference element.
pub fn method_error(f: &SpElement, method: &MultiplierMethod, p: f64) -> Result<f64> {
    // validate p through the element itself
    f.power_sum(p)?;
    let mut acc = Kahan::new();
    for (ix, c) in f.iter() {
        let lambda = method.multiplier(ix.l1());
        acc.add(((1.0 - lambda).abs() * c.norm()).powf(p));
    }
    Ok(acc.value().powf(1.0 / p))
}

/// Shell-wise derivative scales.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    /// Scale the shell nu >= 1 by nu^r; the zero shell passes through.
    Round,
    /// Scale the shell nu >= r by nu!/(nu-r)!; lower shells are dropped.
    Bracket,
}

/// Generalized derivative of order r. The two kinds agree at r = 1 on
/// every element with no zero-shell mode (the round kind keeps the
/// mean, the bracket kind annihilates it).
pub fn generalized_derivative(f: &SpElement, r: u32, kind: DerivativeKind) -> Result<SpElement> {
    if r == 0 {
        return Ok(f.clone());
    }
    let rf = r as u64;
    let pairs = f.iter().filter_map(|(ix, c)| {
        let nu = ix.l1();
        match kind {
            DerivativeKind::Round => {
                let scale = if nu == 0 { 1.0 } else { (nu as f64).powi(r as i32) };
                Some((ix.clone(), c * scale))
            }
            DerivativeKind::Bracket => {
                if nu < rf {
                    return None;
                }
                let mut scale = 1.0f64;
                for j in 0..rf {
                    scale *= (nu - j) as f64;
                }
                Some((ix.clone(), c * scale))
            }
        }
    });
    SpElement::from_pairs(f.domain(), pairs)
}

/// p-norm of the Poisson multiplier image rho^{|k|_1} c(k): the size
/// of the Poisson integral of f at equal radial coordinate rho.
pub fn poisson_norm(f: &SpElement, rho: f64, p: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidParameter(format!("poisson norm needs rho in [0,1), got {rho}")));
    }
    f.power_sum(p)?;
    let mut acc = Kahan::new();
    for (ix, c) in f.iter() {
        let weight = rho.powf(ix.l1() as f64);
        acc.add((weight * c.norm()).powf(p));
    }
    Ok(acc.value().powf(1.0 / p))
}

/// Which error/majorant pairing a rate table tabulates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RatePairing {
    /// Fejer error against omega(1/n); sweep values are n.
    FejerError,
    /// Taylor-Abel-Poisson error against (1-rho)^{r-1} omega(1-rho);
    /// sweep values are rho.
    TapError { r: u32 },
    /// Poisson norm of the bracket derivative f^{[r]} against
    /// omega(1-rho)/(1-rho); sweep values are rho.
    DerivativePoissonNorm { r: u32 },
}

#[derive(Clone, Copy, Debug)]
pub struct RateRow {
    /// Sweep parameter: n for Fejer, rho otherwise.
    pub param: f64,
    /// The measured method quantity.
    pub quantity: f64,
    /// The majorant expression it is paired with.
    pub majorant: f64,
    /// quantity / majorant.
    pub ratio: f64,
}

/// Rate evidence over a sweep: the paired columns and the extrema of
/// their ratio. Bounded extrema support (never prove) an O-relation.
#[derive(Clone, Debug)]
pub struct RateReport {
    pub rows: Vec<RateRow>,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

pub fn method_rate_report<W: Fn(f64) -> f64>(
    f: &SpElement,
    p: f64,
    pairing: RatePairing,
    omega: W,
    sweep: &[f64],
) -> Result<RateReport> {
    if sweep.is_empty() {
        return Err(Error::InvalidParameter("rate sweep must be non-empty".into()));
    }
    let derivative = match pairing {
        RatePairing::DerivativePoissonNorm { r } => {
            Some(generalized_derivative(f, r, DerivativeKind::Bracket)?)
        }
        _ => None,
    };
    let mut rows = Vec::with_capacity(sweep.len());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &param in sweep {
        let (quantity, majorant) = match pairing {
            RatePairing::FejerError => {
                if !(param >= 1.0 && param.is_finite() && param.fract() == 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "fejer sweep values must be integers >= 1, got {param}"
                    )));
                }
                (method_error(f, &fejer(param as u64), p)?, omega(1.0 / param))
            }
            RatePairing::TapError { r } => {
                let m = tap(param, r)?;
                let gap = 1.0 - param;
                (method_error(f, &m, p)?, gap.powi(r as i32 - 1) * omega(gap))
            }
            RatePairing::DerivativePoissonNorm { .. } => {
                let gap = 1.0 - param;
                (poisson_norm(derivative.as_ref().unwrap(), param, p)?, omega(gap) / gap)
            }
        };
        if !(majorant > 0.0 && majorant.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "majorant must be positive finite on the sweep, got {majorant} at {param}"
            )));
        }
        let ratio = quantity / majorant;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
        rows.push(RateRow { param, quantity, majorant, ratio });
    }
    Ok(RateReport { rows, ratio_min: lo, ratio_max: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Domain;
    use crate::index::{Index, NormExponent};
    use crate::psi::PsiSystem;
    use crate::rules::DecayRule;
    use num_complex::Complex64;

    fn lattice_fixture() -> SpElement {
        // shells 0..4 populated off the axes and on them
        let pairs = vec![
            (Index::Lattice(vec![0, 0]), Complex64::new(0.7, 0.0)),
            (Index::Lattice(vec![1, 0]), Complex64::new(0.5, -0.1)),
            (Index::Lattice(vec![0, -1]), Complex64::new(-0.3, 0.2)),
            (Index::Lattice(vec![1, 1]), Complex64::new(0.2, 0.4)),
            (Index::Lattice(vec![-2, 1]), Complex64::new(0.1, -0.3)),
            (Index::Lattice(vec![2, -2]), Complex64::new(-0.05, 0.12)),
        ];
        SpElement::from_pairs(Domain::Lattice(2), pairs).unwrap()
    }

    fn ball_fixture() -> SpElement {
        // no zero-shell mode, so both derivative kinds act identically
        let pairs = vec![
            (Index::Lattice(vec![1, 0]), Complex64::new(0.9, 0.0)),
            (Index::Lattice(vec![-1, 1]), Complex64::new(0.4, 0.4)),
            (Index::Lattice(vec![2, 1]), Complex64::new(-0.2, 0.1)),
            (Index::Lattice(vec![0, 4]), Complex64::new(0.05, -0.02)),
        ];
        SpElement::from_pairs(Domain::Lattice(2), pairs).unwrap()
    }

    #[test]
    fn weight_forms_agree() {
        for r in 1..=8u32 {
            for nu in (r as u64)..=200 {
                for &rho in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
                    let a = tap_weight(nu, r, rho);
                    let b = tap_weight_taylor(nu, r, rho);
                    let scale = a.abs().max(1e-300);
                    assert!(
                        (a - b).abs() <= 1e-12 * scale,
                        "nu={nu} r={r} rho={rho}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn weight_bounds_and_boundary() {
        for r in 1..=8u32 {
            for nu in [1u64, 5, 17, 60, 61, 150] {
                for &rho in &[0.0, 0.1, 0.5, 0.9, 0.99] {
                    let m = tap(rho, r).unwrap();
                    let l = m.multiplier(nu);
                    assert!((0.0..=1.0 + 1e-14).contains(&l), "nu={nu} r={r} rho={rho}: {l}");
                }
                // continuity at the right endpoint: weights climb to 1
                let near_one = tap(0.999_999, r).unwrap().multiplier(nu);
                assert!(near_one > 1.0 - 1e-3, "nu={nu} r={r}: {near_one}");
            }
        }
    }

    #[test]
    fn tap_r1_is_abel_poisson_s1() {
        for &rho in &[0.0, 0.2, 0.5, 0.9] {
            let t = tap(rho, 1).unwrap();
            let a = abel_poisson(rho, 1.0).unwrap();
            for nu in 0..=50u64 {
                let (lt, la) = (t.multiplier(nu), a.multiplier(nu));
                let scale = la.abs().max(1e-300);
                assert!((lt - la).abs() <= 1e-13 * scale, "nu={nu} rho={rho}: {lt} vs {la}");
            }
        }
    }

    #[test]
    fn tap_at_zero_truncates() {
        let m = tap(0.0, 3).unwrap();
        for nu in 0..3u64 {
            assert_eq!(m.multiplier(nu), 1.0);
        }
        for nu in 3..20u64 {
            assert_eq!(m.multiplier(nu), 0.0);
        }
        let f = lattice_fixture();
        let truncated = apply_method(&f, &m).unwrap();
        let partial_sum = apply_method(&f, &partial(2)).unwrap();
        assert_eq!(truncated, partial_sum);
    }

    #[test]
    fn fejer_multipliers() {
        assert_eq!(fejer(1).multiplier(1), 0.5);
        assert_eq!(fejer(1).multiplier(0), 1.0);
        assert_eq!(fejer(1).multiplier(2), 0.0);
    }

    #[test]
    fn partial_error_is_tail_error() {
        let f = lattice_fixture();
        for n in 0..5u64 {
            for &p in &[1.0, 1.7, 2.0] {
                let e = method_error(&f, &partial(n), p).unwrap();
                let t = f.tail_error(|ix| ix.l1() <= n, p).unwrap();
                assert!((e - t).abs() <= 1e-15 * t.max(1.0), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn fejer_single_harmonic_error() {
        let f = SpElement::from_pairs(
            Domain::Lattice(2),
            [(Index::Lattice(vec![2, -1]), Complex64::new(0.0, 0.8))],
        )
        .unwrap();
        // harmonic on shell 3 under fejer(10): error (3/11) |c|
        let e = method_error(&f, &fejer(10), 1.3).unwrap();
        let expect = 3.0 / 11.0 * 0.8;
        assert!((e - expect).abs() < 1e-14, "{e} vs {expect}");
    }

    #[test]
    fn derivative_kinds() {
        let f = ball_fixture();
        let round = generalized_derivative(&f, 1, DerivativeKind::Round).unwrap();
        let bracket = generalized_derivative(&f, 1, DerivativeKind::Bracket).unwrap();
        assert_eq!(round, bracket);
        for kind in [DerivativeKind::Round, DerivativeKind::Bracket] {
            assert_eq!(generalized_derivative(&f, 0, kind).unwrap(), f);
        }
        // bracket r=2 on shell 3 scales by 3!/1! = 6
        let f3 = SpElement::from_pairs(
            Domain::Lattice(2),
            [(Index::Lattice(vec![2, 1]), Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        let d = generalized_derivative(&f3, 2, DerivativeKind::Bracket).unwrap();
        assert_eq!(d.coeff(&Index::Lattice(vec![2, 1])), Complex64::new(6.0, 0.0));
        // bracket drops shells below r
        let d = generalized_derivative(&ball_fixture(), 3, DerivativeKind::Bracket).unwrap();
        assert!(d.iter().all(|(ix, _)| ix.l1() >= 3));
    }

    #[test]
    fn poisson_norm_behaviour() {
        let f = lattice_fixture();
        // rho = 0 keeps only the zero shell
        let n0 = poisson_norm(&f, 0.0, 2.0).unwrap();
        assert!((n0 - 0.7).abs() < 1e-15);
        // single harmonic scales by rho^nu
        let h = SpElement::from_pairs(
            Domain::Lattice(2),
            [(Index::Lattice(vec![1, -2]), Complex64::new(0.6, 0.0))],
        )
        .unwrap();
        let n = poisson_norm(&h, 0.5, 1.0).unwrap();
        assert!((n - 0.6 * 0.125).abs() < 1e-15);
        // monotone in rho
        let mut prev = 0.0;
        for i in 0..=10 {
            let rho = i as f64 / 10.5;
            let v = poisson_norm(&f, rho, 1.5).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn method_commutes_with_system_multiplier() {
        let f = lattice_fixture();
        let psi =
            PsiSystem::radial(DecayRule::Power { r: 1.5 }, NormExponent::Finite(1.0), 2).unwrap();
        let m = tap(0.6, 2).unwrap();
        let a = apply_method(&f.psi_integrate(&psi).unwrap().0, &m).unwrap();
        let b = apply_method(&f, &m).unwrap().psi_integrate(&psi).unwrap().0;
        assert_eq!(a.len(), b.len());
        for (ix, c) in a.iter() {
            let d = b.coeff(ix);
            assert!((c - d).norm() <= 1e-15 * c.norm(), "{ix}");
        }
    }

    #[test]
    fn rate_report_pairings() {
        let f = lattice_fixture();
        let sweep: Vec<f64> = (1..=32).map(|n| n as f64).collect();
        let rep =
            method_rate_report(&f, 1.0, RatePairing::FejerError, |t| t, &sweep).unwrap();
        assert_eq!(rep.rows.len(), 32);
        assert!(rep.ratio_min >= 0.0 && rep.ratio_max.is_finite());
        // polynomial input at p = 1: the error is exactly
        // (1/(n+1)) sum nu |c_nu|, so the ratio against omega(t) = t
        // settles at sum nu |c_nu|
        let weighted: f64 = f.iter().map(|(ix, c)| ix.l1() as f64 * c.norm()).sum();
        let last = rep.rows.last().unwrap();
        assert!((last.ratio - 32.0 / 33.0 * weighted).abs() < 1e-12, "{}", last.ratio);
        // partial sums do hit 0 once n covers the support
        assert_eq!(method_error(&f, &partial(4), 1.0).unwrap(), 0.0);

        // tap(rho,1) and abel_poisson(rho,1) produce identical columns
        let rhos: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let rep_tap =
            method_rate_report(&f, 2.0, RatePairing::TapError { r: 1 }, |t| t, &rhos).unwrap();
        for (row, &rho) in rep_tap.rows.iter().zip(&rhos) {
            let m = abel_poisson(rho, 1.0).unwrap();
            let e = method_error(&f, &m, 2.0).unwrap();
            assert!((row.quantity - e).abs() <= 1e-13 * e.max(1e-300), "rho={rho}");
        }

        let rep_p = method_rate_report(
            &f,
            2.0,
            RatePairing::DerivativePoissonNorm { r: 2 },
            |t| t,
            &rhos,
        )
        .unwrap();
        assert!(rep_p.ratio_max.is_finite() && rep_p.ratio_min >= 0.0);
    }
}
