//! Exact identities tying best approximations of an element to those of
//! its weighted transform, the smoothness modulus, and the inequality
//! checks built on top of them.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::element::{Domain, SpElement};
use crate::error::{Error, Result};
use crate::kahan::Kahan;
use crate::psi::{char_sequences, CharSequences, PsiSystem};
use crate::Index;

/// Both sides of an approximation identity, as p-th powers.
#[derive(Clone, Copy, Debug)]
pub struct IdentityReport {
    pub n: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

fn validate_np(n: u64, p: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidParameter("identity level must be at least 1".into()));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter("norm exponent must satisfy p >= 1".into()));
    }
    Ok(())
}

/// Characteristic sequences extended until every support index of `f`
/// falls inside an enumerated group, plus the index-to-group map.
fn cover_support(
    psi: &PsiSystem,
    f: &SpElement,
) -> Result<(CharSequences, HashMap<Index, usize>)> {
    for (ix, _) in f.iter() {
        if psi.value(ix).is_none() {
            return Err(Error::InvalidElement(
                "element support extends beyond the system's index set".into(),
            ));
        }
    }
    let mut levels = 16usize;
    loop {
        let cs = char_sequences(psi, levels)?;
        let mut map = HashMap::new();
        for (g, group) in cs.groups.iter().enumerate() {
            for ix in group {
                map.insert(ix.clone(), g + 1);
            }
        }
        if f.iter().all(|(ix, _)| map.contains_key(ix)) {
            return Ok((cs, map));
        }
        if cs.epsilon.len() < levels {
            return Err(Error::InvalidElement(
                "element support was not reached by the system enumeration".into(),
            ));
        }
        levels *= 2;
    }
}

/// Suffix sums of per-group p-mass: entry j (1-based) is the p-th power
/// of the best approximation error at level j.
fn suffix_masses(
    h: &SpElement,
    map: &HashMap<Index, usize>,
    n_groups: usize,
    p: f64,
) -> Vec<f64> {
    let mut mass = vec![0.0f64; n_groups + 2];
    for (ix, c) in h.iter() {
        mass[map[ix]] += c.norm().powf(p);
    }
    let mut suffix = vec![0.0f64; n_groups + 2];
    let mut acc = Kahan::new();
    for j in (1..=n_groups).rev() {
        acc.add(mass[j]);
        suffix[j] = acc.value();
    }
    suffix
}

fn report(n: u64, lhs: f64, rhs: f64) -> IdentityReport {
    let residual = (lhs - rhs).abs() / lhs.max(rhs).max(1e-300);
    IdentityReport { n, lhs, rhs, residual }
}

/// Expands the level-n error of `f` through the errors of its weighted
/// derivative: lhs is the direct tail, rhs the telescoped expansion
/// through the level values.
pub fn direct_identity(
    psi: &PsiSystem,
    f: &SpElement,
    n: u64,
    p: f64,
) -> Result<IdentityReport> {
    validate_np(n, p)?;
    let deriv = f.psi_differentiate(psi)?;
    let (cs, map) = cover_support(psi, f)?;
    let j_max = map.values().copied().max().unwrap_or(0);
    let sf = suffix_masses(f, &map, j_max, p);
    let sg = suffix_masses(&deriv, &map, j_max, p);
    let n_us = n as usize;
    let lhs = if n_us <= j_max { sf[n_us] } else { 0.0 };
    let rhs = if n_us <= j_max {
        let mut acc = Kahan::new();
        acc.add(cs.epsilon[n_us - 1].powf(p) * sg[n_us]);
        for k in n_us + 1..=j_max {
            acc.add((cs.epsilon[k - 1].powf(p) - cs.epsilon[k - 2].powf(p)) * sg[k]);
        }
        acc.value()
    } else {
        0.0
    };
    Ok(report(n, lhs, rhs))
}

/// The companion expansion in the opposite direction: the level-n error
/// of the weighted derivative through the errors of `f` itself.
pub fn inverse_identity(
    psi: &PsiSystem,
    f: &SpElement,
    n: u64,
    p: f64,
) -> Result<IdentityReport> {
    validate_np(n, p)?;
    let deriv = f.psi_differentiate(psi)?;
    let (cs, map) = cover_support(psi, f)?;
    let j_max = map.values().copied().max().unwrap_or(0);
    let sf = suffix_masses(f, &map, j_max, p);
    let sg = suffix_masses(&deriv, &map, j_max, p);
    let n_us = n as usize;
    let lhs = if n_us <= j_max { sg[n_us] } else { 0.0 };
    let rhs = if n_us <= j_max {
        let mut acc = Kahan::new();
        acc.add(cs.epsilon[n_us - 1].powf(-p) * sf[n_us]);
        for k in n_us + 1..=j_max {
            acc.add((cs.epsilon[k - 1].powf(-p) - cs.epsilon[k - 2].powf(-p)) * sf[k]);
        }
        acc.value()
    } else {
        0.0
    };
    Ok(report(n, lhs, rhs))
}

fn signed_sum(ix: &Index) -> f64 {
    match ix {
        Index::Scalar(k) => *k as f64,
        Index::Lattice(v) => v.iter().map(|x| *x as f64).sum(),
    }
}

/// First support index whose coordinates mix signs, if any. Frequencies
/// in the closed positive or closed negative cone keep the diagonal
/// shift faithful; mixed signs break it.
pub fn mixed_sign_index(f: &SpElement) -> Option<Index> {
    for (ix, _) in f.iter() {
        if let Index::Lattice(v) = ix {
            let pos = v.iter().all(|x| *x >= 0);
            let neg = v.iter().all(|x| *x <= 0);
            if !pos && !neg {
                return Some(ix.clone());
            }
        }
    }
    None
}

/// Smoothness modulus of order `alpha` at step `t`: the supremum over
/// shifts h in [0, t] of the difference norm, where each frequency is
/// damped by (2 |sin(sigma h / 2)|)^alpha with sigma the coordinate sum.
///
/// The supremum is taken on a grid of `grid + 1` points followed by four
/// local refinement rounds around the best point.
pub fn smoothness_modulus(
    f: &SpElement,
    alpha: f64,
    t: f64,
    p: f64,
    grid: usize,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter("modulus order must be positive".into()));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter("modulus step must be nonnegative".into()));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter("norm exponent must satisfy p >= 1".into()));
    }
    if grid < 8 {
        return Err(Error::InvalidParameter("modulus grid must have at least 8 cells".into()));
    }
    if t == 0.0 || f.is_empty() {
        return Ok(0.0);
    }
    let terms: Vec<(f64, f64)> =
        f.iter().map(|(ix, c)| (signed_sum(ix), c.norm().powf(p))).collect();
    let ap = alpha * p;
    let phi = |h: f64| -> f64 {
        let mut acc = Kahan::new();
        for (sigma, w) in &terms {
            acc.add(w * crate::special::pow_fast(2.0 * (sigma * h / 2.0).sin().abs(), ap));
        }
        acc.value()
    };
    let mut lo = 0.0f64;
    let mut hi = t;
    let mut best = 0.0f64;
    let mut best_h = 0.0f64;
    for _ in 0..5 {
        let step = (hi - lo) / grid as f64;
        for i in 0..=grid {
            let h = lo + step * i as f64;
            let v = phi(h);
            if v > best {
                best = v;
                best_h = h;
            }
        }
        lo = (best_h - step).max(0.0);
        hi = (best_h + step).min(t);
    }
    Ok(best.powf(1.0 / p))
}

#[derive(Clone, Copy, Debug)]
pub struct BernsteinReport {
    pub n: u64,
    pub eps_n: f64,
    pub derivative_norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks the derivative bound for an element with spectrum in the l1
/// ball of radius n: the derivative norm against the element norm
/// divided by the smallest system modulus on the punctured ball.
pub fn bernstein_check(
    psi: &PsiSystem,
    tau: &SpElement,
    n: Option<u64>,
    p: f64,
) -> Result<BernsteinReport> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter("norm exponent must satisfy p >= 1".into()));
    }
    if tau.is_empty() {
        return Err(Error::InvalidParameter("empty element has no spectral radius".into()));
    }
    let spectral = tau.iter().map(|(ix, _)| ix.l1()).max().unwrap();
    let n = match n {
        Some(n) if n >= spectral => n,
        Some(_) => {
            return Err(Error::InvalidParameter(
                "element spectrum exceeds the stated degree".into(),
            ))
        }
        None => spectral,
    };
    if n == 0 {
        return Err(Error::InvalidParameter("spectral radius must be positive".into()));
    }
    let candidates: Vec<Index> = match tau.domain() {
        Domain::Scalar => (1..=n).map(Index::Scalar).collect(),
        Domain::Lattice(d) => {
            let ball = crate::IndexSet::Ball {
                d,
                r: crate::NormExponent::Finite(1.0),
                m: n,
            };
            ball.points()?
                .into_iter()
                .filter(|ix| ix.l1() > 0)
                .collect()
        }
    };
    let mut eps_n = f64::INFINITY;
    let mut seen = false;
    for ix in &candidates {
        if let Some(m) = psi.modulus(ix) {
            seen = true;
            eps_n = eps_n.min(m);
        }
    }
    if !seen {
        return Err(Error::InvalidParameter(
            "system covers no index in the spectral ball".into(),
        ));
    }
    let derivative_norm = tau.psi_differentiate(psi)?.norm(p)?;
    let bound = tau.norm(p)? / eps_n;
    Ok(BernsteinReport {
        n,
        eps_n,
        derivative_norm,
        bound,
        holds: derivative_norm <= bound * (1.0 + 1e-12),
    })
}

#[derive(Clone, Copy, Debug)]
pub struct InverseBoundReport {
    pub modulus: f64,
    pub bound_exact: f64,
    /// Present only when alpha * p >= 1; the relaxed bound is not valid
    /// below that.
    pub bound_relaxed: Option<f64>,
    pub holds_exact: bool,
    pub holds_relaxed: Option<bool>,
}

/// Bounds the smoothness modulus at step pi/n by weighted sums of the
/// spherical approximation errors E_nu (tails over l1 radius >= nu),
/// in the exact telescoped form and the relaxed power-weight form.
pub fn inverse_bound_check(
    f: &SpElement,
    alpha: f64,
    n: u64,
    p: f64,
    grid: usize,
) -> Result<InverseBoundReport> {
    if n < 1 {
        return Err(Error::InvalidParameter("degree must be at least 1".into()));
    }
    let modulus = smoothness_modulus(f, alpha, PI / n as f64, p, grid)?;
    let ap = alpha * p;
    let mut exact = Kahan::new();
    let mut relaxed = Kahan::new();
    for nu in 1..=n {
        let e_nu = f.tail_error(|ix| ix.l1() < nu, p)?;
        let epow = e_nu.powf(p);
        let nuf = nu as f64;
        exact.add((nuf.powf(ap) - (nuf - 1.0).powf(ap)) * epow);
        relaxed.add(nuf.powf(ap - 1.0) * epow);
    }
    let scale = (PI / n as f64).powf(alpha);
    let bound_exact = scale * exact.value().powf(1.0 / p);
    let slack = 1.0 + 1e-12;
    let (bound_relaxed, holds_relaxed) = if ap >= 1.0 {
        let b = scale * ap.powf(1.0 / p) * relaxed.value().powf(1.0 / p);
        (Some(b), Some(modulus <= b * slack))
    } else {
        (None, None)
    };
    Ok(InverseBoundReport {
        modulus,
        bound_exact,
        bound_relaxed,
        holds_exact: modulus <= bound_exact * slack,
        holds_relaxed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_elem(pairs: &[(u64, f64)]) -> SpElement {
        SpElement::from_pairs(
            Domain::Scalar,
            pairs.iter().map(|(k, v)| (Index::Scalar(*k), c(*v, 0.0))),
        )
        .unwrap()
    }

    #[test]
    fn direct_identity_scalar_exact() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5, 0.25]).unwrap();
        let f = scalar_elem(&[(1, 0.3), (2, -0.7), (3, 0.11)]);
        for n in 1..=4 {
            for p in [1.0, 2.0, 3.5] {
                let r = direct_identity(&psi, &f, n, p).unwrap();
                assert!(r.residual < 1e-13, "n={n} p={p}: {r:?}");
            }
        }
        let r = direct_identity(&psi, &f, 2, 1.0).unwrap();
        assert!((r.lhs - (0.7 + 0.11)).abs() < 1e-15);
    }

    #[test]
    fn inverse_identity_with_merged_groups() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5, 0.5, 0.25]).unwrap();
        let f = scalar_elem(&[(1, 0.2), (2, 0.4), (3, -0.5), (4, 0.9)]);
        for n in 1..=3 {
            let r = inverse_identity(&psi, &f, n, 2.0).unwrap();
            assert!(r.residual < 1e-13, "n={n}: {r:?}");
        }
        // level 2 groups indices 2 and 3 together
        let r = inverse_identity(&psi, &f, 2, 2.0).unwrap();
        let expect = (0.4f64 / 0.5).powi(2) + (0.5f64 / 0.5).powi(2) + (0.9f64 / 0.25).powi(2);
        assert!((r.lhs - expect).abs() < 1e-12, "lhs {}", r.lhs);
    }

    #[test]
    fn identity_beyond_support_is_zero() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5]).unwrap();
        let f = scalar_elem(&[(1, 1.0)]);
        let r = direct_identity(&psi, &f, 2, 2.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn modulus_single_mode_closed_form() {
        let f = scalar_elem(&[(1, 0.8)]);
        for alpha in [0.5, 1.0, 2.0] {
            let got = smoothness_modulus(&f, alpha, PI / 2.0, 1.0, 32).unwrap();
            let expect = 0.8 * (2.0 * (PI / 4.0).sin()).powf(alpha);
            assert!((got - expect).abs() < 1e-12, "alpha={alpha}: {got} vs {expect}");
        }
    }

    #[test]
    fn modulus_interior_maximum() {
        let f = scalar_elem(&[(4, 1.0)]);
        let got = smoothness_modulus(&f, 1.0, PI / 2.0, 2.0, 32).unwrap();
        assert!((got - 2.0).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn mixed_sign_detection() {
        let ok = SpElement::from_pairs(
            Domain::Lattice(2),
            [
                (Index::Lattice(vec![1, 2]), c(1.0, 0.0)),
                (Index::Lattice(vec![-1, -3]), c(0.5, 0.0)),
            ],
        )
        .unwrap();
        assert!(mixed_sign_index(&ok).is_none());
        let bad = SpElement::from_pairs(
            Domain::Lattice(2),
            [(Index::Lattice(vec![2, -2]), c(1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(mixed_sign_index(&bad), Some(Index::Lattice(vec![2, -2])));
    }

    #[test]
    fn bernstein_sharp_on_single_mode() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5, 0.25]).unwrap();
        let tau = scalar_elem(&[(2, 0.6)]);
        let r = bernstein_check(&psi, &tau, Some(2), 2.0).unwrap();
        assert_eq!(r.n, 2);
        assert!((r.eps_n - 0.5).abs() < 1e-15);
        assert!(r.holds);
        assert!((r.derivative_norm - r.bound).abs() < 1e-12);
        assert!(bernstein_check(&psi, &tau, Some(1), 2.0).is_err());
    }

    #[test]
    fn inverse_bound_single_mode() {
        let f = scalar_elem(&[(1, 0.9)]);
        let r = inverse_bound_check(&f, 1.0, 1, 2.0, 32).unwrap();
        assert!(r.holds_exact);
        assert_eq!(r.holds_relaxed, Some(true));
        assert!((r.modulus - 0.9 * 2.0).abs() < 1e-12);
        assert!((r.bound_exact - PI * 0.9).abs() < 1e-12);
    }

    #[test]
    fn inverse_bound_relaxed_gated_below_unit_product() {
        let f = scalar_elem(&[(1, 1.0), (3, 0.2)]);
        let r = inverse_bound_check(&f, 0.5, 2, 1.0, 32).unwrap();
        assert!(r.bound_relaxed.is_none());
        assert!(r.holds_exact);
    }
}
