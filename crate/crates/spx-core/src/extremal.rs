//! Exact approximation characteristics of diagonal ellipsoid classes: the
//! image of a q-norm unit ball under coefficientwise multiplication by a
//! system. Errors are measured in the p-metric of the coefficient space.
//!
//! Two regimes run through every formula: when q <= p the worst element
//! concentrates on a single off-set mode, when p < q it spreads over the
//! whole complement with a closed-form profile. All suprema over a free
//! cut rank s carry certified stopping rules so scans terminate with the
//! true supremum, not a heuristic cutoff.

use crate::error::{Error, Result};
use crate::index::{Index, IndexSet};
use crate::kahan::Kahan;
use crate::psi::{char_sequences, Levels, PsiSystem, SystemKind};
use crate::tails::{rearranged_power_tail, TAIL_REL_TOL};

/// Which side of the exponent comparison a task falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// q <= p: peak-driven formulas.
    QLeP,
    /// p < q: spread-driven formulas with the coupling exponent beta.
    PLtQ,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::QLeP => write!(f, "q<=p"),
            Regime::PLtQ => write!(f, "p<q"),
        }
    }
}

fn validate_pq(p: f64, q: f64) -> Result<Regime> {
    if !(p > 0.0) || !p.is_finite() || !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponents must be positive and finite, got p={p}, q={q}"
        )));
    }
    Ok(if q <= p { Regime::QLeP } else { Regime::PLtQ })
}

/// The coupling exponent p q / (q - p) for the p < q regime.
pub fn beta_exponent(p: f64, q: f64) -> Result<f64> {
    if validate_pq(p, q)? != Regime::PLtQ {
        return Err(Error::RegimeMismatch(format!("beta exponent needs p < q, got p={p}, q={q}")));
    }
    Ok(p * q / (q - p))
}

/// Per-entry adapter over the grouped best-first enumeration.
struct EntryStream<'a> {
    en: crate::psi::Enumerator<'a>,
    buf: std::collections::VecDeque<(Index, f64)>,
}

impl<'a> EntryStream<'a> {
    fn new(psi: &'a PsiSystem) -> Self {
        EntryStream { en: psi.enumerate(), buf: std::collections::VecDeque::new() }
    }

    fn next_entry(&mut self) -> Result<Option<(Index, f64)>> {
        if self.buf.is_empty() {
            match self.en.next_group()? {
                Some(g) => {
                    let v = g.value;
                    self.buf.extend(g.indices.into_iter().map(|ix| (ix, v)));
                }
                None => return Ok(None),
            }
        }
        Ok(self.buf.pop_front())
    }
}

/// Lazily expanded per-rank view of the non-increasing rearrangement.
struct RankCache<'a> {
    levels: Levels<'a>,
    vals: Vec<f64>,
    exhausted: bool,
}

impl<'a> RankCache<'a> {
    fn new(psi: &'a PsiSystem) -> Self {
        RankCache { levels: psi.levels(), vals: Vec::new(), exhausted: false }
    }

    /// Value at 1-based rank, or None past the end of a finite system.
    fn get(&mut self, rank: u64) -> Result<Option<f64>> {
        while self.vals.len() < rank as usize && !self.exhausted {
            match self.levels.next_level()? {
                Some(group) => {
                    let v = group.value;
                    self.vals.extend(std::iter::repeat(v).take(group.indices.len()));
                }
                None => self.exhausted = true,
            }
        }
        Ok(self.vals.get(rank as usize - 1).copied())
    }
}

/// Error of approximating the ellipsoid by sequences supported on `gamma`.
#[derive(Clone, Debug)]
pub struct GammaError {
    pub value: f64,
    pub regime: Regime,
    /// q <= p: an index outside `gamma` where the supremum concentrates.
    pub witness: Option<Index>,
    pub beta: Option<f64>,
}

/// Worst-case p-error over the q-ellipsoid when every mode inside `gamma`
/// is captured and the rest is dropped.
pub fn gamma_excluded_error(
    psi: &PsiSystem,
    gamma: &IndexSet,
    p: f64,
    q: f64,
) -> Result<GammaError> {
    let regime = validate_pq(p, q)?;
    let in_universe = gamma
        .points()?
        .into_iter()
        .filter(|ix| psi.value(ix).is_some())
        .count() as u64;
    match regime {
        Regime::QLeP => {
            let mut en = EntryStream::new(psi);
            while let Some((ix, value)) = en.next_entry()? {
                if !gamma.contains(&ix) {
                    return Ok(GammaError { value, regime, witness: Some(ix), beta: None });
                }
            }
            Ok(GammaError { value: 0.0, regime, witness: None, beta: None })
        }
        Regime::PLtQ => {
            let beta = beta_exponent(p, q)?;
            let mut seen: u64 = 0;
            let mut emitted: u64 = 0;
            let mut off = Kahan::new();
            let mut en = EntryStream::new(psi);
            let tail_start = loop {
                if seen == in_universe {
                    break emitted;
                }
                match en.next_entry()? {
                    Some((ix, value)) => {
                        emitted += 1;
                        if gamma.contains(&ix) {
                            seen += 1;
                        } else {
                            off.add(value.powf(beta));
                        }
                    }
                    None => break emitted,
                }
            };
            let tail = match rearranged_power_tail(psi, beta, tail_start, TAIL_REL_TOL) {
                Ok(t) => t,
                // a fully consumed finite system has nothing left to add
                Err(Error::BudgetExceeded { .. }) if seen == in_universe => 0.0,
                Err(e) => return Err(e),
            };
            Ok(GammaError {
                value: (off.value() + tail).powf(1.0 / beta),
                regime,
                witness: None,
                beta: Some(beta),
            })
        }
    }
}

/// Best achievable `gamma_excluded_error` over all sets of n indices,
/// together with the set that attains it (the n top-modulus indices).
#[derive(Clone, Debug)]
pub struct SubspaceWidth {
    pub n: u64,
    pub value: f64,
    pub regime: Regime,
    pub witness: Vec<Index>,
    pub beta: Option<f64>,
}

pub fn best_subspace_width(psi: &PsiSystem, n: u64, p: f64, q: f64) -> Result<SubspaceWidth> {
    let regime = validate_pq(p, q)?;
    let mut witness = Vec::with_capacity(n as usize);
    let mut en = EntryStream::new(psi);
    let mut exhausted = false;
    for _ in 0..n {
        match en.next_entry()? {
            Some((ix, _)) => witness.push(ix),
            None => {
                exhausted = true;
                break;
            }
        }
    }
    let value = match regime {
        Regime::QLeP => {
            if exhausted {
                0.0
            } else {
                en.next_entry()?.map(|(_, v)| v).unwrap_or(0.0)
            }
        }
        Regime::PLtQ => {
            let beta = beta_exponent(p, q)?;
            if exhausted {
                0.0
            } else {
                match rearranged_power_tail(psi, beta, n, TAIL_REL_TOL) {
                    Ok(t) => t.powf(1.0 / beta),
                    Err(e) => return Err(e),
                }
            }
        }
    };
    let beta = match regime {
        Regime::PLtQ => Some(beta_exponent(p, q)?),
        Regime::QLeP => None,
    };
    Ok(SubspaceWidth { n, value, regime, witness, beta })
}

/// One constancy interval of the Kolmogorov width of the p-ellipsoid:
/// d_m equals `value` for every dimension m in [m_lo, m_hi].
#[derive(Clone, Debug, PartialEq)]
pub struct PlateauRow {
    pub level: usize,
    pub m_lo: u64,
    pub m_hi: u64,
    pub value: f64,
}

/// The Kolmogorov widths of the p-ellipsoid in its own space are a step
/// function of the dimension: constant on each level's rank range.
pub fn kolmogorov_plateaus(psi: &PsiSystem, p: f64, n_levels: usize) -> Result<Vec<PlateauRow>> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("width table needs p >= 1, got {p}")));
    }
    let cs = char_sequences(psi, n_levels)?;
    let mut rows = Vec::with_capacity(cs.epsilon.len());
    for (g, eps) in cs.epsilon.iter().enumerate() {
        rows.push(PlateauRow {
            level: g + 1,
            m_lo: cs.delta_n(g),
            m_hi: cs.delta_n(g + 1) - 1,
            value: *eps,
        });
    }
    Ok(rows)
}

/// Worst-case error of the projection capturing the top n levels
/// (equivalently, the best approximation with spectrum in that region).
pub fn level_projection_error(psi: &PsiSystem, n: usize, p: f64, q: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("level index is 1-based".into()));
    }
    let regime = validate_pq(p, q)?;
    match regime {
        Regime::QLeP => {
            let cs = char_sequences(psi, n)?;
            cs.epsilon
                .get(n - 1)
                .copied()
                .ok_or_else(|| Error::InvalidParameter(format!("system has fewer than {n} levels")))
        }
        Regime::PLtQ => {
            let beta = beta_exponent(p, q)?;
            let skip = if n == 1 {
                0
            } else {
                let cs = char_sequences(psi, n - 1)?;
                if cs.epsilon.len() < n - 1 {
                    return Err(Error::InvalidParameter(format!(
                        "system has fewer than {} levels",
                        n - 1
                    )));
                }
                cs.delta_n(n - 1)
            };
            Ok(rearranged_power_tail(psi, beta, skip, TAIL_REL_TOL)?.powf(1.0 / beta))
        }
    }
}

/// Best approximation of the ellipsoid by n arbitrarily placed modes.
#[derive(Clone, Debug)]
pub struct NTerm {
    pub n: u64,
    pub value: f64,
    pub regime: Regime,
    /// Cut rank attaining the supremum; None when the supremum is a limit.
    pub s_star: Option<u64>,
    pub attained: bool,
}

const SCAN_CAP: u64 = 100_000_000;

pub fn nterm(psi: &PsiSystem, n: u64, p: f64, q: f64) -> Result<NTerm> {
    let regime = validate_pq(p, q)?;
    if n == 0 {
        return Err(Error::InvalidParameter("term count n must be at least 1".into()));
    }
    if psi.has_declared_zeros() {
        return Err(Error::ZeroEntry("n-term formulas need all system entries nonzero".into()));
    }
    if psi.is_unit() {
        return nterm_unit(n, p, q, regime);
    }
    match regime {
        Regime::QLeP => nterm_qlep(psi, n, p, q),
        Regime::PLtQ => nterm_pltq(psi, n, p, q),
    }
}

/// Unit system: every mode has modulus one. The scan objective reduces to
/// F(s) = (s - n) s^{-p/q}, unimodal in s.
fn nterm_unit(n: u64, p: f64, q: f64, regime: Regime) -> Result<NTerm> {
    match regime {
        Regime::PLtQ => Err(Error::NoFiniteSup(
            "the unit-system ellipsoid is unbounded in the finer metric (p < q)".into(),
        )),
        Regime::QLeP if p == q => {
            // F(s) = (s-n)/s increases to 1 and never attains it
            Ok(NTerm { n, value: 1.0, regime, s_star: None, attained: false })
        }
        Regime::QLeP => {
            let c = p / q;
            // argmax of the continuous relaxation, scanned exactly
            let peak = (c * n as f64 / (c - 1.0)).ceil() as u64 + 2;
            let mut best = f64::NEG_INFINITY;
            let mut s_best = 0;
            for s in n + 1..=peak.max(n + 3) {
                let f = (s - n) as f64 * (s as f64).powf(-c);
                if f > best {
                    best = f;
                    s_best = s;
                }
            }
            Ok(NTerm {
                n,
                value: best.powf(1.0 / p),
                regime,
                s_star: Some(s_best),
                attained: true,
            })
        }
    }
}

/// q <= p: e_n^p = sup_{s>n} (s - n) (sum_{k<=s} r_k^{-q})^{-p/q} over the
/// rearrangement r. The scan stops once a checkpoint bound proves no later
/// s can beat the running maximum.
fn nterm_qlep(psi: &PsiSystem, n: u64, p: f64, q: f64) -> Result<NTerm> {
    let c = p / q;
    let mut cache = RankCache::new(psi);
    let mut a = Kahan::new();
    let mut best = f64::NEG_INFINITY;
    let mut s_best = 0u64;
    // checkpoints (m, r_{m+1}) at geometric positions for the stop bound
    let mut ckpts: Vec<(u64, f64)> = Vec::new();
    let mut next_m = n;
    let mut next_eval = 2 * (n + 1);
    let mut s = 0u64;
    loop {
        s += 1;
        if s > SCAN_CAP {
            return Err(Error::NoFiniteSup("cut-rank scan exceeded its cap".into()));
        }
        let v = match cache.get(s)? {
            Some(v) => v,
            None => {
                // finite system: every s beyond the support gives zero error
                if s_best == 0 {
                    return Ok(NTerm { n, value: 0.0, regime: Regime::QLeP, s_star: None, attained: true });
                }
                return Ok(NTerm {
                    n,
                    value: best.powf(1.0 / p),
                    regime: Regime::QLeP,
                    s_star: Some(s_best),
                    attained: true,
                });
            }
        };
        a.add(v.powf(-q));
        if s > n {
            let f = (s - n) as f64 * a.value().powf(-c);
            if f > best {
                best = f;
                s_best = s;
            }
        }
        if s == next_m + 1 {
            ckpts.push((next_m, v));
            next_m = (2 * next_m).max(next_m + 1);
        }
        if s >= next_eval && s > n + 1 {
            let mut bound = f64::INFINITY;
            for &(m, r_m1) in &ckpts {
                if m >= s {
                    break;
                }
                let g_sup = sup_shift_ratio(c, n as f64, m as f64, s as f64);
                bound = bound.min(r_m1.powf(p) * g_sup);
            }
            if bound <= best {
                return Ok(NTerm {
                    n,
                    value: best.powf(1.0 / p),
                    regime: Regime::QLeP,
                    s_star: Some(s_best),
                    attained: true,
                });
            }
            next_eval *= 2;
        }
    }
}

/// sup over x >= s of (x - n)(x - m)^{-c} with m >= n, c >= 1, s > m.
fn sup_shift_ratio(c: f64, n: f64, m: f64, s: f64) -> f64 {
    if c > 1.0 {
        let x_star = (c * n - m) / (c - 1.0);
        let x = if x_star > s { x_star } else { s };
        (x - n) * (x - m).powf(-c)
    } else if m > n {
        (s - n) / (s - m)
    } else {
        1.0
    }
}

/// p < q: the unique balance rank s* splits the rearrangement into an
/// averaged head and a raw tail.
fn nterm_pltq(psi: &PsiSystem, n: u64, p: f64, q: f64) -> Result<NTerm> {
    let beta = beta_exponent(p, q)?;
    let finite = matches!(psi.kind(), SystemKind::Table(_));
    if !finite {
        // fail fast if the spread sum cannot converge
        rearranged_power_tail(psi, beta, 0, TAIL_REL_TOL)?;
    }
    let mut cache = RankCache::new(psi);
    let mut a = Kahan::new();
    // head ranks 1..=n contribute to the running sum as well
    for s in 1..=n {
        match cache.get(s)? {
            Some(v) => a.add(v.powf(-q)),
            None => {
                // n modes already cover the whole system
                return Ok(NTerm { n, value: 0.0, regime: Regime::PLtQ, s_star: None, attained: true });
            }
        }
    }
    let mut s = n;
    loop {
        s += 1;
        if s > SCAN_CAP {
            return Err(Error::NoFiniteSup("balance-rank scan exceeded its cap".into()));
        }
        let v = match cache.get(s)? {
            Some(v) => v,
            None => {
                return Err(Error::NoFiniteSup(
                    "no balance rank found inside the finite system".into(),
                ))
            }
        };
        a.add(v.powf(-q));
        let avg = a.value() / (s - n) as f64;
        let left = v.powf(-q) <= avg;
        let right = match cache.get(s + 1)? {
            Some(next) => avg < next.powf(-q),
            None => true,
        };
        if left && right {
            let head = ((s - n) as f64).powf(q / (q - p)) * a.value().powf(-p / (q - p));
            let tail = match rearranged_power_tail(psi, beta, s, TAIL_REL_TOL) {
                Ok(t) => t,
                Err(Error::BudgetExceeded { .. }) if finite => 0.0,
                Err(e) => return Err(e),
            };
            return Ok(NTerm {
                n,
                value: (head + tail).powf(1.0 / beta),
                regime: Regime::PLtQ,
                s_star: Some(s),
                attained: true,
            });
        }
    }
}

/// Position-constrained n-term approximation over a monotone scalar system:
/// candidate sets are either aligned blocks {jn+1..(j+1)n} or arbitrary
/// windows {j+1..j+n} of consecutive positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Blocks,
    Windows,
}

#[derive(Clone, Debug)]
pub struct ConstrainedNTerm {
    pub n: u64,
    pub value: f64,
    pub regime: Regime,
    pub s_star: u64,
    pub kind: ConstraintKind,
    /// In the p < q regime the window-constrained value is only bounded
    /// above by the block formula.
    pub exact: bool,
}

fn check_natural_monotone(psi: &PsiSystem) -> Result<()> {
    match psi.kind() {
        SystemKind::ScalarRule(rule) => {
            if rule.is_unit() {
                Err(Error::NonDecayingSystem(
                    "position-constrained formulas need moduli decreasing to zero".into(),
                ))
            } else {
                Ok(())
            }
        }
        SystemKind::Table(entries) => {
            let mut prev = f64::INFINITY;
            for (pos, (ix, v)) in entries.iter().enumerate() {
                match ix {
                    Index::Scalar(k) if *k == pos as u64 + 1 => {}
                    _ => {
                        return Err(Error::UnsupportedFamily(
                            "position-constrained formulas need a scalar table on positions 1..T"
                                .into(),
                        ))
                    }
                }
                let m = v.norm();
                if m == 0.0 {
                    return Err(Error::ZeroEntry(
                        "position-constrained formulas need nonzero entries".into(),
                    ));
                }
                if m > prev {
                    return Err(Error::NonMonotoneSystem(
                        "position-constrained formulas need non-increasing moduli".into(),
                    ));
                }
                prev = m;
            }
            Ok(())
        }
        _ => Err(Error::UnsupportedFamily(
            "position-constrained formulas need a linearly ordered scalar system".into(),
        )),
    }
}

pub fn constrained_nterm(
    psi: &PsiSystem,
    n: u64,
    p: f64,
    q: f64,
    kind: ConstraintKind,
) -> Result<ConstrainedNTerm> {
    let regime = validate_pq(p, q)?;
    if n == 0 {
        return Err(Error::InvalidParameter("term count n must be at least 1".into()));
    }
    check_natural_monotone(psi)?;
    match regime {
        Regime::QLeP => constrained_qlep(psi, n, p, q, kind),
        Regime::PLtQ => constrained_pltq(psi, n, p, q, kind),
    }
}

/// q <= p: both constraint families share the exact value
/// sup_{s>1} (s-1)^{1/p} (sum_{k<=s} r_{(k-1)n+1}^{-q})^{-1/q}.
fn constrained_qlep(
    psi: &PsiSystem,
    n: u64,
    p: f64,
    q: f64,
    kind: ConstraintKind,
) -> Result<ConstrainedNTerm> {
    let mut cache = RankCache::new(psi);
    let mut a = Kahan::new();
    let mut best = f64::NEG_INFINITY;
    let mut s_best = 0u64;
    let mut s = 0u64;
    loop {
        s += 1;
        if s > SCAN_CAP {
            return Err(Error::NoFiniteSup("block scan exceeded its cap".into()));
        }
        let pos = (s - 1) * n + 1;
        let lead = match cache.get(pos)? {
            Some(v) => v,
            None => break,
        };
        a.add(lead.powf(-q));
        if s > 1 {
            let f = ((s - 1) as f64).powf(1.0 / p) * a.value().powf(-1.0 / q);
            if f > best {
                best = f;
                s_best = s;
            }
        }
        // stop once later cuts provably stay below the running maximum
        if s >= 4 && s % 2 == 0 && best > 0.0 {
            let m = s / 2;
            if let Some(r_half) = cache.get(m * n + 1)? {
                let bound =
                    (2.0 * (s as f64).powf(q / p - 1.0)).powf(1.0 / q) * r_half;
                if bound <= best {
                    break;
                }
            }
        }
    }
    if s_best == 0 {
        return Ok(ConstrainedNTerm { n, value: 0.0, regime: Regime::QLeP, s_star: 1, kind, exact: true });
    }
    Ok(ConstrainedNTerm {
        n,
        value: best,
        regime: Regime::QLeP,
        s_star: s_best,
        kind,
        exact: true,
    })
}

/// p < q: block-norm rearrangement with a balance rank over blocks. Exact
/// for aligned blocks; an upper bound for sliding windows.
fn constrained_pltq(
    psi: &PsiSystem,
    n: u64,
    p: f64,
    q: f64,
    kind: ConstraintKind,
) -> Result<ConstrainedNTerm> {
    let beta = beta_exponent(p, q)?;
    let finite = matches!(psi.kind(), SystemKind::Table(_));
    if !finite {
        rearranged_power_tail(psi, beta, 0, TAIL_REL_TOL)?;
    }
    let mut cache = RankCache::new(psi);
    // block norm b_k = (sum over block k of r_i^beta)^(1/beta); zero once
    // the support is exhausted
    let block = |k: u64, cache: &mut RankCache| -> Result<Option<f64>> {
        let mut sum = Kahan::new();
        let mut any = false;
        for i in (k - 1) * n + 1..=k * n {
            match cache.get(i)? {
                Some(v) => {
                    any = true;
                    sum.add(v.powf(beta));
                }
                None => break,
            }
        }
        Ok(if any { Some(sum.value().powf(1.0 / beta)) } else { None })
    };
    let mut a = Kahan::new();
    let first = match block(1, &mut cache)? {
        Some(b) => b,
        None => {
            return Ok(ConstrainedNTerm {
                n,
                value: 0.0,
                regime: Regime::PLtQ,
                s_star: 1,
                kind,
                exact: kind == ConstraintKind::Blocks,
            })
        }
    };
    a.add(first.powf(-q));
    let mut s = 1u64;
    loop {
        s += 1;
        if s > SCAN_CAP {
            return Err(Error::NoFiniteSup("block balance scan exceeded its cap".into()));
        }
        let cur = match block(s, &mut cache)? {
            Some(b) => b,
            None => {
                return Err(Error::NoFiniteSup(
                    "no balance rank found among the blocks of the finite system".into(),
                ))
            }
        };
        a.add(cur.powf(-q));
        let avg = a.value() / (s - 1) as f64;
        let left = cur.powf(-q) <= avg;
        let right = match block(s + 1, &mut cache)? {
            Some(next) => avg < next.powf(-q),
            None => true,
        };
        if left && right {
            let head = ((s - 1) as f64).powf(q / (q - p)) * a.value().powf(-p / (q - p));
            let tail = match rearranged_power_tail(psi, beta, s * n, TAIL_REL_TOL) {
                Ok(t) => t,
                Err(Error::BudgetExceeded { .. }) if finite => 0.0,
                Err(e) => return Err(e),
            };
            return Ok(ConstrainedNTerm {
                n,
                value: (head + tail).powf(1.0 / beta),
                regime: Regime::PLtQ,
                s_star: s,
                kind,
                exact: kind == ConstraintKind::Blocks,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psi::PsiSystem;
    use crate::rules::DecayRule;

    fn geometric(count: usize) -> PsiSystem {
        let vals: Vec<f64> = (1..=count).map(|k| 0.5f64.powi(k as i32)).collect();
        PsiSystem::scalar_table(&vals).unwrap()
    }

    #[test]
    fn gamma_error_peak_regime() {
        let psi = geometric(6);
        let gamma = IndexSet::explicit(vec![Index::Scalar(1), Index::Scalar(3)]);
        let res = gamma_excluded_error(&psi, &gamma, 2.0, 1.0).unwrap();
        assert_eq!(res.regime, Regime::QLeP);
        assert!((res.value - 0.25).abs() < 1e-15);
        assert_eq!(res.witness, Some(Index::Scalar(2)));
    }

    #[test]
    fn gamma_error_spread_regime_matches_frozen_value() {
        // geometric system, p=1, q=2, gamma = {top mode}: value = 1/(2 sqrt 3)
        let psi = PsiSystem::scalar_rule(DecayRule::Exp {
            lambda: std::f64::consts::LN_2,
            s: 1.0,
            a: 0.0,
        })
        .unwrap();
        let gamma = IndexSet::explicit(vec![Index::Scalar(1)]);
        let res = gamma_excluded_error(&psi, &gamma, 1.0, 2.0).unwrap();
        let expect = 1.0 / (2.0 * 3f64.sqrt());
        assert!((res.value - expect).abs() < 1e-12, "got {} expect {expect}", res.value);
    }

    #[test]
    fn width_peak_is_next_rank_and_witnessed() {
        let psi = geometric(6);
        let w = best_subspace_width(&psi, 2, 3.0, 3.0).unwrap();
        assert!((w.value - 0.125).abs() < 1e-15);
        assert_eq!(w.witness, vec![Index::Scalar(1), Index::Scalar(2)]);
        // the witness set attains the width
        let again =
            gamma_excluded_error(&psi, &IndexSet::explicit(w.witness.clone()), 3.0, 3.0).unwrap();
        assert!((again.value - w.value).abs() < 1e-15);
    }

    #[test]
    fn width_spread_matches_closed_form() {
        // 2^-k, p=1, q=2: beta=2, width_n = (sum_{k>n} 4^-k)^(1/2)
        let psi = PsiSystem::scalar_rule(DecayRule::Exp {
            lambda: std::f64::consts::LN_2,
            s: 1.0,
            a: 0.0,
        })
        .unwrap();
        let w = best_subspace_width(&psi, 3, 1.0, 2.0).unwrap();
        let expect = (4f64.powi(-4) / (1.0 - 0.25)).sqrt();
        assert!((w.value - expect).abs() < 1e-12);
    }

    #[test]
    fn plateau_rows_partition_ranks() {
        let psi = PsiSystem::scalar_table(&[1.0, 1.0, 0.5, 0.5, 0.5, 0.25]).unwrap();
        let rows = kolmogorov_plateaus(&psi, 2.0, 10).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].m_lo, rows[0].m_hi), (0, 1));
        assert_eq!((rows[1].m_lo, rows[1].m_hi), (2, 4));
        assert_eq!((rows[2].m_lo, rows[2].m_hi), (5, 5));
        assert_eq!(rows[1].value, 0.5);
    }

    #[test]
    fn level_projection_error_both_regimes() {
        let psi = PsiSystem::scalar_table(&[1.0, 0.5, 0.5, 0.25]).unwrap();
        // peak regime: second level value
        assert!((level_projection_error(&psi, 2, 2.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        // spread regime: skip first level (1 rank), beta = 2
        let got = level_projection_error(&psi, 2, 1.0, 2.0).unwrap();
        let expect = (0.25f64 + 0.25 + 0.0625).sqrt();
        assert!((got - expect).abs() < 1e-14, "got {got} expect {expect}");
    }

    #[test]
    fn nterm_qlep_frozen_value() {
        // 2^-k, p=q=1, n=1: F(s) = (s-1)/(2^{s+1}-2), max 1/6 at s=2
        let psi = geometric(12);
        let res = nterm(&psi, 1, 1.0, 1.0).unwrap();
        assert_eq!(res.s_star, Some(2));
        assert!((res.value - 1.0 / 6.0).abs() < 1e-13, "got {}", res.value);
    }

    #[test]
    fn nterm_qlep_matches_exhaustive_scan() {
        let vals: Vec<f64> = (1..=40).map(|k| (k as f64).powf(-1.3)).collect();
        let psi = PsiSystem::scalar_table(&vals).unwrap();
        let (p, q, n) = (2.0, 1.5, 3u64);
        let res = nterm(&psi, n, p, q).unwrap();
        // brute force over every admissible cut
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        let mut a = 0.0;
        for (k, v) in vals.iter().enumerate() {
            a += v.powf(-q);
            let s = (k + 1) as u64;
            if s > n {
                let f = (s - n) as f64 * a.powf(-p / q);
                if f > best {
                    best = f;
                    arg = s;
                }
            }
        }
        assert_eq!(res.s_star, Some(arg));
        assert!((res.value - best.powf(1.0 / p)).abs() < 1e-12 * res.value);
    }

    #[test]
    fn nterm_qlep_infinite_scan_certifies() {
        let psi = PsiSystem::scalar_rule(DecayRule::Power { r: 1.0 }).unwrap();
        let res = nterm(&psi, 4, 2.0, 1.0).unwrap();
        // independent long scan well past the certified stop
        let mut a = 0.0;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u64;
        for s in 1..=100_000u64 {
            a += s as f64; // (k^-1)^-1 = k
            if s > 4 {
                let f = (s - 4) as f64 * a.powf(-2.0);
                if f > best {
                    best = f;
                    arg = s;
                }
            }
        }
        assert_eq!(res.s_star, Some(arg));
        assert!((res.value - best.sqrt()).abs() < 1e-12 * res.value);
    }

    #[test]
    fn nterm_unit_scan_argmax() {
        let unit = PsiSystem::scalar_rule(DecayRule::Unit).unwrap();
        let res = nterm(&unit, 1, 1.0, 1.0).unwrap();
        assert_eq!(res.value, 1.0);
        assert!(!res.attained);
        let res = nterm(&unit, 10, 2.0, 1.0).unwrap();
        // floor(n / (1 - q/p)) = floor(10 / 0.5) = 20
        assert!(res.s_star == Some(20) || res.s_star == Some(21));
        assert!(matches!(nterm(&unit, 3, 1.0, 2.0), Err(Error::NoFiniteSup(_))));
    }

    #[test]
    fn nterm_pltq_balance_rank() {
        // r = [1, 1, 1, 1e-4], p=1, q=2: balance at s=3
        let psi = PsiSystem::scalar_table(&[1.0, 1.0, 1.0, 1e-4]).unwrap();
        let res = nterm(&psi, 1, 1.0, 2.0).unwrap();
        assert_eq!(res.s_star, Some(3));
        let expect = (4.0f64 / 3.0 + 1e-8).sqrt();
        assert!((res.value - expect).abs() < 1e-12, "got {}", res.value);
    }

    #[test]
    fn nterm_pltq_infinite_system() {
        let psi = PsiSystem::scalar_rule(DecayRule::Exp {
            lambda: std::f64::consts::LN_2,
            s: 1.0,
            a: 0.0,
        })
        .unwrap();
        let res = nterm(&psi, 2, 1.0, 2.0).unwrap();
        // verify the balance condition at the reported rank by hand
        let s = res.s_star.unwrap();
        let a: f64 = (1..=s).map(|k| 4f64.powi(k as i32)).sum();
        let avg = a / (s - 2) as f64;
        assert!(4f64.powi(s as i32) <= avg && avg < 4f64.powi(s as i32 + 1));
        // and the value against a long direct sum
        let head = ((s - 2) as f64).powf(2.0) * a.powf(-1.0);
        let tail: f64 = (s + 1..s + 300).map(|k| 4f64.powi(-(k as i32))).sum();
        let expect = (head + tail).sqrt();
        assert!((res.value - expect).abs() < 1e-12, "got {} expect {expect}", res.value);
    }

    #[test]
    fn constrained_blocks_peak_regime() {
        // positions 1..8, moduli 2^-k, n=2: leads at positions 1,3,5,7
        let psi = geometric(8);
        let res = constrained_nterm(&psi, 2, 1.0, 1.0, ConstraintKind::Blocks).unwrap();
        let mut best = f64::NEG_INFINITY;
        let mut a = 0.0;
        for s in 1..=4u64 {
            a += 2f64.powi((2 * (s - 1) + 1) as i32);
            if s > 1 {
                best = best.max(((s - 1) as f64) / a);
            }
        }
        assert!((res.value - best).abs() < 1e-13, "got {} expect {best}", res.value);
        assert!(res.exact);
    }

    #[test]
    fn constrained_rejects_unordered_input() {
        let psi = PsiSystem::scalar_table(&[0.5, 1.0]).unwrap();
        assert!(matches!(
            constrained_nterm(&psi, 1, 1.0, 1.0, ConstraintKind::Blocks),
            Err(Error::NonMonotoneSystem(_))
        ));
        let unit = PsiSystem::scalar_rule(DecayRule::Unit).unwrap();
        assert!(matches!(
            constrained_nterm(&unit, 1, 1.0, 1.0, ConstraintKind::Blocks),
            Err(Error::NonDecayingSystem(_))
        ));
        let lattice =
            PsiSystem::radial(DecayRule::Power { r: 1.0 }, crate::index::NormExponent::Infinity, 2)
                .unwrap();
        assert!(matches!(
            constrained_nterm(&lattice, 1, 1.0, 1.0, ConstraintKind::Blocks),
            Err(Error::UnsupportedFamily(_))
        ));
    }

    #[test]
    fn constrained_blocks_spread_regime() {
        let psi = PsiSystem::scalar_rule(DecayRule::Exp {
            lambda: std::f64::consts::LN_2,
            s: 1.0,
            a: 0.0,
        })
        .unwrap();
        let n = 2u64;
        let (p, q) = (1.0, 2.0);
        let res = constrained_nterm(&psi, n, p, q, ConstraintKind::Blocks).unwrap();
        assert!(res.exact);
        // block norms with beta = 2: b_k = (4^{-(2k-1)} + 4^{-2k})^{1/2}
        let b = |k: u64| (4f64.powi(-(2 * k as i32 - 1)) + 4f64.powi(-2 * k as i32)).sqrt();
        let s = res.s_star;
        let a: f64 = (1..=s).map(|k| b(k).powi(-2)).sum();
        let head = ((s - 1) as f64).powi(2) / a;
        let tail: f64 = (2 * s + 1..2 * s + 400).map(|i| 4f64.powi(-(i as i32))).sum();
        let expect = (head + tail).sqrt();
        assert!((res.value - expect).abs() < 1e-11, "got {} expect {expect}", res.value);
        // windows variant returns the same number flagged as a bound
        let win = constrained_nterm(&psi, n, p, q, ConstraintKind::Windows).unwrap();
        assert_eq!(win.value, res.value);
        assert!(!win.exact);
    }
}
