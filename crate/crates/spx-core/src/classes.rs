//! Decay-speed classification of convex profile functions and the order
//! expressions the classes select for n-term errors and widths.
//!
//! A profile is sorted by the behaviour of its half-value gap: eta(t) is
//! the point where the profile halves, and mu(t) = t / (eta(t) - t)
//! measures how fast that gap closes relative to t. Bounded mu means
//! polynomial-like decay; mu growing without bound means the profile
//! halves on an ever-shorter relative scale. The unbounded case is
//! subdivided by the decay length rho(t) = psi(t)/|psi'(t)| and its
//! normalization alpha(t) = rho(t)/t.
//!
//! All labels are evidence over a finite grid window, not proofs of
//! asymptotic membership; every label carries the numeric evidence it
//! was derived from.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::index::NormExponent;
use crate::rules::DecayRule;
use crate::tails::l1_ball_count;

/// mu maximum above this stops counting as bounded.
const MU_UPPER: f64 = 1e3;
/// mu minimum below this stops counting as bounded away from zero.
const MU_LOWER: f64 = 1e-3;
/// Kendall pair agreement needed to call a grid sequence monotone.
const TREND_AGREEMENT: f64 = 0.95;
/// Factor a monotone quantity must cover on the window before it is
/// treated as genuinely unbounded rather than drifting to a limit.
const GROWTH_RATIO: f64 = 10.0;
/// Doubling constant psi(t)/psi(2t) above this fails the doubling test.
const DOUBLING_CAP: f64 = 1e3;
/// Relative tolerance of the half-value root.
const ETA_REL_TOL: f64 = 1e-12;
/// Upper end of the bracket search for the half-value point.
const BRACKET_CAP: f64 = 1e18;
/// Work guard for exhaustive lattice counting.
const COUNT_BUDGET: f64 = 2e8;
/// Point budget for estimating the ball-volume coefficient.
const COEFFICIENT_POINTS: f64 = 2e7;

#[derive(Clone, Debug)]
enum DecaySource {
    Rule(DecayRule),
    /// Piecewise-linear knots (t, value), t strictly increasing.
    Table(Vec<(f64, f64)>),
}

/// Positive decay profile on [1, inf): a closed-form rule family or a
/// sampled table. Rules evaluate on a log scale where the family allows
/// it, so profiles like exp(-t^2) stay usable far past the point where
/// their values underflow.
#[derive(Clone, Debug)]
pub struct ConvexDecayFunction {
    source: DecaySource,
}

impl ConvexDecayFunction {
    pub fn from_rule(rule: DecayRule) -> Result<Self> {
        rule.validate()?;
        if rule.is_unit() {
            return Err(Error::InvalidParameter(
                "unit rule does not decay and has no speed class".into(),
            ));
        }
        Ok(Self { source: DecaySource::Rule(rule) })
    }

    /// Piecewise-linear profile; knots must start at t <= 1, be strictly
    /// increasing in t, and carry positive non-increasing values.
    pub fn from_table(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 3 {
            return Err(Error::InvalidParameter("table profile needs at least 3 knots".into()));
        }
        if knots[0].0 > 1.0 {
            return Err(Error::InvalidParameter("table profile must cover t = 1".into()));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidParameter("table knots must strictly increase in t".into()));
            }
            if !(w[1].1 <= w[0].1) {
                return Err(Error::InvalidParameter("table values must be non-increasing".into()));
            }
        }
        if knots.iter().any(|&(_, v)| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("table values must be positive and finite".into()));
        }
        Ok(Self { source: DecaySource::Table(knots) })
    }

    pub fn family_name(&self) -> &'static str {
        match &self.source {
            DecaySource::Rule(DecayRule::Power { .. }) => "power",
            DecaySource::Rule(DecayRule::PowerLog { .. }) => "power-log",
            DecaySource::Rule(DecayRule::Log { .. }) => "log",
            DecaySource::Rule(DecayRule::Exp { .. }) => "exp",
            DecaySource::Rule(DecayRule::Unit) => "unit",
            DecaySource::Table(_) => "table",
        }
    }

    /// Largest argument the profile can be evaluated at.
    pub fn domain_end(&self) -> f64 {
        match &self.source {
            DecaySource::Rule(_) => f64::INFINITY,
            DecaySource::Table(knots) => knots.last().unwrap().0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.source {
            DecaySource::Rule(rule) => rule.value(t),
            DecaySource::Table(knots) => table_at(knots, t),
        }
    }

    /// ln psi(t), analytic per family so fast decay never underflows.
    pub fn ln_value(&self, t: f64) -> f64 {
        match &self.source {
            DecaySource::Rule(rule) => match *rule {
                DecayRule::Power { r } => -r * t.ln(),
                DecayRule::PowerLog { r, eps, a } => -r * t.ln() + eps * (t + a).ln().ln(),
                DecayRule::Log { r, a } => -r * (t + a).ln().ln(),
                DecayRule::Exp { lambda, s, a } => -lambda * (t + a).powf(s),
                DecayRule::Unit => 0.0,
            },
            DecaySource::Table(knots) => table_at(knots, t).ln(),
        }
    }

    /// Logarithmic decay rate |psi'|/psi = -(ln psi)', the reciprocal of
    /// the decay length. Table profiles use the right-segment slope.
    pub fn decay_rate(&self, t: f64) -> f64 {
        match &self.source {
            DecaySource::Rule(rule) => match *rule {
                DecayRule::Power { r } => r / t,
                DecayRule::PowerLog { r, eps, a } => r / t - eps / ((t + a) * (t + a).ln()),
                DecayRule::Log { r, a } => r / ((t + a) * (t + a).ln()),
                DecayRule::Exp { lambda, s, a } => lambda * s * (t + a).powf(s - 1.0),
                DecayRule::Unit => 0.0,
            },
            DecaySource::Table(knots) => {
                let i = segment_index(knots, t);
                let (t0, v0) = knots[i];
                let (t1, v1) = knots[i + 1];
                (v0.ln() - v1.ln()) / (t1 - t0)
            }
        }
    }

    /// Right derivative; analytic for rules, forward difference (the
    /// right-segment slope) for tables. Underflows along with the value
    /// for very fast decay; `decay_rate` is the stable alternative.
    pub fn derivative(&self, t: f64) -> f64 {
        match &self.source {
            DecaySource::Rule(rule) => rule.derivative(t),
            DecaySource::Table(knots) => {
                let i = segment_index(knots, t);
                let (t0, v0) = knots[i];
                let (t1, v1) = knots[i + 1];
                (v1 - v0) / (t1 - t0)
            }
        }
    }

    /// Pointwise power psi^e; every rule family is closed under positive
    /// powers so the result stays in closed form.
    pub fn pow(&self, e: f64) -> Result<Self> {
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::InvalidParameter(format!("profile power must be positive, got {e}")));
        }
        let source = match &self.source {
            DecaySource::Rule(rule) => DecaySource::Rule(match *rule {
                DecayRule::Power { r } => DecayRule::Power { r: r * e },
                DecayRule::PowerLog { r, eps, a } => {
                    DecayRule::PowerLog { r: r * e, eps: eps * e, a }
                }
                DecayRule::Log { r, a } => DecayRule::Log { r: r * e, a },
                DecayRule::Exp { lambda, s, a } => DecayRule::Exp { lambda: lambda * e, s, a },
                DecayRule::Unit => DecayRule::Unit,
            }),
            DecaySource::Table(knots) => {
                DecaySource::Table(knots.iter().map(|&(t, v)| (t, v.powf(e))).collect())
            }
        };
        Ok(Self { source })
    }
}

fn segment_index(knots: &[(f64, f64)], t: f64) -> usize {
    let n = knots.len();
    let i = knots.partition_point(|&(tk, _)| tk <= t);
    i.clamp(1, n - 1) - 1
}

fn table_at(knots: &[(f64, f64)], t: f64) -> f64 {
    if t <= knots[0].0 {
        return knots[0].1;
    }
    let last = knots.len() - 1;
    if t >= knots[last].0 {
        return knots[last].1;
    }
    let i = segment_index(knots, t);
    let (t0, v0) = knots[i];
    let (t1, v1) = knots[i + 1];
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

/// Point eta where the profile reaches half its value at t, solved by
/// bracketed bisection on the log scale to 1e-12 relative accuracy.
pub fn half_value_point(psi: &ConvexDecayFunction, t: f64) -> Result<f64> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("half-value point needs t >= 1, got {t}")));
    }
    let lv = psi.ln_value(t);
    if !lv.is_finite() {
        return Err(Error::RootBracketFailure(format!("profile is not positive finite at t = {t}")));
    }
    let target = lv - LN_2;
    let cap = BRACKET_CAP.min(psi.domain_end());
    let mut lo = t;
    let mut hi = 2.0 * t;
    while psi.ln_value(hi) > target {
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::RootBracketFailure(format!(
                "profile never halves between t = {t} and {cap}"
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= ETA_REL_TOL * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi.ln_value(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Half-value characteristics of a profile at one argument.
#[derive(Clone, Copy, Debug)]
pub struct Characteristics {
    /// Half-value point: psi(eta) = psi(t)/2.
    pub eta: f64,
    /// t / (eta - t); bounded for polynomial-like decay.
    pub mu: f64,
    /// psi / (t |psi'|), the decay length relative to t.
    pub alpha: f64,
    /// psi / |psi'|, the absolute decay length.
    pub rho: f64,
}

pub fn characteristics(psi: &ConvexDecayFunction, t: f64) -> Result<Characteristics> {
    let eta = half_value_point(psi, t)?;
    let rate = psi.decay_rate(t);
    if !(rate > 0.0) {
        return Err(Error::RootBracketFailure(format!(
            "profile is not strictly decreasing at t = {t}"
        )));
    }
    let gap = (eta - t).max(f64::MIN_POSITIVE);
    Ok(Characteristics { eta, mu: t / gap, alpha: 1.0 / (t * rate), rho: 1.0 / rate })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Increasing,
    Decreasing,
    Flat,
}

/// Range and Kendall pair statistics of a quantity over the grid.
#[derive(Clone, Copy, Debug)]
pub struct TrendSummary {
    pub min: f64,
    pub max: f64,
    /// (concordant - discordant) / comparable pairs, in [-1, 1].
    pub agreement: f64,
    pub trend: Trend,
}

fn trend_summary(vals: &[f64]) -> TrendSummary {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in vals {
        min = min.min(v);
        max = max.max(v);
    }
    let mut conc = 0u64;
    let mut disc = 0u64;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            if vals[j] > vals[i] {
                conc += 1;
            } else if vals[j] < vals[i] {
                disc += 1;
            }
        }
    }
    let pairs = conc + disc;
    let agreement = if pairs == 0 { 0.0 } else { (conc as f64 - disc as f64) / pairs as f64 };
    let trend = if pairs > 0 && conc as f64 >= TREND_AGREEMENT * pairs as f64 {
        Trend::Increasing
    } else if pairs > 0 && disc as f64 >= TREND_AGREEMENT * pairs as f64 {
        Trend::Decreasing
    } else {
        Trend::Flat
    };
    TrendSummary { min, max, agreement, trend }
}

/// Speed classes. The first five mirror the standard classification of
/// convex decay profiles; `BOnly` keeps the doubling property without
/// convexity; `Indeterminate` records that the window evidence selects
/// no class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecayClass {
    /// mu bounded above: slow decay with the doubling property.
    M0,
    /// mu bounded above and below: power-like decay.
    MC,
    /// mu unbounded, decay length rho unbounded: stretched decay.
    MPrimeInf,
    /// mu unbounded, rho bounded: plain exponential decay.
    McInf,
    /// mu unbounded, rho shrinking to zero: super-exponential decay.
    MDoublePrimeInf,
    /// Doubling holds but convexity fails on the window.
    BOnly,
    Indeterminate,
}

impl DecayClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayClass::M0 => "M0",
            DecayClass::MC => "MC",
            DecayClass::MPrimeInf => "M'inf",
            DecayClass::McInf => "Mc-inf",
            DecayClass::MDoublePrimeInf => "M''inf",
            DecayClass::BOnly => "B-only",
            DecayClass::Indeterminate => "indeterminate",
        }
    }
}

/// Classification verdict with the evidence that produced it.
#[derive(Clone, Debug)]
pub struct ClassLabel {
    pub class: DecayClass,
    pub mu: TrendSummary,
    pub alpha: TrendSummary,
    pub rho: TrendSummary,
    /// Largest observed psi(t)/psi(2t) (saturates at f64::MAX).
    pub doubling_constant: f64,
    pub doubling_holds: bool,
    pub convex: bool,
    pub decreasing: bool,
}

/// Geometric grid on [1, t_max] for classification evidence.
pub fn classification_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max >= 1e3 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "classification window must extend to at least 1e3, got {t_max}"
        )));
    }
    if points < 16 {
        return Err(Error::InvalidParameter("classification grid needs at least 16 points".into()));
    }
    let g = points - 1;
    let mut grid: Vec<f64> = (0..=g).map(|i| t_max.powf(i as f64 / g as f64)).collect();
    grid[0] = 1.0;
    grid[g] = t_max;
    Ok(grid)
}

pub fn default_classification_grid() -> Vec<f64> {
    classification_grid(4096.0, 257).expect("static parameters are valid")
}

fn empty_summary() -> TrendSummary {
    TrendSummary { min: 0.0, max: 0.0, agreement: 0.0, trend: Trend::Flat }
}

/// Midpoint convexity check of consecutive grid pairs; pairs whose
/// values have already underflowed carry no evidence and are skipped.
fn convex_on(psi: &ConvexDecayFunction, pts: &[f64]) -> bool {
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let va = psi.value(a);
        let vb = psi.value(b);
        if va < 1e-280 {
            continue;
        }
        let vm = psi.value(0.5 * (a + b));
        if va + vb - 2.0 * vm < -1e-9 * va {
            return false;
        }
    }
    true
}

/// Sort a profile into a speed class from grid evidence. The grid must
/// span [1, T] with T >= 1e3. Indeterminate is a valid outcome, not an
/// error; per-point characteristic failures downgrade to it.
pub fn classify(psi: &ConvexDecayFunction, grid: &[f64]) -> Result<ClassLabel> {
    if grid.len() < 16 {
        return Err(Error::InvalidParameter("classification grid needs at least 16 points".into()));
    }
    if !(grid[0] >= 1.0 && grid[0] <= 2.0) {
        return Err(Error::InvalidParameter("classification grid must start at t = 1".into()));
    }
    let t_end = *grid.last().unwrap();
    if t_end < 1e3 {
        return Err(Error::InvalidParameter("classification window must extend to at least 1e3".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("classification grid must strictly increase".into()));
    }

    let lnv: Vec<f64> = grid.iter().map(|&t| psi.ln_value(t)).collect();
    let positive = lnv.iter().all(|v| v.is_finite());
    let decreasing = positive && lnv.windows(2).all(|w| w[1] < w[0] + 1e-12);
    // window evidence of decay to zero: at least one halving overall
    let decays = decreasing && lnv[lnv.len() - 1] <= lnv[0] - LN_2;

    // doubling constant on the part of the grid where 2t stays inside
    let mut ln_doubling = f64::NEG_INFINITY;
    for (i, &t) in grid.iter().enumerate() {
        if 2.0 * t > t_end {
            break;
        }
        ln_doubling = ln_doubling.max(lnv[i] - psi.ln_value(2.0 * t));
    }
    let doubling_constant = ln_doubling.exp().min(f64::MAX);
    let doubling_holds = decays && doubling_constant <= DOUBLING_CAP;

    let convex = positive && convex_on(psi, grid);

    let mut mu_vals = Vec::with_capacity(grid.len());
    let mut alpha_vals = Vec::with_capacity(grid.len());
    let mut rho_vals = Vec::with_capacity(grid.len());
    let mut evidence_complete = decreasing && decays;
    if evidence_complete {
        for &t in grid {
            match characteristics(psi, t) {
                Ok(c) => {
                    mu_vals.push(c.mu);
                    alpha_vals.push(c.alpha);
                    rho_vals.push(c.rho);
                }
                Err(_) => {
                    evidence_complete = false;
                    break;
                }
            }
        }
    }
    let (mu, alpha, rho) = if mu_vals.len() >= 8 {
        (trend_summary(&mu_vals), trend_summary(&alpha_vals), trend_summary(&rho_vals))
    } else {
        (empty_summary(), empty_summary(), empty_summary())
    };

    let class = if !evidence_complete || mu_vals.len() < 8 {
        if decays && doubling_holds && !convex {
            DecayClass::BOnly
        } else {
            DecayClass::Indeterminate
        }
    } else if !convex {
        if doubling_holds {
            DecayClass::BOnly
        } else {
            DecayClass::Indeterminate
        }
    } else {
        let escapes =
            mu.trend == Trend::Increasing && mu.max >= GROWTH_RATIO * mu.min && mu.min > 0.0;
        if escapes {
            let rho_up = rho.trend == Trend::Increasing && rho.max >= GROWTH_RATIO * rho.min;
            let rho_down = rho.trend == Trend::Decreasing && rho.max >= GROWTH_RATIO * rho.min;
            let alpha_down = alpha.trend == Trend::Decreasing;
            if rho_down {
                DecayClass::MDoublePrimeInf
            } else if alpha_down && rho_up {
                DecayClass::MPrimeInf
            } else if alpha_down && !rho_up {
                DecayClass::McInf
            } else {
                DecayClass::Indeterminate
            }
        } else if mu.max <= MU_UPPER && mu.min >= MU_LOWER {
            DecayClass::MC
        } else if mu.max <= MU_UPPER {
            DecayClass::M0
        } else {
            DecayClass::Indeterminate
        }
    };

    Ok(ClassLabel { class, mu, alpha, rho, doubling_constant, doubling_holds, convex, decreasing })
}

/// Number of lattice points in Z^d with |k|_r <= m.
pub fn lattice_count(d: usize, r: NormExponent, m: u64) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("lattice dimension must be at least 1".into()));
    }
    r.validate()?;
    // every |k|_r reduces to |k| in one dimension
    if d == 1 {
        return Ok(2.0 * m as f64 + 1.0);
    }
    match r {
        NormExponent::Infinity => Ok((2.0 * m as f64 + 1.0).powi(d as i32)),
        NormExponent::Finite(rf) if rf == 1.0 => Ok(l1_ball_count(d, m)),
        NormExponent::Finite(rf) => {
            let est = (2.0 * m as f64 + 1.0).powi(d as i32);
            if est > COUNT_BUDGET {
                return Err(Error::BudgetExceeded {
                    budget: COUNT_BUDGET as usize,
                    context: format!("lattice count d={d} r={rf} m={m}"),
                });
            }
            let budget = (m as f64).powf(rf);
            let tol = 1e-9 * (budget + 1.0);
            Ok(count_ball(d, budget + tol, rf))
        }
    }
}

fn count_ball(d: usize, budget: f64, r: f64) -> f64 {
    if budget < 0.0 {
        return 0.0;
    }
    if d == 0 {
        return 1.0;
    }
    let mut kmax = budget.powf(1.0 / r).floor() as u64;
    while kmax > 0 && (kmax as f64).powf(r) > budget {
        kmax -= 1;
    }
    let mut total = count_ball(d - 1, budget, r);
    for k in 1..=kmax {
        total += 2.0 * count_ball(d - 1, budget - (k as f64).powf(r), r);
    }
    total
}

/// Shell index m with V_{m-1} <= n < V_m, where V is the lattice count.
pub fn locate_shell(d: usize, r: NormExponent, n: u64) -> Result<u64> {
    if n < 1 {
        return Err(Error::InvalidParameter("shell location needs n >= 1".into()));
    }
    // smallest m with V_m > n, found by doubling then bisection
    let mut hi = 1u64;
    while lattice_count(d, r, hi)? <= n as f64 {
        hi = hi.checked_mul(2).ok_or_else(|| Error::Overflow("shell search".into()))?;
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if lattice_count(d, r, mid)? <= n as f64 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Leading coefficient of V_m ~ M m^d: exact for r in {1, inf} and for
/// d = 1, otherwise estimated as V_m / m^d at the largest affordable m.
pub fn ball_volume_coefficient(d: usize, r: NormExponent) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidParameter("lattice dimension must be at least 1".into()));
    }
    if d == 1 {
        return Ok(2.0);
    }
    match r {
        NormExponent::Infinity => Ok(2f64.powi(d as i32)),
        NormExponent::Finite(rf) if rf == 1.0 => {
            let mut fact = 1.0;
            for i in 2..=d {
                fact *= i as f64;
            }
            Ok(2f64.powi(d as i32) / fact)
        }
        NormExponent::Finite(_) => {
            let m = (((COEFFICIENT_POINTS.powf(1.0 / d as f64) - 1.0) / 2.0).floor() as u64).max(8);
            let v = lattice_count(d, r, m)?;
            Ok(v / (m as f64).powi(d as i32))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderKind {
    NTerm,
    Width,
}

/// Index geometry the order expression refers to: a scalar sequence
/// ranked 1, 2, ... or a radial lattice profile over Z^d shells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OrderSetting {
    Scalar,
    Radial { d: usize, r: NormExponent },
}

/// Evaluated order expression. `exact` marks the one branch that is an
/// equality rather than a two-sided order bound.
#[derive(Clone, Debug)]
pub struct OrderValue {
    pub value: f64,
    pub exact: bool,
    /// Short tag of the branch that produced the value.
    pub branch: &'static str,
    /// Class of psi^p the dispatch was based on.
    pub class: DecayClass,
    /// Shell index m when the expression is shell-positional.
    pub shell: Option<u64>,
}

// Floor of the decay strength t |psi'| / psi on the window tail; the
// regular branch with p < q needs it to clear beta = d(1/p - 1/q).
fn strength_floor(psi: &ConvexDecayFunction, beta: f64, tail: &[f64]) -> Result<f64> {
    let mut k0 = f64::INFINITY;
    for &t in tail {
        k0 = k0.min(t * psi.decay_rate(t));
    }
    if !(k0 > beta) {
        return Err(Error::BranchPreconditionFailed(format!(
            "decay strength floor {k0:.6} does not exceed beta = {beta:.6}"
        )));
    }
    Ok(k0)
}

// Vanishing-ratio condition: k^{(d-1)/a} psi(k+1)/psi(k) must fall to
// zero; checked on a doubling ladder with a tenfold-drop requirement.
fn ratio_vanishes(psi: &ConvexDecayFunction, d: usize, a: f64) -> Result<()> {
    let exponent = (d as f64 - 1.0) / a;
    let mut ln_c = Vec::new();
    for j in 2..=14u32 {
        let k = (1u64 << j) as f64;
        ln_c.push(exponent * k.ln() + psi.ln_value(k + 1.0) - psi.ln_value(k));
    }
    let last = *ln_c.last().unwrap();
    let max = ln_c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tail_falling = ln_c.windows(2).rev().take(5).all(|w| w[1] < w[0]);
    if !(tail_falling && last <= max - std::f64::consts::LN_10) {
        return Err(Error::BranchPreconditionFailed(
            "shifted value ratio does not vanish on the test ladder".into(),
        ));
    }
    Ok(())
}

fn ordered_exponent(p: f64, q: f64) -> f64 {
    1.0 / p - 1.0 / q
}

/// Evaluate the order expression the profile's speed class selects for
/// the requested quantity at one n. Branch preconditions are verified
/// numerically; a profile whose evidence fits no branch is an error.
pub fn order_formula(
    kind: OrderKind,
    setting: &OrderSetting,
    p: f64,
    q: f64,
    psi: &ConvexDecayFunction,
    n: u64,
) -> Result<OrderValue> {
    if !(p > 0.0 && p.is_finite() && q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("order formula needs 0 < p, q < inf, got p={p} q={q}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter("order formula needs n >= 1".into()));
    }
    let grid = default_classification_grid();
    let powered = psi.pow(p)?;
    let label = classify(&powered, &grid)?;
    let e = ordered_exponent(p, q);
    let nf = n as f64;

    match *setting {
        OrderSetting::Scalar => {
            if kind == OrderKind::Width && q <= p {
                // diagonal widths pick the (n+1)-th ranked value exactly
                return Ok(OrderValue {
                    value: psi.value(nf + 1.0),
                    exact: true,
                    branch: "rank-exact",
                    class: label.class,
                    shell: None,
                });
            }
            match label.class {
                DecayClass::M0 | DecayClass::MC | DecayClass::BOnly => {
                    if p < q {
                        let tail = &grid[grid.len() / 2..];
                        strength_floor(psi, e, tail)?;
                        if !convex_on(&powered, tail) {
                            return Err(Error::BranchPreconditionFailed(
                                "powered profile is not convex on the window tail".into(),
                            ));
                        }
                    }
                    Ok(OrderValue {
                        value: psi.value(nf + 1.0) * nf.powf(e),
                        exact: false,
                        branch: "regular",
                        class: label.class,
                        shell: None,
                    })
                }
                DecayClass::MPrimeInf => {
                    let eta = half_value_point(psi, nf)?;
                    Ok(OrderValue {
                        value: psi.value(nf + 1.0) * (eta - nf).powf(e),
                        exact: false,
                        branch: "half-gap",
                        class: label.class,
                        shell: None,
                    })
                }
                DecayClass::McInf | DecayClass::MDoublePrimeInf => Ok(OrderValue {
                    value: psi.value(nf + 1.0),
                    exact: false,
                    branch: "rank-flat",
                    class: label.class,
                    shell: None,
                }),
                DecayClass::Indeterminate => Err(Error::BranchPreconditionFailed(
                    "profile evidence selects no speed class".into(),
                )),
            }
        }
        OrderSetting::Radial { d, r } => {
            if d == 0 {
                return Err(Error::InvalidParameter("lattice dimension must be at least 1".into()));
            }
            let df = d as f64;
            if kind == OrderKind::Width && q <= p {
                // projection widths equal the shell value exactly for
                // any positive decreasing profile
                let m = locate_shell(d, r, n)?;
                return Ok(OrderValue {
                    value: psi.value(m as f64),
                    exact: true,
                    branch: "shell-exact",
                    class: label.class,
                    shell: Some(m),
                });
            }
            match label.class {
                DecayClass::M0 | DecayClass::MC | DecayClass::BOnly => {
                    if p < q {
                        let beta = df * e;
                        let tail = &grid[grid.len() / 2..];
                        strength_floor(psi, beta, tail)?;
                        if !convex_on(&powered, tail) {
                            return Err(Error::BranchPreconditionFailed(
                                "powered profile is not convex on the window tail".into(),
                            ));
                        }
                    }
                    Ok(OrderValue {
                        value: psi.value(nf.powf(1.0 / df)) * nf.powf(e),
                        exact: false,
                        branch: "radial-regular",
                        class: label.class,
                        shell: None,
                    })
                }
                DecayClass::MPrimeInf | DecayClass::McInf => {
                    let coeff = ball_volume_coefficient(d, r)?;
                    let m_n = (nf / coeff).powf(1.0 / df).max(1.0);
                    let alpha = 1.0 / (m_n * psi.decay_rate(m_n));
                    let factor = if kind == OrderKind::NTerm || p < q {
                        (nf * alpha).powf(e)
                    } else {
                        1.0
                    };
                    Ok(OrderValue {
                        value: psi.value(m_n) * factor,
                        exact: false,
                        branch: "critical-scale",
                        class: label.class,
                        shell: None,
                    })
                }
                DecayClass::MDoublePrimeInf => {
                    let m = locate_shell(d, r, n)?;
                    let v_m = lattice_count(d, r, m)?;
                    let v_prev = if m == 1 { 1.0 } else { lattice_count(d, r, m - 1)? };
                    let mf = m as f64;
                    match kind {
                        OrderKind::NTerm => {
                            if p < q {
                                ratio_vanishes(psi, d, p)?;
                                Ok(OrderValue {
                                    value: psi.value(mf)
                                        * (v_m - nf).powf(1.0 / p)
                                        * nf.powf((1.0 - df) / (df * q)),
                                    exact: false,
                                    branch: "shell-deficit",
                                    class: label.class,
                                    shell: Some(m),
                                })
                            } else {
                                ratio_vanishes(psi, d, q)?;
                                if nf == v_prev {
                                    Ok(OrderValue {
                                        value: psi.value(mf),
                                        exact: false,
                                        branch: "shell-edge",
                                        class: label.class,
                                        shell: Some(m),
                                    })
                                } else if q * (v_m - v_prev) >= p * (v_m - nf) {
                                    Ok(OrderValue {
                                        value: psi.value(mf)
                                            * (v_m - nf).powf(1.0 / p)
                                            * nf.powf((1.0 - df) / (df * q)),
                                        exact: false,
                                        branch: "shell-deficit",
                                        class: label.class,
                                        shell: Some(m),
                                    })
                                } else {
                                    Ok(OrderValue {
                                        value: psi.value(mf) * (nf - v_prev).powf(e),
                                        exact: false,
                                        branch: "shell-excess",
                                        class: label.class,
                                        shell: Some(m),
                                    })
                                }
                            }
                        }
                        OrderKind::Width => {
                            // q <= p handled above; here p < q
                            ratio_vanishes(psi, d, p * q / (q - p))?;
                            Ok(OrderValue {
                                value: psi.value(mf) * (v_m - nf).powf(e),
                                exact: false,
                                branch: "shell-deficit",
                                class: label.class,
                                shell: Some(m),
                            })
                        }
                    }
                }
                DecayClass::Indeterminate => Err(Error::BranchPreconditionFailed(
                    "profile evidence selects no speed class".into(),
                )),
            }
        }
    }
}

/// Extrema of exact/order ratios over a shared n range. Both inputs
/// must come from the same regime; a two-sided order claim passes when
/// both extrema sit inside the configured band.
pub fn ratio_validation(exact: &[f64], order: &[f64]) -> Result<(f64, f64)> {
    if exact.len() != order.len() || exact.is_empty() {
        return Err(Error::RegimeMismatch(format!(
            "exact and order sequences must align, got lengths {} and {}",
            exact.len(),
            order.len()
        )));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&a, &b) in exact.iter().zip(order) {
        if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
            return Err(Error::RegimeMismatch(format!(
                "ratio inputs must be positive finite, got {a} / {b}"
            )));
        }
        let ratio = a / b;
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}
