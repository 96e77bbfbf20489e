//! Index domains and finite index regions.
//!
//! Systems are indexed either by positive integers or by integer lattice
//! vectors of a fixed dimension. Regions are the finite index sets the rest
//! of the crate selects against: l1 triangles, balls in an arbitrary
//! (quasi-)norm, hyperbolic crosses, and explicit sets.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Hard cap on how many lattice points a single region enumeration may visit.
pub const ENUM_BUDGET: u64 = 200_000_000;

/// A coefficient index: a positive integer or a lattice vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Scalar(u64),
    Lattice(Vec<i64>),
}

impl Index {
    pub fn dim(&self) -> usize {
        match self {
            Index::Scalar(_) => 1,
            Index::Lattice(v) => v.len(),
        }
    }

    /// l1 norm for lattice indices, the value itself for scalar ones.
    pub fn l1(&self) -> u64 {
        match self {
            Index::Scalar(k) => *k,
            Index::Lattice(v) => v.iter().map(|x| x.unsigned_abs()).sum(),
        }
    }

    /// Sum of the coordinates (the frequency a diagonal shift sees).
    pub fn coord_sum(&self) -> i64 {
        match self {
            Index::Scalar(k) => *k as i64,
            Index::Lattice(v) => v.iter().sum(),
        }
    }
}

impl PartialOrd for Index {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Index {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Index::Scalar(a), Index::Scalar(b)) => a.cmp(b),
            (Index::Lattice(a), Index::Lattice(b)) => a.cmp(b),
            (Index::Scalar(_), Index::Lattice(_)) => Ordering::Less,
            (Index::Lattice(_), Index::Scalar(_)) => Ordering::Greater,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Scalar(k) => write!(f, "{k}"),
            Index::Lattice(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
        }
    }
}

/// Exponent of the lattice (quasi-)norm |k|_r, with r = inf allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn validate(&self) -> Result<()> {
        if let NormExponent::Finite(r) = self {
            if !r.is_finite() || *r <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "norm exponent must be positive or inf, got {r}"
                )));
            }
        }
        Ok(())
    }

    pub fn norm(&self, k: &[i64]) -> f64 {
        match self {
            NormExponent::Infinity => k.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as f64,
            NormExponent::Finite(r) => {
                if *r == 1.0 {
                    k.iter().map(|x| x.unsigned_abs() as f64).sum()
                } else if *r == 2.0 {
                    let s: u128 = k.iter().map(|x| (x.unsigned_abs() as u128).pow(2)).sum();
                    (s as f64).sqrt()
                } else {
                    let s: f64 = k.iter().map(|x| (x.unsigned_abs() as f64).powf(*r)).sum();
                    s.powf(1.0 / r)
                }
            }
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExponent::Infinity => write!(f, "inf"),
            NormExponent::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl std::str::FromStr for NormExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let out = match s {
            "inf" | "infty" | "oo" => NormExponent::Infinity,
            other => NormExponent::Finite(other.parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!("cannot parse norm exponent '{other}'"))
            })?),
        };
        out.validate()?;
        Ok(out)
    }
}

fn in_ball(k: &[i64], r: NormExponent, m: u64) -> bool {
    match r {
        NormExponent::Infinity => k.iter().all(|x| x.unsigned_abs() <= m),
        NormExponent::Finite(rf) => {
            if rf == 1.0 {
                k.iter().map(|x| x.unsigned_abs()).sum::<u64>() <= m
            } else if rf == 2.0 {
                let s: u128 = k.iter().map(|x| (x.unsigned_abs() as u128).pow(2)).sum();
                s <= (m as u128).pow(2)
            } else {
                // Non-integer exponents go through floats; snap the boundary
                // so points with |k|_r = m are kept despite rounding.
                let s: f64 = k.iter().map(|x| (x.unsigned_abs() as f64).powf(rf)).sum();
                s <= (m as f64).powf(rf) * (1.0 + 1e-12)
            }
        }
    }
}

/// Exact number of lattice points of Z^d with |k|_r <= m.
///
/// Counts by walking the bounding box [-m, m]^d coordinate by coordinate,
/// abandoning a branch as soon as the partial norm already exceeds m.
pub fn lattice_count(d: usize, r: NormExponent, m: u64) -> Result<u64> {
    r.validate()?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    // Overflow guard on the bounding box the walk may have to cover.
    let side = 2u64
        .checked_mul(m)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::Overflow(format!("box side 2*{m}+1 overflows u64")))?;
    let mut box_size: u64 = 1;
    for _ in 0..d {
        box_size = box_size
            .checked_mul(side)
            .ok_or_else(|| Error::Overflow(format!("({side})^{d} overflows u64")))?;
    }
    if box_size > ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            budget: ENUM_BUDGET as usize,
            context: format!("lattice_count d={d} r={r} m={m} box={box_size}"),
        });
    }

    let mut count = 0u64;
    let mut point = vec![0i64; d];
    count_rec(&mut point, 0, r, m, &mut count);
    Ok(count)
}

fn count_rec(point: &mut [i64], depth: usize, r: NormExponent, m: u64, count: &mut u64) {
    if depth == point.len() {
        *count += 1;
        return;
    }
    // Zero first, then +-a outward; pruning stops as soon as the partial
    // point (remaining coords zero) already leaves the ball.
    point[depth] = 0;
    if in_ball(&point[..=depth], r, m) {
        count_rec(point, depth + 1, r, m, count);
    }
    for a in 1..=(m as i64) {
        let mut alive = false;
        for s in [a, -a] {
            point[depth] = s;
            if in_ball(&point[..=depth], r, m) {
                alive = true;
                count_rec(point, depth + 1, r, m, count);
            }
        }
        if !alive {
            break;
        }
    }
    point[depth] = 0;
}

/// Finite index regions.
#[derive(Clone, Debug, PartialEq)]
pub enum IndexSet {
    /// Explicit finite set (scalar or lattice indices).
    Explicit(BTreeSet<Index>),
    /// Lattice points with |k|_1 <= m.
    Triangular { d: usize, m: u64 },
    /// Lattice points with |k|_r <= m.
    Ball { d: usize, r: NormExponent, m: u64 },
    /// Lattice points with prod_j max(1, |k_j|) <= n.
    Cross { d: usize, n: u64 },
}

impl IndexSet {
    pub fn explicit<I: IntoIterator<Item = Index>>(ixs: I) -> Self {
        IndexSet::Explicit(ixs.into_iter().collect())
    }

    pub fn contains(&self, ix: &Index) -> bool {
        match self {
            IndexSet::Explicit(set) => set.contains(ix),
            IndexSet::Triangular { d, m } => match ix {
                Index::Lattice(v) if v.len() == *d => ix.l1() <= *m,
                _ => false,
            },
            IndexSet::Ball { d, r, m } => match ix {
                Index::Lattice(v) if v.len() == *d => in_ball(v, *r, *m),
                _ => false,
            },
            IndexSet::Cross { d, n } => match ix {
                Index::Lattice(v) if v.len() == *d => cross_weight(v) <= *n as u128,
                _ => false,
            },
        }
    }

    /// Number of indices in the region.
    pub fn cardinality(&self) -> Result<u64> {
        match self {
            IndexSet::Explicit(set) => Ok(set.len() as u64),
            IndexSet::Triangular { d, m } => lattice_count(*d, NormExponent::Finite(1.0), *m),
            IndexSet::Ball { d, r, m } => lattice_count(*d, *r, *m),
            IndexSet::Cross { d, n } => {
                let mut count = 0u64;
                cross_rec_count(*d, *n, 1, &mut count)?;
                Ok(count)
            }
        }
    }

    /// All indices of the region in ascending order.
    pub fn points(&self) -> Result<Vec<Index>> {
        match self {
            IndexSet::Explicit(set) => Ok(set.iter().cloned().collect()),
            IndexSet::Triangular { d, m } => ball_points(*d, NormExponent::Finite(1.0), *m),
            IndexSet::Ball { d, r, m } => ball_points(*d, *r, *m),
            IndexSet::Cross { d, n } => {
                let mut pts = Vec::new();
                let mut point = vec![0i64; *d];
                cross_rec_points(&mut point, 0, *n, &mut pts)?;
                pts.sort();
                Ok(pts.into_iter().map(Index::Lattice).collect())
            }
        }
    }
}

/// prod_j max(1, |k_j|) for a lattice vector.
pub fn cross_weight(k: &[i64]) -> u128 {
    k.iter()
        .map(|x| x.unsigned_abs().max(1) as u128)
        .product()
}

fn cross_rec_count(dims_left: usize, n: u64, weight: u128, count: &mut u64) -> Result<()> {
    if dims_left == 0 {
        *count += 1;
        return Ok(());
    }
    // Coordinate 0 and +-a with max(1,|a|)*weight <= n.
    for a in 0..=(n.min(i64::MAX as u64) as i64) {
        let w = weight * (a.unsigned_abs().max(1) as u128);
        if w > n as u128 {
            break;
        }
        let signs: u64 = if a == 0 { 1 } else { 2 };
        let mut sub = 0u64;
        cross_rec_count(dims_left - 1, n, w, &mut sub)?;
        *count += sub * signs;
        if *count > ENUM_BUDGET {
            return Err(Error::BudgetExceeded {
                budget: ENUM_BUDGET as usize,
                context: "cross cardinality".into(),
            });
        }
    }
    Ok(())
}

fn cross_rec_points(point: &mut Vec<i64>, depth: usize, n: u64, out: &mut Vec<Vec<i64>>) -> Result<()> {
    let d = point.len();
    if depth == d {
        out.push(point.clone());
        if out.len() as u64 > ENUM_BUDGET {
            return Err(Error::BudgetExceeded {
                budget: ENUM_BUDGET as usize,
                context: "cross points".into(),
            });
        }
        return Ok(());
    }
    let weight: u128 = point[..depth]
        .iter()
        .map(|x| x.unsigned_abs().max(1) as u128)
        .product();
    for a in 0..=(n as i64) {
        let w = weight * (a.unsigned_abs().max(1) as u128);
        if w > n as u128 {
            break;
        }
        // The remaining coordinates can always take 0, so w <= n suffices.
        point[depth] = a;
        cross_rec_points(point, depth + 1, n, out)?;
        if a != 0 {
            point[depth] = -a;
            cross_rec_points(point, depth + 1, n, out)?;
        }
    }
    point[depth] = 0;
    Ok(())
}

fn ball_points(d: usize, r: NormExponent, m: u64) -> Result<Vec<Index>> {
    let count = lattice_count(d, r, m)?;
    if count > ENUM_BUDGET {
        return Err(Error::BudgetExceeded {
            budget: ENUM_BUDGET as usize,
            context: format!("ball points d={d} m={m}"),
        });
    }
    let mut pts = Vec::with_capacity(count as usize);
    let mut point = vec![0i64; d];
    points_rec(&mut point, 0, r, m, &mut pts);
    pts.sort();
    Ok(pts.into_iter().map(Index::Lattice).collect())
}

fn points_rec(point: &mut Vec<i64>, depth: usize, r: NormExponent, m: u64, out: &mut Vec<Vec<i64>>) {
    if depth == point.len() {
        out.push(point.clone());
        return;
    }
    point[depth] = 0;
    if in_ball(&point[..=depth], r, m) {
        points_rec(point, depth + 1, r, m, out);
    }
    for a in 1..=(m as i64) {
        let mut alive = false;
        for s in [a, -a] {
            point[depth] = s;
            if in_ball(&point[..=depth], r, m) {
                alive = true;
                points_rec(point, depth + 1, r, m, out);
            }
        }
        if !alive {
            break;
        }
    }
    point[depth] = 0;
}
