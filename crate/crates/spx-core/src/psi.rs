//! Weight systems over scalar or lattice index domains, their enumeration in
//! non-increasing modulus order, and the characteristic sequences
//! (distinct levels, nested level sets, counts, rearrangement) everything
//! else is built on.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::{Index, IndexSet, NormExponent};
use crate::rules::DecayRule;

/// Default cap on how many indices one operation may enumerate.
pub const DEFAULT_N_MAX: usize = 1_000_000;

/// Two computed rule values are treated as one level when they differ by
/// at most this relative amount. Table values are compared exactly.
pub const GROUP_REL_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum SystemKind {
    /// Finite explicit table. Zero entries are allowed and act as the
    /// declared zero set of the system.
    Table(Vec<(Index, Complex64)>),
    /// k in {1, 2, ...} with psi_k = rule(k).
    ScalarRule(DecayRule),
    /// k in Z^d with psi(k) = prod_j rule_j(max(1, |k_j|)).
    Product(Vec<DecayRule>),
    /// k in Z^d with psi(k) = rule(|k|_r), and rule(1) at k = 0.
    Radial {
        rule: DecayRule,
        r: NormExponent,
        d: usize,
    },
}

/// A weight system: a complex multiplier attached to every index of its
/// domain, with |psi| enumérable in non-increasing order.
#[derive(Clone, Debug)]
pub struct PsiSystem {
    kind: SystemKind,
    n_max: usize,
    lookup: HashMap<Index, Complex64>,
    has_zero_entries: bool,
}

impl PsiSystem {
    pub fn table(entries: Vec<(Index, Complex64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidParameter("table system needs at least one entry".into()));
        }
        let dim = entries[0].0.dim();
        let scalar = matches!(entries[0].0, Index::Scalar(_));
        let mut lookup = HashMap::with_capacity(entries.len());
        let mut has_zero = false;
        for (ix, v) in &entries {
            if matches!(ix, Index::Scalar(_)) != scalar || ix.dim() != dim {
                return Err(Error::InvalidParameter("table mixes index domains".into()));
            }
            if let Index::Scalar(0) = ix {
                return Err(Error::InvalidParameter("scalar indices start at 1".into()));
            }
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite table value at {ix}")));
            }
            if v.norm() == 0.0 {
                has_zero = true;
            }
            if lookup.insert(ix.clone(), *v).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate table index {ix}")));
            }
        }
        Ok(Self {
            kind: SystemKind::Table(entries),
            n_max: DEFAULT_N_MAX,
            lookup,
            has_zero_entries: has_zero,
        })
    }

    /// Real positive table from plain moduli, indexed 1..=len.
    pub fn scalar_table(moduli: &[f64]) -> Result<Self> {
        Self::table(
            moduli
                .iter()
                .enumerate()
                .map(|(i, &m)| (Index::Scalar(i as u64 + 1), Complex64::new(m, 0.0)))
                .collect(),
        )
    }

    pub fn scalar_rule(rule: DecayRule) -> Result<Self> {
        rule.validate()?;
        check_system_rule(&rule)?;
        Ok(Self {
            kind: SystemKind::ScalarRule(rule),
            n_max: DEFAULT_N_MAX,
            lookup: HashMap::new(),
            has_zero_entries: false,
        })
    }

    pub fn product(rules: Vec<DecayRule>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::InvalidParameter("product system needs d >= 1".into()));
        }
        for rule in &rules {
            rule.validate()?;
            check_system_rule(rule)?;
        }
        Ok(Self {
            kind: SystemKind::Product(rules),
            n_max: DEFAULT_N_MAX,
            lookup: HashMap::new(),
            has_zero_entries: false,
        })
    }

    pub fn radial(rule: DecayRule, r: NormExponent, d: usize) -> Result<Self> {
        rule.validate()?;
        check_system_rule(&rule)?;
        r.validate()?;
        if d == 0 {
            return Err(Error::InvalidParameter("radial system needs d >= 1".into()));
        }
        Ok(Self {
            kind: SystemKind::Radial { rule, r, d },
            n_max: DEFAULT_N_MAX,
            lookup: HashMap::new(),
            has_zero_entries: false,
        })
    }

    pub fn with_budget(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn kind(&self) -> &SystemKind {
        &self.kind
    }

    pub fn budget(&self) -> usize {
        self.n_max
    }

    /// Lattice dimension, or None for scalar-domain systems.
    pub fn lattice_dim(&self) -> Option<usize> {
        match &self.kind {
            SystemKind::Table(entries) => match &entries[0].0 {
                Index::Scalar(_) => None,
                Index::Lattice(v) => Some(v.len()),
            },
            SystemKind::ScalarRule(_) => None,
            SystemKind::Product(rules) => Some(rules.len()),
            SystemKind::Radial { d, .. } => Some(*d),
        }
    }

    pub fn is_unit(&self) -> bool {
        match &self.kind {
            SystemKind::ScalarRule(r) => r.is_unit(),
            SystemKind::Product(rs) => rs.iter().all(|r| r.is_unit()),
            SystemKind::Radial { rule, .. } => rule.is_unit(),
            SystemKind::Table(_) => false,
        }
    }

    /// Whether the system has explicitly declared zero multipliers.
    pub fn has_declared_zeros(&self) -> bool {
        self.has_zero_entries
    }

    /// Moduli groups are compared exactly for tables, with a relative
    /// tolerance for computed rule values.
    pub fn group_tol(&self) -> f64 {
        match &self.kind {
            SystemKind::Table(_) => 0.0,
            _ => GROUP_REL_TOL,
        }
    }

    /// psi at an index. None when the index lies outside the system's
    /// domain (off-table indices, wrong dimension, scalar 0).
    pub fn value(&self, ix: &Index) -> Option<Complex64> {
        match &self.kind {
            SystemKind::Table(_) => self.lookup.get(ix).copied(),
            SystemKind::ScalarRule(rule) => match ix {
                Index::Scalar(k) if *k >= 1 => Some(Complex64::new(rule.value(*k as f64), 0.0)),
                _ => None,
            },
            SystemKind::Product(rules) => match ix {
                Index::Lattice(v) if v.len() == rules.len() => {
                    let mut prod = 1.0;
                    for (rule, k) in rules.iter().zip(v) {
                        prod *= rule.value(k.unsigned_abs().max(1) as f64);
                    }
                    Some(Complex64::new(prod, 0.0))
                }
                _ => None,
            },
            SystemKind::Radial { rule, r, d } => match ix {
                Index::Lattice(v) if v.len() == *d => {
                    let t = r.norm(v).max(1.0);
                    Some(Complex64::new(rule.value(t), 0.0))
                }
                _ => None,
            },
        }
    }

    pub fn modulus(&self, ix: &Index) -> Option<f64> {
        self.value(ix).map(|v| v.norm())
    }

    /// Stream of exact-equality moduli groups in non-increasing order.
    pub fn enumerate(&self) -> Enumerator<'_> {
        Enumerator::new(self)
    }

    /// Stream of tolerance-merged levels (the epsilon levels of the system).
    pub fn levels(&self) -> Levels<'_> {
        Levels {
            inner: self.enumerate(),
            pending: None,
            tol: self.group_tol(),
        }
    }
}

fn check_system_rule(rule: &DecayRule) -> Result<()> {
    if let DecayRule::PowerLog { eps, .. } = rule {
        if *eps > 0.0 {
            return Err(Error::InvalidParameter(
                "power-log rules with eps > 0 grow near t = 1 and are not valid weight rules".into(),
            ));
        }
    }
    Ok(())
}

/// One exact-modulus group: every index whose |psi| equals `value` bitwise.
#[derive(Clone, Debug)]
pub struct Group {
    pub value: f64,
    pub indices: Vec<Index>,
}

struct FrontierItem {
    value: f64,
    canon: Vec<u64>,
}

impl PartialEq for FrontierItem {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.canon == other.canon
    }
}
impl Eq for FrontierItem {}
impl PartialOrd for FrontierItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontierItem {
    // Max-heap: larger value first; among equal values, lexicographically
    // smaller canonical point first.
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.canon.cmp(&self.canon))
    }
}

enum EnumState {
    Table { sorted: Vec<(f64, Index)>, pos: usize },
    Scalar { next_k: u64 },
    Frontier { heap: BinaryHeap<FrontierItem>, seen: HashSet<Vec<u64>> },
}

/// Streams `Group`s in non-increasing |psi| order, lexicographic within a
/// group. Zero-modulus table entries are not part of the stream.
pub struct Enumerator<'a> {
    system: &'a PsiSystem,
    state: EnumState,
    emitted: usize,
    last_value: f64,
}

impl<'a> Enumerator<'a> {
    fn new(system: &'a PsiSystem) -> Self {
        let state = match &system.kind {
            SystemKind::Table(entries) => {
                let mut sorted: Vec<(f64, Index)> = entries
                    .iter()
                    .filter(|(_, v)| v.norm() > 0.0)
                    .map(|(ix, v)| (v.norm(), ix.clone()))
                    .collect();
                sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
                EnumState::Table { sorted, pos: 0 }
            }
            SystemKind::ScalarRule(_) => EnumState::Scalar { next_k: 1 },
            SystemKind::Product(rules) => {
                let d = rules.len();
                let mut heap = BinaryHeap::new();
                let origin = vec![0u64; d];
                let mut seen = HashSet::new();
                seen.insert(origin.clone());
                heap.push(FrontierItem {
                    value: canon_value(system, &origin),
                    canon: origin,
                });
                EnumState::Frontier { heap, seen }
            }
            SystemKind::Radial { d, .. } => {
                let mut heap = BinaryHeap::new();
                let origin = vec![0u64; *d];
                let mut seen = HashSet::new();
                seen.insert(origin.clone());
                heap.push(FrontierItem {
                    value: canon_value(system, &origin),
                    canon: origin,
                });
                EnumState::Frontier { heap, seen }
            }
        };
        Enumerator {
            system,
            state,
            emitted: 0,
            last_value: f64::INFINITY,
        }
    }

    /// Number of indices handed out so far.
    pub fn emitted(&self) -> usize {
        self.emitted
    }

    /// Next exact-equality group, or None when the system is exhausted.
    pub fn next_group(&mut self) -> Result<Option<Group>> {
        let group = match &mut self.state {
            EnumState::Table { sorted, pos } => {
                if *pos >= sorted.len() {
                    return Ok(None);
                }
                let value = sorted[*pos].0;
                let mut indices = Vec::new();
                while *pos < sorted.len() && sorted[*pos].0 == value {
                    indices.push(sorted[*pos].1.clone());
                    *pos += 1;
                }
                Group { value, indices }
            }
            EnumState::Scalar { next_k } => {
                let rule = match &self.system.kind {
                    SystemKind::ScalarRule(r) => r,
                    _ => unreachable!(),
                };
                let value = rule.value(*next_k as f64);
                let mut indices = vec![Index::Scalar(*next_k)];
                *next_k += 1;
                while rule.value(*next_k as f64) == value {
                    indices.push(Index::Scalar(*next_k));
                    *next_k += 1;
                    if self.emitted + indices.len() > self.system.n_max {
                        return Err(Error::BudgetExceeded {
                            budget: self.system.n_max,
                            context: "scalar plateau enumeration".into(),
                        });
                    }
                }
                Group { value, indices }
            }
            EnumState::Frontier { heap, seen } => {
                let top_value = match heap.peek() {
                    Some(item) => item.value,
                    None => return Ok(None),
                };
                let mut canons: Vec<Vec<u64>> = Vec::new();
                let mut count = 0usize;
                while let Some(item) = heap.peek() {
                    if item.value != top_value {
                        break;
                    }
                    let item = heap.pop().unwrap();
                    count += signed_count(&item.canon);
                    if self.emitted + count > self.system.n_max.saturating_mul(2) {
                        return Err(Error::BudgetExceeded {
                            budget: self.system.n_max,
                            context: "frontier plateau enumeration".into(),
                        });
                    }
                    for j in 0..item.canon.len() {
                        let mut child = item.canon.clone();
                        child[j] += 1;
                        if seen.insert(child.clone()) {
                            heap.push(FrontierItem {
                                value: canon_value(self.system, &child),
                                canon: child,
                            });
                        }
                    }
                    canons.push(item.canon);
                }
                let mut indices = Vec::with_capacity(count);
                for canon in &canons {
                    expand_signs(canon, &mut indices);
                }
                indices.sort();
                Group { value: top_value, indices }
            }
        };
        // Non-increasing order is an invariant of the construction; a
        // violation means a rule lied about monotonicity.
        if group.value > self.last_value * (1.0 + 1e-9) {
            return Err(Error::NonDecayingSystem(format!(
                "modulus rose from {} to {} during enumeration",
                self.last_value, group.value
            )));
        }
        self.last_value = group.value;
        self.emitted += group.indices.len();
        if self.emitted > self.system.n_max {
            return Err(Error::BudgetExceeded {
                budget: self.system.n_max,
                context: format!("enumeration passed {} indices", self.emitted),
            });
        }
        Ok(Some(group))
    }
}

fn canon_value(system: &PsiSystem, canon: &[u64]) -> f64 {
    match &system.kind {
        SystemKind::Product(rules) => {
            let mut prod = 1.0;
            for (rule, &a) in rules.iter().zip(canon) {
                prod *= rule.value(a.max(1) as f64);
            }
            prod
        }
        SystemKind::Radial { rule, r, .. } => {
            let signed: Vec<i64> = canon.iter().map(|&a| a as i64).collect();
            let t = r.norm(&signed).max(1.0);
            rule.value(t)
        }
        _ => unreachable!(),
    }
}

fn signed_count(canon: &[u64]) -> usize {
    canon.iter().map(|&a| if a == 0 { 1usize } else { 2 }).product()
}

fn expand_signs(canon: &[u64], out: &mut Vec<Index>) {
    let d = canon.len();
    let mut point = vec![0i64; d];
    fn rec(canon: &[u64], point: &mut Vec<i64>, depth: usize, out: &mut Vec<Index>) {
        if depth == canon.len() {
            out.push(Index::Lattice(point.clone()));
            return;
        }
        let a = canon[depth] as i64;
        if a == 0 {
            point[depth] = 0;
            rec(canon, point, depth + 1, out);
        } else {
            for s in [-a, a] {
                point[depth] = s;
                rec(canon, point, depth + 1, out);
            }
        }
    }
    rec(canon, &mut point, 0, out);
}

/// Tolerance-merged level stream on top of `Enumerator`.
pub struct Levels<'a> {
    inner: Enumerator<'a>,
    pending: Option<Group>,
    tol: f64,
}

impl<'a> Levels<'a> {
    /// Next level: the union of consecutive exact groups whose values agree
    /// within the system's grouping tolerance. Value is the level maximum.
    pub fn next_level(&mut self) -> Result<Option<Group>> {
        let mut current = match self.pending.take() {
            Some(g) => g,
            None => match self.inner.next_group()? {
                Some(g) => g,
                None => return Ok(None),
            },
        };
        loop {
            match self.inner.next_group()? {
                None => break,
                Some(g) => {
                    if (current.value - g.value).abs() <= self.tol * current.value.abs() {
                        current.indices.extend(g.indices);
                        current.value = current.value.max(g.value);
                    } else {
                        self.pending = Some(g);
                        break;
                    }
                }
            }
        }
        current.indices.sort();
        Ok(Some(current))
    }

    pub fn emitted(&self) -> usize {
        self.inner.emitted()
    }
}

/// Characteristic sequences of a system: distinct levels `epsilon`
/// (decreasing), nested level sets with cumulative counts `delta`, and the
/// per-level index groups.
#[derive(Clone, Debug)]
pub struct CharSequences {
    pub epsilon: Vec<f64>,
    pub delta: Vec<u64>,
    pub groups: Vec<Vec<Index>>,
}

impl CharSequences {
    /// delta_n with the delta_0 = 0 convention; n is 1-based.
    pub fn delta_n(&self, n: usize) -> u64 {
        if n == 0 {
            0
        } else {
            self.delta[n - 1]
        }
    }

    /// The level set g_n = union of the first n groups, as an explicit set.
    pub fn g(&self, n: usize) -> IndexSet {
        let mut set = std::collections::BTreeSet::new();
        for group in self.groups.iter().take(n) {
            set.extend(group.iter().cloned());
        }
        IndexSet::Explicit(set)
    }

    /// Rearranged modulus at 1-based rank (the step function over levels).
    pub fn rearranged_at(&self, rank: u64) -> Option<f64> {
        if rank == 0 {
            return None;
        }
        let pos = self.delta.partition_point(|&d| d < rank);
        self.epsilon.get(pos).copied()
    }
}

/// Resolve the first `n_levels` characteristic levels of the system.
pub fn char_sequences(psi: &PsiSystem, n_levels: usize) -> Result<CharSequences> {
    if psi.has_declared_zeros() {
        // Zero entries are outside the (2.15) setting the sequences assume.
        return Err(Error::ZeroEntry("characteristic sequences need all moduli nonzero".into()));
    }
    let mut levels = psi.levels();
    let mut epsilon = Vec::with_capacity(n_levels);
    let mut delta = Vec::with_capacity(n_levels);
    let mut groups = Vec::with_capacity(n_levels);
    let mut total = 0u64;
    for _ in 0..n_levels {
        match levels.next_level()? {
            None => break,
            Some(g) => {
                total += g.indices.len() as u64;
                epsilon.push(g.value);
                delta.push(total);
                groups.push(g.indices);
            }
        }
    }
    if epsilon.is_empty() {
        return Err(Error::InvalidParameter("system has no nonzero moduli".into()));
    }
    Ok(CharSequences { epsilon, delta, groups })
}

/// First `count` entries of the rearranged modulus sequence.
pub fn rearrangement(psi: &PsiSystem, count: usize) -> Result<Vec<f64>> {
    let mut levels = psi.levels();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        match levels.next_level()? {
            None => break,
            Some(g) => {
                for _ in 0..g.indices.len() {
                    out.push(g.value);
                    if out.len() == count {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Serializable system descriptor for config files.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct SystemSpec {
    pub mode: String,
    #[serde(default)]
    pub dimension: Option<usize>,
    /// Norm exponent for radial mode: a number or "inf".
    #[serde(default)]
    pub r: Option<toml_float_or_inf::Value>,
    #[serde(default)]
    pub rule: Option<DecayRule>,
    #[serde(default)]
    pub rules: Option<Vec<DecayRule>>,
    #[serde(default)]
    pub entries: Option<Vec<TableEntry>>,
    #[serde(default)]
    pub n_max: Option<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableEntry {
    pub k: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    /// Scalar-domain entries set this instead of `k`.
    #[serde(default)]
    pub scalar: Option<u64>,
}

/// "inf" | number helper for serde.
pub mod toml_float_or_inf {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Clone, Debug)]
    pub enum Value {
        Num(f64),
        Inf,
    }

    impl Serialize for Value {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            match self {
                Value::Num(x) => s.serialize_f64(*x),
                Value::Inf => s.serialize_str("inf"),
            }
        }
    }

    impl<'de> Deserialize<'de> for Value {
        fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
            #[derive(Deserialize)]
            #[serde(untagged)]
            enum Raw {
                Num(f64),
                Str(String),
            }
            match Raw::deserialize(d)? {
                Raw::Num(x) => Ok(Value::Num(x)),
                Raw::Str(s) if s == "inf" || s == "infty" || s == "oo" => Ok(Value::Inf),
                Raw::Str(s) => s
                    .parse::<f64>()
                    .map(Value::Num)
                    .map_err(|_| serde::de::Error::custom(format!("bad norm exponent '{s}'"))),
            }
        }
    }
}

impl PsiSystem {
    /// Build a system from a config descriptor.
    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        let mode = spec.mode.as_str();
        let sys = match mode {
            "table" => {
                let entries = spec.entries.as_ref().ok_or_else(|| {
                    Error::InvalidParameter("table mode needs [[system.entries]]".into())
                })?;
                let converted: Vec<(Index, Complex64)> = entries
                    .iter()
                    .map(|e| {
                        let ix = match e.scalar {
                            Some(k) => Index::Scalar(k),
                            None => Index::Lattice(e.k.clone()),
                        };
                        (ix, Complex64::new(e.re, e.im))
                    })
                    .collect();
                PsiSystem::table(converted)?
            }
            "scalar" => {
                let rule = spec.rule.clone().ok_or_else(|| {
                    Error::InvalidParameter("scalar mode needs a rule".into())
                })?;
                PsiSystem::scalar_rule(rule)?
            }
            "product" => {
                let rules = spec.rules.clone().or_else(|| {
                    spec.rule.clone().and_then(|r| spec.dimension.map(|d| vec![r; d]))
                });
                let rules = rules.ok_or_else(|| {
                    Error::InvalidParameter("product mode needs rules or rule+dimension".into())
                })?;
                PsiSystem::product(rules)?
            }
            "radial" => {
                let rule = spec.rule.clone().ok_or_else(|| {
                    Error::InvalidParameter("radial mode needs a rule".into())
                })?;
                let d = spec.dimension.ok_or_else(|| {
                    Error::InvalidParameter("radial mode needs a dimension".into())
                })?;
                let r = match &spec.r {
                    None => NormExponent::Infinity,
                    Some(toml_float_or_inf::Value::Inf) => NormExponent::Infinity,
                    Some(toml_float_or_inf::Value::Num(x)) => NormExponent::Finite(*x),
                };
                PsiSystem::radial(rule, r, d)?
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown system mode '{other}' (expected table|scalar|product|radial)"
                )))
            }
        };
        Ok(match spec.n_max {
            Some(b) => sys.with_budget(b),
            None => sys,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_power(r: f64) -> PsiSystem {
        PsiSystem::scalar_rule(DecayRule::Power { r }).unwrap()
    }

    #[test]
    fn harmonic_char_sequences() {
        let psi = scalar_power(1.0);
        let cs = char_sequences(&psi, 5).unwrap();
        assert_eq!(cs.delta, vec![1, 2, 3, 4, 5]);
        for (i, e) in cs.epsilon.iter().enumerate() {
            let expect = 1.0 / (i as f64 + 1.0);
            assert!((e - expect).abs() < 1e-15);
        }
        assert_eq!(cs.groups[2], vec![Index::Scalar(3)]);
    }

    #[test]
    fn table_grouping_is_exact() {
        let psi = PsiSystem::scalar_table(&[0.5, 1.0, 0.5, 0.25]).unwrap();
        let cs = char_sequences(&psi, 10).unwrap();
        assert_eq!(cs.epsilon, vec![1.0, 0.5, 0.25]);
        assert_eq!(cs.delta, vec![1, 3, 4]);
        assert_eq!(cs.groups[1], vec![Index::Scalar(1), Index::Scalar(3)]);
    }

    #[test]
    fn hyperbolic_cross_levels() {
        // product d=2 with power rule r: eps_n = n^-r, g_n the cross of size n
        let r = 1.0;
        let psi = PsiSystem::product(vec![DecayRule::Power { r }, DecayRule::Power { r }]).unwrap();
        let cs = char_sequences(&psi, 6).unwrap();
        for (i, e) in cs.epsilon.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((e - n.powf(-r)).abs() < 1e-12 * e, "level {i}");
        }
        for n in 1..=6usize {
            let expect = IndexSet::Cross { d: 2, n: n as u64 }.cardinality().unwrap();
            assert_eq!(cs.delta[n - 1], expect, "delta_{n}");
            let g = cs.g(n);
            for ix in (IndexSet::Cross { d: 2, n: n as u64 }).points().unwrap() {
                assert!(g.contains(&ix));
            }
        }
    }

    #[test]
    fn radial_sup_norm_levels_are_shells() {
        let psi = PsiSystem::radial(DecayRule::Power { r: 2.0 }, NormExponent::Infinity, 2).unwrap();
        let cs = char_sequences(&psi, 4).unwrap();
        // V_m = (2m+1)^2, psi(0) := psi(1) so level 1 holds the 3x3 box
        assert_eq!(cs.delta, vec![9, 25, 49, 81]);
        assert!((cs.epsilon[0] - 1.0).abs() < 1e-15);
        assert!((cs.epsilon[1] - 0.25).abs() < 1e-15);
        assert_eq!(cs.rearranged_at(9), Some(1.0));
        assert_eq!(cs.rearranged_at(10), Some(0.25));
    }

    #[test]
    fn radial_euclidean_rearrangement_block_ends() {
        // For non-integer norms the level structure is finer than integer
        // shells, but rank V_m still carries value rule(m).
        let psi = PsiSystem::radial(DecayRule::Power { r: 1.0 }, NormExponent::Finite(2.0), 2).unwrap();
        let rs = rearrangement(&psi, 30).unwrap();
        // V_1 = 5, V_2 = 13 in the Euclidean norm
        assert!((rs[4] - 1.0).abs() < 1e-15);
        assert!((rs[12] - 0.5).abs() < 1e-15);
        // interior of the second block contains the sqrt(2) point
        assert!(rs[5] > 0.5 && rs[5] < 1.0);
    }

    #[test]
    fn unit_system_exceeds_budget() {
        let psi = PsiSystem::scalar_rule(DecayRule::Unit).unwrap().with_budget(1000);
        assert!(matches!(
            char_sequences(&psi, 2),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn lex_tie_break_in_groups() {
        let psi = PsiSystem::radial(DecayRule::Power { r: 1.0 }, NormExponent::Finite(1.0), 2).unwrap();
        let cs = char_sequences(&psi, 2).unwrap();
        // level 1: |k|_1 <= 1 (five points, since psi(0)=psi(1))
        assert_eq!(
            cs.groups[0],
            vec![
                Index::Lattice(vec![-1, 0]),
                Index::Lattice(vec![0, -1]),
                Index::Lattice(vec![0, 0]),
                Index::Lattice(vec![0, 1]),
                Index::Lattice(vec![1, 0]),
            ]
        );
    }

    #[test]
    fn zero_table_entries_are_rejected_for_charseq() {
        let psi = PsiSystem::table(vec![
            (Index::Scalar(1), Complex64::new(1.0, 0.0)),
            (Index::Scalar(2), Complex64::new(0.0, 0.0)),
        ])
        .unwrap();
        assert!(matches!(char_sequences(&psi, 2), Err(Error::ZeroEntry(_))));
    }
}
