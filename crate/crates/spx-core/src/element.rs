//! Sparse coefficient sequences: elements of the weighted sequence spaces,
//! their norms, tail errors and transforms under a multiplier system.
//!
//! Text format, one coefficient per line:
//!   scalar domain:   `k re im`          (k >= 1)
//!   lattice domain:  `k1 ... kd re im`
//! Blank lines and lines starting with `#` are skipped.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index::Index;
use crate::kahan::Kahan;
use crate::psi::PsiSystem;

/// Smallest coefficient modulus accepted; guards against subnormal noise.
pub const MIN_COEFF: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Scalar,
    Lattice(usize),
}

impl Domain {
    pub fn of(ix: &Index) -> Domain {
        match ix {
            Index::Scalar(_) => Domain::Scalar,
            Index::Lattice(v) => Domain::Lattice(v.len()),
        }
    }
}

/// A finitely supported coefficient sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct SpElement {
    domain: Domain,
    coeffs: BTreeMap<Index, Complex64>,
}

fn check_coeff(ix: &Index, c: Complex64) -> Result<()> {
    if !c.re.is_finite() || !c.im.is_finite() {
        return Err(Error::InvalidElement(format!("non-finite coefficient at {ix}")));
    }
    if c.norm() < MIN_COEFF {
        return Err(Error::InvalidElement(format!(
            "coefficient modulus below {MIN_COEFF:e} at {ix}; drop the mode instead"
        )));
    }
    Ok(())
}

fn check_index(domain: Domain, ix: &Index) -> Result<()> {
    if Domain::of(ix) != domain {
        return Err(Error::InvalidElement(format!("index {ix} does not match the element domain")));
    }
    if matches!(ix, Index::Scalar(0)) {
        return Err(Error::InvalidElement("scalar-domain indices start at 1".into()));
    }
    Ok(())
}

impl SpElement {
    pub fn new(domain: Domain) -> Self {
        SpElement { domain, coeffs: BTreeMap::new() }
    }

    /// Build from (index, coefficient) pairs; duplicate indices are an error.
    pub fn from_pairs<I: IntoIterator<Item = (Index, Complex64)>>(
        domain: Domain,
        pairs: I,
    ) -> Result<Self> {
        let mut el = SpElement::new(domain);
        for (ix, c) in pairs {
            check_index(domain, &ix)?;
            check_coeff(&ix, c)?;
            if el.coeffs.insert(ix.clone(), c).is_some() {
                return Err(Error::InvalidElement(format!("duplicate index {ix}")));
            }
        }
        Ok(el)
    }

    /// Set one coefficient, replacing any previous value at the index.
    pub fn set(&mut self, ix: Index, c: Complex64) -> Result<()> {
        check_index(self.domain, &ix)?;
        check_coeff(&ix, c)?;
        self.coeffs.insert(ix, c);
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, ix: &Index) -> Complex64 {
        self.coeffs.get(ix).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Support in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = (&Index, &Complex64)> {
        self.coeffs.iter()
    }

    /// sum over the support of |coeff|^p.
    pub fn power_sum(&self, p: f64) -> Result<f64> {
        validate_p(p)?;
        let mut acc = Kahan::new();
        for c in self.coeffs.values() {
            acc.add(c.norm().powf(p));
        }
        Ok(acc.value())
    }

    /// The space norm (sum |coeff|^p)^(1/p).
    pub fn norm(&self, p: f64) -> Result<f64> {
        Ok(self.power_sum(p)?.powf(1.0 / p))
    }

    /// Best-approximation error by sequences supported on `keep`:
    /// the p-norm of the part of the element outside the kept set.
    pub fn tail_error<F: Fn(&Index) -> bool>(&self, keep: F, p: f64) -> Result<f64> {
        validate_p(p)?;
        let mut acc = Kahan::new();
        for (ix, c) in &self.coeffs {
            if !keep(ix) {
                acc.add(c.norm().powf(p));
            }
        }
        Ok(acc.value().powf(1.0 / p))
    }

    /// Multiply each coefficient by the system value at its index.
    ///
    /// Indices where the system value is exactly zero are annihilated and
    /// reported back; indices the system does not cover are an error.
    pub fn psi_integrate(&self, psi: &PsiSystem) -> Result<(SpElement, Vec<Index>)> {
        let mut out = SpElement::new(self.domain);
        let mut killed = Vec::new();
        for (ix, c) in &self.coeffs {
            let v = psi.value(ix).ok_or_else(|| {
                Error::ZeroDivisor(format!("system does not cover index {ix}"))
            })?;
            if v.norm() == 0.0 {
                killed.push(ix.clone());
            } else {
                out.coeffs.insert(ix.clone(), c * v);
            }
        }
        Ok((out, killed))
    }

    /// Divide each coefficient by the system value at its index.
    ///
    /// Fails with `ZeroDivisor` when the system vanishes (or is undefined)
    /// on the support.
    pub fn psi_differentiate(&self, psi: &PsiSystem) -> Result<SpElement> {
        let mut out = SpElement::new(self.domain);
        for (ix, c) in &self.coeffs {
            let v = psi
                .value(ix)
                .ok_or_else(|| Error::ZeroDivisor(format!("system does not cover index {ix}")))?;
            if v.norm() == 0.0 {
                return Err(Error::ZeroDivisor(format!("system vanishes at {ix}")));
            }
            out.coeffs.insert(ix.clone(), c / v);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Result<SpElement> {
        let mut out = SpElement::new(self.domain);
        for (ix, c) in &self.coeffs {
            let v = c * factor;
            check_coeff(ix, v)?;
            out.coeffs.insert(ix.clone(), v);
        }
        Ok(out)
    }

    /// Serialize in the line-per-coefficient text format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (ix, c) in &self.coeffs {
            match ix {
                Index::Scalar(k) => {
                    let _ = writeln!(s, "{} {} {}", k, c.re, c.im);
                }
                Index::Lattice(v) => {
                    for k in v {
                        let _ = write!(s, "{k} ");
                    }
                    let _ = writeln!(s, "{} {}", c.re, c.im);
                }
            }
        }
        s
    }

    /// Parse the text format. The domain is inferred from the first data
    /// line: `scalar` forces two leading fields to be read as k re im only
    /// when each line has exactly 3 fields and the element was requested as
    /// scalar; otherwise the line is read as a 1-d lattice index.
    pub fn parse_text(input: &str, scalar: bool) -> Result<SpElement> {
        let mut el: Option<SpElement> = None;
        for (line_no, raw) in input.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 3 {
                return Err(Error::InvalidElement(format!(
                    "line {}: need at least `k re im`",
                    line_no + 1
                )));
            }
            let d = fields.len() - 2;
            let re: f64 = fields[d]
                .parse()
                .map_err(|_| Error::InvalidElement(format!("line {}: bad real part", line_no + 1)))?;
            let im: f64 = fields[d + 1]
                .parse()
                .map_err(|_| Error::InvalidElement(format!("line {}: bad imag part", line_no + 1)))?;
            let ix = if scalar {
                if d != 1 {
                    return Err(Error::InvalidElement(format!(
                        "line {}: scalar elements take one index field",
                        line_no + 1
                    )));
                }
                let k: u64 = fields[0].parse().map_err(|_| {
                    Error::InvalidElement(format!("line {}: bad scalar index", line_no + 1))
                })?;
                Index::Scalar(k)
            } else {
                let mut v = Vec::with_capacity(d);
                for f in &fields[..d] {
                    v.push(f.parse::<i64>().map_err(|_| {
                        Error::InvalidElement(format!("line {}: bad lattice index", line_no + 1))
                    })?);
                }
                Index::Lattice(v)
            };
            let domain = Domain::of(&ix);
            let el = el.get_or_insert_with(|| SpElement::new(domain));
            check_index(el.domain, &ix)?;
            let c = Complex64::new(re, im);
            check_coeff(&ix, c)?;
            if el.coeffs.insert(ix.clone(), c).is_some() {
                return Err(Error::InvalidElement(format!(
                    "line {}: duplicate index {ix}",
                    line_no + 1
                )));
            }
        }
        el.ok_or_else(|| Error::InvalidElement("no coefficients found".into()))
    }
}

fn validate_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("norm exponent must satisfy p >= 1, got {p}")));
    }
    Ok(())
}
