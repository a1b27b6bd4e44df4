//! Ordinals below epsilon_0 in Cantor normal form.
//!
//! An ordinal is a sum `w^e1*c1 + ... + w^ek*ck` with strictly decreasing
//! exponents (themselves ordinals) and positive integer coefficients.
//! Comparison is lexicographic on the term list; addition absorbs the tail
//! of the left argument below the leading exponent of the right argument.

use crate::error::{Error, Result};
use num::bigint::BigUint;
use num::traits::{One, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Cantor normal form ordinal below epsilon_0.
///
/// Invariant: exponents strictly decreasing, coefficients nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    terms: Vec<(Ordinal, BigUint)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Ordinal { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Ordinal::from_u64(1)
    }

    pub fn from_u64(n: u64) -> Self {
        if n == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![(Ordinal::zero(), BigUint::from(n))],
            }
        }
    }

    pub fn omega() -> Self {
        Ordinal::omega_term(Ordinal::one(), 1)
    }

    /// `w^exponent * coeff`; zero when coeff is zero.
    pub fn omega_term(exponent: Ordinal, coeff: u64) -> Self {
        if coeff == 0 {
            Ordinal::zero()
        } else {
            Ordinal {
                terms: vec![(exponent, BigUint::from(coeff))],
            }
        }
    }

    /// Build from raw terms; validates the CNF invariant.
    pub fn from_terms(terms: Vec<(Ordinal, BigUint)>) -> Result<Self> {
        for w in terms.windows(2) {
            if w[0].0 <= w[1].0 {
                return Err(Error::InvalidInput(
                    "ordinal exponents must be strictly decreasing".into(),
                ));
            }
        }
        if terms.iter().any(|(_, c)| c.is_zero()) {
            return Err(Error::InvalidInput(
                "ordinal coefficients must be nonzero".into(),
            ));
        }
        Ok(Ordinal { terms })
    }

    pub fn terms(&self) -> &[(Ordinal, BigUint)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when the ordinal is of the form beta + 1.
    pub fn is_successor(&self) -> bool {
        self.terms
            .last()
            .map(|(e, _)| e.is_zero())
            .unwrap_or(false)
    }

    /// True for nonzero ordinals that are not successors.
    pub fn is_limit(&self) -> bool {
        !self.is_zero() && !self.is_successor()
    }

    pub fn is_finite(&self) -> bool {
        self.terms.len() <= 1 && self.terms.iter().all(|(e, _)| e.is_zero())
    }

    pub fn as_u64(&self) -> Option<u64> {
        if self.is_zero() {
            Some(0)
        } else if self.is_finite() {
            u64::try_from(&self.terms[0].1).ok()
        } else {
            None
        }
    }

    /// Ordinal addition. Terms of `self` with exponent below the leading
    /// exponent of `other` are absorbed.
    pub fn add(&self, other: &Ordinal) -> Ordinal {
        if other.is_zero() {
            return self.clone();
        }
        let lead = &other.terms[0].0;
        let mut terms: Vec<(Ordinal, BigUint)> = self
            .terms
            .iter()
            .filter(|(e, _)| e >= lead)
            .cloned()
            .collect();
        let mut rest = other.terms.clone();
        if let Some(last) = terms.last_mut() {
            if &last.0 == lead {
                last.1 += &rest[0].1;
                rest.remove(0);
            }
        }
        terms.extend(rest);
        Ordinal { terms }
    }

    pub fn succ(&self) -> Ordinal {
        self.add(&Ordinal::one())
    }

    /// The predecessor of a successor ordinal.
    pub fn pred(&self) -> Option<Ordinal> {
        if !self.is_successor() {
            return None;
        }
        let mut terms = self.terms.clone();
        let last = terms.last_mut().unwrap();
        if last.1.is_one() {
            terms.pop();
        } else {
            last.1 -= BigUint::one();
        }
        Some(Ordinal { terms })
    }

    /// `other = self + k` for a finite k, if such k exists and fits u64.
    pub fn finite_delta(&self, other: &Ordinal) -> Option<u64> {
        let (sl, sn) = self.split_limit_part();
        let (ol, on) = other.split_limit_part();
        if sl != ol || on < sn {
            return None;
        }
        u64::try_from(on - sn).ok()
    }

    /// Split into (limit part, finite tail).
    fn split_limit_part(&self) -> (Ordinal, BigUint) {
        match self.terms.last() {
            Some((e, c)) if e.is_zero() => (
                Ordinal {
                    terms: self.terms[..self.terms.len() - 1].to_vec(),
                },
                c.clone(),
            ),
            _ => (self.clone(), BigUint::zero()),
        }
    }

    /// Strict supremum of a finite nonempty list: max + 1.
    pub fn sup_plus_one(items: &[Ordinal]) -> Result<Ordinal> {
        let max = items.iter().max().ok_or(Error::EmptySupremum)?;
        Ok(max.succ())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(other.terms.iter()) {
            match a.0.cmp(&b.0) {
                Ordering::Equal => {}
                ord => return ord,
            }
            match a.1.cmp(&b.1) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let coeff_one = c.is_one();
                if e.is_zero() {
                    format!("{c}")
                } else if e == &Ordinal::one() {
                    if coeff_one {
                        "w".to_string()
                    } else {
                        format!("w*{c}")
                    }
                } else if coeff_one {
                    format!("w^{{{e}}}")
                } else {
                    format!("w^{{{e}}}*{c}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

// JSON form: 0 | [[exponent, coefficient], ...].
// Coefficients serialize as numbers when they fit u64, else decimal strings;
// both forms round-trip bit-exactly.
impl Serialize for Ordinal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_zero() {
            return s.serialize_u64(0);
        }
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in &self.terms {
            seq.serialize_element(&TermOut(e, c))?;
        }
        seq.end()
    }
}

struct TermOut<'a>(&'a Ordinal, &'a BigUint);

impl Serialize for TermOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(self.0)?;
        match u64::try_from(self.1) {
            Ok(n) => seq.serialize_element(&n)?,
            Err(_) => seq.serialize_element(&self.1.to_string())?,
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Ordinal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(OrdinalVisitor)
    }
}

struct OrdinalVisitor;

impl<'de> Visitor<'de> for OrdinalVisitor {
    type Value = Ordinal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "0 or a list of [exponent, coefficient] pairs")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Ordinal, E> {
        if v == 0 {
            Ok(Ordinal::zero())
        } else {
            Err(E::custom("nonzero ordinals use the term-list form"))
        }
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Ordinal, E> {
        if v == 0 {
            Ok(Ordinal::zero())
        } else {
            Err(E::custom("nonzero ordinals use the term-list form"))
        }
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Ordinal, A::Error> {
        let mut terms = Vec::new();
        while let Some(term) = seq.next_element::<TermIn>()? {
            terms.push((term.0, term.1));
        }
        Ordinal::from_terms(terms).map_err(de::Error::custom)
    }
}

struct TermIn(Ordinal, BigUint);

impl<'de> Deserialize<'de> for TermIn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = TermIn;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "[exponent, coefficient]")
            }
            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<TermIn, A::Error> {
                let exp: Ordinal = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::custom("missing exponent"))?;
                let coeff: CoeffIn = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::custom("missing coefficient"))?;
                if seq.next_element::<serde_json::Value>()?.is_some() {
                    return Err(de::Error::custom("term has more than two entries"));
                }
                Ok(TermIn(exp, coeff.0))
            }
        }
        d.deserialize_seq(V)
    }
}

struct CoeffIn(BigUint);

impl<'de> Deserialize<'de> for CoeffIn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = CoeffIn;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a positive integer (number or decimal string)")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<CoeffIn, E> {
                Ok(CoeffIn(BigUint::from(v)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<CoeffIn, E> {
                v.parse::<BigUint>()
                    .map(CoeffIn)
                    .map_err(|_| E::custom("bad coefficient string"))
            }
        }
        d.deserialize_any(V)
    }
}

/// Rank that may exceed every CNF ordinal.
///
/// `Unbounded` is a sentinel for "at least omega_1"; it is only ever
/// produced by divergence detectors, never by ordinal arithmetic, and no
/// arithmetic accepts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RankBound {
    Bounded { ordinal: Ordinal },
    Unbounded,
}

impl RankBound {
    pub fn bounded(o: Ordinal) -> Self {
        RankBound::Bounded { ordinal: o }
    }
}

impl PartialOrd for RankBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RankBound {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RankBound::Unbounded, RankBound::Unbounded) => Ordering::Equal,
            (RankBound::Unbounded, _) => Ordering::Greater,
            (_, RankBound::Unbounded) => Ordering::Less,
            (RankBound::Bounded { ordinal: a }, RankBound::Bounded { ordinal: b }) => a.cmp(b),
        }
    }
}

impl fmt::Display for RankBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankBound::Bounded { ordinal } => write!(f, "{ordinal}"),
            RankBound::Unbounded => write!(f, "unbounded"),
        }
    }
}
