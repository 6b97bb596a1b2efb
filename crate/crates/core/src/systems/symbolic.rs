use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A single letter of a finite alphabet `{0, .., k-1}`.
pub type Symbol = u16;

/// What follows the explicit word of a [`SymbolicPoint`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// The word is followed by this period repeated forever.
    Periodic(Arc<[Symbol]>),
    /// Only the explicit word is known.
    Truncated,
}

/// A one-sided sequence over a finite alphabet.
///
/// Eventually periodic points are exact; truncated points carry a finite
/// horizon and every query beyond it fails with `HorizonExhausted`.
/// Shifting is O(1).
#[derive(Clone, Debug)]
pub struct SymbolicPoint {
    word: Arc<[Symbol]>,
    start: usize,
    tail: Tail,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl SymbolicPoint {
    pub fn periodic(preperiod: Vec<Symbol>, period: Vec<Symbol>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidPoint("empty period".into()));
        }
        Ok(SymbolicPoint { word: preperiod.into(), start: 0, tail: Tail::Periodic(period.into()) })
    }

    /// The constant sequence `s^∞`.
    pub fn constant(s: Symbol) -> Self {
        SymbolicPoint { word: Arc::from(Vec::new()), start: 0, tail: Tail::Periodic(Arc::from(vec![s])) }
    }

    pub fn truncated(word: Vec<Symbol>) -> Self {
        SymbolicPoint { word: word.into(), start: 0, tail: Tail::Truncated }
    }

    /// `prefix` followed by the sequence `rest`.
    pub fn prepend(prefix: &[Symbol], rest: &SymbolicPoint) -> Self {
        let mut word = prefix.to_vec();
        word.extend_from_slice(rest.remaining_word());
        let tail = match &rest.tail {
            Tail::Periodic(p) => {
                let phase = rest.start.saturating_sub(rest.word.len()) % p.len();
                let mut q = p[phase..].to_vec();
                q.extend_from_slice(&p[..phase]);
                Tail::Periodic(q.into())
            }
            Tail::Truncated => Tail::Truncated,
        };
        SymbolicPoint { word: word.into(), start: 0, tail }
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.tail, Tail::Periodic(_))
    }

    /// The explicit part still ahead of the current position.
    pub fn remaining_word(&self) -> &[Symbol] {
        &self.word[self.start.min(self.word.len())..]
    }

    pub fn period(&self) -> Option<&[Symbol]> {
        match &self.tail {
            Tail::Periodic(p) => Some(p),
            Tail::Truncated => None,
        }
    }

    /// Number of known coordinates, `None` when infinite.
    pub fn horizon(&self) -> Option<usize> {
        match self.tail {
            Tail::Periodic(_) => None,
            Tail::Truncated => Some(self.word.len().saturating_sub(self.start)),
        }
    }

    pub fn symbol(&self, i: usize) -> Result<Symbol> {
        let pos = self.start + i;
        if pos < self.word.len() {
            return Ok(self.word[pos]);
        }
        match &self.tail {
            Tail::Periodic(p) => Ok(p[(pos - self.word.len()) % p.len()]),
            Tail::Truncated => {
                Err(Error::HorizonExhausted { needed: i + 1, available: self.word.len().saturating_sub(self.start) })
            }
        }
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<Symbol>> {
        let mut out = Vec::with_capacity(n);
        self.write_prefix(n, &mut out)?;
        Ok(out)
    }

    /// Replaces `out` with the first `n` coordinates.
    pub fn write_prefix(&self, n: usize, out: &mut Vec<Symbol>) -> Result<()> {
        out.clear();
        let rem = self.remaining_word();
        let direct = rem.len().min(n);
        out.extend_from_slice(&rem[..direct]);
        if direct == n {
            return Ok(());
        }
        match &self.tail {
            Tail::Periodic(p) => {
                let mut pos = self.start.max(self.word.len()) - self.word.len();
                while out.len() < n {
                    out.push(p[pos % p.len()]);
                    pos += 1;
                }
                Ok(())
            }
            Tail::Truncated => Err(Error::HorizonExhausted { needed: n, available: rem.len() }),
        }
    }

    pub fn shifted(&self, by: usize) -> Self {
        let mut start = self.start + by;
        if let Tail::Periodic(p) = &self.tail {
            if start > self.word.len() {
                start = self.word.len() + (start - self.word.len()) % p.len();
            }
        }
        SymbolicPoint { word: Arc::clone(&self.word), start, tail: self.tail.clone() }
    }

    /// Index of the first disagreement, `None` when the sequences coincide.
    ///
    /// Exact for periodic-tailed points; fails when a truncated operand runs
    /// out before a disagreement is seen.
    pub fn first_difference(&self, other: &SymbolicPoint) -> Result<Option<usize>> {
        let bound = match (&self.tail, &other.tail) {
            (Tail::Periodic(p), Tail::Periodic(q)) => {
                let l = p.len() / gcd(p.len(), q.len()) * q.len();
                self.remaining_word().len().max(other.remaining_word().len()) + l
            }
            _ => usize::MAX,
        };
        let a = self.remaining_word();
        let b = other.remaining_word();
        let common = a.len().min(b.len());
        if let Some(i) = a[..common].iter().zip(&b[..common]).position(|(x, y)| x != y) {
            return Ok(Some(i));
        }
        let mut i = common;
        while i < bound {
            let (x, y) = (self.symbol(i)?, other.symbol(i)?);
            if x != y {
                return Ok(Some(i));
            }
            i += 1;
        }
        Ok(None)
    }

    /// `2^{-i}` where `i` is the first disagreement.
    pub fn distance(&self, other: &SymbolicPoint) -> Result<f64> {
        Ok(match self.first_difference(other)? {
            None => 0.0,
            Some(i) => (-(i as f64)).exp2(),
        })
    }

    pub fn max_symbol(&self) -> Option<Symbol> {
        let w = self.remaining_word().iter().copied().max();
        let p = self.period().and_then(|p| p.iter().copied().max());
        w.max(p)
    }
}

impl PartialEq for SymbolicPoint {
    fn eq(&self, other: &Self) -> bool {
        match (&self.tail, &other.tail) {
            (Tail::Periodic(_), Tail::Periodic(_)) => {
                matches!(self.first_difference(other), Ok(None))
            }
            (Tail::Truncated, Tail::Truncated) => self.remaining_word() == other.remaining_word(),
            _ => false,
        }
    }
}

fn symbol_char(s: Symbol) -> Result<char> {
    char::from_digit(s as u32, 36)
        .ok_or_else(|| Error::InvalidPoint(format!("symbol {s} has no single-character form")))
}

fn parse_word(s: &str) -> Result<Vec<Symbol>> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as Symbol)
                .ok_or_else(|| Error::InvalidPoint(format!("bad symbol character {c:?}")))
        })
        .collect()
}

/// Word rendered in base 36, one character per symbol.
pub fn format_word(w: &[Symbol]) -> Result<String> {
    w.iter().map(|&s| symbol_char(s)).collect()
}

impl SymbolicPoint {
    /// `"pre|per"` for periodic-tailed points, bare `"word"` for truncated ones.
    pub fn encode(&self) -> Result<String> {
        let pre = format_word(self.remaining_word())?;
        match &self.tail {
            Tail::Periodic(p) => {
                let off = self.start.saturating_sub(self.word.len());
                let rotated: Vec<Symbol> = (0..p.len()).map(|i| p[(off + i) % p.len()]).collect();
                Ok(format!("{pre}|{}", format_word(&rotated)?))
            }
            Tail::Truncated => Ok(pre),
        }
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.encode() {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{:?}", self),
        }
    }
}

impl FromStr for SymbolicPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('|') {
            Some((pre, per)) => SymbolicPoint::periodic(parse_word(pre)?, parse_word(per)?),
            None => Ok(SymbolicPoint::truncated(parse_word(s)?)),
        }
    }
}

impl Serialize for SymbolicPoint {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let s = self.encode().map_err(serde::ser::Error::custom)?;
        ser.serialize_str(&s)
    }
}

impl<'de> Deserialize<'de> for SymbolicPoint {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
