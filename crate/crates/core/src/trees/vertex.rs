use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Deepest level a [`Vertex`] can address (`3^40 < 2^64`).
pub const MAX_LEVEL: usize = 40;

/// Vertex of the rooted ternary tree, stored as its digit string read as a
/// base-3 number. The first digit is the level-1 coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    level: u8,
    code: u64,
}

pub(crate) const fn pow3(k: usize) -> u64 {
    let mut p = 1u64;
    let mut i = 0;
    while i < k {
        p *= 3;
        i += 1;
    }
    p
}

impl Vertex {
    pub const ROOT: Vertex = Vertex { level: 0, code: 0 };

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() > MAX_LEVEL {
            return Err(Error::LevelTooLarge { level: digits.len(), max: MAX_LEVEL });
        }
        let mut code = 0u64;
        for &d in digits {
            if d > 2 {
                return Err(Error::Parse(format!("digit {d} is not in 0..3")));
            }
            code = code * 3 + d as u64;
        }
        Ok(Vertex { level: digits.len() as u8, code })
    }

    /// Vertex number `index` (lexicographic order) on `level`.
    pub fn from_index(level: usize, index: u64) -> Self {
        debug_assert!(level <= MAX_LEVEL && index < pow3(level));
        Vertex { level: level as u8, code: index }
    }

    pub fn level(self) -> usize {
        self.level as usize
    }

    /// Lexicographic index among the vertices of the same level.
    pub fn index(self) -> u64 {
        self.code
    }

    /// Digit at position `i` (0-based from the root).
    pub fn digit(self, i: usize) -> u8 {
        debug_assert!(i < self.level());
        ((self.code / pow3(self.level() - 1 - i)) % 3) as u8
    }

    pub fn digits(self) -> Vec<u8> {
        (0..self.level()).map(|i| self.digit(i)).collect()
    }

    pub fn last_digit(self) -> Option<u8> {
        (self.level > 0).then_some((self.code % 3) as u8)
    }

    pub fn parent(self) -> Option<Vertex> {
        (self.level > 0).then(|| Vertex { level: self.level - 1, code: self.code / 3 })
    }

    pub fn child(self, d: u8) -> Vertex {
        debug_assert!(d < 3 && self.level() < MAX_LEVEL);
        Vertex { level: self.level + 1, code: self.code * 3 + d as u64 }
    }

    /// The first `k` digits.
    pub fn prefix(self, k: usize) -> Vertex {
        debug_assert!(k <= self.level());
        Vertex { level: k as u8, code: self.code / pow3(self.level() - k) }
    }

    /// `digit` repeated `count` times.
    pub fn repeated(digit: u8, count: usize) -> Vertex {
        let digits = vec![digit; count];
        Vertex::from_digits(&digits).expect("repeated digit vertex")
    }

    /// All vertices of `level` in lexicographic order.
    pub fn level_iter(level: usize) -> impl Iterator<Item = Vertex> {
        (0..pow3(level)).map(move |code| Vertex { level: level as u8, code })
    }

    /// `2^k 0`-style vertex: `twos` copies of 2 followed by `tail`.
    pub fn twos_then(twos: usize, tail: u8) -> Vertex {
        Vertex::repeated(2, twos).child(tail)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.level == 0 {
            return f.write_str("");
        }
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex(\"{self}\")")
    }
}

impl FromStr for Vertex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1),
                '2' => Ok(2),
                _ => Err(Error::Parse(format!("vertex {s:?} has non-ternary character {c:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Vertex::from_digits(&digits)
    }
}

impl Serialize for Vertex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Vertex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
