use std::fmt;

use crate::algebra::key::{layout, CanonicalKey, KeyBuilder};
use crate::error::{Error, Result};

/// A signed generator. `gen` is zero-based; generator `i` prints as the
/// `i`-th lowercase letter and its inverse as the capital.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub gen: u8,
    pub inverse: bool,
}

impl Letter {
    pub const fn pos(gen: u8) -> Self {
        Letter { gen, inverse: false }
    }

    pub const fn neg(gen: u8) -> Self {
        Letter { gen, inverse: true }
    }

    pub fn inv(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    pub fn cancels(self, other: Letter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }

    /// `+1` or `-1`.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// All `2d` signed generators in the order a, A, b, B, ...
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank as u8).flat_map(|g| [Letter::pos(g), Letter::neg(g)])
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.gen) as char;
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::pos(c as u8 - b'a'))
        } else if c.is_ascii_uppercase() {
            Some(Letter::neg(c as u8 - b'A'))
        } else {
            None
        }
    }
}

/// Freely reduced word over signed generators; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord {
    letters: Vec<Letter>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord::default()
    }

    pub fn letter(l: Letter) -> Self {
        FreeWord { letters: vec![l] }
    }

    /// Freely reduces `letters`, checking that every generator is below `rank`.
    pub fn reduce<I>(rank: usize, letters: I) -> Result<Self>
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut w = FreeWord::identity();
        for l in letters {
            if l.gen as usize >= rank {
                return Err(Error::GeneratorOutOfRange { index: l.gen as usize + 1, rank });
            }
            w.push(l);
        }
        Ok(w)
    }

    /// Right-multiplies by one letter, cancelling if possible.
    pub fn push(&mut self, l: Letter) {
        match self.letters.last() {
            Some(&last) if last.cancels(l) => {
                self.letters.pop();
            }
            _ => self.letters.push(l),
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        for &l in &other.letters {
            out.push(l);
        }
        out
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn min_rank(&self) -> usize {
        self.letters.iter().map(|l| l.gen as usize + 1).max().unwrap_or(0)
    }

    /// Substitutes a word for each generator: generator `i` becomes `images[i]`.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        let mut out = FreeWord::identity();
        for l in &self.letters {
            let img = &images[l.gen as usize];
            if l.inverse {
                out = out.mul(&img.inverse());
            } else {
                out = out.mul(img);
            }
        }
        out
    }

    /// Parses text like `"a b A"` or `"abA"`; `"1"` and `""` denote the identity.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed == "1" {
            return Ok(FreeWord::identity());
        }
        let mut letters = Vec::new();
        for c in trimmed.chars() {
            if c.is_whitespace() {
                continue;
            }
            let l = Letter::from_char(c)
                .ok_or_else(|| Error::Parse(format!("unexpected character {c:?} in word {text:?}")))?;
            letters.push(l);
        }
        FreeWord::reduce(rank, letters)
    }

    /// All reduced words of length exactly `len`, in lexicographic order of
    /// the generator ordering a, A, b, B, ...
    pub fn sphere(rank: usize, len: usize) -> Vec<FreeWord> {
        let mut layer = vec![FreeWord::identity()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(layer.len() * (2 * rank).saturating_sub(1).max(1));
            for w in &layer {
                for l in Letter::all(rank) {
                    if w.letters.last().is_some_and(|last| last.cancels(l)) {
                        continue;
                    }
                    let mut nw = w.clone();
                    nw.letters.push(l);
                    next.push(nw);
                }
            }
            layer = next;
        }
        layer
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut kb = KeyBuilder::new(layout::FREE_WORD);
        for l in &self.letters {
            kb.push_u8(l.gen << 1 | l.inverse as u8);
        }
        kb.finish()
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FreeWord {
    /// Compact text without separators, e.g. `abA`.
    pub fn compact(&self) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        self.letters.iter().map(|l| l.to_char()).collect()
    }
}

impl serde::Serialize for FreeWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.compact())
    }
}

/// Deserializes with rank 26; callers check the rank they need.
impl<'de> serde::Deserialize<'de> for FreeWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        FreeWord::parse(&text, 26).map_err(serde::de::Error::custom)
    }
}
