use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::key::KeyBuilder;
use crate::error::{Error, Result};

/// The two cyclic factors of `Z/3 * Z/3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    S,
    T,
}

impl Factor {
    fn symbol(self) -> char {
        match self {
            Factor::S => 's',
            Factor::T => 't',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: Factor,
    /// Always 1 or 2.
    pub exp: u8,
}

/// Element of `A = <s, t | s^3 = t^3 = 1>` in alternating normal form.
///
/// The same type doubles as a normal-form word over the Fabrykowski-Gupta
/// generators, with `s` read as `a` and `t` as `b`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeProductElem {
    syllables: Vec<Syllable>,
}

impl FreeProductElem {
    pub fn identity() -> Self {
        FreeProductElem::default()
    }

    pub fn s() -> Self {
        FreeProductElem::power(Factor::S, 1)
    }

    pub fn t() -> Self {
        FreeProductElem::power(Factor::T, 1)
    }

    /// `factor^exp` with `exp` taken mod 3.
    pub fn power(factor: Factor, exp: i64) -> Self {
        let e = exp.rem_euclid(3) as u8;
        if e == 0 {
            FreeProductElem::identity()
        } else {
            FreeProductElem { syllables: vec![Syllable { factor, exp: e }] }
        }
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of syllables.
    pub fn syllable_len(&self) -> usize {
        self.syllables.len()
    }

    /// Right-multiplies by `factor^exp`, merging and cascading as needed.
    pub fn push(&mut self, factor: Factor, exp: u8) {
        let exp = exp % 3;
        if exp == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some(last) if last.factor == factor => {
                let e = (last.exp + exp) % 3;
                if e == 0 {
                    self.syllables.pop();
                } else {
                    last.exp = e;
                }
            }
            _ => self.syllables.push(Syllable { factor, exp }),
        }
    }

    pub fn mul(&self, other: &FreeProductElem) -> FreeProductElem {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    pub fn mul_assign(&mut self, other: &FreeProductElem) {
        for syl in &other.syllables {
            self.push(syl.factor, syl.exp);
        }
    }

    pub fn inverse(&self) -> FreeProductElem {
        FreeProductElem {
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable { factor: s.factor, exp: 3 - s.exp })
                .collect(),
        }
    }

    /// Image in `A/[A,A] = Z/3 x Z/3`: total exponents of `s` and of `t`.
    pub fn abelianize(&self) -> (u8, u8) {
        let (mut es, mut et) = (0u8, 0u8);
        for syl in &self.syllables {
            match syl.factor {
                Factor::S => es = (es + syl.exp) % 3,
                Factor::T => et = (et + syl.exp) % 3,
            }
        }
        (es, et)
    }

    pub fn in_commutator_subgroup(&self) -> bool {
        self.abelianize() == (0, 0)
    }

    /// True when the element lies in `<s>` or in `<t>`.
    pub fn is_single_factor(&self) -> bool {
        self.syllables.len() <= 1
    }

    pub(crate) fn write_key(&self, kb: &mut KeyBuilder) {
        kb.push_varint(self.syllables.len() as u64);
        for syl in &self.syllables {
            let f = match syl.factor {
                Factor::S => 0u8,
                Factor::T => 2u8,
            };
            kb.push_u8(f + syl.exp - 1);
        }
    }

    /// Parses `"s t2 s"`, `"st2s"`, capitals for inverses (`S` = `s2`);
    /// `"1"` or `""` is the identity. Exponents are read mod 3.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let mut out = FreeProductElem::identity();
        if trimmed == "1" {
            return Ok(out);
        }
        let chars: Vec<char> = trimmed.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            i += 1;
            if c.is_whitespace() {
                continue;
            }
            let (factor, sign) = match c {
                's' => (Factor::S, 1),
                't' => (Factor::T, 1),
                'S' => (Factor::S, -1),
                'T' => (Factor::T, -1),
                _ => return Err(Error::Parse(format!("unexpected character {c:?} in {text:?}"))),
            };
            let mut exp_text = String::new();
            if i < chars.len() && chars[i] == '-' {
                exp_text.push('-');
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                exp_text.push(chars[i]);
                i += 1;
            }
            let exp: i64 = match exp_text.as_str() {
                "" => 1,
                t => t.parse().map_err(|_| Error::Parse(format!("bad exponent {t:?} in {text:?}")))?,
            };
            out.push(factor, (sign * exp).rem_euclid(3) as u8);
        }
        Ok(out)
    }
}

impl fmt::Display for FreeProductElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("1");
        }
        for (i, syl) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", syl.factor.symbol())?;
            if syl.exp == 2 {
                f.write_str("2")?;
            }
        }
        Ok(())
    }
}

impl Serialize for FreeProductElem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for FreeProductElem {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        FreeProductElem::parse(&s).map_err(serde::de::Error::custom)
    }
}
