//! The wreath extensions `Γ_n ≤ A ≀_{T_n} G_n` with `A = Z/3 * Z/3`.
//!
//! Elements are pairs `(φ, g)` with `φ` a configuration on level-`n`
//! vertices and `g ∈ G_n`. The product is
//! `(φ, g)(ψ, h) = (v ↦ φ(v)·ψ(v·g), gh)`, which is the rule under which a word
//! `w = w1 ... wl` evaluates to `φ_w(x) = ∏ φ_{wi}(x·w1 ... w_{i-1})`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::key::{layout, CanonicalKey, KeyBuilder};
use crate::algebra::{Factor, FreeProductElem, FreeWord};
use crate::error::{Error, Result};
use crate::trees::{Portrait, Vertex};

/// Finitely supported map from level-`n` vertices to `A`; identity values are
/// never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    level: u8,
    entries: BTreeMap<Vertex, FreeProductElem>,
}

impl Configuration {
    pub fn identity(level: usize) -> Self {
        Configuration { level: level as u8, entries: BTreeMap::new() }
    }

    pub fn from_entries<I>(level: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, FreeProductElem)>,
    {
        let mut c = Configuration::identity(level);
        for (v, x) in entries {
            if v.level() != level {
                return Err(Error::Invalid(format!("vertex {v} is not on level {level}")));
            }
            c.set(v, x);
        }
        Ok(c)
    }

    pub fn level(&self) -> usize {
        self.level as usize
    }

    pub fn get(&self, v: Vertex) -> FreeProductElem {
        self.entries.get(&v).cloned().unwrap_or_default()
    }

    pub fn entries(&self) -> &BTreeMap<Vertex, FreeProductElem> {
        &self.entries
    }

    pub fn is_identity(&self) -> bool {
        self.entries.is_empty()
    }

    fn set(&mut self, v: Vertex, x: FreeProductElem) {
        if x.is_identity() {
            self.entries.remove(&v);
        } else {
            self.entries.insert(v, x);
        }
    }

    /// Right-multiplies the value at `v` by `x`.
    fn mul_at(&mut self, v: Vertex, x: &FreeProductElem) {
        if x.is_identity() {
            return;
        }
        let mut cur = self.entries.remove(&v).unwrap_or_default();
        cur.mul_assign(x);
        if !cur.is_identity() {
            self.entries.insert(v, cur);
        }
    }
}

/// Element `(φ, g)` of `A ≀_{T_n} G_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElem {
    config: Configuration,
    quotient: Portrait,
}

impl WreathElem {
    pub fn identity(level: usize) -> Self {
        WreathElem { config: Configuration::identity(level), quotient: Portrait::identity(level) }
    }

    pub fn new(config: Configuration, quotient: Portrait) -> Result<Self> {
        if config.level() != quotient.depth() {
            return Err(Error::DepthMismatch { left: config.level(), right: quotient.depth() });
        }
        Ok(WreathElem { config, quotient })
    }

    pub fn level(&self) -> usize {
        self.config.level()
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn quotient(&self) -> &Portrait {
        &self.quotient
    }

    pub fn is_identity(&self) -> bool {
        self.config.is_identity() && self.quotient.is_identity()
    }

    pub fn mul(&self, other: &WreathElem) -> Result<WreathElem> {
        if self.level() != other.level() {
            return Err(Error::DepthMismatch { left: self.level(), right: other.level() });
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &WreathElem) -> WreathElem {
        let mut config = self.config.clone();
        for (&u, x) in &other.config.entries {
            // ψ(u) lands at v with v·g = u
            config.mul_at(self.quotient.act_inverse_unchecked(u), x);
        }
        let quotient = self.quotient.mul(&other.quotient).expect("equal depths");
        WreathElem { config, quotient }
    }

    /// `(φ, g)^{-1} = (v ↦ φ(v·g^{-1})^{-1}, g^{-1})`.
    pub fn inverse(&self) -> WreathElem {
        let mut config = Configuration::identity(self.level());
        for (&u, x) in &self.config.entries {
            config.set(self.quotient.act_unchecked(u), x.inverse());
        }
        WreathElem { config, quotient: self.quotient.inverse() }
    }

    pub fn canonical_key(&self) -> CanonicalKey {
        let mut kb = KeyBuilder::new(layout::WREATH);
        self.write_key(&mut kb);
        kb.finish()
    }

    pub(crate) fn write_key(&self, kb: &mut KeyBuilder) {
        kb.push_u8(self.level() as u8);
        kb.push_varint(self.config.entries.len() as u64);
        for (v, x) in &self.config.entries {
            kb.push_varint(v.index());
            x.write_key(kb);
        }
        kb.push_varint(self.quotient.labels().len() as u64);
        for (v, &l) in self.quotient.labels() {
            kb.push_u8(v.level() as u8).push_varint(v.index()).push_u8(l);
        }
    }

    pub fn to_json(&self) -> WreathJson {
        WreathJson {
            level: self.level(),
            config: self.config.entries.iter().map(|(v, x)| (v.to_string(), x.to_string())).collect(),
            portrait: self.quotient.labels().iter().map(|(v, &l)| (v.to_string(), l)).collect(),
        }
    }

    pub fn from_json(j: &WreathJson) -> Result<Self> {
        let entries = j
            .config
            .iter()
            .map(|(v, x)| Ok((v.parse::<Vertex>()?, FreeProductElem::parse(x)?)))
            .collect::<Result<Vec<_>>>()?;
        let labels = j.portrait.iter().map(|(v, &l)| Ok((v.parse::<Vertex>()?, l))).collect::<Result<Vec<_>>>()?;
        WreathElem::new(Configuration::from_entries(j.level, entries)?, Portrait::from_labels(j.level, labels)?)
    }
}

/// JSON layout `{level, config: {vertex: fp-word}, portrait: {vertex: label}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WreathJson {
    pub level: usize,
    pub config: BTreeMap<String, String>,
    pub portrait: BTreeMap<String, u8>,
}

/// `(a_n, b_n)`: `a_n = (id, ā)` and
/// `b_n = (δ^s at 2^{n-1}0 + δ^t at 2^n, b̄)`.
pub fn gamma_generators(level: usize) -> (WreathElem, WreathElem) {
    assert!(level >= 1, "wreath extensions start at level 1");
    let a = WreathElem { config: Configuration::identity(level), quotient: Portrait::generator_a(level) };
    let mut config = Configuration::identity(level);
    config.set(Vertex::twos_then(level - 1, 0), FreeProductElem::s());
    config.set(Vertex::repeated(2, level), FreeProductElem::t());
    let b = WreathElem { config, quotient: Portrait::generator_b(level) };
    (a, b)
}

/// Image of a word over `{a, b}` under `a ↦ a_n`, `b ↦ b_n`.
pub fn eval_word_in_gamma(word: &FreeWord, level: usize) -> WreathElem {
    let gens = GammaGenerators::new(level);
    gens.eval(word)
}

/// Cached generators and their inverses for repeated evaluation.
#[derive(Clone, Debug)]
pub struct GammaGenerators {
    level: usize,
    /// `a, a^-1, b, b^-1`
    letters: [WreathElem; 4],
}

impl GammaGenerators {
    pub fn new(level: usize) -> Self {
        let (a, b) = gamma_generators(level);
        let letters = [a.clone(), a.inverse(), b.clone(), b.inverse()];
        GammaGenerators { level, letters }
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn letter(&self, gen: u8, inverse: bool) -> &WreathElem {
        &self.letters[2 * gen as usize + inverse as usize]
    }

    pub fn eval(&self, word: &FreeWord) -> WreathElem {
        word.letters()
            .iter()
            .fold(WreathElem::identity(self.level), |acc, l| acc.mul_unchecked(self.letter(l.gen, l.inverse)))
    }
}

/// Element of `A ≀_{{0,1,2}} <a>`: three values and a rotation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LocalWreath {
    pub values: [FreeProductElem; 3],
    pub rotation: u8,
}

impl LocalWreath {
    pub fn mul(&self, other: &LocalWreath) -> LocalWreath {
        let mut values = self.values.clone();
        for (d, v) in values.iter_mut().enumerate() {
            v.mul_assign(&other.values[(d + self.rotation as usize) % 3]);
        }
        LocalWreath { values, rotation: (self.rotation + other.rotation) % 3 }
    }
}

/// `τ : A → A ≀_{{0,1,2}} <a>` with `τ(s) = (id, a)` and
/// `τ(t) = (δ_0^s + δ_2^t, id)`.
pub fn tau(x: &FreeProductElem) -> LocalWreath {
    let mut acc = LocalWreath::default();
    for syl in x.syllables() {
        let gen = match syl.factor {
            Factor::S => LocalWreath { values: Default::default(), rotation: syl.exp },
            Factor::T => LocalWreath {
                values: [
                    FreeProductElem::power(Factor::S, syl.exp as i64),
                    FreeProductElem::identity(),
                    FreeProductElem::power(Factor::T, syl.exp as i64),
                ],
                rotation: 0,
            },
        };
        acc = acc.mul(&gen);
    }
    acc
}

/// The quotient map `Γ_n ↠ Γ_{n+1}`, `(φ, g) ↦ (τ(φ), g)`, where a level-`n+1`
/// vertex is split as (level-`n` prefix, last digit).
pub fn tau_lift(x: &WreathElem) -> WreathElem {
    let level = x.level();
    let mut config = Configuration::identity(level + 1);
    let mut bottom = Vec::new();
    for (&u, value) in &x.config.entries {
        let local = tau(value);
        for (d, v) in local.values.into_iter().enumerate() {
            config.set(u.child(d as u8), v);
        }
        bottom.push((u, local.rotation));
    }
    WreathElem { config, quotient: x.quotient.extend_with(bottom) }
}

/// Configuration of one generator letter, for checking the evaluation formula.
pub fn letter_configuration(gens: &GammaGenerators, gen: u8, inverse: bool) -> &Configuration {
    &gens.letter(gen, inverse).config
}

/// Commutator `[x, y] = x^{-1} y^{-1} x y`.
pub fn commutator(x: &WreathElem, y: &WreathElem) -> Result<WreathElem> {
    x.inverse().mul(&y.inverse())?.mul(x)?.mul(y)
}

/// The element `[b1 a1^{-1} b1 a1, a1 b1 a1^{-1} b1]` of `Γ_1`.
pub fn lemma_virtual_commutator() -> WreathElem {
    let gens = GammaGenerators::new(1);
    let u = gens.eval(&FreeWord::parse("bAba", 2).expect("static word"));
    let v = gens.eval(&FreeWord::parse("abAb", 2).expect("static word"));
    commutator(&u, &v).expect("same level")
}
