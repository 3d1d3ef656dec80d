use std::collections::BTreeMap;

use crate::algebra::{Factor, FreeProductElem, FreeWord};
use crate::error::{Error, Result};
use crate::trees::vertex::{pow3, Vertex, MAX_LEVEL};

/// Element of the level quotient `G_n`, recorded as the rotation applied
/// below each vertex of levels `0..n`.
///
/// A vertex `x = x1 x2 ... xk` is sent to `y` with
/// `y_i = x_i + label(x1 ... x_{i-1}) mod 3`. Labels absent from the map are 0.
/// Products follow the right action `x·(gh) = (x·g)·h`, so
/// `label_{gh}(v) = label_g(v) + label_h(v·g)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Portrait {
    depth: u8,
    labels: BTreeMap<Vertex, u8>,
}

impl Portrait {
    pub fn identity(depth: usize) -> Self {
        assert!(depth <= MAX_LEVEL, "portrait depth {depth} exceeds {MAX_LEVEL}");
        Portrait { depth: depth as u8, labels: BTreeMap::new() }
    }

    /// Builds a portrait from explicit labels; zero labels are dropped.
    pub fn from_labels<I>(depth: usize, labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, u8)>,
    {
        if depth > MAX_LEVEL {
            return Err(Error::LevelTooLarge { level: depth, max: MAX_LEVEL });
        }
        let mut p = Portrait::identity(depth);
        for (v, l) in labels {
            if v.level() >= depth {
                return Err(Error::VertexTooDeep { level: v.level(), depth });
            }
            let l = l % 3;
            if l != 0 {
                p.labels.insert(v, l);
            }
        }
        Ok(p)
    }

    /// Root 3-cycle `a`.
    pub fn generator_a(depth: usize) -> Self {
        let mut p = Portrait::identity(depth);
        p.mul_a(1);
        p
    }

    /// `b = (a, id, b)`: label 1 exactly at `2^k 0` for `0 <= k <= depth-2`.
    pub fn generator_b(depth: usize) -> Self {
        let mut p = Portrait::identity(depth);
        p.mul_b(1);
        p
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn labels(&self) -> &BTreeMap<Vertex, u8> {
        &self.labels
    }

    pub fn label(&self, v: Vertex) -> u8 {
        self.labels.get(&v).copied().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.labels.is_empty()
    }

    /// Root permutation as a power of the 3-cycle.
    pub fn root_label(&self) -> u8 {
        self.label(Vertex::ROOT)
    }

    fn check_vertex(&self, x: Vertex) -> Result<()> {
        if x.level() > self.depth() {
            return Err(Error::VertexTooDeep { level: x.level(), depth: self.depth() });
        }
        Ok(())
    }

    /// `x·g`.
    pub fn act(&self, x: Vertex) -> Result<Vertex> {
        self.check_vertex(x)?;
        Ok(self.act_unchecked(x))
    }

    pub(crate) fn act_unchecked(&self, x: Vertex) -> Vertex {
        let mut src = Vertex::ROOT;
        let mut dst = Vertex::ROOT;
        for i in 0..x.level() {
            let d = x.digit(i);
            dst = dst.child((d + self.label(src)) % 3);
            src = src.child(d);
        }
        dst
    }

    /// `x·g^{-1}`.
    pub fn act_inverse(&self, x: Vertex) -> Result<Vertex> {
        self.check_vertex(x)?;
        Ok(self.act_inverse_unchecked(x))
    }

    pub(crate) fn act_inverse_unchecked(&self, y: Vertex) -> Vertex {
        let mut src = Vertex::ROOT;
        for i in 0..y.level() {
            let d = (y.digit(i) + 3 - self.label(src)) % 3;
            src = src.child(d);
        }
        src
    }

    fn add_label(&mut self, v: Vertex, l: u8) {
        let l = l % 3;
        if l == 0 {
            return;
        }
        let e = self.labels.entry(v).or_insert(0);
        *e = (*e + l) % 3;
        if *e == 0 {
            self.labels.remove(&v);
        }
    }

    /// In-place right multiplication by `a^e`.
    pub fn mul_a(&mut self, e: u8) {
        if self.depth > 0 {
            // label_{g a}(v) = label_g(v) + label_a(v·g); only v·g = root counts
            self.add_label(Vertex::ROOT, e);
        }
    }

    /// In-place right multiplication by `b^e`.
    pub fn mul_b(&mut self, e: u8) {
        for k in 0..self.depth().saturating_sub(1) {
            let target = Vertex::twos_then(k, 0);
            let v = self.act_inverse_unchecked(target);
            self.add_label(v, e);
        }
    }

    pub fn mul(&self, other: &Portrait) -> Result<Portrait> {
        if self.depth != other.depth {
            return Err(Error::DepthMismatch { left: self.depth(), right: other.depth() });
        }
        let mut out = self.clone();
        for (&u, &l) in &other.labels {
            out.add_label(self.act_inverse_unchecked(u), l);
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Portrait {
        let mut out = Portrait::identity(self.depth());
        for (&u, &l) in &self.labels {
            out.labels.insert(self.act_unchecked(u), 3 - l);
        }
        out
    }

    /// Image of a normal-form word (`s` read as `a`, `t` as `b`).
    pub fn of_fp(word: &FreeProductElem, depth: usize) -> Portrait {
        let mut p = Portrait::identity(depth);
        for syl in word.syllables() {
            match syl.factor {
                Factor::S => p.mul_a(syl.exp),
                Factor::T => p.mul_b(syl.exp),
            }
        }
        p
    }

    /// Image in `G_depth` of a word over `{a, b}` (generator 0 is `a`).
    pub fn of_word(word: &FreeWord, depth: usize) -> Portrait {
        let mut p = Portrait::identity(depth);
        for l in word.letters() {
            let e = if l.inverse { 2 } else { 1 };
            match l.gen {
                0 => p.mul_a(e),
                1 => p.mul_b(e),
                g => panic!("generator {g} is not a Fabrykowski-Gupta generator"),
            }
        }
        p
    }

    /// Same element viewed at a smaller depth.
    pub fn truncate(&self, depth: usize) -> Portrait {
        assert!(depth <= self.depth());
        Portrait {
            depth: depth as u8,
            labels: self.labels.iter().filter(|(v, _)| v.level() < depth).map(|(&v, &l)| (v, l)).collect(),
        }
    }

    /// Same element viewed at depth + 1 with the given bottom labels.
    pub(crate) fn extend_with(&self, bottom: impl IntoIterator<Item = (Vertex, u8)>) -> Portrait {
        let mut out = Portrait { depth: self.depth + 1, labels: self.labels.clone() };
        for (v, l) in bottom {
            debug_assert_eq!(v.level(), self.depth());
            out.add_label(v, l);
        }
        out
    }

    /// Checks that the induced map on `level` is a bijection.
    pub fn is_level_bijection(&self, level: usize) -> bool {
        if level > self.depth() {
            return false;
        }
        let n = pow3(level) as usize;
        let mut seen = vec![false; n];
        for v in Vertex::level_iter(level) {
            let img = self.act_unchecked(v);
            if img.level() != level || seen[img.index() as usize] {
                return false;
            }
            seen[img.index() as usize] = true;
        }
        true
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.labels).expect("portrait labels serialize")
    }
}
