use std::collections::HashMap;

use rayon::prelude::*;

use crate::algebra::{CanonicalKey, FreeWord, Letter};
use crate::error::{Error, Result};
use crate::marked::group::{Element, MarkedGroup};

/// Default cap on the number of elements a ball may hold.
pub const DEFAULT_BALL_CAP: usize = 5_000_000;

const CHUNK: usize = 256;

#[derive(Clone, Debug)]
pub struct BallEntry {
    pub key: CanonicalKey,
    pub element: Element,
    /// Word length, i.e. Cayley-graph distance from the identity.
    pub distance: u32,
    /// A geodesic word in the marking.
    pub witness: FreeWord,
}

/// Identity-centred ball of a marked group, enumerated breadth-first.
///
/// Layers are expanded in a fixed order (frontier order, then letters
/// `a, A, b, B, ...`), so entry order and witnesses do not depend on the
/// number of worker threads.
#[derive(Clone, Debug)]
pub struct Ball {
    radius: usize,
    entries: Vec<BallEntry>,
    index: HashMap<CanonicalKey, usize>,
    /// `layer_ends[r]` = number of entries at distance `<= r`.
    layer_ends: Vec<usize>,
    truncated: bool,
}

impl Ball {
    /// Exact ball of radius `radius`; fails if more than `cap` elements.
    pub fn build(group: &MarkedGroup, radius: usize, cap: usize) -> Result<Ball> {
        let ball = Ball::build_partial(group, radius, cap)?;
        if ball.truncated {
            return Err(Error::BudgetExceeded { what: "ball", limit: cap as u64 });
        }
        Ok(ball)
    }

    /// Like [`Ball::build`] but stops at the last complete layer when the cap
    /// is hit; check [`Ball::truncated`].
    pub fn build_partial(group: &MarkedGroup, radius: usize, cap: usize) -> Result<Ball> {
        let mut ball = Ball::new(group)?;
        while ball.radius < radius && ball.grow(group, cap)? {}
        Ok(ball)
    }

    /// The radius-0 ball `{id}`.
    pub fn new(group: &MarkedGroup) -> Result<Ball> {
        let id = group.identity();
        let id_key = group.key(&id)?;
        Ok(Ball {
            radius: 0,
            entries: vec![BallEntry { key: id_key.clone(), element: id, distance: 0, witness: FreeWord::identity() }],
            index: HashMap::from([(id_key, 0)]),
            layer_ends: vec![1],
            truncated: false,
        })
    }

    /// Adds the next sphere. Returns `false` (and marks the ball truncated,
    /// leaving it unchanged) if the ball would exceed `cap` elements.
    pub fn grow(&mut self, group: &MarkedGroup, cap: usize) -> Result<bool> {
        if self.truncated {
            return Ok(false);
        }
        let r = self.radius + 1;
        let start = if r == 1 { 0 } else { self.layer_ends[r - 2] };
        let end = self.layer_ends[r - 1];
        let letters: Vec<Letter> = Letter::all(group.rank()).collect();
        let candidates: Vec<Vec<(CanonicalKey, Element, usize, Letter)>> = self.entries[start..end]
            .par_chunks(CHUNK)
            .enumerate()
            .map(|(ci, chunk)| {
                let mut out = Vec::with_capacity(chunk.len() * letters.len());
                for (j, e) in chunk.iter().enumerate() {
                    for &l in &letters {
                        if e.witness.letters().last().is_some_and(|last| last.cancels(l)) {
                            continue;
                        }
                        let x = group.mul_letter(&e.element, l);
                        let k = group.key(&x)?;
                        out.push((k, x, start + ci * CHUNK + j, l));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let before = self.entries.len();
        for (k, x, parent, l) in candidates.into_iter().flatten() {
            if self.index.contains_key(&k) {
                continue;
            }
            if self.entries.len() >= cap {
                self.entries.truncate(before);
                self.index.retain(|_, &mut i| i < before);
                self.truncated = true;
                return Ok(false);
            }
            let mut witness = self.entries[parent].witness.clone();
            witness.push(l);
            self.index.insert(k.clone(), self.entries.len());
            self.entries.push(BallEntry { key: k, element: x, distance: r as u32, witness });
        }
        self.layer_ends.push(self.entries.len());
        self.radius = r;
        Ok(true)
    }

    /// Entries at distance exactly `r`.
    pub fn sphere(&self, r: usize) -> &[BallEntry] {
        if r > self.radius {
            return &[];
        }
        let start = if r == 0 { 0 } else { self.layer_ends[r - 1] };
        &self.entries[start..self.layer_ends[r]]
    }

    /// Largest radius whose layer is complete.
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[BallEntry] {
        &self.entries
    }

    /// `V(r)`, the number of elements of word length at most `r`.
    pub fn volume(&self, r: usize) -> Result<usize> {
        self.layer_ends.get(r).copied().ok_or(Error::RadiusExceeded { radius: self.radius })
    }

    /// Sphere sizes `|S(0)|, |S(1)|, ...`.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.layer_ends
            .iter()
            .map(|&e| {
                let s = e - prev;
                prev = e;
                s
            })
            .collect()
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<&BallEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    pub fn word_length_of_key(&self, key: &CanonicalKey) -> Result<usize> {
        self.get(key)
            .map(|e| e.distance as usize)
            .ok_or(Error::RadiusExceeded { radius: self.radius })
    }

    pub fn word_length(&self, group: &MarkedGroup, x: &Element) -> Result<usize> {
        self.word_length_of_key(&group.key(x)?)
    }
}
