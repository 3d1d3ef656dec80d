//! Exact word problem for the Fabrykowski-Gupta group.
//!
//! An element written as a normal-form word over `a, b` (with `a^3 = b^3 = 1`
//! already applied) splits as `g = (g|0, g|1, g|2)·a^k`. The sections are again
//! normal-form words, and because the group is contracting only finitely many
//! distinct section words occur. Exploring them gives a finite Moore machine
//! (input: a digit, output: the rotation at that vertex) whose behaviour is the
//! element itself. The element is trivial iff every reachable state has zero
//! rotation; two elements are equal iff their minimised machines coincide.

use std::collections::{HashMap, HashSet};

use crate::algebra::key::{layout, CanonicalKey, KeyBuilder};
use crate::algebra::{Factor, FreeProductElem, FreeWord};
use crate::error::{Error, Result};

/// Default bound on distinct section words explored per query.
pub const DEFAULT_WORD_PROBLEM_BUDGET: u64 = 1_000_000;

/// Normal form of a word over `{a, b}` (generator 0 is `a`).
pub fn fg_normal_form(word: &FreeWord) -> FreeProductElem {
    let mut out = FreeProductElem::identity();
    for l in word.letters() {
        let factor = if l.gen == 0 { Factor::S } else { Factor::T };
        out.push(factor, if l.inverse { 2 } else { 1 });
    }
    out
}

/// Root rotation and the three first-level sections.
pub fn split(word: &FreeProductElem) -> (u8, [FreeProductElem; 3]) {
    let mut sections: [FreeProductElem; 3] = Default::default();
    let mut root = 0u8;
    for syl in word.syllables() {
        if syl.factor == Factor::S {
            root = (root + syl.exp) % 3;
        }
    }
    for (x, section) in sections.iter_mut().enumerate() {
        let mut pos = x as u8;
        for syl in word.syllables() {
            match syl.factor {
                Factor::S => pos = (pos + syl.exp) % 3,
                // b = (a, id, b)
                Factor::T => match pos {
                    0 => section.push(Factor::S, syl.exp),
                    2 => section.push(Factor::T, syl.exp),
                    _ => {}
                },
            }
        }
    }
    (root, sections)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct State {
    rotation: u8,
    children: [u32; 3],
}

/// Finite section automaton of one element; state 0 is the element itself.
#[derive(Clone, Debug)]
pub struct SectionAutomaton {
    states: Vec<State>,
}

impl SectionAutomaton {
    /// Explores all sections of `word`, failing once more than `budget`
    /// distinct section words have been seen.
    pub fn build(word: &FreeProductElem, budget: u64) -> Result<Self> {
        let mut index: HashMap<FreeProductElem, u32> = HashMap::new();
        let mut words = vec![word.clone()];
        index.insert(word.clone(), 0);
        let mut states: Vec<State> = Vec::new();
        let mut next = 0usize;
        while next < words.len() {
            let (rotation, sections) = split(&words[next]);
            let mut children = [0u32; 3];
            for (slot, s) in children.iter_mut().zip(sections) {
                *slot = match index.get(&s) {
                    Some(&i) => i,
                    None => {
                        if words.len() as u64 >= budget {
                            return Err(Error::BudgetExceeded { what: "word problem", limit: budget });
                        }
                        let i = words.len() as u32;
                        index.insert(s.clone(), i);
                        words.push(s);
                        i
                    }
                };
            }
            states.push(State { rotation, children });
            next += 1;
        }
        Ok(SectionAutomaton { states })
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.states.iter().all(|s| s.rotation == 0)
    }

    /// Moore partition refinement followed by breadth-first renumbering from
    /// the root; the result depends only on the group element.
    pub fn canonical_key(&self) -> CanonicalKey {
        let n = self.states.len();
        let mut class: Vec<u32> = self.states.iter().map(|s| s.rotation as u32).collect();
        let mut class_count = {
            let mut seen = [false; 3];
            class.iter().for_each(|&c| seen[c as usize] = true);
            seen.iter().filter(|&&b| b).count()
        };
        loop {
            let mut sig_index: HashMap<(u32, [u32; 3]), u32> = HashMap::new();
            let mut next_class = vec![0u32; n];
            for (i, s) in self.states.iter().enumerate() {
                let sig = (class[i], s.children.map(|c| class[c as usize]));
                let len = sig_index.len() as u32;
                next_class[i] = *sig_index.entry(sig).or_insert(len);
            }
            let new_count = sig_index.len();
            class = next_class;
            if new_count == class_count {
                break;
            }
            class_count = new_count;
        }

        // BFS over the quotient machine from the root class.
        let mut order: HashMap<u32, u32> = HashMap::new();
        let mut queue = vec![0usize];
        order.insert(class[0], 0);
        let mut kb = KeyBuilder::new(layout::FG_AUTOMATON);
        let mut head = 0;
        while head < queue.len() {
            let s = &self.states[queue[head]];
            head += 1;
            kb.push_u8(s.rotation);
            for &c in &s.children {
                let cls = class[c as usize];
                let id = match order.get(&cls) {
                    Some(&id) => id,
                    None => {
                        let id = order.len() as u32;
                        order.insert(cls, id);
                        queue.push(c as usize);
                        id
                    }
                };
                kb.push_varint(id as u64);
            }
        }
        kb.finish()
    }
}

/// Exact triviality test in the infinite group `G`.
pub fn is_trivial_in_g(word: &FreeWord, budget: u64) -> Result<bool> {
    is_trivial_fp(&fg_normal_form(word), budget)
}

pub fn is_trivial_fp(word: &FreeProductElem, budget: u64) -> Result<bool> {
    if word.is_identity() {
        return Ok(true);
    }
    // Breadth-first with an early exit on the first non-trivial rotation.
    let mut seen: HashSet<FreeProductElem> = HashSet::new();
    let mut queue = vec![word.clone()];
    seen.insert(word.clone());
    let mut head = 0;
    while head < queue.len() {
        let (rotation, sections) = split(&queue[head]);
        head += 1;
        if rotation != 0 {
            return Ok(false);
        }
        for s in sections {
            if s.is_identity() || seen.contains(&s) {
                continue;
            }
            if queue.len() as u64 >= budget {
                return Err(Error::BudgetExceeded { what: "word problem", limit: budget });
            }
            seen.insert(s.clone());
            queue.push(s);
        }
    }
    Ok(true)
}

/// Canonical key of the element of `G` represented by `word`.
pub fn fg_key(word: &FreeProductElem, budget: u64) -> Result<CanonicalKey> {
    Ok(SectionAutomaton::build(word, budget)?.canonical_key())
}
