//! The Fabrykowski-Gupta group acting on the rooted ternary tree.
//!
//! Generators: `a` rotates the first digit (`0w·a = 1w`, `1w·a = 2w`,
//! `2w·a = 0w`) and `b = (a, id, b)` acts by `0w·b = 0(w·a)`, `1w·b = 1w`,
//! `2w·b = 2(w·b)`. Everything here is a right action.

mod portrait;
mod vertex;
pub mod word_problem;

pub use portrait::Portrait;
pub use vertex::{Vertex, MAX_LEVEL};
pub use word_problem::{fg_key, fg_normal_form, is_trivial_in_g, SectionAutomaton, DEFAULT_WORD_PROBLEM_BUDGET};

use crate::algebra::{FreeWord, Letter};

/// `x·a^e` from the digit rule.
pub fn act_a(x: Vertex, e: u8) -> Vertex {
    if x.level() == 0 {
        return x;
    }
    let mut d = x.digits();
    d[0] = (d[0] + e) % 3;
    Vertex::from_digits(&d).expect("same level")
}

/// `x·b^e` from the digit rule.
pub fn act_b(x: Vertex, e: u8) -> Vertex {
    let mut d = x.digits();
    let mut i = 0;
    while i < d.len() && d[i] == 2 {
        i += 1;
    }
    if i + 1 < d.len() && d[i] == 0 {
        d[i + 1] = (d[i + 1] + e) % 3;
    }
    Vertex::from_digits(&d).expect("same level")
}

pub fn act_letter(x: Vertex, l: Letter) -> Vertex {
    let e = if l.inverse { 2 } else { 1 };
    match l.gen {
        0 => act_a(x, e),
        1 => act_b(x, e),
        g => panic!("generator {g} is not a Fabrykowski-Gupta generator"),
    }
}

/// Letter-by-letter evaluation of a word on a vertex: `x·(w1 w2 ...)`.
pub fn vertex_action_word(word: &FreeWord, x: Vertex) -> Vertex {
    word.letters().iter().fold(x, |v, &l| act_letter(v, l))
}
