//! Free-group words, the free product `Z/3 * Z/3`, and canonical keys.
//!
//! Text syntax: free words use one letter per generator (`a`, `b`, ...) with
//! capitals for inverses, e.g. `"a b A"`. Free-product elements use `s`/`t`
//! with an optional exponent suffix, e.g. `"s t2 s"`.

mod free_product;
mod free_word;
pub mod key;

pub use free_product::{Factor, FreeProductElem, Syllable};
pub use free_word::{FreeWord, Letter};
pub use key::{CanonicalKey, KeyBuilder};

/// Shorthand for the letter `a` (generator 0) of a rank-2 free group.
pub const LETTER_A: Letter = Letter::pos(0);
/// Shorthand for the letter `b` (generator 1) of a rank-2 free group.
pub const LETTER_B: Letter = Letter::pos(1);
