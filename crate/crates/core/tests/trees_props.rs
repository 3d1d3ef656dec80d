use std::collections::HashMap;

use marklab::algebra::{FreeWord, Letter};
use marklab::schreier::build_schreier_capped;
use marklab::trees::{is_trivial_in_g, vertex_action_word, Portrait, Vertex};
use proptest::prelude::*;

fn word(max: usize) -> impl Strategy<Value = FreeWord> {
    prop::collection::vec((0u8..2, any::<bool>()), 0..=max)
        .prop_map(|ls| FreeWord::reduce(2, ls.into_iter().map(|(gen, inverse)| Letter { gen, inverse })).unwrap())
}

/// Syllables `(is_a, exponent)` with `a^3 = b^3 = 1` applied.
type Syl = Vec<(bool, u8)>;

fn push(w: &mut Syl, is_a: bool, e: u8) {
    if let Some(last) = w.last_mut() {
        if last.0 == is_a {
            last.1 = (last.1 + e) % 3;
            if last.1 == 0 {
                w.pop();
            }
            return;
        }
    }
    if !e.is_multiple_of(3) {
        w.push((is_a, e % 3));
    }
}

/// Recursive triviality test from the wreath recursion `b = (a, 1, b)`:
/// a word is trivial iff its root rotation is 0 and all sections are trivial.
/// Sections already on the stack are assumed trivial (greatest fixed point).
fn trivial_oracle(w: &Syl, stack: &mut HashMap<Syl, bool>) -> bool {
    if w.is_empty() {
        return true;
    }
    if let Some(&v) = stack.get(w) {
        return v;
    }
    let root: u8 = w.iter().filter(|s| s.0).map(|s| s.1).sum::<u8>() % 3;
    if root != 0 {
        return false;
    }
    stack.insert(w.clone(), true);
    let mut result = true;
    for x in 0..3u8 {
        let mut pos = x;
        let mut section = Syl::new();
        for &(is_a, e) in w {
            if is_a {
                pos = (pos + e) % 3;
            } else if pos == 0 {
                push(&mut section, true, e);
            } else if pos == 2 {
                push(&mut section, false, e);
            }
        }
        if !trivial_oracle(&section, stack) {
            result = false;
            break;
        }
    }
    stack.insert(w.clone(), result);
    result
}

fn syllables(w: &FreeWord) -> Syl {
    let mut out = Syl::new();
    for l in w.letters() {
        push(&mut out, l.gen == 0, if l.inverse { 2 } else { 1 });
    }
    out
}

#[test]
fn word_problem_matches_recursive_oracle() {
    let mut trivial = 0;
    for len in 0..=10 {
        for w in FreeWord::sphere(2, len) {
            let fast = is_trivial_in_g(&w, 1_000_000).unwrap();
            let slow = trivial_oracle(&syllables(&w), &mut HashMap::new());
            assert_eq!(fast, slow, "{}", w.compact());
            if fast {
                trivial += 1;
                assert!(Portrait::of_word(&w, 8).is_identity(), "{}", w.compact());
            }
        }
    }
    assert!(trivial > 1);
}

#[test]
fn schreier_graphs_are_connected_up_to_level_10() {
    for n in 1..=10 {
        assert!(build_schreier_capped(n, 10).unwrap().is_connected(), "level {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn portraits_are_homomorphic(u in word(12), v in word(12), n in 1usize..=6) {
        let uv = Portrait::of_word(&u.mul(&v), n);
        prop_assert_eq!(uv, Portrait::of_word(&u, n).mul(&Portrait::of_word(&v, n)).unwrap());
    }

    #[test]
    fn random_portraits_permute_levels(labels in prop::collection::vec(0u8..3, 40), depth in 1usize..=4) {
        let vertices: Vec<Vertex> = (0..depth).flat_map(Vertex::level_iter).collect();
        let p = Portrait::from_labels(depth, vertices.iter().copied().zip(labels.iter().copied().cycle())).unwrap();
        for level in 0..=depth {
            prop_assert!(p.is_level_bijection(level));
        }
        for x in Vertex::level_iter(depth) {
            prop_assert_eq!(p.act_inverse(p.act(x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn letterwise_action_matches_portrait(w in word(8), depth in 0usize..=5) {
        let p = Portrait::of_word(&w, depth);
        for x in Vertex::level_iter(depth) {
            prop_assert_eq!(vertex_action_word(&w, x), p.act(x).unwrap());
        }
    }

    #[test]
    fn schreier_distances_form_a_metric(n in 1usize..=6, i in 0u64..729, j in 0u64..729, k in 0u64..729) {
        let g = build_schreier_capped(n, 6).unwrap();
        let size = 3u64.pow(n as u32);
        let [x, y, z] = [i, j, k].map(|t| Vertex::from_index(n, t % size));
        let d = |a, b| g.distance(a, b).unwrap();
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z));
    }
}
