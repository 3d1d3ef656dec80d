use marklab::algebra::FreeWord;
use marklab::marked::{
    agreement_radius, diagonal_product, evaluate_marking, lift_marking, verify_quotient, Ball, MarkedGroup,
    SearchConfig, DEFAULT_BALL_CAP,
};
use proptest::prelude::*;

fn g(spec: &str) -> MarkedGroup {
    MarkedGroup::parse(spec).unwrap()
}

fn words_up_to(len: usize) -> Vec<FreeWord> {
    (0..=len).flat_map(|n| FreeWord::sphere(2, n)).collect()
}

fn trivial(group: &MarkedGroup, w: &FreeWord) -> bool {
    group.is_identity(&group.eval_word(w).unwrap()).unwrap()
}

#[test]
fn gamma_agrees_with_g_on_short_relations() {
    for n in 3..=5 {
        let cap = 1usize << (n - 1);
        let a = agreement_radius(&g(&format!("gamma:{n}")), &g("fg:a,b"), cap).unwrap();
        assert!(a.exact);
        assert_eq!(a.value, cap, "n = {n}");
    }
}

#[test]
fn diagonal_relations_are_intersections() {
    let words = words_up_to(8);
    for (l, r) in [("abelian:2", "fg:a,b"), ("free:2", "abelian:2"), ("gamma:2", "abelian:2")] {
        let (left, right) = (g(l), g(r));
        let diag = diagonal_product(left.clone(), right.clone()).unwrap();
        for w in &words {
            assert_eq!(trivial(&diag, w), trivial(&left, w) && trivial(&right, w), "{l} ⊗ {r}, word {w}");
        }
    }
}

#[test]
fn gamma_chain_relations_grow() {
    let words = words_up_to(8);
    for n in 1..=3 {
        let (src, quo) = (g(&format!("gamma:{n}")), g(&format!("gamma:{}", n + 1)));
        for w in &words {
            if trivial(&src, w) {
                assert!(trivial(&quo, w), "relation {w} of Γ_{n} fails in Γ_{}", n + 1);
            }
        }
    }
    for n in 1..=4 {
        verify_quotient(&g(&format!("gamma:{n}")), &g(&format!("gamma:{}", n + 1)), 8, DEFAULT_BALL_CAP).unwrap();
    }
}

#[test]
fn diagonal_agreement_consistency() {
    for (l, r) in [("abelian:2", "fg:a,b"), ("free:2", "abelian:2"), ("gamma:3", "abelian:2")] {
        let (g1, g2) = (g(l), g(r));
        let diag = diagonal_product(g1.clone(), g2.clone()).unwrap();
        let lhs = agreement_radius(&diag, &g1, 8).unwrap().value;
        let rhs = agreement_radius(&g2, &g1, 8).unwrap().value;
        assert!(lhs >= rhs, "{l} ⊗ {r}: {lhs} < {rhs}");
    }
}

#[test]
fn diagonal_of_equal_groups() {
    for spec in ["fg:a,b", "gamma:3", "abelian:2"] {
        let diag = diagonal_product(g(spec), g(spec)).unwrap();
        let a = Ball::build(&diag, 5, DEFAULT_BALL_CAP).unwrap();
        let b = Ball::build(&g(spec), 5, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(a.sphere_sizes(), b.sphere_sizes());
    }
}

#[test]
fn lifted_markings_agree_with_g() {
    let cfg = SearchConfig::default();
    let cases = [(vec!["a", "b"], 4), (vec!["a", "b"], 5), (vec!["ab", "b"], 5)];
    for (marking, n) in cases {
        let marking: Vec<FreeWord> = marking.iter().map(|s| FreeWord::parse(s, 2).unwrap()).collect();
        let result = evaluate_marking(&MarkedGroup::fg(), marking.clone(), &cfg).unwrap();
        let lifted = lift_marking(&result, n).unwrap();
        let bound = 2 * ((1usize << (n - 3)) / result.ell);
        let a = agreement_radius(&lifted, &MarkedGroup::fg_marked(marking).unwrap(), bound).unwrap();
        assert!(a.exact);
        assert_eq!(a.value, bound);
    }
}

const FIXTURES: [&str; 5] = ["free:2", "abelian:2", "fg:a,b", "gamma:2", "gamma:3"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn agreement_is_symmetric(i in 0..FIXTURES.len(), j in 0..FIXTURES.len(), cap in 0usize..7) {
        let (a, b) = (g(FIXTURES[i]), g(FIXTURES[j]));
        prop_assert_eq!(agreement_radius(&a, &b, cap).unwrap().value, agreement_radius(&b, &a, cap).unwrap().value);
        prop_assert_eq!(agreement_radius(&a, &a, cap).unwrap().value, cap);
    }

    #[test]
    fn word_length_is_subadditive(i in 0..FIXTURES.len(), x in 0usize..500, y in 0usize..500) {
        let group = g(FIXTURES[i]);
        let big = Ball::build(&group, 6, DEFAULT_BALL_CAP).unwrap();
        let small = big.volume(3).unwrap();
        let (u, v) = (&big.entries()[x % small], &big.entries()[y % small]);
        let uv = group.mul(&u.element, &v.element);
        prop_assert!(big.word_length(&group, &uv).unwrap() <= (u.distance + v.distance) as usize);
    }

    #[test]
    fn ball_distances_match_witnesses(i in 0..FIXTURES.len(), r in 0usize..5) {
        let group = g(FIXTURES[i]);
        let ball = Ball::build(&group, r, DEFAULT_BALL_CAP).unwrap();
        prop_assert_eq!(ball.entries()[0].distance, 0);
        for e in ball.entries() {
            prop_assert!(e.distance as usize <= r);
            prop_assert_eq!(e.witness.len(), e.distance as usize);
            prop_assert_eq!(group.key(&group.eval_word(&e.witness).unwrap()).unwrap(), e.key.clone());
        }
    }
}
