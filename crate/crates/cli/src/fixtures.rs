//! Fixture suites. Each check names the invariant it exercises so that a
//! failure points at the module responsible.

use marklab::algebra::{FreeWord, Letter};
use marklab::schreier::{build_schreier_capped, critical_pair};
use marklab::wreath::{commutator, tau_lift, GammaGenerators, WreathElem, WreathJson};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::args::Suite;

pub const LEMMA_VIRTUAL_FIXTURE: &str = include_str!("../fixtures/lemma-virtual.json");

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    /// Module invariant exercised by the check.
    pub invariant: &'static str,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub suites: Vec<&'static str>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl FixtureReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("suite,check,invariant,passed\n");
        for c in &self.checks {
            out.push_str(&format!("{},{},\"{}\",{}\n", c.suite, c.name, c.invariant, c.passed));
        }
        out
    }
}

#[derive(Clone, Debug, Deserialize)]
struct LemmaFixture {
    level: usize,
    left: String,
    right: String,
    expected: WreathJson,
    conjugate: ConjugateFixture,
}

#[derive(Clone, Debug, Deserialize)]
struct ConjugateFixture {
    word: String,
    expected: WreathJson,
}

pub struct FixtureOptions {
    pub seed: u64,
    pub chain_samples: usize,
    pub short_samples: usize,
}

pub fn run_suites(suite: Suite, opts: &FixtureOptions) -> FixtureReport {
    let chosen: Vec<Suite> = match suite {
        Suite::All => vec![Suite::LemmaVirtual, Suite::QuotientChain, Suite::Schreier, Suite::ShortWords],
        s => vec![s],
    };
    let mut checks = Vec::new();
    let mut names = Vec::new();
    for s in chosen {
        let (name, c) = match s {
            Suite::LemmaVirtual => ("lemma-virtual", lemma_virtual()),
            Suite::QuotientChain => ("quotient-chain", quotient_chain(opts.seed, opts.chain_samples)),
            Suite::Schreier => ("schreier", schreier_bound()),
            Suite::ShortWords => ("short-words", short_words(opts.seed, opts.short_samples)),
            Suite::All => unreachable!(),
        };
        names.push(name);
        checks.extend(c);
    }
    let passed = checks.iter().all(|c| c.passed);
    FixtureReport { suites: names, checks, passed }
}

fn check(suite: &'static str, name: impl Into<String>, invariant: &'static str, passed: bool, detail: Value) -> Check {
    Check { suite, name: name.into(), invariant, passed, detail }
}

fn word(text: &str) -> FreeWord {
    FreeWord::parse(text, 2).expect("fixture words are valid")
}

pub fn lemma_virtual() -> Vec<Check> {
    const S: &str = "lemma-virtual";
    let fx: LemmaFixture = serde_json::from_str(LEMMA_VIRTUAL_FIXTURE).expect("shipped fixture parses");
    let gens = GammaGenerators::new(fx.level);
    let u = gens.eval(&word(&fx.left));
    let v = gens.eval(&word(&fx.right));
    let c = commutator(&u, &v).expect("same level");
    let value = c.to_json();
    let support = c.config().entries().len();
    let mut out = vec![
        check(S, "commutator-nontrivial", "wreath: [u, v] != id", !c.is_identity(), json!({ "value": value })),
        check(
            S,
            "quotient-trivial",
            "wreath: quotient([u, v]) = id in the tree quotient",
            c.quotient().is_identity(),
            json!({ "portrait": value.portrait }),
        ),
        check(
            S,
            "values-in-commutator-subgroup",
            "algebra: every configuration value abelianizes to (0,0)",
            c.config().entries().values().all(|x| x.in_commutator_subgroup()),
            json!({
                "abelianized": c.config().entries().iter()
                    .map(|(k, x)| (k.to_string(), x.abelianize()))
                    .collect::<std::collections::BTreeMap<_, _>>()
            }),
        ),
        check(
            S,
            "recorded-value",
            "wreath: multiplication reproduces the recorded commutator",
            value == fx.expected,
            json!({ "computed": value, "recorded": fx.expected }),
        ),
    ];
    let conj = gens.eval(&word(&fx.conjugate.word)).to_json();
    out.push(check(
        S,
        "conjugate-generator",
        "wreath: conjugating b by a moves its values to vertices 1 and 2",
        conj == fx.conjugate.expected,
        json!({ "word": fx.conjugate.word, "computed": conj }),
    ));
    // Reported only: the configuration support of the commutator.
    out.push(check(
        S,
        "support-report",
        "report: configuration support size (not asserted)",
        true,
        json!({ "support_size": support, "single_vertex": support == 1 }),
    ));
    out
}

/// Uniform letter strings (not necessarily reduced) of length uniform in `0..=max_len`.
fn random_word(rng: &mut ChaCha8Rng, max_len: usize, min_len: usize) -> FreeWord {
    let len = rng.gen_range(min_len..=max_len);
    let letters: Vec<Letter> = (0..len).map(|_| Letter::all(2).nth(rng.gen_range(0..4)).unwrap()).collect();
    FreeWord::reduce(2, letters).expect("rank 2")
}

fn sample_words(seed: u64, stream: u64, count: usize, min_len: usize, max_len: usize) -> Vec<FreeWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| random_word(&mut rng, max_len, min_len)).collect()
}

pub fn quotient_chain(seed: u64, samples: usize) -> Vec<Check> {
    const S: &str = "quotient-chain";
    let mut out = Vec::new();
    for n in 1..=4usize {
        let lo = GammaGenerators::new(n);
        let hi = GammaGenerators::new(n + 1);
        let gens_ok = [(0u8, false), (1u8, false)].iter().all(|&(g, i)| tau_lift(lo.letter(g, i)) == *hi.letter(g, i));
        out.push(check(
            S,
            format!("generators-n{n}"),
            "wreath: tau_lift(a_n, b_n) = (a_{n+1}, b_{n+1})",
            gens_ok,
            json!({ "level": n }),
        ));
        let words = sample_words(seed, n as u64, samples, 0, 20);
        let bad: Vec<&FreeWord> =
            words.par_iter().filter(|w| tau_lift(&lo.eval(w)) != hi.eval(w)).collect::<Vec<_>>();
        out.push(check(
            S,
            format!("words-n{n}"),
            "wreath: tau_lift(eval(w, n)) = eval(w, n+1)",
            bad.is_empty(),
            json!({ "level": n, "samples": samples, "failures": bad.len(),
                    "first_failure": bad.first().map(|w| w.compact()) }),
        ));
    }
    out
}

pub fn schreier_bound() -> Vec<Check> {
    const S: &str = "schreier";
    let mut out = Vec::new();
    for n in 1..=8usize {
        let g = build_schreier_capped(n, n).expect("level within cap");
        let (u, v) = critical_pair(n);
        let d = g.distance(u, v).ok();
        let bound = 1u32 << (n - 1);
        out.push(check(
            S,
            format!("level-{n}"),
            "schreier: graph connected and d(2^{n-1}0, 2^n) >= 2^{n-1}",
            g.is_connected() && d.is_some_and(|d| d >= bound),
            json!({ "level": n, "source": u.to_string(), "target": v.to_string(), "distance": d, "bound": bound }),
        ));
    }
    out
}

fn single_factor_values(x: &WreathElem) -> bool {
    x.config().entries().values().all(|v| v.is_single_factor())
}

pub fn short_words(seed: u64, samples: usize) -> Vec<Check> {
    const S: &str = "short-words";
    let mut out = Vec::new();
    for n in [4usize, 5] {
        let gens = GammaGenerators::new(n);
        let radius = 1usize << (n - 2);
        let exhaustive_len = radius.min(6);
        let exhaustive: Vec<FreeWord> = (0..=exhaustive_len).flat_map(|l| FreeWord::sphere(2, l)).collect();
        let bad = exhaustive.par_iter().find_first(|w| !single_factor_values(&gens.eval(w)));
        out.push(check(
            S,
            format!("exhaustive-n{n}"),
            "wreath: short words have configuration values in <s> or <t>",
            bad.is_none(),
            json!({ "level": n, "max_len": exhaustive_len, "words": exhaustive.len(),
                    "first_failure": bad.map(|w| w.compact()) }),
        ));
        let words = sample_words(seed, 100 + n as u64, samples, 0, radius);
        let bad = words.par_iter().find_first(|w| !single_factor_values(&gens.eval(w)));
        out.push(check(
            S,
            format!("sampled-n{n}"),
            "wreath: short words have configuration values in <s> or <t>",
            bad.is_none(),
            json!({ "level": n, "max_len": radius, "samples": samples,
                    "first_failure": bad.map(|w| w.compact()) }),
        ));
    }
    out
}
