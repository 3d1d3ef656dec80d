use std::fmt;

use crate::algebra::key::{layout, CanonicalKey, KeyBuilder};
use crate::algebra::{FreeProductElem, FreeWord, Letter};
use crate::error::{Error, Result};
use crate::trees::word_problem::{fg_key, fg_normal_form, DEFAULT_WORD_PROBLEM_BUDGET};
use crate::wreath::{GammaGenerators, WreathElem};

/// Group element of some backend. Elements from different backends are never
/// mixed; doing so is a programming error and panics.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Element {
    Free(FreeWord),
    Abelian(Vec<i64>),
    /// Normal-form word over `a, b` (as `s, t`) representing an element of `G`.
    Fg(FreeProductElem),
    Gamma(WreathElem),
    Pair(Box<(Element, Element)>),
}

impl Element {
    pub fn pair(left: Element, right: Element) -> Element {
        Element::Pair(Box::new((left, right)))
    }

    pub fn as_pair(&self) -> Option<(&Element, &Element)> {
        match self {
            Element::Pair(p) => Some((&p.0, &p.1)),
            _ => None,
        }
    }
}

/// Free words print compactly, vectors as tuples, elements of `G` as their
/// free-product representative in `s, t`, and `Γ_n` elements as JSON.
impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Free(w) => f.write_str(&w.compact()),
            Element::Abelian(v) => {
                let parts: Vec<String> = v.iter().map(i64::to_string).collect();
                write!(f, "({})", parts.join(","))
            }
            Element::Fg(x) => write!(f, "{x}"),
            Element::Gamma(g) => {
                f.write_str(&serde_json::to_string(&g.to_json()).map_err(|_| fmt::Error)?)
            }
            Element::Pair(p) => write!(f, "<{}|{}>", p.0, p.1),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Backend {
    Free { rank: usize },
    Abelian { rank: usize },
    /// The Fabrykowski-Gupta group with its standard marking `(a, b)`.
    Fg { budget: u64 },
    /// `Γ_n` with its standard marking `(a_n, b_n)`.
    Gamma { level: usize },
    /// Same group as `base`, marked by words in the base marking.
    Remarked { base: Box<MarkedGroup>, words: Vec<FreeWord> },
    Diagonal(Box<MarkedGroup>, Box<MarkedGroup>),
}

/// A group together with an ordered generating tuple.
#[derive(Clone, Debug)]
pub struct MarkedGroup {
    backend: Backend,
    /// Images of `a, A, b, B, ...` in backend elements.
    letters: Vec<Element>,
}

impl MarkedGroup {
    pub fn free(rank: usize) -> Self {
        let letters = Letter::all(rank).map(|l| Element::Free(FreeWord::letter(l))).collect();
        MarkedGroup { backend: Backend::Free { rank }, letters }
    }

    pub fn abelian(rank: usize) -> Self {
        let letters = Letter::all(rank)
            .map(|l| {
                let mut v = vec![0i64; rank];
                v[l.gen as usize] = l.sign();
                Element::Abelian(v)
            })
            .collect();
        MarkedGroup { backend: Backend::Abelian { rank }, letters }
    }

    /// `(G, (a, b))`.
    pub fn fg() -> Self {
        MarkedGroup::fg_with_budget(DEFAULT_WORD_PROBLEM_BUDGET)
    }

    pub fn fg_with_budget(budget: u64) -> Self {
        let letters = Letter::all(2)
            .map(|l| Element::Fg(fg_normal_form(&FreeWord::letter(l))))
            .collect();
        MarkedGroup { backend: Backend::Fg { budget }, letters }
    }

    /// `(G, T)` with `T` given by words over `a, b`.
    pub fn fg_marked(words: Vec<FreeWord>) -> Result<Self> {
        MarkedGroup::fg().remark(words)
    }

    /// `(Γ_n, (a_n, b_n))`.
    pub fn gamma(level: usize) -> Result<Self> {
        if level == 0 {
            return Err(Error::Invalid("gamma level must be at least 1".into()));
        }
        let gens = GammaGenerators::new(level);
        let letters = Letter::all(2)
            .map(|l| Element::Gamma(gens.letter(l.gen, l.inverse).clone()))
            .collect();
        Ok(MarkedGroup { backend: Backend::Gamma { level }, letters })
    }

    pub fn gamma_marked(level: usize, words: Vec<FreeWord>) -> Result<Self> {
        MarkedGroup::gamma(level)?.remark(words)
    }

    /// The diagonal product: the subgroup of `G1 × G2` generated by the pairs
    /// of corresponding marking elements.
    pub fn diagonal(left: MarkedGroup, right: MarkedGroup) -> Result<Self> {
        if left.rank() != right.rank() {
            return Err(Error::MarkingSizeMismatch { left: left.rank(), right: right.rank() });
        }
        let letters = left
            .letters
            .iter()
            .zip(&right.letters)
            .map(|(x, y)| Element::pair(x.clone(), y.clone()))
            .collect();
        Ok(MarkedGroup { backend: Backend::Diagonal(Box::new(left), Box::new(right)), letters })
    }

    /// Re-marks this group by words in its current marking.
    pub fn remark(self, words: Vec<FreeWord>) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Invalid("a marking needs at least one generator".into()));
        }
        let rank = self.rank();
        for w in &words {
            if w.min_rank() > rank {
                return Err(Error::GeneratorOutOfRange { index: w.min_rank(), rank });
            }
        }
        let mut letters = Vec::with_capacity(2 * words.len());
        for w in &words {
            let x = self.eval_word(w)?;
            let inv = self.inverse(&x);
            letters.push(x);
            letters.push(inv);
        }
        Ok(MarkedGroup { backend: Backend::Remarked { base: Box::new(self), words }, letters })
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    /// Size `d` of the marking.
    pub fn rank(&self) -> usize {
        self.letters.len() / 2
    }

    /// Overrides the word-problem budget of every `G` backend inside.
    pub fn with_word_budget(self, budget: u64) -> Self {
        let MarkedGroup { backend, letters } = self;
        let backend = match backend {
            Backend::Fg { .. } => Backend::Fg { budget },
            Backend::Remarked { base, words } => {
                Backend::Remarked { base: Box::new(base.with_word_budget(budget)), words }
            }
            Backend::Diagonal(l, r) => {
                Backend::Diagonal(Box::new(l.with_word_budget(budget)), Box::new(r.with_word_budget(budget)))
            }
            other => other,
        };
        MarkedGroup { backend, letters }
    }

    /// Innermost backend that elements actually live in.
    fn element_backend(&self) -> &MarkedGroup {
        match &self.backend {
            Backend::Remarked { base, .. } => base.element_backend(),
            _ => self,
        }
    }

    pub fn identity(&self) -> Element {
        match &self.element_backend().backend {
            Backend::Free { .. } => Element::Free(FreeWord::identity()),
            Backend::Abelian { rank } => Element::Abelian(vec![0; *rank]),
            Backend::Fg { .. } => Element::Fg(FreeProductElem::identity()),
            Backend::Gamma { level } => Element::Gamma(WreathElem::identity(*level)),
            Backend::Diagonal(l, r) => Element::pair(l.identity(), r.identity()),
            Backend::Remarked { .. } => unreachable!("element_backend strips re-markings"),
        }
    }

    pub fn letter(&self, l: Letter) -> &Element {
        &self.letters[2 * l.gen as usize + l.inverse as usize]
    }

    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        mul_elements(x, y)
    }

    pub fn inverse(&self, x: &Element) -> Element {
        inverse_element(x)
    }

    pub fn mul_letter(&self, x: &Element, l: Letter) -> Element {
        mul_elements(x, self.letter(l))
    }

    pub fn eval_word(&self, w: &FreeWord) -> Result<Element> {
        if w.min_rank() > self.rank() {
            return Err(Error::GeneratorOutOfRange { index: w.min_rank(), rank: self.rank() });
        }
        let mut acc = self.identity();
        for &l in w.letters() {
            acc = self.mul_letter(&acc, l);
        }
        Ok(acc)
    }

    pub fn key(&self, x: &Element) -> Result<CanonicalKey> {
        let mut kb = KeyBuilder::raw();
        self.element_backend().write_key(x, &mut kb)?;
        Ok(kb.finish())
    }

    fn write_key(&self, x: &Element, kb: &mut KeyBuilder) -> Result<()> {
        match (&self.backend, x) {
            (Backend::Free { .. }, Element::Free(w)) => {
                kb.push_u8(layout::FREE_WORD);
                for l in w.letters() {
                    kb.push_u8(l.gen << 1 | l.inverse as u8);
                }
            }
            (Backend::Abelian { .. }, Element::Abelian(v)) => {
                kb.push_u8(layout::ABELIAN);
                for &c in v {
                    kb.push_signed(c);
                }
            }
            (Backend::Fg { budget }, Element::Fg(word)) => {
                kb.push_raw(fg_key(word, *budget)?.as_bytes());
            }
            (Backend::Gamma { .. }, Element::Gamma(g)) => {
                kb.push_u8(layout::WREATH);
                g.write_key(kb);
            }
            (Backend::Diagonal(l, r), Element::Pair(p)) => {
                kb.push_u8(layout::PAIR);
                let kl = l.key(&p.0)?;
                let kr = r.key(&p.1)?;
                kb.push_nested(kl.as_bytes());
                kb.push_nested(kr.as_bytes());
            }
            (Backend::Remarked { base, .. }, x) => base.write_key(x, kb)?,
            (b, x) => panic!("element {x:?} does not belong to backend {b:?}"),
        }
        Ok(())
    }

    pub fn is_identity(&self, x: &Element) -> Result<bool> {
        Ok(self.key(x)? == self.key(&self.identity())?)
    }

    /// Components of a diagonal product (after stripping re-markings).
    pub fn diagonal_parts(&self) -> Option<(&MarkedGroup, &MarkedGroup)> {
        match &self.element_backend().backend {
            Backend::Diagonal(l, r) => Some((l, r)),
            _ => None,
        }
    }

    /// Parses backend specs: `free:d`, `abelian:d`, `fg:<w1>,<w2>`,
    /// `gamma:<n>[:<w1>,<w2>]`, `diag(<spec>,<spec>)`.
    pub fn parse(spec: &str) -> Result<Self> {
        parse_spec(spec.trim())
    }

    pub fn spec(&self) -> String {
        self.to_string()
    }
}

/// Splits a diagonal key into its component keys.
pub(crate) fn split_pair_key(key: &CanonicalKey) -> Option<(&[u8], &[u8])> {
    fn nested(bytes: &[u8]) -> Option<(&[u8], &[u8])> {
        let mut len = 0usize;
        let mut shift = 0;
        for (i, &b) in bytes.iter().enumerate() {
            len |= ((b & 0x7f) as usize) << shift;
            if b & 0x80 == 0 {
                let body = bytes.get(i + 1..i + 1 + len)?;
                return Some((body, &bytes[i + 1 + len..]));
            }
            shift += 7;
        }
        None
    }
    let rest = key.as_bytes().strip_prefix(&[layout::PAIR])?;
    let (left, rest) = nested(rest)?;
    let (right, rest) = nested(rest)?;
    rest.is_empty().then_some((left, right))
}

fn mul_elements(x: &Element, y: &Element) -> Element {
    match (x, y) {
        (Element::Free(u), Element::Free(v)) => Element::Free(u.mul(v)),
        (Element::Abelian(u), Element::Abelian(v)) => {
            Element::Abelian(u.iter().zip(v).map(|(a, b)| a + b).collect())
        }
        (Element::Fg(u), Element::Fg(v)) => Element::Fg(u.mul(v)),
        (Element::Gamma(u), Element::Gamma(v)) => Element::Gamma(u.mul_unchecked(v)),
        (Element::Pair(p), Element::Pair(q)) => Element::pair(mul_elements(&p.0, &q.0), mul_elements(&p.1, &q.1)),
        _ => panic!("mismatched element kinds {x:?} and {y:?}"),
    }
}

fn inverse_element(x: &Element) -> Element {
    match x {
        Element::Free(u) => Element::Free(u.inverse()),
        Element::Abelian(u) => Element::Abelian(u.iter().map(|a| -a).collect()),
        Element::Fg(u) => Element::Fg(u.inverse()),
        Element::Gamma(u) => Element::Gamma(u.inverse()),
        Element::Pair(p) => Element::pair(inverse_element(&p.0), inverse_element(&p.1)),
    }
}

fn parse_words(text: &str, rank: usize) -> Result<Vec<FreeWord>> {
    text.split(',').map(|w| FreeWord::parse(w, rank)).collect()
}

fn parse_rank(text: &str) -> Result<usize> {
    let d: usize = text
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad rank {text:?}")))?;
    if d == 0 || d > 26 {
        return Err(Error::Parse(format!("rank {d} out of range 1..=26")));
    }
    Ok(d)
}

const SPEC_HEADS: [&str; 5] = ["free:", "abelian:", "fg:", "gamma:", "diag("];

/// Splits `diag(` arguments at the top-level comma that starts a new spec.
fn split_diag_args(inner: &str) -> Result<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in inner.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                let rest = inner[i + 1..].trim_start();
                if SPEC_HEADS.iter().any(|h| rest.starts_with(h)) {
                    return Ok((&inner[..i], &inner[i + 1..]));
                }
            }
            _ => {}
        }
    }
    Err(Error::Parse(format!("diag needs two comma-separated specs, got {inner:?}")))
}

fn parse_spec(spec: &str) -> Result<MarkedGroup> {
    // generic re-marking suffix: <spec>[w1,w2]
    if spec.ends_with(']') && !spec.starts_with("fg:") && !spec.starts_with("gamma:") {
        if let Some(open) = spec.rfind('[') {
            let base = parse_spec(spec[..open].trim())?;
            let words = parse_words(&spec[open + 1..spec.len() - 1], base.rank())?;
            return base.remark(words);
        }
    }
    if let Some(rest) = spec.strip_prefix("free:") {
        return Ok(MarkedGroup::free(parse_rank(rest)?));
    }
    if let Some(rest) = spec.strip_prefix("abelian:") {
        return Ok(MarkedGroup::abelian(parse_rank(rest)?));
    }
    if let Some(rest) = spec.strip_prefix("fg:") {
        let words = parse_words(rest, 2)?;
        if is_standard_pair(&words) {
            return Ok(MarkedGroup::fg());
        }
        return MarkedGroup::fg_marked(words);
    }
    if let Some(rest) = spec.strip_prefix("gamma:") {
        let (level_text, words) = match rest.split_once(':') {
            Some((l, w)) => (l, Some(w)),
            None => (rest, None),
        };
        let level: usize = level_text
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad gamma level {level_text:?}")))?;
        return match words {
            None => MarkedGroup::gamma(level),
            Some(w) => {
                let words = parse_words(w, 2)?;
                if is_standard_pair(&words) {
                    MarkedGroup::gamma(level)
                } else {
                    MarkedGroup::gamma_marked(level, words)
                }
            }
        };
    }
    if let Some(rest) = spec.strip_prefix("diag(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unterminated diag in {spec:?}")))?;
        let (l, r) = split_diag_args(inner)?;
        return MarkedGroup::diagonal(parse_spec(l.trim())?, parse_spec(r.trim())?);
    }
    Err(Error::Parse(format!("unknown group spec {spec:?}")))
}

fn is_standard_pair(words: &[FreeWord]) -> bool {
    words.len() == 2 && words[0].compact() == "a" && words[1].compact() == "b"
}

fn join_words(words: &[FreeWord]) -> String {
    words.iter().map(|w| w.compact()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for MarkedGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.backend {
            Backend::Free { rank } => write!(f, "free:{rank}"),
            Backend::Abelian { rank } => write!(f, "abelian:{rank}"),
            Backend::Fg { .. } => write!(f, "fg:a,b"),
            Backend::Gamma { level } => write!(f, "gamma:{level}"),
            Backend::Remarked { base, words } => match &base.backend {
                Backend::Fg { .. } => write!(f, "fg:{}", join_words(words)),
                Backend::Gamma { level } => write!(f, "gamma:{level}:{}", join_words(words)),
                _ => write!(f, "{base}[{}]", join_words(words)),
            },
            Backend::Diagonal(l, r) => write!(f, "diag({l},{r})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> FreeWord {
        FreeWord::parse(s, 2).unwrap()
    }

    #[test]
    fn spec_roundtrip() {
        for s in [
            "free:2",
            "abelian:3",
            "fg:a,b",
            "fg:ab,b",
            "gamma:3",
            "gamma:4:ab,B",
            "diag(abelian:2,gamma:3)",
            "diag(fg:a,b,free:2)",
            "diag(diag(free:2,abelian:2),fg:ab,b)",
            "free:2[ab,b]",
        ] {
            assert_eq!(MarkedGroup::parse(s).unwrap().spec(), s);
        }
        assert!(MarkedGroup::parse("gamma:0").is_err());
        assert!(MarkedGroup::parse("diag(free:2,free:3)").is_err());
        assert!(MarkedGroup::parse("nope").is_err());
    }

    #[test]
    fn free_and_abelian_arithmetic() {
        let f = MarkedGroup::free(2);
        assert!(f.is_identity(&f.eval_word(&w("abBA")).unwrap()).unwrap());
        assert!(!f.is_identity(&f.eval_word(&w("abAB")).unwrap()).unwrap());
        let z = MarkedGroup::abelian(2);
        assert!(z.is_identity(&z.eval_word(&w("abAB")).unwrap()).unwrap());
    }

    #[test]
    fn fg_relations() {
        let g = MarkedGroup::fg();
        assert!(g.is_identity(&g.eval_word(&w("aaa")).unwrap()).unwrap());
        assert!(!g.is_identity(&g.eval_word(&w("abAB")).unwrap()).unwrap());
    }

    #[test]
    fn remarked_letters() {
        let g = MarkedGroup::parse("free:2[ab,b]").unwrap();
        let x = g.eval_word(&w("aB")).unwrap();
        assert_eq!(x, Element::Free(w("a")));
        assert!(g.eval_word(&FreeWord::parse("c", 3).unwrap()).is_err());
    }

    #[test]
    fn diagonal_components() {
        let d = MarkedGroup::parse("diag(abelian:2,free:2)").unwrap();
        let x = d.eval_word(&w("abAB")).unwrap();
        let (l, r) = x.as_pair().unwrap();
        assert_eq!(l, &Element::Abelian(vec![0, 0]));
        assert_eq!(r, &Element::Free(w("abAB")));
        assert!(d.diagonal_parts().is_some());
        let (l, r) = d.diagonal_parts().unwrap();
        let key = d.key(&x).unwrap();
        let (kl, kr) = split_pair_key(&key).unwrap();
        assert_eq!(kl, l.key(x.as_pair().unwrap().0).unwrap().as_bytes());
        assert_eq!(kr, r.key(x.as_pair().unwrap().1).unwrap().as_bytes());
    }
}
