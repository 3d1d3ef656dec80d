use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{FreeWord, Letter};
use crate::error::{Error, Result};
use crate::marked::agreement::{agreement_radius_with_budget, Agreement};
use crate::marked::ball::Ball;
use crate::marked::group::MarkedGroup;

/// Words `z_1, ..., z_d` in a marking that evaluate to the base generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenerationCertificate {
    pub words: Vec<FreeWord>,
}

impl GenerationCertificate {
    /// `q`, the longest certificate word.
    pub fn max_len(&self) -> usize {
        self.words.iter().map(FreeWord::len).max().unwrap_or(0)
    }

    /// Re-checks the certificate: each `z_i` evaluated in `remarked` must
    /// equal generator `i` of `base`.
    pub fn verify(&self, base: &MarkedGroup, remarked: &MarkedGroup) -> Result<()> {
        if self.words.len() != base.rank() {
            return Err(Error::Certificate(format!(
                "{} certificate words for a marking of size {}",
                self.words.len(),
                base.rank()
            )));
        }
        for (i, z) in self.words.iter().enumerate() {
            let x = remarked.eval_word(z)?;
            if remarked.key(&x)? != base.key(base.letter(Letter::pos(i as u8)))? {
                return Err(Error::Certificate(format!("word {} does not evaluate to generator {}", z.compact(), i)));
            }
        }
        Ok(())
    }
}

/// Searches for words in the marking `words` of `base` that evaluate to each
/// base generator, by BFS in the re-marked Cayley graph to `radius`.
/// Returns `None` if some generator is not reached within radius or budget.
pub fn certify_generation(
    base: &MarkedGroup,
    words: &[FreeWord],
    radius: usize,
    ball_cap: usize,
) -> Result<Option<GenerationCertificate>> {
    let remarked = base.clone().remark(words.to_vec())?;
    let targets = (0..base.rank())
        .map(|i| base.key(base.letter(Letter::pos(i as u8))))
        .collect::<Result<Vec<_>>>()?;
    let mut ball = Ball::new(&remarked)?;
    loop {
        let found: Option<Vec<FreeWord>> = targets.iter().map(|k| ball.get(k).map(|e| e.witness.clone())).collect();
        if let Some(words) = found {
            return Ok(Some(GenerationCertificate { words }));
        }
        if ball.radius() >= radius || !ball.grow(&remarked, ball_cap)? {
            return Ok(None);
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarkingSearchResult {
    /// Marking words `w_j` over the base generators.
    pub marking: Vec<FreeWord>,
    /// Agreement of the re-marked group with the free group of the same rank.
    pub relation_agreement: Agreement,
    /// `ℓ`, the longest marking word.
    pub ell: usize,
    /// `q`, the longest certificate word; `None` if uncertified.
    pub q: Option<usize>,
    pub certificate: Option<GenerationCertificate>,
}

impl MarkingSearchResult {
    pub fn certified(&self) -> bool {
        self.certificate.is_some()
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Keep markings whose agreement with the free group is at least this.
    pub target_agreement: usize,
    /// Longest marking word `ℓmax`.
    pub length_cap: usize,
    /// Cap passed to the agreement computation.
    pub agreement_cap: usize,
    pub certify_radius: usize,
    pub ball_cap: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { target_agreement: 0, length_cap: 2, agreement_cap: 10, certify_radius: 8, ball_cap: 200_000 }
    }
}

fn order_key(w: &FreeWord) -> (usize, &[Letter]) {
    (w.len(), w.letters())
}

/// Whether `(u, v)` is the least pair in its orbit under swapping and
/// inverting entries; these moves preserve relation lengths and generation.
fn is_orbit_representative(u: &FreeWord, v: &FreeWord) -> bool {
    let (ui, vi) = (u.inverse(), v.inverse());
    let images = [(u, v), (&ui, v), (u, &vi), (&ui, &vi), (v, u), (&vi, u), (v, &ui), (&vi, &ui)];
    images
        .iter()
        .all(|(x, y)| (order_key(u), order_key(v)) <= (order_key(x), order_key(y)))
}

/// Enumerates pairs of reduced words of length `1..=length_cap` over the
/// generators of a rank-2 `base`, up to swapping and inversion, skipping pairs
/// with a trivial entry. Results are sorted by agreement (descending), then
/// certified first, then `ℓ`, `q` and the marking itself.
pub fn search_markings(base: &MarkedGroup, config: &SearchConfig) -> Result<Vec<MarkingSearchResult>> {
    if base.rank() != 2 {
        return Err(Error::Invalid(format!("marking search needs a rank-2 base, got {}", base.rank())));
    }
    let words: Vec<FreeWord> = (1..=config.length_cap).flat_map(|n| FreeWord::sphere(2, n)).collect();
    let mut candidates = Vec::new();
    for u in &words {
        for v in &words {
            if is_orbit_representative(u, v) {
                candidates.push(vec![u.clone(), v.clone()]);
            }
        }
    }
    let free = MarkedGroup::free(2);
    let evaluated: Vec<Option<MarkingSearchResult>> = candidates
        .par_iter()
        .map(|marking| -> Result<Option<MarkingSearchResult>> {
            for w in marking {
                if base.is_identity(&base.eval_word(w)?)? {
                    return Ok(None);
                }
            }
            let remarked = base.clone().remark(marking.clone())?;
            let agreement = agreement_radius_with_budget(&remarked, &free, config.agreement_cap, config.ball_cap)?;
            if agreement.value < config.target_agreement {
                return Ok(None);
            }
            let certificate = certify_generation(base, marking, config.certify_radius, config.ball_cap)?;
            Ok(Some(MarkingSearchResult {
                ell: marking.iter().map(FreeWord::len).max().unwrap_or(0),
                q: certificate.as_ref().map(GenerationCertificate::max_len),
                marking: marking.clone(),
                relation_agreement: agreement,
                certificate,
            }))
        })
        .collect::<Result<_>>()?;
    let mut results: Vec<MarkingSearchResult> = evaluated.into_iter().flatten().collect();
    results.sort_by(|x, y| {
        y.relation_agreement
            .value
            .cmp(&x.relation_agreement.value)
            .then(y.certified().cmp(&x.certified()))
            .then(x.ell.cmp(&y.ell))
            .then(x.q.cmp(&y.q))
            .then_with(|| x.marking.iter().map(order_key).cmp(y.marking.iter().map(order_key)))
    });
    Ok(results)
}

/// Search result for an explicitly given marking of `base`.
pub fn evaluate_marking(base: &MarkedGroup, marking: Vec<FreeWord>, config: &SearchConfig) -> Result<MarkingSearchResult> {
    let remarked = base.clone().remark(marking.clone())?;
    let free = MarkedGroup::free(remarked.rank());
    let relation_agreement = agreement_radius_with_budget(&remarked, &free, config.agreement_cap, config.ball_cap)?;
    let certificate = certify_generation(base, &marking, config.certify_radius, config.ball_cap)?;
    Ok(MarkingSearchResult {
        ell: marking.iter().map(FreeWord::len).max().unwrap_or(0),
        q: certificate.as_ref().map(GenerationCertificate::max_len),
        marking,
        relation_agreement,
        certificate,
    })
}

/// Lifts a certified marking of `G` to `Γ_n`: the marking words are
/// evaluated in `Γ_n` and the certificate is re-verified there.
/// Requires `n > ℓ·q`.
pub fn lift_marking(result: &MarkingSearchResult, level: usize) -> Result<MarkedGroup> {
    let certificate = result
        .certificate
        .as_ref()
        .ok_or_else(|| Error::Certificate("marking has no generation certificate".into()))?;
    let bound = result.ell * certificate.max_len();
    if level <= bound {
        return Err(Error::LiftHypothesis { n: level, bound });
    }
    let gamma = MarkedGroup::gamma(level)?;
    let lifted = gamma.clone().remark(result.marking.clone())?;
    certificate.verify(&gamma, &lifted)?;
    Ok(lifted)
}
