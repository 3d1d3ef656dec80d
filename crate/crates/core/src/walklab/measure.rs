use std::collections::{BTreeSet, HashSet};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::algebra::{FreeWord, Letter};
use crate::error::{Error, Result};

/// Default word-length horizon for the semigroup-closure check.
pub const DEFAULT_NONDEGENERACY_HORIZON: usize = 12;

/// Finitely supported probability measure on the free group `F_d`, pushed
/// forward to marked quotients by evaluating words.
#[derive(Clone, Debug)]
pub struct StepDistribution {
    spec: String,
    rank: usize,
    /// Distinct reduced words in first-occurrence order, with exact masses.
    support: Vec<(FreeWord, BigRational)>,
    symmetric: bool,
    waived: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct MeasureOptions {
    pub horizon: usize,
    /// Skip the nondegeneracy check; recorded in reports.
    pub waive_nondegeneracy: bool,
}

impl Default for MeasureOptions {
    fn default() -> Self {
        MeasureOptions { horizon: DEFAULT_NONDEGENERACY_HORIZON, waive_nondegeneracy: false }
    }
}

/// Parses `p/q`, an integer, or a finite decimal exactly.
pub fn parse_probability(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidMeasure(format!("bad probability {t:?}"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars())).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let r = BigRational::new(digits, num::pow(BigInt::from(10), frac.len()));
    Ok(if neg { -r } else { r })
}

impl StepDistribution {
    /// Builds and validates a measure from `(word, mass)` pairs. Repeated
    /// words are merged; masses must be positive and sum to 1 within 1e-12
    /// (they are then renormalised exactly).
    pub fn from_weights(
        spec: impl Into<String>,
        rank: usize,
        weights: Vec<(FreeWord, BigRational)>,
        options: MeasureOptions,
    ) -> Result<Self> {
        let mut support: Vec<(FreeWord, BigRational)> = Vec::new();
        for (w, p) in weights {
            if w.min_rank() > rank {
                return Err(Error::GeneratorOutOfRange { index: w.min_rank(), rank });
            }
            if !p.is_positive() {
                return Err(Error::InvalidMeasure(format!("mass {p} at {} is not positive", w.compact())));
            }
            match support.iter_mut().find(|(u, _)| *u == w) {
                Some((_, q)) => *q += p,
                None => support.push((w, p)),
            }
        }
        if support.is_empty() {
            return Err(Error::InvalidMeasure("empty support".into()));
        }
        let total: BigRational = support.iter().map(|(_, p)| p.clone()).sum();
        let err = (&total - BigRational::one()).abs();
        if err > BigRational::new(1.into(), BigInt::from(10).pow(12)) {
            return Err(Error::InvalidMeasure(format!("total mass {total} is not 1")));
        }
        if !total.is_one() {
            for (_, p) in &mut support {
                *p = &*p / &total;
            }
        }
        let symmetric = support.iter().all(|(w, p)| {
            let wi = w.inverse();
            support.iter().any(|(u, q)| *u == wi && q == p)
        });
        let mu = StepDistribution { spec: spec.into(), rank, support, symmetric, waived: options.waive_nondegeneracy };
        if !options.waive_nondegeneracy {
            mu.check_nondegenerate(options.horizon)?;
        }
        Ok(mu)
    }

    /// Built-in measures on `F_rank`:
    /// `srw` (uniform on the signed generators), `lazy` (`½δ_id + ½srw`),
    /// `lazy:<p>` (`p δ_id + (1-p) srw`), `words:<w>=<p>;...`, `delta:<w>`.
    pub fn parse(spec: &str, rank: usize, options: MeasureOptions) -> Result<Self> {
        let spec = spec.trim();
        let srw = |scale: BigRational| -> Vec<(FreeWord, BigRational)> {
            let p = scale / BigInt::from(2 * rank);
            Letter::all(rank).map(|l| (FreeWord::letter(l), p.clone())).collect()
        };
        let weights = if spec == "srw" {
            srw(BigRational::one())
        } else if spec == "lazy" || spec.starts_with("lazy:") {
            let p = match spec.strip_prefix("lazy:") {
                Some(t) => parse_probability(t)?,
                None => BigRational::new(1.into(), 2.into()),
            };
            if !p.is_positive() || p >= BigRational::one() {
                return Err(Error::InvalidMeasure(format!("laziness {p} must lie in (0, 1)")));
            }
            let mut w = vec![(FreeWord::identity(), p.clone())];
            w.extend(srw(BigRational::one() - p));
            w
        } else if let Some(rest) = spec.strip_prefix("words:") {
            rest.split(';')
                .filter(|s| !s.trim().is_empty())
                .map(|item| {
                    let (w, p) = item
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidMeasure(format!("expected word=mass, got {item:?}")))?;
                    Ok((FreeWord::parse(w, rank)?, parse_probability(p)?))
                })
                .collect::<Result<Vec<_>>>()?
        } else if let Some(w) = spec.strip_prefix("delta:") {
            vec![(FreeWord::parse(w, rank)?, BigRational::one())]
        } else {
            return Err(Error::InvalidMeasure(format!("unknown measure {spec:?}")));
        };
        StepDistribution::from_weights(spec, rank, weights, options)
    }

    pub fn srw(rank: usize) -> Self {
        StepDistribution::parse("srw", rank, MeasureOptions::default()).expect("simple random walk is valid")
    }

    pub fn lazy_srw(rank: usize) -> Self {
        StepDistribution::parse("lazy", rank, MeasureOptions::default()).expect("lazy walk is valid")
    }

    /// Semigroup closure of the support inside `F_d`, restricted to words of
    /// length at most `horizon`, must contain every signed generator.
    pub fn check_nondegenerate(&self, horizon: usize) -> Result<()> {
        let gens: Vec<&FreeWord> = self.support.iter().map(|(w, _)| w).filter(|w| !w.is_identity()).collect();
        let mut missing: BTreeSet<Letter> = Letter::all(self.rank).collect();
        let mut seen: HashSet<FreeWord> = HashSet::new();
        let mut frontier: Vec<FreeWord> = Vec::new();
        for w in &gens {
            if w.len() <= horizon && seen.insert((*w).clone()) {
                frontier.push((*w).clone());
            }
        }
        while !frontier.is_empty() {
            for w in &frontier {
                if let [l] = w.letters() {
                    missing.remove(l);
                }
            }
            if missing.is_empty() {
                return Ok(());
            }
            let mut next = Vec::new();
            for w in &frontier {
                for g in &gens {
                    let x = w.mul(g);
                    if x.len() <= horizon && seen.insert(x.clone()) {
                        next.push(x);
                    }
                }
            }
            frontier = next;
        }
        let missing: Vec<String> = missing.iter().map(|l| l.to_char().to_string()).collect();
        Err(Error::Degenerate { horizon, missing: missing.join(",") })
    }

    pub fn spec(&self) -> &str {
        &self.spec
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn support(&self) -> &[(FreeWord, BigRational)] {
        &self.support
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn nondegeneracy_waived(&self) -> bool {
        self.waived
    }

    /// Mass at the empty word.
    pub fn laziness(&self) -> BigRational {
        self.support
            .iter()
            .find(|(w, _)| w.is_identity())
            .map(|(_, p)| p.clone())
            .unwrap_or_else(BigRational::zero)
    }

    pub fn require_symmetric(&self) -> Result<()> {
        if self.symmetric {
            return Ok(());
        }
        Err(Error::AsymmetricMeasure(format!("{} has mu(w) != mu(w^-1) for some support word", self.spec)))
    }

    /// Masses as `f64`, in support order.
    pub fn float_masses(&self) -> Vec<f64> {
        self.support.iter().map(|(_, p)| p.to_f64().unwrap_or(f64::NAN)).collect()
    }
}
