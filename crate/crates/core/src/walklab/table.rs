use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::algebra::CanonicalKey;
use crate::error::{Error, Result};
use crate::marked::{Element, MarkedGroup};
use crate::walklab::measure::StepDistribution;

/// Default cap on the number of distinct elements in a table.
pub const DEFAULT_CONVOLUTION_CAP: usize = 10_000_000;

const CHUNK: usize = 512;
const BATCH: usize = 64;

/// Probability arithmetic: `f64`, or exact `BigRational`.
pub trait Prob: Clone + Send + Sync + fmt::Debug + fmt::Display + PartialEq + 'static {
    const EXACT: bool;
    fn zero() -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Shannon entropy `-Σ p ln p` (nats) of the given masses.
    fn entropy<'a, I: Iterator<Item = &'a Self>>(masses: I) -> f64;
}

impl Prob for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn entropy<'a, I: Iterator<Item = &'a Self>>(masses: I) -> f64 {
        let mut h = 0.0;
        for &p in masses {
            if p > 0.0 {
                h -= p * p.ln();
            }
        }
        h
    }
}

/// Natural log of a positive integer of any size.
fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::NAN).ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

impl Prob for BigRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn add_assign(&mut self, other: &Self) {
        *self += other;
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    /// Groups equal masses so that each distinct `p` contributes
    /// `(count·p)·ln(1/p)` with `count·p` rounded once.
    fn entropy<'a, I: Iterator<Item = &'a Self>>(masses: I) -> f64 {
        let mut groups: BTreeMap<&BigRational, u64> = BTreeMap::new();
        for p in masses {
            if p.is_positive() {
                *groups.entry(p).or_default() += 1;
            }
        }
        let mut h = 0.0;
        for (p, count) in groups {
            let mass = ToPrimitive::to_f64(&(p * BigInt::from(count))).unwrap_or(f64::NAN);
            if !p.is_one() {
                h += mass * (ln_bigint(p.denom()) - ln_bigint(p.numer()));
            }
        }
        h
    }
}

#[derive(Clone, Debug)]
pub struct TableEntry<P> {
    pub key: CanonicalKey,
    pub element: Element,
    pub prob: P,
}

/// Finitely supported distribution on a marked group, keyed canonically.
/// Entry order is deterministic: it only depends on the inputs, never on
/// the number of worker threads.
#[derive(Clone, Debug)]
pub struct DistributionTable<P> {
    step: usize,
    entries: Vec<TableEntry<P>>,
    index: HashMap<CanonicalKey, usize>,
}

/// A step measure evaluated in a group.
#[derive(Clone, Debug)]
pub struct ElementMeasure<P> {
    atoms: Vec<(Element, P, bool)>,
}

impl<P: Prob> ElementMeasure<P> {
    pub fn from_atoms(group: &MarkedGroup, atoms: Vec<(Element, P)>) -> Result<Self> {
        let id = group.key(&group.identity())?;
        let atoms = atoms
            .into_iter()
            .map(|(x, p)| Ok((group.key(&x)? == id, x, p)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map(|(is_id, x, p)| (x, p, is_id))
            .collect();
        Ok(ElementMeasure { atoms })
    }

    /// Pushforward of `mu` along the marking of `group`.
    pub fn pushforward(group: &MarkedGroup, mu: &StepDistribution) -> Result<Self> {
        if mu.rank() != group.rank() {
            return Err(Error::MarkingSizeMismatch { left: mu.rank(), right: group.rank() });
        }
        let atoms = mu
            .support()
            .iter()
            .map(|(w, p)| Ok((group.eval_word(w)?, P::from_rational(p))))
            .collect::<Result<Vec<_>>>()?;
        ElementMeasure::from_atoms(group, atoms)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Element, &P)> {
        self.atoms.iter().map(|(x, p, _)| (x, p))
    }
}

impl<P: Prob> DistributionTable<P> {
    /// `δ_id` at step 0.
    pub fn point_mass(group: &MarkedGroup) -> Result<Self> {
        let id = group.identity();
        let key = group.key(&id)?;
        Ok(DistributionTable {
            step: 0,
            entries: vec![TableEntry { key: key.clone(), element: id, prob: P::from_rational(&BigRational::one()) }],
            index: HashMap::from([(key, 0)]),
        })
    }

    /// Merges repeated keys, keeping first-occurrence order.
    pub fn from_entries(step: usize, items: impl IntoIterator<Item = TableEntry<P>>) -> Self {
        let mut table = DistributionTable { step, entries: Vec::new(), index: HashMap::new() };
        for e in items {
            table.add(e.key, e.element, e.prob);
        }
        table
    }

    fn add(&mut self, key: CanonicalKey, element: Element, prob: P) {
        match self.index.get(&key) {
            Some(&i) => self.entries[i].prob.add_assign(&prob),
            None => {
                self.index.insert(key.clone(), self.entries.len());
                self.entries.push(TableEntry { key, element, prob });
            }
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TableEntry<P>] {
        &self.entries
    }

    pub fn get(&self, key: &CanonicalKey) -> Option<&P> {
        self.index.get(key).map(|&i| &self.entries[i].prob)
    }

    pub fn prob_of(&self, group: &MarkedGroup, x: &Element) -> Result<P> {
        Ok(self.get(&group.key(x)?).cloned().unwrap_or_else(P::zero))
    }

    pub fn total_mass(&self) -> P {
        let mut s = P::zero();
        for e in &self.entries {
            s.add_assign(&e.prob);
        }
        s
    }

    pub fn entropy(&self) -> f64 {
        P::entropy(self.entries.iter().map(|e| &e.prob))
    }

    /// One convolution step: `new(x·h) += old(x)·μ(h)`.
    pub fn convolve(&self, group: &MarkedGroup, mu: &ElementMeasure<P>, cap: usize) -> Result<Self> {
        let mut next = DistributionTable { step: self.step + 1, entries: Vec::new(), index: HashMap::new() };
        for batch in self.entries.chunks(CHUNK * BATCH) {
            let products: Vec<Vec<TableEntry<P>>> = batch
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut out = Vec::with_capacity(chunk.len() * mu.atoms.len());
                    for e in chunk {
                        for (h, p, is_id) in &mu.atoms {
                            let prob = e.prob.mul(p);
                            if *is_id {
                                out.push(TableEntry { key: e.key.clone(), element: e.element.clone(), prob });
                            } else {
                                let x = group.mul(&e.element, h);
                                out.push(TableEntry { key: group.key(&x)?, element: x, prob });
                            }
                        }
                    }
                    Ok(out)
                })
                .collect::<Result<_>>()?;
            for e in products.into_iter().flatten() {
                next.add(e.key, e.element, e.prob);
                if next.entries.len() > cap {
                    return Err(Error::BudgetExceeded { what: "convolution support", limit: cap as u64 });
                }
            }
        }
        Ok(next)
    }

    /// `μ^{(2t)}(id) = Σ_g μ^{(t)}(g)·μ^{(t)}(g^{-1})` for the step-`t` table.
    pub fn return_probability(&self, group: &MarkedGroup) -> Result<P> {
        let inverse_probs: Vec<Vec<P>> = self
            .entries
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk
                    .iter()
                    .map(|e| Ok(self.get(&group.key(&group.inverse(&e.element))?).cloned().unwrap_or_else(P::zero)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut s = P::zero();
        for (e, q) in self.entries.iter().zip(inverse_probs.into_iter().flatten()) {
            s.add_assign(&e.prob.mul(&q));
        }
        Ok(s)
    }

    pub fn to_f64(&self) -> DistributionTable<f64> {
        DistributionTable {
            step: self.step,
            entries: self
                .entries
                .iter()
                .map(|e| TableEntry { key: e.key.clone(), element: e.element.clone(), prob: e.prob.to_f64() })
                .collect(),
            index: self.index.clone(),
        }
    }
}

/// Iterates `μ^{(0)}, μ^{(1)}, ...` on a group.
#[derive(Clone, Debug)]
pub struct Convolver<'g, P> {
    group: &'g MarkedGroup,
    measure: ElementMeasure<P>,
    table: DistributionTable<P>,
    cap: usize,
}

impl<'g, P: Prob> Convolver<'g, P> {
    pub fn new(group: &'g MarkedGroup, mu: &StepDistribution, cap: usize) -> Result<Self> {
        Ok(Convolver {
            group,
            measure: ElementMeasure::pushforward(group, mu)?,
            table: DistributionTable::point_mass(group)?,
            cap,
        })
    }

    pub fn from_measure(group: &'g MarkedGroup, measure: ElementMeasure<P>, cap: usize) -> Result<Self> {
        Ok(Convolver { group, measure, table: DistributionTable::point_mass(group)?, cap })
    }

    pub fn table(&self) -> &DistributionTable<P> {
        &self.table
    }

    pub fn into_table(self) -> DistributionTable<P> {
        self.table
    }

    pub fn advance(&mut self) -> Result<&DistributionTable<P>> {
        self.table = self.table.convolve(self.group, &self.measure, self.cap)?;
        Ok(&self.table)
    }

    pub fn advance_to(&mut self, t: usize) -> Result<&DistributionTable<P>> {
        while self.table.step() < t {
            self.advance()?;
        }
        Ok(&self.table)
    }
}

/// The exact `t`-step distribution of the `μ`-walk on `group`.
pub fn exact_convolution<P: Prob>(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t: usize,
    cap: usize,
) -> Result<DistributionTable<P>> {
    let mut c = Convolver::new(group, mu, cap)?;
    c.advance_to(t)?;
    Ok(c.into_table())
}
