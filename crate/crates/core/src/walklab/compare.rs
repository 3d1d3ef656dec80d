use serde::Serialize;

use crate::error::{Error, Result};
use crate::marked::{verify_quotient, MarkedGroup, DEFAULT_QUOTIENT_HORIZON};
use crate::walklab::measure::StepDistribution;
use crate::walklab::stats::{Budgets, WordMetric};
use crate::walklab::table::{Convolver, DistributionTable, ElementMeasure, Prob, TableEntry};

/// Tolerance for the floating-point inequality checks.
pub const TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub t: usize,
    pub entropy_src: f64,
    pub entropy_quo: f64,
    /// `H_src(t) - H_quo(t)`, nonnegative for a quotient.
    pub entropy_gap: f64,
    pub return_src: f64,
    pub return_quo: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichRow {
    pub t: usize,
    pub entropy_left: f64,
    pub entropy_right: f64,
    pub entropy_diagonal: f64,
    /// `max(H_1, H_2) <= H_⊗ <= H_1 + H_2` within [`TOLERANCE`].
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuotientComparison {
    pub src: String,
    pub quo: String,
    pub measure: String,
    pub horizon: usize,
    pub rows: Vec<ComparisonRow>,
    pub entropy_monotone: bool,
    pub return_monotone: bool,
    /// Present when the source is a diagonal product.
    pub sandwich: Option<Vec<SandwichRow>>,
}

/// `(H(t), μ^{(2t)}(id))` for `t = 0..=t_max`.
pub fn entropy_and_return<P: Prob>(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t_max: usize,
    convolution_cap: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut conv: Convolver<P> = Convolver::new(group, mu, convolution_cap)?;
    let mut out = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            conv.advance()?;
        }
        out.push((conv.table().entropy(), conv.table().return_probability(group)?.to_f64()));
    }
    Ok(out)
}

/// Compares the `μ`-walks on `src` and on its marked quotient `quo`. The
/// quotient relation is verified first, up to relation length `horizon`.
pub fn quotient_comparison_report<P: Prob>(
    src: &MarkedGroup,
    quo: &MarkedGroup,
    mu: &StepDistribution,
    t_max: usize,
    horizon: usize,
    budgets: Budgets,
) -> Result<QuotientComparison> {
    verify_quotient(src, quo, horizon, budgets.ball_cap)?;
    let s = entropy_and_return::<P>(src, mu, t_max, budgets.convolution_cap)?;
    let q = entropy_and_return::<P>(quo, mu, t_max, budgets.convolution_cap)?;
    let rows: Vec<ComparisonRow> = s
        .iter()
        .zip(&q)
        .enumerate()
        .map(|(t, (&(hs, rs), &(hq, rq)))| ComparisonRow {
            t,
            entropy_src: hs,
            entropy_quo: hq,
            entropy_gap: hs - hq,
            return_src: rs,
            return_quo: rq,
        })
        .collect();
    let sandwich = match src.diagonal_parts() {
        Some((left, right)) => {
            let l = entropy_and_return::<P>(left, mu, t_max, budgets.convolution_cap)?;
            let r = entropy_and_return::<P>(right, mu, t_max, budgets.convolution_cap)?;
            Some(
                (0..=t_max)
                    .map(|t| {
                        let (h1, h2, hd) = (l[t].0, r[t].0, s[t].0);
                        SandwichRow {
                            t,
                            entropy_left: h1,
                            entropy_right: h2,
                            entropy_diagonal: hd,
                            holds: h1.max(h2) <= hd + TOLERANCE && hd <= h1 + h2 + TOLERANCE,
                        }
                    })
                    .collect(),
            )
        }
        None => None,
    };
    Ok(QuotientComparison {
        src: src.spec(),
        quo: quo.spec(),
        measure: mu.spec().to_string(),
        horizon,
        entropy_monotone: rows.iter().all(|r| r.entropy_gap >= -TOLERANCE),
        return_monotone: rows.iter().all(|r| r.return_quo >= r.return_src - TOLERANCE),
        rows,
        sandwich,
    })
}

pub fn quotient_comparison<P: Prob>(
    src: &MarkedGroup,
    quo: &MarkedGroup,
    mu: &StepDistribution,
    t_max: usize,
) -> Result<QuotientComparison> {
    quotient_comparison_report::<P>(src, quo, mu, t_max, DEFAULT_QUOTIENT_HORIZON, Budgets::default())
}

#[derive(Clone, Debug)]
#[derive(Default)]
pub struct KernelOptions {
    /// Keep only kernel elements of word length `<= R` in the second
    /// factor's marking, then renormalise.
    pub truncate: Option<usize>,
    /// Report `Q_R^{(2m)}(id)` for this `m` (requires `truncate`).
    pub self_convolution: Option<usize>,
    pub budgets: Budgets,
}


#[derive(Clone, Debug)]
pub struct KernelMeasure<P> {
    pub t: usize,
    /// `P(π_1(W_t) = id)`.
    pub conditioning_mass: P,
    /// Law of the second coordinate given that the first is trivial.
    pub q: DistributionTable<P>,
    /// `Q(γ) = Q(γ^{-1})` on the whole support.
    pub symmetric: bool,
    pub truncated: Option<(usize, DistributionTable<P>)>,
    /// `(m, Q_R^{(2m)}(id))`.
    pub self_return: Option<(usize, P)>,
}

fn probs_match<P: Prob>(a: &P, b: &P) -> bool {
    if P::EXACT {
        a == b
    } else {
        (a.to_f64() - b.to_f64()).abs() <= 1e-12
    }
}

/// The kernel measure `Q` of a diagonal product `G_1 ⊗ G_2` at step `t`.
pub fn kernel_conditional_measure<P: Prob>(
    big: &MarkedGroup,
    mu: &StepDistribution,
    t: usize,
    options: &KernelOptions,
) -> Result<KernelMeasure<P>> {
    let (left, right) = big
        .diagonal_parts()
        .ok_or_else(|| Error::Invalid(format!("{} is not a diagonal product", big.spec())))?;
    let mut conv: Convolver<P> = Convolver::new(big, mu, options.budgets.convolution_cap)?;
    conv.advance_to(t)?;
    let table = conv.into_table();
    let left_id = left.key(&left.identity())?;
    let mut kernel = Vec::new();
    let mut mass = P::zero();
    for e in table.entries() {
        let (x, y) = e.element.as_pair().expect("diagonal elements are pairs");
        if left.key(x)? == left_id {
            mass.add_assign(&e.prob);
            kernel.push(TableEntry { key: right.key(y)?, element: y.clone(), prob: e.prob.clone() });
        }
    }
    if mass.is_zero() {
        return Err(Error::ZeroMass);
    }
    let q = DistributionTable::from_entries(
        t,
        kernel.into_iter().map(|e| TableEntry { prob: e.prob.div(&mass), ..e }),
    );
    let mut symmetric = true;
    for e in q.entries() {
        let inv = q.prob_of(right, &right.inverse(&e.element))?;
        symmetric &= probs_match(&e.prob, &inv);
    }
    let truncated = match options.truncate {
        None => None,
        Some(radius) => {
            let metric = WordMetric::new(right, radius, options.budgets.ball_cap)?;
            let mut kept = Vec::new();
            let mut kept_mass = P::zero();
            for e in q.entries() {
                match metric.length(&e.key, &e.element) {
                    Ok(len) if len <= radius => {
                        kept_mass.add_assign(&e.prob);
                        kept.push(e.clone());
                    }
                    Ok(_) | Err(Error::RadiusExceeded { .. }) => {}
                    Err(err) => return Err(err),
                }
            }
            let renorm = kept.into_iter().map(|e| TableEntry { prob: e.prob.div(&kept_mass), ..e });
            Some((radius, DistributionTable::from_entries(t, renorm)))
        }
    };
    let self_return = match (options.self_convolution, &truncated) {
        (None, _) => None,
        (Some(_), None) => {
            return Err(Error::Invalid("self-convolution of Q needs a truncation radius".into()));
        }
        (Some(m), Some((_, qr))) => {
            let atoms = qr.entries().iter().map(|e| (e.element.clone(), e.prob.clone())).collect();
            let measure = ElementMeasure::from_atoms(right, atoms)?;
            let mut c = Convolver::from_measure(right, measure, options.budgets.convolution_cap)?;
            c.advance_to(m)?;
            Some((m, c.table().return_probability(right)?))
        }
    };
    Ok(KernelMeasure { t, conditioning_mass: mass, q, symmetric, truncated, self_return })
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub group: String,
    pub measure: String,
    pub t: usize,
    pub conditioning_mass: f64,
    pub symmetric: bool,
    pub total_mass: f64,
    /// `(element, Q(element))` in table order; exact masses as `p/q` strings
    /// in rational mode.
    pub support: Vec<(String, String)>,
    pub truncation_radius: Option<usize>,
    pub truncated_support: Option<usize>,
    pub self_return: Option<(usize, f64)>,
}

impl<P: Prob> KernelMeasure<P> {
    pub fn report(&self, group: &MarkedGroup, mu: &StepDistribution) -> KernelReport {
        let fmt = |p: &P| if P::EXACT { p.to_string() } else { p.to_f64().to_string() };
        KernelReport {
            group: group.spec(),
            measure: mu.spec().to_string(),
            t: self.t,
            conditioning_mass: self.conditioning_mass.to_f64(),
            symmetric: self.symmetric,
            total_mass: self.q.total_mass().to_f64(),
            support: self.q.entries().iter().map(|e| (e.element.to_string(), fmt(&e.prob))).collect(),
            truncation_radius: self.truncated.as_ref().map(|(r, _)| *r),
            truncated_support: self.truncated.as_ref().map(|(_, t)| t.len()),
            self_return: self.self_return.as_ref().map(|(m, p)| (*m, p.to_f64())),
        }
    }
}

#[cfg(test)]
mod tests {
    use num::BigRational;

    use super::*;

    fn g(spec: &str) -> MarkedGroup {
        MarkedGroup::parse(spec).unwrap()
    }

    #[test]
    fn free_to_abelian_gap() {
        let c = quotient_comparison::<f64>(&g("free:2"), &g("abelian:2"), &StepDistribution::srw(2), 4).unwrap();
        assert!(c.entropy_monotone && c.return_monotone);
        assert!((c.rows[2].entropy_src - 2.4260151319598084).abs() < 1e-12);
        assert!((c.rows[2].entropy_quo - 3.0 * 2f64.ln()).abs() < 1e-12);
        assert!(c.rows.iter().skip(2).all(|r| r.entropy_gap > 0.0));
        assert!(c.sandwich.is_none());
    }

    #[test]
    fn identity_quotient_has_zero_gap() {
        let c = quotient_comparison::<BigRational>(&g("free:2"), &g("free:2"), &StepDistribution::srw(2), 3).unwrap();
        assert!(c.rows.iter().all(|r| r.entropy_gap == 0.0));
    }

    #[test]
    fn rejects_non_quotient() {
        let err = quotient_comparison::<f64>(&g("abelian:2"), &g("free:2"), &StepDistribution::srw(2), 2).unwrap_err();
        assert!(matches!(err, Error::NotAQuotient { .. }));
    }

    #[test]
    fn kernel_of_equal_factors_is_point_mass() {
        let big = g("diag(fg:a,b,fg:a,b)");
        let k = kernel_conditional_measure::<BigRational>(&big, &StepDistribution::srw(2), 4, &KernelOptions::default())
            .unwrap();
        assert_eq!(k.q.len(), 1);
        assert!(k.symmetric);
    }

    #[test]
    fn kernel_needs_diagonal() {
        let err = kernel_conditional_measure::<f64>(&g("free:2"), &StepDistribution::srw(2), 2, &KernelOptions::default());
        assert!(err.is_err());
    }

    #[test]
    fn truncated_kernel() {
        let big = g("diag(abelian:2,free:2)");
        let opts = KernelOptions { truncate: Some(2), self_convolution: Some(1), ..KernelOptions::default() };
        let k = kernel_conditional_measure::<BigRational>(&big, &StepDistribution::srw(2), 4, &opts).unwrap();
        assert!(k.symmetric);
        let (_, qr) = k.truncated.as_ref().unwrap();
        assert_eq!(qr.total_mass(), BigRational::from_integer(1.into()));
        assert_eq!(qr.len(), 1);
        assert!(k.q.len() > 1);
        let (_, ret) = k.self_return.as_ref().unwrap();
        assert_eq!(*ret, BigRational::from_integer(1.into()));
    }
}
