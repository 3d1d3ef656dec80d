use std::collections::HashMap;

use marklab::algebra::FreeWord;
use marklab::marked::{Element, MarkedGroup};
use marklab::walklab::{
    entropy_and_return, exact_convolution, kernel_conditional_measure, monte_carlo_lengths, walk_stats, Budgets,
    KernelOptions, MeasureOptions, ProfileConfig, SpeedMode, StepDistribution, WordMetric,
};
use num::{BigRational, One, ToPrimitive, Zero};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn g(spec: &str) -> MarkedGroup {
    MarkedGroup::parse(spec).unwrap()
}

/// Symmetric measure `p·δ_id + Σ q_a (δ_a + δ_A)/2 + q_b (δ_b + δ_B)/2` from integer weights.
fn symmetric_measure() -> impl Strategy<Value = StepDistribution> {
    (0u32..4, 1u32..6, 1u32..6).prop_map(|(lazy, wa, wb)| {
        let total = lazy + 2 * wa + 2 * wb;
        let mut spec = format!("words:a={wa}/{total};A={wa}/{total};b={wb}/{total};B={wb}/{total}");
        if lazy > 0 {
            spec.push_str(&format!(";1={lazy}/{total}"));
        }
        StepDistribution::parse(&spec, 2, MeasureOptions::default()).unwrap()
    })
}

fn fixture() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["free:2", "abelian:2", "fg:a,b", "gamma:3", "diag(abelian:2,gamma:3)"])
}

/// Exact law of `μ^{(t)}` by enumerating all paths.
fn path_law(group: &MarkedGroup, mu: &StepDistribution, t: usize) -> HashMap<Vec<u8>, BigRational> {
    let atoms: Vec<(Element, BigRational)> =
        mu.support().iter().map(|(w, p)| (group.eval_word(w).unwrap(), p.clone())).collect();
    let mut paths = vec![(group.identity(), BigRational::one())];
    for _ in 0..t {
        paths = paths.iter().flat_map(|(x, p)| atoms.iter().map(move |(a, q)| (group.mul(x, a), p * q))).collect();
    }
    let mut law = HashMap::new();
    for (x, p) in paths {
        *law.entry(group.key(&x).unwrap().as_bytes().to_vec()).or_insert_with(BigRational::zero) += p;
    }
    law
}

#[test]
fn convolution_matches_path_enumeration() {
    for spec in ["free:2", "abelian:2", "fg:a,b", "gamma:2", "diag(abelian:2,free:2)"] {
        let group = g(spec);
        for measure in ["srw", "lazy", "words:a=1/3;A=1/3;b=1/6;B=1/6"] {
            let mu = StepDistribution::parse(measure, 2, MeasureOptions::default()).unwrap();
            for t in 0..=3 {
                let table = exact_convolution::<BigRational>(&group, &mu, t, usize::MAX).unwrap();
                let law = path_law(&group, &mu, t);
                assert_eq!(table.len(), law.len(), "{spec} {measure} t={t}");
                for e in table.entries() {
                    assert_eq!(&e.prob, &law[e.key.as_bytes()], "{spec} {measure} t={t}");
                }
            }
        }
    }
}

/// Law of `|W_t|` on `F_2`: birth-death chain `0 → 1`, `k → k±1` w.p. `3/4`, `1/4`.
fn free_distance_law(t: usize) -> Vec<f64> {
    let mut p = vec![1.0];
    for _ in 0..t {
        let mut q = vec![0.0; p.len() + 1];
        for (k, &m) in p.iter().enumerate() {
            if k == 0 {
                q[1] += m;
            } else {
                q[k + 1] += 0.75 * m;
                q[k - 1] += 0.25 * m;
            }
        }
        p = q;
    }
    p
}

#[test]
fn free_speed_and_return_match_birth_death_chain() {
    let config = ProfileConfig { t_max: 8, r_max: 2, ..ProfileConfig::default() };
    let r = walk_stats(&g("free:2"), &StepDistribution::srw(2), &config).unwrap();
    for t in 1..=8 {
        let law = free_distance_law(t);
        let mean: f64 = law.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        assert!((r.time[t].speed.unwrap() - mean / t as f64).abs() < TOL);
        assert!((r.time[t].return_prob - free_distance_law(2 * t)[0]).abs() < TOL);
    }
}

#[test]
fn abelian_entropy_matches_binomial_formula() {
    let h = entropy_and_return::<f64>(&g("abelian:2"), &StepDistribution::srw(2), 8, usize::MAX).unwrap();
    for (t, &(ht, _)) in h.iter().enumerate() {
        let binom = |k: usize| (0..k).fold(1.0, |a, i| a * (t - i) as f64 / (i + 1) as f64);
        let oracle: f64 = (0..=t)
            .flat_map(|i| (0..=t).map(move |j| (i, j)))
            .map(|(i, j)| binom(i) * binom(j) / 4f64.powi(t as i32))
            .map(|p| -p * p.ln())
            .sum();
        assert!((ht - oracle).abs() < TOL, "t={t}");
    }
}

#[test]
fn kernel_at_step_two_matches_sixteen_paths() {
    let big = g("diag(abelian:2,free:2)");
    let k = kernel_conditional_measure::<BigRational>(&big, &StepDistribution::srw(2), 2, &KernelOptions::default())
        .unwrap();
    // Of the 16 two-letter paths, the 4 of the form xX return in Z^2, and all
    // of them are trivial in F_2.
    assert_eq!(k.conditioning_mass, BigRational::new(4.into(), 16.into()));
    assert_eq!(k.q.len(), 1);
    assert_eq!(k.q.prob_of(&g("free:2"), &Element::Free(FreeWord::identity())).unwrap(), BigRational::one());
    assert!(k.symmetric);
}

#[test]
fn kernel_at_step_four_is_symmetric() {
    let big = g("diag(abelian:2,free:2)");
    let k = kernel_conditional_measure::<BigRational>(&big, &StepDistribution::srw(2), 4, &KernelOptions::default())
        .unwrap();
    assert_eq!(k.q.total_mass(), BigRational::one());
    assert!(k.symmetric);
    assert!(k.q.len() > 1);
}

#[test]
fn monte_carlo_is_independent_of_thread_count() {
    let group = g("gamma:3");
    let mu = StepDistribution::lazy_srw(2);
    let metric = WordMetric::new(&group, 6, usize::MAX).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| monte_carlo_lengths(&group, &mu, 6, 3000, 11, &metric).unwrap())
    };
    let one = run(1);
    let four = run(4);
    assert!(one.iter().zip(&four).all(|(a, b)| a.0.to_bits() == b.0.to_bits() && a.1.to_bits() == b.1.to_bits()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tables_are_normalised(spec in fixture(), mu in symmetric_measure(), t in 0usize..=5) {
        let group = g(spec);
        let exact = exact_convolution::<BigRational>(&group, &mu, t, usize::MAX).unwrap();
        prop_assert_eq!(exact.total_mass(), BigRational::one());
        let float = exact_convolution::<f64>(&group, &mu, t, usize::MAX).unwrap();
        prop_assert!((float.total_mass() - 1.0).abs() < TOL);
        prop_assert!((float.entropy() - exact.entropy()).abs() < 1e-9);
        prop_assert!(exact.entries().iter().all(|e| e.prob.to_f64().unwrap() > 0.0));
    }

    #[test]
    fn entropy_subadditive_and_return_supermultiplicative(spec in fixture(), mu in symmetric_measure()) {
        let rows = entropy_and_return::<f64>(&g(spec), &mu, 8, usize::MAX).unwrap();
        for s in 1..8 {
            for t in 1..=(8 - s) {
                prop_assert!(rows[s + t].0 <= rows[s].0 + rows[t].0 + TOL);
                prop_assert!(rows[s + t].1 >= rows[s].1 * rows[t].1 - TOL);
            }
        }
        for t in 1..=4 {
            let rho = |t: usize| rows[t].1.powf(1.0 / (2 * t) as f64);
            prop_assert!(rho(t) <= rho(2 * t) + TOL);
        }
    }

    #[test]
    fn quotients_and_diagonals(mu in symmetric_measure()) {
        let budgets = Budgets::default();
        for (src, quo) in [("free:2", "abelian:2"), ("free:2", "fg:a,b"), ("fg:a,b", "gamma:3"), ("gamma:2", "gamma:3")] {
            let c = marklab::walklab::quotient_comparison_report::<f64>(&g(src), &g(quo), &mu, 5, 8, budgets).unwrap();
            prop_assert!(c.entropy_monotone && c.return_monotone, "{} -> {}", src, quo);
        }
        let c = marklab::walklab::quotient_comparison_report::<f64>(
            &g("diag(abelian:2,gamma:3)"), &g("abelian:2"), &mu, 6, 8, budgets,
        ).unwrap();
        prop_assert!(c.sandwich.unwrap().iter().all(|r| r.holds));
    }

    #[test]
    fn fundamental_slack_is_nonnegative(spec in fixture(), mu in symmetric_measure()) {
        let config = ProfileConfig { t_max: 8, r_max: 8, rational: false, speed: Some(SpeedMode::Exact), budgets: Budgets::default() };
        let r = walk_stats(&g(spec), &mu, &config).unwrap();
        prop_assert!(r.fundamental.unwrap().slack_speed >= -TOL);
    }
}
