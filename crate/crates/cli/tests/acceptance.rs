//! Acceptance criteria 1-11. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use marklab::algebra::{FreeWord, Letter};
use marklab::marked::{agreement_radius, Element, MarkedGroup};
use marklab::schreier::{build_schreier_capped, critical_pair};
use marklab::trees::{act_letter, Vertex};
use marklab::walklab::{
    entropy_profile, kernel_conditional_measure, quotient_comparison_report, walk_stats, Budgets, KernelOptions,
    MeasureOptions, ProfileConfig, SpeedMode, StepDistribution, WalkStatsReport,
};
use marklab::wreath::{commutator, tau_lift, GammaGenerators};
use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn g(spec: &str) -> MarkedGroup {
    MarkedGroup::parse(spec).expect("fixture spec")
}

fn w(s: &str) -> FreeWord {
    FreeWord::parse(s, 2).expect("fixture word")
}

fn entropy_of<'a>(masses: impl Iterator<Item = &'a BigRational>) -> f64 {
    masses
        .map(|p| {
            let x = num::ToPrimitive::to_f64(p).unwrap();
            -x * x.ln()
        })
        .sum()
}

fn letters() -> Vec<Letter> {
    Letter::all(2).collect()
}

// ---------------------------------------------------------------- oracles

/// Law of `|W_t|` for SRW on `F_2`: the distance is a birth-death chain
/// with `0 -> 1` surely and `k -> k±1` with probabilities `3/4`, `1/4`.
fn free_distance_law(t: usize) -> Vec<f64> {
    let mut p = vec![0.0; t + 2];
    p[0] = 1.0;
    for _ in 0..t {
        let mut q = vec![0.0; t + 2];
        for (k, &m) in p.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
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

/// Entropy of `μ^{(t)}` by enumerating all `|supp μ|^t` paths.
fn path_entropy(group: &MarkedGroup, mu: &StepDistribution, t: usize) -> f64 {
    let atoms: Vec<(Element, BigRational)> =
        mu.support().iter().map(|(w, p)| (group.eval_word(w).unwrap(), p.clone())).collect();
    let mut paths: Vec<(Element, BigRational)> = vec![(group.identity(), BigRational::one())];
    for _ in 0..t {
        paths = paths
            .iter()
            .flat_map(|(x, p)| atoms.iter().map(move |(a, q)| (group.mul(x, a), p * q)))
            .collect();
    }
    let mut law: HashMap<Vec<u8>, BigRational> = HashMap::new();
    for (x, p) in paths {
        *law.entry(group.key(&x).unwrap().as_bytes().to_vec()).or_insert_with(BigRational::zero) += p;
    }
    entropy_of(law.values())
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// SRW on `Z^2` after rotating coordinates: `u = x+y`, `v = x-y` are
/// independent simple walks on `Z`.
fn z2_entropy(t: usize) -> f64 {
    let t = t as i64;
    let mut h = 0.0;
    for i in 0..=t {
        for j in 0..=t {
            let p = binom(t, i) * binom(t, j) / 4f64.powi(t as i32);
            if p > 0.0 {
                h -= p * p.ln();
            }
        }
    }
    h
}

/// Breadth-first distance in the level-`n` Schreier graph via the tree action.
fn schreier_distance_oracle(level: usize, u: Vertex, v: Vertex) -> Option<u32> {
    let mut dist: HashMap<Vertex, u32> = HashMap::from([(u, 0)]);
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if x == v {
            return dist.get(&x).copied();
        }
        let d = dist[&x];
        for l in letters() {
            let y = act_letter(x, l);
            debug_assert_eq!(y.level(), level);
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(d + 1);
                queue.push_back(y);
            }
        }
    }
    None
}

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> FreeWord {
    let ls = letters();
    let len = rng.gen_range(0..=max_len);
    FreeWord::reduce(2, (0..len).map(|_| ls[rng.gen_range(0..4)])).unwrap()
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for n in 3..=5usize {
        let cap = 1usize << (n - 1);
        let a = agreement_radius(&MarkedGroup::gamma(n).unwrap(), &MarkedGroup::fg(), cap).unwrap();
        pass &= a.value == cap && a.exact;
        parts.push(format!("n={n}: {}{}", a.value, if a.exact { "" } else { " (lower bound)" }));
    }
    ok(pass, parts.join(", "))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let mut gens_ok = true;
    for n in 1..=4usize {
        let lo = GammaGenerators::new(n);
        let hi = GammaGenerators::new(n + 1);
        for gen in 0..2u8 {
            gens_ok &= tau_lift(lo.letter(gen, false)) == *hi.letter(gen, false);
        }
        for _ in 0..1000 {
            let x = random_word(&mut rng, 20);
            if tau_lift(&lo.eval(&x)) != hi.eval(&x) {
                failures += 1;
            }
        }
    }
    ok(gens_ok && failures == 0, format!("generators lift: {gens_ok}, word failures: {failures}/4000"))
}

fn criterion_3() -> Outcome {
    let gens = GammaGenerators::new(1);
    let c = commutator(&gens.eval(&w("bAba")), &gens.eval(&w("abAb"))).unwrap();
    let nontrivial = !c.is_identity();
    let quotient_trivial = c.quotient().is_identity();
    let abelian = c.config().entries().values().all(|x| x.abelianize() == (0, 0));
    let value = serde_json::to_string(&c.to_json()).unwrap();
    ok(
        nontrivial && quotient_trivial && abelian,
        format!(
            "c != id: {nontrivial}, quotient trivial: {quotient_trivial}, values in [A,A]: {abelian}; value {value}; support {}",
            c.config().entries().len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut pass = true;
    let mut values = Vec::new();
    for n in 1..=8usize {
        let graph = build_schreier_capped(n, 8).unwrap();
        let (u, v) = critical_pair(n);
        let d = graph.distance(u, v).ok();
        let oracle = schreier_distance_oracle(n, u, v);
        pass &= graph.is_connected() && d == oracle && d.is_some_and(|d| d >= 1 << (n - 1));
        values.push(format!("{}", d.map(|d| d as i64).unwrap_or(-1)));
    }
    ok(pass, format!("d(2^(n-1)0, 2^n) for n=1..8: [{}]", values.join(", ")))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0usize;
    let mut checked = 0usize;
    for n in [4usize, 5] {
        let gens = GammaGenerators::new(n);
        let radius = 1usize << (n - 2);
        let mut words: Vec<FreeWord> = (0..=radius.min(6)).flat_map(|l| FreeWord::sphere(2, l)).collect();
        words.extend((0..10_000).map(|_| random_word(&mut rng, radius)));
        for x in &words {
            checked += 1;
            if !gens.eval(x).config().entries().values().all(|v| v.is_single_factor()) {
                bad += 1;
            }
        }
    }
    ok(bad == 0, format!("{checked} words checked, {bad} with a value outside <s> u <t>"))
}

fn criterion_6() -> Outcome {
    let free = g("free:2");
    let mu = StepDistribution::srw(2);
    let h1 = entropy_profile::<BigRational>(&free, &mu, 1, usize::MAX).unwrap()[1];
    let h1_ok = h1 == 4f64.ln();
    let h2_oracle = path_entropy(&free, &mu, 2);
    let config = ProfileConfig {
        t_max: 12,
        r_max: 12,
        rational: false,
        speed: Some(SpeedMode::Exact),
        budgets: Budgets::default(),
    };
    let report = walk_stats(&free, &mu, &config).unwrap();
    let h2 = report.time[2].entropy;
    let h2_ok = (h2 - h2_oracle).abs() < TOL && (h2 - 2.4260).abs() < 5e-5;
    let row = &report.time[12];
    let speed = row.speed.unwrap();
    let law = free_distance_law(12);
    let speed_oracle: f64 = law.iter().enumerate().map(|(k, p)| k as f64 * p).sum::<f64>() / 12.0;
    let rho = row.rho_hat.unwrap();
    let rho_oracle = free_distance_law(24)[0].powf(1.0 / 24.0);
    let incr = row.entropy_increment.unwrap();
    let target_incr = 0.5 * 3f64.ln();
    let speed_ok = (speed - 0.5).abs() <= 0.05;
    let rho_ok = (0.80..=3f64.sqrt() / 2.0 + TOL).contains(&rho);
    let incr_ok = (incr - target_incr).abs() <= 0.02;
    let oracles_agree = (speed - speed_oracle).abs() < TOL && (rho - rho_oracle).abs() < TOL;
    ok(
        h1_ok && h2_ok && speed_ok && rho_ok && incr_ok,
        format!(
            "H(1)=ln4 exact: {h1_ok}; H(2)={h2:.10} (paths {h2_oracle:.10}): {h2_ok}; \
             speed(12)={speed:.5} (birth-death {speed_oracle:.5}, target 0.5±0.05): {speed_ok}; \
             rho(12)={rho:.5} (birth-death {rho_oracle:.5}, target [0.80, 0.8660]): {rho_ok}; \
             H(12)-H(11)={incr:.5} (target {target_incr:.4}±0.02): {incr_ok}; convolution matches oracles: {oracles_agree}"
        ),
    )
}

struct Fixture {
    name: &'static str,
    spec: &'static str,
}

const FIXTURES: [Fixture; 5] = [
    Fixture { name: "F2", spec: "free:2" },
    Fixture { name: "Z2", spec: "abelian:2" },
    Fixture { name: "G", spec: "fg:a,b" },
    Fixture { name: "Gamma3", spec: "gamma:3" },
    Fixture { name: "Z2xGamma3", spec: "diag(abelian:2,gamma:3)" },
];

fn profile(spec: &str, measure: &str, t: usize) -> WalkStatsReport {
    let group = g(spec);
    let mu = StepDistribution::parse(measure, 2, MeasureOptions::default()).unwrap();
    let config =
        ProfileConfig { t_max: t, r_max: t, rational: false, speed: Some(SpeedMode::Exact), budgets: Budgets::default() };
    walk_stats(&group, &mu, &config).unwrap()
}

fn criterion_7() -> Outcome {
    let mut failures: Vec<String> = Vec::new();
    let mut min_slack = f64::INFINITY;
    let mut profiles: BTreeMap<(&str, &str), WalkStatsReport> = BTreeMap::new();
    for measure in ["srw", "lazy"] {
        for f in &FIXTURES {
            let r = profile(f.spec, measure, 10);
            let h: Vec<f64> = r.time.iter().map(|row| row.entropy).collect();
            let ret: Vec<f64> = r.time.iter().map(|row| row.return_prob).collect();
            for s in 1..10 {
                for t in 1..=(10 - s) {
                    if h[s + t] > h[s] + h[t] + TOL {
                        failures.push(format!("{}/{measure}: H({}) > H({s})+H({t})", f.name, s + t));
                    }
                    if ret[s + t] < ret[s] * ret[t] - TOL {
                        failures.push(format!("{}/{measure}: return supermultiplicativity at {s}+{t}", f.name));
                    }
                }
            }
            let fi = r.fundamental.as_ref().unwrap();
            min_slack = min_slack.min(fi.slack_speed);
            if fi.slack_speed < -TOL {
                failures.push(format!("{}/{measure}: fundamental slack {:.4}", f.name, fi.slack_speed));
            }
            profiles.insert((f.name, measure), r);
        }
        for t in 0..=10 {
            let h = |n: &str| profiles[&(n, measure)].time[t].entropy;
            let (h1, h2, hd) = (h("Z2"), h("Gamma3"), h("Z2xGamma3"));
            if !(h1.max(h2) <= hd + TOL && hd <= h1 + h2 + TOL) {
                failures.push(format!("sandwich fails at t={t} ({measure})"));
            }
        }
    }
    let pairs = [
        ("free:2", "abelian:2"),
        ("free:2", "fg:a,b"),
        ("free:2", "gamma:3"),
        ("fg:a,b", "gamma:3"),
        ("diag(abelian:2,gamma:3)", "abelian:2"),
        ("diag(abelian:2,gamma:3)", "gamma:3"),
    ];
    let mut verified = 0;
    for measure in ["srw", "lazy"] {
        let mu = StepDistribution::parse(measure, 2, MeasureOptions::default()).unwrap();
        for (src, quo) in pairs {
            match quotient_comparison_report::<f64>(&g(src), &g(quo), &mu, 6, 8, Budgets::default()) {
                Ok(c) => {
                    verified += 1;
                    if !c.entropy_monotone || !c.return_monotone {
                        failures.push(format!("{src} -> {quo} ({measure}): quotient monotonicity fails"));
                    }
                }
                Err(e) => failures.push(format!("{src} -> {quo}: {e}")),
            }
        }
    }
    ok(
        failures.is_empty(),
        format!(
            "10 fixture/measure profiles to t=10, {verified} verified quotient pairs to t=6, min fundamental slack {min_slack:.4}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {}", failures.join("; ")) }
        ),
    )
}

fn criterion_8() -> Outcome {
    let mu = StepDistribution::srw(2);
    let h = |spec: &str| entropy_profile::<f64>(&g(spec), &mu, 6, usize::MAX).unwrap()[6];
    let (hz, hg, hd) = (h("abelian:2"), h("gamma:3"), h("diag(abelian:2,gamma:3)"));
    let oracle = z2_entropy(6);
    let gap = hd - hz;
    let pass = gap > 1e-3 && hd <= hz + hg + TOL && (hz - oracle).abs() < TOL;
    ok(
        pass,
        format!("H_Z2(6)={hz:.6} (binomial {oracle:.6}), H_Gamma3(6)={hg:.6}, H_diag(6)={hd:.6}, gap {gap:.6}"),
    )
}

fn criterion_9() -> Outcome {
    let big = g("diag(abelian:2,free:2)");
    let mu = StepDistribution::srw(2);
    let k = kernel_conditional_measure::<BigRational>(&big, &mu, 2, &KernelOptions::default()).unwrap();
    // 16 paths of two letters: condition on the Z^2 coordinate returning to 0.
    let mut counts: BTreeMap<String, i64> = BTreeMap::new();
    let mut total = 0i64;
    for &x in &letters() {
        for &y in &letters() {
            let z2 = FreeWord::reduce(2, [x, y]).unwrap();
            let exps: [i64; 2] = [0, 1].map(|gen| z2.letters().iter().filter(|l| l.gen == gen).map(|l| l.sign()).sum());
            if exps == [0, 0] {
                total += 1;
                *counts.entry(z2.compact()).or_default() += 1;
            }
        }
    }
    let free = g("free:2");
    let mut matches = k.q.len() == counts.len();
    for (word, c) in &counts {
        let p = k.q.prob_of(&free, &Element::Free(w(word))).unwrap();
        matches &= p == BigRational::new(BigInt::from(*c), BigInt::from(total));
    }
    let total_mass = k.q.total_mass();
    let is_prob = total_mass == BigRational::one();
    let pass = is_prob && k.symmetric && matches;
    ok(
        pass,
        format!(
            "mass {total_mass}, symmetric {}, conditioning mass {}, support {:?}, matches 16-path enumeration: {matches}",
            k.symmetric,
            k.conditioning_mass,
            counts
        ),
    )
}

fn run_bin(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_marklab")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn sequence_args(out: &Path) -> Vec<String> {
    ["sequence", "--stages", "a,b@4;a,b@5", "--out"].iter().map(|s| s.to_string()).chain([out.display().to_string()]).collect()
}

fn criterion_10(dir: &Path) -> Outcome {
    let out = dir.join("sequence.json");
    let args = sequence_args(&out);
    let (code, stderr) = run_bin(&args.iter().map(String::as_str).collect::<Vec<_>>());
    if code != 0 {
        return ok(false, format!("exit {code}: {stderr}"));
    }
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let r = &doc["result"];
    let stages = r["stages"].as_array().unwrap();
    let certified = stages.iter().all(|s| {
        s["flag"].is_null()
            && s["claim_holds"] == true
            && s["agreement_with_g"]["exact"] == true
            && s["agreement_with_g"]["value"].as_u64() >= Some(1 << (s["n"].as_u64().unwrap() - 1))
    });
    let v: Vec<f64> = stages.iter().filter_map(|s| s["v_hat"].as_f64()).collect();
    let h: Vec<f64> = stages.iter().filter_map(|s| s["entropy_over_t"].as_f64()).collect();
    let free = r["free_entropy_over_t"].as_f64().unwrap();
    let nonincreasing = v.len() == 2 && v[1] <= v[0];
    let below = h.len() == 2 && h.iter().all(|&x| x < free);
    let pass = certified && nonincreasing && below && r["v_hat_nonincreasing"] == true && r["entropy_below_free"] == true;
    ok(
        pass,
        format!(
            "agreements {:?}, v_hat {v:?}, H(8)/8 {h:?} vs F2 {free:.6}",
            stages.iter().map(|s| s["agreement_with_g"]["value"].clone()).collect::<Vec<_>>()
        ),
    )
}

fn criterion_11(dir: &Path) -> Outcome {
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("c6-profile", vec!["profile", "--group", "free:2", "--tmax", "12", "--rmax", "12", "--out", "csv"]),
        ("c6-rational", vec!["profile", "--group", "free:2", "--tmax", "2", "--rmax", "2", "--rational", "--out", "json"]),
        (
            "c6-monte-carlo",
            vec!["profile", "--group", "free:2", "--tmax", "12", "--rmax", "4", "--speed", "monte-carlo", "--samples", "4000", "--seed", "7", "--out", "csv"],
        ),
        ("c7-profile", vec!["profile", "--group", "diag(abelian:2,gamma:3)", "--measure", "lazy", "--tmax", "10", "--rmax", "10", "--out", "json"]),
        ("c7-compare", vec!["compare", "--src", "diag(abelian:2,gamma:3)", "--quo", "gamma:3", "--tmax", "6", "--out", "csv"]),
        ("c8-compare", vec!["compare", "--src", "diag(abelian:2,gamma:3)", "--quo", "abelian:2", "--tmax", "6", "--out", "json"]),
        ("c9-kernel", vec!["compare", "--src", "diag(abelian:2,free:2)", "--kernel", "--tmax", "2", "--rational", "--out", "json"]),
        ("c10-sequence", vec!["sequence", "--stages", "a,b@4;a,b@5", "--out", "json"]),
    ]
    .into_iter()
    .map(|(n, v)| (n, v.into_iter().map(String::from).collect()))
    .collect();
    let mut differing = Vec::new();
    for (name, args) in &runs {
        let mut bytes = Vec::new();
        for threads in ["1", "4"] {
            let path = dir.join(format!("{name}-{threads}.out"));
            let mut a: Vec<String> = vec!["--threads".into(), threads.into()];
            let (fmt_idx, _) = args.iter().enumerate().find(|(_, x)| *x == "--out").unwrap();
            a.extend(args[..fmt_idx].iter().cloned());
            let format = &args[fmt_idx + 1];
            a.extend(["--format".into(), format.clone(), "--out".into(), path.display().to_string()]);
            let (code, stderr) = run_bin(&a.iter().map(String::as_str).collect::<Vec<_>>());
            if code != 0 {
                return ok(false, format!("{name} exit {code}: {stderr}"));
            }
            bytes.push(std::fs::read(&path).unwrap());
        }
        if bytes[0] != bytes[1] {
            differing.push(*name);
        }
    }
    ok(differing.is_empty(), format!("{} artifacts compared at 1 vs 4 threads; differing: {differing:?}", runs.len()))
}

fn main() {
    // `cargo test -- --list` and filters: this target has one entry.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "agreement radius of Gamma_n with G", Duration::from_secs(120), Box::new(criterion_1)),
        (2, "marked-quotient chain", Duration::from_secs(60), Box::new(criterion_2)),
        (3, "Gamma_1 commutator", Duration::from_secs(1), Box::new(criterion_3)),
        (4, "Schreier distance bound", Duration::from_secs(60), Box::new(criterion_4)),
        (5, "short-word embedding", Duration::from_secs(120), Box::new(criterion_5)),
        (6, "free-group statistics", Duration::from_secs(300), Box::new(criterion_6)),
        (7, "inequality suites", Duration::from_secs(600), Box::new(criterion_7)),
        (8, "diagonal entropy gap", Duration::from_secs(300), Box::new(criterion_8)),
        (9, "kernel measure Q", Duration::from_secs(60), Box::new(criterion_9)),
        (10, "sequence pipeline", Duration::from_secs(600), Box::new(|| criterion_10(dir.path()))),
        (11, "determinism across thread counts", Duration::from_secs(600), Box::new(|| criterion_11(dir.path()))),
    ];
    let mut failed = Vec::new();
    for (n, name, limit, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = outcome.pass && in_time;
        println!(
            "criterion {n:>2} [{}] {name}: {} ({:.2}s, limit {}s{})",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", over time" }
        );
        if !pass {
            failed.push(*n);
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
