use marklab::algebra::FreeWord;
use marklab::marked::{
    agreement_radius_with_budget, evaluate_marking, lift_marking, search_markings, Ball, MarkedGroup, SearchConfig,
};
use marklab::schreier::{build_schreier_capped, critical_pair};
use marklab::trees::Vertex;
use marklab::walklab::{
    kernel_conditional_measure, quotient_comparison_report, walk_stats, Budgets, KernelOptions, MeasureOptions,
    ProfileConfig, QuotientComparison, SpeedMode, StepDistribution, WalkStatsReport,
};
use num::BigRational;
use serde_json::json;

use crate::args::*;
use crate::artifact::{Artifact, Meta, Stdout};
use crate::fixtures::{run_suites, FixtureOptions};
use crate::sequence::{parse_stages, run_sequence, SequenceOptions};
use crate::CliError;

fn budgets(b: &BudgetArgs) -> Result<Budgets, CliError> {
    if b.ball_cap == 0 || b.convolution_cap == 0 || b.word_budget == 0 {
        return Err(CliError::Config("budgets must be positive".into()));
    }
    Ok(Budgets { ball_cap: b.ball_cap, convolution_cap: b.convolution_cap })
}

fn group(spec: &str, b: &BudgetArgs) -> Result<MarkedGroup, CliError> {
    Ok(MarkedGroup::parse(spec)?.with_word_budget(b.word_budget))
}

fn positive(name: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        return Err(CliError::Config(format!("{name} must be positive")));
    }
    Ok(())
}

fn words(text: &str) -> Result<Vec<FreeWord>, CliError> {
    Ok(text.split(',').map(|w| FreeWord::parse(w.trim(), 2)).collect::<Result<Vec<_>, _>>()?)
}

/// Runs the fixture suites; the artifact is returned even when checks fail.
pub fn fixtures(a: &FixturesArgs) -> Result<(Artifact, bool), CliError> {
    let opts = FixtureOptions { seed: a.seed, chain_samples: a.chain_samples, short_samples: a.short_samples };
    let report = run_suites(a.suite, &opts);
    let failures: Vec<String> =
        report.failures().map(|c| format!("fixture {}/{} failed: {}", c.suite, c.name, c.invariant)).collect();
    let ok = report.passed;
    let csv = report.to_csv();
    let mut art = Artifact::new(Meta::new("fixtures", a, Some(a.seed)), &report).with_csv(csv);
    art.warnings = failures;
    Ok((art, ok))
}

pub fn ball(a: &BallArgs) -> Result<Artifact, CliError> {
    budgets(&a.budgets)?;
    let g = group(&a.group, &a.budgets)?;
    let ball = Ball::build(&g, a.radius, a.budgets.ball_cap)?;
    let entries: Vec<_> = ball
        .entries()
        .iter()
        .map(|e| json!({ "distance": e.distance, "witness": e.witness.compact(), "element": e.element.to_string() }))
        .collect();
    let mut csv = String::from("distance,witness,element\n");
    for e in ball.entries() {
        csv.push_str(&format!("{},{},\"{}\"\n", e.distance, e.witness.compact(), e.element.to_string().replace('"', "\"\"")));
    }
    let result = json!({
        "group": g.spec(),
        "radius": a.radius,
        "volume": ball.len(),
        "sphere_sizes": ball.sphere_sizes(),
        "elements": entries,
    });
    Ok(Artifact::new(Meta::new("ball", a, None), &result).with_csv(csv))
}

pub fn agreement(a: &AgreementArgs) -> Result<Artifact, CliError> {
    budgets(&a.budgets)?;
    let left = group(&a.left, &a.budgets)?;
    let right = group(&a.right, &a.budgets)?;
    let r = agreement_radius_with_budget(&left, &right, a.cap, a.budgets.ball_cap)?;
    let text = if r.exact { format!("{}\n", r.value) } else { format!(">= {} (lower bound)\n", r.value) };
    let csv = format!(
        "left,right,cap,agreement,exact,discrepancy\n{},{},{},{},{},{}\n",
        left.spec(),
        right.spec(),
        r.cap,
        r.value,
        r.exact,
        r.discrepancy.as_ref().map(FreeWord::compact).unwrap_or_default()
    );
    let result = json!({ "left": left.spec(), "right": right.spec(), "agreement": r });
    let art = Artifact::new(Meta::new("agreement", a, None), &result).with_csv(csv).printing(Stdout::Text(text));
    Ok(if r.exact { art } else { art.warn(format!("ball budget exhausted; {} is a lower bound", r.value)) })
}

pub fn schreier(a: &SchreierArgs) -> Result<Artifact, CliError> {
    positive("level", a.level)?;
    let g = build_schreier_capped(a.level, a.max_level)?;
    let root = Vertex::from_index(a.level, 0);
    let dist = g.distances_from(root)?;
    let (u, v) = critical_pair(a.level);
    let result = json!({
        "level": a.level,
        "vertices": g.vertex_count(),
        "connected": g.is_connected(),
        "source": root.to_string(),
        "distances": dist.iter().map(|&d| (d != u32::MAX).then_some(d)).collect::<Vec<_>>(),
        "critical_pair": { "u": u.to_string(), "v": v.to_string(), "distance": g.distance(u, v).ok(),
                           "bound": 1u64 << (a.level - 1) },
    });
    Ok(Artifact::new(Meta::new("schreier", a, None), &result).with_csv(g.edge_list_csv()))
}

pub fn search(a: &SearchArgs) -> Result<Artifact, CliError> {
    positive("length-cap", a.length_cap)?;
    positive("ball-cap", a.ball_cap)?;
    let base = MarkedGroup::parse(&a.base)?;
    let config = SearchConfig {
        target_agreement: a.target_agreement,
        length_cap: a.length_cap,
        agreement_cap: a.agreement_cap,
        certify_radius: a.certify_radius,
        ball_cap: a.ball_cap,
    };
    let found = search_markings(&base, &config)?;
    let mut csv = String::from("marking,agreement,exact,ell,q,certificate\n");
    for r in &found {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.marking.iter().map(FreeWord::compact).collect::<Vec<_>>().join(" "),
            r.relation_agreement.value,
            r.relation_agreement.exact,
            r.ell,
            r.q.map(|q| q.to_string()).unwrap_or_default(),
            r.certificate.as_ref().map(|c| c.words.iter().map(FreeWord::compact).collect::<Vec<_>>().join(" ")).unwrap_or_default(),
        ));
    }
    let result = json!({ "base": base.spec(), "markings": found });
    let art = Artifact::new(Meta::new("search-markings", a, None), &result).with_csv(csv);
    Ok(if found.is_empty() { art.warn(format!("no marking reaches agreement {}", a.target_agreement)) } else { art })
}

pub fn lift(a: &LiftArgs) -> Result<Artifact, CliError> {
    positive("level", a.level)?;
    positive("ball-cap", a.ball_cap)?;
    let base = MarkedGroup::fg();
    let marking = words(&a.marking)?;
    let config = SearchConfig { certify_radius: a.certify_radius, ball_cap: a.ball_cap, ..SearchConfig::default() };
    let chosen = evaluate_marking(&base, marking.clone(), &config)?;
    let lifted = lift_marking(&chosen, a.level)?;
    let cap = a.agreement_cap.unwrap_or(1usize << (a.level - 1));
    let target = base.remark(marking)?;
    let r = agreement_radius_with_budget(&lifted, &target, cap, a.ball_cap)?;
    let csv = format!(
        "marking,level,ell,q,cap,agreement,exact\n{},{},{},{},{},{},{}\n",
        a.marking.replace(',', " "),
        a.level,
        chosen.ell,
        chosen.q.map(|q| q.to_string()).unwrap_or_default(),
        cap,
        r.value,
        r.exact
    );
    let result = json!({
        "group": lifted.spec(),
        "marking": chosen.marking,
        "ell": chosen.ell,
        "q": chosen.q,
        "certificate": chosen.certificate,
        "agreement_with_g": r,
    });
    Ok(Artifact::new(Meta::new("lift", a, None), &result).with_csv(csv))
}

fn to_bits(report: &mut WalkStatsReport) {
    let k = std::f64::consts::LN_2;
    for row in &mut report.time {
        row.entropy /= k;
        row.entropy_over_t = row.entropy_over_t.map(|x| x / k);
        row.entropy_increment = row.entropy_increment.map(|x| x / k);
    }
    for row in &mut report.radius {
        row.v_hat = row.v_hat.map(|x| x / k);
    }
    if let Some(f) = &mut report.fundamental {
        f.h_hat /= k;
        f.v_hat /= k;
        f.slack_speed /= k;
        f.slack_moment /= k;
    }
}

pub fn profile(a: &ProfileArgs) -> Result<Artifact, CliError> {
    let b = budgets(&a.budgets)?;
    positive("samples", a.samples)?;
    let g = group(&a.group, &a.budgets)?;
    let opts = MeasureOptions { horizon: a.horizon, waive_nondegeneracy: a.waive_nondegeneracy };
    let mu = StepDistribution::parse(&a.measure, g.rank(), opts)?;
    let speed = match a.speed {
        Speed::Exact => Some(SpeedMode::Exact),
        Speed::MonteCarlo => Some(SpeedMode::MonteCarlo { samples: a.samples, seed: a.seed }),
        Speed::Auto => Some(SpeedMode::Auto { samples: a.samples, seed: a.seed }),
        Speed::None => None,
    };
    let config = ProfileConfig { t_max: a.tmax, r_max: a.rmax, rational: a.rational, speed, budgets: b };
    let mut report = walk_stats(&g, &mu, &config)?;
    if a.log2 {
        to_bits(&mut report);
    }
    if let Some(path) = &a.plotdata {
        std::fs::write(path, report.to_plotdata()).map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
    }
    let csv = report.to_csv();
    let result = json!({ "units": if a.log2 { "bits" } else { "nats" }, "report": report });
    Ok(Artifact::new(Meta::new("profile", a, Some(a.seed)), &result).with_csv(csv).printing(Stdout::Csv))
}

fn comparison_csv(c: &QuotientComparison) -> String {
    let mut out = String::from("t,H_src,H_quo,H_gap,return_src,return_quo\n");
    for r in &c.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.entropy_src, r.entropy_quo, r.entropy_gap, r.return_src, r.return_quo
        ));
    }
    if let Some(rows) = &c.sandwich {
        out.push_str("\nt,H_left,H_right,H_diagonal,sandwich\n");
        for r in rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.t, r.entropy_left, r.entropy_right, r.entropy_diagonal, r.holds
            ));
        }
    }
    out
}

pub fn compare(a: &CompareArgs) -> Result<(Artifact, bool), CliError> {
    let b = budgets(&a.budgets)?;
    let src = group(&a.src, &a.budgets)?;
    let opts = MeasureOptions { waive_nondegeneracy: a.waive_nondegeneracy, ..MeasureOptions::default() };
    let mu = StepDistribution::parse(&a.measure, src.rank(), opts)?;
    let meta = Meta::new("compare", a, None);
    if a.kernel {
        let kopts = KernelOptions { truncate: a.truncate, self_convolution: a.self_convolution, budgets: b };
        let report = if a.rational {
            kernel_conditional_measure::<BigRational>(&src, &mu, a.tmax, &kopts)?.report(&src, &mu)
        } else {
            kernel_conditional_measure::<f64>(&src, &mu, a.tmax, &kopts)?.report(&src, &mu)
        };
        let mut csv = String::from("element,mass\n");
        for (x, p) in &report.support {
            csv.push_str(&format!("\"{}\",{}\n", x.replace('"', "\"\""), p));
        }
        let ok = report.symmetric || !mu.is_symmetric();
        return Ok((Artifact::new(meta, &report).with_csv(csv), ok));
    }
    let quo = a.quo.as_deref().ok_or_else(|| CliError::Config("compare needs --quo or --kernel".into()))?;
    let quo = group(quo, &a.budgets)?;
    let report = if a.rational {
        quotient_comparison_report::<BigRational>(&src, &quo, &mu, a.tmax, a.quotient_horizon, b)?
    } else {
        quotient_comparison_report::<f64>(&src, &quo, &mu, a.tmax, a.quotient_horizon, b)?
    };
    let ok = report.entropy_monotone
        && report.return_monotone
        && report.sandwich.as_ref().is_none_or(|s| s.iter().all(|r| r.holds));
    let csv = comparison_csv(&report);
    Ok((Artifact::new(meta, &report).with_csv(csv), ok))
}

pub fn sequence(a: &SequenceArgs) -> Result<Artifact, CliError> {
    let b = budgets(&a.budgets)?;
    let stages = parse_stages(&a.stages)?;
    let opts = SequenceOptions {
        measure: a.measure.clone(),
        t_entropy: a.t_entropy,
        agreement_cap: a.agreement_cap,
        target_agreement: a.target_agreement,
        certify_radius: a.certify_radius,
        word_budget: a.budgets.word_budget,
        budgets: b,
    };
    let report = run_sequence(stages, &opts)?;
    let csv = report.to_csv();
    let mut art = Artifact::new(Meta::new("sequence", a, None), &report).with_csv(csv);
    art.warnings = report.warnings.clone();
    Ok(art)
}
