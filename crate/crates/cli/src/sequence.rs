//! Staged pipeline: choose a marking `T_k` of `G`, lift it to `Γ_{n_k}`,
//! certify agreement, then profile growth and entropy of the lifted group.

use marklab::algebra::FreeWord;
use marklab::marked::{
    agreement_radius_with_budget, evaluate_marking, lift_marking, search_markings, Agreement, MarkedGroup,
    MarkingSearchResult, SearchConfig,
};
use marklab::walklab::{
    entropy_profile, fundamental_inequality_report, growth_profile, Budgets, MeasureOptions, StepDistribution,
};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StageSpec {
    Marking { words: Vec<String>, level: usize },
    Search { length_cap: usize, level: usize },
}

impl StageSpec {
    pub fn level(&self) -> usize {
        match self {
            StageSpec::Marking { level, .. } | StageSpec::Search { level, .. } => *level,
        }
    }
}

/// `a,b@4;search:2@6`.
pub fn parse_stages(text: &str) -> Result<Vec<StageSpec>, CliError> {
    let bad = |s: &str| CliError::Config(format!("bad stage {s:?}: expected `<w1>,<w2>@<n>` or `search:<lmax>@<n>`"));
    let stages: Vec<StageSpec> = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (body, level) = s.rsplit_once('@').ok_or_else(|| bad(s))?;
            let level: usize = level.trim().parse().map_err(|_| bad(s))?;
            if level == 0 {
                return Err(bad(s));
            }
            match body.trim().strip_prefix("search:") {
                Some(l) => {
                    let length_cap = l.trim().parse().map_err(|_| bad(s))?;
                    Ok(StageSpec::Search { length_cap, level })
                }
                None => {
                    let words: Vec<String> = body.split(',').map(|w| w.trim().to_string()).collect();
                    if words.len() != 2 {
                        return Err(bad(s));
                    }
                    for w in &words {
                        FreeWord::parse(w, 2).map_err(|e| CliError::Config(format!("stage {s:?}: {e}")))?;
                    }
                    Ok(StageSpec::Marking { words, level })
                }
            }
        })
        .collect::<Result<_, _>>()?;
    if stages.is_empty() {
        return Err(CliError::Config("at least one stage is required".into()));
    }
    Ok(stages)
}

#[derive(Clone, Debug)]
pub struct SequenceOptions {
    pub measure: String,
    pub t_entropy: usize,
    pub agreement_cap: Option<usize>,
    pub target_agreement: usize,
    pub certify_radius: usize,
    pub word_budget: u64,
    pub budgets: Budgets,
}

#[derive(Clone, Debug, Serialize)]
pub struct StageRow {
    pub k: usize,
    pub spec: StageSpec,
    pub marking: Option<Vec<String>>,
    pub certificate: Option<Vec<String>>,
    pub ell: Option<usize>,
    pub q: Option<usize>,
    pub n: usize,
    /// `n > ℓ·q`.
    pub constraint_holds: Option<bool>,
    pub agreement_cap: usize,
    /// Agreement of `(Γ_n, S)` with `(G, T)`.
    pub agreement_with_g: Option<Agreement>,
    /// Agreement of `(Γ_n, S)` with the free group.
    pub agreement_with_free: Option<Agreement>,
    /// `2·⌊2^{n-3}/ℓ⌋`, in relation length.
    pub claim_bound: Option<usize>,
    pub claim_holds: Option<bool>,
    /// Ball radius `⌊L/2⌋` matched to the certified agreement `L`.
    pub matched_radius: Option<usize>,
    pub v_hat: Option<f64>,
    pub entropy_over_t: Option<f64>,
    pub fundamental_slack: Option<f64>,
    /// Why the stage was skipped, if it was.
    pub flag: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceReport {
    pub measure: String,
    pub t_entropy: usize,
    pub free_entropy_over_t: f64,
    pub stages: Vec<StageRow>,
    /// `v̂` at matched radii is nonincreasing over unflagged stages.
    pub v_hat_nonincreasing: bool,
    /// Every unflagged stage has `H(t)/t` strictly below the free-group value.
    pub entropy_below_free: bool,
    pub warnings: Vec<String>,
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl SequenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,marking,ell,q,n,constraint,agreement_G,exact_G,agreement_F,claim_bound,claim_holds,radius,v_hat,H_over_t,slack,flag\n",
        );
        for s in &self.stages {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                s.k,
                s.marking.as_ref().map(|m| m.join(" ")).unwrap_or_default(),
                opt(&s.ell),
                opt(&s.q),
                s.n,
                opt(&s.constraint_holds),
                opt(&s.agreement_with_g.as_ref().map(|a| a.value)),
                opt(&s.agreement_with_g.as_ref().map(|a| a.exact)),
                opt(&s.agreement_with_free.as_ref().map(|a| a.value)),
                opt(&s.claim_bound),
                opt(&s.claim_holds),
                opt(&s.matched_radius),
                opt(&s.v_hat),
                opt(&s.entropy_over_t),
                opt(&s.fundamental_slack),
                s.flag.clone().unwrap_or_default(),
            ));
        }
        out
    }
}

fn flagged(k: usize, spec: StageSpec, cap: usize, reason: String) -> StageRow {
    StageRow {
        k,
        n: spec.level(),
        spec,
        marking: None,
        certificate: None,
        ell: None,
        q: None,
        constraint_holds: None,
        agreement_cap: cap,
        agreement_with_g: None,
        agreement_with_free: None,
        claim_bound: None,
        claim_holds: None,
        matched_radius: None,
        v_hat: None,
        entropy_over_t: None,
        fundamental_slack: None,
        flag: Some(reason),
    }
}

fn choose_marking(
    base: &MarkedGroup,
    spec: &StageSpec,
    opts: &SequenceOptions,
) -> Result<Result<MarkingSearchResult, String>, CliError> {
    let config = SearchConfig {
        certify_radius: opts.certify_radius,
        ball_cap: opts.budgets.ball_cap,
        target_agreement: opts.target_agreement,
        ..SearchConfig::default()
    };
    match spec {
        StageSpec::Marking { words, .. } => {
            let marking = words.iter().map(|w| FreeWord::parse(w, 2)).collect::<Result<Vec<_>, _>>()?;
            let r = evaluate_marking(base, marking, &config)?;
            Ok(if r.certified() { Ok(r) } else { Err("marking has no generation certificate".into()) })
        }
        StageSpec::Search { length_cap, .. } => {
            let config = SearchConfig { length_cap: *length_cap, ..config };
            let found = search_markings(base, &config)?;
            Ok(found
                .into_iter()
                .find(MarkingSearchResult::certified)
                .ok_or_else(|| format!("no certified marking with l <= {length_cap} and agreement >= {}", opts.target_agreement)))
        }
    }
}

fn run_stage(
    k: usize,
    spec: StageSpec,
    base: &MarkedGroup,
    mu: &StepDistribution,
    opts: &SequenceOptions,
) -> Result<StageRow, CliError> {
    let n = spec.level();
    let cap = opts.agreement_cap.unwrap_or(1usize << (n - 1));
    let chosen = match choose_marking(base, &spec, opts)? {
        Ok(r) => r,
        Err(reason) => return Ok(flagged(k, spec, cap, reason)),
    };
    let marking: Vec<String> = chosen.marking.iter().map(FreeWord::compact).collect();
    let certificate = chosen.certificate.as_ref().map(|c| c.words.iter().map(FreeWord::compact).collect());
    let q = chosen.q.expect("certified");
    let constraint = n > chosen.ell * q;
    let mut row = flagged(k, spec, cap, String::new());
    row.marking = Some(marking);
    row.certificate = certificate;
    row.ell = Some(chosen.ell);
    row.q = Some(q);
    row.constraint_holds = Some(constraint);
    if !constraint {
        row.flag = Some(format!("n = {n} does not exceed l*q = {}", chosen.ell * q));
        return Ok(row);
    }
    let lifted = lift_marking(&chosen, n)?.with_word_budget(opts.word_budget);
    let target = base.clone().remark(chosen.marking.clone())?;
    let free = MarkedGroup::free(2);
    let with_g = agreement_radius_with_budget(&lifted, &target, cap, opts.budgets.ball_cap)?;
    let with_free = agreement_radius_with_budget(&lifted, &free, cap, opts.budgets.ball_cap)?;
    let claim_bound = 2 * ((1usize << n.saturating_sub(3)) / chosen.ell);
    let claim_bound = if n >= 3 { claim_bound } else { 0 };
    let radius = with_g.ball_radius();
    let v_hat = if radius > 0 {
        growth_profile(&lifted, radius, opts.budgets.ball_cap)?.last().and_then(|r| r.v_hat)
    } else {
        None
    };
    let t = opts.t_entropy;
    let h = entropy_profile::<f64>(&lifted, mu, t, opts.budgets.convolution_cap)?;
    let slack = fundamental_inequality_report(&lifted, mu, t, t, opts.budgets)?.slack_speed;
    row.claim_holds = Some(with_g.value >= claim_bound);
    row.claim_bound = Some(claim_bound);
    row.agreement_with_g = Some(with_g);
    row.agreement_with_free = Some(with_free);
    row.matched_radius = Some(radius);
    row.v_hat = v_hat;
    row.entropy_over_t = Some(h[t] / t as f64);
    row.fundamental_slack = Some(slack);
    row.flag = None;
    Ok(row)
}

pub fn run_sequence(stages: Vec<StageSpec>, opts: &SequenceOptions) -> Result<SequenceReport, CliError> {
    if opts.t_entropy == 0 {
        return Err(CliError::Config("t-entropy must be positive".into()));
    }
    let base = MarkedGroup::fg_with_budget(opts.word_budget);
    let mu = StepDistribution::parse(&opts.measure, 2, MeasureOptions::default())?;
    let free = MarkedGroup::free(2);
    let t = opts.t_entropy;
    let free_h = entropy_profile::<f64>(&free, &mu, t, opts.budgets.convolution_cap)?[t] / t as f64;
    let mut rows = Vec::with_capacity(stages.len());
    for (k, spec) in stages.into_iter().enumerate() {
        rows.push(run_stage(k + 1, spec, &base, &mu, opts)?);
    }
    let live: Vec<&StageRow> = rows.iter().filter(|r| r.flag.is_none()).collect();
    let v: Vec<f64> = live.iter().filter_map(|r| r.v_hat).collect();
    let warnings: Vec<String> =
        rows.iter().filter_map(|r| r.flag.as_ref().map(|f| format!("stage {} skipped: {f}", r.k))).collect();
    Ok(SequenceReport {
        measure: mu.spec().to_string(),
        t_entropy: t,
        free_entropy_over_t: free_h,
        v_hat_nonincreasing: v.windows(2).all(|w| w[1] <= w[0] + 1e-12),
        entropy_below_free: live.iter().all(|r| r.entropy_over_t.is_some_and(|h| h < free_h)),
        stages: rows,
        warnings,
    })
}
