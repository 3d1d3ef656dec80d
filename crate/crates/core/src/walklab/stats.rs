use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::CanonicalKey;
use crate::error::{Error, Result};
use crate::marked::{Backend, Ball, Element, MarkedGroup, DEFAULT_BALL_CAP};
use crate::walklab::measure::StepDistribution;
use crate::walklab::table::{Convolver, ElementMeasure, Prob, DEFAULT_CONVOLUTION_CAP};

const MC_CHUNK: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budgets {
    pub ball_cap: usize,
    pub convolution_cap: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { ball_cap: DEFAULT_BALL_CAP, convolution_cap: DEFAULT_CONVOLUTION_CAP }
    }
}

/// Word length in the marking: closed forms for the standard free and free
/// abelian markings, a ball lookup otherwise.
#[derive(Clone, Debug)]
pub enum WordMetric {
    Free,
    Abelian,
    Ball(Ball),
}

impl WordMetric {
    pub fn new(group: &MarkedGroup, radius: usize, ball_cap: usize) -> Result<Self> {
        Ok(match group.backend() {
            Backend::Free { .. } => WordMetric::Free,
            Backend::Abelian { .. } => WordMetric::Abelian,
            _ => WordMetric::Ball(Ball::build(group, radius, ball_cap)?),
        })
    }

    pub fn length(&self, key: &CanonicalKey, x: &Element) -> Result<usize> {
        match (self, x) {
            (WordMetric::Free, Element::Free(w)) => Ok(w.len()),
            (WordMetric::Abelian, Element::Abelian(v)) => Ok(v.iter().map(|c| c.unsigned_abs() as usize).sum()),
            (WordMetric::Ball(b), _) => b.word_length_of_key(key),
            _ => Err(Error::Invalid(format!("element {x:?} does not fit the word metric"))),
        }
    }

    pub fn length_of(&self, group: &MarkedGroup, x: &Element) -> Result<usize> {
        self.length(&group.key(x)?, x)
    }
}

/// `V(0), ..., V(r_max)`: exact counts for standard free and free abelian
/// markings, breadth-first enumeration otherwise.
pub fn volume_profile(group: &MarkedGroup, r_max: usize, ball_cap: usize) -> Result<Vec<u128>> {
    match group.backend() {
        Backend::Free { rank } => {
            let k = 2 * *rank as u128;
            let mut v = vec![1u128];
            let mut sphere = k;
            for _ in 1..=r_max {
                v.push(v.last().unwrap() + sphere);
                sphere *= k - 1;
            }
            Ok(v)
        }
        Backend::Abelian { rank } => Ok((0..=r_max as u128)
            .map(|r| {
                (0..=(*rank as u128).min(r))
                    .map(|k| (1u128 << k) * binomial(*rank as u128, k) * binomial(r, k))
                    .sum()
            })
            .collect()),
        _ => {
            let ball = Ball::build(group, r_max, ball_cap)?;
            (0..=r_max).map(|r| ball.volume(r).map(|v| v as u128)).collect()
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug, Serialize)]
pub struct RadiusRow {
    pub r: usize,
    pub volume: u128,
    /// `log V(r) / r`, absent at `r = 0`.
    pub v_hat: Option<f64>,
}

pub fn growth_profile(group: &MarkedGroup, r_max: usize, ball_cap: usize) -> Result<Vec<RadiusRow>> {
    Ok(volume_profile(group, r_max, ball_cap)?
        .into_iter()
        .enumerate()
        .map(|(r, volume)| RadiusRow { r, volume, v_hat: (r > 0).then(|| (volume as f64).ln() / r as f64) })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SpeedMode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact when the word metric fits the ball budget, Monte Carlo otherwise.
    Auto { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedEstimate {
    pub t: usize,
    /// `E|W_t| / t`.
    pub value: f64,
    /// Half-width of the 95% confidence interval (Monte Carlo only).
    pub ci95: Option<f64>,
    pub monte_carlo: bool,
}

/// Expected word lengths `E|W_s|` for `s = 1..=t` from `samples` seeded
/// trajectories; trajectory `i` draws from ChaCha8 stream `i` of `seed`.
/// Returns `(mean, 95% half-width)` per `s`.
pub fn monte_carlo_lengths(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t: usize,
    samples: usize,
    seed: u64,
    metric: &WordMetric,
) -> Result<Vec<(f64, f64)>> {
    if samples == 0 {
        return Err(Error::Invalid("Monte Carlo needs at least one sample".into()));
    }
    let measure: ElementMeasure<f64> = ElementMeasure::pushforward(group, mu)?;
    let atoms: Vec<&Element> = measure.atoms().map(|(x, _)| x).collect();
    let mut cumulative = Vec::with_capacity(atoms.len());
    let mut acc = 0.0;
    for (_, p) in measure.atoms() {
        acc += p;
        cumulative.push(acc);
    }
    let indices: Vec<usize> = (0..samples).collect();
    let lengths: Vec<Vec<Vec<usize>>> = indices
        .par_chunks(MC_CHUNK)
        .map(|chunk| {
            chunk
                .iter()
                .map(|&i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(i as u64);
                    let mut x = group.identity();
                    let mut out = Vec::with_capacity(t);
                    for _ in 0..t {
                        let u: f64 = rng.gen();
                        let j = cumulative.partition_point(|&c| c <= u).min(atoms.len() - 1);
                        x = group.mul(&x, atoms[j]);
                        out.push(metric.length_of(group, &x)?);
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let n = samples as f64;
    let mut sums = vec![(0.0f64, 0.0f64); t];
    for traj in lengths.iter().flatten() {
        for (s, &len) in traj.iter().enumerate() {
            let l = len as f64;
            sums[s].0 += l;
            sums[s].1 += l * l;
        }
    }
    Ok(sums
        .into_iter()
        .map(|(s1, s2)| {
            let mean = s1 / n;
            let var = if samples > 1 { ((s2 - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
            (mean, 1.96 * (var / n).sqrt())
        })
        .collect())
}

pub fn speed_estimate(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t: usize,
    mode: SpeedMode,
    budgets: Budgets,
) -> Result<SpeedEstimate> {
    if t == 0 {
        return Err(Error::Invalid("speed needs t >= 1".into()));
    }
    let radius = t * mu.support().iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let exact = || -> Result<SpeedEstimate> {
        let metric = WordMetric::new(group, radius, budgets.ball_cap)?;
        let mut c: Convolver<f64> = Convolver::new(group, mu, budgets.convolution_cap)?;
        let table = c.advance_to(t)?;
        let mut e = 0.0;
        for entry in table.entries() {
            e += entry.prob * metric.length(&entry.key, &entry.element)? as f64;
        }
        Ok(SpeedEstimate { t, value: e / t as f64, ci95: None, monte_carlo: false })
    };
    let mc = |samples: usize, seed: u64| -> Result<SpeedEstimate> {
        let metric = WordMetric::new(group, radius, budgets.ball_cap)?;
        let (mean, ci) = *monte_carlo_lengths(group, mu, t, samples, seed, &metric)?.last().expect("t >= 1");
        Ok(SpeedEstimate { t, value: mean / t as f64, ci95: Some(ci / t as f64), monte_carlo: true })
    };
    match mode {
        SpeedMode::Exact => exact(),
        SpeedMode::MonteCarlo { samples, seed } => mc(samples, seed),
        SpeedMode::Auto { samples, seed } => match exact() {
            Err(e) if e.is_budget() => mc(samples, seed),
            other => other,
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TimeRow {
    pub t: usize,
    pub support: usize,
    /// `H(t)` in nats.
    pub entropy: f64,
    pub entropy_over_t: Option<f64>,
    /// `H(t) - H(t-1)`.
    pub entropy_increment: Option<f64>,
    /// `E|W_t| / t`.
    pub speed: Option<f64>,
    pub speed_ci95: Option<f64>,
    /// `μ^{(2t)}(id)`.
    pub return_prob: f64,
    /// `μ^{(2t)}(id)^{1/(2t)}`, for symmetric measures.
    pub rho_hat: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalInequality {
    pub t: usize,
    pub r: usize,
    /// `H(t) - H(t-1)`.
    pub h_hat: f64,
    pub v_hat: f64,
    pub ell_hat: f64,
    /// `Σ |g| μ(g)`.
    pub first_moment: f64,
    /// `v̂·ℓ̂ - ĥ`.
    pub slack_speed: f64,
    /// `v̂·(first moment) - ĥ`.
    pub slack_moment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkStatsReport {
    pub group: String,
    pub measure: String,
    pub rational: bool,
    pub symmetric: bool,
    pub nondegeneracy_waived: bool,
    pub speed_mode: Option<SpeedMode>,
    pub time: Vec<TimeRow>,
    pub radius: Vec<RadiusRow>,
    pub fundamental: Option<FundamentalInequality>,
    /// Times `t` at which `H(t) - H(t-1)` exceeds `H(t-1) - H(t-2)`.
    pub increment_increases: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
pub struct ProfileConfig {
    pub t_max: usize,
    pub r_max: usize,
    pub rational: bool,
    /// `None` skips speed (and the fundamental inequality).
    pub speed: Option<SpeedMode>,
    pub budgets: Budgets,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { t_max: 6, r_max: 6, rational: false, speed: Some(SpeedMode::Exact), budgets: Budgets::default() }
    }
}

/// Entropy, speed, return-probability and growth profiles in one pass, plus
/// the fundamental-inequality record at `t = t_max`, `r = r_max`.
pub fn walk_stats(group: &MarkedGroup, mu: &StepDistribution, config: &ProfileConfig) -> Result<WalkStatsReport> {
    if config.rational {
        walk_stats_with::<num::BigRational>(group, mu, config)
    } else {
        walk_stats_with::<f64>(group, mu, config)
    }
}

fn walk_stats_with<P: Prob>(group: &MarkedGroup, mu: &StepDistribution, config: &ProfileConfig) -> Result<WalkStatsReport> {
    let t_max = config.t_max;
    let max_step = mu.support().iter().map(|(w, _)| w.len()).max().unwrap_or(0);
    let (metric, mc_lengths) = match config.speed {
        None => (None, None),
        Some(mode) => {
            let radius = (t_max * max_step).max(max_step);
            let metric = match (mode, WordMetric::new(group, radius, config.budgets.ball_cap)) {
                (_, Ok(m)) => Some(m),
                (SpeedMode::Exact, Err(e)) => return Err(e),
                (_, Err(e)) if !e.is_budget() => return Err(e),
                (_, Err(_)) => None,
            };
            match (mode, metric) {
                (SpeedMode::Exact, m) | (SpeedMode::Auto { .. }, m @ Some(_)) => (m, None),
                (SpeedMode::MonteCarlo { samples, seed }, Some(m)) => {
                    let mc = monte_carlo_lengths(group, mu, t_max, samples, seed, &m)?;
                    (Some(m), Some(mc))
                }
                (SpeedMode::MonteCarlo { .. } | SpeedMode::Auto { .. }, None) => {
                    return Err(Error::BudgetExceeded { what: "ball", limit: config.budgets.ball_cap as u64 });
                }
            }
        }
    };
    let symmetric = mu.is_symmetric();
    let mut conv: Convolver<P> = Convolver::new(group, mu, config.budgets.convolution_cap)?;
    let mut time = Vec::with_capacity(t_max + 1);
    for t in 0..=t_max {
        if t > 0 {
            conv.advance()?;
        }
        let table = conv.table();
        let entropy = table.entropy();
        let return_prob = table.return_probability(group)?.to_f64();
        let (speed, speed_ci95) = match (&metric, &mc_lengths) {
            (_, _) if t == 0 => (None, None),
            (_, Some(mc)) => (Some(mc[t - 1].0 / t as f64), Some(mc[t - 1].1 / t as f64)),
            (Some(m), None) => {
                let mut e = 0.0;
                for entry in table.entries() {
                    e += entry.prob.to_f64() * m.length(&entry.key, &entry.element)? as f64;
                }
                (Some(e / t as f64), None)
            }
            (None, None) => (None, None),
        };
        let prev: Option<&TimeRow> = time.last();
        time.push(TimeRow {
            t,
            support: table.len(),
            entropy,
            entropy_over_t: (t > 0).then(|| entropy / t as f64),
            entropy_increment: prev.map(|p| entropy - p.entropy),
            speed,
            speed_ci95,
            return_prob,
            rho_hat: (t > 0 && symmetric).then(|| return_prob.powf(1.0 / (2 * t) as f64)),
        });
    }
    let radius = growth_profile(group, config.r_max, config.budgets.ball_cap)?;
    let fundamental = match (&metric, time.last(), radius.last()) {
        (Some(m), Some(last), Some(rrow)) if t_max >= 1 && config.r_max >= 1 => {
            let measure: ElementMeasure<f64> = ElementMeasure::pushforward(group, mu)?;
            let mut first_moment = 0.0;
            for (x, p) in measure.atoms() {
                first_moment += p * m.length_of(group, x)? as f64;
            }
            let h_hat = last.entropy_increment.expect("t_max >= 1");
            let v_hat = rrow.v_hat.expect("r_max >= 1");
            let ell_hat = last.speed.expect("speed computed");
            Some(FundamentalInequality {
                t: t_max,
                r: config.r_max,
                h_hat,
                v_hat,
                ell_hat,
                first_moment,
                slack_speed: v_hat * ell_hat - h_hat,
                slack_moment: v_hat * first_moment - h_hat,
            })
        }
        _ => None,
    };
    let increment_increases = time
        .windows(3)
        .filter_map(|w| match (w[1].entropy_increment, w[2].entropy_increment) {
            (Some(a), Some(b)) if b > a + 1e-12 => Some(w[2].t),
            _ => None,
        })
        .collect();
    Ok(WalkStatsReport {
        group: group.spec(),
        measure: mu.spec().to_string(),
        rational: P::EXACT,
        symmetric,
        nondegeneracy_waived: mu.nondegeneracy_waived(),
        speed_mode: config.speed,
        time,
        radius,
        fundamental,
        increment_increases,
    })
}

/// `H(0), ..., H(t_max)` in nats.
pub fn entropy_profile<P: Prob>(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t_max: usize,
    convolution_cap: usize,
) -> Result<Vec<f64>> {
    let mut conv: Convolver<P> = Convolver::new(group, mu, convolution_cap)?;
    let mut out = vec![conv.table().entropy()];
    for _ in 0..t_max {
        out.push(conv.advance()?.entropy());
    }
    Ok(out)
}

/// `(μ^{(2t)}(id), ρ̂(t))` for `t = 1..=t_max`; `μ` must be symmetric.
pub fn spectral_radius_profile<P: Prob>(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t_max: usize,
    convolution_cap: usize,
) -> Result<Vec<(f64, f64)>> {
    mu.require_symmetric()?;
    let mut conv: Convolver<P> = Convolver::new(group, mu, convolution_cap)?;
    let mut out = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let r = conv.advance()?.return_probability(group)?.to_f64();
        out.push((r, r.powf(1.0 / (2 * t) as f64)));
    }
    Ok(out)
}

pub fn fundamental_inequality_report(
    group: &MarkedGroup,
    mu: &StepDistribution,
    t: usize,
    r: usize,
    budgets: Budgets,
) -> Result<FundamentalInequality> {
    if t == 0 || r == 0 {
        return Err(Error::Invalid("fundamental inequality needs t >= 1 and r >= 1".into()));
    }
    let config = ProfileConfig { t_max: t, r_max: r, rational: false, speed: Some(SpeedMode::Exact), budgets };
    walk_stats(group, mu, &config)?
        .fundamental
        .ok_or_else(|| Error::Invalid("fundamental inequality could not be evaluated".into()))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl WalkStatsReport {
    /// Two CSV blocks separated by a blank line: the time profile and the
    /// growth profile.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,H,H_over_t,H_increment,speed,return_prob,rho_hat\n");
        for row in &self.time {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.t,
                row.entropy,
                opt(row.entropy_over_t),
                opt(row.entropy_increment),
                opt(row.speed),
                row.return_prob,
                opt(row.rho_hat)
            )
            .unwrap();
        }
        out.push_str("\nr,V,v_hat\n");
        for row in &self.radius {
            writeln!(out, "{},{},{}", row.r, row.volume, opt(row.v_hat)).unwrap();
        }
        out
    }

    /// Whitespace-separated columns for gnuplot, one block per profile.
    pub fn to_plotdata(&self) -> String {
        let mut out = String::from("# t H H_over_t H_increment speed return_prob rho_hat\n");
        let na = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_else(|| "NaN".into());
        for row in &self.time {
            writeln!(
                out,
                "{} {} {} {} {} {} {}",
                row.t,
                row.entropy,
                na(row.entropy_over_t),
                na(row.entropy_increment),
                na(row.speed),
                row.return_prob,
                na(row.rho_hat)
            )
            .unwrap();
        }
        out.push_str("\n\n# r V v_hat\n");
        for row in &self.radius {
            writeln!(out, "{} {} {}", row.r, row.volume, na(row.v_hat)).unwrap();
        }
        out
    }
}
