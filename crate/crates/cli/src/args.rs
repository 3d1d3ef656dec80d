use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "marklab", version, about = "Marked groups, wreath extensions and random-walk statistics")]
pub struct Cli {
    /// Flat `key: value` config file; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<String>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Print errors as JSON diagnostics on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a fixture suite; exits 1 if any check fails.
    Fixtures(FixturesArgs),
    /// Enumerate a ball of a marked group.
    Ball(BallArgs),
    /// Relation-length agreement of two marked groups.
    Agreement(AgreementArgs),
    /// Level-n Schreier graph of the Fabrykowski-Gupta action.
    Schreier(SchreierArgs),
    /// Search 2-markings of G by agreement with the free group.
    SearchMarkings(SearchArgs),
    /// Lift a certified marking of G to Γ_n.
    Lift(LiftArgs),
    /// Entropy, speed, return-probability and growth profiles.
    Profile(ProfileArgs),
    /// Quotient comparison, or the kernel measure of a diagonal product.
    Compare(CompareArgs),
    /// Staged pipeline: marking, lift, agreement, growth and entropy.
    Sequence(SequenceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fixtures(_) => "fixtures",
            Command::Ball(_) => "ball",
            Command::Agreement(_) => "agreement",
            Command::Schreier(_) => "schreier",
            Command::SearchMarkings(_) => "search-markings",
            Command::Lift(_) => "lift",
            Command::Profile(_) => "profile",
            Command::Compare(_) => "compare",
            Command::Sequence(_) => "sequence",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OutputArgs {
    /// Output path, or `csv` / `json` to write that format to stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<String>,
    /// Output format; defaults to the path extension, else JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BudgetArgs {
    /// Maximum number of elements in a ball.
    #[arg(long, default_value_t = marklab::marked::DEFAULT_BALL_CAP)]
    pub ball_cap: usize,
    /// Maximum number of distinct elements in a convolution table.
    #[arg(long, default_value_t = marklab::walklab::DEFAULT_CONVOLUTION_CAP)]
    pub convolution_cap: usize,
    /// State budget of the word problem in G.
    #[arg(long, default_value_t = marklab::trees::DEFAULT_WORD_PROBLEM_BUDGET)]
    pub word_budget: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    LemmaVirtual,
    QuotientChain,
    Schreier,
    ShortWords,
    All,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FixturesArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Seed for sampled words.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random words per level in the quotient-chain suite.
    #[arg(long, default_value_t = 1000)]
    pub chain_samples: usize,
    /// Random words per level in the short-words suite.
    #[arg(long, default_value_t = 10_000)]
    pub short_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BallArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long)]
    pub radius: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct AgreementArgs {
    #[arg(long)]
    pub left: String,
    #[arg(long)]
    pub right: String,
    /// Largest relation length examined.
    #[arg(long)]
    pub cap: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SchreierArgs {
    #[arg(long)]
    pub level: usize,
    #[arg(long, default_value_t = marklab::schreier::DEFAULT_MAX_LEVEL)]
    pub max_level: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    #[arg(long, default_value = "fg:a,b")]
    pub base: String,
    /// Longest marking word.
    #[arg(long, default_value_t = 2)]
    pub length_cap: usize,
    /// Keep markings with at least this agreement with the free group.
    #[arg(long, default_value_t = 0)]
    pub target_agreement: usize,
    #[arg(long, default_value_t = 10)]
    pub agreement_cap: usize,
    /// BFS radius for generation certificates.
    #[arg(long, default_value_t = 8)]
    pub certify_radius: usize,
    #[arg(long, default_value_t = 200_000)]
    pub ball_cap: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct LiftArgs {
    /// Marking words over a, b, comma-separated.
    #[arg(long, default_value = "a,b")]
    pub marking: String,
    #[arg(long)]
    pub level: usize,
    /// Cap for the agreement check; defaults to 2^(level-1).
    #[arg(long)]
    pub agreement_cap: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub certify_radius: usize,
    #[arg(long, default_value_t = marklab::marked::DEFAULT_BALL_CAP)]
    pub ball_cap: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Speed {
    Exact,
    MonteCarlo,
    Auto,
    None,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProfileArgs {
    #[arg(long)]
    pub group: String,
    #[arg(long, default_value = "srw")]
    pub measure: String,
    #[arg(long, default_value_t = 6)]
    pub tmax: usize,
    #[arg(long, default_value_t = 6)]
    pub rmax: usize,
    /// Exact rational probabilities.
    #[arg(long)]
    pub rational: bool,
    #[arg(long, value_enum, default_value_t = Speed::Exact)]
    pub speed: Speed,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo trajectories.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Skip the nondegeneracy check (recorded in the report).
    #[arg(long)]
    pub waive_nondegeneracy: bool,
    #[arg(long, default_value_t = marklab::walklab::DEFAULT_NONDEGENERACY_HORIZON)]
    pub horizon: usize,
    /// Display entropies in bits instead of nats.
    #[arg(long)]
    pub log2: bool,
    /// Also write gnuplot-ready data to this path.
    #[arg(long)]
    #[serde(skip)]
    pub plotdata: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CompareArgs {
    /// Source group; the diagonal product in kernel mode.
    #[arg(long)]
    pub src: String,
    /// Quotient group (quotient mode).
    #[arg(long)]
    pub quo: Option<String>,
    #[arg(long, default_value = "srw")]
    pub measure: String,
    /// Largest step (the conditioning step in kernel mode).
    #[arg(long, default_value_t = 6)]
    pub tmax: usize,
    /// Relation length up to which the quotient is verified.
    #[arg(long, default_value_t = marklab::marked::DEFAULT_QUOTIENT_HORIZON)]
    pub quotient_horizon: usize,
    #[arg(long)]
    pub rational: bool,
    /// Report the kernel measure Q of the diagonal product `src`.
    #[arg(long)]
    pub kernel: bool,
    /// Truncation radius R for Q.
    #[arg(long)]
    pub truncate: Option<usize>,
    /// Report Q_R^(2m)(id) for this m.
    #[arg(long)]
    pub self_convolution: Option<usize>,
    #[arg(long)]
    pub waive_nondegeneracy: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SequenceArgs {
    /// `;`-separated stages `<w1>,<w2>@<n>` or `search:<lmax>@<n>`.
    #[arg(long)]
    pub stages: String,
    #[arg(long, default_value = "srw")]
    pub measure: String,
    /// Step at which H(t)/t is compared with the free group.
    #[arg(long, default_value_t = 8)]
    pub t_entropy: usize,
    /// Agreement cap per stage; defaults to 2^(n-1).
    #[arg(long)]
    pub agreement_cap: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub target_agreement: usize,
    #[arg(long, default_value_t = 8)]
    pub certify_radius: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputArgs,
}
