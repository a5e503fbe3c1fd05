use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use roleinduce::corpus::{ConllFormat, SyntaxColumns};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "roleinduce", version, about = "Unsupervised semantic role induction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Write a synthetic corpus with planted roles.
    Synth(SynthArgs),
    /// Train a model on a CoNLL file.
    Train(TrainArgs),
    /// Label the arguments of a CoNLL file with induced roles.
    Label(LabelArgs),
    /// Score induced roles against the gold roles of a CoNLL file.
    Eval(EvalArgs),
    /// Score the syntactic-function baseline on a CoNLL file.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Format {
    Conll2008,
    Conll2009,
}

impl From<Format> for ConllFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Conll2008 => ConllFormat::Conll2008,
            Format::Conll2009 => ConllFormat::Conll2009,
        }
    }
}

/// Input file, its layout and which syntax columns to read.
#[derive(Args, Debug)]
pub struct Input {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "conll2008")]
    pub format: Format,
    /// Read predicted rather than gold syntax columns.
    #[arg(long)]
    pub predicted: bool,
}

impl Input {
    pub fn columns(&self) -> SyntaxColumns {
        if self.predicted {
            SyntaxColumns::Predicted
        } else {
            SyntaxColumns::Gold
        }
    }
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub predicates: usize,
    #[arg(long, default_value_t = 4)]
    pub roles: usize,
    /// Lemmas per role.
    #[arg(long, default_value_t = 20)]
    pub vocab: usize,
    #[arg(long, default_value_t = 5000)]
    pub sentences: usize,
    /// Probability of replacing each surface cue.
    #[arg(long, default_value_t = 0.2)]
    pub noise: f64,
    /// Give every role its own dependency relation.
    #[arg(long)]
    pub unambiguous: bool,
    /// Omit role-marking determiners and tags.
    #[arg(long)]
    pub no_markers: bool,
    #[arg(long, value_enum, default_value = "conll2008")]
    pub format: Format,
}

/// Training flags. Each may also come from the `--config` file under the
/// same name; flags win.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct TrainFlags {
    #[arg(long)]
    pub roles: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub proj: Option<usize>,
    /// Negative samples per argument.
    #[arg(long)]
    pub neg: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    /// AdaGrad epsilon.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// L2 penalty on encoder weights.
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub lemma_min_count: Option<u64>,
    #[arg(long)]
    pub feature_min_count: Option<u64>,
    #[arg(long)]
    pub verb_min_count: Option<u64>,
    /// POS prefix marking predicates.
    #[arg(long)]
    pub pos_prefix: Option<String>,
    /// Independent runs; the best final objective is kept.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Let the encoder see the argument's own form and lemma.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub lexical: Option<bool>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub model: PathBuf,
    /// TOML file of training flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Args, Debug)]
pub struct LabelArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// Output of `label`.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long, value_enum, default_value = "conll2008")]
    pub format: Format,
    #[arg(long, default_value = "V")]
    pub pos_prefix: String,
    /// Emit JSON instead of the tab-separated report.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value_t = 20)]
    pub clusters: usize,
    #[arg(long, default_value = "V")]
    pub pos_prefix: String,
    #[arg(long)]
    pub json: bool,
}
