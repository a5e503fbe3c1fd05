use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::Path;

use roleinduce::corpus::{extract_instances, parse_conll, write_conll, PredicateInstance, Sentence};
use roleinduce::metrics::{evaluate, syntf_baseline, RoleClustering, Scores};
use roleinduce::synth::{generate, SynthConfig};
use roleinduce::trainer::train_with;
use roleinduce::{load_model, save_model, TrainConfig};

use crate::options::{
    BaselineArgs, Cli, Command, EvalArgs, Input, LabelArgs, SynthArgs, TrainArgs, TrainFlags,
};
use crate::Failure;

const LABEL_HEADER: &str = "sentence_id\tpredicate_index\targument_index\tinduced_role";
const PLANTED_HEADER: &str = "sentence_id\tpredicate_index\targument_index\trole";

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Synth(a) => synth(a),
        Command::Train(a) => train(a),
        Command::Label(a) => label(a),
        Command::Eval(a) => eval(a),
        Command::Baseline(a) => baseline(a),
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Data(format!("{}: {e}", path.display()))
}

fn read_corpus(input: &Input) -> Result<Vec<Sentence>, Failure> {
    let file = File::open(&input.input).map_err(|e| io_failure(&input.input, e))?;
    parse_conll(BufReader::new(file), input.format.into(), input.columns())
        .map_err(|e| Failure::Data(format!("{}: {e}", input.input.display())))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn report(scores: &Scores, json: bool) {
    if json {
        println!("{}", scores.to_json());
    } else {
        print!("{}", scores.to_tsv());
    }
}

fn synth(a: SynthArgs) -> Outcome {
    let config = SynthConfig {
        predicates: a.predicates,
        roles: a.roles,
        vocab_per_role: a.vocab,
        sentences: a.sentences,
        noise: a.noise,
        ambiguous_cues: !a.unambiguous,
        case_markers: !a.no_markers,
        seed: a.seed,
        ..Default::default()
    };
    config.validate()?;
    let corpus = generate(&config)?;
    fs::create_dir_all(&a.out).map_err(|e| io_failure(&a.out, e))?;
    let conll = a.out.join("corpus.conll");
    let planted = a.out.join("planted.tsv");
    write_file(&conll, &write_conll(&corpus.sentences, a.format.into()))?;
    write_file(&planted, &format!("{PLANTED_HEADER}\n{}", corpus.planted_tsv()))?;
    println!("{}", conll.display());
    println!("{}", planted.display());
    Ok(())
}

fn train_config(flags: TrainFlags, file: Option<&Path>) -> Result<TrainConfig, Failure> {
    let from_file: TrainFlags = match file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => TrainFlags::default(),
    };
    let d = TrainConfig::default();
    let config = TrainConfig {
        roles: flags.roles.or(from_file.roles).unwrap_or(d.roles),
        dim: flags.dim.or(from_file.dim).unwrap_or(d.dim),
        proj: flags.proj.or(from_file.proj).unwrap_or(d.proj),
        negatives: flags.neg.or(from_file.neg).unwrap_or(d.negatives),
        epochs: flags.epochs.or(from_file.epochs).unwrap_or(d.epochs),
        learning_rate: flags.lr.or(from_file.lr).unwrap_or(d.learning_rate),
        epsilon: flags.eps.or(from_file.eps).unwrap_or(d.epsilon),
        seed: flags.seed.or(from_file.seed).unwrap_or(d.seed),
        l2: flags.l2.or(from_file.l2).unwrap_or(d.l2),
        lemma_min_count: flags
            .lemma_min_count
            .or(from_file.lemma_min_count)
            .unwrap_or(d.lemma_min_count),
        feature_min_count: flags
            .feature_min_count
            .or(from_file.feature_min_count)
            .unwrap_or(d.feature_min_count),
        verb_min_count: flags
            .verb_min_count
            .or(from_file.verb_min_count)
            .unwrap_or(d.verb_min_count),
        predicate_pos_prefix: flags
            .pos_prefix
            .or(from_file.pos_prefix)
            .unwrap_or(d.predicate_pos_prefix),
        restarts: flags.restarts.or(from_file.restarts).unwrap_or(d.restarts),
        lexical_features: flags.lexical.or(from_file.lexical).unwrap_or(d.lexical_features),
    };
    config.validate()?;
    Ok(config)
}

fn train(a: TrainArgs) -> Outcome {
    let config = train_config(a.flags, a.config.as_deref())?;
    let sentences = read_corpus(&a.input)?;
    let instances = extract_instances(&sentences, &config.predicate_pos_prefix);
    let restarts = config.restarts;
    let (model, _) = train_with(&sentences, &instances, &config, |_, stats| {
        if restarts > 1 && stats.epoch == 1 {
            println!("# restart {}", stats.restart);
        }
        println!("{}", stats.log_line());
    })?;
    save_model(&model, &a.model)?;
    Ok(())
}

fn label(a: LabelArgs) -> Outcome {
    let model = load_model(&a.model)?;
    let sentences = read_corpus(&a.input)?;
    let instances = extract_instances(&sentences, &model.config.predicate_pos_prefix);
    let predictions = model.predict(&sentences, &instances);
    let mut out = format!("{LABEL_HEADER}\n");
    for (inst, roles) in instances.iter().zip(&predictions) {
        for (arg, role) in inst.arguments.iter().zip(roles) {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                inst.sentence, inst.predicate, arg.token, role
            );
        }
    }
    write_file(&a.out, &out)
}

type ArgumentKey = (usize, usize, usize);

fn read_labels(path: &Path) -> Result<HashMap<ArgumentKey, usize>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let mut labels = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.is_empty() || line.starts_with("sentence_id\t") {
            continue;
        }
        let bad = || {
            Failure::Data(format!(
                "{}:{}: expected four integer columns",
                path.display(),
                n + 1
            ))
        };
        let fields: Vec<usize> = line
            .split('\t')
            .map(|f| f.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [s, p, a, c] = fields[..] else {
            return Err(bad());
        };
        if labels.insert((s, p, a), c).is_some() {
            return Err(Failure::Data(format!(
                "{}:{}: duplicate argument",
                path.display(),
                n + 1
            )));
        }
    }
    Ok(labels)
}

/// Cluster of every gold argument; the label file must cover exactly them.
fn align(
    instances: &[PredicateInstance],
    mut labels: HashMap<ArgumentKey, usize>,
) -> Result<Vec<Vec<usize>>, Failure> {
    let mut out = Vec::with_capacity(instances.len());
    for inst in instances {
        let mut roles = Vec::with_capacity(inst.arguments.len());
        for arg in &inst.arguments {
            let key = (inst.sentence, inst.predicate, arg.token);
            let cluster = labels.remove(&key).ok_or_else(|| {
                Failure::Data(format!(
                    "mismatched instance sets: no label for sentence {} predicate {} argument {}",
                    key.0, key.1, key.2
                ))
            })?;
            roles.push(cluster);
        }
        out.push(roles);
    }
    if let Some((s, p, a)) = labels.keys().min() {
        return Err(Failure::Data(format!(
            "mismatched instance sets: label for unknown argument (sentence {s} predicate {p} argument {a})"
        )));
    }
    Ok(out)
}

fn eval(a: EvalArgs) -> Outcome {
    let labels = read_labels(&a.pred)?;
    let input = Input {
        input: a.gold.clone(),
        format: a.format,
        predicted: false,
    };
    let sentences = read_corpus(&input)?;
    let instances = extract_instances(&sentences, &a.pos_prefix);
    let clusters = align(&instances, labels)?;
    report(
        &evaluate(&RoleClustering::from_predictions(&instances, &clusters)),
        a.json,
    );
    Ok(())
}

fn baseline(a: BaselineArgs) -> Outcome {
    if a.clusters == 0 {
        return Err(Failure::Usage("--clusters must be at least 1".into()));
    }
    let sentences = read_corpus(&a.input)?;
    let instances = extract_instances(&sentences, &a.pos_prefix);
    report(
        &evaluate(&syntf_baseline(&sentences, &instances, a.clusters)),
        a.json,
    );
    Ok(())
}
