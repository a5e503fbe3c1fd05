//! CoNLL 2008/2009 ingestion, predicate-argument extraction and the
//! argument lemma lexicon.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell value marking an argument whose gold role is unknown.
pub const UNKNOWN_ROLE_CELL: &str = "?";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConllFormat {
    Conll2008,
    Conll2009,
}

impl ConllFormat {
    /// Number of columns preceding the APRED block.
    pub fn fixed_columns(self) -> usize {
        match self {
            ConllFormat::Conll2008 => 11,
            ConllFormat::Conll2009 => 14,
        }
    }

    fn pred_column(self) -> usize {
        self.fixed_columns() - 1
    }
}

impl FromStr for ConllFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "conll2008" | "2008" => Ok(ConllFormat::Conll2008),
            "conll2009" | "2009" => Ok(ConllFormat::Conll2009),
            other => Err(Error::Config(format!("unknown CoNLL format '{other}'"))),
        }
    }
}

/// Which syntax columns populate [`Token`] fields.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SyntaxColumns {
    #[default]
    Gold,
    /// Predicted columns where the format has them (PPOS for 2008;
    /// PLEMMA, PPOS, PHEAD, PDEPREL for 2009).
    Predicted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    /// Index of the syntactic head, 0 for the root.
    pub head: usize,
    pub deprel: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Argument {
    pub token: usize,
    pub role: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    pub token: usize,
    /// Content of the PRED column, e.g. `open.01`.
    pub sense: String,
    /// Ordered by token index.
    pub arguments: Vec<Argument>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub predicates: Vec<Predicate>,
}

impl Sentence {
    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Dependents of `index` (0 for the root) in surface order.
    pub fn dependents(&self, index: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.head == index)
    }

    /// Checks the head relation forms a forest rooted at 0.
    fn has_cycle(&self) -> bool {
        // 0 = unvisited, 1 = on current walk, 2 = known to reach the root
        let mut state = vec![0u8; self.tokens.len() + 1];
        state[0] = 2;
        for start in 1..=self.tokens.len() {
            let mut walk = Vec::new();
            let mut cur = start;
            while state[cur] == 0 {
                state[cur] = 1;
                walk.push(cur);
                cur = self.tokens[cur - 1].head;
            }
            if state[cur] == 1 {
                return true;
            }
            for node in walk {
                state[node] = 2;
            }
        }
        false
    }
}

fn is_empty_cell(cell: &str) -> bool {
    cell.is_empty() || cell == "_"
}

fn split_columns(line: &str) -> Vec<&str> {
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

struct Block {
    first_line: usize,
    rows: Vec<(usize, Vec<String>)>,
}

/// Parses a CoNLL 2008 or 2009 stream into sentences.
pub fn parse_conll<R: BufRead>(
    reader: R,
    format: ConllFormat,
    columns: SyntaxColumns,
) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut block: Option<Block> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() {
            if let Some(b) = block.take() {
                sentences.push(parse_block(b, format, columns, sentences.len() + 1)?);
            }
            continue;
        }
        let cells = split_columns(trimmed).into_iter().map(str::to_owned).collect();
        block
            .get_or_insert_with(|| Block {
                first_line: line_no,
                rows: Vec::new(),
            })
            .rows
            .push((line_no, cells));
    }
    if let Some(b) = block.take() {
        sentences.push(parse_block(b, format, columns, sentences.len() + 1)?);
    }
    Ok(sentences)
}

pub fn parse_conll_str(text: &str, format: ConllFormat, columns: SyntaxColumns) -> Result<Vec<Sentence>> {
    parse_conll(text.as_bytes(), format, columns)
}

fn parse_block(
    block: Block,
    format: ConllFormat,
    columns: SyntaxColumns,
    sentence_no: usize,
) -> Result<Sentence> {
    let fixed = format.fixed_columns();
    let pred_col = format.pred_column();
    let (lemma_col, pos_col, head_col, deprel_col) = match (format, columns) {
        (ConllFormat::Conll2008, SyntaxColumns::Gold) => (2, 3, 8, 9),
        (ConllFormat::Conll2008, SyntaxColumns::Predicted) => (2, 4, 8, 9),
        (ConllFormat::Conll2009, SyntaxColumns::Gold) => (2, 4, 8, 10),
        (ConllFormat::Conll2009, SyntaxColumns::Predicted) => (3, 5, 9, 11),
    };

    let n_preds = block
        .rows
        .iter()
        .filter(|(_, cells)| cells.len() > pred_col && !is_empty_cell(&cells[pred_col]))
        .count();
    let expected = fixed + n_preds;
    let len = block.rows.len();

    let mut sentence = Sentence::default();
    let mut predicates: Vec<Predicate> = Vec::with_capacity(n_preds);
    let mut role_cells: Vec<Vec<(usize, String)>> = vec![Vec::new(); n_preds];

    for (pos, (line, cells)) in block.rows.iter().enumerate() {
        let line = *line;
        if cells.len() != expected {
            return Err(Error::Parse {
                line,
                message: format!(
                    "expected {expected} columns ({fixed} fixed + {n_preds} argument columns), found {}",
                    cells.len()
                ),
            });
        }
        let index: usize = cells[0].parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-numeric ID '{}'", cells[0]),
        })?;
        if index != pos + 1 {
            return Err(Error::Parse {
                line,
                message: format!("token ID {index} out of sequence, expected {}", pos + 1),
            });
        }
        let head: usize = cells[head_col].parse().map_err(|_| Error::Parse {
            line,
            message: format!("non-numeric HEAD '{}'", cells[head_col]),
        })?;
        if head > len {
            return Err(Error::Parse {
                line,
                message: format!("HEAD {head} outside sentence of length {len}"),
            });
        }
        if head == index {
            return Err(Error::Parse {
                line,
                message: format!("token {index} is its own head"),
            });
        }
        sentence.tokens.push(Token {
            index,
            form: cells[1].clone(),
            lemma: cells[lemma_col].clone(),
            pos: cells[pos_col].clone(),
            head,
            deprel: cells[deprel_col].clone(),
        });
        if !is_empty_cell(&cells[pred_col]) {
            predicates.push(Predicate {
                token: index,
                sense: cells[pred_col].clone(),
                arguments: Vec::new(),
            });
        }
        for (k, cell) in cells[fixed..].iter().enumerate() {
            if !is_empty_cell(cell) {
                role_cells[k].push((index, cell.clone()));
            }
        }
    }

    for (pred, cells) in predicates.iter_mut().zip(role_cells) {
        pred.arguments = cells
            .into_iter()
            .map(|(token, cell)| Argument {
                token,
                role: (cell != UNKNOWN_ROLE_CELL).then_some(cell),
            })
            .collect();
    }
    sentence.predicates = predicates;

    if sentence.has_cycle() {
        return Err(Error::HeadCycle {
            sentence: sentence_no,
            line: block.first_line,
        });
    }
    Ok(sentence)
}

/// Renders a sentence as one CoNLL block (without the trailing blank line).
/// Predicted columns are filled with copies of the gold values.
pub fn write_conll_block(sentence: &Sentence, format: ConllFormat) -> String {
    let mut out = String::new();
    for token in &sentence.tokens {
        let pred = sentence
            .predicates
            .iter()
            .find(|p| p.token == token.index)
            .map(|p| p.sense.as_str())
            .unwrap_or("_");
        let head = token.head.to_string();
        let mut cells: Vec<&str> = match format {
            ConllFormat::Conll2008 => vec![
                &token.form,
                &token.lemma,
                &token.pos,
                &token.pos,
                &token.form,
                &token.lemma,
                &token.pos,
                &head,
                &token.deprel,
                pred,
            ],
            ConllFormat::Conll2009 => vec![
                &token.form,
                &token.lemma,
                &token.lemma,
                &token.pos,
                &token.pos,
                "_",
                "_",
                &head,
                &head,
                &token.deprel,
                &token.deprel,
                if pred == "_" { "_" } else { "Y" },
                pred,
            ],
        };
        for p in &sentence.predicates {
            let cell = p
                .arguments
                .iter()
                .find(|a| a.token == token.index)
                .map(|a| a.role.as_deref().unwrap_or(UNKNOWN_ROLE_CELL))
                .unwrap_or("_");
            cells.push(cell);
        }
        let _ = write!(out, "{}", token.index);
        for c in cells {
            out.push('\t');
            out.push_str(c);
        }
        out.push('\n');
    }
    out
}

/// Renders a whole corpus, blocks separated by blank lines.
pub fn write_conll(sentences: &[Sentence], format: ConllFormat) -> String {
    let mut out = String::new();
    for s in sentences {
        out.push_str(&write_conll_block(s, format));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArgumentSlot {
    pub token: usize,
    pub lemma: String,
    pub role: Option<String>,
}

/// One predicate occurrence with its arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredicateInstance {
    /// Position of the sentence in the corpus (0-based).
    pub sentence: usize,
    pub predicate: usize,
    pub predicate_lemma: String,
    pub arguments: Vec<ArgumentSlot>,
}

fn lemma_of(token: &Token) -> String {
    if is_empty_cell(&token.lemma) {
        token.form.to_lowercase()
    } else {
        token.lemma.clone()
    }
}

/// One instance per annotated predicate whose POS starts with `pos_prefix`;
/// predicates without arguments are dropped.
pub fn extract_instances(sentences: &[Sentence], pos_prefix: &str) -> Vec<PredicateInstance> {
    let mut out = Vec::new();
    for (sid, sentence) in sentences.iter().enumerate() {
        for pred in &sentence.predicates {
            let token = sentence.token(pred.token);
            if !token.pos.starts_with(pos_prefix) || pred.arguments.is_empty() {
                continue;
            }
            let mut arguments: Vec<ArgumentSlot> = pred
                .arguments
                .iter()
                .map(|a| ArgumentSlot {
                    token: a.token,
                    lemma: lemma_of(sentence.token(a.token)),
                    role: a.role.clone(),
                })
                .collect();
            arguments.sort_by_key(|a| a.token);
            out.push(PredicateInstance {
                sentence: sid,
                predicate: pred.token,
                predicate_lemma: lemma_of(token),
                arguments,
            });
        }
    }
    out
}

pub type LemmaId = usize;

pub const UNK: LemmaId = 0;
pub const UNK_LEMMA: &str = "<unk>";

/// Argument lemma alphabet with corpus counts. Id 0 is reserved for UNK.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lexicon {
    lemmas: Vec<String>,
    counts: Vec<u64>,
    ids: HashMap<String, LemmaId>,
}

impl Lexicon {
    /// Rebuilds a lexicon from `(lemma, count)` entries, UNK first.
    pub fn from_entries(entries: Vec<(String, u64)>) -> Result<Self> {
        let mut lemmas = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        let mut ids = HashMap::with_capacity(entries.len());
        for (i, (lemma, count)) in entries.into_iter().enumerate() {
            if i == UNK && lemma != UNK_LEMMA {
                return Err(Error::ModelShape(format!(
                    "lexicon entry 0 must be {UNK_LEMMA}, found '{lemma}'"
                )));
            }
            if i != UNK && count == 0 {
                return Err(Error::ModelShape(format!("lemma '{lemma}' has zero count")));
            }
            if ids.insert(lemma.clone(), i).is_some() {
                return Err(Error::ModelShape(format!("duplicate lemma '{lemma}'")));
            }
            lemmas.push(lemma);
            counts.push(count);
        }
        if lemmas.is_empty() {
            return Err(Error::ModelShape("lexicon lacks the UNK entry".into()));
        }
        Ok(Lexicon { lemmas, counts, ids })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, u64)> {
        self.lemmas
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.lemmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lemmas.is_empty()
    }

    /// Id of `lemma`, UNK when absent.
    pub fn id(&self, lemma: &str) -> LemmaId {
        self.ids.get(lemma).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.ids.contains_key(lemma) && lemma != UNK_LEMMA
    }

    pub fn lemma(&self, id: LemmaId) -> &str {
        &self.lemmas[id]
    }

    pub fn count(&self, id: LemmaId) -> u64 {
        self.counts[id]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Lemmas with frequency at least `min_count` get their own id, ordered by
/// descending count then lexicographically; the rest fold into UNK.
pub fn build_lexicon(instances: &[PredicateInstance], min_count: u64) -> Lexicon {
    let min_count = min_count.max(1);
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for inst in instances {
        for arg in &inst.arguments {
            *counts.entry(arg.lemma.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, u64)> = Vec::new();
    let mut unk = 0;
    for (lemma, count) in counts {
        if count >= min_count && lemma != UNK_LEMMA {
            kept.push((lemma, count));
        } else {
            unk += count;
        }
    }
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let entries = std::iter::once((UNK_LEMMA.to_owned(), unk))
        .chain(kept.into_iter().map(|(l, c)| (l.to_owned(), c)))
        .collect();
    Lexicon::from_entries(entries).expect("freshly built lexicon is consistent")
}

/// `p(a) = count(a) / total` over all ids, UNK included.
pub fn unigram_distribution(lexicon: &Lexicon) -> Result<Vec<f64>> {
    let total = lexicon.total();
    if total == 0 {
        return Err(Error::EmptyLexicon);
    }
    let total = total as f64;
    Ok(lexicon.counts.iter().map(|&c| c as f64 / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    // ID FORM LEMMA GPOS PPOS SPLIT_FORM SPLIT_LEMMA PPOSS HEAD DEPREL PRED APRED
    const MARY: &str = "1\tMary\tmary\tNNP\tNNP\tMary\tmary\tNNP\t2\tSBJ\t_\tA0\n\
                        2\topened\topen\tVBD\tVBD\topened\topen\tVBD\t0\tROOT\topen.01\t_\n";

    #[test]
    fn parses_two_token_block() {
        let s = parse_conll_str(MARY, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap();
        assert_eq!(s.len(), 1);
        let s = &s[0];
        assert_eq!(s.tokens.len(), 2);
        assert_eq!(s.token(1).head, 2);
        assert_eq!(s.token(1).deprel, "SBJ");
        assert_eq!(s.token(2).lemma, "open");
        assert_eq!(s.predicates.len(), 1);
        assert_eq!(s.predicates[0].token, 2);
        assert_eq!(s.predicates[0].sense, "open.01");
        assert_eq!(
            s.predicates[0].arguments,
            vec![Argument {
                token: 1,
                role: Some("A0".into())
            }]
        );
    }

    #[test]
    fn empty_input() {
        let s = parse_conll_str("", ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap();
        assert!(s.is_empty());
        let s = parse_conll_str("\n\n", ConllFormat::Conll2009, SyntaxColumns::Gold).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn head_cycle_is_rejected() {
        let text = "1\ta\ta\tNN\tNN\ta\ta\tNN\t2\tX\t_\n\
                    2\tb\tb\tNN\tNN\tb\tb\tNN\t1\tX\t_\n";
        let err = parse_conll_str(text, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap_err();
        assert!(matches!(err, Error::HeadCycle { sentence: 1, line: 1 }), "{err}");
    }

    #[test]
    fn column_count_error_has_line_number() {
        let text = format!("{MARY}\n1\tx\tx\tNN\n");
        let err = parse_conll_str(&text, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn non_numeric_head() {
        let text = MARY.replacen("\t2\tSBJ", "\tx\tSBJ", 1);
        let err = parse_conll_str(&text, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("HEAD"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn conll2009_gold_and_predicted_columns() {
        // ID FORM LEMMA PLEMMA POS PPOS FEAT PFEAT HEAD PHEAD DEPREL PDEPREL FILLPRED PRED APRED
        let text = "1\tMaria\tmaria\tpmaria\tNE\tPNE\t_\t_\t2\t2\tSB\tPSB\t_\t_\tA0\n\
                    2\toeffnete\toeffnen\tpoeffnen\tVVFIN\tPVVFIN\t_\t_\t0\t0\t--\tP--\tY\toeffnen.1\t_\n";
        let gold = parse_conll_str(text, ConllFormat::Conll2009, SyntaxColumns::Gold).unwrap();
        assert_eq!(gold[0].token(1).lemma, "maria");
        assert_eq!(gold[0].token(1).pos, "NE");
        assert_eq!(gold[0].token(1).deprel, "SB");
        let pred = parse_conll_str(text, ConllFormat::Conll2009, SyntaxColumns::Predicted).unwrap();
        assert_eq!(pred[0].token(1).lemma, "pmaria");
        assert_eq!(pred[0].token(1).pos, "PNE");
        assert_eq!(pred[0].token(1).deprel, "PSB");
        assert_eq!(pred[0].predicates[0].arguments.len(), 1);
    }

    #[test]
    fn round_trip_both_formats() {
        let s = parse_conll_str(MARY, ConllFormat::Conll2008, SyntaxColumns::Gold).unwrap();
        for format in [ConllFormat::Conll2008, ConllFormat::Conll2009] {
            let text = write_conll(&s, format);
            let back = parse_conll_str(&text, format, SyntaxColumns::Gold).unwrap();
            assert_eq!(back, s);
        }
    }

    fn sentence(pos: &[(&str, &str)], preds: &[(usize, &[usize])]) -> Sentence {
        let tokens = pos
            .iter()
            .enumerate()
            .map(|(i, (lemma, pos))| Token {
                index: i + 1,
                form: lemma.to_string(),
                lemma: lemma.to_string(),
                pos: pos.to_string(),
                head: 0,
                deprel: "ROOT".into(),
            })
            .collect();
        let predicates = preds
            .iter()
            .map(|(t, args)| Predicate {
                token: *t,
                sense: "x.01".into(),
                arguments: args
                    .iter()
                    .map(|&a| Argument {
                        token: a,
                        role: Some("A0".into()),
                    })
                    .collect(),
            })
            .collect();
        Sentence { tokens, predicates }
    }

    #[test]
    fn pos_prefix_filter() {
        let s = vec![sentence(
            &[("dog", "NN"), ("bark", "VBD"), ("walk", "NN")],
            &[(2, &[1]), (3, &[1])],
        )];
        let inst = extract_instances(&s, "V");
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].predicate_lemma, "bark");
    }

    #[test]
    fn multi_predicate_sentence_and_empty_predicates() {
        let s = vec![sentence(
            &[("dog", "NN"), ("bark", "VBD"), ("run", "VBD"), ("fly", "VB")],
            &[(2, &[1]), (3, &[1, 2]), (4, &[])],
        )];
        let inst = extract_instances(&s, "V");
        assert_eq!(inst.len(), 2);
        assert_eq!(inst[1].arguments.len(), 2);
    }

    fn instances_with(lemmas: &[&str]) -> Vec<PredicateInstance> {
        vec![PredicateInstance {
            sentence: 0,
            predicate: 1,
            predicate_lemma: "v".into(),
            arguments: lemmas
                .iter()
                .enumerate()
                .map(|(i, l)| ArgumentSlot {
                    token: i + 2,
                    lemma: l.to_string(),
                    role: None,
                })
                .collect(),
        }]
    }

    #[test]
    fn lexicon_threshold() {
        let inst = instances_with(&["police", "police", "baton", "police"]);
        let lex = build_lexicon(&inst, 2);
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.lemma(1), "police");
        assert_eq!(lex.count(1), 3);
        assert_eq!(lex.id("baton"), UNK);
        assert_eq!(lex.count(UNK), 1);

        let all = build_lexicon(&inst, 1);
        assert_eq!(all.len(), 3);
        assert!(all.contains("baton"));
    }

    #[test]
    fn empty_lexicon() {
        let lex = build_lexicon(&[], 2);
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.lemma(UNK), UNK_LEMMA);
        assert!(matches!(unigram_distribution(&lex), Err(Error::EmptyLexicon)));
    }

    #[test]
    fn unigram_ratios() {
        let lex = build_lexicon(&instances_with(&["a", "a", "a", "b"]), 1);
        assert_eq!(unigram_distribution(&lex).unwrap(), vec![0.0, 0.75, 0.25]);

        let lex = build_lexicon(&instances_with(&["a", "b", "c", "c"]), 1);
        // c (count 2) sorts first.
        assert_eq!(unigram_distribution(&lex).unwrap(), vec![0.0, 0.5, 0.25, 0.25]);

        let lex = build_lexicon(&instances_with(&["solo"]), 1);
        assert_eq!(unigram_distribution(&lex).unwrap(), vec![0.0, 1.0]);
    }
}
