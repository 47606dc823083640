//! Regenerates `tests/fixtures/`: a synthetic eight-topic corpus, train and
//! test term lists, the label file and a 768-dim external embedding file.
//!
//! cargo run -p hypernym-core --example gen_fixtures

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hypernym_core::corpus::TextPipeline;
use hypernym_core::termrep::external_key;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXTERNAL_DIM: usize = 768;

struct Topic {
    label: &'static str,
    // Surface form of the label as it appears in running text.
    head: &'static str,
    words: [&'static str; 6],
}

const TOPICS: [Topic; 8] = [
    Topic {
        label: "Bonds",
        head: "bond",
        words: ["coupon", "maturity", "issuer", "debenture", "gilt", "treasury"],
    },
    Topic {
        label: "Forward",
        head: "forward",
        words: [
            "delivery",
            "settlement",
            "outright",
            "counterparty",
            "bespoke",
            "deferred",
        ],
    },
    Topic {
        label: "Funds",
        head: "fund",
        words: ["portfolio", "manager", "mutual", "hedge", "pension", "allocation"],
    },
    Topic {
        label: "Future",
        head: "future",
        words: ["exchange", "margin", "contract", "expiry", "clearing", "commodity"],
    },
    Topic {
        label: "MMIs",
        head: "mmis",
        words: ["deposit", "overnight", "repo", "certificate", "paper", "liquidity"],
    },
    Topic {
        label: "Option",
        head: "option",
        words: ["strike", "barrier", "volatility", "premium", "exercise", "digital"],
    },
    Topic {
        label: "Stocks",
        head: "stock",
        words: ["equity", "share", "dividend", "listed", "preferred", "ordinary"],
    },
    Topic {
        label: "Swap",
        head: "swap",
        words: ["leg", "floating", "notional", "basis", "tenor", "reset"],
    },
];

const FILLERS: [&str; 8] = ["market", "price", "trade", "investor", "risk", "value", "rate", "bank"];

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn title(words: &[&str]) -> String {
    words.iter().map(|w| capitalize(w)).collect::<Vec<_>>().join(" ")
}

fn sentence(rng: &mut ChaCha8Rng, topic: &Topic) -> String {
    let len = rng.gen_range(6..10);
    let mut words = Vec::with_capacity(len);
    for _ in 0..len {
        let w = match rng.gen_range(0..10) {
            0..=5 => *topic.words.choose(rng).unwrap(),
            6 | 7 => topic.head,
            _ => *FILLERS.choose(rng).unwrap(),
        };
        words.push(w);
    }
    let mut s = capitalize(words[0]);
    for w in &words[1..] {
        s.push(' ');
        s.push_str(w);
    }
    s.push('.');
    s
}

fn corpus(dir: &Path, rng: &mut ChaCha8Rng) {
    fs::create_dir_all(dir).unwrap();
    for doc in 0..4 {
        let mut text = String::new();
        for _ in 0..150 {
            let topic = &TOPICS[rng.gen_range(0..TOPICS.len())];
            text.push_str(&sentence(rng, topic));
            text.push(' ');
        }
        text.push('\n');
        fs::write(dir.join(format!("doc{doc}.txt")), text).unwrap();
    }
}

/// Kind 0: two topic words. 1: plus the label word. 2: one topic word, the
/// label word and another label's word. 3: one word borrowed from another
/// topic.
fn term(rng: &mut ChaCha8Rng, t: usize, kind: usize) -> String {
    let topic = &TOPICS[t];
    let mut pick: Vec<&str> = topic.words.choose_multiple(rng, 2).copied().collect();
    match kind {
        0 => {}
        3 => {
            let other = (t + rng.gen_range(1..TOPICS.len())) % TOPICS.len();
            pick[1] = TOPICS[other].words.choose(rng).unwrap();
        }
        1 => pick.push(topic.head),
        _ => {
            let other = (t + rng.gen_range(1..TOPICS.len())) % TOPICS.len();
            pick.truncate(1);
            pick.push(topic.head);
            pick.push(TOPICS[other].head);
        }
    }
    title(&pick)
}

fn term_list(rng: &mut ChaCha8Rng, per_topic: usize) -> Vec<(String, &'static str)> {
    let mut out = Vec::new();
    for (t, topic) in TOPICS.iter().enumerate() {
        for i in 0..per_topic {
            let kind = [3, 1, 0, 2, 1, 3][i % 6];
            out.push((term(rng, t, kind), topic.label));
        }
    }
    out.shuffle(rng);
    out.dedup_by(|a, b| a.0 == b.0);
    out
}

fn write_terms(path: &Path, terms: &[(String, &str)]) {
    let mut text = String::new();
    for (term, label) in terms {
        writeln!(text, "{term}\t{label}").unwrap();
    }
    fs::write(path, text).unwrap();
}

/// Pre-composed term rows: topic centroid plus noise, three decimals.
fn external(path: &Path, rng: &mut ChaCha8Rng, terms: &[(String, &str)]) {
    let centroids: Vec<Vec<f64>> = (0..TOPICS.len())
        .map(|_| (0..EXTERNAL_DIM).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let pipeline = TextPipeline::default();
    let mut keys: Vec<(String, usize)> = terms
        .iter()
        .map(|(term, label)| {
            (
                external_key(term),
                TOPICS.iter().position(|t| t.label == *label).unwrap(),
            )
        })
        .collect();
    for (t, topic) in TOPICS.iter().enumerate() {
        for w in topic.words {
            keys.push((pipeline.process(w).join("_"), t));
        }
    }
    keys.sort();
    keys.dedup_by(|a, b| a.0 == b.0);

    let mut text = format!("{} {EXTERNAL_DIM}\n", keys.len());
    for (key, t) in &keys {
        text.push_str(key);
        for c in &centroids[*t] {
            let v = c + rng.gen_range(-0.8..0.8);
            write!(text, " {v:.3}").unwrap();
        }
        text.push('\n');
    }
    fs::write(path, text).unwrap();
}

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    fs::create_dir_all(&root).unwrap();

    let labels: String = TOPICS.iter().map(|t| format!("{}\n", t.label)).collect();
    fs::write(root.join("labels.txt"), labels).unwrap();
    corpus(&root.join("corpus"), &mut rng);

    let train = term_list(&mut rng, 10);
    let test: Vec<_> = term_list(&mut rng, 6)
        .into_iter()
        .filter(|(t, _)| !train.iter().any(|(u, _)| u == t))
        .collect();
    write_terms(&root.join("train.tsv"), &train);
    write_terms(&root.join("test.tsv"), &test);

    let mut all = train.clone();
    all.extend(test.iter().cloned());
    external(&root.join("external_768.txt"), &mut rng, &all);
    println!("train {} test {}", train.len(), test.len());
}
