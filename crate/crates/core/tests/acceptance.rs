//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use hypernym_core::classify::{
    augment_training, cosine_similarity, lr_rank, nb_rank, rank_unsupervised, split_terms, train_bernoulli_nb,
    train_logreg, BinaryObjective, LabelSet, LabeledTerm, LogRegParams, Measure,
};
use hypernym_core::corpus::{Corpus, StopwordSet, TextPipeline};
use hypernym_core::embedding::{train_word2vec, TrainConfig};
use hypernym_core::eval::{Metrics, MetricsSummary};
use hypernym_core::termrep::TermRecord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: impl Into<String>) -> Outcome {
    let detail = detail.into();
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn hypernym(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hypernym"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("run hypernym binary")
}

// Split rule --------------------------------------------------------------

const SPLIT_LABELS: [&str; 8] = [
    "Bonds",
    "Forward",
    "Funds",
    "Future",
    "Money Market",
    "Option",
    "Stocks",
    "Swap",
];

// Matched label names per term, in label order, worked out by hand.
const SPLIT_TABLE: [(&str, &[&str]); 12] = [
    ("Debenture", &[]),
    ("Covered Bond", &["Bonds"]),
    ("Bond Future", &["Bonds", "Future"]),
    ("Interest Rate Swap", &["Swap"]),
    ("Barrier Option", &["Option"]),
    ("Equity Swap Option", &["Option", "Swap"]),
    ("Commercial Paper", &[]),
    ("Money Market Fund", &["Funds", "Money Market"]),
    ("Market Money", &[]),
    ("Preferred Stock", &["Stocks"]),
    ("Forward Rate Agreement", &["Forward"]),
    ("Stockholder Warrant", &[]),
];

fn split_rule_oracle() -> Outcome {
    let pipeline = TextPipeline::default();
    let labels = LabelSet::from_names(&pipeline, &SPLIT_LABELS).map_err(|e| e.to_string())?;
    let terms: Vec<TermRecord> = SPLIT_TABLE
        .iter()
        .map(|(t, _)| TermRecord::new(&pipeline, *t, None))
        .collect();
    let split = split_terms(&terms, &labels);
    for (i, (term, expected)) in SPLIT_TABLE.iter().enumerate() {
        let got: Vec<&str> = split.matches[i].iter().map(|&l| labels.id(l)).collect();
        if got != *expected {
            return Err(format!("{term:?}: matched {got:?}, expected {expected:?}"));
        }
        let in_subset1 = split.subset1.contains(&i);
        if in_subset1 != (expected.len() == 1) || in_subset1 == split.subset2.contains(&i) {
            return Err(format!("{term:?} placed in the wrong subset"));
        }
    }
    let counts = split.count_table();
    if counts != [4, 5, 3] {
        return Err(format!("count table {counts:?}, expected [4, 5, 3]"));
    }
    let examples = [0usize, 1, 2].map(|i| split.matches[i].len());
    if examples != [0, 1, 2] {
        return Err(format!("Debenture/Covered Bond/Bond Future matched {examples:?}"));
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let test: String = SPLIT_TABLE.iter().map(|(t, _)| format!("{t}\n")).collect();
    let labels_text: String = SPLIT_LABELS.iter().map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("terms.tsv"), test).map_err(|e| e.to_string())?;
    fs::write(dir.path().join("labels.txt"), labels_text).map_err(|e| e.to_string())?;
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let out = hypernym(&[
        "split",
        "--test",
        &p("terms.tsv"),
        "--labels",
        &p("labels.txt"),
        "--out",
        &p("out"),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let report: Vec<Vec<&str>> = stdout.lines().map(|l| l.split_whitespace().collect()).collect();
    for row in [["0", "4"], ["1", "5"], ["2+", "3"], ["total", "12"]] {
        if !report.iter().any(|r| r.as_slice() == row) {
            return Err(format!("split report lacks row {row:?}:\n{stdout}"));
        }
    }
    check(out.status.success(), "12/12 rows match; counts 0/1/2+ = 4/5/3")
}

// Naive Bayes -------------------------------------------------------------

fn nb_brute_force() -> Outcome {
    let labels =
        LabelSet::from_names(&TextPipeline::default(), &["Bonds", "Swap", "Option"]).map_err(|e| e.to_string())?;
    let bits = |s: &str| s.chars().map(|c| c == '1').collect::<Vec<bool>>();
    let train: Vec<(Vec<bool>, usize)> = [
        ("1100", 0),
        ("1000", 0),
        ("1110", 0),
        ("0011", 1),
        ("0111", 1),
        ("0001", 1),
        ("0010", 1),
        ("1001", 2),
        ("0101", 2),
    ]
    .iter()
    .map(|(b, c)| (bits(b), *c))
    .collect();
    let model = train_bernoulli_nb(&train, &labels, 1.0).map_err(|e| e.to_string())?;

    // Probabilities straight from counts, multiplied without logs.
    let n = train.len() as f64;
    let oracle = |x: &[bool]| -> Vec<usize> {
        let mut scores = Vec::new();
        for c in 0..3 {
            let members: Vec<&Vec<bool>> = train.iter().filter(|(_, l)| *l == c).map(|(b, _)| b).collect();
            let nc = members.len() as f64;
            let mut p = (nc + 1.0) / (n + 3.0);
            for (j, &on) in x.iter().enumerate() {
                let ones = members.iter().filter(|m| m[j]).count() as f64;
                let p1 = (ones + 1.0) / (nc + 2.0);
                p *= if on { p1 } else { 1.0 - p1 };
            }
            scores.push(p);
        }
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
        order
    };

    let mut agree = 0;
    for code in 0..16u32 {
        let x: Vec<bool> = (0..4).map(|j| code >> (3 - j) & 1 == 1).collect();
        let dense: Vec<f64> = x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let got = nb_rank(&model, &dense).map_err(|e| e.to_string())?.ranking;
        let want = oracle(&x);
        if got != want {
            return Err(format!("input {code:04b}: ranking {got:?}, oracle {want:?}"));
        }
        agree += 1;
    }
    check(agree == 16, format!("{agree}/16 orderings equal"))
}

// Logistic regression -----------------------------------------------------

fn lr_gradient_and_separable() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let features: Vec<Vec<f64>> = (0..25)
        .map(|_| (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let targets: Vec<bool> = (0..25).map(|_| rng.gen_bool(0.4)).collect();
    let objective = BinaryObjective {
        features: &features,
        targets: &targets,
        l2: 0.7,
    };
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let b = rng.gen_range(-1.0..1.0);
        let (gw, gb) = objective.gradient(&w, b);
        let mut pairs = Vec::new();
        for j in 0..4 {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            pairs.push((gw[j], (objective.value(&up, b) - objective.value(&down, b)) / (2.0 * h)));
        }
        pairs.push((
            gb,
            (objective.value(&w, b + h) - objective.value(&w, b - h)) / (2.0 * h),
        ));
        for (analytic, numeric) in pairs {
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    if worst >= 1e-4 {
        return Err(format!("max relative gradient error {worst:.2e}"));
    }

    let labels = LabelSet::from_names(&TextPipeline::default(), &["Bonds", "Swap"]).map_err(|e| e.to_string())?;
    let mut examples = Vec::new();
    for i in 0..40 {
        let class = i % 2;
        let center = if class == 0 { [2.0, 1.0] } else { [-1.0, -2.0] };
        let x = vec![
            center[0] + rng.gen_range(-0.8..0.8),
            center[1] + rng.gen_range(-0.8..0.8),
        ];
        examples.push((x, class));
    }
    let params = LogRegParams {
        max_iters: 1000,
        ..LogRegParams::default()
    };
    let model = train_logreg(&examples, &labels, params).map_err(|e| e.to_string())?;
    let mut correct = 0;
    for (x, y) in &examples {
        if lr_rank(&model, x).map_err(|e| e.to_string())?.top() == *y {
            correct += 1;
        }
    }
    let acc = correct as f64 / examples.len() as f64;
    check(
        acc == 1.0,
        format!("max relative gradient error {worst:.1e} over 50 coordinates; separable accuracy {acc:.3}"),
    )
}

// Ranking -----------------------------------------------------------------

fn ranking_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 16;
    for trial in 0..100 {
        let labels: Vec<Vec<f64>> = (0..8)
            .map(|_| {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                v.into_iter().map(|x| x / norm).collect()
            })
            .collect();
        let term: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let cos = rank_unsupervised(&term, &labels, Measure::Cosine).map_err(|e| e.to_string())?;
        let l2 = rank_unsupervised(&term, &labels, Measure::L2).map_err(|e| e.to_string())?;
        if cos.ranking != l2.ranking {
            return Err(format!(
                "trial {trial}: cosine {:?} vs L2 {:?}",
                cos.ranking, l2.ranking
            ));
        }
        let scale = rng.gen_range(0.01..100.0);
        let scaled: Vec<f64> = term.iter().map(|x| x * scale).collect();
        let cos_scaled = rank_unsupervised(&scaled, &labels, Measure::Cosine).map_err(|e| e.to_string())?;
        if cos_scaled.ranking != cos.ranking {
            return Err(format!("trial {trial}: scaling by {scale} changed the cosine ranking"));
        }
    }
    Ok("100/100 trials: cosine = L2 ranking, cosine invariant to scaling".into())
}

// Embeddings --------------------------------------------------------------

fn embedding_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let topics: [Vec<String>; 2] = [
        (0..30).map(|i| format!("alpha{i}")).collect(),
        (0..30).map(|i| format!("beta{i}")).collect(),
    ];
    let mut text = String::new();
    for _ in 0..1000 {
        let topic = &topics[rng.gen_range(0..2)];
        let words: Vec<&str> = (0..10).map(|_| topic[rng.gen_range(0..30)].as_str()).collect();
        text.push_str(&format!("Start {}. ", words.join(" ")));
    }
    let pipeline = TextPipeline::new(StopwordSet::default());
    let corpus = Corpus::from_texts(&pipeline, [("topics", text)]);
    let config = TrainConfig {
        dim: 50,
        seed: 9,
        workers: 1,
        ..TrainConfig::default()
    };
    let started = Instant::now();
    let trained = train_word2vec(&corpus, &config).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed().as_secs_f64();

    let rows: [Vec<&[f64]>; 2] = topics.clone().map(|t| {
        t.iter()
            .filter_map(|w| trained.table.lookup(&pipeline.process(w).join(" ")))
            .collect()
    });
    if rows[0].len() != 30 || rows[1].len() != 30 {
        return Err(format!(
            "topic words missing from vocabulary: {} + {}",
            rows[0].len(),
            rows[1].len()
        ));
    }
    let mean_cos = |a: &[&[f64]], b: &[&[f64]], same: bool| -> f64 {
        let mut total = 0.0;
        let mut n = 0;
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                if same && i >= j {
                    continue;
                }
                total += cosine_similarity(x, y).unwrap();
                n += 1;
            }
        }
        total / n as f64
    };
    let intra = (mean_cos(&rows[0], &rows[0], true) + mean_cos(&rows[1], &rows[1], true)) / 2.0;
    let inter = mean_cos(&rows[0], &rows[1], false);
    let loss = &trained.epoch_loss;
    let detail = format!(
        "vocab {}, intra {intra:.3} - inter {inter:.3} = {:.3}; loss epoch 1 {:.4} -> epoch 5 {:.4}; {elapsed:.1}s",
        trained.table.len(),
        intra - inter,
        loss[0],
        loss[4]
    );
    check(
        intra - inter >= 0.1 && loss.len() == 5 && loss[4] < loss[0] && elapsed < 60.0,
        detail,
    )
}

// End to end --------------------------------------------------------------

fn end_to_end_determinism() -> Outcome {
    let f = fixtures();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let fx = |n: &str| f.join(n).to_string_lossy().into_owned();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run).to_string_lossy().into_owned();
        let out = hypernym(&[
            "run-system",
            "--system",
            "system1",
            "--dim",
            "50",
            "--corpus",
            &fx("corpus"),
            "--train",
            &fx("train.tsv"),
            "--test",
            &fx("test.tsv"),
            "--labels",
            &fx("labels.txt"),
            "--deterministic",
            "--seed",
            "7",
            "--out",
            &out_dir,
        ]);
        if !out.status.success() {
            return Err(format!(
                "run {run} exited {:?}: {}",
                out.status.code(),
                String::from_utf8_lossy(&out.stderr)
            ));
        }
        outputs.push(PathBuf::from(out_dir));
    }
    for name in ["report.txt", "predictions.jsonl", "metrics.json"] {
        let a = fs::read(outputs[0].join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(outputs[1].join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    let summary: MetricsSummary =
        serde_json::from_slice(&fs::read(outputs[0].join("metrics.json")).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
    let (Some(s1), Some(s2), Some(all)) = (summary.subset1, summary.subset2, summary.combined) else {
        return Err(format!("missing metrics: {summary:?}"));
    };
    let weighted = |f: fn(&Metrics) -> f64| (s1.n as f64 * f(&s1) + s2.n as f64 * f(&s2)) / (s1.n + s2.n) as f64;
    let mr_gap = (weighted(|m| m.mean_rank) - all.mean_rank).abs();
    let acc_gap = (weighted(|m| m.accuracy) - all.accuracy).abs();
    check(
        (1.0..=8.0).contains(&all.mean_rank) && all.n == s1.n + s2.n && mr_gap <= 1e-12 && acc_gap <= 1e-12,
        format!(
            "reports byte-identical; combined MR {:.4} ACC {:.4} (n={}); weighted-average gaps {mr_gap:.1e}/{acc_gap:.1e}",
            all.mean_rank, all.accuracy, all.n
        ),
    )
}

// Self-training -----------------------------------------------------------

fn augmentation_arithmetic() -> Outcome {
    let pipeline = TextPipeline::default();
    let make = |prefix: &str, n: usize| -> Vec<LabeledTerm> {
        (0..n)
            .map(|i| LabeledTerm {
                term: TermRecord::new(&pipeline, format!("{prefix} term {i}"), None),
                label: i % 8,
            })
            .collect()
    };
    let train = make("training", 100);
    let subset1 = make("rule", 66);
    let merged = augment_training(&train, &subset1);
    let prefix_kept = merged[..100] == train[..] && merged[100..] == subset1[..];
    check(
        merged.len() == 166 && prefix_kept,
        format!("100 + 66 -> {} records", merged.len()),
    )
}

// Metrics -----------------------------------------------------------------

fn metric_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for set in 0..500 {
        let n = rng.gen_range(1..40);
        let perfect = rng.gen_bool(0.3);
        let ranks: Vec<usize> = (0..n)
            .map(|_| {
                if perfect || rng.gen_bool(0.6) {
                    1
                } else {
                    rng.gen_range(1..=8)
                }
            })
            .collect();
        let m = Metrics::from_ranks(&ranks).map_err(|e| e.to_string())?;
        if (m.accuracy == 1.0) != (m.mean_rank == 1.0) {
            return Err(format!(
                "set {set}: accuracy {} with mean rank {}",
                m.accuracy, m.mean_rank
            ));
        }
    }
    let m = Metrics::from_ranks(&[1, 1, 3]).map_err(|e| e.to_string())?;
    check(
        (m.mean_rank - 5.0 / 3.0).abs() <= 1e-9 && format!("{:.4}", m.mean_rank) == "1.6667",
        format!("500 generated sets consistent; MR[1,1,3] = {:.10}", m.mean_rank),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("split-rule oracle", split_rule_oracle),
        ("naive Bayes brute force", nb_brute_force),
        (
            "logistic regression gradient + separable fit",
            lr_gradient_and_separable,
        ),
        ("ranking identities", ranking_identities),
        ("embedding sanity", embedding_sanity),
        ("end-to-end determinism", end_to_end_determinism),
        ("self-training arithmetic", augmentation_arithmetic),
        ("metric identities", metric_identities),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
