//! The scene classifier: a multi-class gradient-boosted tree ensemble.
//!
//! One boosting stream per class. Each round fits a squared-error regression
//! tree per class to the softmax cross-entropy residuals `1[y=k] - p_k` and
//! adds it with a fixed learning rate on top of log-prior base scores.
//! Training monitors a stratified validation split and stops early when
//! validation cross-entropy stalls; the returned model is truncated at the
//! best validation round. Everything is deterministic given the seed, down to
//! the serialized bytes.

pub mod tree;

use std::io::{BufRead, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::encoder::softmax;
use tree::RegressionTree;

/// Training hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    /// Number of scene classes.
    pub k: usize,
    pub max_depth: usize,
    pub n_rounds: usize,
    pub learning_rate: f64,
    /// Fraction held out for validation, in (0, 0.5).
    pub val_fraction: f64,
    /// Rounds without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl TrainParams {
    pub fn new(k: usize, seed: u64) -> Self {
        TrainParams {
            k,
            max_depth: 4,
            n_rounds: 100,
            learning_rate: 0.1,
            val_fraction: 0.2,
            patience: 10,
            seed,
        }
    }
}

/// Frozen boosted ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneClassifier {
    pub k: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    /// Per-class log-prior offsets.
    pub base_scores: Vec<f64>,
    /// `trees[class][round]`; every class stream has the same length.
    pub trees: Vec<Vec<RegressionTree>>,
}

/// Training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Training cross-entropy in nats after each round; index 0 is the
    /// base-score model before any tree.
    pub train_ce_history: Vec<f64>,
    /// Validation cross-entropy per round, same indexing.
    pub val_ce_history: Vec<f64>,
    pub final_train_ce: f64,
    pub final_val_ce: f64,
    pub val_accuracy: f64,
    /// Rows = true class, columns = predicted class, on the validation split.
    pub confusion: Vec<Vec<u64>>,
    /// Rounds kept after early stopping.
    pub rounds_used: usize,
    pub warning: Option<String>,
}

fn cross_entropy(scores: &[Vec<f64>], labels: &[usize], indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let mut sum = 0.0;
    for &i in indices {
        let p = softmax(&scores[i]);
        sum -= p[labels[i] - 1].max(f64::MIN_POSITIVE).ln();
    }
    sum / indices.len() as f64
}

/// Deterministic stratified split; each class keeps at least one training
/// sample, and classes with at least two samples contribute to validation.
fn stratified_split(labels: &[usize], k: usize, val_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 1..=k {
        let members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| i)
            .collect();
        if members.is_empty() {
            continue;
        }
        let mut shuffled = members.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(class as u64 * 0x9e37_79b9));
        // Fisher-Yates
        for i in (1..shuffled.len()).rev() {
            let j = rand::Rng::gen_range(&mut rng, 0..=i);
            shuffled.swap(i, j);
        }
        let mut n_val = ((members.len() as f64) * val_fraction).round() as usize;
        if members.len() >= 2 {
            n_val = n_val.clamp(1, members.len() - 1);
        } else {
            n_val = 0;
        }
        val.extend_from_slice(&shuffled[..n_val]);
        train.extend_from_slice(&shuffled[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

/// Trains the boosted classifier on feature rows and 1-based labels.
pub fn train(
    features: &[Vec<f64>],
    labels: &[usize],
    params: &TrainParams,
) -> Result<(SceneClassifier, TrainReport)> {
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} feature rows vs {} labels",
            features.len(),
            labels.len()
        )));
    }
    if features.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(params.val_fraction > 0.0 && params.val_fraction < 0.5) {
        return Err(Error::InvalidWindowParams(format!(
            "val_fraction must be in (0, 0.5), got {}",
            params.val_fraction
        )));
    }
    let k = params.k;
    if let Some(&bad) = labels.iter().find(|&&l| l < 1 || l > k) {
        return Err(Error::LengthMismatch(format!("label {bad} outside [1, {k}]")));
    }

    let mut present: Vec<usize> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() == 1 {
        return Ok(single_class_model(params, present[0], labels.len()));
    }

    let (train_idx, val_idx) = stratified_split(labels, k, params.val_fraction, params.seed);

    // Log-prior base scores with add-one smoothing so absent classes stay
    // finite.
    let mut counts = vec![0usize; k];
    for &i in &train_idx {
        counts[labels[i] - 1] += 1;
    }
    let n_train = train_idx.len() as f64;
    let base_scores: Vec<f64> = counts
        .iter()
        .map(|&c| ((c as f64 + 1.0) / (n_train + k as f64)).ln())
        .collect();

    let mut scores: Vec<Vec<f64>> = vec![base_scores.clone(); features.len()];
    let mut trees: Vec<Vec<RegressionTree>> = vec![Vec::new(); k];

    let mut train_hist = vec![cross_entropy(&scores, labels, &train_idx)];
    let mut val_hist = vec![cross_entropy(&scores, labels, &val_idx)];
    let mut best_round = 0usize;

    for round in 1..=params.n_rounds {
        // Residuals for every class from this round's shared probabilities.
        let probs: Vec<Vec<f64>> = train_idx.iter().map(|&i| softmax(&scores[i])).collect();
        let mut round_trees = Vec::with_capacity(k);
        for class in 0..k {
            let mut residuals = vec![0.0; features.len()];
            for (pos, &i) in train_idx.iter().enumerate() {
                let target = if labels[i] - 1 == class { 1.0 } else { 0.0 };
                residuals[i] = target - probs[pos][class];
            }
            round_trees.push(RegressionTree::fit(
                features,
                &residuals,
                &train_idx,
                params.max_depth,
            ));
        }
        for (class, tree) in round_trees.iter().enumerate() {
            for row in 0..features.len() {
                scores[row][class] += params.learning_rate * tree.predict(&features[row]);
            }
        }
        for (class, tree) in round_trees.into_iter().enumerate() {
            trees[class].push(tree);
        }

        let train_ce = cross_entropy(&scores, labels, &train_idx);
        assert!(
            train_ce <= train_hist[round - 1] + 1e-9,
            "training cross-entropy regressed at round {round}: {} -> {train_ce}",
            train_hist[round - 1]
        );
        train_hist.push(train_ce);

        let val_ce = cross_entropy(&scores, labels, &val_idx);
        val_hist.push(val_ce);
        if val_ce < val_hist[best_round] {
            best_round = round;
        }
        if round - best_round >= params.patience {
            break;
        }
    }

    // Keep only the rounds up to the best validation point.
    for stream in &mut trees {
        stream.truncate(best_round);
    }
    let model = SceneClassifier {
        k,
        max_depth: params.max_depth,
        learning_rate: params.learning_rate,
        base_scores,
        trees,
    };

    let confusion = confusion_on(&model, features, labels, &val_idx);
    let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
    let val_total: u64 = val_idx.len() as u64;
    let report = TrainReport {
        final_train_ce: train_hist[best_round],
        final_val_ce: val_hist[best_round],
        val_accuracy: if val_total > 0 {
            correct as f64 / val_total as f64
        } else {
            0.0
        },
        confusion,
        rounds_used: best_round,
        train_ce_history: train_hist,
        val_ce_history: val_hist,
        warning: None,
    };
    Ok((model, report))
}

/// Degenerate path: one observed class. The model pins (almost) all softmax
/// mass on it without any trees.
fn single_class_model(params: &TrainParams, class: usize, n: usize) -> (SceneClassifier, TrainReport) {
    let mut base_scores = vec![-30.0; params.k];
    base_scores[class - 1] = 0.0;
    let model = SceneClassifier {
        k: params.k,
        max_depth: params.max_depth,
        learning_rate: params.learning_rate,
        base_scores,
        trees: vec![Vec::new(); params.k],
    };
    let p = softmax(&model.base_scores)[class - 1];
    let ce = -p.ln();
    let mut confusion = vec![vec![0u64; params.k]; params.k];
    confusion[class - 1][class - 1] = n as u64;
    let report = TrainReport {
        train_ce_history: vec![ce],
        val_ce_history: vec![ce],
        final_train_ce: ce,
        final_val_ce: ce,
        val_accuracy: 1.0,
        confusion,
        rounds_used: 0,
        warning: Some(format!(
            "single-class dataset: constant classifier for class {class}"
        )),
    };
    (model, report)
}

impl SceneClassifier {
    /// Per-class probabilities for one feature row.
    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let mut scores = self.base_scores.clone();
        for (class, stream) in self.trees.iter().enumerate() {
            for tree in stream {
                scores[class] += self.learning_rate * tree.predict(row);
            }
        }
        softmax(&scores)
    }

    /// 1-based predicted label; argmax ties go to the lowest class index.
    pub fn predict(&self, row: &[f64]) -> usize {
        let p = self.predict_proba(row);
        let mut best = 0;
        for (i, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = i;
            }
        }
        best + 1
    }

    pub fn rounds(&self) -> usize {
        self.trees.first().map_or(0, Vec::len)
    }
}

/// Counts of (true, predicted) pairs over the given rows.
pub fn confusion_matrix(
    model: &SceneClassifier,
    features: &[Vec<f64>],
    labels: &[usize],
) -> Vec<Vec<u64>> {
    let all: Vec<usize> = (0..features.len()).collect();
    confusion_on(model, features, labels, &all)
}

fn confusion_on(
    model: &SceneClassifier,
    features: &[Vec<f64>],
    labels: &[usize],
    indices: &[usize],
) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; model.k]; model.k];
    for &i in indices {
        let predicted = model.predict(&features[i]);
        m[labels[i] - 1][predicted - 1] += 1;
    }
    m
}

/// Renders the confusion matrix as an aligned plain-text table.
pub fn format_confusion(confusion: &[Vec<u64>]) -> String {
    let k = confusion.len();
    let mut out = String::from("true\\pred");
    for c in 1..=k {
        out.push_str(&format!("{c:>8}"));
    }
    out.push('\n');
    for (r, row) in confusion.iter().enumerate() {
        out.push_str(&format!("{:>9}", r + 1));
        for v in row {
            out.push_str(&format!("{v:>8}"));
        }
        out.push('\n');
    }
    out
}

const CLASSIFIER_HEADER: &str = "trajroute-scene-classifier v1";

impl SceneClassifier {
    /// Versioned line-oriented text artifact: header fields, then preorder
    /// node listings per (class, round) tree.
    pub fn save(&self, w: &mut impl Write) -> Result<()> {
        writeln!(w, "{CLASSIFIER_HEADER}")?;
        writeln!(w, "k={}", self.k)?;
        writeln!(w, "rounds={}", self.rounds())?;
        writeln!(w, "depth={}", self.max_depth)?;
        writeln!(w, "learning_rate={:?}", self.learning_rate)?;
        let base: Vec<String> = self.base_scores.iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "base_scores {}", base.join(" "))?;
        for (class, stream) in self.trees.iter().enumerate() {
            for (round, tree) in stream.iter().enumerate() {
                writeln!(w, "tree class={} round={} nodes={}", class + 1, round, tree.n_nodes())?;
                tree.write_preorder(w)?;
            }
        }
        Ok(())
    }

    pub fn load(r: &mut impl BufRead) -> Result<Self> {
        let bad = |reason: String| Error::Artifact {
            kind: "scene classifier".into(),
            reason,
        };
        let mut lines = Vec::new();
        for line in r.lines() {
            lines.push(line?);
        }
        if lines.first().map(String::as_str) != Some(CLASSIFIER_HEADER) {
            return Err(bad("missing header".into()));
        }
        let mut pos = 1;
        let mut kv = std::collections::BTreeMap::new();
        let mut base_scores = None;
        while pos < lines.len() {
            let line = &lines[pos];
            if line.starts_with("tree ") {
                break;
            }
            if let Some(rest) = line.strip_prefix("base_scores ") {
                base_scores = Some(
                    rest.split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad base score {t:?}"))))
                        .collect::<Result<Vec<f64>>>()?,
                );
            } else if let Some((key, value)) = line.split_once('=') {
                kv.insert(key.to_string(), value.to_string());
            }
            pos += 1;
        }
        let get = |key: &str| -> Result<&String> {
            kv.get(key).ok_or_else(|| bad(format!("missing key {key}")))
        };
        let k: usize = get("k")?.parse().map_err(|_| bad("bad k".into()))?;
        let rounds: usize = get("rounds")?.parse().map_err(|_| bad("bad rounds".into()))?;
        let depth: usize = get("depth")?.parse().map_err(|_| bad("bad depth".into()))?;
        let learning_rate: f64 = get("learning_rate")?
            .parse()
            .map_err(|_| bad("bad learning_rate".into()))?;
        let base_scores = base_scores.ok_or_else(|| bad("missing base_scores".into()))?;
        if base_scores.len() != k {
            return Err(bad("base_scores length != k".into()));
        }

        let mut trees: Vec<Vec<RegressionTree>> = vec![Vec::new(); k];
        while pos < lines.len() {
            let header = &lines[pos];
            if header.trim().is_empty() {
                pos += 1;
                continue;
            }
            let rest = header
                .strip_prefix("tree ")
                .ok_or_else(|| bad(format!("expected tree header, got {header:?}")))?;
            let mut class = None;
            let mut n_nodes = None;
            for field in rest.split_whitespace() {
                if let Some(v) = field.strip_prefix("class=") {
                    class = v.parse::<usize>().ok();
                } else if let Some(v) = field.strip_prefix("nodes=") {
                    n_nodes = v.parse::<usize>().ok();
                }
            }
            let class = class.ok_or_else(|| bad("tree header missing class".into()))?;
            let n_nodes = n_nodes.ok_or_else(|| bad("tree header missing nodes".into()))?;
            if class < 1 || class > k {
                return Err(bad(format!("tree class {class} outside [1, {k}]")));
            }
            let start = pos + 1;
            let end = start + n_nodes;
            if end > lines.len() {
                return Err(bad("truncated tree body".into()));
            }
            let body: Vec<&str> = lines[start..end].iter().map(String::as_str).collect();
            trees[class - 1].push(RegressionTree::parse_preorder(&body)?);
            pos = end;
        }
        for stream in &trees {
            if stream.len() != rounds {
                return Err(bad(format!(
                    "class stream has {} trees, expected {rounds}",
                    stream.len()
                )));
            }
        }
        Ok(SceneClassifier {
            k,
            max_depth: depth,
            learning_rate,
            base_scores,
            trees,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn blob_data(seed: u64, n_per: usize, sep: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for class in 0..2 {
            for _ in 0..n_per {
                let cx = class as f64 * sep;
                features.push(vec![
                    cx + noise.sample(&mut rng),
                    noise.sample(&mut rng),
                    noise.sample(&mut rng),
                ]);
                labels.push(class + 1);
            }
        }
        (features, labels)
    }

    #[test]
    fn single_class_dataset_degenerates_cleanly() {
        let features = vec![vec![0.0, 1.0]; 10];
        let labels = vec![2usize; 10];
        let (model, report) = train(&features, &labels, &TrainParams::new(5, 0)).unwrap();
        assert!(report.warning.is_some());
        assert_eq!(report.val_accuracy, 1.0);
        assert!(report.final_val_ce < 1e-9);
        let p = model.predict_proba(&[3.0, -1.0]);
        assert!(p[1] >= 0.999);
        assert_eq!(model.predict(&[3.0, -1.0]), 2);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn round_zero_ce_is_ln_k_under_uniform_priors() {
        // 4 balanced classes; stratified split keeps them balanced, so the
        // smoothed priors are exactly uniform.
        let mut features = Vec::new();
        let mut labels = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for class in 1..=4usize {
            for _ in 0..25 {
                features.push(vec![rng.gen::<f64>(), rng.gen::<f64>()]);
                labels.push(class);
            }
        }
        let (_, report) = train(&features, &labels, &TrainParams::new(4, 7)).unwrap();
        assert!(
            (report.train_ce_history[0] - (4.0f64).ln()).abs() < 1e-9,
            "round-0 CE {} != ln 4",
            report.train_ce_history[0]
        );
    }

    #[test]
    fn separated_blobs_reach_high_accuracy() {
        // Two Gaussian blobs 10 sigma apart, 200 samples.
        let (features, labels) = blob_data(42, 100, 10.0);
        let (model, report) = train(&features, &labels, &TrainParams::new(2, 42)).unwrap();
        assert!(
            report.val_accuracy >= 0.95,
            "val accuracy {}",
            report.val_accuracy
        );

        // Oracle: 1-nearest-centroid on the same data reaches >= 0.99.
        let centroid = |class: usize| -> Vec<f64> {
            let rows: Vec<&Vec<f64>> = features
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == class)
                .map(|(f, _)| f)
                .collect();
            (0..3)
                .map(|d| rows.iter().map(|r| r[d]).sum::<f64>() / rows.len() as f64)
                .collect()
        };
        let (c1, c2) = (centroid(1), centroid(2));
        let dist = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        };
        let oracle_correct = features
            .iter()
            .zip(&labels)
            .filter(|(f, &l)| {
                let pred = if dist(f, &c1) <= dist(f, &c2) { 1 } else { 2 };
                pred == l
            })
            .count();
        assert!(oracle_correct as f64 / labels.len() as f64 >= 0.99);

        // The boosted model agrees with the oracle structure.
        let model_correct = features
            .iter()
            .zip(&labels)
            .filter(|(f, &l)| model.predict(f) == l)
            .count();
        assert!(model_correct as f64 / labels.len() as f64 >= 0.95);
    }

    #[test]
    fn train_ce_history_non_increasing() {
        let (features, labels) = blob_data(11, 60, 3.0);
        let (_, report) = train(&features, &labels, &TrainParams::new(2, 5)).unwrap();
        for pair in report.train_ce_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-9, "{pair:?}");
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (features, labels) = blob_data(8, 40, 4.0);
        let (model, _) = train(&features, &labels, &TrainParams::new(2, 2)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..50 {
            let row = vec![
                rng.gen::<f64>() * 20.0 - 5.0,
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
            ];
            let p = model.predict_proba(&row);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(p.iter().all(|v| *v > 0.0 && *v < 1.0));
        }
    }

    /// Naive recursive tree walker, independent of `RegressionTree::predict`.
    fn walk(nodes: &[tree::Node], at: usize, row: &[f64]) -> f64 {
        match &nodes[at] {
            tree::Node::Leaf { value } => *value,
            tree::Node::Split { feature, threshold, left, right } => {
                if row[*feature] <= *threshold {
                    walk(nodes, *left, row)
                } else {
                    walk(nodes, *right, row)
                }
            }
        }
    }

    #[test]
    fn predict_matches_tree_walk_oracle() {
        let (features, labels) = blob_data(13, 50, 5.0);
        let (model, _) = train(&features, &labels, &TrainParams::new(2, 9)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        for _ in 0..20 {
            let row = vec![
                rng.gen::<f64>() * 10.0 - 2.0,
                rng.gen::<f64>() * 2.0 - 1.0,
                rng.gen::<f64>() * 2.0 - 1.0,
            ];
            let mut scores = model.base_scores.clone();
            for (class, stream) in model.trees.iter().enumerate() {
                for t in stream {
                    scores[class] += model.learning_rate * walk(t.nodes(), 0, &row);
                }
            }
            let oracle_probs = softmax(&scores);
            let oracle_argmax = oracle_probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .unwrap()
                .0
                + 1;
            assert_eq!(model.predict(&row), oracle_argmax);
        }
    }

    #[test]
    fn uniform_probabilities_tie_break_to_class_one() {
        let model = SceneClassifier {
            k: 4,
            max_depth: 4,
            learning_rate: 0.1,
            base_scores: vec![0.0; 4],
            trees: vec![Vec::new(); 4],
        };
        assert_eq!(model.predict(&[1.0, 2.0]), 1);
    }

    #[test]
    fn confusion_matrix_cases() {
        // Constant class-1 predictor: all mass in column 1.
        let model = SceneClassifier {
            k: 3,
            max_depth: 4,
            learning_rate: 0.1,
            base_scores: vec![0.0, -30.0, -30.0],
            trees: vec![Vec::new(); 3],
        };
        let features = vec![vec![0.0]; 6];
        let labels = vec![1, 2, 3, 1, 2, 3];
        let m = confusion_matrix(&model, &features, &labels);
        for (r, row) in m.iter().enumerate() {
            assert_eq!(row[0], 2, "row {r}");
            assert_eq!(row[1] + row[2], 0);
        }

        // Random labels/predictions vs a naive counting oracle.
        let (features, labels) = blob_data(77, 15, 2.0);
        let (model, _) = train(&features, &labels, &TrainParams::new(2, 1)).unwrap();
        let m = confusion_matrix(&model, &features, &labels);
        let mut oracle = vec![vec![0u64; 2]; 2];
        for (f, &l) in features.iter().zip(&labels) {
            oracle[l - 1][model.predict(f) - 1] += 1;
        }
        assert_eq!(m, oracle);
        let row_sums: Vec<u64> = m.iter().map(|r| r.iter().sum()).collect();
        assert_eq!(row_sums, vec![15, 15]);
    }

    #[test]
    fn deterministic_serialization() {
        let (features, labels) = blob_data(21, 40, 6.0);
        let params = TrainParams::new(2, 33);
        let (a, _) = train(&features, &labels, &params).unwrap();
        let (b, _) = train(&features, &labels, &params).unwrap();
        let mut buf_a = Vec::new();
        let mut buf_b = Vec::new();
        a.save(&mut buf_a).unwrap();
        b.save(&mut buf_b).unwrap();
        assert_eq!(buf_a, buf_b);
    }

    #[test]
    fn serialization_round_trips() {
        let (features, labels) = blob_data(31, 30, 4.0);
        let (model, _) = train(&features, &labels, &TrainParams::new(2, 14)).unwrap();
        let mut buf = Vec::new();
        model.save(&mut buf).unwrap();
        let loaded = SceneClassifier::load(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded, model);
        for f in features.iter().take(10) {
            assert_eq!(loaded.predict_proba(f), model.predict_proba(f));
        }
    }

    #[test]
    fn monotone_feature_transforms_leave_predictions_unchanged() {
        let (features, labels) = blob_data(55, 50, 5.0);
        let params = TrainParams::new(2, 19);
        let (model, _) = train(&features, &labels, &params).unwrap();

        // Strictly increasing map per column: cube on 0, exp on 1, affine on 2.
        let transform = |row: &[f64]| -> Vec<f64> {
            vec![row[0].powi(3), row[1].exp(), 2.5 * row[2] + 7.0]
        };
        let transformed: Vec<Vec<f64>> = features.iter().map(|r| transform(r)).collect();
        let (model_t, _) = train(&transformed, &labels, &params).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(70);
        for _ in 0..100 {
            let row = vec![
                rng.gen::<f64>() * 12.0 - 3.0,
                rng.gen::<f64>() * 4.0 - 2.0,
                rng.gen::<f64>() * 4.0 - 2.0,
            ];
            assert_eq!(model.predict(&row), model_t.predict(&transform(&row)));
        }
    }
}
