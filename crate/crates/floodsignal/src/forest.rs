//! Univariate feature selection (ANOVA F-test) and a from-scratch random
//! forest: bootstrap sampling plus depth-limited Gini trees with soft
//! voting. The alert score of a row is the mean positive fraction of the
//! leaves it reaches, thresholded at `params.threshold`.
//!
//! Training is deterministic and thread-count independent: each tree draws
//! its bootstrap and split candidates from its own ChaCha stream seeded by
//! splitmix64(master seed, tree index).

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{feature_order_digest, FeatureRow, FEATURE_COUNT};
use crate::seed;

/// Forest hyperparameters. Defaults follow the best configuration of the
/// reference study: 1,000 trees of depth 2 over 40 selected features,
/// alert threshold 0.2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub k_features: usize,
    /// Candidate features per split; None means floor(sqrt(k_features)).
    pub mtry: Option<usize>,
    pub threshold: f64,
    pub seed: u64,
    /// Draw bootstrap samples evenly from both classes.
    pub balanced_bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 1000,
            max_depth: 2,
            k_features: 40,
            mtry: None,
            threshold: 0.2,
            seed: 42,
            balanced_bootstrap: false,
        }
    }
}

impl ForestParams {
    pub fn effective_mtry(&self) -> usize {
        self.mtry.unwrap_or_else(|| (self.k_features as f64).sqrt().floor() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, reason: String| Err(Error::Config { field: field.into(), reason });
        if self.n_trees == 0 {
            return fail("n_trees", "must be at least 1".into());
        }
        if self.max_depth == 0 {
            return fail("max_depth", "must be at least 1".into());
        }
        if self.k_features == 0 || self.k_features > FEATURE_COUNT {
            return fail("k_features", format!("must lie in 1..={FEATURE_COUNT}"));
        }
        if self.effective_mtry() > self.k_features {
            return fail("mtry", "must not exceed k_features".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) || self.threshold == 0.0 || self.threshold == 1.0
        {
            return fail("threshold", "must lie strictly between 0 and 1".into());
        }
        Ok(())
    }
}

/// ANOVA F statistic of one feature column against binary labels.
///
/// F = [sum_g n_g (mean_g - mean)^2 / (G-1)] / [sum_g sum_i (x - mean_g)^2 / (N-G)]
/// with G = 2. Zero within-variance with nonzero between-variance returns
/// +inf (ranks first); zero between-variance returns 0.
pub fn anova_f_score(column: &[f64], labels: &[bool]) -> Result<f64> {
    assert_eq!(column.len(), labels.len());
    let n = column.len();
    if n < 3 {
        return Err(Error::NotEnoughRows(format!("ANOVA needs N >= 3, got {n}")));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = n - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut sum = [0.0f64; 2];
    for (&x, &l) in column.iter().zip(labels) {
        sum[l as usize] += x;
    }
    let mean_neg = sum[0] / n_neg as f64;
    let mean_pos = sum[1] / n_pos as f64;
    let grand = (sum[0] + sum[1]) / n as f64;

    let between = n_neg as f64 * (mean_neg - grand).powi(2) + n_pos as f64 * (mean_pos - grand).powi(2);
    let mut within = 0.0;
    for (&x, &l) in column.iter().zip(labels) {
        let mean = if l { mean_pos } else { mean_neg };
        within += (x - mean).powi(2);
    }

    if between == 0.0 {
        return Ok(0.0);
    }
    if within == 0.0 {
        return Ok(f64::INFINITY);
    }
    // G - 1 = 1 in the numerator.
    Ok(between / (within / (n - 2) as f64))
}

/// Indices of the k features with the largest F scores, ties broken by
/// lower index; returned in ascending order. The +inf sentinel sorts as a
/// maximal finite key so the ordering stays total.
pub fn select_features(x: &[Vec<f64>], y: &[bool], k: usize) -> Result<Vec<usize>> {
    let n_features = x.first().map(|r| r.len()).unwrap_or(0);
    if k > n_features {
        return Err(Error::Config {
            field: "k_features".into(),
            reason: format!("k = {k} exceeds feature count {n_features}"),
        });
    }
    let mut scored: Vec<(usize, f64)> = Vec::with_capacity(n_features);
    let mut column = vec![0.0; x.len()];
    for f in 0..n_features {
        for (i, row) in x.iter().enumerate() {
            column[i] = row[f];
        }
        let score = anova_f_score(&column, y)?;
        let key = if score.is_infinite() { f64::MAX } else { score };
        scored.push((f, key));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut selected: Vec<usize> = scored.into_iter().take(k).map(|(f, _)| f).collect();
    selected.sort_unstable();
    Ok(selected)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split { feature: usize, threshold: f64, left: usize, right: usize },
    Leaf { positive_fraction: f64 },
}

/// One depth-limited decision tree. Rows with value <= threshold go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { positive_fraction } => return *positive_fraction,
                Node::Split { feature, threshold, left, right } => {
                    node = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth_of(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => {
                    1 + depth_of(nodes, *left).max(depth_of(nodes, *right))
                }
            }
        }
        depth_of(&self.nodes, 0)
    }
}

fn gini(pos: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = pos as f64 / total as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

/// Best (threshold, weighted child impurity) for one feature over the
/// given rows, scanning midpoints between consecutive distinct values.
fn best_threshold_for_feature(
    x: &[Vec<f64>],
    y: &[bool],
    rows: &[usize],
    feature: usize,
) -> Option<(f64, f64)> {
    let mut pairs: Vec<(f64, bool)> = rows.iter().map(|&i| (x[i][feature], y[i])).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pairs.len();
    let total_pos = pairs.iter().filter(|&&(_, l)| l).count();

    let mut best: Option<(f64, f64)> = None;
    let mut left_pos = 0usize;
    for i in 0..n - 1 {
        if pairs[i].1 {
            left_pos += 1;
        }
        if pairs[i].0 == pairs[i + 1].0 {
            continue;
        }
        let threshold = (pairs[i].0 + pairs[i + 1].0) / 2.0;
        let left_n = i + 1;
        let right_n = n - left_n;
        let right_pos = total_pos - left_pos;
        let weighted = (left_n as f64 * gini(left_pos, left_n)
            + right_n as f64 * gini(right_pos, right_n))
            / n as f64;
        if best.map(|(_, b)| weighted < b).unwrap_or(true) {
            best = Some((threshold, weighted));
        }
    }
    best
}

fn build_node(
    nodes: &mut Vec<Node>,
    x: &[Vec<f64>],
    y: &[bool],
    rows: Vec<usize>,
    depth: usize,
    max_depth: usize,
    mtry: usize,
    rng: &mut ChaCha12Rng,
) -> usize {
    let n = rows.len();
    let pos = rows.iter().filter(|&&i| y[i]).count();
    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf { positive_fraction: pos as f64 / n as f64 });
        nodes.len() - 1
    };
    if pos == 0 || pos == n || depth == max_depth {
        return make_leaf(nodes);
    }

    let n_features = x[0].len();
    let mut candidates: Vec<usize> = (0..n_features).collect();
    candidates.shuffle(rng);
    candidates.truncate(mtry);
    candidates.sort_unstable();

    // Best split over the sampled features; ties go to the lower feature
    // index, then the lower threshold, so training order never matters.
    let mut best: Option<(usize, f64, f64)> = None;
    for &feature in &candidates {
        if let Some((threshold, weighted)) = best_threshold_for_feature(x, y, &rows, feature) {
            let better = match best {
                None => true,
                Some((_, _, b)) => weighted < b,
            };
            if better {
                best = Some((feature, threshold, weighted));
            }
        }
    }

    let parent_impurity = gini(pos, n);
    let Some((feature, threshold, weighted)) = best else {
        return make_leaf(nodes);
    };
    if weighted >= parent_impurity - 1e-12 {
        return make_leaf(nodes);
    }

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.into_iter().partition(|&i| x[i][feature] <= threshold);

    let slot = nodes.len();
    nodes.push(Node::Leaf { positive_fraction: 0.0 }); // placeholder
    let left = build_node(nodes, x, y, left_rows, depth + 1, max_depth, mtry, rng);
    let right = build_node(nodes, x, y, right_rows, depth + 1, max_depth, mtry, rng);
    nodes[slot] = Node::Split { feature, threshold, left, right };
    slot
}

/// Train a single tree on the given bootstrap rows.
pub fn train_tree(
    x: &[Vec<f64>],
    y: &[bool],
    bootstrap_rows: Vec<usize>,
    max_depth: usize,
    mtry: usize,
    rng: &mut ChaCha12Rng,
) -> Tree {
    assert!(!bootstrap_rows.is_empty());
    let mut nodes = Vec::new();
    build_node(&mut nodes, x, y, bootstrap_rows, 0, max_depth, mtry, rng);
    Tree { nodes }
}

const MODEL_FORMAT: &str = "floodsignal-forest/1";

/// A trained ensemble plus the selected-feature index list and the
/// canonical-ordering digest it was trained against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Ascending indices into the canonical 73-feature vector.
    pub selected_features: Vec<usize>,
    pub params: ForestParams,
    pub feature_order_digest: String,
}

impl Forest {
    /// Select k features by F score and train n_trees bootstrap trees.
    /// Rows are full canonical 73-vectors.
    pub fn fit(x: &[Vec<f64>], y: &[bool], params: &ForestParams) -> Result<Forest> {
        params.validate()?;
        let selected = select_features(x, y, params.k_features)?;
        let projected: Vec<Vec<f64>> =
            x.iter().map(|row| selected.iter().map(|&f| row[f]).collect()).collect();
        let trees = train_trees(&projected, y, params)?;
        Ok(Forest {
            trees,
            selected_features: selected,
            params: params.clone(),
            feature_order_digest: feature_order_digest(),
        })
    }

    /// Mean leaf positive fraction over all trees, for a canonical
    /// 73-vector.
    pub fn score_values(&self, values: &[f64]) -> f64 {
        let projected: Vec<f64> = self.selected_features.iter().map(|&f| values[f]).collect();
        let sum: f64 = self.trees.iter().map(|t| t.predict(&projected)).sum();
        sum / self.trees.len() as f64
    }

    /// Score a feature row, guarding against train/serve ordering skew.
    pub fn predict_proba(&self, row: &FeatureRow) -> Result<f64> {
        let runtime = feature_order_digest();
        if self.feature_order_digest != runtime {
            return Err(Error::DigestMismatch {
                model: self.feature_order_digest.clone(),
                runtime,
            });
        }
        if row.values.len() != FEATURE_COUNT {
            return Err(Error::Other(format!(
                "feature row has {} values, expected {FEATURE_COUNT}",
                row.values.len()
            )));
        }
        Ok(self.score_values(&row.values))
    }

    pub fn classify(&self, prob: f64) -> bool {
        classify(prob, self.params.threshold)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write(std::io::BufWriter::new(file))
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        let doc = ModelFile { format: MODEL_FORMAT.to_string(), forest: self.clone() };
        let text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Other(format!("model serialization: {e}")))?;
        writer
            .write_all(text.as_bytes())
            .and_then(|_| writer.write_all(b"\n"))
            .map_err(|e| Error::io("<model>", e))
    }

    pub fn load(path: &Path) -> Result<Forest> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }

    pub fn read<R: Read>(reader: R) -> Result<Forest> {
        let doc: ModelFile = serde_json::from_reader(reader)
            .map_err(|e| Error::Other(format!("model parse: {e}")))?;
        if doc.format != MODEL_FORMAT {
            return Err(Error::ModelFormat(doc.format));
        }
        let runtime = feature_order_digest();
        if doc.forest.feature_order_digest != runtime {
            return Err(Error::DigestMismatch {
                model: doc.forest.feature_order_digest,
                runtime,
            });
        }
        Ok(doc.forest)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    #[serde(flatten)]
    forest: Forest,
}

/// Alert decision: score at or above the threshold raises an alert.
pub fn classify(prob: f64, threshold: f64) -> bool {
    prob >= threshold
}

/// Train the trees of a forest over already-projected rows (k columns).
pub fn train_trees(x: &[Vec<f64>], y: &[bool], params: &ForestParams) -> Result<Vec<Tree>> {
    let n = x.len();
    if n == 0 {
        return Err(Error::NotEnoughRows("empty training set".into()));
    }
    let n_pos = y.iter().filter(|&&l| l).count();
    if n_pos == 0 || n_pos == n {
        return Err(Error::SingleClass);
    }
    let pos_rows: Vec<usize> = (0..n).filter(|&i| y[i]).collect();
    let neg_rows: Vec<usize> = (0..n).filter(|&i| !y[i]).collect();
    let mtry = params.effective_mtry().min(x[0].len());

    let trees: Vec<Tree> = (0..params.n_trees)
        .into_par_iter()
        .map(|tree_idx| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(params.seed, tree_idx as u64));
            let bootstrap: Vec<usize> = if params.balanced_bootstrap {
                (0..n)
                    .map(|i| {
                        let pool = if i % 2 == 0 { &pos_rows } else { &neg_rows };
                        pool[rng.gen_range(0..pool.len())]
                    })
                    .collect()
            } else {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            };
            train_tree(x, y, bootstrap, params.max_depth, mtry, &mut rng)
        })
        .collect();
    Ok(trees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn anova_hand_computed_value() {
        let column = [1.0, 2.0, 3.0, 7.0, 8.0, 9.0];
        let labels = [false, false, false, true, true, true];
        let f = anova_f_score(&column, &labels).unwrap();
        assert_abs_diff_eq!(f, 54.0, epsilon = 1e-9);
    }

    #[test]
    fn anova_constant_column_is_zero() {
        let column = [5.0; 6];
        let labels = [false, false, false, true, true, true];
        assert_eq!(anova_f_score(&column, &labels).unwrap(), 0.0);
    }

    #[test]
    fn anova_perfect_separation_is_infinite() {
        let labels = [false, true, false, true];
        let column: Vec<f64> = labels.iter().map(|&l| l as u8 as f64).collect();
        assert!(anova_f_score(&column, &labels).unwrap().is_infinite());
    }

    #[test]
    fn anova_rejects_single_class() {
        assert!(anova_f_score(&[1.0, 2.0, 3.0], &[true, true, true]).is_err());
    }

    #[test]
    fn anova_scale_invariant() {
        let column = [1.0, 2.5, 3.0, 7.0, 8.25, 9.0];
        let labels = [false, false, false, true, true, true];
        let f = anova_f_score(&column, &labels).unwrap();
        let scaled: Vec<f64> = column.iter().map(|x| x * 137.5).collect();
        let f_scaled = anova_f_score(&scaled, &labels).unwrap();
        assert_abs_diff_eq!(f, f_scaled, epsilon = 1e-9 * f.abs());
    }

    fn toy_matrix() -> (Vec<Vec<f64>>, Vec<bool>) {
        // Feature 0: separates perfectly. Feature 1: noise. Feature 2: weak.
        let y = vec![false, false, false, true, true, true];
        let x = vec![
            vec![0.0, 3.0, 1.0],
            vec![0.1, 1.0, 2.0],
            vec![0.2, 2.0, 1.5],
            vec![1.0, 2.5, 2.1],
            vec![1.1, 1.5, 2.2],
            vec![1.2, 3.5, 1.9],
        ];
        (x, y)
    }

    #[test]
    fn select_all_features_is_identity() {
        let (x, y) = toy_matrix();
        assert_eq!(select_features(&x, &y, 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn select_prefers_perfect_separator() {
        let (x, y) = toy_matrix();
        assert_eq!(select_features(&x, &y, 1).unwrap(), vec![0]);
    }

    #[test]
    fn select_ties_break_to_lower_index() {
        // Two identical columns: the lower index must win the last slot.
        let y = vec![false, false, true, true];
        let x = vec![
            vec![1.0, 1.0],
            vec![2.0, 2.0],
            vec![7.0, 7.0],
            vec![8.0, 8.0],
        ];
        assert_eq!(select_features(&x, &y, 1).unwrap(), vec![0]);
    }

    #[test]
    fn select_is_row_order_free() {
        let (x, y) = toy_matrix();
        let k = 2;
        let baseline = select_features(&x, &y, k).unwrap();
        let perm = [3, 0, 5, 2, 4, 1];
        let xp: Vec<Vec<f64>> = perm.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<bool> = perm.iter().map(|&i| y[i]).collect();
        assert_eq!(select_features(&xp, &yp, k).unwrap(), baseline);
    }

    fn rng_for_test() -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(7)
    }

    #[test]
    fn tree_pure_sample_is_single_leaf() {
        let x = vec![vec![1.0], vec![2.0]];
        let y = vec![true, true];
        let tree = train_tree(&x, &y, vec![0, 1], 2, 1, &mut rng_for_test());
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[5.0]), 1.0);
    }

    #[test]
    fn tree_midpoint_split() {
        let x = vec![vec![1.0], vec![2.0], vec![8.0], vec![9.0]];
        let y = vec![false, false, true, true];
        let tree = train_tree(&x, &y, vec![0, 1, 2, 3], 2, 1, &mut rng_for_test());
        let Node::Split { threshold, .. } = tree.nodes[0] else {
            panic!("expected a root split");
        };
        assert_eq!(threshold, 5.0);
        assert_eq!(tree.predict(&[1.5]), 0.0);
        assert_eq!(tree.predict(&[8.5]), 1.0);
    }

    #[test]
    fn tree_stops_without_impurity_reduction() {
        // Identical feature values: no split possible.
        let x = vec![vec![3.0], vec![3.0], vec![3.0], vec![3.0]];
        let y = vec![false, true, false, true];
        let tree = train_tree(&x, &y, vec![0, 1, 2, 3], 2, 1, &mut rng_for_test());
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.predict(&[3.0]), 0.5);
    }

    #[test]
    fn tree_respects_max_depth() {
        let x: Vec<Vec<f64>> = (0..32).map(|i| vec![i as f64]).collect();
        let y: Vec<bool> = (0..32).map(|i| i % 2 == 0).collect();
        let tree = train_tree(&x, &y, (0..32).collect(), 2, 1, &mut rng_for_test());
        assert!(tree.depth() <= 2);
    }

    fn separable_data(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let label = i % 2 == 0;
            let base = if label { 2.0 } else { -2.0 };
            x.push(vec![base + rng.gen_range(-0.5..0.5), rng.gen_range(-1.0..1.0)]);
            y.push(label);
        }
        (x, y)
    }

    #[test]
    fn forest_determinism_same_seed() {
        let (x, y) = separable_data(40);
        let params = ForestParams { n_trees: 25, k_features: 2, mtry: Some(2), ..Default::default() };
        let a = Forest::fit(&pad(&x), &y, &params).unwrap();
        let b = Forest::fit(&pad(&x), &y, &params).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn forest_single_tree_equals_bootstrap_tree() {
        let (x, y) = separable_data(20);
        let params = ForestParams { n_trees: 1, k_features: 2, mtry: Some(2), ..Default::default() };
        let forest = Forest::fit(&pad(&x), &y, &params).unwrap();
        assert_eq!(forest.trees.len(), 1);
        let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(params.seed, 0));
        let bootstrap: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
        let projected: Vec<Vec<f64>> = x.to_vec();
        let tree = train_tree(&projected, &y, bootstrap, params.max_depth, 2, &mut rng);
        assert_eq!(forest.trees[0], tree);
    }

    #[test]
    fn forest_rejects_single_class() {
        let x = vec![vec![0.0; FEATURE_COUNT]; 5];
        let y = vec![true; 5];
        assert!(Forest::fit(&x, &y, &ForestParams { k_features: 3, ..Default::default() }).is_err());
    }

    #[test]
    fn predictions_stay_in_unit_interval() {
        let (x, y) = separable_data(60);
        let params = ForestParams { n_trees: 50, k_features: 2, mtry: Some(2), ..Default::default() };
        let forest = Forest::fit(&pad(&x), &y, &params).unwrap();
        for row in pad(&x) {
            let p = forest.score_values(&row);
            assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn classify_threshold_convention() {
        assert!(classify(0.25, 0.2));
        assert!(classify(0.2, 0.2));
        assert!(!classify(0.19, 0.2));
    }

    #[test]
    fn model_roundtrip_and_format_guard() {
        let (x, y) = separable_data(20);
        let params = ForestParams { n_trees: 5, k_features: 2, mtry: Some(2), ..Default::default() };
        let forest = Forest::fit(&pad(&x), &y, &params).unwrap();
        let mut buf = Vec::new();
        forest.write(&mut buf).unwrap();
        let restored = Forest::read(buf.as_slice()).unwrap();
        assert_eq!(forest, restored);

        let tampered = String::from_utf8(buf).unwrap().replace(MODEL_FORMAT, "other-format/9");
        assert!(Forest::read(tampered.as_bytes()).is_err());
    }

    /// Pad 2-wide test rows out to the canonical width.
    fn pad(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|row| {
                let mut full = row.clone();
                full.resize(FEATURE_COUNT, 0.0);
                full
            })
            .collect()
    }
}
