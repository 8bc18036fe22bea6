//! CART decision tree over continuous features with Gini impurity.
//!
//! Splits are searched exhaustively at the midpoints between consecutive
//! distinct sorted values of every feature; ties break toward the lower
//! feature index and then the lower threshold, so fitting is fully
//! deterministic.

use crate::ingest::Label;

use super::EvalError;

#[derive(Debug, Clone, Copy)]
pub struct TreeParams {
    /// Maximum number of edges from root to leaf; `None` is unlimited.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// Reserved; the exhaustive split search has nothing random in it.
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self { max_depth: None, min_samples_split: 2, seed: 0 }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Internal { feature: usize, threshold: f64, left: Box<Node>, right: Box<Node> },
    Leaf { cases: usize, controls: usize },
}

#[derive(Debug, Clone)]
pub struct DecisionTree {
    root: Node,
    n_features: usize,
}

/// Binary Gini impurity `1 - p_case² - p_control²`.
pub fn gini(cases: usize, controls: usize) -> Result<f64, EvalError> {
    let total = cases + controls;
    if total == 0 {
        return Err(EvalError::EmptyNode);
    }
    let p_case = cases as f64 / total as f64;
    let p_control = controls as f64 / total as f64;
    Ok(1.0 - p_case * p_case - p_control * p_control)
}

struct Split {
    feature: usize,
    threshold: f64,
    weighted_gini: f64,
}

/// Best split over all features and midpoints, or `None` when every split
/// leaves a child empty (all feature values identical).
#[allow(clippy::needless_range_loop)]
fn best_split(x: &[Vec<f64>], y: &[Label], rows: &[usize]) -> Option<Split> {
    let n = rows.len();
    let n_features = x[rows[0]].len();
    let mut best: Option<Split> = None;

    for feature in 0..n_features {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));

        // Sweep the sorted rows, keeping left-side class counts.
        let total_cases = rows.iter().filter(|&&r| y[r] == Label::Case).count();
        let mut left_cases = 0usize;
        let mut left_total = 0usize;
        for w in 0..n - 1 {
            let row = order[w];
            if y[row] == Label::Case {
                left_cases += 1;
            }
            left_total += 1;
            let here = x[row][feature];
            let next = x[order[w + 1]][feature];
            if here == next {
                continue;
            }
            let threshold = here + (next - here) / 2.0;
            let right_total = n - left_total;
            let right_cases = total_cases - left_cases;
            let g_left = gini(left_cases, left_total - left_cases).expect("left side non-empty");
            let g_right =
                gini(right_cases, right_total - right_cases).expect("right side non-empty");
            let weighted =
                (left_total as f64 * g_left + right_total as f64 * g_right) / n as f64;
            // Strict improvement keeps the first (lowest feature, lowest
            // threshold) candidate on ties.
            if best.as_ref().is_none_or(|b| weighted < b.weighted_gini) {
                best = Some(Split { feature, threshold, weighted_gini: weighted });
            }
        }
    }
    best
}

fn grow(x: &[Vec<f64>], y: &[Label], rows: &[usize], depth: usize, params: &TreeParams) -> Node {
    let cases = rows.iter().filter(|&&r| y[r] == Label::Case).count();
    let controls = rows.len() - cases;
    let leaf = Node::Leaf { cases, controls };
    if cases == 0 || controls == 0 {
        return leaf;
    }
    if rows.len() < params.min_samples_split {
        return leaf;
    }
    if let Some(limit) = params.max_depth {
        if depth >= limit {
            return leaf;
        }
    }
    let parent_gini = gini(cases, controls).expect("rows non-empty");
    let Some(split) = best_split(x, y, rows) else { return leaf };
    if split.weighted_gini >= parent_gini {
        return leaf;
    }
    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| x[r][split.feature] <= split.threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());
    Node::Internal {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(x, y, &left_rows, depth + 1, params)),
        right: Box::new(grow(x, y, &right_rows, depth + 1, params)),
    }
}

/// Fit a tree on feature rows `x` and labels `y`.
pub fn fit_tree(x: &[Vec<f64>], y: &[Label], params: &TreeParams) -> Result<DecisionTree, EvalError> {
    if x.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(EvalError::LengthMismatch { left: y.len(), right: x.len() });
    }
    let n_features = x[0].len();
    for row in x {
        if row.len() != n_features {
            return Err(EvalError::DimensionMismatch { expected: n_features, found: row.len() });
        }
    }
    let rows: Vec<usize> = (0..x.len()).collect();
    Ok(DecisionTree { root: grow(x, y, &rows, 0, params), n_features })
}

impl DecisionTree {
    /// Probability of the case class at the routed leaf.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, EvalError> {
        if x.len() != self.n_features {
            return Err(EvalError::DimensionMismatch { expected: self.n_features, found: x.len() });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { cases, controls } => {
                    return Ok(*cases as f64 / (*cases + *controls) as f64);
                }
                Node::Internal { feature, threshold, left, right } => {
                    node = if x[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn depth_of(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Internal { left, right, .. } => 1 + depth_of(left).max(depth_of(right)),
            }
        }
        depth_of(&self.root)
    }

    /// Root split as `(feature, threshold)`, if the root is internal.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match &self.root {
            Node::Internal { feature, threshold, .. } => Some((*feature, *threshold)),
            Node::Leaf { .. } => None,
        }
    }
}
