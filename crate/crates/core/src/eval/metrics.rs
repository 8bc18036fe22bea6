//! Binary classification metrics with the case class as positive.

use crate::ingest::Label;

use super::EvalError;

/// Scores above this are predicted case; ties go to control.
const THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Support-weighted mean of the per-class F1 values.
    pub waf: f64,
    /// Pair-rank statistic: fraction of (case, control) pairs where the
    /// case outscores the control, ties counting one half.
    pub auc: f64,
    /// Set when a zero denominator forced precision, recall, or an F1 to 0.
    pub degenerate: bool,
}

/// Compute all metrics from true labels and case scores.
pub fn compute_metrics(y_true: &[Label], scores: &[f64]) -> Result<Metrics, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if y_true.len() != scores.len() {
        return Err(EvalError::LengthMismatch { left: y_true.len(), right: scores.len() });
    }
    let n_case = y_true.iter().filter(|&&l| l == Label::Case).count();
    let n_control = y_true.len() - n_case;
    if n_case == 0 {
        return Err(EvalError::SingleClass("control"));
    }
    if n_control == 0 {
        return Err(EvalError::SingleClass("case"));
    }

    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut tn = 0usize;
    let mut fn_ = 0usize;
    for (&label, &score) in y_true.iter().zip(scores) {
        let predicted_case = score > THRESHOLD;
        match (label, predicted_case) {
            (Label::Case, true) => tp += 1,
            (Label::Case, false) => fn_ += 1,
            (Label::Control, true) => fp += 1,
            (Label::Control, false) => tn += 1,
        }
    }

    let mut degenerate = false;
    let mut ratio = |num: usize, den: usize| -> f64 {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = (tp + tn) as f64 / y_true.len() as f64;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let precision_control = ratio(tn, tn + fn_);
    let recall_control = ratio(tn, tn + fp);
    let f1_of = |p: f64, r: f64, degenerate: &mut bool| {
        if p + r == 0.0 {
            *degenerate = true;
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    };
    let f1 = f1_of(precision, recall, &mut degenerate);
    let f1_control = f1_of(precision_control, recall_control, &mut degenerate);
    let waf = (n_case as f64 * f1 + n_control as f64 * f1_control) / y_true.len() as f64;

    let mut auc_sum = 0.0;
    for (&la, &sa) in y_true.iter().zip(scores) {
        if la != Label::Case {
            continue;
        }
        for (&lb, &sb) in y_true.iter().zip(scores) {
            if lb != Label::Control {
                continue;
            }
            if sa > sb {
                auc_sum += 1.0;
            } else if sa == sb {
                auc_sum += 0.5;
            }
        }
    }
    let auc = auc_sum / (n_case * n_control) as f64;

    Ok(Metrics { accuracy, precision, recall, f1, waf, auc, degenerate })
}
