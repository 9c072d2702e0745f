//! ROC curves and best-F1 operating points over pooled p-values.

use serde::{Deserialize, Serialize};

/// A p-value with its ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub pvalue: f64,
    pub anomalous: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCurve {
    /// Sorted by threshold; the first point flags nothing.
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub alpha: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evaluation {
    Scored { curve: EvalCurve, best: OperatingPoint },
    /// Only one class is present, so ROC and F1 are undefined.
    Degenerate { positives: usize, negatives: usize },
}

impl Evaluation {
    pub fn auc(&self) -> Option<f64> {
        match self {
            Evaluation::Scored { curve, .. } => Some(curve.auc),
            Evaluation::Degenerate { .. } => None,
        }
    }

    pub fn best(&self) -> Option<&OperatingPoint> {
        match self {
            Evaluation::Scored { best, .. } => Some(best),
            Evaluation::Degenerate { .. } => None,
        }
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Precision, recall and F1 when every p-value at most `alpha` is flagged.
pub fn operating_point(scores: &[Scored], alpha: f64) -> OperatingPoint {
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for s in scores {
        match (s.pvalue <= alpha, s.anomalous) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    OperatingPoint {
        alpha,
        precision,
        recall,
        f1: f1(precision, recall),
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    }
}

/// ROC over every distinct p-value as threshold, trapezoidal AUC, and the
/// threshold maximizing F1 (smallest one on ties).
pub fn evaluate(scores: &[Scored]) -> Evaluation {
    let positives = scores.iter().filter(|s| s.anomalous).count();
    let negatives = scores.len() - positives;
    if positives == 0 || negatives == 0 {
        return Evaluation::Degenerate { positives, negatives };
    }
    let mut sorted: Vec<Scored> = scores.to_vec();
    sorted.sort_by(|a, b| a.pvalue.total_cmp(&b.pvalue));

    let mut points = vec![RocPoint { threshold: 0.0, tpr: 0.0, fpr: 0.0 }];
    let mut best: Option<OperatingPoint> = None;
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut k = 0;
    while k < sorted.len() {
        let alpha = sorted[k].pvalue;
        while k < sorted.len() && sorted[k].pvalue == alpha {
            if sorted[k].anomalous {
                tp += 1;
            } else {
                fp += 1;
            }
            k += 1;
        }
        let precision = tp as f64 / (tp + fp) as f64;
        let recall = tp as f64 / positives as f64;
        let point = OperatingPoint {
            alpha,
            precision,
            recall,
            f1: f1(precision, recall),
            true_positives: tp,
            false_positives: fp,
            false_negatives: positives - tp,
        };
        if best.is_none_or(|b| point.f1 > b.f1) {
            best = Some(point);
        }
        let roc = RocPoint {
            threshold: alpha,
            tpr: recall,
            fpr: fp as f64 / negatives as f64,
        };
        // A p-value of exactly 0 replaces the flag-nothing origin.
        if alpha == 0.0 {
            points[0] = roc;
        } else {
            points.push(roc);
        }
    }
    let auc = points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum::<f64>()
        + points[0].fpr * points[0].tpr / 2.0;
    Evaluation::Scored {
        curve: EvalCurve { points, auc },
        best: best.expect("at least one threshold"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(pvalue: f64, anomalous: bool) -> Scored {
        Scored { pvalue, anomalous }
    }

    #[test]
    fn two_point_toy() {
        let e = evaluate(&[s(0.01, true), s(0.9, false)]);
        assert_eq!(e.auc(), Some(1.0));
        let b = e.best().unwrap();
        assert_eq!((b.alpha, b.f1), (0.01, 1.0));
    }

    #[test]
    fn reversed_scores_have_zero_auc() {
        let e = evaluate(&[s(0.9, true), s(0.01, false)]);
        assert_eq!(e.auc(), Some(0.0));
    }

    #[test]
    fn ties_break_toward_smaller_alpha() {
        // Flagging at 0.1 or 0.4 gives the same F1.
        let scores = [s(0.1, true), s(0.2, false), s(0.3, false), s(0.4, true), s(0.6, false)];
        let b = *evaluate(&scores).best().unwrap();
        let at = |a| operating_point(&scores, a).f1;
        assert_eq!(at(0.1), at(0.4));
        assert_eq!(b.alpha, 0.1);
    }

    #[test]
    fn one_class_is_degenerate() {
        assert_eq!(
            evaluate(&[s(0.1, false), s(0.5, false)]),
            Evaluation::Degenerate { positives: 0, negatives: 2 }
        );
        assert!(evaluate(&[]).auc().is_none());
    }

    #[test]
    fn uninformative_scores_give_half_auc() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let scores: Vec<Scored> = (0..20_000).map(|_| s(rng.random(), rng.random_bool(0.3))).collect();
        let auc = evaluate(&scores).auc().unwrap();
        assert!((auc - 0.5).abs() < 0.05, "{auc}");
    }

    #[test]
    fn tied_scores_count_half() {
        let auc = evaluate(&[s(0.5, true), s(0.5, false)]).auc().unwrap();
        assert_eq!(auc, 0.5);
        let auc = evaluate(&[s(0.0, true), s(0.0, false), s(1.0, false)]).auc().unwrap();
        assert_eq!(auc, 0.75);
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_ranking(raw in prop::collection::vec((0u8..20, any::<bool>()), 2..60)) {
            let scores: Vec<Scored> = raw.iter().map(|&(p, a)| s(p as f64 / 20.0, a)).collect();
            let pos: Vec<f64> = scores.iter().filter(|x| x.anomalous).map(|x| x.pvalue).collect();
            let neg: Vec<f64> = scores.iter().filter(|x| !x.anomalous).map(|x| x.pvalue).collect();
            match evaluate(&scores) {
                Evaluation::Degenerate { .. } => prop_assert!(pos.is_empty() || neg.is_empty()),
                Evaluation::Scored { curve, best } => {
                    // Mann-Whitney: smaller p-values should be anomalous.
                    let mut wins = 0.0;
                    for &p in &pos {
                        for &q in &neg {
                            wins += if p < q { 1.0 } else if p == q { 0.5 } else { 0.0 };
                        }
                    }
                    let want = wins / (pos.len() * neg.len()) as f64;
                    prop_assert!((curve.auc - want).abs() < 1e-12);
                    let recomputed = operating_point(&scores, best.alpha);
                    prop_assert_eq!(recomputed, best);
                    let p = recomputed.precision;
                    let r = recomputed.recall;
                    prop_assert!((best.f1 - 2.0 * p * r / (p + r)).abs() < 1e-12);
                }
            }
        }
    }
}
