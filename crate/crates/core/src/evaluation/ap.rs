use crate::error::{Error, Result};

/// One prediction in a global ranking: its score and whether it matched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedPrediction {
    pub score: f64,
    pub true_positive: bool,
}

/// All-point interpolated average precision.
///
/// Predictions with equal scores form one operating point, so the value
/// depends only on the score ranking and not on input order. At each recall
/// level the precision is the best precision reached at that recall or beyond.
pub fn average_precision(predictions: &[RankedPrediction], n_gt: usize) -> Result<f64> {
    if n_gt == 0 {
        return Err(Error::domain(
            "average precision needs at least one ground-truth box",
        ));
    }
    let mut ranked = predictions.to_vec();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    // (recall, precision) after each distinct score
    let mut points: Vec<(f64, f64)> = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < ranked.len() {
        let score = ranked[i].score;
        while i < ranked.len() && ranked[i].score == score {
            if ranked[i].true_positive {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((tp as f64 / n_gt as f64, tp as f64 / (tp + fp) as f64));
    }

    // precision envelope, right to left
    let mut envelope = 0.0f64;
    for p in points.iter_mut().rev() {
        envelope = envelope.max(p.1);
        p.1 = envelope;
    }

    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (recall, precision) in points {
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap.clamp(0.0, 1.0))
}
