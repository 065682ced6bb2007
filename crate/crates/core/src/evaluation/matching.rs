use super::EvalConfig;
use crate::annotations::LabeledBox;
use crate::detector::Detection;
use crate::geometry::iou;

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub detection: Detection,
    /// Index into the ground-truth slice, `None` for a false positive.
    pub gt_index: Option<usize>,
    /// Best IoU against any same-class ground truth still unmatched when this
    /// prediction's turn came.
    pub iou: f64,
}

impl Match {
    pub fn is_true_positive(&self) -> bool {
        self.gt_index.is_some()
    }
}

/// Greedy matching in descending score order (ties broken by box corners).
///
/// Each prediction takes the unmatched same-class ground truth with highest
/// IoU, provided that IoU reaches `cfg.iou_threshold`. Output follows the
/// sorted prediction order.
pub fn match_detections(preds: &[Detection], gt: &[LabeledBox], cfg: &EvalConfig) -> Vec<Match> {
    let mut order: Vec<&Detection> = preds.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.bbox.lex_cmp(&b.bbox))
    });

    let mut taken = vec![false; gt.len()];
    order
        .into_iter()
        .map(|d| {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in gt.iter().enumerate() {
                if taken[j] || g.class_name != d.label {
                    continue;
                }
                let v = iou(&d.bbox, &g.bbox).unwrap_or(0.0);
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            let best_iou = best.map_or(0.0, |(_, v)| v);
            let gt_index = best
                .filter(|&(_, v)| v >= cfg.iou_threshold)
                .map(|(j, _)| j);
            if let Some(j) = gt_index {
                taken[j] = true;
            }
            Match {
                detection: d.clone(),
                gt_index,
                iou: best_iou,
            }
        })
        .collect()
}
