//! Brute-force reference for AP@IoU with greedy matching.
//!
//! Written from the definitions only: it evaluates precision and recall at
//! every distinct score threshold by counting, then takes the best precision
//! at or beyond each recall level.

pub type Rect = [f64; 4];

pub struct OracleImage {
    pub preds: Vec<(Rect, f64)>,
    pub gts: Vec<Rect>,
}

fn area(r: &Rect) -> f64 {
    (r[2] - r[0]).max(0.0) * (r[3] - r[1]).max(0.0)
}

pub fn rect_iou(a: &Rect, b: &Rect) -> f64 {
    let inter = [
        a[0].max(b[0]),
        a[1].max(b[1]),
        a[2].min(b[2]),
        a[3].min(b[3]),
    ];
    let i = area(&inter);
    let u = area(a) + area(b) - i;
    if u <= 0.0 {
        0.0
    } else {
        i / u
    }
}

/// (score, is_tp) for every prediction across all images.
fn label_predictions(images: &[OracleImage], iou_threshold: f64) -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for img in images {
        let mut order: Vec<&(Rect, f64)> = img.preds.iter().collect();
        order.sort_by(|a, b| {
            b.1.partial_cmp(&a.1).unwrap().then_with(|| {
                a.0.iter()
                    .zip(b.0.iter())
                    .map(|(x, y)| x.partial_cmp(y).unwrap())
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        });
        let mut used = vec![false; img.gts.len()];
        for (rect, score) in order {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in img.gts.iter().enumerate() {
                if used[j] {
                    continue;
                }
                let v = rect_iou(rect, g);
                match best {
                    Some((_, b)) if v <= b => {}
                    _ => best = Some((j, v)),
                }
            }
            let tp = match best {
                Some((j, v)) if v >= iou_threshold => {
                    used[j] = true;
                    true
                }
                _ => false,
            };
            out.push((*score, tp));
        }
    }
    out
}

pub fn brute_force_ap(images: &[OracleImage], iou_threshold: f64) -> f64 {
    let n_gt: usize = images.iter().map(|i| i.gts.len()).sum();
    assert!(n_gt > 0);
    let labelled = label_predictions(images, iou_threshold);

    let mut thresholds: Vec<f64> = labelled.iter().map(|p| p.0).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<bool> = labelled.iter().filter(|p| p.0 >= t).map(|p| p.1).collect();
            let tp = kept.iter().filter(|&&b| b).count() as f64;
            (tp / n_gt as f64, tp / kept.len() as f64)
        })
        .collect();

    let mut recalls: Vec<f64> = points.iter().map(|p| p.0).collect();
    recalls.sort_by(|a, b| a.partial_cmp(b).unwrap());
    recalls.dedup();

    let mut ap = 0.0;
    let mut prev = 0.0;
    for r in recalls {
        let p = points
            .iter()
            .filter(|q| q.0 >= r)
            .map(|q| q.1)
            .fold(0.0, f64::max);
        ap += (r - prev) * p;
        prev = r;
    }
    ap
}

#[test]
fn oracle_self_check() {
    let img = OracleImage {
        preds: vec![
            ([0.0, 0.0, 10.0, 10.0], 0.9),
            ([50.0, 50.0, 60.0, 60.0], 0.8),
        ],
        gts: vec![[0.0, 0.0, 10.0, 10.0], [20.0, 20.0, 30.0, 30.0]],
    };
    assert_eq!(brute_force_ap(&[img], 0.5), 0.5);
}
