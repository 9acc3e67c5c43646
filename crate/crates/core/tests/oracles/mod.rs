//! Slow, direct reference implementations used to check the fast paths.
#![allow(dead_code, clippy::needless_range_loop)]

/// Fraction of (in, ood) pairs ranked correctly, ties counting half.
pub fn pairwise_auroc(in_s: &[f64], ood_s: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &a in in_s {
        for &b in ood_s {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    wins / (in_s.len() * ood_s.len()) as f64
}

/// Average precision from a sweep over every distinct threshold, with `in`
/// as the positive class and `score >= t` predicted positive.
pub fn sweep_ap(pos: &[f64], neg: &[f64]) -> f64 {
    let mut thresholds: Vec<f64> = pos.iter().chain(neg).copied().collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for t in thresholds {
        let tp = pos.iter().filter(|&&s| s >= t).count() as f64;
        let fp = neg.iter().filter(|&&s| s >= t).count() as f64;
        if tp == 0.0 {
            continue;
        }
        let recall = tp / pos.len() as f64;
        ap += (recall - prev_recall) * tp / (tp + fp);
        prev_recall = recall;
    }
    ap
}

/// Largest in-distribution score that still accepts at least `target` of
/// the in-distribution set.
pub fn sweep_threshold(in_s: &[f64], target: f64) -> f64 {
    let need = target * in_s.len() as f64 - 1e-9;
    in_s.iter()
        .copied()
        .filter(|&t| in_s.iter().filter(|&&s| s >= t).count() as f64 >= need)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn sweep_fpr(in_s: &[f64], ood_s: &[f64], target: f64) -> f64 {
    let t = sweep_threshold(in_s, target);
    ood_s.iter().filter(|&&s| s >= t).count() as f64 / ood_s.len() as f64
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Textbook LOF of `q` against `points`. `own` is the index of `q` in
/// `points` when `q` is a training point.
pub fn textbook_lof(points: &[Vec<f64>], q: &[f64], k: usize) -> f64 {
    let k_distance = |p: &[f64], own: Option<usize>| {
        let mut d: Vec<f64> = points
            .iter()
            .enumerate()
            .filter(|(i, _)| Some(*i) != own)
            .map(|(_, o)| dist(p, o))
            .collect();
        d.sort_by(f64::total_cmp);
        d[k - 1]
    };
    let hood = |p: &[f64], own: Option<usize>| -> Vec<usize> {
        let kd = k_distance(p, own);
        (0..points.len())
            .filter(|&i| Some(i) != own && dist(p, &points[i]) <= kd)
            .collect()
    };
    let lrd = |p: &[f64], own: Option<usize>| {
        let nb = hood(p, own);
        let reach: f64 = nb
            .iter()
            .map(|&o| k_distance(&points[o], Some(o)).max(dist(p, &points[o])))
            .sum();
        nb.len() as f64 / reach
    };
    let nb = hood(q, None);
    let lrd_q = lrd(q, None);
    nb.iter().map(|&o| lrd(&points[o], Some(o)) / lrd_q).sum::<f64>() / nb.len() as f64
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        for v in &mut m[col] {
            *v /= p;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `(x - mu)^T P (x - mu)` by explicit double sum.
pub fn quadratic_form(p: &[Vec<f64>], x: &[f64], mu: &[f64]) -> f64 {
    let mut q = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            q += (x[i] - mu[i]) * p[i][j] * (x[j] - mu[j]);
        }
    }
    q
}

/// Central finite-difference gradient of `f` at `x`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[j] += h;
            down[j] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// `max |a - b| / max(max |b|, 1e-8)`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let den = b.iter().map(|v| v.abs()).fold(1e-8, f64::max);
    num / den
}
