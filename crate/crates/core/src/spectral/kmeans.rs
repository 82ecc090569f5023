//! Seeded k-means (k-means++ initialization, Lloyd iterations, restarts).

use rand::Rng;

use crate::mat::Mat;
use crate::rng::MicRng;
use crate::scalar::{cnt, Scalar};

#[derive(Clone, Debug)]
pub struct KMeansFit<T> {
    pub labels: Vec<usize>,
    /// `k x d` cluster centers.
    pub centers: Mat<T>,
    /// Total within-cluster sum of squared distances.
    pub inertia: T,
}

/// Cluster the rows of `points`; returns the best of `restarts` runs.
pub fn kmeans<T: Scalar>(
    points: &Mat<T>,
    k: usize,
    restarts: usize,
    max_iter: usize,
    rng: &mut MicRng,
) -> KMeansFit<T> {
    assert!(k >= 1 && k <= points.nrows(), "need 1 <= k <= n points");
    let mut best: Option<KMeansFit<T>> = None;
    for _ in 0..restarts.max(1) {
        let fit = kmeans_once(points, k, max_iter, rng);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    best.unwrap()
}

fn kmeans_once<T: Scalar>(points: &Mat<T>, k: usize, max_iter: usize, rng: &mut MicRng) -> KMeansFit<T> {
    let n = points.nrows();
    let d = points.ncols();
    let mut centers = plus_plus_seed(points, k, rng);
    let mut labels = vec![0usize; n];

    for _ in 0..max_iter {
        let mut changed = false;
        for i in 0..n {
            let (lbl, _) = nearest(points.row(i), &centers);
            if labels[i] != lbl {
                labels[i] = lbl;
                changed = true;
            }
        }
        // recompute centers; reseed empty clusters from the farthest point
        let mut sums: Mat<T> = Mat::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for c in 0..d {
                sums[(labels[i], c)] += points[(i, c)];
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = nearest(points.row(a), &centers).1;
                        let db = nearest(points.row(b), &centers).1;
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                for j in 0..d {
                    centers[(c, j)] = points[(far, j)];
                }
                changed = true;
            } else {
                let div = cnt::<T>(counts[c]);
                for j in 0..d {
                    centers[(c, j)] = sums[(c, j)] / div;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let inertia = (0..n)
        .map(|i| nearest(points.row(i), &centers).1)
        .sum();
    KMeansFit { labels, centers, inertia }
}

fn plus_plus_seed<T: Scalar>(points: &Mat<T>, k: usize, rng: &mut MicRng) -> Mat<T> {
    let n = points.nrows();
    let d = points.ncols();
    let mut centers = Mat::zeros(k, d);
    let first = rng.random_range(0..n);
    for j in 0..d {
        centers[(0, j)] = points[(first, j)];
    }
    for c in 1..k {
        let dists: Vec<T> = (0..n)
            .map(|i| {
                (0..c)
                    .map(|cc| dist2(points.row(i), centers.row(cc)))
                    .fold(T::infinity(), T::min)
            })
            .collect();
        let total: T = dists.iter().copied().sum();
        let pick = if total > T::zero() {
            let mut u = T::draw_unit(rng) * total;
            let mut idx = n - 1;
            for (i, &w) in dists.iter().enumerate() {
                if u < w {
                    idx = i;
                    break;
                }
                u -= w;
            }
            idx
        } else {
            rng.random_range(0..n)
        };
        for j in 0..d {
            centers[(c, j)] = points[(pick, j)];
        }
    }
    centers
}

fn nearest<T: Scalar>(point: &[T], centers: &Mat<T>) -> (usize, T) {
    let mut best = (0usize, T::infinity());
    for c in 0..centers.nrows() {
        let dd = dist2(point, centers.row(c));
        if dd < best.1 {
            best = (c, dd);
        }
    }
    best
}

#[inline]
fn dist2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}
