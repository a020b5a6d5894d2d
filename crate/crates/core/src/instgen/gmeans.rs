//! G-means clustering: repeatedly split clusters with 2-means and accept a
//! split only when an Anderson-Darling normality test on the data
//! projected onto the child-centroid axis rejects normality.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::seeds;

/// Cluster labels plus centroids, label-indexed.
#[derive(Debug, Clone)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

/// Anderson-Darling statistic for normality with estimated mean and
/// variance, including the finite-sample correction. `None` when the
/// sample is degenerate (fewer than 8 points or zero variance).
pub fn anderson_darling_a2_star(sample: &[f64]) -> Option<f64> {
    let n = sample.len();
    if n < 8 {
        return None;
    }
    let nf = n as f64;
    let mean = sample.iter().sum::<f64>() / nf;
    let var = sample.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    if var <= 0.0 {
        return None;
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = sample.iter().map(|x| (x - mean) / sd).collect();
    z.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let phi: Vec<f64> = z
        .iter()
        .map(|&v| normal.cdf(v).clamp(1e-300, 1.0 - 1e-16))
        .collect();
    let mut a2 = 0.0;
    for i in 0..n {
        let w = (2 * i + 1) as f64;
        a2 += w * (phi[i].ln() + (1.0 - phi[n - 1 - i]).ln());
    }
    let a2 = -nf - a2 / nf;
    Some(a2 * (1.0 + 4.0 / nf - 25.0 / (nf * nf)))
}

/// Upper-tail p-value of the corrected statistic (D'Agostino & Stephens
/// case-3 approximation).
pub fn ad_normality_pvalue(a2_star: f64) -> f64 {
    let z = a2_star;
    if z >= 0.6 {
        (1.2937 - 5.709 * z + 0.0186 * z * z).exp()
    } else if z >= 0.34 {
        (0.9177 - 4.279 * z - 1.38 * z * z).exp()
    } else if z > 0.2 {
        1.0 - (-8.318 + 42.796 * z - 59.938 * z * z).exp()
    } else {
        1.0 - (-13.436 + 101.14 * z - 223.73 * z * z).exp()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid_of(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let dim = points[members[0]].len();
    let mut c = vec![0.0; dim];
    for &m in members {
        for (ci, x) in c.iter_mut().zip(&points[m]) {
            *ci += x;
        }
    }
    for ci in &mut c {
        *ci /= members.len() as f64;
    }
    c
}

/// Deterministic 2-means with a k-means++ start. Returns the two member
/// lists and centroids, or `None` when the cluster cannot be split.
fn two_means(
    points: &[Vec<f64>],
    members: &[usize],
    rng: &mut ChaCha12Rng,
) -> Option<([Vec<usize>; 2], [Vec<f64>; 2])> {
    if members.len() < 2 {
        return None;
    }
    let first = members[rng.gen_range(0..members.len())];
    let weights: Vec<f64> =
        members.iter().map(|&m| sq_dist(&points[m], &points[first])).collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None; // all points identical
    }
    let mut pick = rng.gen_range(0.0..total);
    let mut second = members[0];
    for (&m, w) in members.iter().zip(&weights) {
        if pick < *w {
            second = m;
            break;
        }
        pick -= w;
    }
    let mut c0 = points[first].clone();
    let mut c1 = points[second].clone();
    let mut assign = vec![0u8; members.len()];
    for _ in 0..64 {
        let mut changed = false;
        for (slot, &m) in members.iter().enumerate() {
            let side = if sq_dist(&points[m], &c0) <= sq_dist(&points[m], &c1) { 0 } else { 1 };
            if assign[slot] != side {
                assign[slot] = side;
                changed = true;
            }
        }
        let a: Vec<usize> = members
            .iter()
            .zip(&assign)
            .filter(|(_, &s)| s == 0)
            .map(|(&m, _)| m)
            .collect();
        let b: Vec<usize> = members
            .iter()
            .zip(&assign)
            .filter(|(_, &s)| s == 1)
            .map(|(&m, _)| m)
            .collect();
        if a.is_empty() || b.is_empty() {
            return None;
        }
        c0 = centroid_of(points, &a);
        c1 = centroid_of(points, &b);
        if !changed {
            return Some(([a, b], [c0, c1]));
        }
    }
    let a: Vec<usize> =
        members.iter().zip(&assign).filter(|(_, &s)| s == 0).map(|(&m, _)| m).collect();
    let b: Vec<usize> =
        members.iter().zip(&assign).filter(|(_, &s)| s == 1).map(|(&m, _)| m).collect();
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some(([a, b], [c0, c1]))
}

/// Detect the number of clusters: start with one, keep splitting while the
/// projection onto the child-centroid axis rejects normality at `alpha`
/// (default 0.0001 in the pipeline).
pub fn gmeans_cluster(points: &[Vec<f64>], alpha: f64, seed: u64) -> Result<Clustering> {
    if points.len() < 2 {
        return Err(Error::Validation("clustering needs at least 2 vectors".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Validation("inconsistent feature dimensionality".into()));
    }

    let mut final_clusters: Vec<Vec<usize>> = Vec::new();
    let mut work: Vec<Vec<usize>> = vec![(0..points.len()).collect()];
    let mut split_counter = 0usize;
    while let Some(members) = work.pop() {
        split_counter += 1;
        let mut rng = seeds::rng(seed, &format!("gmeans/split-{split_counter}"));
        let split = if members.len() >= 8 { two_means(points, &members, &mut rng) } else { None };
        match split {
            Some(([a, b], [c0, c1])) => {
                let axis: Vec<f64> = c0.iter().zip(&c1).map(|(x, y)| x - y).collect();
                let norm: f64 = axis.iter().map(|v| v * v).sum::<f64>();
                if norm <= 0.0 {
                    final_clusters.push(members);
                    continue;
                }
                let projected: Vec<f64> = members
                    .iter()
                    .map(|&m| points[m].iter().zip(&axis).map(|(x, a)| x * a).sum::<f64>())
                    .collect();
                match anderson_darling_a2_star(&projected) {
                    Some(a2) if ad_normality_pvalue(a2) < alpha => {
                        work.push(a);
                        work.push(b);
                    }
                    _ => final_clusters.push(members),
                }
            }
            None => final_clusters.push(members),
        }
    }

    // deterministic labels: clusters ordered by their smallest member index
    final_clusters.sort_by_key(|c| c.iter().min().copied());
    let mut labels = vec![0usize; points.len()];
    let mut centroids = Vec::new();
    for (k, cluster) in final_clusters.iter().enumerate() {
        for &m in cluster {
            labels[m] = k;
        }
        centroids.push(centroid_of(points, cluster));
    }
    Ok(Clustering { labels, centroids })
}

/// Pick the `per_cluster` members nearest each centroid (ties by index);
/// returns the selected indices, sorted.
pub fn select_per_cluster(
    points: &[Vec<f64>],
    clustering: &Clustering,
    per_cluster: usize,
) -> Vec<usize> {
    let mut selected = Vec::new();
    for (k, centroid) in clustering.centroids.iter().enumerate() {
        let mut members: Vec<usize> = clustering
            .labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == k)
            .map(|(i, _)| i)
            .collect();
        members.sort_by(|&a, &b| {
            sq_dist(&points[a], centroid)
                .partial_cmp(&sq_dist(&points[b], centroid))
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        selected.extend(members.into_iter().take(per_cluster));
    }
    selected.sort_unstable();
    selected
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn statistic_matches_the_reference_values() {
        // frozen from an independent reference implementation (scipy):
        // the bimodal sample has A2 = 1.5717914865991904 and
        // A2* = 1.8075602095890688 with p = 1.2781969220318091e-4
        let bimodal =
            [0.0, 0.1, 0.2, 0.05, 0.15, 10.0, 10.1, 10.2, 10.05, 10.15];
        let a2s = anderson_darling_a2_star(&bimodal).unwrap();
        assert_relative_eq!(a2s, 1.8075602095890688, max_relative = 1e-9);
        assert_relative_eq!(
            ad_normality_pvalue(a2s),
            1.2781969220318091e-4,
            max_relative = 1e-7
        );
    }

    #[test]
    fn statistic_accepts_a_normal_looking_sample() {
        // frozen sample drawn once from N(5, 1); A2* = 0.35469684199119844,
        // p = 0.461319056201366 per the reference implementation
        let sample = [
            5.304717, 3.960016, 5.750451, 5.940565, 3.048965, 3.69782, 5.12784, 4.683757,
            4.983199, 4.146956, 5.879398, 5.777792, 5.066031, 6.127241, 5.467509, 4.140708,
            5.368751, 4.041117, 5.87845, 4.950074, 4.815138, 4.31907, 6.222541, 4.845471,
        ];
        let a2s = anderson_darling_a2_star(&sample).unwrap();
        assert_relative_eq!(a2s, 0.35469684199119844, max_relative = 1e-9);
        assert_relative_eq!(ad_normality_pvalue(a2s), 0.461319056201366, max_relative = 1e-7);
    }

    fn blob(cx: f64, cy: f64, n: usize, spread: f64, phase: u64) -> Vec<Vec<f64>> {
        // deterministic gaussian-shaped points around (cx, cy): hashed
        // uniforms pushed through Box-Muller
        let uniform = |i: u64, salt: u64| -> f64 {
            let mut h = i.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(salt.wrapping_mul(0xD1B54A32D192ED03));
            h ^= h >> 31;
            h = h.wrapping_mul(0xBF58476D1CE4E5B9);
            h ^= h >> 27;
            ((h >> 11) as f64 / (1u64 << 53) as f64).clamp(1e-12, 1.0 - 1e-12)
        };
        (0..n as u64)
            .map(|i| {
                let u1 = uniform(i, phase);
                let u2 = uniform(i, phase.wrapping_add(1));
                let r = (-2.0 * u1.ln()).sqrt();
                let z0 = r * (std::f64::consts::TAU * u2).cos();
                let z1 = r * (std::f64::consts::TAU * u2).sin();
                vec![cx + spread * z0, cy + spread * z1]
            })
            .collect()
    }

    #[test]
    fn two_separated_blobs_give_two_clusters() {
        let mut points = blob(0.0, 0.0, 40, 1.0, 17);
        points.extend(blob(10.0, 10.0, 40, 1.0, 99));
        let clustering = gmeans_cluster(&points, 1e-4, 7).unwrap();
        assert_eq!(clustering.k(), 2);
        // the two halves land in different clusters
        assert_ne!(clustering.labels[0], clustering.labels[79]);
        let first = clustering.labels[0];
        assert!(clustering.labels[..40].iter().all(|&l| l == first));
    }

    #[test]
    fn a_single_blob_stays_one_cluster() {
        let points = blob(3.0, 3.0, 60, 1.0, 5);
        let clustering = gmeans_cluster(&points, 1e-4, 7).unwrap();
        assert_eq!(clustering.k(), 1);
    }

    #[test]
    fn identical_points_stay_one_cluster() {
        let points = vec![vec![1.0, 2.0]; 10];
        let clustering = gmeans_cluster(&points, 1e-4, 7).unwrap();
        assert_eq!(clustering.k(), 1);
    }

    #[test]
    fn clustering_is_deterministic() {
        let mut points = blob(0.0, 0.0, 30, 1.0, 1);
        points.extend(blob(8.0, 0.0, 30, 1.0, 2));
        let a = gmeans_cluster(&points, 1e-4, 42).unwrap();
        let b = gmeans_cluster(&points, 1e-4, 42).unwrap();
        assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn per_cluster_selection_reaches_every_cluster() {
        let mut points = blob(0.0, 0.0, 20, 1.0, 3);
        points.extend(blob(9.0, 9.0, 20, 1.0, 4));
        let clustering = gmeans_cluster(&points, 1e-4, 11).unwrap();
        let picked = select_per_cluster(&points, &clustering, 5);
        assert_eq!(picked.len(), 5 * clustering.k());
        for k in 0..clustering.k() {
            assert!(picked.iter().any(|&i| clustering.labels[i] == k));
        }
        // a cluster smaller than the quota contributes everything it has
        let tiny = select_per_cluster(&points, &clustering, 1000);
        assert_eq!(tiny.len(), points.len());
    }
}
