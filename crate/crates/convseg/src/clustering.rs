//! Palette estimation: a 3D color histogram with hill-climbing peak counting
//! to detect K, then seeded K-means to place the K centroids.

use ndarray::{Array2, Array3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::{dist2, Image, Palette};

/// A B x B x B histogram of RGB values.
#[derive(Debug, Clone)]
pub struct Histogram3D {
    bins: usize,
    counts: Array3<u64>,
}

impl Histogram3D {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn counts(&self) -> &Array3<u64> {
        &self.counts
    }

    /// Total number of samples (pixels) in the histogram.
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Result of one K-means run.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    /// The K centroids, in cluster-index order.
    pub palette: Palette,
    /// Per-pixel cluster index, shape (H, W).
    pub assignments: Array2<usize>,
    /// Sum of squared distances from every pixel to its assigned centroid.
    pub inertia: f64,
    /// Lloyd iterations executed.
    pub iterations: usize,
    /// Inertia recorded after each assignment step; non-increasing.
    pub inertia_trace: Vec<f64>,
}

/// Bins every pixel: value v goes to bin min(floor(v * B), B - 1), so an
/// exact 1.0 lands in the last bin instead of overflowing.
pub fn build_histogram(f: &Image, bins: usize) -> Result<Histogram3D> {
    if bins < 2 {
        return Err(Error::InvalidParameter {
            what: "bins",
            why: format!("need at least 2, got {bins}"),
        });
    }
    let b = bins as f64;
    let bin_of = |v: f64| ((v * b) as usize).min(bins - 1);
    let mut counts = Array3::zeros((bins, bins, bins));
    for i in 0..f.height() {
        for j in 0..f.width() {
            let [r, g, bl] = f.pixel(i, j);
            counts[(bin_of(r), bin_of(g), bin_of(bl))] += 1;
        }
    }
    Ok(Histogram3D { bins, counts })
}

/// Counts histogram modes by deterministic hill climbing and clamps the count
/// to [2, 16].
///
/// From every nonzero bin, repeatedly step to the strictly-larger neighbor
/// (26-neighborhood) with the highest count — ties broken by lowest linear
/// bin index — until no neighbor is larger. The number of distinct terminal
/// bins is the estimated K.
pub fn detect_k(hist: &Histogram3D) -> Result<usize> {
    let b = hist.bins;
    if hist.counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyHistogram);
    }
    let lin = |x: usize, y: usize, z: usize| (x * b + y) * b + z;
    let climb_step = |x: usize, y: usize, z: usize| -> Option<(usize, usize, usize)> {
        let here = hist.counts[(x, y, z)];
        let mut best: Option<(u64, usize, (usize, usize, usize))> = None;
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                for dz in -1i64..=1 {
                    if dx == 0 && dy == 0 && dz == 0 {
                        continue;
                    }
                    let (nx, ny, nz) = (x as i64 + dx, y as i64 + dy, z as i64 + dz);
                    if nx < 0 || ny < 0 || nz < 0 {
                        continue;
                    }
                    let (nx, ny, nz) = (nx as usize, ny as usize, nz as usize);
                    if nx >= b || ny >= b || nz >= b {
                        continue;
                    }
                    let c = hist.counts[(nx, ny, nz)];
                    if c <= here {
                        continue;
                    }
                    let key = lin(nx, ny, nz);
                    let better = match &best {
                        None => true,
                        Some((bc, bkey, _)) => c > *bc || (c == *bc && key < *bkey),
                    };
                    if better {
                        best = Some((c, key, (nx, ny, nz)));
                    }
                }
            }
        }
        best.map(|(_, _, pos)| pos)
    };

    let mut peaks = std::collections::BTreeSet::new();
    for ((x, y, z), &c) in hist.counts.indexed_iter() {
        if c == 0 {
            continue;
        }
        let (mut cx, mut cy, mut cz) = (x, y, z);
        while let Some((nx, ny, nz)) = climb_step(cx, cy, cz) {
            (cx, cy, cz) = (nx, ny, nz);
        }
        peaks.insert(lin(cx, cy, cz));
    }
    Ok(peaks.len().clamp(2, 16))
}

/// Lloyd's algorithm with greedy farthest-point initialization.
///
/// The first centroid is a pixel drawn from the seeded generator; each later
/// centroid is the pixel farthest from the already-chosen set (lowest pixel
/// index on ties). Empty clusters are re-seeded from the pixel farthest from
/// its assigned centroid. Deterministic given the seed: the update step sums
/// in fixed pixel order.
pub fn kmeans(f: &Image, k: usize, seed: u64, max_iter: usize) -> Result<KMeansResult> {
    if k < 2 {
        return Err(Error::PaletteTooSmall { k });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            what: "max_iter",
            why: "must be positive".to_string(),
        });
    }
    let (h, w) = (f.height(), f.width());
    let n = h * w;
    let px = |idx: usize| f.pixel(idx / w, idx % w);

    let distinct = distinct_colors(f);
    if distinct < k {
        return Err(Error::TooFewColors { k, distinct });
    }

    // Greedy farthest-point initialization.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids: Vec<[f64; 3]> = Vec::with_capacity(k);
    centroids.push(px(rng.random_range(0..n)));
    let mut nearest = vec![f64::INFINITY; n];
    while centroids.len() < k {
        let latest = *centroids.last().expect("nonempty");
        let mut far_idx = 0;
        let mut far_d = -1.0;
        for idx in 0..n {
            let d = dist2(px(idx), latest).min(nearest[idx]);
            nearest[idx] = d;
            if d > far_d {
                far_d = d;
                far_idx = idx;
            }
        }
        centroids.push(px(far_idx));
    }

    let mut assignments = vec![0usize; n];
    let mut iterations = 0;
    let mut inertia = f64::INFINITY;
    let mut inertia_trace = Vec::new();
    for _ in 0..max_iter {
        iterations += 1;
        // Assignment step: nearest centroid, lowest index on ties.
        let mut changed = false;
        let mut total = 0.0;
        for idx in 0..n {
            let p = px(idx);
            let mut best = 0;
            let mut best_d = dist2(p, centroids[0]);
            for (c, cent) in centroids.iter().enumerate().skip(1) {
                let d = dist2(p, *cent);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[idx] != best {
                assignments[idx] = best;
                changed = true;
            }
            total += best_d;
        }
        inertia = total;
        inertia_trace.push(total);
        if !changed && iterations > 1 {
            break;
        }

        // Update step: per-cluster means, summed in fixed pixel order.
        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for idx in 0..n {
            let p = px(idx);
            let c = assignments[idx];
            sums[c][0] += p[0];
            sums[c][1] += p[1];
            sums[c][2] += p[2];
            counts[c] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                let m = counts[c] as f64;
                centroids[c] = [sums[c][0] / m, sums[c][1] / m, sums[c][2] / m];
            } else {
                // Re-seed an empty cluster at the pixel farthest from its
                // assigned centroid (lowest index on ties).
                let mut far_idx = 0;
                let mut far_d = -1.0;
                for idx in 0..n {
                    let d = dist2(px(idx), centroids[assignments[idx]]);
                    if d > far_d {
                        far_d = d;
                        far_idx = idx;
                    }
                }
                centroids[c] = px(far_idx);
            }
        }
    }

    let palette = Palette::new(centroids)?;
    let assignments = Array2::from_shape_vec((h, w), assignments).expect("shape fixed");
    Ok(KMeansResult {
        palette,
        assignments,
        inertia,
        iterations,
        inertia_trace,
    })
}

/// Best of several seeded K-means runs, by lowest inertia (earliest restart
/// wins ties). Piecewise-constant images under heavy noise leave Lloyd's
/// algorithm with close local optima; restarting from a few seeds and keeping
/// the best is the standard remedy and stays deterministic given the seed.
pub fn kmeans_restarts(
    f: &Image,
    k: usize,
    seed: u64,
    max_iter: usize,
    restarts: usize,
) -> Result<KMeansResult> {
    if restarts == 0 {
        return Err(Error::InvalidParameter {
            what: "restarts",
            why: "must be positive".to_string(),
        });
    }
    let mut best: Option<KMeansResult> = None;
    for r in 0..restarts {
        let sub_seed = seed.wrapping_mul(1000).wrapping_add(r as u64);
        let run = kmeans(f, k, sub_seed, max_iter)?;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("restarts >= 1"))
}

/// Number of distinct RGB triples in the image (exact bit-pattern equality).
fn distinct_colors(f: &Image) -> usize {
    let mut set = std::collections::HashSet::new();
    for i in 0..f.height() {
        for j in 0..f.width() {
            let [r, g, b] = f.pixel(i, j);
            set.insert([r.to_bits(), g.to_bits(), b.to_bits()]);
        }
    }
    set.len()
}
