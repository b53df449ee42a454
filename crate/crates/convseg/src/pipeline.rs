//! End-to-end segmentation, hardening, the SA metric, synthetic phantoms, and
//! the Gaussian-noise protocol used by the experiments.

use std::str::FromStr;

use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::clustering::{build_histogram, detect_k, kmeans_restarts};
use crate::error::{Error, Result};
use crate::fields::AssignmentField;
use crate::image::{Image, Palette};
use crate::solver::{solve, SolveReport, SolverConfig};

/// A hard segmentation: per-pixel palette indices plus the relaxed field the
/// labels came from (kept for diagnostics).
#[derive(Debug, Clone)]
pub struct Segmentation {
    /// H x W palette indices; always the per-pixel argmax of `relaxed_z`
    /// (lowest index on ties).
    pub labels: Array2<usize>,
    /// The palette the solve ran against.
    pub palette: Palette,
    /// The relaxed solver output.
    pub relaxed_z: AssignmentField,
}

impl Segmentation {
    /// Renders the segmented image: every pixel takes its palette color.
    pub fn render(&self) -> Image {
        let (h, w) = self.labels.dim();
        let mut data = Vec::with_capacity(h * w * 3);
        for i in 0..h {
            for j in 0..w {
                data.extend_from_slice(&self.palette.color(self.labels[(i, j)]));
            }
        }
        Image::new(h, w, data).expect("palette colors are valid intensities")
    }
}

/// Additive Gaussian noise parameters on the [0, 1] intensity scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// Noise mean (intensity units).
    pub mean: f64,
    /// Noise variance (squared intensity units).
    pub variance: f64,
    /// Generator seed.
    pub seed: u64,
}

/// Segmentation accuracy: matched-overlap pixel fraction under the optimal
/// one-to-one label correspondence.
#[derive(Debug, Clone, PartialEq)]
pub struct SAScore {
    /// Fraction in [0, 1].
    pub value: f64,
    /// Overlap counts, shape (predicted labels, truth labels).
    pub overlap_matrix: Array2<u64>,
    /// The (predicted, truth) label pairs the score used.
    pub matching: Vec<(usize, usize)>,
}

/// Options for [`segment`]. At most one of `k` / `palette` may be set; with
/// neither, K comes from histogram peak counting.
#[derive(Debug, Clone)]
pub struct SegmentOptions {
    /// Fixed cluster count (palette then comes from K-means).
    pub k: Option<usize>,
    /// Fixed palette (bypasses clustering entirely).
    pub palette: Option<Palette>,
    pub solver: SolverConfig,
    /// Histogram bins per channel for K detection.
    pub bins: usize,
    /// Seed for K-means initialization.
    pub seed: u64,
    /// K-means restarts (best inertia wins).
    pub restarts: usize,
    /// Lloyd iteration cap per restart.
    pub kmeans_max_iter: usize,
}

impl Default for SegmentOptions {
    fn default() -> Self {
        Self {
            k: None,
            palette: None,
            solver: SolverConfig::default(),
            bins: 16,
            seed: 0,
            restarts: 8,
            kmeans_max_iter: 100,
        }
    }
}

/// The two synthetic test images.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// Three solid shapes (red circle, green rectangle, blue triangle) on a
    /// white background; 4 colors, labels 0-3.
    ThreePhase,
    /// Five overlapping circles (red, green, blue, black, yellow) on a white
    /// background; 6 colors, labels 0-5.
    SixPhase,
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three-phase" => Ok(Self::ThreePhase),
            "six-phase" => Ok(Self::SixPhase),
            other => Err(Error::InvalidParameter {
                what: "phantom kind",
                why: format!("unknown kind {other:?}, expected three-phase or six-phase"),
            }),
        }
    }
}

impl std::fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ThreePhase => "three-phase",
            Self::SixPhase => "six-phase",
        })
    }
}

/// Per-pixel argmax of the relaxed field, ties to the lowest label.
pub fn harden(z: &AssignmentField) -> Array2<usize> {
    let (k, h, w) = z.data().dim();
    let mut labels = Array2::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let mut best = 0;
            let mut best_v = z.data()[(0, i, j)];
            for kk in 1..k {
                let v = z.data()[(kk, i, j)];
                if v > best_v {
                    best_v = v;
                    best = kk;
                }
            }
            labels[(i, j)] = best;
        }
    }
    labels
}

/// Draws one Normal(mean, sqrt(variance)) sample per pixel per channel, in
/// row-major pixel order with channels innermost. Split out of
/// [`add_gaussian_noise`] so tests can check the unclamped statistics.
fn gaussian_noise_field(height: usize, width: usize, spec: &NoiseSpec) -> Result<Array3<f64>> {
    if !spec.variance.is_finite() || spec.variance < 0.0 {
        return Err(Error::NegativeWeight {
            what: "noise variance",
            value: spec.variance,
        });
    }
    if !spec.mean.is_finite() {
        return Err(Error::NonFinite { what: "noise mean" });
    }
    let mut noise = Array3::from_elem((height, width, 3), spec.mean);
    if spec.variance > 0.0 {
        let normal = Normal::new(spec.mean, spec.variance.sqrt()).expect("checked above");
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        for v in noise.iter_mut() {
            *v = normal.sample(&mut rng);
        }
    }
    Ok(noise)
}

/// Adds seeded Gaussian noise per channel and clamps back to [0, 1].
pub fn add_gaussian_noise(f: &Image, spec: &NoiseSpec) -> Result<Image> {
    let noise = gaussian_noise_field(f.height(), f.width(), spec)?;
    let noisy = (f.data() + &noise).mapv(|v| v.clamp(0.0, 1.0));
    Image::from_array(noisy)
}

/// Computes the SA score between predicted and ground-truth label maps.
///
/// Builds the overlap matrix, finds the one-to-one label matching that
/// maximizes total overlap, and divides by the pixel count. Labels left
/// unmatched (when the label counts differ) contribute zero.
pub fn segmentation_accuracy(pred: &Array2<usize>, truth: &Array2<usize>) -> Result<SAScore> {
    if pred.dim() != truth.dim() {
        return Err(Error::ShapeMismatch {
            left: "predicted labels",
            right: "truth labels",
        });
    }
    let kp = pred.iter().max().map_or(0, |&m| m + 1);
    let kt = truth.iter().max().map_or(0, |&m| m + 1);
    let mut overlap = Array2::<u64>::zeros((kp, kt));
    for (p, t) in pred.iter().zip(truth.iter()) {
        overlap[(*p, *t)] += 1;
    }
    let matching = matching::max_overlap_matching(&overlap);
    let matched: u64 = matching.iter().map(|&(p, t)| overlap[(p, t)]).sum();
    Ok(SAScore {
        value: matched as f64 / pred.len() as f64,
        overlap_matrix: overlap,
        matching,
    })
}

/// Number of 4-connected constant-label regions in a label map. A handy
/// measure of how fragmented a segmentation is.
pub fn connected_components(labels: &Array2<usize>) -> usize {
    let (h, w) = labels.dim();
    let mut seen = Array2::from_elem((h, w), false);
    let mut queue = std::collections::VecDeque::new();
    let mut count = 0;
    for i in 0..h {
        for j in 0..w {
            if seen[(i, j)] {
                continue;
            }
            count += 1;
            let label = labels[(i, j)];
            seen[(i, j)] = true;
            queue.push_back((i, j));
            while let Some((y, x)) = queue.pop_front() {
                let mut visit = |ny: usize, nx: usize| {
                    if !seen[(ny, nx)] && labels[(ny, nx)] == label {
                        seen[(ny, nx)] = true;
                        queue.push_back((ny, nx));
                    }
                };
                if y > 0 {
                    visit(y - 1, x);
                }
                if y + 1 < h {
                    visit(y + 1, x);
                }
                if x > 0 {
                    visit(y, x - 1);
                }
                if x + 1 < w {
                    visit(y, x + 1);
                }
            }
        }
    }
    count
}

/// Generates a synthetic phantom with exact ground truth.
///
/// Geometry is fixed by the constants below, scaled by `size`; colors sit on
/// corners of the RGB cube so the histogram peaks are unambiguous.
pub fn make_phantom(kind: PhantomKind, size: usize) -> Result<(Image, Array2<usize>, Palette)> {
    if size < 16 {
        return Err(Error::InvalidParameter {
            what: "phantom size",
            why: format!("need at least 16, got {size}"),
        });
    }
    let s = size as f64;
    let mut labels = Array2::zeros((size, size));
    let palette = match kind {
        PhantomKind::ThreePhase => {
            // Red circle, green axis-aligned rectangle, blue triangle.
            let (cy, cx, r) = (0.30 * s, 0.30 * s, 0.16 * s);
            let (top, bottom, left, right) = (0.55 * s, 0.85 * s, 0.15 * s, 0.45 * s);
            let tri = [(0.20 * s, 0.75 * s), (0.60 * s, 0.55 * s), (0.60 * s, 0.95 * s)];
            for i in 0..size {
                for j in 0..size {
                    let (y, x) = (i as f64, j as f64);
                    if (y - cy).powi(2) + (x - cx).powi(2) <= r * r {
                        labels[(i, j)] = 1;
                    } else if y >= top && y < bottom && x >= left && x < right {
                        labels[(i, j)] = 2;
                    } else if point_in_triangle((y, x), tri) {
                        labels[(i, j)] = 3;
                    }
                }
            }
            Palette::new(vec![
                [1.0, 1.0, 1.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
            ])?
        }
        PhantomKind::SixPhase => {
            // Five overlapping circles, painted in label order so later
            // circles cover earlier ones.
            let r = 0.17 * s;
            let centers = [
                (0.35 * s, 0.30 * s),
                (0.35 * s, 0.50 * s),
                (0.35 * s, 0.70 * s),
                (0.62 * s, 0.40 * s),
                (0.62 * s, 0.60 * s),
            ];
            for (idx, (cy, cx)) in centers.iter().enumerate() {
                for i in 0..size {
                    for j in 0..size {
                        let (y, x) = (i as f64, j as f64);
                        if (y - cy).powi(2) + (x - cx).powi(2) <= r * r {
                            labels[(i, j)] = idx + 1;
                        }
                    }
                }
            }
            Palette::new(vec![
                [1.0, 1.0, 1.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
            ])?
        }
    };
    let mut data = Vec::with_capacity(size * size * 3);
    for i in 0..size {
        for j in 0..size {
            data.extend_from_slice(&palette.color(labels[(i, j)]));
        }
    }
    Ok((Image::new(size, size, data)?, labels, palette))
}

/// Sign of the cross product for the half-plane test.
fn edge_sign(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (p.0 - b.0) * (a.1 - b.1) - (a.0 - b.0) * (p.1 - b.1)
}

/// Point-in-triangle by consistent half-plane signs (boundary counts as in).
fn point_in_triangle(p: (f64, f64), tri: [(f64, f64); 3]) -> bool {
    let d1 = edge_sign(p, tri[0], tri[1]);
    let d2 = edge_sign(p, tri[1], tri[2]);
    let d3 = edge_sign(p, tri[2], tri[0]);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Runs the full pipeline on an image: resolve the palette (given palette >
/// given K > histogram peak detection), solve the relaxed model, and harden.
pub fn segment(f: &Image, options: &SegmentOptions) -> Result<(Segmentation, SolveReport)> {
    if options.k.is_some() && options.palette.is_some() {
        return Err(Error::ConflictingOptions {
            what: "k and palette are mutually exclusive",
        });
    }
    let palette = match (&options.palette, options.k) {
        (Some(p), _) => p.clone(),
        (None, k) => {
            let k = match k {
                Some(k) => k,
                None => detect_k(&build_histogram(f, options.bins)?)?,
            };
            kmeans_restarts(f, k, options.seed, options.kmeans_max_iter, options.restarts)?
                .palette
        }
    };
    let (z, report) = solve(f, &palette, &options.solver)?;
    let labels = harden(&z);
    Ok((
        Segmentation {
            labels,
            palette,
            relaxed_z: z,
        },
        report,
    ))
}

mod matching {
    //! Maximum-overlap one-to-one label matching via the O(n^3) Hungarian
    //! algorithm (shortest augmenting paths with potentials).

    use ndarray::Array2;

    /// Returns the (row, col) pairs of a maximum-total-overlap matching of the
    /// given count matrix. Only pairs within the matrix are returned; when the
    /// matrix is not square, the smaller side is fully matched.
    pub fn max_overlap_matching(overlap: &Array2<u64>) -> Vec<(usize, usize)> {
        let (rows, cols) = overlap.dim();
        if rows == 0 || cols == 0 {
            return Vec::new();
        }
        let n = rows.max(cols);
        // Pad to square and negate to turn max-overlap into min-cost.
        let mut cost = vec![vec![0i64; n]; n];
        for r in 0..rows {
            for c in 0..cols {
                cost[r][c] = -(overlap[(r, c)] as i64);
            }
        }
        let assignment = hungarian_min_cost(&cost);
        let mut pairs: Vec<(usize, usize)> = assignment
            .into_iter()
            .enumerate()
            .filter(|&(r, c)| r < rows && c < cols)
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Min-cost perfect assignment on a square matrix; returns col for each row.
    fn hungarian_min_cost(cost: &[Vec<i64>]) -> Vec<usize> {
        let n = cost.len();
        const INF: i64 = i64::MAX / 4;
        // 1-based potentials and column assignment, standard formulation.
        let mut u = vec![0i64; n + 1];
        let mut v = vec![0i64; n + 1];
        let mut p = vec![0usize; n + 1]; // p[j] = row assigned to column j
        let mut way = vec![0usize; n + 1];
        for i in 1..=n {
            p[0] = i;
            let mut j0 = 0usize;
            let mut minv = vec![INF; n + 1];
            let mut used = vec![false; n + 1];
            loop {
                used[j0] = true;
                let i0 = p[j0];
                let mut delta = INF;
                let mut j1 = 0usize;
                for j in 1..=n {
                    if used[j] {
                        continue;
                    }
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=n {
                    if used[j] {
                        u[p[j]] += delta;
                        v[j] -= delta;
                    } else {
                        minv[j] -= delta;
                    }
                }
                j0 = j1;
                if p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = way[j0];
                p[j0] = p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }
        let mut row_to_col = vec![0usize; n];
        for j in 1..=n {
            if p[j] > 0 {
                row_to_col[p[j] - 1] = j - 1;
            }
        }
        row_to_col
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels_of(rows: &[&[usize]]) -> Array2<usize> {
        let h = rows.len();
        let w = rows[0].len();
        Array2::from_shape_fn((h, w), |(i, j)| rows[i][j])
    }

    #[test]
    fn harden_is_identity_on_hard_fields() {
        let labels = labels_of(&[&[0, 1], &[2, 1]]);
        let z = AssignmentField::one_hot(&labels, 3).unwrap();
        assert_eq!(harden(&z), labels);
    }

    #[test]
    fn harden_breaks_ties_low() {
        let z = AssignmentField::from_array(array![[[0.5]], [[0.5]]]).unwrap();
        assert_eq!(harden(&z)[(0, 0)], 0);
    }

    #[test]
    fn harden_matches_argmax_oracle() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let raw = Array3::from_shape_fn((4, 5, 5), |_| rng.random_range(0.0..1.0));
        let z = crate::simplex::project_field(&raw).unwrap();
        let hard = harden(&z);
        for i in 0..5 {
            for j in 0..5 {
                let mut best = 0;
                for kk in 1..4 {
                    if z.data()[(kk, i, j)] > z.data()[(best, i, j)] {
                        best = kk;
                    }
                }
                assert_eq!(hard[(i, j)], best);
            }
        }
    }

    #[test]
    fn noise_zero_variance_zero_mean_is_identity() {
        let f = Image::new(2, 2, vec![0.25; 12]).unwrap();
        let spec = NoiseSpec {
            mean: 0.0,
            variance: 0.0,
            seed: 1,
        };
        assert_eq!(add_gaussian_noise(&f, &spec).unwrap(), f);
    }

    #[test]
    fn noise_pure_shift() {
        let f = Image::new(2, 2, vec![0.0; 12]).unwrap();
        let spec = NoiseSpec {
            mean: 0.5,
            variance: 0.0,
            seed: 1,
        };
        let out = add_gaussian_noise(&f, &spec).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn noise_unclamped_sample_variance() {
        // 10^4 pixels, sigma^2 = 0.1: the generator's raw (unclamped) samples
        // must land within 5% of the requested variance.
        let spec = NoiseSpec {
            mean: 0.0,
            variance: 0.1,
            seed: 7,
        };
        let noise = gaussian_noise_field(100, 100, &spec).unwrap();
        let n = noise.len() as f64;
        let mean = noise.iter().sum::<f64>() / n;
        let var = noise.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        assert!(
            (var - 0.1).abs() < 0.005,
            "sample variance {var} not within 5% of 0.1"
        );
        assert!(mean.abs() < 0.01);
    }

    #[test]
    fn noise_seed_reproducible() {
        let f = make_phantom(PhantomKind::ThreePhase, 32).unwrap().0;
        let spec = NoiseSpec {
            mean: 0.0,
            variance: 0.3,
            seed: 9,
        };
        let a = add_gaussian_noise(&f, &spec).unwrap();
        let b = add_gaussian_noise(&f, &spec).unwrap();
        assert_eq!(a, b);
        let c = add_gaussian_noise(
            &f,
            &NoiseSpec {
                seed: 10,
                ..spec
            },
        )
        .unwrap();
        assert_ne!(a, c);
        // Clamping keeps the image valid.
        assert!(a.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn sa_perfect_prediction() {
        let t = labels_of(&[&[0, 0, 1], &[2, 2, 1]]);
        let s = segmentation_accuracy(&t, &t).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn sa_permutation_invariant() {
        let t = labels_of(&[&[0, 0, 1], &[2, 2, 1]]);
        let p = t.mapv(|l| [2, 0, 1][l]);
        let s = segmentation_accuracy(&p, &t).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn sa_hand_worked_quarter_case() {
        // pred [0,0,1,1] vs truth [0,1,1,1]: best matching pairs 0-0 and 1-1,
        // overlap 1 + 2 = 3 of 4 pixels.
        let pred = labels_of(&[&[0, 0, 1, 1]]);
        let truth = labels_of(&[&[0, 1, 1, 1]]);
        let s = segmentation_accuracy(&pred, &truth).unwrap();
        assert_eq!(s.value, 0.75);
        assert_eq!(s.matching, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn sa_extra_predicted_labels_contribute_zero() {
        // Three predicted labels against two truth labels: one goes unmatched.
        let pred = labels_of(&[&[0, 1, 2, 2]]);
        let truth = labels_of(&[&[0, 0, 1, 1]]);
        let s = segmentation_accuracy(&pred, &truth).unwrap();
        assert_eq!(s.value, 0.75);
        assert_eq!(s.matching.len(), 2);
    }

    #[test]
    fn sa_dimension_mismatch_rejected() {
        let a = Array2::zeros((2, 2));
        let b = Array2::zeros((2, 3));
        assert!(segmentation_accuracy(&a, &b).is_err());
    }

    #[test]
    fn components_counts_regions() {
        let l = labels_of(&[&[0, 0, 1], &[0, 1, 1], &[2, 2, 2]]);
        assert_eq!(connected_components(&l), 3);
        // Diagonal contact does not connect (4-connectivity).
        let diag = labels_of(&[&[0, 1], &[1, 0]]);
        assert_eq!(connected_components(&diag), 4);
        let solid = Array2::zeros((4, 4));
        assert_eq!(connected_components(&solid), 1);
    }

    #[test]
    fn three_phase_phantom_has_four_colors() {
        let (img, labels, palette) = make_phantom(PhantomKind::ThreePhase, 64).unwrap();
        assert_eq!(palette.k(), 4);
        let mut seen = std::collections::HashSet::new();
        for i in 0..64 {
            for j in 0..64 {
                let p = img.pixel(i, j);
                seen.insert([p[0].to_bits(), p[1].to_bits(), p[2].to_bits()]);
                // Image agrees with the label map everywhere.
                assert_eq!(p, palette.color(labels[(i, j)]));
            }
        }
        assert_eq!(seen.len(), 4);
        // All four labels actually occur.
        for l in 0..4 {
            assert!(labels.iter().any(|&x| x == l), "label {l} missing");
        }
    }

    #[test]
    fn six_phase_phantom_has_six_colors() {
        let (img, labels, palette) = make_phantom(PhantomKind::SixPhase, 64).unwrap();
        assert_eq!(palette.k(), 6);
        let mut seen = std::collections::HashSet::new();
        for i in 0..64 {
            for j in 0..64 {
                let p = img.pixel(i, j);
                seen.insert([p[0].to_bits(), p[1].to_bits(), p[2].to_bits()]);
            }
        }
        assert_eq!(seen.len(), 6);
        for l in 0..6 {
            assert!(labels.iter().any(|&x| x == l), "label {l} missing");
        }
    }

    #[test]
    fn six_phase_histogram_has_six_peaks() {
        let (img, _, _) = make_phantom(PhantomKind::SixPhase, 64).unwrap();
        let hist = build_histogram(&img, 16).unwrap();
        assert_eq!(detect_k(&hist).unwrap(), 6);
    }

    #[test]
    fn phantom_too_small_rejected() {
        assert!(make_phantom(PhantomKind::ThreePhase, 8).is_err());
    }

    #[test]
    fn phantom_kind_parses() {
        assert_eq!(
            PhantomKind::from_str("three-phase").unwrap(),
            PhantomKind::ThreePhase
        );
        assert_eq!(
            PhantomKind::from_str("six-phase").unwrap(),
            PhantomKind::SixPhase
        );
        assert!(PhantomKind::from_str("seven-phase").is_err());
    }

    #[test]
    fn segment_uniform_image_picks_nearest_color() {
        let f = Image::new(4, 4, vec![0.1; 48]).unwrap();
        let palette = Palette::new(vec![[0.0; 3], [1.0; 3]]).unwrap();
        let options = SegmentOptions {
            palette: Some(palette),
            ..Default::default()
        };
        let (seg, report) = segment(&f, &options).unwrap();
        assert!(report.converged);
        assert!(seg.labels.iter().all(|&l| l == 0));
        assert_eq!(seg.render().pixel(0, 0), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn segment_rejects_conflicting_options() {
        let f = Image::new(4, 4, vec![0.1; 48]).unwrap();
        let options = SegmentOptions {
            k: Some(2),
            palette: Some(Palette::new(vec![[0.0; 3], [1.0; 3]]).unwrap()),
            ..Default::default()
        };
        assert!(matches!(
            segment(&f, &options).unwrap_err(),
            Error::ConflictingOptions { .. }
        ));
    }

    #[test]
    fn segment_exact_colors_recovers_map() {
        // Image built from palette colors with a small lambda: labels must
        // reproduce the exact color map.
        let (img, truth, palette) = make_phantom(PhantomKind::ThreePhase, 32).unwrap();
        let options = SegmentOptions {
            palette: Some(palette),
            solver: SolverConfig {
                lambda: 0.01,
                ..Default::default()
            },
            ..Default::default()
        };
        let (seg, _) = segment(&img, &options).unwrap();
        assert_eq!(seg.labels, truth);
    }

    #[test]
    fn clean_phantom_auto_pipeline_perfect_sa() {
        // Full automatic pipeline (histogram K detection + K-means + solve)
        // on a clean phantom: every pixel must land on its true label.
        let (img, truth, _) = make_phantom(PhantomKind::ThreePhase, 64).unwrap();
        let (seg, _) = segment(&img, &SegmentOptions::default()).unwrap();
        let sa = segmentation_accuracy(&seg.labels, &truth).unwrap();
        assert_eq!(sa.value, 1.0);
    }

    #[test]
    fn sa_of_own_hardening_is_one() {
        let (img, _, palette) = make_phantom(PhantomKind::SixPhase, 32).unwrap();
        let options = SegmentOptions {
            palette: Some(palette),
            ..Default::default()
        };
        let (seg, _) = segment(&img, &options).unwrap();
        let sa = segmentation_accuracy(&seg.labels, &harden(&seg.relaxed_z)).unwrap();
        assert_eq!(sa.value, 1.0);
    }
}
