//! Euclidean projection onto the probability simplex, per pixel.
//!
//! Sort-based algorithm: sort a copy of the vector in descending order, find
//! the largest prefix j with u_j > (sum of the prefix - 1)/j, subtract that
//! threshold everywhere, and clip at zero. Small vectors (every realistic
//! palette) use an insertion sort or a fully unrolled K = 3 path; the cost is
//! negligible either way. A final explicit renormalization absorbs rounding
//! so downstream unit-sum checks never trip.

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::fields::AssignmentField;

/// Projects a K-vector onto the simplex { x >= 0, sum x = 1 }.
///
/// Returns the unique minimizer of ||x - y||^2 over the simplex. Fails on
/// NaN input; infinities are rejected too since the projection is undefined.
pub fn project_simplex(y: &[f64]) -> Result<Vec<f64>> {
    let mut out = y.to_vec();
    let mut sorted = Vec::with_capacity(y.len());
    project_in_place(&mut out, &mut sorted)?;
    Ok(out)
}

/// In-place core: overwrites `y` with its projection, using `sorted` as a
/// scratch buffer so hot loops can reuse the allocation.
fn project_in_place(y: &mut [f64], sorted: &mut Vec<f64>) -> Result<()> {
    if y.is_empty() {
        return Err(Error::InvalidParameter {
            what: "simplex projection",
            why: "empty vector".to_string(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "simplex projection input",
        });
    }
    project_validated(y, sorted);
    Ok(())
}

/// The projection itself, after the caller has checked for emptiness and
/// non-finite entries.
fn project_validated(y: &mut [f64], sorted: &mut Vec<f64>) {
    if let [y0, y1, y2] = *y {
        // Fully unrolled three-label path; K = 3 runs once per pixel per
        // solver iteration. The compare/swap network below is the insertion
        // sort of the general path with the provably idle compares kept.
        let (a, b) = if y1 > y0 { (y1, y0) } else { (y0, y1) };
        let (b, c) = if y2 > b { (y2, b) } else { (b, y2) };
        let (a, b) = if b > a { (b, a) } else { (a, b) };

        let mut theta = 0.0;
        let t = (a - 1.0) / 1.0;
        if a > t {
            theta = t;
        }
        let cum = a + b;
        let t = (cum - 1.0) / 2.0;
        if b > t {
            theta = t;
        }
        let cum = cum + c;
        let t = (cum - 1.0) / 3.0;
        if c > t {
            theta = t;
        }

        let p0 = (y0 - theta).max(0.0);
        let p1 = (y1 - theta).max(0.0);
        let p2 = (y2 - theta).max(0.0);
        let sum = p0 + p1 + p2;
        y[0] = p0 / sum;
        y[1] = p1 / sum;
        y[2] = p2 / sum;
        return;
    }
    sorted.clear();
    sorted.extend_from_slice(y);
    // Stable descending sort; ties keep their original relative order, so the
    // threshold below is deterministic across platforms. Insertion sort beats
    // the generic sort for the tiny K this sees every pixel, every iteration.
    if sorted.len() <= 64 {
        for i in 1..sorted.len() {
            let mut j = i;
            while j > 0 && sorted[j] > sorted[j - 1] {
                sorted.swap(j, j - 1);
                j -= 1;
            }
        }
    } else {
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite values compare"));
    }

    let mut cum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cum += u;
        let t = (cum - 1.0) / (j + 1) as f64;
        if u > t {
            theta = t;
        }
    }

    let mut sum = 0.0;
    for v in y.iter_mut() {
        *v = (*v - theta).max(0.0);
        sum += *v;
    }
    // sum > 0 is guaranteed: the largest entry always clears its threshold.
    for v in y.iter_mut() {
        *v /= sum;
    }
}

/// Projects every pixel's K-vector of a (K, H, W) array onto the simplex,
/// in place. This is the solver's per-iteration `P_Delta`.
pub fn project_field_in_place(z: &mut Array3<f64>) -> Result<()> {
    let (k, h, w) = z.dim();
    let hw = h * w;
    if hw == 0 {
        return Ok(());
    }
    if k == 0 {
        return Err(Error::InvalidParameter {
            what: "simplex projection",
            why: "empty vector".to_string(),
        });
    }
    let mut col = vec![0.0; k];
    let mut sorted = Vec::with_capacity(k);
    if let Some(zs) = z.as_slice_mut() {
        // Validate the whole field up front so the pixel loop can skip the
        // per-column checks.
        if !zs.iter().fold(true, |ok, v| ok & v.is_finite()) {
            return Err(Error::NonFinite {
                what: "simplex projection input",
            });
        }
        // Label planes are hw apart in the flat layout; gather each pixel's
        // column across them.
        let mut planes: Vec<&mut [f64]> = zs.chunks_exact_mut(hw).collect();
        for pix in 0..hw {
            for (c, plane) in col.iter_mut().zip(planes.iter()) {
                *c = plane[pix];
            }
            project_validated(&mut col, &mut sorted);
            for (&c, plane) in col.iter().zip(planes.iter_mut()) {
                plane[pix] = c;
            }
        }
        return Ok(());
    }
    for i in 0..h {
        for j in 0..w {
            for kk in 0..k {
                col[kk] = z[(kk, i, j)];
            }
            project_in_place(&mut col, &mut sorted)?;
            for kk in 0..k {
                z[(kk, i, j)] = col[kk];
            }
        }
    }
    Ok(())
}

/// Projects a field out of place and wraps the result as a validated
/// [`AssignmentField`].
pub fn project_field(z0: &Array3<f64>) -> Result<AssignmentField> {
    let mut z = z0.clone();
    project_field_in_place(&mut z)?;
    AssignmentField::from_array(z)
}
