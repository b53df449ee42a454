//! Label-major dense fields: assignment (z), cost (w), and vector (gradient/dual) arrays.
//!
//! Everything is stored with the label axis first — K planes of H x W — so a
//! pixel's K-vector is a strided column. Simplex projection and hardening walk
//! those columns.

use ndarray::{Array3, Array4};

use crate::error::{Error, Result};
use crate::image::{Image, Palette};

/// Tolerance for the per-pixel unit-sum check on relaxed assignment fields.
/// Projection is exact up to rounding; 1e-9 catches logic errors without
/// false alarms.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A per-pixel weight vector over K labels, on the probability simplex.
///
/// Shape (K, H, W). Each pixel's K weights are nonnegative and sum to 1
/// within [`SIMPLEX_TOL`]; a *hard* field additionally has weights in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentField {
    data: Array3<f64>,
}

impl AssignmentField {
    /// Wraps a (K, H, W) array after checking the simplex invariants.
    pub fn from_array(data: Array3<f64>) -> Result<Self> {
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    what: "assignment field",
                });
            }
            if v < 0.0 {
                return Err(Error::NegativeWeight {
                    what: "assignment weight",
                    value: v,
                });
            }
        }
        let (k, h, w) = data.dim();
        if k == 0 || h == 0 || w == 0 {
            return Err(Error::InvalidParameter {
                what: "field shape",
                why: format!("{k}x{h}x{w} has a zero dimension"),
            });
        }
        for i in 0..h {
            for j in 0..w {
                let mut sum = 0.0;
                for kk in 0..k {
                    sum += data[(kk, i, j)];
                }
                if (sum - 1.0).abs() > SIMPLEX_TOL {
                    return Err(Error::InvalidParameter {
                        what: "assignment field",
                        why: format!("pixel ({i}, {j}) sums to {sum}, not 1"),
                    });
                }
            }
        }
        Ok(Self { data })
    }

    /// One-hot field from a label map: z_{k,n} = 1 iff labels[n] = k.
    pub fn one_hot(labels: &ndarray::Array2<usize>, k: usize) -> Result<Self> {
        let (h, w) = labels.dim();
        if k == 0 {
            return Err(Error::InvalidParameter {
                what: "label count",
                why: "k = 0".to_string(),
            });
        }
        let mut data = Array3::zeros((k, h, w));
        for i in 0..h {
            for j in 0..w {
                let l = labels[(i, j)];
                if l >= k {
                    return Err(Error::InvalidParameter {
                        what: "label map",
                        why: format!("label {l} at ({i}, {j}) exceeds k = {k}"),
                    });
                }
                data[(l, i, j)] = 1.0;
            }
        }
        Ok(Self { data })
    }

    /// Number of labels K.
    pub fn k(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array3<f64> {
        self.data
    }

    /// True when every weight is exactly 0 or 1.
    pub fn is_hard(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }
}

/// The lifted data costs w_{k,n} = 1/2 ||f_n - c_k||^2, shape (K, H, W).
#[derive(Debug, Clone, PartialEq)]
pub struct CostField {
    data: Array3<f64>,
}

impl CostField {
    /// Wraps a (K, H, W) array of nonnegative, finite costs.
    pub fn from_array(data: Array3<f64>) -> Result<Self> {
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "cost field" });
            }
            if v < 0.0 {
                return Err(Error::NegativeWeight {
                    what: "cost",
                    value: v,
                });
            }
        }
        Ok(Self { data })
    }

    pub fn k(&self) -> usize {
        self.data.dim().0
    }

    pub fn height(&self) -> usize {
        self.data.dim().1
    }

    pub fn width(&self) -> usize {
        self.data.dim().2
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }
}

/// A per-label, per-pixel 2-vector field, shape (K, H, W, 2).
///
/// The last axis holds the x- and y-components. Used for gradients, the
/// auxiliary variable v, and the dual variable q.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    data: Array4<f64>,
}

impl VectorField {
    /// Wraps a (K, H, W, 2) array after checking all entries are finite.
    pub fn from_array(data: Array4<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "vector field",
            });
        }
        Ok(Self { data })
    }

    /// The all-zero field of the given shape.
    pub fn zeros(k: usize, height: usize, width: usize) -> Self {
        Self {
            data: Array4::zeros((k, height, width, 2)),
        }
    }

    pub fn data(&self) -> &Array4<f64> {
        &self.data
    }

    pub fn into_array(self) -> Array4<f64> {
        self.data
    }
}

/// Reconstructs the image u_n = sum_k z_{k,n} c_k (a per-pixel convex
/// combination of palette colors; for a hard field, exactly one color).
pub fn reconstruct(z: &AssignmentField, palette: &Palette) -> Result<Image> {
    if z.k() != palette.k() {
        return Err(Error::LabelMismatch {
            field: z.k(),
            palette: palette.k(),
        });
    }
    let (k, h, w) = z.data.dim();
    let mut out = Array3::<f64>::zeros((h, w, 3));
    for kk in 0..k {
        let c = palette.color(kk);
        for i in 0..h {
            for j in 0..w {
                let zv = z.data[(kk, i, j)];
                out[(i, j, 0)] += zv * c[0];
                out[(i, j, 1)] += zv * c[1];
                out[(i, j, 2)] += zv * c[2];
            }
        }
    }
    // Convex combinations stay in [0,1] up to rounding; clamp the dust so the
    // image invariant holds exactly.
    out.mapv_inplace(|v| v.clamp(0.0, 1.0));
    Image::from_array(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    #[test]
    fn one_hot_selects_single_color() {
        let labels = Array2::from_elem((2, 3), 0usize);
        let z = AssignmentField::one_hot(&labels, 2).unwrap();
        let palette = Palette::new(vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let img = reconstruct(&z, &palette).unwrap();
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(img.pixel(i, j), [1.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn relaxed_reconstruction_mixes_linearly() {
        let data = array![[[0.5]], [[0.5]]];
        let z = AssignmentField::from_array(data).unwrap();
        let palette = Palette::new(vec![[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let img = reconstruct(&z, &palette).unwrap();
        assert_eq!(img.pixel(0, 0), [0.5, 0.0, 0.5]);
    }

    #[test]
    fn reconstruction_is_linear_in_z() {
        // reconstruct(a*z1 + (1-a)*z2) == a*reconstruct(z1) + (1-a)*reconstruct(z2)
        let z1 = AssignmentField::from_array(array![[[1.0, 0.3]], [[0.0, 0.7]]]).unwrap();
        let z2 = AssignmentField::from_array(array![[[0.2, 0.9]], [[0.8, 0.1]]]).unwrap();
        let palette = Palette::new(vec![[0.9, 0.1, 0.4], [0.2, 0.6, 0.8]]).unwrap();
        let alpha = 0.3;
        let mixed = AssignmentField::from_array(
            alpha * z1.data() + (1.0 - alpha) * z2.data(),
        )
        .unwrap();
        let direct = reconstruct(&mixed, &palette).unwrap();
        let a = reconstruct(&z1, &palette).unwrap();
        let b = reconstruct(&z2, &palette).unwrap();
        for (d, (x, y)) in direct.data().iter().zip(a.data().iter().zip(b.data().iter())) {
            assert!((d - (alpha * x + (1.0 - alpha) * y)).abs() < 1e-12);
        }
    }

    #[test]
    fn label_mismatch_rejected() {
        let z = AssignmentField::one_hot(&Array2::zeros((1, 1)), 3).unwrap();
        let palette = Palette::new(vec![[0.0; 3], [1.0; 3]]).unwrap();
        assert!(matches!(
            reconstruct(&z, &palette).unwrap_err(),
            Error::LabelMismatch { field: 3, palette: 2 }
        ));
    }

    #[test]
    fn simplex_sum_enforced() {
        let bad = array![[[0.5]], [[0.6]]];
        assert!(AssignmentField::from_array(bad).is_err());
        let neg = array![[[1.5]], [[-0.5]]];
        assert!(AssignmentField::from_array(neg).is_err());
    }

    #[test]
    fn hard_detection() {
        let labels = Array2::from_elem((2, 2), 1usize);
        let z = AssignmentField::one_hot(&labels, 2).unwrap();
        assert!(z.is_hard());
        let soft = AssignmentField::from_array(array![[[0.5]], [[0.5]]]).unwrap();
        assert!(!soft.is_hard());
    }

    #[test]
    fn vector_field_rejects_nan() {
        let mut data = ndarray::Array4::zeros((1, 2, 2, 2));
        data[(0, 0, 0, 0)] = f64::NAN;
        assert!(VectorField::from_array(data).is_err());
    }
}
