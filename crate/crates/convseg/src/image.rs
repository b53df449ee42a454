//! RGB images and color palettes.

use ndarray::Array3;

use crate::error::{Error, Result};

/// An RGB image with intensities in [0, 1], stored as an (H, W, 3) array of f64.
///
/// Inputs with 8-bit depth are divided by 255 on load; all internal math is
/// double precision so the solver tolerances stay meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array3<f64>,
}

impl Image {
    /// Builds an image from row-major pixel data (R, G, B per pixel).
    ///
    /// Fails if the buffer length is not `height * width * 3` or any value
    /// falls outside [0, 1].
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter {
                what: "image size",
                why: format!("{height}x{width} has a zero dimension"),
            });
        }
        if data.len() != height * width * 3 {
            return Err(Error::DimensionMismatch {
                expected: height * width * 3,
                got: data.len(),
            });
        }
        for &v in &data {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "intensity",
                    value: v,
                });
            }
        }
        let data = Array3::from_shape_vec((height, width, 3), data)
            .expect("shape checked above");
        Ok(Self { data })
    }

    /// Wraps an (H, W, 3) array, applying the same checks as [`Image::new`].
    pub fn from_array(data: Array3<f64>) -> Result<Self> {
        let (h, w, c) = data.dim();
        if c != 3 {
            return Err(Error::DimensionMismatch {
                expected: h * w * 3,
                got: h * w * c,
            });
        }
        for &v in &data {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    what: "intensity",
                    value: v,
                });
            }
        }
        if h == 0 || w == 0 {
            return Err(Error::InvalidParameter {
                what: "image size",
                why: format!("{h}x{w} has a zero dimension"),
            });
        }
        Ok(Self { data })
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    /// Number of pixels (`n` in the model).
    pub fn pixels(&self) -> usize {
        self.height() * self.width()
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    /// The RGB triple at pixel (row, col).
    pub fn pixel(&self, row: usize, col: usize) -> [f64; 3] {
        [
            self.data[(row, col, 0)],
            self.data[(row, col, 1)],
            self.data[(row, col, 2)],
        ]
    }
}

/// An ordered set of K distinct RGB centroids c_k, each component in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Palette {
    colors: Vec<[f64; 3]>,
}

impl Palette {
    /// Validates K >= 2, range, and pairwise distinctness.
    pub fn new(colors: Vec<[f64; 3]>) -> Result<Self> {
        if colors.len() < 2 {
            return Err(Error::PaletteTooSmall { k: colors.len() });
        }
        for c in &colors {
            for &v in c {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        what: "palette component",
                        value: v,
                    });
                }
            }
        }
        for i in 0..colors.len() {
            for j in (i + 1)..colors.len() {
                if colors[i] == colors[j] {
                    return Err(Error::PaletteDuplicate {
                        first: i,
                        second: j,
                    });
                }
            }
        }
        Ok(Self { colors })
    }

    /// Number of colors K.
    pub fn k(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[[f64; 3]] {
        &self.colors
    }

    pub fn color(&self, k: usize) -> [f64; 3] {
        self.colors[k]
    }

    /// Reorders the palette by an index permutation (used in equivariance tests).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.colors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.colors.len(),
                got: perm.len(),
            });
        }
        Self::new(perm.iter().map(|&i| self.colors[i]).collect())
    }
}

/// Squared Euclidean distance between two RGB triples.
pub(crate) fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dr = a[0] - b[0];
    let dg = a[1] - b[1];
    let db = a[2] - b[2];
    dr * dr + dg * dg + db * db
}
