//! Discrete differential operators, the cost-field lifting, and the model energy.
//!
//! The gradient uses forward differences with a Neumann boundary (zero at the
//! last column/row); the divergence is its exact negative adjoint, so
//! `<grad z, p> + <z, div p> = 0` holds in exact arithmetic. The solver's
//! step-size condition relies on the standard operator-norm bound
//! `||grad||^2 <= 8` for this stencil.

use ndarray::{Array3, Array4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::CostField;
use crate::image::{Image, Palette};

/// The three terms of the model energy
/// `E(z) = lambda*||grad z||_1 + (mu/2)*||grad z||_2^2 + <z, w>`,
/// each already weighted, plus their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// lambda * sum over labels and pixels of sqrt(gx^2 + gy^2).
    pub tv_term: f64,
    /// (mu/2) * squared Frobenius norm of the gradient.
    pub smooth_term: f64,
    /// <z, w>, the lifted data fidelity.
    pub data_term: f64,
    /// tv_term + smooth_term + data_term.
    pub total: f64,
}

/// Forward-difference gradient of a label-major field, shape (K, H, W) ->
/// (K, H, W, 2). Component 0 is the x-derivative (along columns), component 1
/// the y-derivative (along rows); both are zero on the trailing boundary.
pub fn gradient(z: &Array3<f64>) -> Array4<f64> {
    let (k, h, w) = z.dim();
    let mut g = Array4::zeros((k, h, w, 2));
    gradient_into(z, &mut g);
    g
}

/// In-place form of [`gradient`] for the solver hot loop; overwrites every
/// element of `out`.
pub(crate) fn gradient_into(z: &Array3<f64>, out: &mut Array4<f64>) {
    let (k, h, w) = z.dim();
    debug_assert_eq!(out.dim(), (k, h, w, 2));
    if let (Some(zs), Some(os)) = (z.as_slice(), out.as_slice_mut()) {
        for kk in 0..k {
            for i in 0..h {
                let row = (kk * h + i) * w;
                let grow = row * 2;
                for j in 0..w - 1 {
                    os[grow + 2 * j] = zs[row + j + 1] - zs[row + j];
                }
                os[grow + 2 * (w - 1)] = 0.0;
                if i + 1 < h {
                    for j in 0..w {
                        os[grow + 2 * j + 1] = zs[row + w + j] - zs[row + j];
                    }
                } else {
                    for j in 0..w {
                        os[grow + 2 * j + 1] = 0.0;
                    }
                }
            }
        }
        return;
    }
    for kk in 0..k {
        for i in 0..h {
            for j in 0..w {
                out[(kk, i, j, 0)] = if j + 1 < w {
                    z[(kk, i, j + 1)] - z[(kk, i, j)]
                } else {
                    0.0
                };
                out[(kk, i, j, 1)] = if i + 1 < h {
                    z[(kk, i + 1, j)] - z[(kk, i, j)]
                } else {
                    0.0
                };
            }
        }
    }
}

/// Negative adjoint of [`gradient`]: backward differences with the matching
/// boundary stencil, so the adjoint identity is exact. Input shape
/// (K, H, W, 2), output (K, H, W).
pub fn divergence(p: &Array4<f64>) -> Array3<f64> {
    let (k, h, w, _) = p.dim();
    let mut out = Array3::zeros((k, h, w));
    divergence_into(p, &mut out);
    out
}

/// In-place form of [`divergence`]; zeroes `out` and accumulates the x pass
/// before the y pass per label plane, matching the allocating version exactly.
pub(crate) fn divergence_into(p: &Array4<f64>, out: &mut Array3<f64>) {
    let (k, h, w, _) = p.dim();
    debug_assert_eq!(out.dim(), (k, h, w));
    if let (Some(ps), Some(os)) = (p.as_slice(), out.as_slice_mut()) {
        os.fill(0.0);
        for kk in 0..k {
            if w > 1 {
                for i in 0..h {
                    let row = (kk * h + i) * w;
                    let prow = row * 2;
                    os[row] += ps[prow];
                    for j in 1..w - 1 {
                        os[row + j] += ps[prow + 2 * j] - ps[prow + 2 * (j - 1)];
                    }
                    os[row + w - 1] -= ps[prow + 2 * (w - 2)];
                }
            }
            if h > 1 {
                let plane = kk * h * w;
                for j in 0..w {
                    os[plane + j] += ps[(plane + j) * 2 + 1];
                    for i in 1..h - 1 {
                        os[plane + i * w + j] +=
                            ps[(plane + i * w + j) * 2 + 1] - ps[(plane + (i - 1) * w + j) * 2 + 1];
                    }
                    os[plane + (h - 1) * w + j] -= ps[(plane + (h - 2) * w + j) * 2 + 1];
                }
            }
        }
        return;
    }
    out.fill(0.0);
    for kk in 0..k {
        if w > 1 {
            for i in 0..h {
                out[(kk, i, 0)] += p[(kk, i, 0, 0)];
                for j in 1..w - 1 {
                    out[(kk, i, j)] += p[(kk, i, j, 0)] - p[(kk, i, j - 1, 0)];
                }
                out[(kk, i, w - 1)] -= p[(kk, i, w - 2, 0)];
            }
        }
        if h > 1 {
            for j in 0..w {
                out[(kk, 0, j)] += p[(kk, 0, j, 1)];
                for i in 1..h - 1 {
                    out[(kk, i, j)] += p[(kk, i, j, 1)] - p[(kk, i - 1, j, 1)];
                }
                out[(kk, h - 1, j)] -= p[(kk, h - 2, j, 1)];
            }
        }
    }
}

/// Lifts an image against a palette: w_{k,n} = 1/2 ||f_n - c_k||^2.
pub fn cost_field(f: &Image, palette: &Palette) -> CostField {
    let (h, w) = (f.height(), f.width());
    let k = palette.k();
    let mut data = Array3::zeros((k, h, w));
    for kk in 0..k {
        let c = palette.color(kk);
        for i in 0..h {
            for j in 0..w {
                data[(kk, i, j)] = 0.5 * crate::image::dist2(f.pixel(i, j), c);
            }
        }
    }
    CostField::from_array(data).expect("squared distances are finite and nonnegative")
}

/// Evaluates the model energy of a field against a cost field.
///
/// The TV term couples x and y isotropically per (label, pixel) — the same
/// coupling the solver's shrinkage step uses — but not across labels.
pub fn energy(z: &Array3<f64>, w: &CostField, lambda: f64, mu: f64) -> Result<EnergyBreakdown> {
    if lambda < 0.0 {
        return Err(Error::NegativeWeight {
            what: "lambda",
            value: lambda,
        });
    }
    if mu < 0.0 {
        return Err(Error::NegativeWeight {
            what: "mu",
            value: mu,
        });
    }
    if z.dim() != w.data().dim() {
        return Err(Error::ShapeMismatch {
            left: "assignment field",
            right: "cost field",
        });
    }
    let g = gradient(z);
    let (k, h, wd, _) = g.dim();
    let mut tv = 0.0;
    let mut sq = 0.0;
    for kk in 0..k {
        for i in 0..h {
            for j in 0..wd {
                let gx = g[(kk, i, j, 0)];
                let gy = g[(kk, i, j, 1)];
                let m2 = gx * gx + gy * gy;
                tv += m2.sqrt();
                sq += m2;
            }
        }
    }
    let data_term: f64 = z.iter().zip(w.data().iter()).map(|(a, b)| a * b).sum();
    let tv_term = lambda * tv;
    let smooth_term = 0.5 * mu * sq;
    Ok(EnergyBreakdown {
        tv_term,
        smooth_term,
        data_term,
        total: tv_term + smooth_term + data_term,
    })
}
