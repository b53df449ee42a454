//! Primal-dual (Chambolle-Pock) iteration for the relaxed segmentation model.
//!
//! One iteration, in order:
//!   1. dual ascent      q <- q + sigma * (v_bar - grad z_bar)
//!   2. shrinkage        v <- shrink(t),  t = (tau/(mu*tau + 1)) * (v/tau - q)
//!   3. projected step   z <- P_simplex(z - tau * (w + div q))
//!   4. over-relaxation  z_bar <- 2 z - z_prev,  v_bar <- 2 v - v_prev
//!
//! The shrinkage is isotropic per (label, pixel): the (x, y) pair shrinks
//! jointly by its magnitude, with threshold lambda*tau/(mu*tau + 1).

use ndarray::{Array3, Array4, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{AssignmentField, CostField};
use crate::image::{Image, Palette};
use crate::operators::{cost_field, divergence_into, energy, EnergyBreakdown};
use crate::simplex::project_field_in_place;

/// Solver parameters. `Default` gives the documented CLI defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// TV weight lambda >= 0.
    pub lambda: f64,
    /// Squared-gradient weight mu >= 0.
    pub mu: f64,
    /// Dual step sigma > 0.
    pub sigma: f64,
    /// Primal step tau > 0.
    pub tau: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Relative-change stopping threshold on z.
    pub tol: f64,
    /// Record the energy every this many iterations (0 = off).
    pub record_energy_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        // sigma = tau = 1/sqrt(8) saturates the convergence condition
        // sigma*tau*L^2 <= 1 with the operator-norm bound L^2 = 8.
        let step = 1.0 / 8f64.sqrt();
        Self {
            lambda: 0.1,
            mu: 0.01,
            sigma: step,
            tau: step,
            max_iter: 2000,
            tol: 1e-5,
            record_energy_every: 0,
        }
    }
}

impl SolverConfig {
    /// Checks parameter ranges and the step-size condition
    /// sigma*tau*8 <= 1 (up to rounding slack for the saturating default).
    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(Error::NegativeWeight {
                what: "lambda",
                value: self.lambda,
            });
        }
        if self.mu < 0.0 || !self.mu.is_finite() {
            return Err(Error::NegativeWeight {
                what: "mu",
                value: self.mu,
            });
        }
        if !(self.sigma > 0.0 && self.tau > 0.0)
            || !self.sigma.is_finite()
            || !self.tau.is_finite()
            || self.sigma * self.tau * 8.0 > 1.0 + 1e-12
        {
            return Err(Error::StepSize {
                sigma: self.sigma,
                tau: self.tau,
            });
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter {
                what: "max_iter",
                why: "must be positive".to_string(),
            });
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidParameter {
                what: "tol",
                why: format!("must be a positive finite number, got {}", self.tol),
            });
        }
        Ok(())
    }
}

/// The solver's owned iteration state.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Primal assignment iterate, shape (K, H, W); on the simplex after
    /// every iteration.
    pub z: Array3<f64>,
    /// Auxiliary gradient-like variable, shape (K, H, W, 2).
    pub v: Array4<f64>,
    /// Dual variable, shape (K, H, W, 2).
    pub q: Array4<f64>,
    /// Over-relaxed primal: 2*z_next - z_prev.
    pub z_bar: Array3<f64>,
    /// Over-relaxed auxiliary: 2*v_next - v_prev.
    pub v_bar: Array4<f64>,
    /// Iterations completed.
    pub iter: usize,
    /// Relative z-change at the most recent iteration.
    pub last_rel_change: f64,
}

/// One energy sample from the optional trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergySample {
    pub iteration: usize,
    pub energy: EnergyBreakdown,
}

/// Outcome metadata for one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations_run: usize,
    pub converged: bool,
    pub final_rel_change: f64,
    /// Energy samples; empty unless `record_energy_every > 0`. The primal-dual
    /// iteration does not guarantee monotone energy, so this is reported,
    /// never asserted monotone.
    pub energy_trace: Vec<EnergySample>,
}

/// Initializes the iteration: q = v = v_bar = 0 and z = z_bar set to the
/// one-hot nearest-centroid assignment (argmin over labels of the cost,
/// ties to the lowest label).
pub fn initialize_state(w: &CostField) -> SolverState {
    let (k, h, wd) = w.data().dim();
    let mut z = Array3::zeros((k, h, wd));
    for i in 0..h {
        for j in 0..wd {
            let mut best = 0;
            let mut best_w = w.data()[(0, i, j)];
            for kk in 1..k {
                let c = w.data()[(kk, i, j)];
                if c < best_w {
                    best_w = c;
                    best = kk;
                }
            }
            z[(best, i, j)] = 1.0;
        }
    }
    SolverState {
        z_bar: z.clone(),
        z,
        v: Array4::zeros((k, h, wd, 2)),
        q: Array4::zeros((k, h, wd, 2)),
        v_bar: Array4::zeros((k, h, wd, 2)),
        iter: 0,
        last_rel_change: f64::INFINITY,
    }
}

/// Dual ascent on the residual: q_next = q + sigma * (v_bar - grad z_bar).
pub fn update_dual(
    q: &Array4<f64>,
    v_bar: &Array4<f64>,
    grad_z_bar: &Array4<f64>,
    sigma: f64,
) -> Array4<f64> {
    let mut out = Array4::zeros(q.raw_dim());
    dual_step_into(q, v_bar, grad_z_bar, sigma, &mut out);
    out
}

/// Fused dual ascent: `q + sigma * (v_bar - grad z_bar)` with the forward
/// differences computed on the fly instead of materializing the gradient
/// field. Element for element this evaluates exactly the expressions of
/// [`crate::operators::gradient`] followed by [`update_dual`].
fn grad_dual_step_into(
    q: &Array4<f64>,
    v_bar: &Array4<f64>,
    z_bar: &Array3<f64>,
    sigma: f64,
    out: &mut Array4<f64>,
) {
    let (k, h, w) = z_bar.dim();
    debug_assert_eq!(out.dim(), (k, h, w, 2));
    match (
        q.as_slice(),
        v_bar.as_slice(),
        z_bar.as_slice(),
        out.as_slice_mut(),
    ) {
        (Some(qs), Some(vs), Some(zs), Some(os)) => {
            let n = os.len();
            let (qs, vs) = (&qs[..n], &vs[..n]);
            for kk in 0..k {
                for i in 0..h {
                    let row = (kk * h + i) * w;
                    let grow = row * 2;
                    for j in 0..w - 1 {
                        let e = grow + 2 * j;
                        let g = zs[row + j + 1] - zs[row + j];
                        os[e] = qs[e] + sigma * (vs[e] - g);
                    }
                    let e = grow + 2 * (w - 1);
                    os[e] = qs[e] + sigma * (vs[e] - 0.0);
                    if i + 1 < h {
                        for j in 0..w {
                            let e = grow + 2 * j + 1;
                            let g = zs[row + w + j] - zs[row + j];
                            os[e] = qs[e] + sigma * (vs[e] - g);
                        }
                    } else {
                        for j in 0..w {
                            let e = grow + 2 * j + 1;
                            os[e] = qs[e] + sigma * (vs[e] - 0.0);
                        }
                    }
                }
            }
        }
        _ => {
            for kk in 0..k {
                for i in 0..h {
                    for j in 0..w {
                        let gx = if j + 1 < w {
                            z_bar[(kk, i, j + 1)] - z_bar[(kk, i, j)]
                        } else {
                            0.0
                        };
                        let gy = if i + 1 < h {
                            z_bar[(kk, i + 1, j)] - z_bar[(kk, i, j)]
                        } else {
                            0.0
                        };
                        out[(kk, i, j, 0)] = q[(kk, i, j, 0)] + sigma * (v_bar[(kk, i, j, 0)] - gx);
                        out[(kk, i, j, 1)] = q[(kk, i, j, 1)] + sigma * (v_bar[(kk, i, j, 1)] - gy);
                    }
                }
            }
        }
    }
}

/// In-place form of [`update_dual`]; overwrites every element of `out`.
fn dual_step_into(
    q: &Array4<f64>,
    v_bar: &Array4<f64>,
    grad_z_bar: &Array4<f64>,
    sigma: f64,
    out: &mut Array4<f64>,
) {
    match (
        q.as_slice(),
        v_bar.as_slice(),
        grad_z_bar.as_slice(),
        out.as_slice_mut(),
    ) {
        (Some(qs), Some(vs), Some(gs), Some(os)) => {
            let n = os.len();
            let (qs, vs, gs) = (&qs[..n], &vs[..n], &gs[..n]);
            for e in 0..n {
                os[e] = qs[e] + sigma * (vs[e] - gs[e]);
            }
        }
        _ => {
            Zip::from(out)
                .and(q)
                .and(v_bar)
                .and(grad_z_bar)
                .for_each(|o, &qv, &vb, &gz| *o = qv + sigma * (vb - gz));
        }
    }
}

/// Isotropic soft-thresholding step for v.
///
/// Forms t = (tau/(mu*tau + 1)) * (v/tau - q_next) and shrinks each
/// (label, pixel) pair (t_x, t_y) jointly: the magnitude drops by
/// lambda*tau/(mu*tau + 1), clipping at zero (the 0/0 case resolves to 0).
pub fn update_v(
    v: &Array4<f64>,
    q_next: &Array4<f64>,
    lambda: f64,
    mu: f64,
    tau: f64,
) -> Array4<f64> {
    let mut out = Array4::zeros(v.raw_dim());
    v_step_into(v, q_next, lambda, mu, tau, &mut out);
    out
}

/// In-place form of [`update_v`]; overwrites every element of `out`.
fn v_step_into(
    v: &Array4<f64>,
    q_next: &Array4<f64>,
    lambda: f64,
    mu: f64,
    tau: f64,
    out: &mut Array4<f64>,
) {
    let alpha = 1.0 / (mu * tau + 1.0);
    let threshold = lambda * tau * alpha;
    match (v.as_slice(), q_next.as_slice(), out.as_slice_mut()) {
        (Some(vs), Some(qs), Some(os)) => {
            for ((o, v2), q2) in os
                .chunks_exact_mut(2)
                .zip(vs.chunks_exact(2))
                .zip(qs.chunks_exact(2))
            {
                let (x, y) = shrink_pair(v2[0], v2[1], q2[0], q2[1], alpha, tau, threshold);
                o[0] = x;
                o[1] = y;
            }
        }
        _ => {
            let (k, h, w, _) = v.dim();
            for kk in 0..k {
                for i in 0..h {
                    for j in 0..w {
                        let (x, y) = shrink_pair(
                            v[(kk, i, j, 0)],
                            v[(kk, i, j, 1)],
                            q_next[(kk, i, j, 0)],
                            q_next[(kk, i, j, 1)],
                            alpha,
                            tau,
                            threshold,
                        );
                        out[(kk, i, j, 0)] = x;
                        out[(kk, i, j, 1)] = y;
                    }
                }
            }
        }
    }
}

/// Isotropic shrinkage of one (x, y) pair, shared by the v kernels.
fn shrink_pair(
    vx: f64,
    vy: f64,
    qx: f64,
    qy: f64,
    alpha: f64,
    tau: f64,
    threshold: f64,
) -> (f64, f64) {
    // t = alpha*v - alpha*tau*q, componentwise.
    let tx = alpha * (vx - tau * qx);
    let ty = alpha * (vy - tau * qy);
    let mag2 = tx * tx + ty * ty;
    if threshold == 0.0 {
        // Zero threshold shrinks nothing: the scale (mag - 0)/mag is exactly
        // 1 whenever mag > 0, so skip the square root.
        return if mag2 > 0.0 { (tx, ty) } else { (0.0, 0.0) };
    }
    let mag = mag2.sqrt();
    if mag > threshold {
        let scale = (mag - threshold) / mag;
        (scale * tx, scale * ty)
    } else {
        (0.0, 0.0)
    }
}

/// Fused form of [`update_v`] plus its over-relaxation: writes v_next and
/// v_bar = 2 * v_next - v in a single pass.
fn v_relax_step_into(
    v: &Array4<f64>,
    q_next: &Array4<f64>,
    lambda: f64,
    mu: f64,
    tau: f64,
    v_next: &mut Array4<f64>,
    v_bar: &mut Array4<f64>,
) {
    let alpha = 1.0 / (mu * tau + 1.0);
    let threshold = lambda * tau * alpha;
    match (
        v.as_slice(),
        q_next.as_slice(),
        v_next.as_slice_mut(),
        v_bar.as_slice_mut(),
    ) {
        (Some(vs), Some(qs), Some(ns), Some(bs)) => {
            for (((n2, b2), v2), q2) in ns
                .chunks_exact_mut(2)
                .zip(bs.chunks_exact_mut(2))
                .zip(vs.chunks_exact(2))
                .zip(qs.chunks_exact(2))
            {
                let (x, y) = shrink_pair(v2[0], v2[1], q2[0], q2[1], alpha, tau, threshold);
                n2[0] = x;
                n2[1] = y;
                b2[0] = x * 2.0 - v2[0];
                b2[1] = y * 2.0 - v2[1];
            }
        }
        _ => {
            let (k, h, w, _) = v.dim();
            for kk in 0..k {
                for i in 0..h {
                    for j in 0..w {
                        let (x, y) = shrink_pair(
                            v[(kk, i, j, 0)],
                            v[(kk, i, j, 1)],
                            q_next[(kk, i, j, 0)],
                            q_next[(kk, i, j, 1)],
                            alpha,
                            tau,
                            threshold,
                        );
                        v_next[(kk, i, j, 0)] = x;
                        v_next[(kk, i, j, 1)] = y;
                        v_bar[(kk, i, j, 0)] = x * 2.0 - v[(kk, i, j, 0)];
                        v_bar[(kk, i, j, 1)] = y * 2.0 - v[(kk, i, j, 1)];
                    }
                }
            }
        }
    }
}

/// Projected gradient step on the data term:
/// z_next = P_simplex(z - tau * (w + div q_next)).
pub fn update_z(
    z: &Array3<f64>,
    q_next: &Array4<f64>,
    w: &CostField,
    tau: f64,
) -> Result<Array3<f64>> {
    let mut div_q = Array3::zeros(z.raw_dim());
    let mut out = Array3::zeros(z.raw_dim());
    z_step_into(z, q_next, w, tau, &mut div_q, &mut out)?;
    Ok(out)
}

/// In-place form of [`update_z`]: writes the divergence into `div_scratch`,
/// the projected step into `out`.
fn z_step_into(
    z: &Array3<f64>,
    q_next: &Array4<f64>,
    w: &CostField,
    tau: f64,
    div_scratch: &mut Array3<f64>,
    out: &mut Array3<f64>,
) -> Result<()> {
    divergence_into(q_next, div_scratch);
    match (
        z.as_slice(),
        w.data().as_slice(),
        div_scratch.as_slice(),
        out.as_slice_mut(),
    ) {
        (Some(zs), Some(ws), Some(ds), Some(os)) => {
            let n = os.len();
            let (zs, ws, ds) = (&zs[..n], &ws[..n], &ds[..n]);
            for e in 0..n {
                os[e] = zs[e] - tau * (ws[e] + ds[e]);
            }
        }
        _ => {
            Zip::from(&mut *out)
                .and(z)
                .and(w.data())
                .and(&*div_scratch)
                .for_each(|o, &zv, &wv, &dv| *o = zv - tau * (wv + dv));
        }
    }
    project_field_in_place(out)
}

/// Runs the primal-dual iteration until the relative z-change drops below
/// `config.tol` or `config.max_iter` is reached.
///
/// Returns the relaxed assignment field and a report. Non-finite state aborts
/// with [`Error::Divergence`].
pub fn solve(
    f: &Image,
    palette: &Palette,
    config: &SolverConfig,
) -> Result<(AssignmentField, SolveReport)> {
    config.validate()?;
    let w = cost_field(f, palette);
    solve_with_costs(&w, config)
}

/// Same as [`solve`] but starting from a precomputed cost field (used by the
/// pipeline, which already lifted the image).
pub fn solve_with_costs(
    w: &CostField,
    config: &SolverConfig,
) -> Result<(AssignmentField, SolveReport)> {
    config.validate()?;
    let mut state = initialize_state(w);
    let mut energy_trace = Vec::new();
    let mut converged = false;

    // The loop reuses these buffers; every kernel fully overwrites its output.
    let dim3 = state.z.raw_dim();
    let dim4 = state.v.raw_dim();
    let mut q_next = Array4::zeros(dim4);
    let mut v_next = Array4::zeros(dim4);
    let mut div_buf = Array3::zeros(dim3);
    let mut z_next = Array3::zeros(dim3);

    while state.iter < config.max_iter {
        state.iter += 1;
        grad_dual_step_into(&state.q, &state.v_bar, &state.z_bar, config.sigma, &mut q_next);
        // v_bar is not read again this iteration, so the relaxation can fuse
        // into the v update.
        v_relax_step_into(
            &state.v,
            &q_next,
            config.lambda,
            config.mu,
            config.tau,
            &mut v_next,
            &mut state.v_bar,
        );
        match z_step_into(&state.z, &q_next, w, config.tau, &mut div_buf, &mut z_next) {
            Ok(()) => {}
            Err(Error::NonFinite { .. }) => {
                return Err(Error::Divergence { iter: state.iter })
            }
            Err(e) => return Err(e),
        }

        // Relative change and the over-relaxed primal in one pass over z
        // (the "bar" variables lead by one step).
        let mut diff2 = 0.0;
        let mut norm2 = 0.0;
        match (
            state.z_bar.as_slice_mut(),
            z_next.as_slice(),
            state.z.as_slice(),
        ) {
            (Some(zb), Some(zn), Some(zc)) => {
                let n = zb.len();
                let (zn, zc) = (&zn[..n], &zc[..n]);
                for e in 0..n {
                    let a = zn[e];
                    let b = zc[e];
                    diff2 += (a - b) * (a - b);
                    norm2 += b * b;
                    zb[e] = a * 2.0 - b;
                }
            }
            _ => {
                Zip::from(&mut state.z_bar)
                    .and(&z_next)
                    .and(&state.z)
                    .for_each(|zb, &a, &b| {
                        diff2 += (a - b) * (a - b);
                        norm2 += b * b;
                        *zb = a * 2.0 - b;
                    });
            }
        }
        let rel = diff2.sqrt() / norm2.sqrt().max(1.0);
        if !rel.is_finite() {
            return Err(Error::Divergence { iter: state.iter });
        }
        state.last_rel_change = rel;

        std::mem::swap(&mut state.q, &mut q_next);
        std::mem::swap(&mut state.v, &mut v_next);
        std::mem::swap(&mut state.z, &mut z_next);

        let stop = rel < config.tol;
        if config.record_energy_every > 0
            && (state.iter % config.record_energy_every == 0
                || stop
                || state.iter == config.max_iter)
        {
            energy_trace.push(EnergySample {
                iteration: state.iter,
                energy: energy(&state.z, w, config.lambda, config.mu)?,
            });
        }
        if stop {
            converged = true;
            break;
        }
    }

    if state.q.iter().any(|v| !v.is_finite()) || state.v.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { iter: state.iter });
    }
    let report = SolveReport {
        iterations_run: state.iter,
        converged,
        final_rel_change: state.last_rel_change,
        energy_trace,
    };
    let z = AssignmentField::from_array(state.z)?;
    Ok((z, report))
}
