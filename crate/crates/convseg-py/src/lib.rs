//! Python bindings for the convseg crate.
//!
//! Images and label maps cross the boundary as flat row-major lists plus
//! explicit (height, width) shapes, so the module works without a numpy
//! dependency on either side; palettes are lists of `(r, g, b)` tuples.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use convseg::image::{Image, Palette};
use convseg::pipeline::{self, NoiseSpec, PhantomKind, SegmentOptions};
use convseg::solver::SolverConfig;
use convseg::{clustering, simplex};
use ndarray::Array2;

/// Palette colors as they cross the boundary: a list of (r, g, b) tuples.
type RgbList = Vec<(f64, f64, f64)>;
/// `make_phantom` result: (pixels, truth labels, palette, height, width).
type PhantomResult = (Vec<f64>, Vec<usize>, RgbList, usize, usize);
/// `kmeans` result: (palette, assignments, inertia).
type KmeansResult = (RgbList, Vec<usize>, f64);
/// `segment` result: (labels, palette, iterations, converged).
type SegmentResult = (Vec<usize>, RgbList, usize, bool);

fn py_err(err: convseg::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn image_from_flat(pixels: Vec<f64>, height: usize, width: usize) -> PyResult<Image> {
    Image::new(height, width, pixels).map_err(py_err)
}

fn palette_from_tuples(colors: &[(f64, f64, f64)]) -> PyResult<Palette> {
    Palette::new(colors.iter().map(|&(r, g, b)| [r, g, b]).collect()).map_err(py_err)
}

fn palette_to_tuples(palette: &Palette) -> Vec<(f64, f64, f64)> {
    palette.colors().iter().map(|c| (c[0], c[1], c[2])).collect()
}

fn labels_from_flat(labels: Vec<usize>, height: usize, width: usize) -> PyResult<Array2<usize>> {
    Array2::from_shape_vec((height, width), labels)
        .map_err(|e| PyValueError::new_err(format!("label map shape: {e}")))
}

/// Generate a phantom. Returns (pixels, truth_labels, palette, height, width)
/// with `pixels` flat row-major RGB and `truth_labels` flat row-major.
#[pyfunction]
fn make_phantom(
    kind: &str,
    size: usize,
) -> PyResult<PhantomResult> {
    let kind: PhantomKind = kind.parse().map_err(py_err)?;
    let (image, truth, palette) = pipeline::make_phantom(kind, size).map_err(py_err)?;
    let (h, w) = (image.height(), image.width());
    Ok((
        image.data().iter().copied().collect(),
        truth.iter().copied().collect(),
        palette_to_tuples(&palette),
        h,
        w,
    ))
}

/// Add clamped Gaussian noise to a flat RGB image.
#[pyfunction]
#[pyo3(signature = (pixels, height, width, variance, mean = 0.0, seed = 0))]
fn add_gaussian_noise(
    pixels: Vec<f64>,
    height: usize,
    width: usize,
    variance: f64,
    mean: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let image = image_from_flat(pixels, height, width)?;
    let spec = NoiseSpec {
        mean,
        variance,
        seed,
    };
    let noisy = pipeline::add_gaussian_noise(&image, &spec).map_err(py_err)?;
    Ok(noisy.data().iter().copied().collect())
}

/// Euclidean projection of a vector onto the probability simplex.
#[pyfunction]
fn project_simplex(values: Vec<f64>) -> PyResult<Vec<f64>> {
    simplex::project_simplex(&values).map_err(py_err)
}

/// Detect the number of phases from histogram peaks (clamped to [2, 16]).
#[pyfunction]
#[pyo3(signature = (pixels, height, width, bins = 16))]
fn detect_k(pixels: Vec<f64>, height: usize, width: usize, bins: usize) -> PyResult<usize> {
    let image = image_from_flat(pixels, height, width)?;
    let hist = clustering::build_histogram(&image, bins).map_err(py_err)?;
    clustering::detect_k(&hist).map_err(py_err)
}

/// K-means in RGB space. Returns (palette, labels, inertia).
#[pyfunction]
#[pyo3(signature = (pixels, height, width, k, seed = 0, max_iter = 100, restarts = 8))]
fn kmeans(
    pixels: Vec<f64>,
    height: usize,
    width: usize,
    k: usize,
    seed: u64,
    max_iter: usize,
    restarts: usize,
) -> PyResult<KmeansResult> {
    let image = image_from_flat(pixels, height, width)?;
    let result = clustering::kmeans_restarts(&image, k, seed, max_iter, restarts).map_err(py_err)?;
    Ok((
        palette_to_tuples(&result.palette),
        result.assignments.iter().copied().collect(),
        result.inertia,
    ))
}

/// Segment a flat RGB image. Returns (labels, palette, iterations, converged).
///
/// Exactly one of `k` and `palette` may be given; with neither, the phase
/// count is detected from histogram peaks.
#[pyfunction]
#[pyo3(signature = (pixels, height, width, k = None, palette = None, lam = 0.1,
                    mu = 0.01, max_iter = 2000, tol = 1e-5, seed = 0, bins = 16))]
#[allow(clippy::too_many_arguments)]
fn segment(
    pixels: Vec<f64>,
    height: usize,
    width: usize,
    k: Option<usize>,
    palette: Option<Vec<(f64, f64, f64)>>,
    lam: f64,
    mu: f64,
    max_iter: usize,
    tol: f64,
    seed: u64,
    bins: usize,
) -> PyResult<SegmentResult> {
    let image = image_from_flat(pixels, height, width)?;
    let palette = match palette {
        Some(colors) => Some(palette_from_tuples(&colors)?),
        None => None,
    };
    let options = SegmentOptions {
        k,
        palette,
        solver: SolverConfig {
            lambda: lam,
            mu,
            max_iter,
            tol,
            ..Default::default()
        },
        bins,
        seed,
        ..Default::default()
    };
    let (seg, report) = pipeline::segment(&image, &options).map_err(py_err)?;
    Ok((
        seg.labels.iter().copied().collect(),
        palette_to_tuples(&seg.palette),
        report.iterations_run,
        report.converged,
    ))
}

/// Best-matching segmentation accuracy between two flat label maps.
#[pyfunction]
fn segmentation_accuracy(
    predicted: Vec<usize>,
    truth: Vec<usize>,
    height: usize,
    width: usize,
) -> PyResult<f64> {
    let pred = labels_from_flat(predicted, height, width)?;
    let truth = labels_from_flat(truth, height, width)?;
    Ok(pipeline::segmentation_accuracy(&pred, &truth)
        .map_err(py_err)?
        .value)
}

#[pymodule]
fn convseg_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(make_phantom, m)?)?;
    m.add_function(wrap_pyfunction!(add_gaussian_noise, m)?)?;
    m.add_function(wrap_pyfunction!(project_simplex, m)?)?;
    m.add_function(wrap_pyfunction!(detect_k, m)?)?;
    m.add_function(wrap_pyfunction!(kmeans, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(segmentation_accuracy, m)?)?;
    Ok(())
}
