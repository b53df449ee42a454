#!/usr/bin/env python3
"""Smoke test for the convseg_py extension module.

Build the module first, then run this script from anywhere:

    cargo build -p convseg-py
    python3 python/smoke_test.py

The script copies the built cdylib next to itself under the importable name
`convseg_py.so`, imports it, and exercises the main entry points on a clean
generated phantom.
"""

import math
import shutil
import sys
from pathlib import Path


def import_module():
    here = Path(__file__).resolve().parent
    repo = here.parent
    built = None
    for profile in ("debug", "release"):
        cand = repo / "target" / profile / "libconvseg_py.so"
        if cand.exists():
            built = cand
            break
    if built is None:
        sys.exit("libconvseg_py.so not found; run `cargo build -p convseg-py` first")
    target = here / "convseg_py.so"
    if not target.exists() or built.stat().st_mtime > target.stat().st_mtime:
        shutil.copy2(built, target)
    sys.path.insert(0, str(here))
    import convseg_py

    return convseg_py


def main():
    m = import_module()

    # Phantom generation: shapes and palette.
    pixels, truth, palette, h, w = m.make_phantom("three-phase", 32)
    assert (h, w) == (32, 32)
    assert len(pixels) == h * w * 3
    assert len(truth) == h * w
    assert len(palette) == 4, f"three-phase palette has 4 colors, got {len(palette)}"
    assert set(truth) == {0, 1, 2, 3}

    # Simplex projection: feasible points are fixed, infeasible ones project.
    p = m.project_simplex([0.2, 0.5, 0.3])
    assert all(abs(a - b) < 1e-12 for a, b in zip(p, [0.2, 0.5, 0.3]))
    q = m.project_simplex([1.2, 0.3, -0.1])
    assert abs(sum(q) - 1.0) < 1e-12 and min(q) >= 0.0

    # K detection on the clean phantom.
    k = m.detect_k(pixels, h, w)
    assert k == 4, f"expected 4 phases, got {k}"

    # K-means recovers the exact palette colors (inertia ~ 0).
    km_palette, km_labels, inertia = m.kmeans(pixels, h, w, 4, seed=0)
    assert inertia < 1e-12, f"inertia {inertia}"
    assert len(km_labels) == h * w

    # Full segmentation of the clean phantom is exact.
    labels, seg_palette, iters, converged = m.segment(pixels, h, w)
    assert converged, f"did not converge in {iters} iterations"
    sa = m.segmentation_accuracy(labels, truth, h, w)
    assert sa == 1.0, f"SA on the clean phantom should be 1.0, got {sa}"

    # Noise hook: clamped output, same shape.
    noisy = m.add_gaussian_noise(pixels, h, w, 0.05, seed=7)
    assert len(noisy) == len(pixels)
    assert all(0.0 <= v <= 1.0 and math.isfinite(v) for v in noisy)
    assert noisy != pixels

    print("smoke test passed: SA =", sa, "in", iters, "iterations")


if __name__ == "__main__":
    main()
