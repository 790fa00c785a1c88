"""Topograph analysis: scan-line flattening, three-point plane leveling,
RMS roughness, and terrace step heights from a 3-Gaussian histogram fit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FitError, ValidationError
from .lsq import fit_least_squares
from .spectra import AfmImage

#: histogram bins never get finer than this (10 pm)
HIST_BIN_FLOOR_M = 1.0e-11


def remove_line_tilt(image: AfmImage, order=1) -> AfmImage:
    """Subtract a least-squares polynomial of ``order`` from every scan row.

    Rows run along the fast axis.  The result is idempotent: residual rows
    are orthogonal to the polynomial basis, so a second pass changes nothing.
    """
    if order not in (0, 1, 2):
        raise ValidationError("order must be 0, 1, or 2")
    h = image.heights_m
    nx = h.shape[1]
    if nx < order + 1:
        raise ValidationError(f"rows shorter than order+1 = {order + 1}")
    # anchor each row at its first pixel so constant rows flatten to an
    # exact zero instead of least-squares roundoff
    anchored = h - h[:, :1]
    x = np.linspace(-1.0, 1.0, nx)
    basis = np.vander(x, order + 1, increasing=True)  # (nx, order+1)
    coef, *_ = np.linalg.lstsq(basis, anchored.T, rcond=None)
    return AfmImage(anchored - (basis @ coef).T, image.pixel_pitch_m)


def _median3x3(h, px, py):
    ny, nx = h.shape
    x0, x1 = max(px - 1, 0), min(px + 2, nx)
    y0, y1 = max(py - 1, 0), min(py + 2, ny)
    return float(np.median(h[y0:y1, x0:x1]))


def three_point_level(image: AfmImage, p1, p2, p3) -> AfmImage:
    """Subtract the plane through three sampled pixels (3x3 medians).

    Points are (x, y) pixel coordinates and must not be collinear.  The
    subtracted plane passes exactly through the three median heights, so the
    reference terrace lands at zero.
    """
    h = image.heights_m
    dx, dy = image.pixel_pitch_m
    pts = [p1, p2, p3]
    for px, py in pts:
        if not (0 <= px < image.nx and 0 <= py < image.ny):
            raise ValidationError(f"point ({px}, {py}) outside the image")
    (x1, y1), (x2, y2), (x3, y3) = pts
    cross = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
    if cross == 0:
        raise ValidationError("the three points are collinear")
    a = np.array([[x1 * dx, y1 * dy, 1.0],
                  [x2 * dx, y2 * dy, 1.0],
                  [x3 * dx, y3 * dy, 1.0]])
    z = np.array([_median3x3(h, px, py) for px, py in pts])
    cx, cy, c0 = np.linalg.solve(a, z)
    xs = np.arange(image.nx) * dx
    ys = np.arange(image.ny)[:, None] * dy
    return AfmImage(h - (cx * xs + cy * ys + c0), image.pixel_pitch_m)


def rms_roughness(image: AfmImage) -> float:
    """R_q: root mean square height deviation over all pixels (meters)."""
    # anchoring at one pixel first keeps a constant image at exactly zero
    d = image.heights_m - image.heights_m.flat[0]
    return float(np.sqrt(np.mean((d - d.mean()) ** 2)))


@dataclass(frozen=True)
class StepHeightResult:
    """Terrace statistics from a 3-Gaussian fit to the height histogram."""

    centers_m: tuple          # fitted Gaussian centers, ascending
    sigmas_m: tuple           # fitted Gaussian widths
    step_heights_m: tuple     # consecutive center differences
    mean_step_m: float
    mean_step_err_m: float    # from the center covariance, root-sum-square
    width_err_m: float        # mean fitted Gaussian width (the looser, width-based convention)

    def __post_init__(self):
        if any(s <= 0 for s in self.sigmas_m):
            raise ValidationError("fitted widths must be positive")
        if any(b <= a for a, b in zip(self.centers_m, self.centers_m[1:])):
            raise ValidationError("centers must be strictly ascending")

    def to_json_dict(self):
        return {
            "centers_m": list(self.centers_m),
            "sigmas_m": list(self.sigmas_m),
            "step_heights_m": list(self.step_heights_m),
            "mean_step_m": self.mean_step_m,
            "mean_step_err_m": self.mean_step_err_m,
            "width_err_m": self.width_err_m,
        }


def height_histogram(image: AfmImage):
    """(bin centers, counts) with Freedman-Diaconis widths, floored at 10 pm."""
    h = image.heights_m.ravel()
    q75, q25 = np.percentile(h, [75, 25])
    width = 2.0 * (q75 - q25) / h.size ** (1.0 / 3.0)
    width = max(width, HIST_BIN_FLOOR_M)
    span = h.max() - h.min()
    # rounding down keeps every actual bin at or above the floor width
    n_bins = max(int(span / width), 1)
    counts, edges = np.histogram(h, bins=n_bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return centers, counts


def _top_modes(counts, n_modes, min_separation=3):
    """Indices of the strongest local maxima, at least ``min_separation`` apart."""
    kernel = np.ones(3) / 3.0
    smooth = np.convolve(np.pad(counts.astype(float), 1, mode="edge"),
                         kernel, mode="same")[1:-1]
    peaks = [i for i in range(1, smooth.size - 1)
             if smooth[i] > smooth[i - 1] and smooth[i] >= smooth[i + 1]]
    peaks.sort(key=lambda i: smooth[i], reverse=True)
    kept = []
    for i in peaks:
        if all(abs(i - j) >= min_separation for j in kept):
            kept.append(i)
        if len(kept) == n_modes:
            break
    return sorted(kept)


def fit_step_heights(image: AfmImage) -> StepHeightResult:
    """Extract terrace step heights from a leveled image.

    The height histogram is fitted with a sum of three Gaussians seeded at
    the three strongest histogram modes; consecutive center differences are
    the step heights.  Raises FitError when fewer than three modes resolve.
    """
    centers, counts = height_histogram(image)
    modes = _top_modes(counts, 3)
    if len(modes) < 3:
        raise FitError(f"found {len(modes)} resolvable height modes, need 3")

    bin_w = centers[1] - centers[0]
    seps = np.diff([centers[i] for i in modes])
    sigma0 = max(2.0 * bin_w, 0.25 * float(seps.min()))
    p0, scale = [], []
    for i in modes:
        p0 += [float(counts[i]), float(centers[i]), sigma0]
        scale += [max(float(counts[i]), 1.0), sigma0, sigma0]

    x = centers
    y = counts.astype(float)

    def residual(p):
        total = np.zeros_like(x)
        for k in range(3):
            amp, mu, sig = p[3 * k:3 * k + 3]
            total += amp * np.exp(-0.5 * ((x - mu) / sig) ** 2)
        return total - y

    res = fit_least_squares(residual, p0, x_scale=scale)
    triples = sorted((res.params[3 * k + 1], abs(res.params[3 * k + 2]),
                      res.param_errors[3 * k + 1]) for k in range(3))
    mus = [t[0] for t in triples]
    sigs = [t[1] for t in triples]
    mu_errs = [t[2] for t in triples]
    if mus[0] >= mus[1] or mus[1] >= mus[2]:
        raise FitError("fitted modes degenerate: centers not distinct")
    steps = (mus[1] - mus[0], mus[2] - mus[1])
    step_errs = [np.hypot(mu_errs[0], mu_errs[1]), np.hypot(mu_errs[1], mu_errs[2])]
    return StepHeightResult(
        centers_m=tuple(mus),
        sigmas_m=tuple(sigs),
        step_heights_m=steps,
        mean_step_m=float(np.mean(steps)),
        mean_step_err_m=float(np.hypot(*step_errs) / 2.0),
        width_err_m=float(np.mean(sigs)),
    )
