"""XPS surface quantification: charge-shift referencing, iterative Shirley
background subtraction, pseudo-Voigt band deconvolution, and
sensitivity-weighted atomic percentages.

Band profiles are area-normalized pseudo-Voigts, a linear mix of a
Lorentzian (half width at half maximum ``gamma_ev``) and a Gaussian
(standard deviation ``sigma_ev``); a band's fitted amplitude therefore IS
its area.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import FitError, ValidationError
from .lsq import fit_least_squares
from .spectra import XpsSpectrum

#: literature binding energy of the Nb3d5/2 line in lithium niobate, used as
#: the charge-referencing landmark
NB3D52_REFERENCE_EV = 207.3

#: nominal O1s band centers (eV): metal oxide, organic C=O, organic C-O
O1S_BAND_CENTERS_EV = (530.0, 531.5, 533.0)

#: alternative metal-oxide (Nb2O5) O1s position quoted in some references
NB2O5_O1S_ALTERNATE_EV = 530.5

#: Fallback relative sensitivity factors in the style of instrument-vendor
#: handbooks.  These are generic values for demonstration only; quantitative
#: work must supply the table calibrated for the actual tool (factors are
#: proportional to the photoabsorption cross-section and tool-specific).
DEFAULT_SENSITIVITY_FACTORS = {
    "C1s": 0.314,
    "O1s": 0.733,
    "Nb3d": 2.921,
    "Li1s": 0.028,
}


@dataclass(frozen=True)
class SensitivityTable:
    """Relative atomic sensitivity factor per element line."""

    factors: dict

    def __post_init__(self):
        if not self.factors:
            raise ValidationError("sensitivity table is empty")
        for line, f in self.factors.items():
            if f <= 0:
                raise ValidationError(f"sensitivity factor for {line} must be positive")
        object.__setattr__(self, "factors", dict(self.factors))

    @classmethod
    def default(cls):
        return cls(DEFAULT_SENSITIVITY_FACTORS)

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))

    def __getitem__(self, line):
        try:
            return self.factors[line]
        except KeyError:
            raise ValidationError(f"no sensitivity factor for line {line!r}") from None


# ---------------------------------------------------------------------------
# charge referencing
# ---------------------------------------------------------------------------

def charge_shift(spectra, measured_nb3d52_ev=None):
    """Translate all binding-energy axes so Nb3d5/2 sits at 207.3 eV.

    The measured peak position is auto-detected as the maximum of the Nb3d
    spectrum when not supplied.  Returns (shifted spectra, shift in eV);
    counts are untouched, so every peak area is preserved exactly.
    """
    spectra = list(spectra)
    if measured_nb3d52_ev is None:
        nb = [s for s in spectra if s.element_line == "Nb3d"]
        if not nb:
            raise ValidationError("no Nb3d spectrum available for charge referencing")
        ref = nb[0]
        measured_nb3d52_ev = float(ref.binding_energy_ev[np.argmax(ref.counts)])
    shift = NB3D52_REFERENCE_EV - measured_nb3d52_ev
    shifted = [XpsSpectrum(s.binding_energy_ev + shift, s.counts, s.element_line)
               for s in spectra]
    return shifted, shift


# ---------------------------------------------------------------------------
# Shirley background
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShirleyBackground:
    binding_energy_ev: np.ndarray  # ascending window grid
    background: np.ndarray
    n_iterations: int


def shirley_background(spectrum: XpsSpectrum, window, tol=1e-6,
                       max_iter=50) -> ShirleyBackground:
    """Iterative Shirley background over ``window = (lo_ev, hi_ev)``.

    The background at energy E interpolates between the endpoint count
    levels in proportion to the background-subtracted area accumulated from
    the low-BE edge up to E (the inelastic step rises toward high binding
    energy).  Endpoint levels are 3-point averages to suppress endpoint
    noise.  Iteration stops when the largest change drops below
    ``tol * (|I_hi - I_lo| + eps)``; the converged background is clipped to
    never exceed the data.
    """
    asc = spectrum.ascending()
    be = asc.binding_energy_ev
    counts = asc.counts
    lo_ev, hi_ev = min(window), max(window)
    if lo_ev < be[0] or hi_ev > be[-1]:
        raise ValidationError("window endpoints must lie inside the spectrum")
    sel = (be >= lo_ev) & (be <= hi_ev)
    if np.count_nonzero(sel) < 5:
        raise ValidationError("window narrower than 5 points")
    e = be[sel]
    y = counts[sel]
    n = e.size

    i_lo = float(np.mean(y[:min(3, n)]))
    i_hi = float(np.mean(y[-min(3, n):]))
    scale = abs(i_hi - i_lo) + 1e-9 * max(1.0, float(y.max()))

    bg = np.full(n, i_lo)
    de = np.gradient(e)
    for iteration in range(1, max_iter + 1):
        s = y - bg
        # rectangle accumulation: each sample's weight lands at its own
        # position, which keeps an ideal step an exact fixed point
        area = np.cumsum(s * de)
        total = area[-1]
        if abs(total) < 1e-300:
            new_bg = bg.copy()
        else:
            new_bg = i_lo + (i_hi - i_lo) * area / total
        delta = float(np.max(np.abs(new_bg - bg)))
        bg = new_bg
        if delta < tol * scale:
            return ShirleyBackground(e, np.minimum(bg, y), iteration)
    raise FitError(f"Shirley background did not converge in {max_iter} iterations")


def integrated_peak_area(spectrum: XpsSpectrum, window, tol=1e-6,
                         max_iter=50) -> float:
    """Background-subtracted counts integrated over the window (trapezoid)."""
    sh = shirley_background(spectrum, window, tol=tol, max_iter=max_iter)
    asc = spectrum.ascending()
    sel = (asc.binding_energy_ev >= sh.binding_energy_ev[0]) & \
          (asc.binding_energy_ev <= sh.binding_energy_ev[-1])
    net = asc.counts[sel] - sh.background
    return float(np.trapezoid(net, sh.binding_energy_ev))


# ---------------------------------------------------------------------------
# band models
# ---------------------------------------------------------------------------

def pseudo_voigt(x, center, sigma, gamma, mix):
    """Area-normalized pseudo-Voigt profile.

    ``mix`` weights the Lorentzian part (HWHM ``gamma``); ``1 - mix`` weights
    the Gaussian part (standard deviation ``sigma``).
    """
    x = np.asarray(x, dtype=float)
    dx = x - center
    lor = (gamma / np.pi) / (dx**2 + gamma**2)
    gau = np.exp(-0.5 * (dx / sigma) ** 2) / (sigma * np.sqrt(2.0 * np.pi))
    return mix * lor + (1.0 - mix) * gau


@dataclass(frozen=True)
class Band:
    center_ev: float
    sigma_ev: float
    gamma_ev: float
    mix: float = 0.3
    amplitude: float = 0.0       # band area, counts * eV
    center_bound_ev: float = 0.5  # allowed excursion of the center in the fit

    def __post_init__(self):
        if self.sigma_ev <= 0 or self.gamma_ev <= 0:
            raise ValidationError("band widths must be positive")
        if not 0.0 <= self.mix <= 1.0:
            raise ValidationError("mix must lie in [0, 1]")
        if self.amplitude < 0:
            raise ValidationError("amplitude must be >= 0")
        if self.center_bound_ev <= 0:
            raise ValidationError("center bound must be positive")


@dataclass(frozen=True)
class BandModel:
    bands: tuple

    def __post_init__(self):
        bands = tuple(self.bands)
        if not bands:
            raise ValidationError("band model needs at least one band")
        object.__setattr__(self, "bands", bands)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for b in self.bands:
            total += b.amplitude * pseudo_voigt(x, b.center_ev, b.sigma_ev,
                                                b.gamma_ev, b.mix)
        return total


def o1s_default_model(amplitude=0.0):
    """Three-band O1s model: metal oxide plus the two organic carbon bands."""
    return BandModel(tuple(Band(center_ev=c, sigma_ev=0.6, gamma_ev=0.5,
                                mix=0.3, amplitude=amplitude)
                           for c in O1S_BAND_CENTERS_EV))


@dataclass(frozen=True)
class BandFitResult:
    model: BandModel           # fitted bands
    areas: np.ndarray          # per-band areas (== fitted amplitudes)
    area_errors: np.ndarray
    degenerate: bool           # any band with area uncertainty above its area
    residual_rms: float
    n_iterations: int

    def to_json_dict(self):
        return {
            "bands": [
                {"center_ev": b.center_ev, "sigma_ev": b.sigma_ev,
                 "gamma_ev": b.gamma_ev, "mix": b.mix, "area": b.amplitude}
                for b in self.model.bands
            ],
            "area_errors": [float(x) for x in self.area_errors],
            "degenerate": self.degenerate,
            "residual_rms": self.residual_rms,
            "n_iterations": self.n_iterations,
        }


def fit_bands(be_ev, signal, model: BandModel) -> BandFitResult:
    """Fit band amplitudes, centers, and widths to a background-subtracted line.

    Centers are box-constrained to each band's ``center_bound_ev`` around its
    nominal position; amplitudes to >= 0.  A width fitted below the grid step
    is reported as a collapsed band.  Mix factors stay fixed.
    """
    be = np.asarray(be_ev, dtype=float)
    y = np.asarray(signal, dtype=float)
    if be.size != y.size or be.size < 5:
        raise ValidationError("need matching energy/signal arrays, >= 5 points")
    if be[0] > be[-1]:
        be, y = be[::-1], y[::-1]
    grid_step = float(np.median(np.diff(be)))

    bands = model.bands
    # free parameters per band: [amplitude, center, sigma?, gamma?]
    # sigma is skipped for a pure Lorentzian (mix=1), gamma for pure Gaussian
    specs = []
    p0, lower, upper, scale = [], [], [], []
    y_scale = max(float(np.max(np.abs(y))), 1e-30)
    for b in bands:
        amp0 = b.amplitude
        if amp0 == 0.0:
            height = max(float(np.interp(b.center_ev, be, y)), 1e-3 * y_scale)
            amp0 = height / pseudo_voigt(0.0, 0.0, b.sigma_ev, b.gamma_ev, b.mix)
        idx = {}
        idx["amplitude"] = len(p0)
        p0.append(amp0)
        lower.append(0.0)
        upper.append(np.inf)
        scale.append(max(amp0, 1e-3 * y_scale))
        idx["center"] = len(p0)
        p0.append(b.center_ev)
        lower.append(b.center_ev - b.center_bound_ev)
        upper.append(b.center_ev + b.center_bound_ev)
        scale.append(max(b.sigma_ev, b.gamma_ev))
        if b.mix < 1.0:
            idx["sigma"] = len(p0)
            p0.append(b.sigma_ev)
            lower.append(0.05 * grid_step)
            upper.append(np.inf)
            scale.append(b.sigma_ev)
        if b.mix > 0.0:
            idx["gamma"] = len(p0)
            p0.append(b.gamma_ev)
            lower.append(0.05 * grid_step)
            upper.append(np.inf)
            scale.append(b.gamma_ev)
        specs.append(idx)

    def build(p):
        fitted = []
        for b, idx in zip(bands, specs):
            fitted.append(replace(
                b,
                amplitude=float(p[idx["amplitude"]]),
                center_ev=float(p[idx["center"]]),
                sigma_ev=float(p[idx["sigma"]]) if "sigma" in idx else b.sigma_ev,
                gamma_ev=float(p[idx["gamma"]]) if "gamma" in idx else b.gamma_ev,
            ))
        return BandModel(tuple(fitted))

    def residual(p):
        total = np.zeros_like(y)
        for b, idx in zip(bands, specs):
            sigma = p[idx["sigma"]] if "sigma" in idx else b.sigma_ev
            gamma = p[idx["gamma"]] if "gamma" in idx else b.gamma_ev
            total += p[idx["amplitude"]] * pseudo_voigt(be, p[idx["center"]],
                                                        sigma, gamma, b.mix)
        return total - y

    res = fit_least_squares(residual, p0, x_scale=scale, lower=lower, upper=upper)
    fitted = build(res.params)
    areas = np.array([b.amplitude for b in fitted.bands])
    total_area = float(areas.sum())
    for b in fitted.bands:
        width = b.mix * b.gamma_ev * 2.0 + (1.0 - b.mix) * b.sigma_ev * 2.355
        # a band carrying real area must stay broader than the grid; a band
        # fitted to (near) zero amplitude may shrink harmlessly
        if width < grid_step and b.amplitude > 0.01 * max(total_area, 1e-30):
            raise FitError(f"band at {b.center_ev:.2f} eV collapsed below the grid step")
    area_errors = np.array([res.param_errors[idx["amplitude"]] for idx in specs])
    degenerate = bool(np.any(area_errors >
                             np.maximum(areas, 0.05 * total_area + 1e-3 * y_scale)))
    return BandFitResult(
        model=fitted,
        areas=areas,
        area_errors=area_errors,
        degenerate=degenerate,
        residual_rms=float(np.sqrt(res.cost / y.size)),
        n_iterations=res.n_iterations,
    )


# ---------------------------------------------------------------------------
# quantification
# ---------------------------------------------------------------------------

def _element_symbol(line):
    """'Nb3d' -> 'Nb', 'O1s' -> 'O'; custom labels pass through unchanged."""
    head = ""
    for ch in line:
        if ch.isdigit():
            break
        head += ch
    return head or line


@dataclass(frozen=True)
class XpsQuantReport:
    """Atomic percentages, ratios to niobium, and optional per-band areas."""

    atomic_percent: dict
    ratios_to_nb: dict
    band_areas: dict = field(default_factory=dict)

    def __post_init__(self):
        total = sum(self.atomic_percent.values())
        if any(v < 0 for v in self.atomic_percent.values()):
            raise ValidationError("percentages must be nonnegative")
        if abs(total - 100.0) > 1e-9:
            raise ValidationError(f"percentages must sum to 100, got {total!r}")
        object.__setattr__(self, "atomic_percent", dict(self.atomic_percent))
        object.__setattr__(self, "ratios_to_nb", dict(self.ratios_to_nb))
        object.__setattr__(self, "band_areas", dict(self.band_areas))

    def to_json_dict(self):
        return {
            "atomic_percent": dict(self.atomic_percent),
            "ratios_to_nb": dict(self.ratios_to_nb),
            "band_areas": {k: [float(x) for x in v] for k, v in self.band_areas.items()},
        }


def atomic_percentages(integrated_areas, table: SensitivityTable,
                       want_ratios=None, band_areas=None) -> XpsQuantReport:
    """Sensitivity-weighted atomic percentages from integrated line areas.

    percent(x) = (area_x / F_x) / sum_i(area_i / F_i) * 100.  Ratios to Nb
    are included when a Nb3d area is present; pass ``want_ratios=True`` to
    make a missing Nb line an error instead, or False to skip ratios.
    """
    if not integrated_areas:
        raise ValidationError("no integrated areas supplied")
    for line, area in integrated_areas.items():
        if area < 0:
            raise ValidationError(f"area for {line} must be >= 0")
    weighted = {line: area / table[line] for line, area in integrated_areas.items()}
    total = sum(weighted.values())
    if total <= 0:
        raise ValidationError("all areas are zero; percentages undefined")
    percent = {line: 100.0 * w / total for line, w in weighted.items()}

    has_nb = "Nb3d" in percent
    if want_ratios is True and not has_nb:
        raise ValidationError("ratios to Nb requested but no Nb3d area present")
    ratios = {}
    if want_ratios is not False and has_nb:
        nb = percent["Nb3d"]
        for line, value in percent.items():
            if line == "Nb3d" or nb == 0:
                continue
            ratios[f"{_element_symbol(line)}/Nb"] = value / nb
    return XpsQuantReport(atomic_percent=percent, ratios_to_nb=ratios,
                          band_areas=band_areas or {})
