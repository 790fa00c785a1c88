"""Batch command-line front end.

Subcommands: fit-resonance, fit-tempsweep, fit-powersweep, xps-quant, afm,
walkoff, synth.  Every command is deterministic given its inputs and
``--seed``; reports are canonical JSON (sorted keys, newline-terminated) and
plots are deterministic SVG, so reruns are byte-identical and diffs in CI
stay meaningful.  With ``--keep-going`` a failing input produces an
``<stem>.error.json`` record and the batch continues; the exit code is 0
only when every input processed cleanly.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import afm as afm_mod
from . import resonance, spectra, tls, walkoff, xps
from .errors import SawkitError
from .svg import Panel, render_panels

TWO_PI = 2.0 * np.pi


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _gather_inputs(paths):
    files = []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(q for q in path.iterdir() if q.is_file()))
        else:
            files.append(path)
    return files


def _out_dir(args) -> Path:
    return Path(args.out)


def _run_batch(args, files, process_one):
    """Apply ``process_one`` per input, honoring --keep-going; return exit code."""
    failures = 0
    for f in files:
        try:
            process_one(f)
        except (SawkitError, OSError) as exc:
            failures += 1
            record = {"input": str(f), "error": str(exc)}
            _write_atomic(_out_dir(args) / f"{f.stem}.error.json",
                          _canonical_json(record))
            print(f"error: {f}: {exc}", file=sys.stderr)
            if not args.keep_going:
                return 1
    return 1 if failures else 0


# ---------------------------------------------------------------------------
# fit-resonance
# ---------------------------------------------------------------------------

def _resonance_svg(spectrum, result):
    freq = spectrum.frequencies_hz
    fit = resonance.eval_s11(result.params, freq)
    mag = Panel(title="reflection magnitude", xlabel="frequency (Hz)",
                ylabel="|S11|")
    mag.add_points(freq, np.abs(spectrum.values), label="data")
    mag.add_line(freq, np.abs(fit), label="fit")
    ph = Panel(title="reflection phase", xlabel="frequency (Hz)",
               ylabel="arg S11 (rad)")
    ph.add_points(freq, np.unwrap(np.angle(spectrum.values)), label="data")
    ph.add_line(freq, np.unwrap(np.angle(fit)), label="fit")
    return render_panels([mag, ph])


def cmd_fit_resonance(args) -> int:
    files = _gather_inputs(args.inputs)
    model = "dark_mode" if args.model == "dark" else "lorentzian"

    def process(f):
        spectrum = spectra.parse_s11_csv(f.read_text())
        result = resonance.fit_resonance(spectrum, model_kind=model)
        _write_atomic(_out_dir(args) / f"{f.stem}.fit.json",
                      _canonical_json(result.to_json_dict()))
        if args.emit_svg:
            _write_atomic(_out_dir(args) / f"{f.stem}.fit.svg",
                          _resonance_svg(spectrum, result))

    return _run_batch(args, files, process)


# ---------------------------------------------------------------------------
# fit-tempsweep / fit-powersweep
# ---------------------------------------------------------------------------

def cmd_fit_tempsweep(args) -> int:
    files = _gather_inputs(args.inputs)

    def process(f):
        series = spectra.parse_tempsweep_csv(f.read_text())
        result = tls.fit_fdelta(series)
        _write_atomic(_out_dir(args) / f"{f.stem}.tls.json",
                      _canonical_json(result.to_json_dict()))
        if args.emit_svg:
            t = series.temperatures_k
            shift = series.f0_hz / result.f0_hz - 1.0
            grid = np.linspace(t.min(), t.max(), 200)
            model = tls.tls_frequency_shift(
                result.f_delta_tls, result.f0_hz, grid,
                reference_temperature_k=series.reference_temperature_k)
            panel = Panel(title="TLS frequency shift", xlabel="temperature (K)",
                          ylabel="relative shift")
            panel.add_points(t, shift, label="data")
            panel.add_line(grid, model, label="fit")
            _write_atomic(_out_dir(args) / f"{f.stem}.tls.svg",
                          render_panels([panel]))

    return _run_batch(args, files, process)


def cmd_fit_powersweep(args) -> int:
    files = _gather_inputs(args.inputs)

    def process(f):
        series = spectra.parse_powersweep_csv(f.read_text())
        result = tls.fit_power_sweep(series, fixed_beta=args.fixed_beta)
        _write_atomic(_out_dir(args) / f"{f.stem}.power.json",
                      _canonical_json(result.to_json_dict()))
        if args.emit_svg:
            n = series.mean_phonon_number
            grid = np.geomspace(n.min(), n.max(), 200)
            panel = Panel(title="TLS power saturation",
                          xlabel="log10 mean phonon number", ylabel="Q_i")
            panel.add_points(np.log10(n), series.qi, label="data")
            panel.add_line(np.log10(grid),
                           tls.qi_power_model(result.params, grid), label="fit")
            _write_atomic(_out_dir(args) / f"{f.stem}.power.svg",
                          render_panels([panel]))

    return _run_batch(args, files, process)


# ---------------------------------------------------------------------------
# xps-quant
# ---------------------------------------------------------------------------

def _load_xps_config(path):
    cfg = json.loads(Path(path).read_text()) if path else {}
    table = xps.SensitivityTable(cfg["sensitivity"]) if "sensitivity" in cfg \
        else xps.SensitivityTable.default()
    windows = cfg.get("windows", {})
    band_cfg = {}
    for line, bands in cfg.get("bands", {}).items():
        band_cfg[line] = xps.BandModel(tuple(
            xps.Band(center_ev=b["center_ev"], sigma_ev=b.get("sigma_ev", 0.6),
                     gamma_ev=b.get("gamma_ev", 0.5), mix=b.get("mix", 0.3),
                     center_bound_ev=b.get("center_bound_ev", 0.5))
            for b in bands))
    return table, windows, band_cfg, cfg


def cmd_xps_quant(args) -> int:
    files = _gather_inputs(args.inputs)
    table, windows, band_cfg, cfg = _load_xps_config(args.config)
    tol = cfg.get("shirley_tol", 1e-6)
    max_iter = cfg.get("shirley_max_iter", 50)

    try:
        parsed = [spectra.parse_xps_csv(f.read_text()) for f in files]
        if not parsed:
            raise SawkitError("no XPS spectra found")
        if args.no_charge_shift:
            shifted, shift = parsed, 0.0
        else:
            shifted, shift = xps.charge_shift(parsed)
        areas = {}
        band_areas = {}
        panels = []
        for sp in shifted:
            asc = sp.ascending()
            window = windows.get(sp.element_line,
                                 (float(asc.binding_energy_ev[0]),
                                  float(asc.binding_energy_ev[-1])))
            sh = xps.shirley_background(sp, window, tol=tol, max_iter=max_iter)
            sel = (asc.binding_energy_ev >= sh.binding_energy_ev[0]) & \
                  (asc.binding_energy_ev <= sh.binding_energy_ev[-1])
            net = asc.counts[sel] - sh.background
            areas[sp.element_line] = max(float(np.trapezoid(net, sh.binding_energy_ev)), 0.0)
            panel = Panel(title=f"{sp.element_line}", xlabel="binding energy (eV)",
                          ylabel="counts")
            panel.add_line(sh.binding_energy_ev, asc.counts[sel], label="data")
            panel.add_line(sh.binding_energy_ev, sh.background, label="background")
            if sp.element_line in band_cfg:
                fit = xps.fit_bands(sh.binding_energy_ev, net, band_cfg[sp.element_line])
                band_areas[sp.element_line] = [float(a) for a in fit.areas]
                panel.add_line(sh.binding_energy_ev,
                               sh.background + fit.model.evaluate(sh.binding_energy_ev),
                               label="bands")
            panels.append(panel)
        report = xps.atomic_percentages(areas, table, band_areas=band_areas)
        doc = report.to_json_dict()
        doc["charge_shift_ev"] = shift
        doc["areas"] = {k: float(v) for k, v in areas.items()}
        _write_atomic(_out_dir(args) / "xps_quant.json", _canonical_json(doc))
        if args.emit_svg:
            _write_atomic(_out_dir(args) / "xps_quant.svg", render_panels(panels))
    except (SawkitError, OSError) as exc:
        _write_atomic(_out_dir(args) / "xps_quant.error.json",
                      _canonical_json({"error": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# afm
# ---------------------------------------------------------------------------

def _parse_level_points(text):
    pts = []
    for chunk in text.split():
        x, y = chunk.split(",")
        pts.append((int(x), int(y)))
    if len(pts) != 3:
        raise SawkitError("--level-points needs exactly three x,y pairs")
    return pts


def cmd_afm(args) -> int:
    files = _gather_inputs(args.inputs)
    rq_values = []

    def process(f):
        image = spectra.parse_afm_grid(f.read_text())
        flattened = afm_mod.remove_line_tilt(image, order=args.order)
        rq = afm_mod.rms_roughness(flattened)
        rq_values.append(rq)
        doc = {"r_q_m": rq, "order": args.order}
        hist_img = image
        if args.level_points:
            hist_img = afm_mod.three_point_level(image,
                                                 *_parse_level_points(args.level_points))
            doc["leveled"] = True
        if args.fit_steps:
            steps = afm_mod.fit_step_heights(hist_img)
            doc["steps"] = steps.to_json_dict()
        _write_atomic(_out_dir(args) / f"{f.stem}.afm.json", _canonical_json(doc))
        if args.emit_svg:
            centers, counts = afm_mod.height_histogram(hist_img)
            panel = Panel(title="height histogram", xlabel="height (m)",
                          ylabel="pixels")
            panel.add_line(centers, counts, label="histogram")
            if args.fit_steps:
                grid = np.linspace(centers.min(), centers.max(), 400)
                total = np.zeros_like(grid)
                for mu, sig in zip(steps.centers_m, steps.sigmas_m):
                    amp = counts[np.argmin(np.abs(centers - mu))]
                    total += amp * np.exp(-0.5 * ((grid - mu) / sig) ** 2)
                panel.add_line(grid, total, label="3-gaussian fit")
            _write_atomic(_out_dir(args) / f"{f.stem}.afm.svg",
                          render_panels([panel]))

    code = _run_batch(args, files, process)
    if len(rq_values) > 1:
        summary = {"n_images": len(rq_values),
                   "r_q_mean_m": float(np.mean(rq_values)),
                   "r_q_std_m": float(np.std(rq_values, ddof=1))}
        _write_atomic(_out_dir(args) / "afm_summary.json", _canonical_json(summary))
    return code


# ---------------------------------------------------------------------------
# walkoff
# ---------------------------------------------------------------------------

def cmd_walkoff(args) -> int:
    files = _gather_inputs(args.inputs)

    def process(f):
        curve = spectra.parse_walkoff_csv(f.read_text())
        smoothed = walkoff.smooth_curve(curve, args.half_width) \
            if args.half_width > 0 else curve
        zeros = walkoff.find_zero_crossings(smoothed)
        tangencies = walkoff.find_tangencies(smoothed)
        doc = {
            "zeros": [z.to_json_dict() for z in zeros],
            "tangencies": [{"theta_deg": t, "eta_deg": e} for t, e in tangencies],
            "half_width": args.half_width,
        }
        _write_atomic(_out_dir(args) / f"{f.stem}.walkoff.json", _canonical_json(doc))
        if args.emit_svg:
            panel = Panel(title="beam steering", xlabel="drive angle (deg)",
                          ylabel="walk-off (deg)")
            panel.add_line(curve.theta_deg, curve.eta_deg, label="raw")
            if args.half_width > 0:
                panel.add_line(smoothed.theta_deg, smoothed.eta_deg, label="smoothed")
            for z in zeros:
                panel.add_vline(z.theta_deg)
            _write_atomic(_out_dir(args) / f"{f.stem}.walkoff.svg",
                          render_panels([panel]))

    return _run_batch(args, files, process)


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    out = Path(args.output) if args.output else _out_dir(args) / f"{args.kind}.csv"
    if args.kind == "s11":
        w0 = TWO_PI * args.f0_hz
        kappa_e = w0 / args.qe
        kappa = kappa_e + w0 / args.qi
        ql = 1.0 / (1.0 / args.qi + 1.0 / args.qe)
        fwhm = args.f0_hz / ql
        grid = np.linspace(args.f0_hz - args.span_linewidths * fwhm,
                           args.f0_hz + args.span_linewidths * fwhm, args.points)
        dark = None
        if args.dark_delta_hz is not None:
            dark = (TWO_PI * args.dark_g_hz, args.dark_delta_hz,
                    TWO_PI * args.dark_gamma_hz)
        sp = spectra.synth_s11(args.f0_hz, kappa, kappa_e, grid, dark=dark,
                               noise_sigma=args.noise, rng_seed=args.seed)
        _write_atomic(out, spectra.format_s11_csv(sp))
    elif args.kind == "tempsweep":
        temps = np.linspace(args.t_min_k, args.t_max_k, args.points)
        series = spectra.synth_temperature_sweep(
            args.f_delta, args.f0_hz, temps, noise_sigma_hz=args.noise_hz,
            rng_seed=args.seed, reference_temperature_k=args.t_ref_k)
        _write_atomic(out, spectra.format_tempsweep_csv(series))
    elif args.kind == "powersweep":
        params = tls.PowerModelParams(
            f_delta_tls=args.f_delta, n_c=args.n_c, beta=args.beta,
            q_i_res=args.q_res, temperature_k=args.temperature_k,
            f0_hz=args.f0_hz)
        phonons = np.geomspace(args.n_min, args.n_max, args.points)
        series = spectra.synth_power_sweep(params, phonons,
                                           noise_frac=args.noise_frac,
                                           rng_seed=args.seed)
        _write_atomic(out, spectra.format_powersweep_csv(series))
    elif args.kind == "afm":
        image = spectra.synth_terrace_image(
            (args.ny, args.nx), (args.pitch_m, args.pitch_m),
            step_m=args.step_m, n_terraces=args.terraces,
            noise_sigma_m=args.noise_m,
            tilt_m_per_px=(args.tilt_x, args.tilt_y), rng_seed=args.seed)
        _write_atomic(out, spectra.format_afm_grid(image))
    else:  # pragma: no cover - argparse restricts choices
        raise SawkitError(f"unknown synth kind {args.kind}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sawkit",
        description="Batch analyses for SAW-resonator surface characterization")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="random seed for anything stochastic")
    common.add_argument("--keep-going", action="store_true",
                        help="continue the batch past failing inputs")
    common.add_argument("--emit-svg", action="store_true",
                        help="also write SVG plots next to the JSON reports")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (default: current directory)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-resonance", parents=[common],
                       help="fit S11 traces to the resonance model")
    p.add_argument("inputs", nargs="+", help="S11 CSV files or directories")
    p.add_argument("--model", choices=("lorentzian", "dark"), default="lorentzian")
    p.set_defaults(func=cmd_fit_resonance)

    p = sub.add_parser("fit-tempsweep", parents=[common],
                       help="extract the TLS loss product from temperature sweeps")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=cmd_fit_tempsweep)

    p = sub.add_parser("fit-powersweep", parents=[common],
                       help="fit the TLS power-saturation model")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--fixed-beta", type=float, default=None,
                   help="hold the saturation exponent at this value")
    p.set_defaults(func=cmd_fit_powersweep)

    p = sub.add_parser("xps-quant", parents=[common],
                       help="quantify a directory of per-line XPS CSVs")
    p.add_argument("inputs", nargs="+", help="XPS CSV files or directories")
    p.add_argument("--config", default=None,
                   help="JSON with sensitivity table, windows, and band models")
    p.add_argument("--no-charge-shift", action="store_true",
                   help="skip Nb3d5/2 charge referencing")
    p.set_defaults(func=cmd_xps_quant)

    p = sub.add_parser("afm", parents=[common], help="analyze AFM height grids")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--order", type=int, choices=(0, 1, 2), default=1,
                   help="per-row polynomial order for tilt removal")
    p.add_argument("--level-points", default=None, metavar="'x1,y1 x2,y2 x3,y3'",
                   help="three-point plane leveling before the histogram")
    p.add_argument("--fit-steps", action="store_true",
                   help="fit terrace step heights from the height histogram")
    p.set_defaults(func=cmd_afm)

    p = sub.add_parser("walkoff", parents=[common],
                       help="find zero-steering drive angles in walk-off curves")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--half-width", type=int, default=0,
                   help="moving-average half width (0 = no smoothing)")
    p.set_defaults(func=cmd_walkoff)

    p = sub.add_parser("synth", parents=[common],
                       help="generate deterministic fixture files")
    p.add_argument("kind", choices=("s11", "tempsweep", "powersweep", "afm"))
    p.add_argument("--output", default=None, help="output file path")
    p.add_argument("--f0-hz", type=float, default=688.4e6)
    p.add_argument("--qi", type=float, default=6.8e3)
    p.add_argument("--qe", type=float, default=1.4e4)
    p.add_argument("--span-linewidths", type=float, default=5.0)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--noise", type=float, default=0.0,
                   help="s11: complex noise sigma per quadrature")
    p.add_argument("--dark-delta-hz", type=float, default=None,
                   help="dark-mode offset from f0 (Hz); enables the dark mode")
    p.add_argument("--dark-g-hz", type=float, default=15e3,
                   help="dark-mode coupling g/2pi in Hz")
    p.add_argument("--dark-gamma-hz", type=float, default=10e3,
                   help="dark-mode loss gamma/2pi in Hz")
    p.add_argument("--f-delta", type=float, default=7.53e-5)
    p.add_argument("--t-min-k", type=float, default=0.010)
    p.add_argument("--t-max-k", type=float, default=0.200)
    p.add_argument("--t-ref-k", type=float, default=0.200)
    p.add_argument("--noise-hz", type=float, default=0.0,
                   help="tempsweep: frequency noise per point (Hz)")
    p.add_argument("--n-c", type=float, default=1e4)
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--q-res", type=float, default=2.6e3)
    p.add_argument("--temperature-k", type=float, default=0.010)
    p.add_argument("--n-min", type=float, default=1.0)
    p.add_argument("--n-max", type=float, default=1e10)
    p.add_argument("--noise-frac", type=float, default=0.0,
                   help="powersweep: relative Q noise")
    p.add_argument("--nx", type=int, default=128)
    p.add_argument("--ny", type=int, default=128)
    p.add_argument("--pitch-m", type=float, default=1e-9)
    p.add_argument("--step-m", type=float, default=2.0e-10)
    p.add_argument("--noise-m", type=float, default=8.0e-11)
    p.add_argument("--terraces", type=int, default=3)
    p.add_argument("--tilt-x", type=float, default=0.0)
    p.add_argument("--tilt-y", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
