import numpy as np
import pytest

from sawkit.errors import ParseError, ValidationError
from sawkit.spectra import (
    AfmImage,
    ComplexSpectrum,
    PowerSweepSeries,
    TemperatureSweepSeries,
    WalkoffCurve,
    XpsSpectrum,
    format_afm_grid,
    format_powersweep_csv,
    format_s11_csv,
    format_tempsweep_csv,
    format_walkoff_csv,
    format_xps_csv,
    parse_afm_grid,
    parse_powersweep_csv,
    parse_s11_csv,
    parse_tempsweep_csv,
    parse_walkoff_csv,
    parse_xps_csv,
    synth_s11,
    synth_temperature_sweep,
)
from conftest import rates_from_qs, resonance_grid


def make_s11_text(n=8, meta=()):
    lines = list(meta) + ["freq_hz,re,im"]
    for i in range(n):
        lines.append(f"{1e6 + i},0.5,-0.1")
    return "\n".join(lines) + "\n"


class TestTypes:
    def test_complex_spectrum_basic(self):
        sp = ComplexSpectrum(np.arange(8) + 1.0, np.ones(8, complex))
        assert sp.frequencies_hz.size == 8
        assert not sp.values.flags.writeable

    def test_complex_spectrum_rejects_short(self):
        with pytest.raises(ValidationError):
            ComplexSpectrum(np.arange(7) + 1.0, np.ones(7, complex))

    def test_complex_spectrum_rejects_non_monotone(self):
        f = np.arange(8) + 1.0
        f[4] = f[3]
        with pytest.raises(ValidationError):
            ComplexSpectrum(f, np.ones(8, complex))

    def test_complex_spectrum_rejects_non_finite(self):
        v = np.ones(8, complex)
        v[2] = np.nan + 0j
        with pytest.raises(ValidationError):
            ComplexSpectrum(np.arange(8) + 1.0, v)

    def test_tempsweep_needs_four_distinct(self):
        t = np.array([0.01, 0.01, 0.05, 0.05])
        with pytest.raises(ValidationError):
            TemperatureSweepSeries(t, np.full(4, 6.9e8), np.zeros(4))

    def test_tempsweep_domain_bound(self):
        t = np.array([0.01, 0.05, 0.1, 1.5])
        with pytest.raises(ValidationError):
            TemperatureSweepSeries(t, np.full(4, 6.9e8), np.zeros(4))

    def test_powersweep_needs_three_decades(self):
        n = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
        with pytest.raises(ValidationError):
            PowerSweepSeries(n, np.full(5, 1e3), np.zeros(5), 0.01, 6.9e8)

    def test_xps_monotone_either_direction(self):
        be = np.linspace(540, 520, 21)
        sp = XpsSpectrum(be, np.ones(21), "O1s")
        asc = sp.ascending()
        assert asc.binding_energy_ev[0] < asc.binding_energy_ev[-1]
        assert np.array_equal(np.sort(sp.counts), np.sort(asc.counts))

    def test_xps_rejects_negative_counts(self):
        with pytest.raises(ValidationError):
            XpsSpectrum(np.linspace(0, 1, 5), np.array([1, -1, 1, 1, 1.0]), "O1s")

    def test_afm_min_size(self):
        with pytest.raises(ValidationError):
            AfmImage(np.zeros((8, 32)), (1e-9, 1e-9))

    def test_walkoff_span(self):
        with pytest.raises(ValidationError):
            WalkoffCurve(np.linspace(0, 45, 20), np.zeros(20))


class TestParsers:
    def test_minimal_s11(self):
        sp = parse_s11_csv(make_s11_text())
        assert sp.frequencies_hz.size == 8
        assert sp.meta == {}

    def test_s11_metadata_passthrough(self):
        sp = parse_s11_csv(make_s11_text(meta=["# temperature_mK=10"]))
        assert sp.meta["temperature_mK"] == "10"

    def test_s11_duplicate_frequency_names_line(self):
        lines = ["freq_hz,re,im"] + [f"{1e6 + i},1,0" for i in range(8)]
        lines[4] = lines[3]  # duplicate frequency on line 5
        with pytest.raises(ParseError) as err:
            parse_s11_csv("\n".join(lines))
        assert err.value.line == 5

    def test_s11_malformed_row_names_line(self):
        text = make_s11_text() + "1e7,abc,0\n"
        with pytest.raises(ParseError) as err:
            parse_s11_csv(text)
        assert err.value.line == 10

    def test_s11_too_short(self):
        with pytest.raises(ParseError):
            parse_s11_csv(make_s11_text(n=5))

    def test_xps_parse(self):
        lines = ["# line=O1s", "be_ev,counts"] + [f"{520 + i},{10 + i}" for i in range(32)]
        sp = parse_xps_csv("\n".join(lines))
        assert sp.element_line == "O1s"
        assert sp.counts.size == 32

    def test_xps_missing_line_header(self):
        lines = ["be_ev,counts"] + [f"{520 + i},1" for i in range(8)]
        with pytest.raises(ParseError):
            parse_xps_csv("\n".join(lines))

    def test_afm_constant_grid(self):
        rows = ["16 16 1e-09 1e-09"] + [" ".join(["0"] * 16)] * 16
        img = parse_afm_grid("\n".join(rows))
        assert img.nx == img.ny == 16
        assert np.all(img.heights_m == 0)

    def test_afm_row_count_mismatch(self):
        rows = ["16 16 1e-09 1e-09"] + [" ".join(["0"] * 16)] * 15
        with pytest.raises(ParseError) as err:
            parse_afm_grid("\n".join(rows))
        assert "15" in str(err.value)

    def test_afm_row_length_mismatch(self):
        rows = ["16 16 1e-09 1e-09"] + [" ".join(["0"] * 16)] * 16
        rows[7] = " ".join(["0"] * 15)
        with pytest.raises(ParseError) as err:
            parse_afm_grid("\n".join(rows))
        assert err.value.line == 8


class TestRoundTrips:
    def test_s11_roundtrip_exact(self, rng):
        freq = np.sort(rng.uniform(6e8, 7e8, 64))
        vals = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        sp = ComplexSpectrum(freq, vals, {"device": "A1", "temperature_mK": "10"})
        back = parse_s11_csv(format_s11_csv(sp))
        assert np.array_equal(back.frequencies_hz, sp.frequencies_hz)
        assert np.array_equal(back.values, sp.values)
        assert back.meta == sp.meta

    def test_xps_roundtrip_exact(self, rng):
        be = np.linspace(520, 540, 41)
        sp = XpsSpectrum(be, rng.uniform(0, 1e4, 41), "Nb3d")
        back = parse_xps_csv(format_xps_csv(sp))
        assert np.array_equal(back.binding_energy_ev, sp.binding_energy_ev)
        assert np.array_equal(back.counts, sp.counts)
        assert back.element_line == "Nb3d"

    def test_afm_roundtrip_exact(self, rng):
        img = AfmImage(rng.standard_normal((16, 24)) * 1e-10, (2e-9, 3e-9))
        back = parse_afm_grid(format_afm_grid(img))
        assert np.array_equal(back.heights_m, img.heights_m)
        assert back.pixel_pitch_m == img.pixel_pitch_m

    def test_sweep_roundtrips_exact(self, rng):
        t = np.linspace(0.01, 0.2, 12)
        ts = TemperatureSweepSeries(t, 6.9e8 + rng.standard_normal(12),
                                    np.full(12, 10.0))
        back = parse_tempsweep_csv(format_tempsweep_csv(ts))
        assert np.array_equal(back.f0_hz, ts.f0_hz)
        assert back.reference_temperature_k == ts.reference_temperature_k

        ps = PowerSweepSeries(np.geomspace(1, 1e6, 9), rng.uniform(1e3, 1e4, 9),
                              np.zeros(9), 0.01, 6.9e8)
        back = parse_powersweep_csv(format_powersweep_csv(ps))
        assert np.array_equal(back.mean_phonon_number, ps.mean_phonon_number)
        assert back.f0_hz == ps.f0_hz

        wc = WalkoffCurve(np.linspace(-90, 90, 37), rng.standard_normal(37))
        back = parse_walkoff_csv(format_walkoff_csv(wc))
        assert np.array_equal(back.eta_deg, wc.eta_deg)


class TestSynthS11:
    def test_critical_coupling_zero_on_resonance(self):
        f0 = 6.9e8
        kappa = 2.0 * np.pi * 2e5
        fwhm = kappa / (2 * np.pi)
        grid = np.linspace(f0 - 5 * fwhm, f0 + 5 * fwhm, 1001)  # odd: includes f0
        sp = synth_s11(f0, kappa, kappa / 2.0, grid)
        assert abs(sp.values[500]) < 1e-12

    def test_off_resonant_limit(self):
        f0 = 6.9e8
        kappa = 2.0 * np.pi * 2e5
        grid = np.linspace(f0 + 1e8, f0 + 2e8, 16)
        sp = synth_s11(f0, kappa, kappa / 3.0, grid)
        assert np.all(np.abs(sp.values - 1.0) < 1e-3)

    def test_rejects_nonphysical_rates(self):
        grid = np.linspace(1e6, 2e6, 16)
        with pytest.raises(ValidationError):
            synth_s11(1.5e6, 1e4, 2e4, grid)  # kappa_e > kappa
        with pytest.raises(ValidationError):
            synth_s11(1.5e6, -1e4, -2e4, grid)

    def test_deterministic_under_seed(self):
        kappa, kappa_e = rates_from_qs(6.9e8, 5e3, 2e4)
        grid = resonance_grid(6.9e8, 5e3, 2e4, points=201)
        a = synth_s11(6.9e8, kappa, kappa_e, grid, noise_sigma=0.01, rng_seed=11)
        b = synth_s11(6.9e8, kappa, kappa_e, grid, noise_sigma=0.01, rng_seed=11)
        assert np.array_equal(a.values, b.values)
        c = synth_s11(6.9e8, kappa, kappa_e, grid, noise_sigma=0.01, rng_seed=12)
        assert not np.array_equal(a.values, c.values)

    def test_passive_magnitude_bound(self, rng):
        # |S11| <= 1 + 5*sigma for passive parameters, including dark modes
        for trial in range(25):
            f0 = rng.uniform(6e8, 8e8)
            qi = rng.uniform(2e3, 2e4)
            qe = rng.uniform(5e3, 5e4)
            kappa, kappa_e = rates_from_qs(f0, qi, qe)
            sigma = rng.uniform(0, 0.02)
            dark = None
            if trial % 2:
                dark = (2 * np.pi * rng.uniform(1e3, 3e4),
                        rng.uniform(-2e5, 2e5),
                        2 * np.pi * rng.uniform(1e3, 3e4))
            grid = resonance_grid(f0, qi, qe, points=501)
            sp = synth_s11(f0, kappa, kappa_e, grid, dark=dark,
                           noise_sigma=sigma, rng_seed=trial)
            assert np.all(np.abs(sp.values) <= 1.0 + 5.0 * sigma)


class TestSynthTempSweep:
    def test_zero_tls_density_flat(self):
        t = np.linspace(0.01, 0.2, 10)
        s = synth_temperature_sweep(0.0, 6.9e8, t)
        assert np.all(s.f0_hz == s.f0_hz[0])

    def test_reference_anchoring(self):
        t = np.array([0.01, 0.05, 0.1, 0.2])
        s = synth_temperature_sweep(7.53e-5, 6.9e8, t, reference_temperature_k=0.2)
        assert s.f0_hz[-1] == pytest.approx(6.9e8, abs=1e-6)

    def test_redshift_magnitude_against_scalar_oracle(self, series_digamma_oracle):
        # independent evaluation of the shift model via the series digamma
        f_delta, f0 = 7.53e-5, 6.9e8
        t = np.linspace(0.01, 0.2, 20)
        s = synth_temperature_sweep(f_delta, f0, t)
        hbar, kb = 1.054571817e-34, 1.380649e-23

        def bracket(temp):
            y = hbar * f0 / (kb * temp)
            return series_digamma_oracle(y, n_terms=300_000) - np.log(y)

        expected = f0 * (1.0 + (f_delta / np.pi) * (np.array([bracket(x) for x in t])
                                                    - bracket(0.2)))
        assert np.allclose(s.f0_hz, expected, rtol=0, atol=f0 * 1e-10)
        # redshift toward low temperature, tens of kHz in scale; monotone
        # above the low-temperature turning point of the shift model
        shifts = s.f0_hz - s.f0_hz[-1]
        assert np.all(shifts[:-1] < 0)
        assert 1e4 < -shifts[0] < 1e5
        i_turn = int(np.argmin(s.f0_hz))
        assert t[i_turn] < 0.03
        assert np.all(np.diff(s.f0_hz[i_turn:]) > 0)

    def test_empty_temperatures_rejected(self):
        with pytest.raises(ValidationError):
            synth_temperature_sweep(1e-5, 6.9e8, [])
