"""Snapshot, ledger, and report file formats."""

import numpy as np
import pytest

from spectralns.convergence import ConvergenceReport
from spectralns.diagnostics import DiagnosticsRecord, EnergyLedger
from spectralns.grid import GridSpec, SpectralField
from spectralns.monitor import SpectrumProfile, fit_strip, shell_spectrum
from spectralns.storage import (
    LEDGER_COLUMNS,
    read_ledger,
    read_snapshot,
    read_strip_fits,
    write_convergence_report,
    write_ledger,
    write_report,
    write_snapshot,
    write_spectra,
    write_strip_fits,
)


def random_field(n=8, seed=0):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((3, n, n, n)) + 1j * rng.standard_normal((3, n, n, n))
    return SpectralField(c.astype(np.complex128), GridSpec(n))


def awkward_record(step, t):
    # values chosen to need all 17 significant digits
    return DiagnosticsRecord(
        step=step,
        t=t,
        dt=1.0 / 3.0,
        energy=np.pi**3,
        dissipation=2.0 / 7.0,
        power_in=-1.2345678901234567e-8,
        max_velocity=1.0 + 2**-52,
        max_vorticity=1e300,
        bkm_integral=0.1 * step,
        residual=5e-324,
        residual_accum=1e-17 * step,
    )


class TestSnapshots:
    def test_round_trip_is_bitwise(self, tmp_path):
        field = random_field(8, seed=3)
        path = tmp_path / "state.snsf"
        write_snapshot(path, field, t=0.125)
        back, t = read_snapshot(path)
        assert t == 0.125
        assert back.grid.n_points == 8
        assert back.coeffs.tobytes() == field.coeffs.tobytes()

    def test_reader_applies_requested_dealias_rule(self, tmp_path):
        path = tmp_path / "state.snsf"
        write_snapshot(path, random_field(8), t=0.0)
        back, _ = read_snapshot(path, dealias_rule="none")
        assert back.grid.dealias_rule == "none"

    def test_bad_magic_names_the_file(self, tmp_path):
        path = tmp_path / "junk.snsf"
        path.write_bytes(b"NOPE!" + b"\x00" * 64)
        with pytest.raises(ValueError, match="junk.snsf"):
            read_snapshot(path)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "short.snsf"
        path.write_bytes(b"SNSF1\x08\x00")
        with pytest.raises(ValueError, match="truncated"):
            read_snapshot(path)

    def test_truncated_payload(self, tmp_path):
        field = random_field(8)
        path = tmp_path / "cut.snsf"
        write_snapshot(path, field, t=0.0)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) // 2])
        with pytest.raises(ValueError, match="expected"):
            read_snapshot(path)


class TestLedgerFiles:
    def test_round_trip_exact(self, tmp_path):
        ledger = EnergyLedger([awkward_record(i, 0.01 * i) for i in range(5)])
        path = tmp_path / "ledger.csv"
        write_ledger(path, ledger)
        back = read_ledger(path)
        assert len(back) == 5
        for a, b in zip(ledger, back):
            assert a == b  # float64 survives the 17-digit round trip

    def test_header_mismatch_rejected(self, tmp_path):
        path = tmp_path / "ledger.csv"
        path.write_text("step,t,energy\n0,0.0,1.0\n")
        with pytest.raises(ValueError, match="header"):
            read_ledger(path)

    def test_malformed_row_rejected(self, tmp_path):
        path = tmp_path / "ledger.csv"
        path.write_text(",".join(LEDGER_COLUMNS) + "\n0,0.0,1.0\n")
        with pytest.raises(ValueError, match="malformed"):
            read_ledger(path)

    def test_reader_enforces_ledger_invariants(self, tmp_path):
        ledger = EnergyLedger([awkward_record(i, 0.01 * i) for i in range(2)])
        path = tmp_path / "ledger.csv"
        write_ledger(path, ledger)
        lines = path.read_text().splitlines()
        lines.append(lines[1])  # replay row 0: step goes backwards
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="advance"):
            read_ledger(path)


class TestReports:
    def test_report_formats_floats_at_17_digits(self, tmp_path):
        path = tmp_path / "report.txt"
        write_report(path, {"t_num": 1.0 / 3.0, "steps": 12, "verdict": "none"})
        text = path.read_text()
        assert "t_num: 0.33333333333333331" in text
        assert "steps: 12" in text
        assert "verdict: none" in text

    def test_convergence_report_with_rate(self, tmp_path):
        report = ConvergenceReport(
            kind="temporal",
            parameters=(2e-3, 1e-3, 5e-4),
            errors=(1.6e-9, 1e-10, 6.2e-12),
            fitted_rate=4.005,
            fit_r2=0.9999,
        )
        path = tmp_path / "conv.txt"
        write_convergence_report(path, report)
        text = path.read_text()
        assert "kind: temporal" in text
        assert "fitted_rate: 4.0049999999999999" in text
        assert "dt,error" in text
        assert "0.002,1.6000000000000001e-09" in text

    def test_convergence_report_without_rate(self, tmp_path):
        report = ConvergenceReport(
            kind="spatial",
            parameters=(2, 4, 5),
            errors=(0.0, 0.0, 0.0),
            fitted_rate=None,
            fit_r2=None,
            flags=("zero error against the reference; rate fit skipped",),
        )
        path = tmp_path / "conv.txt"
        write_convergence_report(path, report)
        text = path.read_text()
        assert "fitted_rate: none" in text
        assert "rate fit skipped" in text
        assert "k_max,error" in text

    def test_combined_report_lists_dominance(self, tmp_path):
        report = ConvergenceReport(
            kind="combined",
            parameters=((8, 1e-3), (16, 5e-4)),
            errors=(0.5, 0.1),
            fitted_rate=None,
            fit_r2=0.98,
            model_coeffs=(1.0, 2.0, 0.7),
            dominance=("spatial", "temporal"),
        )
        path = tmp_path / "conv.txt"
        write_convergence_report(path, report)
        text = path.read_text()
        assert "n,dt,error,dominant_term" in text
        assert "8,0.001,0.5,spatial" in text
        assert "model: " in text


class TestSpectraFiles:
    def field(self):
        g = GridSpec(32)
        mag = np.exp(-0.5 * np.sqrt(g.ksq))
        c = np.zeros((3, 32, 32, 32), dtype=np.complex128)
        c[0] = mag
        return SpectralField(c, g)

    def test_spectra_rows(self, tmp_path):
        profiles = [
            shell_spectrum(self.field(), t=0.0),
            shell_spectrum(self.field(), t=0.5),
        ]
        path = tmp_path / "spectra.csv"
        write_spectra(path, profiles)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,shell,amplitude"
        assert len(lines) == 1 + 2 * GridSpec(32).k_max

    def test_strip_fit_round_trip(self, tmp_path):
        fitted = fit_strip(shell_spectrum(self.field(), t=0.25))
        unfitted = shell_spectrum(self.field(), t=0.75)
        path = tmp_path / "fits.csv"
        write_strip_fits(path, [fitted, unfitted])
        back = read_strip_fits(path)
        assert len(back) == 1  # unfitted profiles are skipped
        assert back[0].t == 0.25
        assert back[0].fit_delta == fitted.fit_delta
        assert back[0].fit_c_star == fitted.fit_c_star
        assert back[0].fit_r2 == fitted.fit_r2
        assert back[0].fit_window == fitted.fit_window
