"""Command-line interface: exit codes, file formats, determinism."""

import json
import math
import os

import numpy as np
import pytest

from gamow_lab.cli import (
    EXIT_OK,
    EXIT_USAGE,
    _parse_times,
    main,
)


def read_csv(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].startswith("# config: ")
    config = json.loads(lines[0][len("# config: "):])
    header = lines[1].split(",")
    rows = [ln.split(",") for ln in lines[2:]]
    return config, header, rows


class TestParseTimes:
    def test_geometric(self):
        t = _parse_times("1:100:25")
        assert t[0] == 1.0 and t[-1] == pytest.approx(100.0)
        assert t.size == 51

    def test_comma_list(self):
        assert np.allclose(_parse_times("0,0.5,2"), [0.0, 0.5, 2.0])

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            _parse_times("fast")


class TestPoles:
    def test_table_contents(self, tmp_path):
        rc = main(["poles", "--lambda", "100", "--kmax", "16",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        config, header, rows = read_csv(tmp_path / "poles.csv")
        assert config["lam"] == 100.0
        assert header[:3] == ["n", "re_ka", "im_ka"]
        assert len(rows) == 5
        # residuals at machine precision, widths strictly increasing
        residuals = [float(r[header.index("residual")]) for r in rows]
        assert max(residuals) < 1e-12
        gammas = [float(r[header.index("gamma")]) for r in rows]
        assert gammas == sorted(gammas)

    def test_empty_table_is_success(self, tmp_path):
        rc = main(["poles", "--lambda", "100", "--kmax", "3",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        _, _, rows = read_csv(tmp_path / "poles.csv")
        assert rows == []

    def test_json_format(self, tmp_path):
        rc = main(["poles", "--lambda", "100", "--kmax", "16",
                   "--out", str(tmp_path), "--format", "json"])
        assert rc == EXIT_OK
        doc = json.loads((tmp_path / "poles.json").read_text())
        assert doc["config"]["lam"] == 100.0
        assert len(doc["rows"]) == 5

    def test_seventeen_significant_digits(self, tmp_path):
        main(["poles", "--lambda", "100", "--kmax", "16",
              "--out", str(tmp_path)])
        _, header, rows = read_csv(tmp_path / "poles.csv")
        val = rows[0][header.index("re_ka")]
        assert float(val) != float(f"{float(val):.10g}")  # not truncated


class TestEvolve:
    def test_initial_snapshot_matches_profile(self, tmp_path):
        rc = main(["evolve", "--lambda", "100", "--profile", "box:1",
                   "--times", "0", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        _, header, rows = read_csv(tmp_path / "evolve_t0.csv")
        ix, ia = header.index("x"), header.index("abs2_psi")
        for r in rows:
            x, dens = float(r[ix]), float(r[ia])
            assert dens == pytest.approx(2.0 * math.sin(math.pi * x) ** 2,
                                         abs=1e-4)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_both_policies_agree(self, tmp_path, capsys):
        rc = main(["evolve", "--lambda", "100", "--profile", "box:1",
                   "--times", "84", "--policy", "both",
                   "--out", str(tmp_path)])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        sup = float(out.split("sup-norm")[1].split(")")[0])
        assert sup < 1e-6

    def test_negative_time_rejected(self, tmp_path):
        rc = main(["evolve", "--lambda", "100", "--profile", "box:1",
                   "--times", "-1", "--out", str(tmp_path)])
        assert rc == EXIT_USAGE

    def test_bad_profile_rejected(self, tmp_path):
        rc = main(["evolve", "--lambda", "100", "--profile", "ring:1",
                   "--times", "0", "--out", str(tmp_path)])
        assert rc == EXIT_USAGE


class TestSurvival:
    def test_outputs(self, tmp_path):
        rc = main(["survival", "--lambda", "100", "--profile", "box:1",
                   "--times", "20,40,84", "--out", str(tmp_path)])
        assert rc == EXIT_OK
        _, header, rows = read_csv(tmp_path / "survival.csv")
        iP = header.index("P")
        Ps = [float(r[iP]) for r in rows]
        assert Ps == sorted(Ps, reverse=True)
        rep = json.loads((tmp_path / "survival_report.json").read_text())
        assert rep["gamma1_exact"] > 0.0
        assert rep["gamma_fit"] == pytest.approx(rep["gamma1_exact"],
                                                 rel=0.02)


class TestUsageErrors:
    def test_missing_subcommand(self):
        assert main([]) == EXIT_USAGE

    def test_unknown_flag(self):
        assert main(["poles", "--lambda", "100", "--frobnicate"]) == EXIT_USAGE

    def test_missing_required(self):
        assert main(["poles"]) == EXIT_USAGE


class TestDeterminism:
    def test_byte_identical_reruns(self, tmp_path):
        args = ["poles", "--lambda", "10", "--kmax", "16",
                "--out", str(tmp_path)]
        main(args)
        first = (tmp_path / "poles.csv").read_bytes()
        main(args)
        assert (tmp_path / "poles.csv").read_bytes() == first

    def test_no_temp_files_left(self, tmp_path):
        main(["poles", "--lambda", "10", "--kmax", "16",
              "--out", str(tmp_path)])
        assert os.listdir(tmp_path) == ["poles.csv"]
