import configparser
import math
import struct

import numpy as np
import pytest

from nsreg.checkpoint import HEADER, MAGIC, read_checkpoint, write_checkpoint
from nsreg.cli import main
from nsreg.errors import CheckpointError
from nsreg.fields import GridSpec, gen_beltrami, gen_random_solenoidal, gen_taylor_green
from nsreg.manifest import parse_manifest
from nsreg.operators import curl

BELTRAMI_MANIFEST = """\
[solver]
n = 16
viscosity = 0.1
dt = 0.001
horizon = 1.0
save_every = 10

[initial]
kind = beltrami
k = 1
amplitude = 1.0

[run]
seed = 1

[criterion paper_inf]
kind = paper
p = inf

[criterion bkm]
kind = bkm
"""

SHORT_MANIFEST = """\
[solver]
n = 8
viscosity = 0.05
dt = 0.01
horizon = 0.1
save_every = 2

[initial]
kind = {kind}

[run]
seed = 3

[criterion paper_inf]
kind = paper
p = inf

[criterion serrin]
kind = serrin
p = 6
"""


def read_ini(path):
    cp = configparser.ConfigParser()
    cp.read(path)
    return cp


class TestCheckpoint:
    def test_round_trip_bit_exact(self, tmp_path, grid16):
        f = gen_random_solenoidal(grid16, 5).replace(gen_random_solenoidal(grid16, 5).coeffs, time=0.25)
        path = tmp_path / "f.nsck"
        write_checkpoint(path, f)
        g = read_checkpoint(path)
        assert g.coeffs.tobytes() == f.coeffs.tobytes()
        assert g.time == 0.25 and g.grid == grid16

    def test_layout(self, tmp_path, grid8):
        f = gen_beltrami(grid8, 1)
        path = tmp_path / "b.nsck"
        write_checkpoint(path, f)
        data = path.read_bytes()
        assert len(data) == HEADER.size + 2 * 3 * 8**3 * 8
        magic, version, n, box, t, ncomp = HEADER.unpack_from(data)
        assert (magic, version, n, ncomp) == (MAGIC, 1, 8, 3) and math.isnan(t)
        assert box == 2 * math.pi
        payload = np.frombuffer(data[HEADER.size:], dtype="<f8")
        # component 1, k = (1, 0, 0): flat index 1 * 512 + 1 * 64, (re, im) interleaved
        idx = 2 * (512 + 64)
        assert payload[idx] == 0.0 and payload[idx + 1] == -0.5

    def test_truncated(self, tmp_path, grid8):
        path = tmp_path / "t.nsck"
        write_checkpoint(path, gen_beltrami(grid8, 1))
        path.write_bytes(path.read_bytes()[:-17])
        with pytest.raises(CheckpointError) as info:
            read_checkpoint(path)
        assert info.value.offset == HEADER.size + 2 * 3 * 8**3 * 8 - 17

    def test_bad_magic(self, tmp_path, grid8):
        path = tmp_path / "m.nsck"
        write_checkpoint(path, gen_beltrami(grid8, 1))
        data = bytearray(path.read_bytes())
        data[0:1] = b"X"
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError) as info:
            read_checkpoint(path)
        assert info.value.offset == 0


class TestManifest:
    def test_parse(self):
        m = parse_manifest(BELTRAMI_MANIFEST)
        assert m.config.grid.n == 16 and m.config.viscosity == 0.1
        assert [c.id for c in m.monitors] == ["paper_inf", "bkm"]
        assert m.monitors[0].theta == 2.0
        assert m.initial_condition == "beltrami" and m.seed == 1

    def test_custom_criterion_and_forcing(self):
        text = SHORT_MANIFEST.format(kind="random") + (
            "\n[criterion lps]\nkind = custom\ntarget = velocity\np = 6\nscaling_sum = 1\n"
            "\n[forcing]\nkind = beltrami\nk = 1\namplitude = 0.1\n"
        )
        m = parse_manifest(text)
        lps = m.monitors[-1]
        assert lps.theta == pytest.approx(4.0) and lps.scaling_sum == 1.0
        assert m.config.forcing is not None


def test_verify_ok(capsys):
    assert main(["verify", "--n", "16", "--seed", "1", "--tol", "1e-10"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") == 14


def test_verify_bad_n(capsys):
    assert main(["verify", "--n", "7"]) == 2


def test_verify_impossible_tolerance(capsys):
    assert main(["verify", "--n", "8", "--tol", "1e-30"]) == 1
    out = capsys.readouterr().out
    # every check is still listed after the first failure
    assert out.count("PASS") + out.count("FAIL ") == 14
    assert "FAILED: round_trip" in out


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 2


@pytest.fixture(scope="module")
def beltrami_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("runs")
    man = d / "beltrami.ini"
    man.write_text(BELTRAMI_MANIFEST)
    out = d / "out"
    assert main(["run", "--manifest", str(man), "--out", str(out)]) == 0
    return out


class TestRunCommand:
    def test_summary_closed_form(self, beltrami_dir):
        cp = read_ini(beltrami_dir / "summary.ini")
        sec = cp["criterion paper_inf"]
        assert float(sec["final_value"]) == pytest.approx(0.952023, abs=1e-4)
        assert sec["verdict"] == "FINITE" and float(sec["theta"]) == 2.0
        assert cp["run"]["verdict"] == "FINITE"

    def test_outputs(self, beltrami_dir):
        ck = sorted((beltrami_dir / "checkpoints").iterdir())
        assert len(ck) == 101
        f = read_checkpoint(ck[-1])
        assert f.time == pytest.approx(1.0)
        lines = (beltrami_dir / "diagnostics.csv").read_text().splitlines()
        assert lines[0] == "t,energy,enstrophy,vorticity_hm1_inf,paper_inf,bkm"
        assert len(lines) == 102
        # 17 significant digits in scientific notation
        assert lines[1].split(",")[1] == f"{0.5 * (2 * math.pi) ** 3:.16e}"

    def test_zero_initial_condition(self, tmp_path):
        man = tmp_path / "zero.ini"
        man.write_text(SHORT_MANIFEST.format(kind="zero"))
        assert main(["run", "--manifest", str(man), "--out", str(tmp_path / "o")]) == 0
        rows = (tmp_path / "o" / "diagnostics.csv").read_text().splitlines()[1:]
        for row in rows:
            assert all(float(x) == 0.0 for x in row.split(",")[1:])

    def test_deterministic_csv(self, tmp_path):
        man = tmp_path / "r.ini"
        man.write_text(SHORT_MANIFEST.format(kind="random"))
        for d in ("a", "b"):
            assert main(["run", "--manifest", str(man), "--out", str(tmp_path / d)]) == 0
        a = (tmp_path / "a" / "diagnostics.csv").read_bytes()
        b = (tmp_path / "b" / "diagnostics.csv").read_bytes()
        assert a == b

    def test_p3_rejected(self, tmp_path, capsys):
        man = tmp_path / "p3.ini"
        man.write_text(SHORT_MANIFEST.format(kind="zero").replace("p = inf", "p = 3"))
        assert main(["run", "--manifest", str(man), "--out", str(tmp_path / "o")]) == 2
        assert "must exceed 3" in capsys.readouterr().err

    def test_unreadable_manifest(self, tmp_path):
        assert main(["run", "--manifest", str(tmp_path / "missing.ini"), "--out", str(tmp_path / "o")]) == 2
        bad = tmp_path / "bad.ini"
        bad.write_text("this is not a manifest\n")
        assert main(["run", "--manifest", str(bad), "--out", str(tmp_path / "o")]) == 2

    def test_non_empty_output_dir(self, beltrami_dir, tmp_path):
        man = tmp_path / "z.ini"
        man.write_text(SHORT_MANIFEST.format(kind="zero"))
        assert main(["run", "--manifest", str(man), "--out", str(beltrami_dir)]) == 2


class TestNormsCommand:
    def test_beltrami_sup(self, tmp_path, capsys, grid16):
        path = tmp_path / "b.nsck"
        write_checkpoint(path, gen_beltrami(grid16, 1))
        assert main(["norms", "--field", str(path), "--p", "inf", "--s", "0"]) == 0
        row = capsys.readouterr().out.splitlines()[1].split()
        assert float(row[2]) == pytest.approx(1.0, abs=1e-15)

    def test_taylor_green_l2(self, tmp_path, capsys, grid16):
        path = tmp_path / "tg.nsck"
        write_checkpoint(path, gen_taylor_green(grid16))
        assert main(["norms", "--field", str(path), "--p", "2"]) == 0
        row = capsys.readouterr().out.splitlines()[1].split()
        assert float(row[2]) == pytest.approx(math.sqrt(2 * math.pi**3), rel=1e-13)

    def test_curl_of_beltrami(self, tmp_path, capsys, grid16):
        path = tmp_path / "w.nsck"
        write_checkpoint(path, curl(gen_beltrami(grid16, 2)))
        assert main(["norms", "--field", str(path), "--p", "2,4", "--s", "-1"]) == 0
        rows = [r.split() for r in capsys.readouterr().out.splitlines()[1:]]
        l2 = math.sqrt(2 * math.pi) ** 3  # ||beltrami(2)||_2 = |Omega|^(1/2)
        assert float(rows[0][2]) == pytest.approx(l2, rel=1e-13)
        assert len(rows) == 2

    def test_corrupt(self, tmp_path, capsys):
        path = tmp_path / "c.nsck"
        path.write_bytes(b"garbage")
        assert main(["norms", "--field", str(path), "--p", "2"]) == 2
        assert "byte offset" in capsys.readouterr().err


class TestReportCommand:
    def test_beltrami(self, beltrami_dir):
        assert main(["report", "--in", str(beltrami_dir), "--emit-plot-script"]) == 0
        cp = read_ini(beltrami_dir / "report.ini")
        assert float(cp["criterion paper_inf"]["final_value"]) == pytest.approx(0.952023, abs=1e-4)
        assert cp["criterion paper_inf"]["verdict"] == "FINITE"
        assert float(cp["run"]["blowup_indicator_sup"]) == pytest.approx(1.0, rel=1e-12)
        script = (beltrami_dir / "plot_diagnostics.gp").read_text()
        assert "diagnostics.csv" in script and "paper_inf" in script
        # report and run summaries agree
        assert (beltrami_dir / "report.ini").read_text() == (beltrami_dir / "summary.ini").read_text()

    def test_empty_dir(self, tmp_path):
        assert main(["report", "--in", str(tmp_path)]) == 2

    def test_diverged_run(self, tmp_path):
        d = tmp_path / "div"
        d.mkdir()
        (d / "diagnostics.csv").write_text(
            "t,energy,enstrophy,vorticity_hm1_inf,paper_inf\n"
            "0.0,1.0,1.0,1.0,1.0\n0.1,1.0,2.0,2.0,2.0\n0.2,1.0,9.0,5.0,5.0\n0.3,inf,inf,inf,inf\n"
        )
        (d / "criteria.ini").write_text(
            "[run]\nverdict = DIVERGED\n\n[criterion paper_inf]\ntarget = VORTICITY\n"
            "spatial_kind = NEG_SOBOLEV\np = inf\nsobolev_order = -1.0\ntheta = 2.0\nscaling_sum = 1.0\n"
        )
        assert main(["report", "--in", str(d)]) == 0
        cp = read_ini(d / "report.ini")
        assert cp["run"]["verdict"] == "DIVERGED"
        assert cp["criterion paper_inf"]["verdict"] == "DIVERGED"
        assert cp["run"]["blowup_indicator_verdict"] == "DIVERGED"
        assert int(cp["run"]["blowup_indicator_samples"]) == 3
        assert float(cp["run"]["blowup_indicator_sup"]) == 5.0
