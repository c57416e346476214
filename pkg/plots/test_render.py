"""Tests for the plotting scripts.

Input CSVs are produced by the primary command-line tool, so these tests
exercise the documented CSV schemas end to end.  The primary package never
imports anything from here.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))
import render  # noqa: E402

from polar_trellis import cli  # noqa: E402
from polar_trellis import analysis as an  # noqa: E402


@pytest.fixture(scope="module")
def csvs(tmp_path_factory):
    d = tmp_path_factory.mktemp("csv")
    va = d / "va.csv"
    cap = d / "cap.csv"
    fer = d / "fer.csv"
    assert cli.main(["va", "--channel", "m1g", "--variant", "both", "--n", "8",
                     "--m", "200", "--snr=-6:3:0", "--seed", "3",
                     "--batch", "64", "-o", str(va)]) == 0
    assert cli.main(["capacity", "--channel", "m1g", "--variant", "both",
                     "--n", "8", "--m", "200", "--snr", "0", "--seed", "3",
                     "--batch", "64", "-o", str(cap)]) == 0
    assert cli.main(["fer", "--channel", "m1g", "--variant", "both", "--n", "8",
                     "--k", "4", "--list", "2", "--trials", "48",
                     "--snr=-2,0", "--seed", "3", "--batch", "16",
                     "--design-m", "200",
                     "--cache-dir", str(d / "cache"), "-o", str(fer)]) == 0
    return {"va": va, "cap": cap, "fer": fer, "dir": d}


def test_render_va(csvs, tmp_path):
    out = tmp_path / "va.png"
    assert render.main(["va", str(csvs["va"]), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_render_capacity_bars(csvs, tmp_path):
    out = tmp_path / "cap.png"
    assert render.main(["capacity_bars", str(csvs["cap"]), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_render_fer(csvs, tmp_path):
    out = tmp_path / "fer.png"
    assert render.main(["fer", str(csvs["fer"]), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_render_fer_zero_error_points(tmp_path):
    # a record with zero errors is drawn at its CI upper bound, not dropped
    rec = an.FerRecord(1.0, 8, 4, "lps", "m1g", 2, 100, 0, 1)
    path = tmp_path / "fer0.csv"
    an.write_fer_csv(path, [rec])
    out = tmp_path / "fer0.png"
    assert render.main(["fer", str(path), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_schema_mismatch_errors(csvs, tmp_path):
    # wrong schema for the requested kind
    assert render.main(["va", str(csvs["fer"]), "-o", str(tmp_path / "x.png")]) == 2
    assert not (tmp_path / "x.png").exists()


def test_empty_csv_errors(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text("snr_db,avg,var,variant,channel,N,M\n")
    assert render.main(["va", str(p), "-o", str(tmp_path / "y.png")]) == 2
    assert not (tmp_path / "y.png").exists()


def test_capacity_bars_rejects_multiple_snrs(csvs, tmp_path):
    multi = tmp_path / "multi.csv"
    text = csvs["cap"].read_text().rstrip("\n").splitlines()
    extra = text[1].split(",")
    extra[0] = "5.0"
    multi.write_text("\n".join(text + [",".join(extra)]) + "\n")
    assert render.main(["capacity_bars", str(multi),
                        "-o", str(tmp_path / "z.png")]) == 2


def test_identical_inputs_identical_images(csvs, tmp_path):
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    assert render.main(["va", str(csvs["va"]), "-o", str(a)]) == 0
    assert render.main(["va", str(csvs["va"]), "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_multiple_csv_inputs(csvs, tmp_path):
    out = tmp_path / "both.png"
    assert render.main(["va", str(csvs["va"]), str(csvs["va"]),
                        "-o", str(out)]) == 0
    assert out.stat().st_size > 0
