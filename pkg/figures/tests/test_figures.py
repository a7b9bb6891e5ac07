import subprocess
import sys
from pathlib import Path

import pytest

FIGDIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(FIGDIR))

from figlib import FigureError, read_columns  # noqa: E402

DOR_CSV = """\
# recdyn grid-dor manifest=abcdef0123456789
# columns: N grid order; D recurrent fraction in [0,1]
N,D,stabilization_t,tau_1,tau_2
128,0.438,40,0.672,0.577
256,0.289,55,0.644,0.537
512,0.162,70,0.628,0.512
"""

DECAY_CSV = """\
# recdyn tau-decay manifest=0123456789abcdef
# columns: k sequence length; tau_mean mean rate; tau_stderr combined MC error
k,tau_mean,tau_stderr
1,0.81,0.01
2,0.72,0.011
5,0.58,0.012
25,0.24,0.012
"""


def run(script, *args):
    return subprocess.run(
        [sys.executable, str(FIGDIR / script), *map(str, args)],
        capture_output=True,
        text=True,
    )


def test_plot_dor_renders(tmp_path):
    csv = tmp_path / "dor.csv"
    csv.write_text(DOR_CSV)
    out = tmp_path / "dor.png"
    res = run("plot_dor", csv, out)
    assert res.returncode == 0, res.stderr
    data = out.read_bytes()
    assert data[:8] == b"\x89PNG\r\n\x1a\n"
    assert len(data) > 1000


def test_plot_dor_minimal_two_rows(tmp_path):
    csv = tmp_path / "tiny.csv"
    csv.write_text("N,D\n128,0.4\n256,0.3\n")
    out = tmp_path / "tiny.png"
    res = run("plot_dor", csv, out)
    assert res.returncode == 0, res.stderr
    assert out.stat().st_size > 0


def test_plot_dor_missing_column(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("N,degree\n128,0.4\n")
    res = run("plot_dor", csv, tmp_path / "bad.png")
    assert res.returncode != 0
    assert "missing columns" in res.stderr
    assert not (tmp_path / "bad.png").exists()


def test_plot_dor_empty_and_comment_only(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    res = run("plot_dor", empty, tmp_path / "e.png")
    assert res.returncode != 0

    comments = tmp_path / "comments.csv"
    comments.write_text("# nothing here\n# at all\n")
    res = run("plot_dor", comments, tmp_path / "c.png")
    assert res.returncode != 0

    headless = tmp_path / "headless.csv"
    headless.write_text("N,D\n")
    res = run("plot_dor", headless, tmp_path / "h.png")
    assert res.returncode != 0


def test_plot_dor_non_numeric(tmp_path):
    csv = tmp_path / "text.csv"
    csv.write_text("N,D\n128,lots\n")
    res = run("plot_dor", csv, tmp_path / "t.png")
    assert res.returncode != 0
    assert "bad value" in res.stderr


def test_plot_dor_missing_file(tmp_path):
    res = run("plot_dor", tmp_path / "nope.csv", tmp_path / "n.png")
    assert res.returncode != 0


def test_usage_message():
    res = run("plot_dor")
    assert res.returncode != 0
    assert "Usage" in res.stderr
    res = run("plot_decay", "a", "b", "c")
    assert res.returncode != 0


def test_plot_decay_renders_error_bars(tmp_path):
    csv = tmp_path / "decay.csv"
    csv.write_text(DECAY_CSV)
    out = tmp_path / "decay.png"
    res = run("plot_decay", csv, out)
    assert res.returncode == 0, res.stderr
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_plot_decay_constant_column(tmp_path):
    csv = tmp_path / "flat.csv"
    csv.write_text("k,tau_mean,tau_stderr\n1,0.5,0.01\n2,0.5,0.01\n3,0.5,0.01\n")
    out = tmp_path / "flat.png"
    res = run("plot_decay", csv, out)
    assert res.returncode == 0, res.stderr
    assert out.stat().st_size > 0


def test_plot_decay_requires_error_column(tmp_path):
    csv = tmp_path / "noerr.csv"
    csv.write_text("k,tau_mean\n1,0.5\n")
    res = run("plot_decay", csv, tmp_path / "x.png")
    assert res.returncode != 0
    assert "tau_stderr" in res.stderr


def test_rerender_is_identical(tmp_path):
    csv = tmp_path / "dor.csv"
    csv.write_text(DOR_CSV)
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    assert run("plot_dor", csv, a).returncode == 0
    assert run("plot_dor", csv, b).returncode == 0
    assert a.read_bytes() == b.read_bytes()


def test_read_columns_direct(tmp_path):
    csv = tmp_path / "mix.csv"
    csv.write_text("# comment\nk,v\n1,2.5\n# stray comment between rows\n2,3.5\n")
    ks, vs = read_columns(csv, ["k", "v"])
    assert ks == [1.0, 2.0]
    assert vs == [2.5, 3.5]
    with pytest.raises(FigureError):
        read_columns(csv, ["k", "w"])
    with pytest.raises(FigureError):
        read_columns(tmp_path / "absent.csv", ["k"])
