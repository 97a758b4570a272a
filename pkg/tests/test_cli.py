import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from heinzlab import linalg, scalar
from heinzlab.cli import main, parse_grid
from heinzlab.errors import DomainError
from heinzlab.scalar import PositivePair, WeightSplit


def run(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    table = list(csv.reader(io.StringIO(text)))
    return table[0], table[1:]


@pytest.fixture
def triple_file(tmp_path):
    g = np.random.default_rng(3)
    docs = {}
    for k in "AB":
        z = g.standard_normal((3, 3)) + 1j * g.standard_normal((3, 3))
        m = z @ z.conj().T
        docs[k] = linalg.matrix_to_doc((m + m.conj().T) / 2)
    docs["X"] = linalg.matrix_to_doc(g.standard_normal((3, 3)))
    path = tmp_path / "t.json"
    path.write_text(json.dumps(docs))
    return path


# ---------------------------------------------------------------- eval


def test_eval_heinz_mean(capsys):
    code, out, _ = run(capsys, "eval", "--op", "heinz-mean", "--a", "9", "--b", "1", "--nu", "0.25")
    assert code == 0 and out.strip() == "3.4641016151377544"


def test_eval_young_equal_arguments(capsys):
    code, out, _ = run(capsys, "eval", "--op", "young-sandwich", "--a", "3", "--b", "3", "--nu", "0.7")
    assert code == 0 and out.strip() == "0, 0, 0"


def test_eval_round_trips_seventeen_digits(capsys):
    code, out, _ = run(capsys, "eval", "--op", "power-p-sandwich", "--a", "4", "--b", "1", "--nu", "0.25", "--p", "3")
    got = tuple(float(v) for v in out.split(","))
    want = scalar.power_p_sandwich(PositivePair(4, 1), WeightSplit(0.25), scalar.ExponentP(3)).as_tuple()
    assert code == 0 and got == want


def test_eval_schatten_rejects_small_p(capsys, tmp_path):
    path = tmp_path / "m.json"
    linalg.write_matrix(path, np.eye(2))
    code, _, err = run(capsys, "eval", "--op", "schatten", "--p", "0.5", "--matrix-file", str(path))
    assert code == 3 and "p ≥ 1" in err


def test_eval_matrix_ops(capsys, tmp_path, triple_file):
    path = tmp_path / "m.json"
    linalg.write_matrix(path, np.diag([4.0, 1.0]))
    code, out, _ = run(capsys, "eval", "--op", "schatten", "--p", "2", "--matrix-file", str(path))
    assert code == 0 and float(out) == pytest.approx(np.sqrt(17.0), rel=1e-15)
    code, out, _ = run(capsys, "eval", "--op", "psd-power", "--nu", "0.5", "--matrix-file", str(path))
    assert code == 0
    np.testing.assert_allclose(linalg.matrix_from_doc(json.loads(out)), np.diag([2.0, 1.0]), atol=1e-15)
    code, out, _ = run(capsys, "eval", "--op", "heinz-norm-sandwich", "--nu", "0.3", "--norm", "hs",
                       "--matrix-file", str(triple_file))
    lo, mid, hi = (float(v) for v in out.split(","))
    assert code == 0 and lo <= mid <= hi


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "--op", "no-such-op"),
        ("eval", "--op", "heinz-mean", "--a", "9"),
        ("frobnicate",),
        ("eval", "--op", "heinz-mean", "--a", "x", "--b", "1", "--nu", "0.5"),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ("eval", "--op", "heinz-mean", "--a", "-1", "--b", "1", "--nu", "0.5"),
        ("eval", "--op", "young-sandwich", "--a", "1", "--b", "1", "--nu", "1.5"),
        ("eval", "--op", "power-p-sandwich", "--a", "1", "--b", "2", "--nu", "0.5", "--p", "0.5"),
    ],
)
def test_domain_errors_exit_3(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 3 and "precondition" in err


def test_missing_file_exits_4(capsys, tmp_path):
    code, _, _ = run(capsys, "eval", "--op", "spectral", "--matrix-file", str(tmp_path / "absent.json"))
    assert code == 4


def test_malformed_json_exits_4(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert run(capsys, "report", "--in", str(path))[0] == 4


# ---------------------------------------------------------------- sweep


def test_parse_grid():
    assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]
    assert parse_grid("0.25") == [0.25]
    assert parse_grid("1:6", integer=True) == [1, 2, 3, 4, 5, 6]
    with pytest.raises(DomainError):
        parse_grid("1:2:0")


def test_sweep_eq16_degenerate_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--ineq", "eq16", "--a", "4", "--b", "1", "--nu", "0.25", "--m", "1:6")
    header, body = rows(out)
    assert code == 0 and len(body) == 6
    t1, t2 = header.index("t1"), header.index("t2")
    for r in body:
        same = float(r[t1]) == pytest.approx(float(r[t2]), rel=1e-12)
        assert same == (int(r[header.index("m")]) <= 2)


def test_sweep_eq15_specializations(capsys):
    code, out, _ = run(capsys, "sweep", "--ineq", "eq15", "--a", "9", "--b", "1", "--nu", "0.25", "--p", "1:2:0.5")
    header, body = rows(out)
    assert code == 0 and [float(r[header.index("p")]) for r in body] == [1.0, 1.5, 2.0]
    pair, w = PositivePair(9, 1), WeightSplit(0.25)
    terms = [header.index(k) for k in ("lower", "middle", "upper")]
    for r, want in ((body[0], scalar.young_sandwich(pair, w)), (body[2], scalar.squared_young_sandwich(pair, w))):
        np.testing.assert_allclose([float(r[i]) for i in terms], want.as_tuple(), rtol=4e-16)


def test_sweep_heinz_scan_symmetric(capsys, triple_file):
    code, out, _ = run(capsys, "sweep", "--ineq", "heinz-scan", "--matrix-file", str(triple_file), "--grid", "9")
    header, body = rows(out)
    assert code == 0 and header == ["nu", "f"] and len(body) == 9
    f = np.array([float(r[1]) for r in body])
    np.testing.assert_allclose(f, f[::-1], rtol=1e-10)
    assert float(body[4][0]) == 0.5


def test_sweep_writes_file_deterministically(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "sweep", "--ineq", "eq4", "--a", "1:3", "--b", "2", "--nu", "0:1:0.25",
                   "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 1 + 3 * 5


def test_sweep_empty_grid_exits_3(capsys):
    assert run(capsys, "sweep", "--ineq", "eq4", "--a", "3:1", "--b", "1", "--nu", "0.5")[0] == 3


def test_sweep_unknown_inequality_exits_2(capsys):
    assert run(capsys, "sweep", "--ineq", "eq99", "--a", "1", "--b", "1", "--nu", "0.5")[0] == 2


# ---------------------------------------------------------------- verify and report


def test_verify_and_report_round_trip(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "verify", "--suite", "scalar", "--trials", "2000", "--out", str(out))
    assert code == 0 and text.strip() == "OK 2000 trials, 31 inequalities, 0 violations"
    doc = json.loads(out.read_text())
    assert doc["schema"] == "heinzlab-report/1"
    code, text, _ = run(capsys, "report", "--in", str(out))
    assert code == 0 and "eq16" in text and text.strip().endswith(doc["summary"])


def test_verify_perturbed_run_fails(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, text, _ = run(capsys, "verify", "--suite", "scalar", "--trials", "2000",
                        "--perturb", "eq9=1.01", "--out", str(out))
    assert code == 1 and text.startswith("FAIL")
    code, text, _ = run(capsys, "report", "--in", str(out))
    assert code == 1 and "eq9" in text


def test_verify_is_byte_identical(capsys, tmp_path):
    blobs = []
    for k in range(2):
        out = tmp_path / f"r{k}.json"
        assert run(capsys, "verify", "--suite", "matrix", "--trials", "12", "--dim-max", "3",
                   "--out", str(out))[0] == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]


def test_verify_unwritable_output_exits_4(capsys, tmp_path):
    out = tmp_path / "missing" / "r.json"
    assert run(capsys, "verify", "--suite", "scalar", "--trials", "10", "--out", str(out))[0] == 4


def test_verify_bad_trials_exits_3(capsys, tmp_path):
    assert run(capsys, "verify", "--trials", "0", "--out", str(tmp_path / "r.json"))[0] == 3


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "heinzlab", "eval", "--op", "heinz-mean", "--a", "9", "--b", "1", "--nu", "0.25"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "3.4641016151377544"
