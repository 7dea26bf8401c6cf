import argparse
import csv
import io
import json
import math
import subprocess
import sys

import pytest

from critdet import cli
from critdet.errors import DomainError


def run(*argv):
    out = io.StringIO()
    code = cli.main(list(argv), out)
    return code, out.getvalue()


def test_eval_csv_at_p2():
    code, text = run("eval", "--p", "2", "--sigma", "1.4", "--workers", "1")
    assert code == 0
    rows = {r["quantity"]: r for r in csv.DictReader(io.StringIO(text))}
    d = rows["delta"]
    assert float(d["point"]) == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    assert float(d["lo"]) <= math.sqrt(3) / 2 <= float(d["hi"])
    assert "\r" not in text


def test_eval_json_has_same_rows():
    code, text = run("eval", "--p", "3", "--sigma", "1.5", "--format", "json", "--workers", "1")
    assert code == 0
    rows = json.loads(text)
    assert [r["quantity"] for r in rows][:3] == ["tau", "delta", "delta0"]


@pytest.mark.parametrize("argv", [
    ("eval", "--p", "2", "--sigma", "5"),
    ("eval", "--p", "0.5", "--sigma", "1"),
    ("isolate-p0", "--tol", "0"),
    ("verify", "--p-min", "1.9", "--p-max", "2.1", "--condition", "analytic"),
    ("verify", "--p-min", "5", "--p-max", "6", "--condition", "compose-p-ge-6"),
    ("verify", "--p-min", "6", "--p-max", "6.1", "--condition", "q-neg"),
    ("scan", "--p-min", "3", "--p-max", "2", "--steps", "4"),
    ("eval", "--p", "2", "--sigma", "1.2", "--e1", "-1"),
])
def test_domain_errors_exit_2(argv, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert capsys.readouterr().err.startswith("critdet:")


def test_parser_rejects_missing_arguments():
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval", "--p", "2"], io.StringIO())
    assert exc.value.code == 2


def test_isolate_p0_output():
    code, text = run("isolate-p0", "--tol", "1e-3", "--workers", "1")
    assert code == 0
    first, second = text.splitlines()
    lo, hi = json.loads(first)
    assert 2.57 <= lo < hi <= 2.58
    rec = json.loads(second)
    assert rec["status"] == "PROVEN" and rec["within_2.57_2.58"]


def test_verify_writes_certificate(tmp_path):
    path = tmp_path / "c.json"
    code, text = run("verify", "--p-min", "6", "--p-max", "6.1", "--condition", "h-neg",
                     "--out", str(path), "--workers", "1")
    assert code == 0
    assert text.startswith("h-neg [6.0, 6.1]: PROVEN")
    cert = json.loads(path.read_text())
    assert cert["status"] == "PROVEN"
    assert cert["region"]["upper"] == {"kind": "one_plus", "num": 1, "den": 5, "power": 1.0}
    assert "workers" not in cert["config"]


def test_verify_inconclusive_exits_1(tmp_path):
    code, text = run("verify", "--p-min", "3", "--p-max", "3.1", "--condition", "l-pos",
                     "--depth-cap", "2", "--out", str(tmp_path / "c.json"), "--workers", "1")
    assert code == 1
    assert "INCONCLUSIVE" in text


def test_verify_curve_overrides(tmp_path):
    code, _ = run("verify", "--p-min", "6", "--p-max", "6.1", "--condition", "g-neg",
                  "--lower", "1.2", "--upper", "1.3", "--out", str(tmp_path / "c.json"),
                  "--workers", "1")
    assert code == 0
    code, _ = run("verify", "--p-min", "6", "--p-max", "6.1", "--condition", "g-neg",
                  "--lower", "banana", "--out", str(tmp_path / "d.json"))
    assert code == 2


def test_scan_rows():
    code, text = run("scan", "--p-min", "1.5", "--p-max", "3", "--steps", "4", "--workers", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 4
    for r in rows:
        crit = float(r["critdet"])
        assert crit == min(float(r["delta0"]), float(r["delta1"]))
        assert float(r["kappa_p"]) >= float(r["gamma_bound"])


def test_oracle_command():
    code, text = run("oracle", "--p", "2.5", "--resolution", "200", "--workers", "1")
    assert code == 0
    row = next(csv.DictReader(io.StringIO(text)))
    assert float(row["difference"]) <= 5e-3


def test_probe_mas_label():
    code, text = run("probe-mas", "--p-max", "5", "--grid", "12", "--workers", "1")
    assert code == 0
    d = json.loads(text)
    assert d["label"] == "NOT-VERIFIED" and "samples" not in d


# --- configuration precedence -------------------------------------------------------------------


def ns(**kw):
    base = dict(e1=None, max_iter=None, depth_cap=None, margin=None, workers=None, format=None)
    base.update(kw)
    return argparse.Namespace(**base)


def test_flag_beats_env_beats_default():
    env = {"CRITDET_E1": "1e-10", "CRITDET_DEPTH_CAP": "12", "CRITDET_WORKERS": "3"}
    cfg = cli.resolve_config(ns(depth_cap=20), env)
    assert cfg.e1 == 1e-10 and cfg.depth_cap == 20 and cfg.workers == 3
    assert cfg.max_iter == 200 and cfg.margin == 1e-4
    assert cli.resolve_config(ns(), {}).workers >= 1


def test_bad_environment_value():
    with pytest.raises(DomainError):
        cli.resolve_config(ns(), {"CRITDET_MAX_ITER": "many"})
    with pytest.raises(DomainError):
        cli.resolve_config(ns(), {"CRITDET_MARGIN": "-1"})


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "critdet", "eval", "--p", "2", "--sigma", "5"],
                       capture_output=True, text=True)
    assert r.returncode == 2
