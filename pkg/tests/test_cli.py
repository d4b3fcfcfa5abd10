import json
import subprocess
import sys

import pytest

from tsirelson.cli import run


def call(capsys, argv, payload=None, monkeypatch=None):
    if payload is not None:
        monkeypatch.setattr(sys, "stdin", __import__("io").StringIO(json.dumps(payload) if not isinstance(payload, str) else payload))
    code = run(argv)
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def cli(capsys, monkeypatch):
    return lambda argv, payload="": call(capsys, argv, payload, monkeypatch)


def test_family(cli):
    code, out = cli(["family"], {"F": [3, 4, 5], "family": "S1"})
    assert code == 0 and out["member"] is True
    code, out = cli(["family"], {"F": [2, 3, 4], "family": "S1"})
    assert out["member"] is False


def test_maximal_and_admissible(cli):
    assert cli(["maximal"], {"L": list(range(4, 20)), "family": "S1"})[1]["subset"] == [4, 5, 6, 7]
    out = cli(["admissible"], {"sets": [[4, 8], [5, 9], [6, 10]], "family": "S1", "mode": "allowable"})[1]
    assert out["ok"] is True


def test_norm(cli):
    code, out = cli(["norm", "--spec", "tsirelson"], {"x": [4, 5, 6, 7]})
    assert code == 0 and out["value"] == "2/1" and out["exact"] is True
    code, out = cli(["norm", "--spec", "a3"], {"x": {"coords": {"1": "1", "2": "1", "3": "1"}}})
    assert out["value"] == "3/2"
    code, out = cli(["norm-restricted", "--spec", "a3-a9"], {"x": list(range(1, 10)), "min_weight": "1/2"})
    assert out["value"] == "1/1"


def test_scc(cli):
    code, out = cli(["scc"], {"start": 4, "n": 1, "eps": "1/3"})
    assert code == 0 and out["certificate"]["smallness"] == "1/4"
    code, out = cli(["scc"], {"start": 4, "n": 1, "eps": "1/4"})
    assert code == 1


def test_sigma_and_eval(cli):
    code, out = cli(["sigma", "--spec", "toy-space"], {"seq": [[1, 2]]})
    assert out["value"] == 4 and len(out["table_hash"]) == 64
    f = {"op": "block", "weight": "1/2", "children": [{"leaf": 4, "sign": 1}, {"leaf": 5, "sign": 1}]}
    assert cli(["eval"], {"f": f, "x": [4, 5]})[1]["value"] == "1/1"


def test_g_op(cli):
    code, out = cli(["g-op"], {"f": list(range(2, 11)), "F": [4, 6, 8, 10]})
    assert sorted(out["result"]["coords"]) == ["4", "5", "8", "9"]
    code, out = cli(["g-op"], {"f": [2, 3], "F": [2, 3, 5, 6]})
    assert code == 2 and out["error"]["type"] == "NotSchreierError"


def test_lemma_kinds(cli):
    f = {"op": "block", "weight": "1/4", "children": [{"leaf": 7, "sign": 1}]}
    code, out = cli(["lemma", "--kind", "high-weight", "--spec", "toy-space"], {"u": {"coords": {}}, "j": 6, "jseq": [9], "f": f})
    assert code == 0 and out["verdict"] == "pass"
    code, out = cli(["lemma", "--kind", "nonsense"], {})
    assert code == 2


def test_errors(cli):
    code, out = cli(["norm"], '{"x": {"coords": {"3": 0.5}}}')
    assert code == 2 and out["error"]["type"] == "usage"
    assert cli(["verify", "no-such-suite"])[0] == 2
    assert cli(["norm"], {})[0] == 2
    assert cli(["frobnicate"])[0] == 2


def test_verify_suite(cli):
    code, out = cli(["verify", "dependent"])
    assert code == 0 and out["ok"] and out["violations"] == 0


def test_out_file(tmp_path, cli):
    target = tmp_path / "result.json"
    request = tmp_path / "request.json"
    request.write_text(json.dumps({"F": [5], "family": "S0"}))
    assert run(["family", "--in", str(request), "--out", str(target)]) == 0
    assert json.loads(target.read_text())["member"] is True


def test_module_entry_point():
    done = subprocess.run(
        [sys.executable, "-m", "tsirelson", "family"], input='{"F": [1, 7], "family": "A2"}',
        capture_output=True, text=True, check=True,
    )
    assert json.loads(done.stdout)["member"] is True
