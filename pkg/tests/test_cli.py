import io
import json
import subprocess
import sys

import pytest

from springerfib.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_enumerate_typeD_33():
    code, out, _ = call("enumerate", "--type", "D", "--n", "6", "--k", "3")
    assert code == 0
    ds = json.loads(out)
    assert len(ds) == 6 and len(set(ds)) == 6


def test_maffei_fixture():
    code, out, _ = call("maffei", "--fixture", "ex-fi.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["raw"][1]["columns"] == ["f1", "e1", "f2", "e2"]
    assert rep["raw"][1]["basis"] == [[1, 0, 0, 0], [0, 1, -1, 0]]
    # the same space in the basis e_1, e_2, f_1, f_2
    assert rep["flag"][1] == [[1, 0, 0, -1], [0, 0, 1, 0]]


def test_decompose_typeD_22():
    code, out, _ = call("decompose", "--type", "D", "--n", "4", "--k", "2", "--q", "5")
    assert code == 0
    rep = json.loads(out)
    assert rep["per_component"] == {"D m=2 cups=1: 1-2": 6, "D m=2 cups=1: 1-2*": 6}
    assert rep["uncovered"] == []
    code, out, _ = call("decompose", "--type", "D", "--n", "4", "--k", "2", "--q", "5", "--csv")
    assert out.splitlines()[0] == "component,count"


def test_fold_unfold_stats():
    code, out, _ = call("fold", "--diagram", "A n=6 k=3: 1-2, 3-4, 5-6")
    assert code == 0 and json.loads(out) == ["D m=3 cups=1: 1-2, 3", "D m=3 cups=1: 1-2, 3*"]
    code, out, _ = call("unfold", "--diagram", "D m=3 cups=1: 1, 2-3")
    assert code == 0 and json.loads(out) == ["A n=6 k=3: 1-6, 2-3, 4-5", "A n=6 k=3: 1-6, 2-5, 3-4"]
    code, out, _ = call("stats", "--diagram", "A n=4 k=2: 1-4, 2-3")
    assert code == 0 and json.loads(out)["diagram"] == "A n=4 k=2: 1-4, 2-3"


def test_check_quiver():
    code, out, _ = call("check-quiver", "--fixture", "ex-fi.json", "--diagram", "D m=2 cups=1: 1-2*")
    rep = json.loads(out)
    assert code == 0 and rep["stable"] and rep["tilde"]["ok"] and rep["theta"] == "FixedWith"
    code, out, _ = call("check-quiver", "--fixture", "ex-fi.json", "--diagram", "D m=2 cups=1: 1-2")
    assert code == 1 and json.loads(out)["member"] is False


def test_build_and_verify():
    d = "D m=5 cups=2: 1-2, 3*, 4-5*"
    code, out, _ = call("build-flag", "--diagram", d, "--params", "[0:1] [1:3]", "--field", "Fp:5")
    assert code == 0
    flag = json.dumps(json.loads(out)["flag"])
    code, out, _ = call("verify-bundle", "--diagram", d, "--flag", flag, "--field", "Fp:5")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["params"] == [["0", "1"], ["1", "3"]]
    code, out, _ = call("check-flag", "--diagram", d, "--flag", flag, "--field", "Fp:5")
    assert code == 0 and json.loads(out)["member"]


def test_verify_wrong_component_fails():
    code, out, _ = call("build-flag", "--diagram", "D m=2 cups=1: 1-2", "--params", "[1:2]")
    flag = json.dumps(json.loads(out)["flag"])
    code, out, _ = call("verify-bundle", "--diagram", "D m=2 cups=1: 1-2*", "--flag", flag)
    assert code == 1 and json.loads(out)["ok"] is False


def test_count():
    code, out, _ = call("count", "--diagram", "D m=2 cups=1: 1-2*", "--q", "3")
    assert code == 0 and json.loads(out)["count"] == 4


@pytest.mark.parametrize(
    "argv,token",
    [
        (["enumerate", "--type", "B", "--n", "4", "--k", "2"], "'B'"),
        (["decompose", "--type", "D", "--n", "4", "--k", "2", "--q", "4"], "'4'"),
        (["fold", "--diagram", "A n=4 k=2: 1-2, 3-x"], "x"),
        (["maffei", "--fixture", "nope.json"], "nope.json"),
        (["build-flag", "--diagram", "D m=2 cups=1: 1-2", "--params", "[1:2] junk"], "junk"),
        (["nonsense"], "nonsense"),
    ],
)
def test_usage_errors(argv, token):
    code, out, err = call(*argv)
    assert code == 2
    assert out == ""
    assert token in err


def test_build_flag_param_count_is_usage_error():
    code, _, err = call("build-flag", "--diagram", "D m=2 cups=1: 1-2")
    assert code == 2 and "ParamCountMismatch" in err


def test_output_is_deterministic():
    argv = ["decompose", "--type", "D", "--n", "6", "--k", "3", "--q", "3"]
    assert call(*argv) == call(*argv)
    cmd = [sys.executable, "-m", "springerfib", "check-quiver", "--fixture", "ex-31.json", "--seed", "3"]
    a = subprocess.run(cmd, capture_output=True, check=False).stdout
    b = subprocess.run(cmd, capture_output=True, check=False).stdout
    assert a == b and a
