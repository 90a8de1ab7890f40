"""Smoke test for the Python bindings: run the fixtures and check the reports."""

import json
import pathlib
import sys

import tormod_py

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main() -> int:
    for name in ["semifree_gamma_h.json", "pullback.json", "circle.json"]:
        text = (ROOT / "fixtures" / name).read_text()
        results = json.loads(tormod_py.run_workspace(text))
        for r in results:
            report = r["report"]
            status = "pass" if report["passed"] else "FAIL"
            print(f"{name}: {report['operation']}: {status}")
            if not report["passed"]:
                return 1
    one = json.loads(tormod_py.run('{"rank": 1, "tracked": {"characters": [[1]]}}', ["resolve-rank1", "--window", "-6:6"]))
    assert one[0]["report"]["passed"]
    assert sorted(one[0]["outputs"]) == ["resolution.term0", "resolution.term1", "resolution.term2"]
    try:
        tormod_py.run('{"rank": 1}', ["gamma-h", "--module", "missing"])
    except tormod_py.TormodError as e:
        code, message = e.args
        assert code == 2, (code, message)
    else:
        raise AssertionError("unknown module accepted")
    print(f"tormod_py {tormod_py.__version__}: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
