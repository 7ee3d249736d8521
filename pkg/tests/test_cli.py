import io
import json
import os
from pathlib import Path

import pytest

from coxtet.cli import SCHEMA, run

DATA = Path(__file__).parent / "data"
GOLDEN = DATA / "golden"
POLY = DATA / "poly"
# set to rewrite the golden files from the current build
REGEN = os.environ.get("COXTET_REGEN_GOLDEN") == "1"


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _records(text):
    return [json.loads(line) for line in text.splitlines()]


def test_realize_text():
    code, out, _ = _run("realize", "2,6,3;2,6,3")
    assert code == 0
    assert "exists    yes" in out and out.count(":Ideal") == 4
    code, out, _ = _run("realize", "4,4,4;4,4,4")
    assert code == 0 and out.count(":Truncated") == 4


def test_exit_codes():
    assert _run("realize", "2,6;3")[0] == 2
    assert _run("realize", "1,2,3;2,2,2")[0] == 2
    assert _run("nonsense")[0] == 2
    code, out, _ = _run("realize", "2,2,2;2,2,2")
    assert code == 3 and "not of signature (3,1)" in out
    code, out, _ = _run("realize", "2,2,2;3,3,5")
    assert code == 3 and "coincides with a face" in out
    assert _run("search", "2,2,2;2,2,2")[0] == 3
    code, _, err = _run("search", "2,6,3;2,6,3", "--tile-cap", "20")
    assert code == 5 and "blew up" in err
    assert _run("search", "2,6,3;2,6,3", "--depth", "1")[0] == 2
    assert _run("poly", str(POLY / "pentagonal_pyramid.json"), "validate")[0] == 4
    assert _run("poly", str(POLY / "missing.json"), "small")[0] == 2
    assert _run("lattice", "sub", "7,7")[0] == 2
    assert _run("--version")[0] == 0


def test_search_verdicts():
    code, out, err = _run("search", "2,6,3;2,6,3", "--threads", "1")
    assert code == 0 and "verdict   Match" in out and "(3,6,6)" in out
    code, out, err = _run("search", "2,4,4;2,4,4", "--threads", "1")
    assert code == 0 and "found     0 witnesses" in out and "Inconclusive" in out
    assert "depth-limited" in err
    code, out, _ = _run("search", "4,3,4;2,2,2", "--threads", "1")
    assert code == 0 and "(3,4,4)" in out and "verdict   Match" in out


def test_lattice_text():
    code, out, _ = _run("lattice", "sub", "7,7,7", "super", "2,3,7")
    assert code == 0 and "index 24, non-normal" in out
    code, out, _ = _run("lattice", "maximal", "2,3,7")
    assert code == 0 and "maximal: true" in out


def test_poly_text():
    code, out, _ = _run("poly", str(POLY / "tetrahedron.json"), "small")
    assert code == 0 and "verdict     Small" in out
    code, out, _ = _run("poly", str(POLY / "cube.json"), "small")
    assert code == 0 and "verdict     NotSmall" in out
    code, out, _ = _run("poly", str(POLY / "prism.json"), "circuits")
    assert code == 0 and "1 embedded hyperbolic turnovers" in out


def test_manifest():
    code, out, _ = _run("search", "2,6,3;2,6,3", "--depth", "5", "--threads", "2", "--format", "records")
    recs = _records(out)
    m = recs[0]
    assert m["record"] == "manifest" and m["schema"] == SCHEMA
    assert m["config"] == {"depth": 5, "eps": 1e-9, "cmax": m["config"]["cmax"], "tile_cap": m["config"]["tile_cap"], "threads": 2}
    assert m["inputs"] == {"spec": "2,6,3;2,6,3"}
    assert {"version", "wall_time", "command", "backend"} <= set(m)
    assert recs[-1]["record"] == "classification"


GOLDEN_CASES = {
    "realize_263_263": ["realize", "2,6,3;2,6,3"],
    "realize_444_444": ["realize", "4,4,4;4,4,4"],
    "realize_222_222": ["realize", "2,2,2;2,2,2"],
    "search_263_263_d6": ["search", "2,6,3;2,6,3", "--depth", "6"],
    "search_434_222_d6": ["search", "4,3,4;2,2,2", "--depth", "6"],
    "lattice_sub_777_237": ["lattice", "sub", "7,7,7", "super", "2,3,7"],
    "lattice_supergroups_366": ["lattice", "supergroups", "3,6,6"],
    "poly_prism_circuits": ["poly", str(POLY / "prism.json"), "circuits"],
    "poly_truncated_small": ["poly", str(POLY / "truncated_444.json"), "small"],
    "poly_pyramid_validate": ["poly", str(POLY / "pentagonal_pyramid.json"), "validate"],
}


@pytest.mark.parametrize("name", sorted(GOLDEN_CASES))
def test_golden_records(name):
    argv = GOLDEN_CASES[name] + ["--format", "records", "--threads", "1"]
    _, out, _ = _run(*argv)
    lines = out.splitlines()
    assert json.loads(lines[0])["record"] == "manifest"
    body = "\n".join(lines[1:]) + "\n"
    path = GOLDEN / f"{name}.jsonl"
    if REGEN:
        path.write_text(body)
    assert body == path.read_text()
    # the stored records parse and re-serialize to the same bytes
    again = "\n".join(json.dumps(r, sort_keys=True) for r in _records(body)) + "\n"
    assert again == body


def test_records_independent_of_threads():
    a = _run("search", "2,7,3;2,8,3", "--depth", "7", "--threads", "1", "--format", "records")[1]
    b = _run("search", "2,7,3;2,8,3", "--depth", "7", "--threads", "8", "--format", "records")[1]
    assert a.splitlines()[1:] == b.splitlines()[1:]
