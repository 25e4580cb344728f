import os
import pathlib

import numpy as np
import pytest

import pinnsolve

ROOT = pathlib.Path(os.environ.get("PINNSOLVE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))

TINY = """
[problem]
solver = solvePDE_tx
equations = ut + ux

[domain]
t = 0, 1
x = -1, 1
residual_points = 200

[initial]
points = 20
u = cos(pi*x)

[boundary]
type = periodic
points = 20

[network]
layers = 2
units = 8

[training]
epochs = 5
seed = 3
"""


def test_shipped_configs_validate():
    for cfg in sorted((ROOT / "configs").glob("*.cfg")):
        assert pinnsolve.validate(cfg.read_text()) == [], cfg.name


def test_validate_reports_parse_error():
    issues = pinnsolve.validate(TINY.replace("ut + ux", "ut+++ux"))
    assert len(issues) == 1
    category, message = issues[0]
    assert category == "parse"
    assert "position 3" in message


def test_parse_equation_requirements():
    text, needs = pinnsolve.parse_equation("ut + u*ux - 0.01*uxx")
    assert sorted(needs) == ["u", "ut", "ux", "uxx"]
    again, _ = pinnsolve.parse_equation(text)
    assert again == text


def test_parse_error_raises_with_category():
    with pytest.raises(pinnsolve.Error) as info:
        pinnsolve.parse_equation("ut + (ux")
    assert info.value.category == "parse"


def test_latin_hypercube_strata():
    pts = np.asarray(pinnsolve.latin_hypercube(50, [(0.0, 1.0), (-2.0, 2.0)], 7))
    assert pts.shape == (2, 50)
    for row, (lo, hi) in zip(pts, [(0.0, 1.0), (-2.0, 2.0)]):
        strata = np.floor((row - lo) / (hi - lo) * 50).clip(0, 49).astype(int)
        assert sorted(strata) == list(range(50))
    again = np.asarray(pinnsolve.latin_hypercube(50, [(0.0, 1.0), (-2.0, 2.0)], 7))
    assert np.array_equal(pts, again)


def test_solve_and_evaluate_deterministic():
    a = pinnsolve.solve(TINY)
    b = pinnsolve.solve(TINY)
    assert len(a.loss["composite"]) == 5
    assert a.loss["composite"] == b.loss["composite"]
    pts = np.array([[0.0, 0.5, 1.0], [-1.0, 0.0, 0.5]])
    u = np.asarray(a.evaluate(pts))
    assert u.shape == (1, 3)
    assert np.all(np.isfinite(u))
    assert np.array_equal(u, np.asarray(b.evaluate(pts)))
    c = pinnsolve.solve(TINY, seed=4)
    assert c.loss["composite"] != a.loss["composite"]


def test_cli_in_process(tmp_path):
    cfg = tmp_path / "tiny.cfg"
    cfg.write_text(TINY)
    code, out, err = pinnsolve.main(["validate", "--config", str(cfg)])
    assert code == 0, err
    assert "0 issues" in out
    code, _, err = pinnsolve.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 0, err
    lines = (tmp_path / "o" / "solution.csv").read_text().splitlines()
    assert lines[0] == "t,x,u"
    assert len(lines) == 1 + 101 * 101
    code, _, _ = pinnsolve.main(["timestep", "--config", str(cfg), "--steps", "2"])
    assert code == 4
