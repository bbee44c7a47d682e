import math

import pytest

import flowlab


def test_geometries():
    assert flowlab.geometries == ["su2", "isom_r2", "sl2r", "heisenberg", "isom_r11", "r3"]


def test_heisenberg_unit_state():
    ric, scalar = flowlab.ricci("heisenberg", [1, 1, 1])
    assert scalar == pytest.approx(-2.0)
    assert ric[0][0] == pytest.approx(2.0)
    c2 = flowlab.cotton_york("heisenberg", [1, 1, 1])
    assert [c2[i][i] for i in range(3)] == pytest.approx([8.0, -4.0, -4.0])
    ratio = flowlab.density("heisenberg", [1, 1, 1]) / flowlab.density("heisenberg", [1, 1, 1], "closed")
    assert ratio == pytest.approx(2.0, rel=1e-12)


def test_closed_form_matches_oracle():
    m = [0.7, 1.9, 1.9]
    c2 = flowlab.cotton_york("su2", m)
    closed = flowlab.cotton_york_closed("su2", m)
    for i in range(3):
        assert c2[i][i] == pytest.approx(closed[i], rel=1e-12)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        flowlab.ricci("su2", [1, -1, 1])
    with pytest.raises(ValueError):
        flowlab.density("su2", [1, 2, 3], "closed")
    with pytest.raises(ValueError):
        flowlab.ricci("klein", [1, 1, 1])


def test_su2_extremum():
    r = flowlab.simulate("su2", [0.25, 1, 1], t_end=1.0, sample_stride=1e-3)
    assert r["verdict"] == "HasInteriorMax"
    assert r["ratio_at_t0"] == pytest.approx(0.5, abs=1e-6)
    assert r["stop_reason"] == "blowup_floor"


def test_round_sphere_blowup():
    r = flowlab.simulate("su2", [1, 1, 1], t_end=1.0)
    assert r["T_estimate"] == pytest.approx(0.25, abs=1e-6)
    assert r["verdict"] == "IdenticallyZero"


def test_heisenberg_closed_form():
    r = flowlab.simulate("heisenberg", [1, 1, 1], t_end=10.0)
    a, b, c = flowlab.heisenberg_closed_form([1, 1, 1], r["t"][-1])
    assert r["A"][-1] == pytest.approx(a, rel=1e-8)
    assert r["C"][-1] == pytest.approx(c, rel=1e-8)
    assert r["conserved_max_drift"] < 1e-9


def test_rosenau():
    q, closed = flowlab.rosenau_l1(-1.0)
    assert q == pytest.approx(closed, rel=1e-8)
    assert closed == pytest.approx(11.693, abs=1e-3)
    assert flowlab.rosenau_cotton_york_23(0.0, -1.0) == 0.0


def test_table1():
    rows = flowlab.table1(jobs=2)
    assert len(rows) == 13
    assert all(r["match"] for r in rows)


def test_verify():
    rep = flowlab.verify(samples=10)
    assert rep["pass"]
    assert rep["thm21_verdict"] == "corrected"
    lo, hi = rep["heisenberg_ratio"]
    assert lo == pytest.approx(2.0) and hi == pytest.approx(2.0)


def test_cli_in_process(tmp_path):
    code, out, err = flowlab.run_cli(["oracle-check", "-g", "sl2r", "--A0", "1", "--B0", "1", "--C0", "1",
                                      "-o", str(tmp_path / "o")])
    assert code == 0, err
    assert (tmp_path / "o.json").exists()
    code, _, _ = flowlab.run_cli(["simulate", "-g", "su2", "--A0", "0"])
    assert code == 2
