import math

import pytest

import tspn


def test_generate_and_roundtrip():
    inst = tspn.generate("uniform", 6, seed=3)
    assert len(inst) == 6
    again = tspn.parse_instance(inst.format())
    assert again.format() == inst.format()
    assert tspn.generate("uniform", 6, seed=3).format() == inst.format()


def test_solve_ptas_feasible_and_near_oracle():
    inst = tspn.generate("uniform", 5, seed=11)
    rep = tspn.solve_ptas(inst, epsilon=0.5, seed=1)
    assert rep.feasible
    assert tspn.is_feasible(inst, rep.tour)
    assert rep.cost == pytest.approx(rep.tour.cost())
    opt = tspn.exact_oracle(inst).cost()
    assert rep.cost <= 1.5 * opt + 1e-9
    assert rep.format().startswith("COST ")


def test_single_line_closed_form():
    inst = tspn.Instance([(0.0, 0.0, 1.0), (3.0, 0.5, 1.5), (7.5, 0.2, 1.2)])
    tour = tspn.exact_oracle(inst)
    assert tour.cost() == pytest.approx(2 * 7.5, abs=1e-9)
    assert tspn.coverline_stitch(inst).cost() == pytest.approx(15.0, abs=1e-9)


def test_invalid_instance_raises():
    with pytest.raises(ValueError):
        tspn.Instance([(0.0, 0.0, 0.5)])
    with pytest.raises(ValueError):
        tspn.parse_instance("not an instance")


def test_axis_parallel():
    inst = tspn.generate_axis(2, 2, 5, 5, seed=4)
    res = tspn.solve_axis_parallel(inst, epsilon=0.5, seed=4)
    assert tspn.is_axis_feasible(inst, res.tour)
    assert math.isfinite(res.cost)
    assert res.chosen >= 0


def test_suite_runner():
    assert "uncross-monotone" in tspn.suite_names()
    r = tspn.run_suite("uncross-monotone", seeds=20)
    assert r.passed and r.cases == 20
    with pytest.raises(ValueError):
        tspn.run_suite("no-such-suite")
