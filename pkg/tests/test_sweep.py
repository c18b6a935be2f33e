import csv
import io
import math

import pytest

from compass_sim.experiment import ExperimentResult
from compass_sim.noise import NoiseParams, physical_comparator_rate
from compass_sim.sweep import AXES, Axis, _crossing, axis_name, bias_zz, bias_zz_error, noise_from, sweep_and_map


def result(rate, se=0.0):
    return ExperimentResult("Surface17", "Z", 100, rate * 100, rate, rate, rate, se, 0.0)


def test_axis_parsing():
    a = Axis.parse("p2q:1e-4:1e-2:log:3")
    assert a.name == "p2q" and a.values == pytest.approx((1e-4, 1e-3, 1e-2))
    assert Axis.parse("rabiRatio:0:0.2:lin:3").values == pytest.approx((0, 0.1, 0.2))
    assert Axis.parse("invT2:0.5,2").name == "inv_t2"


@pytest.mark.parametrize("bad", ["p2q", "p2q:1:2:cubic:3", "p2q:0:1:log:3", "p2q:1:2:lin:0", "bogus:1,2",
                                 "p2q:"])
def test_axis_parse_errors(bad):
    with pytest.raises(ValueError):
        Axis.parse(bad)


def test_axis_aliases():
    assert axis_name("epsMS") == "eps_ms" and axis_name("pMS") == "p2q"
    assert all(axis_name(a) == a for a in AXES)


def test_bias_examples():
    assert bias_zz(result(0.01), result(0.01)) == 0.5
    assert bias_zz(result(0.0), result(0.02)) == 1.0
    assert bias_zz(result(0.0), result(0.0)) is None
    assert bias_zz(0.03, 0.01) == 0.25
    assert math.isnan(bias_zz_error(result(0), result(0)))
    assert bias_zz_error(result(0.01, 0.001), result(0.01, 0.001)) == pytest.approx(math.hypot(0.025, 0.025))


def test_noise_from():
    n = noise_from({"p2q": 1e-3})
    assert n.p_ms == 1e-3 and n.p1q == pytest.approx(1e-4)
    assert noise_from({"p2q": 1e-3, "p1q": 0}).p1q == 0
    assert noise_from({"eps_ms": 0.1}).p_ms == pytest.approx(math.sin(0.1) ** 2)
    assert noise_from({"p2d": 1e-3}).p2d == 1e-3
    for bad in ({"p2q": -1}, {"p2d": 1e-3, "p2q": 1e-3}, {"p2q": 1e-3, "eps_ms": 0.1}, {"nope": 1}):
        with pytest.raises(ValueError):
            noise_from(bad)


def test_crossing_interpolates_in_log_space():
    line = [(1e-4, 1e-5, 1e-4), (1e-3, 1e-2, 1e-3)]
    x = _crossing(line)
    # log(r/p) goes -1 -> +1 (decades), so the crossing sits at the geometric midpoint
    assert x == pytest.approx(math.sqrt(1e-7))
    assert _crossing([(1e-4, 1e-6, 1e-4), (1e-3, 1e-5, 1e-3)]) is None
    assert _crossing([(1e-4, 0, 1e-4), (1e-3, 0, 1e-3)]) is None


def test_sweep_csv_columns_and_threshold_flags():
    res = sweep_and_map(["p2q:1e-4,3e-4,3e-3"], codes=["Surface17"], fixed={"inv_t2": 0}, shots=20_000, seed=1,
                        include_crosstalk=False)
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert rows[0] == ["p2q", "code", "basis", "shots", "violations", "rate", "ci_low", "ci_high", "p_phys",
                       "below_threshold"]
    assert len(rows) == 1 + 3 * 2
    assert res.cell(0).below_threshold("Surface17") and res.cell(1).below_threshold("Surface17")
    assert not res.cell(2).below_threshold("Surface17")
    pts = res.pseudothresholds("Surface17")["p2q"]
    assert len(pts) == 1 and 3e-4 < pts[0]["p2q"] < 3e-3
    assert res.cell(0).p_phys == pytest.approx(physical_comparator_rate(noise_from({"p2q": 1e-4})))


def test_sweep_best_map_and_progress():
    msgs = []
    res = sweep_and_map(["p2q:1e-3"], codes=["BaconShor13", "Shor6X2Z"], shots=500, progress=msgs.append)
    assert res.best_map().shape == (1,) and res.best_map()[0] in ("BaconShor13", "Shor6X2Z")
    assert len(msgs) == 4
    assert set(res.summary()) == {"axes", "fixed", "codes", "best_code", "below_threshold", "pseudothresholds"}


def test_sweep_is_independent_of_workers():
    kw = dict(codes=["Shor6Z2X"], shots=3000, seed=5)
    assert sweep_and_map(["p2q:2e-3,5e-3"], **kw).to_csv() == \
        sweep_and_map(["p2q:2e-3,5e-3"], workers=4, **kw).to_csv()


def test_sweep_errors():
    with pytest.raises(ValueError):
        sweep_and_map([])
    with pytest.raises(ValueError):
        sweep_and_map(["p2q:1e-3", "pMS:1e-3"])


def test_zero_noise_cell_is_below_threshold():
    res = sweep_and_map(["p2q:0"], codes=["Surface17"], shots=100)
    assert res.cell(0).p_phys == 0 and res.cell(0).below_threshold("Surface17")
    assert isinstance(noise_from({}), NoiseParams)
