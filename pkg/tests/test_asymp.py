import math

import pytest

from repnum import arith, asymp, moments
from repnum.asymp import Statistic
from repnum.repfun import RepFamily


def test_landau_ramanujan():
    value, tail = asymp.landau_ramanujan(3)
    assert value == pytest.approx(0.75, abs=1e-15)
    assert tail == 0.5
    v7, _ = asymp.landau_ramanujan(7)
    assert v7 == pytest.approx(0.7578, abs=5e-5)
    v6, t6 = asymp.landau_ramanujan(10**6)
    assert v6 == pytest.approx(0.76422, abs=1e-5)
    assert t6 < 2e-6
    with pytest.raises(ValueError):
        asymp.landau_ramanujan(2)


def test_landau_monotone_within_tail():
    cuts = [10, 100, 1000, 10**4, 10**5]
    vals = [asymp.landau_ramanujan(c) for c in cuts]
    for (v1, t1), (v2, _) in zip(vals, vals[1:]):
        assert abs(math.log(v2 / v1)) <= t1


def test_predicted_main():
    assert asymp.predicted_main("r0_first", 10**6) == pytest.approx(
        math.pi / 4 * 10**6)
    x = math.exp(100)
    assert asymp.predicted_main("r1_first", x) == pytest.approx(
        math.pi / 2 * x / 100)
    got = asymp.predicted_main("M0", 10**7)
    assert got == pytest.approx(0.76422 * 10**7 / math.sqrt(math.log(10**7)),
                                rel=1e-4)
    assert asymp.predicted_main("r0_second", 100, constants={"H": 0.5}) \
        == pytest.approx(100 * math.log(100) / 4 + 50)
    with pytest.raises(ValueError):
        asymp.predicted_main("r0_second", 100)
    with pytest.raises(ValueError):
        asymp.predicted_main("nope", 100)
    with pytest.raises(ValueError):
        asymp.predicted_main("r1_first", 1)
    shape = asymp.predicted_main(Statistic("gss_shape", ell=1, k=2), 10**4)
    big_l = math.log(math.log(10**4))
    assert shape == pytest.approx(10**4 * big_l**2 / 2 / math.log(10**4) ** 2)


def test_ratio_report_examples(table):
    rows = asymp.ratio_report("r0_first", [10], table)
    assert rows[0].empirical == 9
    assert rows[0].predicted == pytest.approx(7.854, abs=5e-4)
    assert rows[0].residual == pytest.approx(1.146, abs=5e-4)
    assert abs(rows[0].residual) <= 3 * math.sqrt(10)
    assert asymp.ratio_report("M0", [10], table)[0].empirical == 7
    assert asymp.ratio_report("r2_first", [50], table)[0].empirical == 9
    rows = asymp.ratio_report("r1_first", [100, 1000, 50], table)
    assert [r.x for r in rows] == [50, 100, 1000]
    for r in rows:
        assert r.ratio == pytest.approx(r.empirical / r.predicted)


def test_fit_secondary_constant(table):
    ests, spread = asymp.fit_secondary_constant([10], table)
    assert ests[0] == pytest.approx((13 - 10 * math.log(10) / 4) / 10)
    assert spread == 0.0
    ests, spread = asymp.fit_secondary_constant(
        [10**4, 2 * 10**4, 5 * 10**4, 10**5], table)
    assert spread >= 0 and len(ests) == 4


def test_mertens_ap_constant(table):
    got = asymp.mertens_ap_constant(1, 10, table)
    assert got == pytest.approx(0.2 - 0.5 * math.log(math.log(10)), rel=1e-12)
    got = asymp.mertens_ap_constant(3, 10, table)
    assert got == pytest.approx(10 / 21 - 0.5 * math.log(math.log(10)),
                                rel=1e-12)
    with pytest.raises(ValueError):
        asymp.mertens_ap_constant(2, 100, table)
    with pytest.raises(ValueError):
        asymp.mertens_ap_constant(1, 2, table)


def test_recip_class_difference_bounded(table6):
    for x in (10**2, 10**3, 10**4, 10**5, 10**6):
        d = abs(arith.prime_recip_sum(x, 1, table6)
                - arith.prime_recip_sum(x, 3, table6))
        assert d <= 0.5, x


def test_argmax_k():
    assert asymp.argmax_k(4.8, 1) == 4
    assert asymp.argmax_k(5, 2) == 9
    assert asymp.argmax_k(0.5, 1) == 0
    assert asymp.argmax_k(1.0, 1) == 0
    with pytest.raises(ValueError):
        asymp.argmax_k(0, 1)
    for i in range(0, 57):
        big_l = 2 + 0.5 * i
        for l in (1, 2, 3):
            assert abs(asymp.argmax_k(big_l, l) - 2 ** (l - 1) * big_l) <= 1


def test_inductive_claim_sum(table):
    assert asymp.inductive_claim_sum(100, table) == pytest.approx(
        100 / (5 * math.log(20)))
    assert asymp.inductive_claim_sum(24, table) == 0.0
    with pytest.raises(ValueError):
        asymp.inductive_claim_sum(10, table)
    # prime powers contribute: at x = 1e4, q = 25 enters
    v = asymp.inductive_claim_sum(10**4, table)
    direct = sum(10**4 / (q * math.log(10**4 / q))
                 for q in (5, 13, 17, 29, 37, 41, 53, 61, 73, 89, 97, 25))
    assert v == pytest.approx(direct)


def test_smooth_squarefull_sum(table):
    assert asymp.smooth_squarefull_rstar_sum(30, 1, table) == 12
    with pytest.raises(ValueError):
        asymp.smooth_squarefull_rstar_sum(10, 1, table)
    with pytest.raises(ValueError):
        asymp.smooth_squarefull_rstar_sum(100, 0, table)
    r4 = asymp.smooth_squarefull_rstar_sum(10**4, 1, table) / 10**4
    r5 = asymp.smooth_squarefull_rstar_sum(10**5, 1, table) / 10**5
    assert r5 < r4


def test_gss_shape_ratio(table):
    got = asymp.gss_shape_ratio(10, 1, 1, RepFamily.R1, table)
    assert got == pytest.approx(
        3 * math.log(10) ** 2 / (10 * math.log(math.log(10))), rel=1e-12)
    assert asymp.gss_shape_ratio(10, 1, 5, RepFamily.R1, table) == 0.0
    assert asymp.gss_shape_ratio(10, 2, 1, RepFamily.R1, table) == 0.0
    with pytest.raises(ValueError):
        asymp.gss_shape_ratio(10, 1, 1, RepFamily.R0, table)


def test_gss_grid_matches_single(table):
    grid = asymp.gss_shape_ratios_grid(RepFamily.RPRIME_STAR, [100, 1000],
                                       table, ells=(1, 2), kmax=3)
    for (x, ell, k), v in grid.items():
        single = asymp.gss_shape_ratio(x, ell, k, RepFamily.RPRIME_STAR, table)
        assert v == pytest.approx(single, rel=1e-12), (x, ell, k)


def test_tau_growth_max(table6):
    got = asymp.tau_growth_max(1000, 10**6, table6)
    assert got == pytest.approx(1.525218379189189, abs=1e-12)


def test_constants_file_roundtrip(tmp_path):
    path = str(tmp_path / "constants.txt")
    values = {"C": 0.8563, "gamma1": 1.0, "H": -0.25}
    asymp.write_constants(path, values, {"C": "gap fit", "H": "moment fit"})
    with open(path) as fh:
        text = fh.read()
    assert "C = 0.8563 # gap fit" in text
    assert text.endswith("\n")
    back = asymp.read_constants(path)
    assert back == pytest.approx(values)


def test_calibrate_small_grid(table):
    v1, notes = asymp.calibrate(table, grid_max=10**5)
    v2, _ = asymp.calibrate(table, grid_max=10**5)
    assert v1 == v2
    assert set(v1) == {"C", "gamma1", "gamma2", "H", "gss_bound", "landau_K"}
    assert set(notes) == set(v1)
    assert v1["C"] > 0 and v1["gamma1"] > 0 and v1["gss_bound"] > 0
