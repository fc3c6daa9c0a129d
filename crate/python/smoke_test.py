"""Smoke test for the `wprec` extension module.

Build and install first:

    pip install maturin
    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

from fractions import Fraction

import wprec


def main() -> None:
    engine = wprec.CorrelatorEngine()
    assert engine.correlator(1, "1:1", [0]) == Fraction(1, 24)
    assert engine.correlator(0, None, [0, 0, 0]) == 1
    assert engine.correlator(2, {1: 3}) == Fraction(43, 2880)
    assert engine.correlator(1, "1:1", [1]) == 0

    b = wprec.MultiIndex("1:2,3:1")
    assert (b.weight, b.length) == (5, 3)
    assert b.to_dict() == {1: 2, 3: 1}
    assert str(b) == "1:2,3:1"
    assert wprec.MultiIndex({3: 1, 1: 2}) == b

    oracle = wprec.KmzOracle()
    assert oracle.pure_psi(3, [7]) == Fraction(1, 82944)
    assert oracle.kmz_expand(2, "1:1,2:1", [2, 0]) == engine.correlator(2, "1:1,2:1", [2, 0])

    for check in (
        engine.verify_string(1, None, [2]),
        engine.verify_dilaton(1, None, [1]),
        engine.verify_kappa_subtracted(2, "1:2", [1, 1]),
    ):
        assert check["holds"], check

    volumes = wprec.VolumeEngine()
    assert volumes.volume(0, 4, "1:1") == 1
    assert volumes.volume(1, 1, "1:1") == Fraction(1, 24)
    assert volumes.volume_closed(2, "1:3") == Fraction(43, 2880)
    assert volumes.volume_expanded_check(1, 2, "1:2")["holds"]

    hodge = wprec.HodgeEngine()
    assert hodge.hodge(2, "lambda_g", "1:1", [1]) == Fraction(7, 1920)
    assert hodge.hodge(2, "lambda_g", "1:1", [1], expanded=True) == Fraction(7, 1920)
    assert hodge.hodge(2, "lambda_g_lambda_gm1", None, [1]) == Fraction(1, 2880)
    doubled = wprec.HodgeEngine({(2, "lambda_g"): "7/2880"})
    assert doubled.custom
    assert doubled.hodge(2, "lambda_g", "1:1", [1]) == Fraction(7, 960)

    assert wprec.constant("alpha", "1:1") == Fraction(1, 3)
    assert wprec.constant("gamma_odd", {1: 5}) * 945 == 50521
    table = dict(wprec.constant_table("gamma_fact", 2))
    assert table["1:2"] == Fraction(3, 2)

    shift = wprec.shift(3, 2, 4)
    assert shift["holds"] and shift["first_mismatch"] is None, shift

    for name in ("oracle", "volumes", "kdv"):
        report = wprec.run_suite(name, max_dim=4)
        assert report["passed"] and report["cases"] > 0, report
    assert "hodge" in wprec.suite_names()

    try:
        engine.correlator(1, "1:x", [0])
    except ValueError:
        pass
    else:
        raise AssertionError("bad kappa text accepted")

    print("wprec smoke test passed")


if __name__ == "__main__":
    main()
