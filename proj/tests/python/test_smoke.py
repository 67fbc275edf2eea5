from fractions import Fraction

import order_density as od


def test_closed_density_values():
    assert od.closed_density("gl2", 7, 0) == Fraction(14071, 16416)
    assert od.closed_density("gl2", 2, 0) == Fraction(11, 21)
    assert od.closed_density("norm-nonsplit", 2, 2) == Fraction(109, 120)


def test_series_matches_closed():
    for image in ("split", "nonsplit"):
        assert od.derived_series_density(image, 3, 1, threads=2) == od.closed_density(
            image, 3, 1
        )


def test_measure_pipeline():
    spec = {
        "ell": 3,
        "level": 3,
        "mode": "preimage",
        "base_level": 1,
        "generators": [[[1, 1], [0, 1]], [[-1, 0], [0, 1]]],
    }
    table = od.measure_table(spec, threads=2)
    entries = {(e["a"], e["b"]): e["mu"] for e in table["entries"]}
    assert entries[(0, 1)] == Fraction(5, 9)
    assert entries[(1, 0)] == Fraction(8, 81)
    assert od.group_series_density(spec, defect=0, threads=2) == Fraction(23, 104)


def test_simulate_interval():
    out = od.simulate(
        {
            "ell": 2,
            "level": 3,
            "image": {"ell": 2, "level": 1, "mode": "full"},
            "kummer": {"mode": "defect", "d": 0},
        }
    )
    assert out["lo"] <= Fraction(11, 21) <= out["hi"]


def test_empirical_sweep():
    rep = od.empirical_density(
        {"label": "37.a1", "a": [0, 0, 1, -1, 0], "point": [0, 0]},
        ell=2,
        bound=3000,
        threads=2,
    )
    assert rep["primes_skipped"] == 3
    assert abs(rep["frequency"] - 11 / 21) < 0.05


def test_exact_helpers():
    assert od.v_ell("18/25", 5) == -2
    assert od.v_ell("0", 3) is None
    assert od.geometric_tail(3, 2, 1) == Fraction(1, 8)
    assert od.decimal("23/104") == "0.22115"
