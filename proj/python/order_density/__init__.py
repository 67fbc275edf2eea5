"""Exact densities of primes at which a rational point reduces to order coprime to ell.

Thin wrapper over the compiled ``_core`` module: rationals cross the boundary
as ``num/den`` strings and come back as :class:`fractions.Fraction`; structured
reports come back as dicts.
"""

import json
import os
import sys
from fractions import Fraction

try:
    from ._core import (  # type: ignore
        closed_density as _closed,
        derived_series_density as _derived,
        measure_table_json as _measure_json,
        tail_model_json as _tail_json,
        group_series_density as _group_series,
        simulate_json as _simulate_json,
        empirical_json as _empirical_json,
        verify_json as _verify_json,
        v_ell,
        geometric_tail as _geometric_tail,
        decimal,
    )
except ImportError:  # in-tree runs: _core sits next to the build directory
    _core_dir = os.environ.get("ORDER_DENSITY_CORE_DIR")
    if _core_dir and _core_dir not in sys.path:
        sys.path.insert(0, _core_dir)
    from _core import (  # type: ignore
        closed_density as _closed,
        derived_series_density as _derived,
        measure_table_json as _measure_json,
        tail_model_json as _tail_json,
        group_series_density as _group_series,
        simulate_json as _simulate_json,
        empirical_json as _empirical_json,
        verify_json as _verify_json,
        v_ell,
        geometric_tail as _geometric_tail,
        decimal,
    )

__all__ = [
    "closed_density",
    "derived_series_density",
    "measure_table",
    "tail_model",
    "group_series_density",
    "simulate",
    "empirical_density",
    "verify",
    "v_ell",
    "geometric_tail",
    "decimal",
]


def closed_density(image, ell, defect=0):
    """Closed-formula density as an exact Fraction."""
    return Fraction(_closed(image, ell, defect))


def derived_series_density(image, ell, defect=0, threads=1):
    """Density recomputed from enumerated measure tables and fitted tails."""
    return Fraction(_derived(image, ell, defect, threads))


def measure_table(group_spec, threads=1):
    """Measure table of a group spec (dict), with Fractions for each entry."""
    table = json.loads(_measure_json(json.dumps(group_spec), threads))
    for entry in table["entries"]:
        entry["mu"] = Fraction(entry["mu"])
    table["undetermined"] = Fraction(table["undetermined"])
    return table


def tail_model(group_spec, threads=1):
    """Fitted tail model of a group spec; the spec's level and level+1 are used."""
    return json.loads(_tail_json(json.dumps(group_spec), threads))


def group_series_density(group_spec, defect=0, threads=1):
    return Fraction(_group_series(json.dumps(group_spec), defect, threads))


def simulate(arboreal_spec):
    """Certified density interval of an arboreal spec (dict with lo/hi Fractions)."""
    out = json.loads(_simulate_json(json.dumps(arboreal_spec)))
    out["lo"] = Fraction(out["lo"])
    out["hi"] = Fraction(out["hi"])
    return out


def empirical_density(curve_spec, ell, bound=100000, scale=0, threads=1):
    return json.loads(_empirical_json(json.dumps(curve_spec), ell, bound, scale, threads))


def verify(skip_empirical=True, threads=2, bound=100000):
    """Run the acceptance suite; returns a list of per-criterion results."""
    return json.loads(_verify_json(skip_empirical, threads, bound))


def geometric_tail(ell, step, start):
    return Fraction(_geometric_tail(ell, step, start))
