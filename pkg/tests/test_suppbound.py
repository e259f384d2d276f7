import math
import warnings

import numpy as np
import pytest

from primeprod.charfourier import GroupFunction, convolve, indicator_fz
from primeprod.errors import DegenerateInputError
from primeprod.modgroup import unit_group_structure
from primeprod.primesets import primes_up_to
from primeprod.selberg import build_weights, well_approx_ratio
from primeprod.suppbound import (
    SupportBound,
    SupportBoundInput,
    support_bound_from_functions,
    support_lower_bound,
    theorem1_pipeline,
)


def test_saturating_case():
    G = unit_group_structure(101)
    one = GroupFunction(G, np.ones(G.order))
    b = support_bound_from_functions(one, one, 0.1)
    assert b.second is None or b.second > b.first
    assert math.isclose(b.first, 0.9 * 100)
    assert b.value <= 100


def test_unbounded_second_branch():
    b = support_lower_bound(SupportBoundInput(3.0, 6.0, 0.0, 50, 0.2))
    assert b.second is None and b.active == "first"
    assert math.isclose(b.value, 0.8 * 50 * 0.5)


def test_each_branch_can_be_active():
    first = support_lower_bound(SupportBoundInput(1.0, 1.0, 1e-6, 10, 0.5))
    assert first.active == "first"
    second = support_lower_bound(SupportBoundInput(1.0, 1.0, 1e6, 10, 0.5))
    assert second.active == "second"
    assert math.isclose(second.value, 10 * 0.25 / 1e6)


def test_monotone_in_epsilon():
    eps = np.linspace(0.05, 0.95, 19)
    bs = [support_lower_bound(SupportBoundInput(2.0, 3.0, 5.0, 40, e)) for e in eps]
    assert all(a.first > b.first for a, b in zip(bs, bs[1:]))
    assert all(a.second < b.second for a, b in zip(bs, bs[1:]))


def test_input_validation():
    with pytest.raises(ValueError):
        SupportBoundInput(1, 1, 1, 10, 1.0)
    with pytest.raises(ValueError):
        SupportBoundInput(-1, 1, 1, 10, 0.5)
    with pytest.raises(DegenerateInputError):
        SupportBoundInput(0, 0, 0, 10, 0.5)
    assert support_lower_bound(SupportBoundInput(0, 0, 1.0, 10, 0.5)).value == 0


def test_random_pairs_q101():
    rng = np.random.default_rng(7)
    G = unit_group_structure(101)
    for _ in range(300):
        h = rng.random(G.order) * (rng.random(G.order) < rng.random())
        if not h.any():
            continue
        g = h * rng.random(G.order) * (rng.random(G.order) < rng.random())
        b = support_bound_from_functions(GroupFunction(G, g), GroupFunction(G, h), 0.1)
        assert b.value <= np.count_nonzero(g) + 1e-9


def test_pipeline_q10007():
    r = theorem1_pipeline(10007, 0.05)
    assert r.sound
    assert r.lower_bound_ratio <= r.actual_ratio
    w = build_weights(10007, 10007 ** 0.7)
    assert math.isclose(r.D, w.D)
    assert math.isclose(r.first_term_ratio, 1 / well_approx_ratio(w), rel_tol=1e-9)
    assert r.spectral_margin is not None
    assert isinstance(r.distance_to_three_eighths, float)


@pytest.mark.parametrize("q", [101, 250, 499])
def test_support_of_prime_convolution_is_two_prime_products(q):
    r = theorem1_pipeline(q, 0.05)
    f = indicator_fz(q, r.z)
    supp = convolve(f, f).support(0.5)
    ps = [int(p) for p in primes_up_to(q - 1) if p >= r.z and q % p]
    prods = {p1 * p2 % q for p1 in ps for p2 in ps}
    assert supp == prods
    assert math.isclose(r.actual_ratio, len(prods) / unit_group_structure(q).order)


def test_pipeline_arguments():
    with pytest.raises(ValueError):
        theorem1_pipeline(1009, 0.2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = theorem1_pipeline(1000, 0.05)  # not cube-free: runs, flags it
    assert not r.cube_free and r.sound


def test_support_bound_value_and_active():
    assert SupportBound(3.0, None).value == 3.0
    assert SupportBound(3.0, 2.0).value == 2.0 and SupportBound(3.0, 2.0).active == "second"
