import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jbsde import (GeneratorError, GeneratorSpec, TruncationBand,
                   ZetaDensity, approx_sequence, apriori_bound,
                   build_mark_measure, build_named_generator, check_afin,
                   check_ainfi, drift_adjust, eval_generator, gamma_slope,
                   ode_bounds, truncate_generator)
from jbsde.generators import entropic_g

ZETA = ZetaDensity.constant(1.0)
MM = build_mark_measure([1.0, -0.5], [0.5, 1.0])


def test_eval_entropic_value():
    gen = build_named_generator("entropic", {"alpha": 2.0})
    u = np.array([0.3, -0.2])
    expected = sum((math.exp(2 * ui) - 2 * ui - 1) / 2.0 * w
                   for ui, w in zip(u, [1.0, 0.5]))
    # marks sorted: (-0.5 w=1.0), (1.0 w=0.5); u aligned with sorted order
    got = eval_generator(gen, 0.0, 0.0, np.zeros(1), u, MM, ZETA)
    assert got == pytest.approx(expected, rel=1e-12)


def test_eval_rejects_wrong_width_and_nonfinite():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    with pytest.raises(GeneratorError):
        eval_generator(gen, 0.0, 0.0, np.zeros(1), np.zeros(3), MM, ZETA)
    with pytest.raises(GeneratorError):
        eval_generator(gen, 0.0, 0.0, np.zeros(1), np.array([1e9, 0.0]), MM, ZETA)


def test_afin_holds_for_entropic():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    rep = check_afin(gen)
    assert rep.passed
    assert rep.witness["inf_slope"] > -1.0


def test_afin_fails_below_minus_one():
    bad = GeneratorSpec(fhat=lambda t, y, z: 0.0,
                        g=lambda t, y, z, u, e: -2.0 * np.asarray(u),
                        K_yz=0.0)
    rep = check_afin(bad)
    assert not rep.passed
    assert rep.witness["inf_slope"] == pytest.approx(-2.0, abs=1e-6)


def test_ainfi_entropic_constants():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    rep = check_ainfi(gen, c=2.0)
    assert rep.passed
    # K(c) = sup |e^u - 1| / |u| on (0, c] = (e^c - 1)/c
    assert rep.witness["K"] == pytest.approx((math.e ** 2 - 1) / 2.0, rel=1e-3)
    assert rep.witness["delta"] == pytest.approx(math.exp(-2.0), rel=1e-3)
    with pytest.raises(GeneratorError):
        check_ainfi(gen, c=0.0)


def test_truncation_identity_inside_band():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    band = TruncationBand(a=lambda t: -5.0, b=lambda t: 5.0)
    tr = truncate_generator(gen, band)
    u = np.array([0.2, -0.1])
    v1 = eval_generator(gen, 0.0, 0.5, np.zeros(1), u, MM, ZETA)
    v2 = eval_generator(tr, 0.0, 0.5, np.zeros(1), u, MM, ZETA)
    assert v1 == pytest.approx(v2, rel=1e-14)


def test_truncation_clamps_outside_band():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    band = TruncationBand(a=lambda t: -1.0, b=lambda t: 1.0)
    tr = truncate_generator(gen, band)
    # y and y+u both clamp to the band edge -> effective u = 0 -> g part = 0
    v = eval_generator(tr, 0.0, 5.0, np.zeros(1), np.array([3.0, 7.0]), MM, ZETA)
    assert v == pytest.approx(0.0, abs=1e-14)


def test_band_validate():
    band = TruncationBand(a=lambda t: 1.0, b=lambda t: -1.0)
    with pytest.raises(GeneratorError):
        band.validate([0.0, 1.0])


@given(y=st.floats(-10, 10), u=st.floats(-10, 10))
@settings(max_examples=60, deadline=None)
def test_truncation_is_contraction(y, u):
    band = TruncationBand(a=lambda t: -1.0, b=lambda t: 2.0)
    ky = band.kappa(0.0, y)
    kyu = band.kappa(0.0, y + u)
    assert abs(kyu - ky) <= abs(u) + 1e-12


def test_drift_adjust_adds_bz():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    adj = drift_adjust(gen, lambda t: np.array([2.0]))
    z = np.array([0.7])
    base = eval_generator(gen, 0.0, 0.0, z, np.zeros(2), MM, ZETA)
    got = eval_generator(adj, 0.0, 0.0, z, np.zeros(2), MM, ZETA)
    assert got == pytest.approx(base + 1.4, rel=1e-12)
    assert adj.K_yz >= gen.K_yz + 2.0 - 1e-12


def test_apriori_bound_formula():
    assert apriori_bound(0.0, 2.0, 0.5, 1.0, 0.0) == pytest.approx(2.5)
    assert apriori_bound(1.0, 2.0, 0.0, 1.0, 0.0) == pytest.approx(2.0 * math.e)
    with pytest.raises(GeneratorError):
        apriori_bound(0.0, -1.0, 0.0, 1.0, 0.0)
    with pytest.raises(GeneratorError):
        apriori_bound(0.0, 1.0, 0.0, 1.0, 2.0)


def test_ode_bounds_linear_and_exponential():
    band = ode_bounds("two-sided-K1K2",
                      {"K1": 1.0, "K2": 0.0, "xi_sup": 2.0, "T": 1.0})
    assert band.b(0.0) == pytest.approx(3.0)
    assert band.b(1.0) == pytest.approx(2.0)
    band2 = ode_bounds("positive-K",
                       {"C": 0.5, "K": 1.0, "xi_sup": 2.0, "T": 1.0})
    assert band2.a(1.0) == pytest.approx(0.5)
    assert band2.a(0.0) == pytest.approx(0.5 * math.exp(-1.0))
    assert band2.b(0.0) == pytest.approx(2.0 * math.e)
    with pytest.raises(GeneratorError):
        ode_bounds("nope", {"T": 1.0})


def test_gamma_slope_matches_difference_quotient():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    got = gamma_slope(gen, 0.0, 0.0, np.zeros(1), 0.5, 0.2, 1.0)
    g, _ = entropic_g(1.0)
    expected = (g(0, 0, 0, 0.5, 1.0) - g(0, 0, 0, 0.2, 1.0)) / 0.3
    assert got == pytest.approx(expected, rel=1e-12)
    assert gamma_slope(gen, 0.0, 0.0, np.zeros(1), 0.5, 0.5, 1.0) == 0.0


def test_approx_sequence_masks_marks():
    gen = build_named_generator("entropic", {"alpha": 1.0})
    sub = approx_sequence(gen, lambda n: (lambda e, n=n: abs(e) >= 1.0 / n), 1)
    # only |e| >= 1 survives: the -0.5 mark is dropped
    u = np.array([0.4, 0.4])
    full = eval_generator(gen, 0.0, 0.0, np.zeros(1), u, MM, ZETA)
    restricted = eval_generator(sub, 0.0, 0.0, np.zeros(1), u, MM, ZETA)
    g, _ = entropic_g(1.0)
    assert restricted == pytest.approx(g(0, 0, 0, 0.4, 1.0) * 0.5, rel=1e-12)
    assert restricted < full


def test_unknown_kind_and_infeasible_gooddeal():
    with pytest.raises(GeneratorError):
        build_named_generator("whatever", {})
    with pytest.raises(GeneratorError):
        build_named_generator("gooddeal", {"K": 0.1, "phi": np.array([1.0]),
                                           "sigma": np.eye(1)})
