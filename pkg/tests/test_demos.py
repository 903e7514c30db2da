import math

import numpy as np
import pytest

from jbsde import (demo_counterexample_quadratic_growth,
                   demo_counterexample_royer, demo_nonconvex_generator)


def test_royer_table_values():
    table = demo_counterexample_royer([4, 16, 64])
    rows = {int(r[0]): r for r in table.rows}
    for n in (4, 16, 64):
        _, I1, I2, lower = rows[n]
        # I2(n) = 2 - 2/sqrt(n), uniformly below 2
        assert I2 == pytest.approx(2.0 - 2.0 / math.sqrt(n), rel=1e-9)
        assert I2 < 2.0
        assert I1 >= lower - 1e-6
        assert lower == pytest.approx(n * (2.0 - 2.0 / math.sqrt(n)))
    # exponential blow-up of I1
    assert rows[64][1] > rows[16][1] > rows[4][1]
    assert rows[64][1] > 1e100


def test_royer_golden_and_reproducible():
    t1 = demo_counterexample_royer([4])
    t2 = demo_counterexample_royer([4])
    assert t1.render() == t2.render()
    assert t1.rows[0][1] == pytest.approx(8.582455169698, rel=1e-10)


def test_royer_rejects_small_n():
    with pytest.raises(ValueError):
        demo_counterexample_royer([1])


def test_quadratic_growth_ratio_unbounded():
    table = demo_counterexample_quadratic_growth(psi_grid=(0.0, 1.0),
                                                 u_max=10.0)
    ratios = {r[0]: r[2] for r in table.rows}
    assert ratios[0.0] > 200.0
    assert ratios[1.0] > 200.0
    # the sup grows with the range endpoint
    wider = demo_counterexample_quadratic_growth(psi_grid=(0.0,), u_max=20.0)
    assert wider.rows[0][2] > ratios[0.0]
    with pytest.raises(ValueError):
        demo_counterexample_quadratic_growth(u_max=-1.0)


def test_nonconvex_certificate():
    _, cert = demo_nonconvex_generator(C=(0.0, 1.0), psi=1.0, alpha=1.0,
                                       u_grid=np.array([0.0, 0.5, 1.0]))
    assert cert is not None
    u0, u1, viol = cert
    assert (u0, u1) == (0.0, 1.0)
    # midpoint value of the pointwise min exceeds the chord average
    assert viol == pytest.approx(0.10653065971263, rel=1e-10)
    _, cert0 = demo_nonconvex_generator(C=(0.0, 1.0), psi=0.0, alpha=1.0)
    assert cert0 is None  # without jump exposure the min is convex again


def test_nonconvex_table_reproducible():
    t1, _ = demo_nonconvex_generator()
    t2, _ = demo_nonconvex_generator()
    assert t1.render() == t2.render()
