import numpy as np

from sigmaflow import models
from sigmaflow.probes import chart_probes, halton_points


def test_points_stay_inside_with_margin():
    domain = ((-1.0, 1.0), (0.0, 4.0), (-2.0, 0.0))
    pts = halton_points(domain, 50)
    for x in pts:
        for (lo, hi), c in zip(domain, x):
            pad = 0.1 * (hi - lo)
            assert lo + pad - 1e-12 <= c <= hi - pad + 1e-12


def test_deterministic_given_seed():
    domain = ((-1.0, 1.0), (-1.0, 1.0))
    a = halton_points(domain, 20, seed=5)
    b = halton_points(domain, 20, seed=5)
    assert np.array_equal(a, b)
    c = halton_points(domain, 20, seed=6)
    assert not np.array_equal(a, c)


def test_low_discrepancy_spread():
    # no duplicate points, decent coverage of each axis
    pts = np.asarray(halton_points(((-1.0, 1.0),) * 2, 64))
    assert len(np.unique(pts.round(12), axis=0)) == 64
    for axis in range(2):
        assert pts[:, axis].min() < -0.5
        assert pts[:, axis].max() > 0.5


def test_chart_probes_respect_domain():
    model = models.hyperbolic(4)
    for x in chart_probes(model.chart, 30):
        assert model.chart.contains(x)
