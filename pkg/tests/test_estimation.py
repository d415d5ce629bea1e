import math
import warnings

import numpy as np
import pytest

from brdf_sampler.brdf import CookTorrance, Lambertian, Phong
from brdf_sampler.estimation import (
    Estimator,
    FitWarning,
    ParametricEstimate,
    TabulatedBrdf,
    damped_least_squares,
    evaluate_estimate,
    fit,
    model_jacobian,
    parametric_fit,
)
from brdf_sampler.geometry import Direction
from brdf_sampler.measurement import MeasurementSet, NoiseModel, simulate_measurements
from brdf_sampler.sampling import MeasurementConfiguration, equispaced_grid, uniform_sphere

from conftest import random_directions


def test_single_sample_nearest_is_constant(rng):
    c = MeasurementConfiguration((Direction(0.4, 1.0),), ((Direction(0.2, 3.0),),))
    g = fit(Estimator("nearest_neighbor"), MeasurementSet(c, [0.37]))
    for a, b in zip(random_directions(rng, 50), random_directions(rng, 50)):
        assert g.eval(a, b) == 0.37


def test_nearest_neighbor_matches_brute_force(rng):
    m = simulate_measurements(Phong(), uniform_sphere(60))
    g = fit(Estimator("nearest_neighbor"), m)
    pts = [(Direction(r[0], r[1]), Direction(r[2], r[3])) for r in m.pairs]
    from brdf_sampler.geometry import angular_distance

    for a, b in zip(random_directions(rng, 40), random_directions(rng, 40)):
        d = [math.hypot(angular_distance(a, p), angular_distance(b, q)) for p, q in pts]
        assert g.eval(a, b) == m.values[int(np.argmin(d))]


@pytest.mark.parametrize("kind", ["nearest_neighbor", "idw"])
def test_interpolation_property(kind):
    m = simulate_measurements(CookTorrance(), uniform_sphere(150), NoiseModel("additive_gaussian", 0.01), seed=2)
    g = fit(Estimator(kind), m)
    np.testing.assert_array_equal(g.eval_pairs(m.pairs), m.values)
    r = m.pairs[5]
    assert evaluate_estimate(g, Direction(r[0], r[1]), Direction(r[2], r[3])) == m.values[5]


def test_idw_weights_by_hand():
    a, b = Direction(0.2, 0.0), Direction(0.6, 0.0)
    c = MeasurementConfiguration((a,), ((a, b),))
    m = MeasurementSet(c, [1.0, 3.0])
    g = TabulatedBrdf(m, "idw", power=2.0, neighbors=16)
    q = Direction(0.3, 0.0)
    # query sits 0.1 from the first reflection node and 0.3 from the second
    w1, w2 = 1 / (0.1**2 + 1e-12), 1 / (0.3**2 + 1e-12)
    assert g.eval(a, q) == pytest.approx((w1 * 1.0 + w2 * 3.0) / (w1 + w2), rel=1e-9)


def test_idw_stays_within_data_range(rng):
    m = simulate_measurements(Phong(), uniform_sphere(100))
    g = fit(Estimator("idw"), m)
    pairs = np.array([[a.theta, a.phi, b.theta, b.phi] for a, b in zip(random_directions(rng, 300), random_directions(rng, 300))])
    v = g.eval_pairs(pairs)
    assert v.min() >= m.values.min() - 1e-15 and v.max() <= m.values.max() + 1e-15


def test_empty_and_invalid_estimators():
    with pytest.raises(ValueError):
        Estimator("kriging")
    with pytest.raises(ValueError):
        Estimator("idw", {"power": 0})
    with pytest.raises(ValueError):
        Estimator("parametric_fit", {"max_iter": 0})
    with pytest.raises(ValueError):
        Estimator("nearest_neighbor", {"power": 2})


def test_fit_needs_enough_points():
    m = MeasurementSet(equispaced_grid(1), [0.1])
    with pytest.raises(ValueError):
        fit(Estimator("parametric_fit", {"family": "phong"}), m)


def test_lambertian_fit_exact():
    m = simulate_measurements(Lambertian(0.5), uniform_sphere(64))
    g = fit(Estimator("parametric_fit", {"family": "lambertian"}), m)
    assert isinstance(g, ParametricEstimate) and g.converged
    assert abs(g.model.albedo - 0.5) <= 1e-9


def test_phong_fit_recovers_parameters():
    m = simulate_measurements(Phong(0.2, 0.5, 20.0), uniform_sphere(512))
    g = fit(Estimator("parametric_fit", {"family": "phong"}), m)
    assert g.converged
    np.testing.assert_allclose([g.model.kd, g.model.ks, g.model.exponent], [0.2, 0.5, 20.0], rtol=1e-4)


def test_cook_torrance_fit_recovers_parameters():
    truth = CookTorrance(0.3, 0.6, 0.3, 0.9)
    m = simulate_measurements(truth, uniform_sphere(512))
    g = fit(Estimator("parametric_fit", {"family": "cook_torrance"}), m)
    np.testing.assert_allclose([g.model.kd, g.model.ks, g.model.roughness, g.model.f0], [0.3, 0.6, 0.3, 0.9], rtol=1e-3)


def test_fit_respects_energy_constraint():
    m = simulate_measurements(Phong(0.2, 0.5, 20.0), uniform_sphere(256), NoiseModel("relative_gaussian", 0.3), seed=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FitWarning)
        g = fit(Estimator("parametric_fit", {"family": "phong"}), m)
    assert g.model.kd + g.model.ks <= 1 + 1e-12


def test_non_convergence_is_flagged():
    m = simulate_measurements(CookTorrance(), uniform_sphere(256), NoiseModel("additive_gaussian", 0.5), seed=0)
    with pytest.warns(FitWarning):
        g = parametric_fit("cook_torrance", m, max_iter=1)
    assert not g.converged and g.iterations == 1
    assert math.isfinite(g.sse)


@pytest.mark.parametrize(
    "family, x",
    [("lambertian", [0.4]), ("phong", [0.3, 0.5, 15.0]), ("cook_torrance", [0.2, 0.6, 0.35, 0.7])],
)
def test_jacobian_matches_finite_differences(family, x):
    pairs = uniform_sphere(80).pairs
    x = np.array(x)
    _, J = model_jacobian(family, x, pairs)
    for k in range(len(x)):
        h = 1e-6 * max(1.0, abs(x[k]))
        up, dn = x.copy(), x.copy()
        up[k] += h
        dn[k] -= h
        fd = (model_jacobian(family, up, pairs)[0] - model_jacobian(family, dn, pairs)[0]) / (2 * h)
        np.testing.assert_allclose(J[:, k], fd, rtol=1e-5, atol=1e-7)


def test_damped_least_squares_on_quadratic():
    target = np.array([0.3, -0.2])

    def rj(x):
        return x - target, np.eye(2)

    x, ok, iters, g, sse = damped_least_squares(rj, np.zeros(2), np.array([-1.0, -1.0]), np.array([1.0, 1.0]))
    # stops once the gradient norm drops below 1e-6
    assert ok and np.allclose(x, target, atol=1e-6) and g < 1e-6


def test_damped_least_squares_respects_bounds():
    def rj(x):
        return x - np.array([2.0]), np.eye(1)

    x, ok, *_ = damped_least_squares(rj, np.zeros(1), np.array([0.0]), np.array([1.0]))
    assert x[0] == 1.0
