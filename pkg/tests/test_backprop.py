import numpy as np
import pytest

from topsmear.backprop import compose_downsample_gradient, pullback_gradient, topological_gradient
from topsmear.field import make_generic
from topsmear.functional import DiagramGradient, FunctionalSpec, RegionSpec, wasserstein_norm
from topsmear.persistence import persistence_of_field
from topsmear.smear import DownsampleSpec, Weighting, downsample, sample_weighting
from oracles import central_differences, diagram_from_dots, spaced_random_field


def test_scatter_single_dot():
    diag = diagram_from_dots([(0, 1, 2, 3, 7)])
    g = pullback_gradient(DiagramGradient(np.array([-1.0]), np.array([1.0])), diag, (1, 10))
    expected = np.zeros((1, 10))
    expected[0, 3], expected[0, 7] = -1, 1
    np.testing.assert_array_equal(g, expected)


def test_scatter_accumulates():
    diag = diagram_from_dots([(0, 1, 6, 0, 5), (0, 2, 6, 1, 5)])
    g = pullback_gradient(DiagramGradient(np.zeros(2), np.array([2.0, 2.0])), diag, (1, 10))
    assert g[0, 5] == 4.0 and g.sum() == 4.0


def test_scatter_essential_goes_to_max_vertex():
    diag = diagram_from_dots([(0, 0, np.inf, 2, None)], max_vertex=8)
    g = pullback_gradient(DiagramGradient(np.zeros(1), np.array([1.0])), diag, (1, 10))
    assert g[0, 8] == 1.0


def test_scatter_errors():
    diag = diagram_from_dots([(0, 0, 1, 2, 30)])
    with pytest.raises(IndexError):
        pullback_gradient(DiagramGradient(np.zeros(1), np.ones(1)), diag, (1, 10))
    with pytest.raises(ValueError):
        pullback_gradient(DiagramGradient.zeros(2), diag, (1, 10))


def test_compose_center_patch():
    w = sample_weighting(DownsampleSpec(2, "center"), (2, 2), np.random.default_rng(0))
    np.testing.assert_array_equal(compose_downsample_gradient(np.array([[4.0]]), w), np.ones((2, 2)))


def test_compose_one_hot():
    weights = np.zeros((2, 2))
    weights[1, 0] = 1.0
    w = Weighting(2, weights)
    g = compose_downsample_gradient(np.array([[3.0]]), w)
    assert g[1, 0] == 3.0 and g.sum() == 3.0


def test_compose_shape_check():
    w = sample_weighting(DownsampleSpec(2), (4, 4), np.random.default_rng(0))
    with pytest.raises(ValueError):
        compose_downsample_gradient(np.zeros((3, 3)), w)


@pytest.mark.parametrize("shape,k,shift", [((6, 6), 2, False), ((7, 5), 3, False), ((9, 11), 4, True)])
def test_adjoint_identity(shape, k, shift):
    rng = np.random.default_rng(k)
    for _ in range(10):
        w = sample_weighting(DownsampleSpec(k, shift=shift), shape, rng)
        x = rng.normal(size=shape)
        g = rng.normal(size=w.coarse_shape)
        lhs = np.vdot(g, downsample(x, w))
        rhs = np.vdot(compose_downsample_gradient(g, w), x)
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_pullback_finite_differences(p):
    rng = np.random.default_rng(int(p))
    f = spaced_random_field(10, 10, rng)
    spec = FunctionalSpec(p, RegionSpec(life_min=3.5), 0, "minimize", "both")
    res = topological_gradient(f, spec)
    fd = central_differences(lambda x: topological_gradient(x, spec).value, f, 1e-4 * np.ptp(f))
    np.testing.assert_allclose(res.grad, fd, rtol=1e-6, atol=1e-9)
    assert np.count_nonzero(res.grad) > 0


def test_superlevel_is_negation():
    f = spaced_random_field(8, 8, np.random.default_rng(7))
    spec = FunctionalSpec(1, RegionSpec(life_min=2.5), 1, "maximize", "births_only")
    up = topological_gradient(f, spec, superlevel=True)
    down = topological_gradient(-f, spec)
    assert up.value == down.value
    np.testing.assert_array_equal(up.grad, -down.grad)


def test_value_matches_norm():
    f = make_generic(np.random.default_rng(8).uniform(0, 255, (12, 12)))
    spec = FunctionalSpec(2, RegionSpec(life_min=20))
    assert topological_gradient(f, spec).value == wasserstein_norm(persistence_of_field(f), spec)
