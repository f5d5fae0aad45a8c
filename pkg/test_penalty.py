"""Test penalty values, proximal operators and adaptive smoothing."""
import math

import numpy as np
import pytest
from scipy import optimize

from sparse_recovery.core.errors import DomainError, RegimeViolationError
from sparse_recovery.core.penalty import (
    adaptive_epsilon,
    dead_zone_threshold,
    is_exact_recovery,
    kink_points,
    normalized_penalty,
    objective_value,
    penalty_value,
    prox,
    prox_derivative,
    prox_params_for,
)
from sparse_recovery.core.schemas.contracts import PenaltySpec, ProxParams

LOGSUM = PenaltySpec.logsum()
L1 = PenaltySpec.l1()


def test_soft_threshold():
    """L1 prox shrinks toward zero by lambda and zeroes the dead zone."""
    params = ProxParams(lambda_prox=1.0, epsilon=1.0)
    out = prox(np.array([-2.0, -0.5, 0.0, 0.5, 3.0]), params, L1)
    np.testing.assert_array_equal(out, [-1.0, 0.0, 0.0, 0.0, 2.0])


def test_soft_threshold_derivative_is_active_indicator():
    params = ProxParams(lambda_prox=1.0, epsilon=1.0)
    out = prox_derivative(np.array([-2.0, -1.0, 0.3, 1.0, 1.5]), params, L1)
    np.testing.assert_array_equal(out, [1.0, 0.0, 0.0, 0.0, 1.0])


@pytest.mark.parametrize("h", [0.8, 1.3, 2.0, 5.0, -3.0])
def test_logsum_prox_minimizes_scalar_objective(h):
    """The closed-form log-sum prox matches a bounded numerical minimization."""
    params = ProxParams(lambda_prox=0.25, epsilon=1.0)

    def objective(x):
        return 0.5 * (x - h) ** 2 + params.lambda_prox * math.log1p(abs(x) / params.epsilon)

    reference = optimize.minimize_scalar(objective, bounds=sorted((0.0, h)), method="bounded",
                                         options={"xatol": 1e-12})
    assert float(prox(h, params, LOGSUM)) == pytest.approx(reference.x, abs=1e-6)


def test_logsum_prox_stationarity():
    """Active outputs satisfy r - |h| + lambda / (eps + r) = 0."""
    params = ProxParams(lambda_prox=0.25, epsilon=1.0)
    h = np.linspace(0.3, 6.0, 50)
    r = prox(h, params, LOGSUM)
    active = r > 0
    assert active.any()
    residual = r[active] - h[active] + params.lambda_prox / (params.epsilon + r[active])
    assert np.max(np.abs(residual)) < 1e-12


def test_logsum_dead_zone_and_symmetry():
    params = prox_params_for(0.25, LOGSUM)
    threshold = dead_zone_threshold(params, LOGSUM)
    assert threshold == pytest.approx(0.25 / (0.5 + 1e-10))
    assert float(prox(0.99 * threshold, params, LOGSUM)) == 0.0
    assert float(prox(-0.99 * threshold, params, LOGSUM)) == 0.0
    assert float(prox(-2.0, params, LOGSUM)) == pytest.approx(-float(prox(2.0, params, LOGSUM)))


def test_logsum_prox_continuous_at_threshold_with_adaptive_epsilon():
    """Just above the dead zone the output is still close to zero."""
    params = prox_params_for(0.25, LOGSUM)
    threshold = dead_zone_threshold(params, LOGSUM)
    assert 0.0 <= float(prox(threshold * (1 + 1e-9), params, LOGSUM)) < 1e-3


def test_logsum_prox_rejects_discontinuous_regime():
    params = ProxParams(lambda_prox=1.0, epsilon=0.5)
    with pytest.raises(RegimeViolationError):
        prox(2.0, params, LOGSUM)
    with pytest.raises(RegimeViolationError):
        prox_derivative(2.0, params, LOGSUM)


def test_logsum_derivative_matches_finite_difference():
    params = ProxParams(lambda_prox=0.25, epsilon=1.0)
    h, step = 2.0, 1e-6
    numeric = (float(prox(h + step, params, LOGSUM)) - float(prox(h - step, params, LOGSUM))) / (2 * step)
    assert float(prox_derivative(h, params, LOGSUM)) == pytest.approx(numeric, rel=1e-6)


def test_prox_derivative_is_nonnegative():
    params = prox_params_for(0.3, LOGSUM)
    h = np.linspace(-5.0, 5.0, 1001)
    assert np.all(prox_derivative(h, params, LOGSUM) >= 0.0)


@pytest.mark.parametrize("spec", [LOGSUM, L1])
def test_zero_scale_is_identity(spec):
    params = prox_params_for(0.0, spec)
    h = np.array([-1.5, 0.0, 0.2, 7.0])
    np.testing.assert_array_equal(prox(h, params, spec), h)
    np.testing.assert_array_equal(prox_derivative(h, params, spec), np.ones_like(h))
    assert dead_zone_threshold(params, spec) == 0.0


def test_adaptive_epsilon():
    assert adaptive_epsilon(0.04, 1e-10) == pytest.approx(0.2 + 1e-10, abs=1e-15)
    with pytest.raises(DomainError):
        adaptive_epsilon(0.0, 1e-10)
    with pytest.raises(DomainError):
        adaptive_epsilon(0.04, -1.0)
    with pytest.raises(DomainError):
        prox_params_for(float("nan"), LOGSUM)


def test_penalty_values():
    assert float(penalty_value(0.0, LOGSUM, epsilon=0.1)) == 0.0
    assert float(penalty_value(-2.0, L1)) == 2.0
    assert float(penalty_value(1.0, LOGSUM, epsilon=1.0)) == pytest.approx(math.log(2.0))
    with pytest.raises(DomainError):
        penalty_value(1.0, LOGSUM)
    with pytest.raises(DomainError):
        penalty_value(np.inf, L1)


def test_normalized_penalty_interpolates_l0_and_l1():
    assert float(normalized_penalty(1.0, LOGSUM, epsilon=0.3)) == pytest.approx(1.0)
    # large epsilon behaves like |x|
    assert float(normalized_penalty(3.0, LOGSUM, epsilon=1e8)) == pytest.approx(3.0, rel=1e-6)
    # small epsilon flattens toward the l0 indicator
    assert abs(float(normalized_penalty(3.0, LOGSUM, epsilon=1e-12)) - 1.0) < abs(
        float(normalized_penalty(3.0, LOGSUM, epsilon=1.0)) - 1.0
    )


def test_kink_points():
    assert kink_points(0.5, 2.0) == [-0.25, 0.25]
    assert kink_points(0.0, 2.0) == []


def test_objective_value():
    a_matrix = np.eye(2)
    value = objective_value(np.array([1.0, 0.0]), a_matrix, np.array([2.0, 0.0]), 0.5, L1)
    assert value == pytest.approx(0.5 * 1.0 + 0.5 * 1.0)


def _brute_force_prox(h, lambda_prox, epsilon):
    """Bounded 1-D minimization of the log-sum prox objective on [0, |h|]."""
    a = abs(h)
    if a == 0.0:
        return 0.0

    def objective(x):
        return 0.5 * (x - a) ** 2 + lambda_prox * math.log1p(x / epsilon)

    result = optimize.minimize_scalar(objective, bounds=(0.0, a), method="bounded", options={"xatol": 1e-10})
    best = min((0.0, result.x), key=objective)
    return math.copysign(best, h)


def test_logsum_prox_matches_brute_force_on_random_pairs():
    rng = np.random.default_rng(1)
    hs = rng.uniform(-10.0, 10.0, 10_000)
    lambdas = 10.0 ** rng.uniform(-4.0, 2.0, 10_000)
    for h, lam in zip(hs, lambdas):
        params = prox_params_for(float(lam), LOGSUM)
        expected = _brute_force_prox(float(h), params.lambda_prox, params.epsilon)
        assert float(prox(h, params, LOGSUM)) == pytest.approx(expected, abs=1e-6), (h, lam)


def test_logsum_reference_values_at_three():
    params = prox_params_for(0.5, LOGSUM)
    assert params.epsilon == pytest.approx(math.sqrt(0.5) + 1e-10, abs=1e-15)
    assert float(prox(3.0, params, LOGSUM)) == pytest.approx(2.85985, abs=1e-4)
    assert float(prox_derivative(3.0, params, LOGSUM)) == pytest.approx(1.04085, abs=1e-4)


@pytest.mark.parametrize("spec", [LOGSUM, L1])
def test_prox_is_odd_and_shrinks(spec):
    rng = np.random.default_rng(2)
    h = rng.uniform(-10.0, 10.0, 5_000)
    for lam in 10.0 ** rng.uniform(-4.0, 2.0, 20):
        params = prox_params_for(float(lam), spec)
        out = prox(h, params, spec)
        np.testing.assert_array_equal(prox(-h, params, spec), -out)
        assert np.all(np.abs(out) <= np.abs(h))
        assert np.all(out * h >= 0.0)


@pytest.mark.parametrize("spec", [LOGSUM, L1])
def test_prox_is_monotone(spec):
    rng = np.random.default_rng(3)
    h = np.linspace(-10.0, 10.0, 200_001)
    for lam in 10.0 ** rng.uniform(-4.0, 2.0, 50):
        out = prox(h, prox_params_for(float(lam), spec), spec)
        assert np.all(np.diff(out) >= -1e-12), lam


def test_soft_threshold_is_nonexpansive():
    rng = np.random.default_rng(4)
    a, b = rng.uniform(-10.0, 10.0, (2, 10_000))
    for lam in (1e-4, 0.3, 5.0, 1e2):
        params = prox_params_for(lam, L1)
        assert np.all(np.abs(prox(a, params, L1) - prox(b, params, L1)) <= np.abs(a - b) + 1e-12)


@pytest.mark.parametrize("spec", [LOGSUM, L1])
def test_derivative_matches_finite_difference_on_random_points(spec):
    """Central differences with step 1e-6 agree to 1e-5 away from the dead-zone edge."""
    rng = np.random.default_rng(5)
    step = 1e-6
    checked = 0
    for h, lam in zip(rng.uniform(-10.0, 10.0, 1_000), 10.0 ** rng.uniform(-4.0, 2.0, 1_000)):
        params = prox_params_for(float(lam), spec)
        if abs(abs(h) - dead_zone_threshold(params, spec)) < 0.05:
            continue
        numeric = (float(prox(h + step, params, spec)) - float(prox(h - step, params, spec))) / (2 * step)
        assert float(prox_derivative(h, params, spec)) == pytest.approx(numeric, abs=1e-5), (h, lam)
        checked += 1
    assert checked > 900


@pytest.mark.parametrize("lambda_prox", [1e-2, 1.0, 1e2])
def test_adjacent_jumps_follow_square_root_edge(lambda_prox):
    """On a 1e-6 grid over [-10, 10] no adjacent jump exceeds the square-root edge bound.

    Just above the dead zone prox(h) ~ lambda^(1/4) sqrt(|h| - threshold), so the
    largest step is about lambda^(1/4) sqrt(1e-6) and shrinks with the grid spacing.
    """
    params = prox_params_for(lambda_prox, LOGSUM)
    step, total, chunk = 1e-6, 20_000_001, 1_000_000
    largest = 0.0
    for start in range(0, total - 1, chunk):
        h = -10.0 + step * np.arange(start, min(start + chunk + 1, total))
        largest = max(largest, float(np.max(np.abs(np.diff(prox(h, params, LOGSUM))))))
    bound = lambda_prox ** 0.25 * math.sqrt(step)
    assert largest <= 2.0 * bound + 2.0 * step


def test_adaptive_epsilon_stays_above_root_for_huge_scales():
    for lam in (1e12, 1e13, 1e20, 1e300):
        epsilon = adaptive_epsilon(lam, 1e-10)
        assert epsilon > math.sqrt(lam)
        params = prox_params_for(lam, LOGSUM)
        assert float(prox(5.0, params, LOGSUM)) == 0.0
        assert float(prox_derivative(5.0, params, LOGSUM)) == 0.0


def test_exact_recovery_threshold():
    assert is_exact_recovery(1e-5)
    assert not is_exact_recovery(1e-3)
    assert not is_exact_recovery(1e-4)
    assert is_exact_recovery(1e-3, threshold=1e-2)
