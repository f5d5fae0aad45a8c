"""Test synthetic instance generation, seeds, metrics and instance files."""
import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from sparse_recovery.core.errors import DomainError
from sparse_recovery.core.problem import (
    InstanceGenerator,
    derive_seed,
    generate_instance,
    load_instance_csv,
    load_instance_npz,
    mse,
    save_instance_csv,
    save_instance_npz,
    support_fraction,
)
from sparse_recovery.core.schemas.contracts import ProblemConfig, ProblemInstance


def test_same_config_gives_identical_instance():
    config = ProblemConfig(n=200, alpha=0.5, rho=0.3, sigma2=0.01, seed=7)
    first, second = generate_instance(config), generate_instance(config)
    for name in ("a_matrix", "x_true", "noise", "y"):
        np.testing.assert_array_equal(getattr(first, name), getattr(second, name))


def test_different_seeds_differ():
    base = ProblemConfig(n=100, alpha=0.5, rho=0.3, seed=1)
    other = base.model_copy(update={"seed": 2})
    assert not np.array_equal(generate_instance(base).a_matrix, generate_instance(other).a_matrix)


def test_shapes_and_observation():
    instance = generate_instance(ProblemConfig(n=300, alpha=0.9, rho=0.4, sigma2=0.01, seed=3))
    assert instance.m == 270 and instance.n == 300
    assert instance.alpha == pytest.approx(0.9)
    np.testing.assert_array_equal(instance.y, instance.a_matrix @ instance.x_true + instance.noise)


def test_measurement_count_has_floor_of_one():
    assert ProblemConfig(n=10, alpha=0.01, rho=0.5).m == 1


def test_arrays_are_read_only():
    instance = generate_instance(ProblemConfig(n=20, alpha=0.5, rho=0.5, seed=0))
    with pytest.raises(ValueError):
        instance.y[0] = 1.0


def test_signal_energy_and_matrix_variance_at_large_n():
    """Within three standard errors of rho and 1/N at N = 1e5."""
    rho, n = 0.3, 100_000
    instance = generate_instance(ProblemConfig(n=n, alpha=1e-4, rho=rho, sigma2=0.0, seed=11))
    energy = np.mean(instance.x_true ** 2)
    # x0^2 has mean rho and variance 3 rho - rho^2
    assert abs(energy - rho) < 3.0 * np.sqrt((3.0 * rho - rho ** 2) / n)
    entries = instance.a_matrix.size
    assert abs(np.var(instance.a_matrix) - 1.0 / n) < 3.0 * np.sqrt(2.0 / entries) / n


def test_noise_variance():
    sigma2 = 0.04
    instance = generate_instance(ProblemConfig(n=2000, alpha=1.0, rho=0.3, sigma2=sigma2, seed=11))
    assert abs(np.var(instance.noise) - sigma2) < 3.0 * sigma2 * np.sqrt(2.0 / instance.m)


def test_support_size_is_binomial():
    """Chi-square goodness of fit of the support size over 100 seeds at N = 1e4."""
    n, rho, seeds = 10_000, 0.2, 100
    sizes = np.array([
        np.count_nonzero(generate_instance(ProblemConfig(n=n, alpha=1e-3, rho=rho, seed=derive_seed(31, t))).x_true)
        for t in range(seeds)
    ])
    distribution = stats.binom(n, rho)
    # interior edges at deciles keep every expected count near 10
    edges = np.unique(distribution.ppf(np.linspace(0.1, 0.9, 9)))
    cdf = np.concatenate([[0.0], distribution.cdf(edges), [1.0]])
    probabilities = np.diff(cdf)
    observed = np.bincount(np.searchsorted(edges, sizes, side="left"), minlength=probabilities.size)
    expected = seeds * probabilities / probabilities.sum()
    assert expected.min() >= 5.0
    _, p_value = stats.chisquare(observed, expected)
    assert p_value > 1e-3


def test_degenerate_densities_and_noise():
    empty = generate_instance(ProblemConfig(n=50, alpha=0.5, rho=0.0, sigma2=0.0, seed=5))
    assert not empty.x_true.any()
    assert not empty.noise.any()
    dense = generate_instance(ProblemConfig(n=50, alpha=0.5, rho=1.0, seed=5))
    assert support_fraction(dense.x_true) == 1.0


def test_derive_seed_is_deterministic_and_distinct():
    seeds = [derive_seed(42, t) for t in range(10)]
    assert seeds == [derive_seed(42, t) for t in range(10)]
    assert len(set(seeds)) == 10
    assert all(0 <= s < 2**64 for s in seeds)
    assert derive_seed(42, 0) != derive_seed(43, 0)


def test_generate_trials_uses_derived_seeds():
    config = ProblemConfig(n=30, alpha=0.5, rho=0.2)
    instances = InstanceGenerator().generate_trials(config, master_seed=9, trials=3)
    assert [i.config.seed for i in instances] == [derive_seed(9, t) for t in range(3)]


def test_invalid_configs_rejected():
    with pytest.raises(ValidationError):
        ProblemConfig(n=0, alpha=0.5, rho=0.2)
    with pytest.raises(ValidationError):
        ProblemConfig(n=10, alpha=0.5, rho=1.2)
    with pytest.raises(ValidationError):
        ProblemConfig(n=10, alpha=-1.0, rho=0.2)


def test_mse():
    assert mse([1.0, 2.0], [1.0, 0.0]) == pytest.approx(2.0)
    assert mse(np.zeros(4), np.zeros(4)) == 0.0
    with pytest.raises(DomainError):
        mse([1.0, 2.0], [1.0])


def test_from_arrays_infers_noise():
    a_matrix = np.eye(2)
    instance = ProblemInstance.from_arrays(a_matrix, y=[1.0, 0.5], x_true=[1.0, 0.0])
    np.testing.assert_allclose(instance.noise, [0.0, 0.5])
    assert instance.config.rho == pytest.approx(0.5)


def test_inconsistent_shapes_rejected():
    with pytest.raises(ValidationError):
        ProblemInstance.from_arrays(np.eye(2), y=[1.0, 0.5, 0.0], x_true=[1.0, 0.0], noise=[0.0, 0.0])


def test_instance_files(tmp_path):
    """Both containers reproduce the instance exactly."""
    instance = generate_instance(ProblemConfig(n=12, alpha=0.5, rho=0.5, sigma2=0.01, seed=21))
    save_instance_npz(tmp_path / "instance.npz", instance)
    save_instance_csv(tmp_path / "instance.csv", instance)
    for loaded in (load_instance_npz(tmp_path / "instance.npz"), load_instance_csv(tmp_path / "instance.csv")):
        assert loaded.config == instance.config
        np.testing.assert_array_equal(loaded.a_matrix, instance.a_matrix)
        np.testing.assert_array_equal(loaded.y, instance.y)
