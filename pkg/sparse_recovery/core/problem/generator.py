"""Synthetic compressed-sensing instance generation."""
import logging
import math
from typing import List

import numpy as np

from sparse_recovery.core.schemas.contracts import ProblemConfig, ProblemInstance

logger = logging.getLogger(__name__)


def derive_seed(master_seed: int, trial_index: int) -> int:
    """64-bit seed of trial `trial_index` under `master_seed`, independent of scheduling order."""
    sequence = np.random.SeedSequence(master_seed, spawn_key=(trial_index,))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _generator(seed: int) -> np.random.Generator:
    # Philox is counter-based, so derived seeds give independent streams
    return np.random.Generator(np.random.Philox(seed))


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class InstanceGenerator:
    """Draws Gaussian-matrix, Bernoulli-Gaussian-signal instances."""

    def generate(self, config: ProblemConfig) -> ProblemInstance:
        """Generate one instance; identical configs give bit-identical instances."""
        n, m = config.n, config.m
        rng = _generator(config.seed)

        a_matrix = rng.standard_normal((m, n)) / math.sqrt(n)
        support = rng.random(n) < config.rho
        x_true = np.where(support, rng.standard_normal(n), 0.0)
        noise = math.sqrt(config.sigma2) * rng.standard_normal(m)
        y = a_matrix @ x_true + noise

        logger.debug(f"Generated instance M={m} N={n} support={int(support.sum())} seed={config.seed}")
        return ProblemInstance(
            a_matrix=_frozen(a_matrix),
            x_true=_frozen(x_true),
            noise=_frozen(noise),
            y=_frozen(y),
            config=config,
        )

    def generate_trials(self, config: ProblemConfig, master_seed: int, trials: int) -> List[ProblemInstance]:
        """Instances for trials 0..trials-1 with seeds derived from master_seed."""
        return [
            self.generate(config.model_copy(update={"seed": derive_seed(master_seed, t)}))
            for t in range(trials)
        ]


def generate_instance(config: ProblemConfig) -> ProblemInstance:
    """Generate a synthetic instance y = A x0 + w for `config`."""
    return InstanceGenerator().generate(config)
