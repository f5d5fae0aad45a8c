"""Instance serialization for regression fixtures."""
import json
from pathlib import Path
from typing import Union

import numpy as np

from sparse_recovery.core.schemas.contracts import ProblemConfig, ProblemInstance

PathLike = Union[str, Path]


def save_instance_npz(path: PathLike, instance: ProblemInstance) -> None:
    """Write an instance to a compressed numpy container."""
    np.savez_compressed(
        path,
        a_matrix=instance.a_matrix,
        x_true=instance.x_true,
        noise=instance.noise,
        y=instance.y,
        config=np.array(instance.config.model_dump_json()),
    )


def load_instance_npz(path: PathLike) -> ProblemInstance:
    with np.load(path, allow_pickle=False) as data:
        return ProblemInstance(
            a_matrix=data["a_matrix"],
            x_true=data["x_true"],
            noise=data["noise"],
            y=data["y"],
            config=ProblemConfig.model_validate_json(str(data["config"])),
        )


def save_instance_csv(path: PathLike, instance: ProblemInstance) -> None:
    """Flat text container: config header, then A row by row, then x0, w and y."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# {instance.config.model_dump_json()}\n")
        np.savetxt(handle, instance.a_matrix, delimiter=",", fmt="%.17g")
        for vector in (instance.x_true, instance.noise, instance.y):
            np.savetxt(handle, vector[None, :], delimiter=",", fmt="%.17g")


def load_instance_csv(path: PathLike) -> ProblemInstance:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    config = ProblemConfig.model_validate(json.loads(lines[0].lstrip("#").strip()))
    rows = [np.array(line.split(","), dtype=float) for line in lines[1:] if line.strip()]
    m = len(rows) - 3
    return ProblemInstance(
        a_matrix=np.vstack(rows[:m]),
        x_true=rows[m],
        noise=rows[m + 1],
        y=rows[m + 2],
        config=config,
    )
