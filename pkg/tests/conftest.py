import dataclasses

import pytest

from smaphase.experiment import preset, run


def reduced(name: str, seed: int = 42):
    """Desk-scale variant of a preset: GA population 60, 300 generations."""
    spec = preset(name)
    ga = dataclasses.replace(spec.ga, population=60, generations=300, rng_seed=seed)
    return dataclasses.replace(spec, ga=ga)


@pytest.fixture(scope="session")
def exp1_run():
    return run(preset("experiment1"), seed=42)


@pytest.fixture(scope="session")
def exp3_reduced_run():
    return run(reduced("experiment3"))
