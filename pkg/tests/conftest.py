import numpy as np
import pytest

from coordrate.dsbs_analytic import dsbs_joint, interp_channel, t_star
from coordrate.info_core import JointPMF, compose
from coordrate.rate_optimizers import (
    OptimizerConfig,
    gamma_star,
    minmax_equivalence_check,
    r_opt_two,
    wyner_ci,
)


def random_joint(rng: np.random.Generator, sizes, names=None) -> JointPMF:
    names = tuple(names) if names else tuple(f"X{i+1}" for i in range(len(sizes)))
    probs = rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes)
    return JointPMF.from_named(names, probs)


def xx_bit_joint() -> JointPMF:
    return JointPMF.from_named(("X", "Y"), np.array([[0.5, 0.0], [0.0, 0.5]]))


def xx_bit_decomp():
    return (np.array([0.5, 0.5]), np.eye(2), np.eye(2))


def dsbs_decomp(a: float, t: float):
    """(p_u, p_x|u, p_y|u) of the interpolated auxiliary attached to DSBS(a)."""
    joint = np.asarray(compose(dsbs_joint(a), interp_channel(a, t)).probs)
    p_u = joint.sum((0, 1))
    p_x_u = (joint.sum(1) / p_u).T
    p_y_u = (joint.sum(0) / p_u).T
    return p_u, p_x_u, p_y_u


@pytest.fixture(scope="session")
def dsbs01() -> JointPMF:
    return dsbs_joint(0.1)


@pytest.fixture(scope="session")
def ropt_dsbs01(dsbs01):
    return r_opt_two(dsbs01, OptimizerConfig(restarts=32, seed=0))


@pytest.fixture(scope="session")
def gamma_star_dsbs01(dsbs01):
    return gamma_star(dsbs01, OptimizerConfig(restarts=32, seed=0))


@pytest.fixture(scope="session")
def minmax_dsbs01(dsbs01):
    return minmax_equivalence_check(dsbs01, OptimizerConfig(restarts=32, seed=0))


@pytest.fixture(scope="session")
def wyner_dsbs01(dsbs01):
    return wyner_ci(dsbs01, OptimizerConfig(restarts=32, seed=0))


@pytest.fixture(scope="session")
def tstar01() -> float:
    return t_star(0.1)
