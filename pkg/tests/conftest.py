import numpy as np
import pytest
from dotenv import load_dotenv

from gapflow.gapseries import construct_counterexample
from gapflow.gapseries import construct_example
from gapflow.gapseries import validate_gap
from gapflow.weights import Weight


load_dotenv()


@pytest.fixture
def power1():
    return Weight.power(1.0)


@pytest.fixture
def log_power1():
    return Weight.log_power(1.0)


@pytest.fixture
def power_example(power1):
    """b-chain example on v = 1/(1-r) with A = 2: frequencies 2^1, 2^3, ..., 2^61"""
    return construct_example(power1, 2.0, 31)


@pytest.fixture
def log_example(log_power1):
    return construct_example(log_power1, 2.0, 25)


@pytest.fixture
def log_counterexample(log_power1):
    return construct_counterexample(log_power1, 25)


@pytest.fixture
def zero_series():
    return validate_gap([(1, 0.0), (3, 0.0), (9, 0.0)])


@pytest.fixture
def random_series():
    """twelve random complex coefficients on frequencies 2^k"""
    rng = np.random.default_rng(7)
    coefs = rng.normal(size=12) + 1j * rng.normal(size=12)
    return validate_gap([(2**k, a) for k, a in zip(range(1, 13), coefs)])
