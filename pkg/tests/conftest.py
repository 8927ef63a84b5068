from __future__ import annotations

import numpy as np
import pytest

from almpc.config import bundled_config, parse_config
from almpc.controller import ModelData
from almpc.polytope import HPolytope, is_subset

A = np.array([[1.2, 1.5], [0.0, 1.3]])
B = np.array([[0.0], [1.0]])
E = np.eye(2)
F = np.vstack([np.eye(2), -np.eye(2), np.zeros((2, 2))])
G = np.vstack([np.zeros((4, 1)), [[1.0], [-1.0]]])
f = np.array([10.0, 10.0, 10.0, 10.0, 1.0, 1.0])
THETA0 = HPolytope.box([-0.2, -0.1], [0.2, 0.1])
W = HPolytope.box([-0.8, -0.8], [0.8, 0.8])
THETA_A = np.array([0.01, 0.05])
X_S = np.array([-5.6, 1.29])


def same_set(p, q, tol=1e-8):
    return is_subset(p, q, tol) and is_subset(q, p, tol)


def small_box(r):
    return HPolytope.box([-r, -r], [r, r])


@pytest.fixture
def model():
    return ModelData(A, B, E, F, G, f)


@pytest.fixture(scope="session")
def verbatim_cfg():
    return parse_config(bundled_config("paper_sec5.json"))


@pytest.fixture(scope="session")
def low_noise_cfg():
    return parse_config(bundled_config("low_noise.json"))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
