"""
Shared pytest fixtures and reference oracles
"""

import math
import os

import numpy as np
import pytest

import config


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Every test starts from default settings, whatever the developer's .env says"""
    for key in list(os.environ):
        if key.startswith("FIXPOINT_"):
            monkeypatch.delenv(key, raising=False)
    config.reset_settings()
    yield
    config.reset_settings()


@pytest.fixture
def halfshift():
    """z -> (z + i)/2, fixed point i"""
    return lambda z: (z + 1j) / 2


@pytest.fixture
def identity_map():
    return lambda z: z


def volterra_rhs(t: float, x: float) -> float:
    return (x + t ** 3) * math.exp(1.0 - 2.0 * t)


def rk4_oracle(rhs, t0: float, x0: float, nodes: np.ndarray, substeps: int = 50) -> np.ndarray:
    """Classical fourth-order Runge-Kutta, `substeps` steps between consecutive nodes"""
    values = np.empty(len(nodes))
    values[0] = x0
    t, x = t0, x0
    for i in range(1, len(nodes)):
        h = (nodes[i] - nodes[i - 1]) / substeps
        for _ in range(substeps):
            k1 = rhs(t, x)
            k2 = rhs(t + h / 2, x + h * k1 / 2)
            k3 = rhs(t + h / 2, x + h * k2 / 2)
            k4 = rhs(t + h, x + h * k3)
            x += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
            t += h
        t = nodes[i]
        values[i] = x
    return values


@pytest.fixture(scope="session")
def volterra_oracle():
    """RK4 reference for dx/dt = (x + t³) e^{1-2t}, x(1) = 2 on the 2001-node grid of [1, 2]"""
    nodes = np.linspace(1.0, 2.0, 2001)
    return nodes, rk4_oracle(volterra_rhs, 1.0, 2.0, nodes)
