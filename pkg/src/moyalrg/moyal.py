"""Noncommutativity matrix and the antisymmetric product p ^ q = p Theta q."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ThetaMatrix:
    theta: float = 1.0

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError("theta must be positive")

    @property
    def matrix(self) -> np.ndarray:
        return theta_matrix(self.theta)

    def apply(self, k) -> np.ndarray:
        return np.asarray(k, dtype=float) @ self.matrix.T

    def wedge(self, p, q):
        return wedge(p, q, self.theta)


def theta_matrix(theta: float = 1.0) -> np.ndarray:
    t = float(theta)
    return np.array([[0.0, t, 0.0, 0.0],
                     [-t, 0.0, 0.0, 0.0],
                     [0.0, 0.0, 0.0, t],
                     [0.0, 0.0, -t, 0.0]])


def wedge(p, q, theta: float = 1.0):
    """p^mu Theta_{mu nu} q^nu, broadcasting over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return theta * (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
                    + p[..., 2] * q[..., 3] - p[..., 3] * q[..., 2])


def vertex_kernel_exponent(incoming, theta: float = 1.0) -> float:
    """sum_{i<j} q_i ^ q_j over momenta listed in rotation order."""
    q = np.asarray(incoming, dtype=float)
    total = 0.0
    run = np.zeros(4)
    for vec in q:
        total += wedge(run, vec, theta)
        run += vec
    return float(total)
