"""Shared constants, grids and independent oracles for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from hamspect.bloch import HamiltonianCoeffs, coeffs_to_polar
from hamspect.measurement import SamplingConfig

# The two example systems used throughout: a reference axis in the x-z
# plane and a second axis with all three components populated.
H_REF = HamiltonianCoeffs(0.1, 0.0, 0.05)
H_SECOND = HamiltonianCoeffs(0.6, 0.45, 0.1)

# Frozen analytic values for the two systems (rate = 2*|h|, polar angle
# from the z component, azimuth from atan2 of the transverse components).
OMEGA_REF = 0.22360679774997896  # sqrt(0.05)
THETA_REF = 1.1071487177940904  # arccos(0.1 / sqrt(0.05))
COS_THETA_REF = 0.4472135954999579
OMEGA_SECOND = 1.5132745950421556  # sqrt(2.29)
THETA_SECOND = 1.4382447944982226  # arccos(0.2 / sqrt(2.29))
PHI_SECOND = 0.6435011087932844  # atan2(0.45, 0.6)
BETA_REF = -1.0471975511965976  # -pi/3, landing azimuth for the reference axis

PERIOD_REF = 2.0 * math.pi / OMEGA_REF
PERIOD_SECOND = 2.0 * math.pi / OMEGA_SECOND


def integer_period_config(
    h: HamiltonianCoeffs,
    n_periods: int,
    n_s: int = 2000,
    n_e: int = 1,
    eta: float = 0.0,
    seed: int = 0,
) -> SamplingConfig:
    """Grid whose observation time is exactly ``n_periods`` of ``h``."""
    period = 2.0 * math.pi / coeffs_to_polar(h).omega
    return SamplingConfig(
        delta_t=n_periods * period / n_s, n_s=n_s, n_e=n_e, eta=eta, seed=seed
    )


def desk_config(seed: int, n_e: int = 20, eta: float = 0.1) -> SamplingConfig:
    """The reduced-scale reference scenario grid (t_ob = 500)."""
    return SamplingConfig(delta_t=0.25, n_s=2000, n_e=n_e, eta=eta, seed=seed)


def rk4_rotation_oracle(
    d_vecs: np.ndarray, s0: np.ndarray, ts: np.ndarray, max_angle_step: float = 1e-4
) -> np.ndarray:
    """Step-integrate ds/dt = d x s with a fixed per-case step.

    Classical fixed-step fourth-order Runge-Kutta, vectorized over cases.
    Every case takes the same number of steps, sized so that no case
    advances more than ``max_angle_step`` radians of rotation per step.
    Independent of the closed-form propagation it is used to check.
    """
    d_vecs = np.asarray(d_vecs, dtype=float)
    s = np.array(s0, dtype=float, copy=True)
    ts = np.asarray(ts, dtype=float)
    dmag = np.linalg.norm(d_vecs, axis=1)
    n_steps = max(1, int(np.ceil(np.max(dmag * ts) / max_angle_step)))
    h = (ts / n_steps)[:, None]

    dx, dy, dz = d_vecs[:, 0:1], d_vecs[:, 1:2], d_vecs[:, 2:3]

    def rhs(sv: np.ndarray) -> np.ndarray:
        out = np.empty_like(sv)
        out[:, 0:1] = dy * sv[:, 2:3] - dz * sv[:, 1:2]
        out[:, 1:2] = dz * sv[:, 0:1] - dx * sv[:, 2:3]
        out[:, 2:3] = dx * sv[:, 1:2] - dy * sv[:, 0:1]
        return out

    for _ in range(n_steps):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def central_difference(f, x: float, h: float) -> float:
    """Two-sided numerical derivative, used by the propagation oracles."""
    return (f(x + h) - f(x - h)) / (2.0 * h)


@pytest.fixture(scope="session")
def rng() -> np.random.Generator:
    return np.random.default_rng(20260809)
