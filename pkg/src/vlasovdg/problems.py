"""Initial conditions and dynamics for the benchmark problems."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .projection import GridSpec

VLASOV_POISSON = "vlasov_poisson"
FREE_STREAMING = "free_streaming"
SOLID_ROTATION = "solid_rotation"
DYNAMICS = (VLASOV_POISSON, FREE_STREAMING, SOLID_ROTATION)

WEAK_LANDAU_DECAY_RATE = 0.1533


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    initial: Callable
    length: float
    v_max: float
    dynamics: str
    x_left: float = 0.0
    exact_energy: Optional[Callable] = None
    decay_rate: Optional[float] = None

    def grid(self, nx, nv, degree) -> GridSpec:
        return GridSpec(self.length, self.v_max, nx, nv, degree, self.x_left)

    def with_dynamics(self, dynamics):
        if dynamics not in DYNAMICS:
            raise ValueError(f"unknown dynamics {dynamics!r}")
        return ProblemSpec(self.name, self.initial, self.length, self.v_max, dynamics,
                           self.x_left, self.exact_energy, self.decay_rate)

    def envelope(self, t):
        """Reference energy envelope exp(-2 gamma t), when a decay rate is known."""
        if self.decay_rate is None:
            raise ValueError(f"{self.name} has no reference decay rate")
        return np.exp(-2.0 * self.decay_rate * np.asarray(t, dtype=float))


def _landau_initial(alpha):
    def f0(x, v):
        return np.exp(-0.5 * v * v) / np.sqrt(2.0 * np.pi) * (1.0 + alpha * np.cos(0.5 * x))
    return f0


def landau(alpha) -> ProblemSpec:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    gamma = WEAK_LANDAU_DECAY_RATE if alpha == 0.01 else None
    return ProblemSpec(f"landau(alpha={alpha})", _landau_initial(alpha), 4.0 * np.pi, 6.0,
                       VLASOV_POISSON, decay_rate=gamma)


def free_streaming_energy(t):
    """Exact electric energy of the free-streaming solution with alpha = 0.01."""
    return np.pi / 1250.0 * np.exp(-0.25 * np.asarray(t, dtype=float) ** 2)


def advection_recurrence() -> ProblemSpec:
    return ProblemSpec("advection", _landau_initial(0.01), 4.0 * np.pi, 6.0, FREE_STREAMING,
                       exact_energy=free_streaming_energy)


def cone(x, y):
    r = np.sqrt((x + 0.5) ** 2 + y ** 2)
    return np.where(r <= 0.25, np.cos(2.0 * np.pi * r) ** 2, 0.0)


def molenkamp_crowley() -> ProblemSpec:
    """Cosine-squared cone rotating once per unit time on [-1, 1]^2 (v plays the role of y)."""
    return ProblemSpec("molenkamp_crowley", cone, 2.0, 1.0, SOLID_ROTATION, x_left=-1.0)


PROBLEMS = {
    "weak_landau": lambda: landau(0.01),
    "strong_landau": lambda: landau(0.5),
    "equilibrium": lambda: landau(0.0),
    "advection": advection_recurrence,
    "molenkamp_crowley": molenkamp_crowley,
}


def get_problem(name) -> ProblemSpec:
    try:
        return PROBLEMS[name]()
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None
