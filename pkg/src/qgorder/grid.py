from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ordering import FLAT, WaveFunction, trapezoid_weights


@dataclass(frozen=True)
class GridSpec:
    """Uniform half-line grid y_k = k h, k = 1..n_points, h = y_max / n_points.

    The origin is not a node (its value, when needed, lives in
    ``WaveFunction.origin``).  The last node y_max is the far-end closure
    where every state is held at zero.
    """

    y_max: float = 12.0
    n_points: int = 2048

    def __post_init__(self):
        if not self.y_max > 0:
            raise ValueError("y_max must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 64:
            raise ValueError("n_points must be an integer >= 64")

    @property
    def h(self) -> float:
        return self.y_max / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return self.h * np.arange(1, self.n_points + 1)

    @property
    def weights(self):
        return trapezoid_weights(self.nodes)

    def state(self, values, origin=None) -> WaveFunction:
        return WaveFunction(self.nodes, values, FLAT, origin)

    def sample(self, f, with_origin: bool = False) -> WaveFunction:
        """Sample ``f`` on the nodes, zero at the closure node."""
        v = np.asarray(f(self.nodes), dtype=complex).copy()
        v[-1] = 0.0
        return self.state(v, complex(f(np.array([0.0]))[0]) if with_origin else None)

    def matches(self, psi: WaveFunction) -> bool:
        return psi.is_flat and psi.grid.size == self.n_points and np.allclose(psi.grid, self.nodes, rtol=1e-13, atol=0)
