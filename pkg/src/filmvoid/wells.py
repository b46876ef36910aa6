"""Double-well potentials, their normalization constant, and the optimal
1-D transition profile solving q' = -sqrt(2 W(q)).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class Well:
    name: str
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]


DOUBLE_WELL = Well(
    "doublewell",
    lambda s: s**2 * (1.0 - s) ** 2,
    lambda s: 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s),
)

# degenerate comparison well, W(s) = s(1-s)
BRIDGE_WELL = Well("bridge", lambda s: s * (1.0 - s), lambda s: 1.0 - 2.0 * s)

WELLS = {w.name: w for w in (DOUBLE_WELL, BRIDGE_WELL)}


def compute_cw(well: Well, panels: int = 64, order: int = 16) -> float:
    """Normalization c_W = 1 / int_0^1 sqrt(2 W(s)) ds by composite Gauss.

    The transition cost of the optimal profile is then exactly one per
    unit interface length.
    """
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        s = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        total += 0.5 * (b - a) * np.sum(weights * np.sqrt(2.0 * well.f(s)))
    return float(1.0 / total)


@dataclass(frozen=True)
class TransitionProfile:
    """Lookup table for the decreasing optimal profile q with q(0) = 1/2,
    q(-inf) = 1, q(+inf) = 0 (values clamped outside the table)."""

    ts: np.ndarray
    qs: np.ndarray

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.ts, self.qs, left=1.0, right=0.0)


_PROFILE_CACHE: dict[str, TransitionProfile] = {}


def transition_profile(well: Well, t_max: float = 24.0, dt: float = 1.0 / 512.0) -> TransitionProfile:
    """Integrate q' = -sqrt(2 W(q)) from q(0) = 1/2 by RK4, both directions."""
    if well.name in _PROFILE_CACHE:
        return _PROFILE_CACHE[well.name]

    def rhs(q):
        return -np.sqrt(2.0 * well.f(np.clip(q, 0.0, 1.0)))

    n = int(round(t_max / dt))

    def march(sign):
        qs = [0.5]
        for _ in range(n):
            q = qs[-1]
            h = sign * dt
            k1 = rhs(q)
            k2 = rhs(q + 0.5 * h * k1)
            k3 = rhs(q + 0.5 * h * k2)
            k4 = rhs(q + h * k3)
            qn = q + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            qs.append(float(np.clip(qn, 0.0, 1.0)))
        return np.array(qs)

    fwd = march(+1.0)
    bwd = march(-1.0)[::-1]
    ts = np.concatenate([-t_max + dt * np.arange(n), dt * np.arange(n + 1)])
    qs = np.concatenate([bwd[:-1], fwd])
    # enforce exact monotonicity against roundoff
    qs = np.minimum.accumulate(qs)
    prof = TransitionProfile(ts, qs)
    _PROFILE_CACHE[well.name] = prof
    return prof
