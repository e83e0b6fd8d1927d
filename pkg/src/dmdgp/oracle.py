"""Boolean oracle over candidate indices, built from the penalty.

The penalty of any candidate is bounded by p1 = 6^4 (n^6 + n^2), so
g/p1 lies in [0, 1].  Raising it to 1/p2 with

    p2 = log_{1-eps}(delta / p1)

pushes every sub-threshold penalty strictly below 1 - eps and every
other one into [1 - eps, 1], which makes

    f(k) = 1 - floor((g(h(k)) / p1)^(1/p2) + eps)

an exact indicator of g(h(k)) < delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bitstrings import int_to_bits
from .geometry import InternalCoords, penalty, realize
from .instance import DmdgpInstance

DEFAULT_DELTA = 1e-4
DEFAULT_EPSILON = 0.5

#: Largest search space an exhaustive scan will walk by default.
DEFAULT_SCAN_CAP = 1 << 24


class ScanCapExceeded(RuntimeError):
    """The candidate space is larger than the configured scan cap."""


@dataclass(frozen=True)
class OracleParams:
    """Thresholds plus the induced normalization and exponent."""

    n: int
    delta: float
    epsilon: float
    p1: float
    p2: float


def oracle_params(n: int, delta: float = DEFAULT_DELTA,
                  epsilon: float = DEFAULT_EPSILON) -> OracleParams:
    """Build parameters for an n-vertex search, checking the hypotheses."""
    if n < 4:
        raise ValueError(f"vertex count must be >= 4, got {n}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if delta + epsilon >= 1:
        raise ValueError(
            f"hypothesis violated: delta + epsilon = {delta + epsilon} must be < 1"
        )
    p1 = float(6**4 * (n**6 + n**2))
    p2 = math.log(delta / p1) / math.log(1.0 - epsilon)
    return OracleParams(n=n, delta=delta, epsilon=epsilon, p1=p1, p2=p2)


def oracle_value(params: OracleParams, g: float) -> float:
    """(g / p1)^(1/p2), with g = 0 mapping to 0."""
    if g < 0:
        raise ValueError("penalty cannot be negative")
    if g == 0.0:
        return 0.0
    return (g / params.p1) ** (1.0 / params.p2)


def oracle_bit(params: OracleParams, g: float) -> int:
    """1 - floor(oracle_value + epsilon): 1 iff g < delta."""
    return 1 - math.floor(oracle_value(params, g) + params.epsilon)


def oracle_eval(inst: DmdgpInstance, internal: InternalCoords,
                params: OracleParams, k: int) -> int:
    """Evaluate the oracle at candidate index k."""
    if params.n != inst.n:
        raise ValueError(f"params built for n={params.n}, instance has n={inst.n}")
    bits = int_to_bits(k, inst.n - 3)
    return oracle_bit(params, penalty(realize(internal, bits), inst))


def marked_set(inst: DmdgpInstance, internal: InternalCoords,
               params: OracleParams, scan_cap: int = DEFAULT_SCAN_CAP) -> tuple[int, ...]:
    """All candidate indices with f(k) = 1, ascending."""
    if params.n != inst.n:
        raise ValueError(f"params built for n={params.n}, instance has n={inst.n}")
    size = 1 << (inst.n - 3)
    if size > scan_cap:
        raise ScanCapExceeded(f"search space {size} exceeds scan cap {scan_cap}")
    return tuple(
        k for k in range(size) if oracle_eval(inst, internal, params, k) == 1
    )
