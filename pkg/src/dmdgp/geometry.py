"""Internal coordinates, chain realization, and the distance penalty.

A chain molecule with vertex order v1..vn is described by bond lengths
d_{i-1,i}, planar angles theta_{i-2,i} in (0, pi), and torsion angles
omega_{i-3,i}.  Only the torsion cosines are determined by the distance
data; the sign of each torsion sine is a free binary choice, so a word
of n-3 bits selects one candidate conformation.  Bit 0 selects the
positive sine branch, bit 1 the negative one, and the leftmost bit
belongs to vertex 4.

Cartesian coordinates are accumulated through a running product of 4x4
homogeneous transforms, one per vertex, applied to the origin.  The
first three atoms land at fixed positions:

    x1 = (0, 0, 0)
    x2 = (-d12, 0, 0)
    x3 = (-d12 + d23*cos(theta13), d23*sin(theta13), 0)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .bitstrings import check_bits

if TYPE_CHECKING:  # pragma: no cover
    from .instance import DmdgpInstance

#: Torsion cosines farther than this outside [-1, 1] are rejected
#: instead of clamped.
COS_TOLERANCE = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    """Own a read-only copy, so values are safe to share across threads."""
    out = np.array(arr, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class InternalCoords:
    """Internal coordinates of an n-vertex chain.

    bonds[i-2]            d_{i-1,i}        for i = 2..n
    angles[i-3]           theta_{i-2,i}    for i = 3..n, radians in (0, pi)
    torsion_cosines[i-4]  cos omega_{i-3,i} for i = 4..n, clamped to [-1, 1]
    """

    bonds: np.ndarray
    angles: np.ndarray
    torsion_cosines: np.ndarray

    def __post_init__(self) -> None:
        bonds = np.asarray(self.bonds, dtype=float)
        angles = np.asarray(self.angles, dtype=float)
        cosines = np.asarray(self.torsion_cosines, dtype=float)
        n = bonds.size + 1
        if n < 4:
            raise ValueError("need at least 4 vertices (3 bonds)")
        if angles.size != n - 2 or cosines.size != n - 3:
            raise ValueError(
                f"inconsistent lengths: {bonds.size} bonds, "
                f"{angles.size} angles, {cosines.size} torsion cosines"
            )
        if np.any(bonds <= 0):
            raise ValueError("bond lengths must be positive")
        if np.any(angles <= 0) or np.any(angles >= math.pi):
            raise ValueError("planar angles must lie strictly inside (0, pi)")
        if np.any(np.abs(cosines) > 1.0 + COS_TOLERANCE):
            raise ValueError("torsion cosine outside [-1, 1] beyond tolerance")
        object.__setattr__(self, "bonds", _frozen(bonds))
        object.__setattr__(self, "angles", _frozen(angles))
        object.__setattr__(self, "torsion_cosines", _frozen(np.clip(cosines, -1.0, 1.0)))

    @property
    def n(self) -> int:
        return self.bonds.size + 1

    def bond(self, i: int) -> float:
        """d_{i-1,i} for 2 <= i <= n."""
        return float(self.bonds[i - 2])

    def angle(self, i: int) -> float:
        """theta_{i-2,i} for 3 <= i <= n."""
        return float(self.angles[i - 3])

    def torsion_cos(self, i: int) -> float:
        """cos omega_{i-3,i} for 4 <= i <= n."""
        return float(self.torsion_cosines[i - 4])


@dataclass(frozen=True)
class Conformation:
    """Ordered 3D positions x1..xn, in the chain's canonical frame."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (n, 3) array")
        object.__setattr__(self, "points", _frozen(pts))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def point(self, i: int) -> np.ndarray:
        """Position of vertex i (1-based)."""
        return self.points[i - 1]

    def distance(self, u: int, v: int) -> float:
        return float(np.linalg.norm(self.points[u - 1] - self.points[v - 1]))


def b_matrix(i: int, internal: InternalCoords, sign: int = 1) -> np.ndarray:
    """Homogeneous transform appended at vertex i of the chain.

    i = 1 is the identity, i = 2 and i = 3 place the second and third
    atom, and for i >= 4 the torsion sine enters as
    sign * sqrt(1 - cos^2 omega).  `sign` is ignored for i <= 3.
    """
    if not 1 <= i <= internal.n:
        raise ValueError(f"vertex {i} out of range 1..{internal.n}")
    if i == 1:
        return np.eye(4)
    if i == 2:
        d = internal.bond(2)
        return np.array(
            [
                [-1.0, 0.0, 0.0, -d],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, -1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )
    if i == 3:
        d = internal.bond(3)
        ct = math.cos(internal.angle(3))
        st = math.sin(internal.angle(3))
        return np.array(
            [
                [-ct, -st, 0.0, -d * ct],
                [st, -ct, 0.0, d * st],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ]
        )
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d = internal.bond(i)
    ct = math.cos(internal.angle(i))
    st = math.sin(internal.angle(i))
    cw = internal.torsion_cos(i)
    sw = sign * math.sqrt(max(0.0, 1.0 - cw * cw))
    return np.array(
        [
            [-ct, -st, 0.0, -d * ct],
            [st * cw, -ct * cw, -sw, d * st * cw],
            [st * sw, -ct * sw, cw, d * st * sw],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def realize(internal: InternalCoords, bits: str) -> Conformation:
    """Realize the candidate selected by a torsion-sign word.

    Positions come from the running product Q_i = Q_{i-1} B_i applied
    to the homogeneous origin; bit j controls vertex 4+j (0 -> positive
    sine, 1 -> negative).
    """
    n = internal.n
    check_bits(bits, n - 3)
    points = np.zeros((n, 3))
    q = np.eye(4)
    for i in range(2, n + 1):
        sign = 1 if i <= 3 or bits[i - 4] == "0" else -1
        q = q @ b_matrix(i, internal, sign)
        points[i - 1] = q[:3, 3]
    return Conformation(points)


def penalty(conf: Conformation, inst: "DmdgpInstance") -> float:
    """Sum over edges of (||x_u - x_v||^2 - d_uv^2)^2.

    Zero exactly when every edge distance is met.
    """
    pts = conf.points
    total = 0.0
    for (u, v), d in inst.edges.items():
        diff = pts[u - 1] - pts[v - 1]
        sq = float(diff @ diff)
        total += (sq - d * d) ** 2
    return total


def extract_internal(inst: "DmdgpInstance") -> InternalCoords:
    """Read internal coordinates off a validated instance.

    Planar angles come from the law of cosines on consecutive triples.
    Torsion cosines come from the closed form over the six pairwise
    distances of each consecutive quadruple (intermediates a1, a2 are
    the law-of-cosines numerators of its two triples):

        a1 = d_{i-3,i-2}^2 + d_{i-2,i-1}^2 - d_{i-3,i-1}^2
        a2 = d_{i-2,i-1}^2 + d_{i-2,i}^2   - d_{i-1,i}^2

                  2 d_{i-2,i-1}^2 (d_{i-3,i-2}^2 + d_{i-2,i}^2 - d_{i-3,i}^2) - a1 a2
        cos w = -----------------------------------------------------------------------
                 sqrt(4 d_{i-3,i-2}^2 d_{i-2,i-1}^2 - a1^2) sqrt(4 d_{i-2,i-1}^2 d_{i-2,i}^2 - a2^2)
    """
    n = inst.n
    d = inst.weight
    bonds = np.array([d(i - 1, i) for i in range(2, n + 1)])
    angles = np.empty(n - 2)
    for i in range(3, n + 1):
        a, b, c = d(i - 2, i - 1), d(i - 1, i), d(i - 2, i)
        cos_t = (a * a + b * b - c * c) / (2.0 * a * b)
        if abs(cos_t) > 1.0 + COS_TOLERANCE:
            raise ValueError(f"degenerate triple at vertex {i}: |cos theta| > 1")
        angles[i - 3] = math.acos(min(1.0, max(-1.0, cos_t)))
    cosines = np.empty(n - 3)
    for i in range(4, n + 1):
        cosines[i - 4] = _torsion_cosine(
            d(i - 3, i - 2), d(i - 3, i - 1), d(i - 3, i),
            d(i - 2, i - 1), d(i - 2, i), d(i - 1, i),
        )
    return InternalCoords(bonds, angles, cosines)


def _torsion_cosine(d12: float, d13: float, d14: float,
                    d23: float, d24: float, d34: float) -> float:
    """cos of the dihedral of a quadruple from its six distances."""
    a1 = d12 * d12 + d23 * d23 - d13 * d13
    a2 = d23 * d23 + d24 * d24 - d34 * d34
    s1 = 4.0 * d12 * d12 * d23 * d23 - a1 * a1
    s2 = 4.0 * d23 * d23 * d24 * d24 - a2 * a2
    if s1 <= 0.0 or s2 <= 0.0:
        raise ValueError("collinear triple: torsion angle undefined")
    num = 2.0 * d23 * d23 * (d12 * d12 + d24 * d24 - d14 * d14) - a1 * a2
    cos_w = num / (math.sqrt(s1) * math.sqrt(s2))
    if abs(cos_w) > 1.0 + COS_TOLERANCE:
        raise ValueError("torsion cosine outside [-1, 1]: inconsistent distances")
    return min(1.0, max(-1.0, cos_w))


def quad_end_distance(bonds: tuple[float, float, float],
                      angles: tuple[float, float],
                      torsion_cos: float) -> float:
    """Distance between the first and fourth atom of a short chain.

    Depends on the torsion angle only through its cosine, so the
    branch sign is irrelevant.
    """
    ic = InternalCoords(
        np.array(bonds), np.array(angles), np.array([torsion_cos])
    )
    conf = realize(ic, "0")
    return conf.distance(1, 4)
