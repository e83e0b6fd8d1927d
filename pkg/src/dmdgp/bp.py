"""Branch-and-prune enumeration and the solution-set symmetries.

The search tree roots at the fixed first three atoms and branches on
the torsion sign at each vertex from 4 to n.  Pruning tests every edge
{v_j, v_i} with j < i - 3 against the freshly placed position of v_i.
The symmetry vertices S predict the solution count 2^|S| before any
search runs, and one found solution expands to the full set by suffix
reflections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitstrings import bits_to_int, check_bits
from .geometry import Conformation, InternalCoords, b_matrix, penalty
from .instance import DmdgpInstance

#: Default per-edge pruning tolerance (angstroms).  Linear distance
#: residuals are better conditioned during search than the quartic
#: penalty; accepted leaves are re-checked against the full penalty.
DEFAULT_PRUNE_TOL = 1e-6

#: Default final-acceptance bound on the full penalty, matching the
#: oracle's solution threshold.
DEFAULT_PENALTY_TOL = 1e-4


class NoSolutionError(RuntimeError):
    """No leaf survived: inconsistent instance or too tight a tolerance."""


@dataclass(frozen=True)
class SymmetrySet:
    """Vertices v in 4..n with no edge {u, w} such that u + 3 < v <= w."""

    vertices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, v: int) -> bool:
        return v in self.vertices

    @property
    def expansion_size(self) -> int:
        """Predicted solution count 2^|S|."""
        return 1 << len(self.vertices)


@dataclass(frozen=True)
class Solution:
    bits: str
    conformation: Conformation
    penalty: float

    @property
    def index(self) -> int:
        return bits_to_int(self.bits)


@dataclass(frozen=True)
class SolutionSet:
    entries: tuple[Solution, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def bit_strings(self) -> list[str]:
        return [s.bits for s in self.entries]

    def indices(self) -> list[int]:
        return [s.index for s in self.entries]


def symmetry_set(inst: DmdgpInstance) -> SymmetrySet:
    """Evaluate the defining set comprehension exactly."""
    members = [
        v
        for v in range(4, inst.n + 1)
        if not any(u + 3 < v <= w for (u, w) in inst.edges)
    ]
    return SymmetrySet(tuple(members))


def expand_symmetry(bits: str, sym: SymmetrySet) -> set[str]:
    """All strings reachable by reflecting at symmetry vertices.

    Reflecting at vertex v flips every bit position for vertices >= v.
    The flips commute, so the orbit over all subsets of S has exactly
    2^|S| distinct members (including the input).
    """
    check_bits(bits, len(bits))
    width = len(bits)
    out = set()
    for mask in range(1 << len(sym.vertices)):
        chosen = [v for b, v in enumerate(sym.vertices) if mask >> b & 1]
        word = []
        for pos in range(width):
            parity = sum(1 for v in chosen if v <= pos + 4) & 1
            word.append(bits[pos] if parity == 0 else ("1" if bits[pos] == "0" else "0"))
        out.add("".join(word))
    return out


def branch_and_prune(
    inst: DmdgpInstance,
    internal: InternalCoords,
    tol: float = DEFAULT_PRUNE_TOL,
    mode: str = "all",
    penalty_tol: float = DEFAULT_PENALTY_TOL,
    branch_order: tuple[int, int] = (0, 1),
) -> SolutionSet:
    """Depth-first search of the sign tree.

    mode="first" stops at the first surviving leaf, mode="all" returns
    every one.  The result is sorted by bit word regardless of the
    branch order explored.
    """
    if mode not in ("first", "all"):
        raise ValueError(f"mode must be 'first' or 'all', got {mode!r}")
    if tol <= 0:
        raise ValueError("pruning tolerance must be positive")
    if sorted(branch_order) != [0, 1]:
        raise ValueError("branch_order must be a permutation of (0, 1)")
    n = inst.n
    prune_edges: dict[int, list[tuple[int, float]]] = {i: [] for i in range(4, n + 1)}
    for u, v, d in inst.long_range_edges():
        prune_edges[v].append((u, d))

    q3 = b_matrix(1, internal) @ b_matrix(2, internal) @ b_matrix(3, internal)
    points = np.zeros((n, 3))
    points[1] = b_matrix(2, internal)[:3, 3]
    points[2] = q3[:3, 3]

    found: list[Solution] = []
    word = [""] * (n - 3)

    def descend(level: int, q: np.ndarray) -> bool:
        """Returns True to stop the whole search (mode="first")."""
        if level > n:
            bits = "".join(word)
            conf = Conformation(points.copy())
            g = penalty(conf, inst)
            if g < penalty_tol:
                found.append(Solution(bits, conf, g))
                return mode == "first"
            return False
        for bit in branch_order:
            q_next = q @ b_matrix(level, internal, 1 if bit == 0 else -1)
            x = q_next[:3, 3]
            ok = True
            for j, d in prune_edges[level]:
                if abs(float(np.linalg.norm(x - points[j - 1])) - d) > tol:
                    ok = False
                    break
            if not ok:
                continue
            points[level - 1] = x
            word[level - 4] = str(bit)
            if descend(level + 1, q_next):
                return True
        return False

    descend(4, q3)
    if not found:
        raise NoSolutionError(
            "branch-and-prune found no solution (inconsistent instance or tol too tight)"
        )
    found.sort(key=lambda s: s.index)
    return SolutionSet(tuple(found))
