"""Combination enumeration, the exhaustive feasibility oracle and the relaxed LP.

A combination picks one candidate per region.  Combinations are numbered in
mixed radix with region 0 as the most significant digit, so index 0 is "first
candidate everywhere" and index ``c - 1`` is "last candidate everywhere".

The relaxed selection problem keeps the per-user SINR rows ``e^T S >= t`` and
replaces the one-hot constraint on ``e`` by ``0 <= e``, ``sum(e) <= 1``.  The
solver maximizes the worst user's SINR ``t`` over that polytope; the
threshold only decides whether the optimum is good enough.  Because the LP
has one row per user but one column per combination, it is solved by column
generation: a small restricted master LP plus a pricing scan ``S @ y`` over
all combinations with the master's user duals ``y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import EmptyGrid, IndexOutOfRange, Infeasible, NumericalFailure
from .geometry import AltitudeBand, CandidateGrid, Point3, RestrictedZone, position_ok

ORACLE_TOL = 1e-9
LP_TOL = 1e-7


@dataclass(frozen=True)
class CombinationSpace:
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))

    @classmethod
    def from_grids(cls, grids: Sequence[CandidateGrid]) -> "CombinationSpace":
        return cls(tuple(len(g) for g in grids))

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    def digits(self, a) -> np.ndarray:
        """Per-region candidate indices of combination(s) ``a``; shape ``(..., D)``."""
        return np.stack(np.unravel_index(np.asarray(a, dtype=np.int64), self.counts), axis=-1)

    def index(self, digits) -> int:
        return int(np.ravel_multi_index(tuple(np.asarray(digits, dtype=np.int64)), self.counts))


def enumerate_combinations(space: CombinationSpace) -> range:
    if any(n == 0 for n in space.counts):
        raise EmptyGrid(f"some region has no candidates: counts={space.counts}")
    return range(space.size)


def combination_to_positions(a: int, space: CombinationSpace, grids: Sequence[CandidateGrid]) -> list[Point3]:
    if not 0 <= a < space.size:
        raise IndexOutOfRange(f"combination {a} outside [0, {space.size})")
    return [grids[j][int(q)] for j, q in enumerate(space.digits(a))]


def location_matrix(space: CombinationSpace, grids: Sequence[CandidateGrid]) -> np.ndarray:
    """``L`` with one row per combination: the D positions concatenated, shape ``(c, 3 * D)``."""
    digits = space.digits(np.arange(space.size))
    return np.concatenate([grids[j].points[digits[:, j]] for j in range(len(grids))], axis=1)


def row_mins(S) -> np.ndarray:
    """Worst-user SINR per combination; ``S`` may be an array or an iterable of
    ``(first_row, block)`` pieces as produced by :func:`radio.iter_sinr_rows`."""
    if isinstance(S, np.ndarray):
        return S.min(axis=1)
    return np.concatenate([block.min(axis=1) for _, block in S])


def brute_force_feasible(S, gamma_th: float, tol: float = ORACLE_TOL) -> np.ndarray:
    """Sorted indices of every combination whose worst user reaches ``gamma_th`` (linear)."""
    return np.flatnonzero(row_mins(S) >= gamma_th - tol)


def max_min_combination(S) -> int:
    """Combination maximizing the worst user's SINR, lowest index on ties."""
    return int(np.argmax(row_mins(S)))


@dataclass
class SelectionVector:
    e: np.ndarray
    value: float  # worst-user SINR achieved by e^T S, linear
    iterations: int = 0

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.e > 0)


def _solve_master(S_sub: np.ndarray):
    m, U = S_sub.shape
    # variables: e_1..e_m, t ; maximize t
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    A = np.zeros((U + 1, m + 1))
    A[:U, :m] = -S_sub.T
    A[:U, m] = 1.0
    A[U, :m] = 1.0
    b = np.zeros(U + 1)
    b[U] = 1.0
    res = linprog(cost, A_ub=A, b_ub=b, bounds=(0, None), method="highs-ds")
    if res.status != 0:
        raise NumericalFailure(f"restricted master LP failed: {res.message}")
    y = -res.ineqlin.marginals[:U]
    mu = -res.ineqlin.marginals[U]
    return res.x[:m], res.x[m], y, mu


def solve_l1_relaxation(S: np.ndarray, gamma_th: float, tol: float = LP_TOL,
                        max_iter: int = 10_000, batch: int = 8) -> SelectionVector:
    """Relaxed selection: find ``e`` with ``0 <= e <= 1``, ``sum(e) <= 1`` and
    ``e^T S >= gamma_th`` for every user.

    Among all such ``e`` the one returned maximizes the worst user's SINR,
    which makes the answer deterministic.

    Raises
    ------
    Infeasible
        If no convex combination of rows reaches ``gamma_th`` for all users.
    NumericalFailure
        If the master LP fails or the returned point violates the constraints
        by more than ``tol``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] == 0:
        raise NumericalFailure(f"S must be a non-empty 2-D matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NumericalFailure("S contains non-finite entries")
    c, U = S.shape
    col_max = S.max(axis=0)
    if np.any(col_max < gamma_th - tol):
        k = int(np.argmin(col_max - gamma_th))
        raise Infeasible(f"user {k} never reaches the threshold (best {col_max[k]:.6g} < {gamma_th:.6g})")

    # warm start: the max-min row plus each user's best row
    active = list(dict.fromkeys([max_min_combination(S), *map(int, S.argmax(axis=0))]))
    in_active = np.zeros(c, dtype=bool)
    in_active[active] = True
    for it in range(1, max_iter + 1):
        e_sub, t, y, mu = _solve_master(S[active])
        score = S @ y
        score[in_active] = -np.inf
        improving = np.flatnonzero(score > mu * (1 + 1e-10) + 1e-13)
        if len(improving) == 0:
            break
        order = np.argsort(-score[improving], kind="stable")[:batch]
        new = improving[order]
        active.extend(int(a) for a in new)
        in_active[new] = True
    else:
        raise NumericalFailure(f"column generation did not converge in {max_iter} iterations")

    e = np.zeros(c)
    e[active] = np.clip(e_sub, 0.0, 1.0)
    achieved = e @ S
    if e.sum() > 1 + 1e-9 or np.any(achieved < t - tol):
        raise NumericalFailure("LP solution violates its own constraints beyond tolerance")
    value = float(achieved.min())
    if value < gamma_th - tol:
        raise Infeasible(f"best relaxed worst-user SINR {value:.6g} is below threshold {gamma_th:.6g}")
    return SelectionVector(e, value, it)


def round_selection(e) -> int:
    """Index of the largest weight in ``e``; lowest index on ties."""
    return int(np.argmax(np.asarray(e)))


@dataclass
class PlacementResult:
    method: str
    index: int
    positions: list
    sinr_db: np.ndarray
    threshold_db: float
    feasible: bool
    relaxation_gap: bool = False
    globally_infeasible: bool = False
    lp_index: Optional[int] = None
    feasible_count: Optional[int] = None
    e: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def min_sinr_db(self) -> float:
        return float(np.min(self.sinr_db))


def _to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def verify_placement(a: int, S: np.ndarray, gamma_th: float, space: CombinationSpace,
                     grids: Sequence[CandidateGrid], zone: RestrictedZone, band: AltitudeBand,
                     method: str = "verify", tol: float = ORACLE_TOL) -> PlacementResult:
    """Check combination ``a`` against the SINR threshold and every regulatory predicate."""
    positions = combination_to_positions(a, space, grids)
    row = np.asarray(S[a], dtype=float)
    ok = bool(row.min() >= gamma_th - tol) and all(position_ok(p, zone, band) for p in positions)
    return PlacementResult(method, int(a), positions, _to_db(row), float(_to_db(gamma_th)), ok)


def place(S: np.ndarray, gamma_th: float, space: CombinationSpace, grids: Sequence[CandidateGrid],
          zone: RestrictedZone, band: AltitudeBand, method: str = "lp") -> PlacementResult:
    """Select one combination and verify it.

    ``method="lp"`` solves the relaxed LP and rounds to the heaviest entry of
    ``e``.  If that combination fails the exhaustive check, the max-min
    combination is substituted and ``relaxation_gap`` is set.
    ``method="brute"`` returns the max-min combination directly.  Either way
    ``globally_infeasible`` is set when no combination meets the threshold,
    and the max-min combination is returned as a best effort.
    """
    if method not in ("lp", "brute"):
        raise ValueError(f"unknown method {method!r}")
    feasible_set = brute_force_feasible(S, gamma_th)
    best = max_min_combination(S)
    e = None
    lp_index = None
    gap = False
    if method == "lp":
        try:
            sel = solve_l1_relaxation(S, gamma_th)
        except Infeasible:
            chosen = best
        else:
            e = sel.e
            lp_index = round_selection(e)
            chosen = lp_index
            if not verify_placement(lp_index, S, gamma_th, space, grids, zone, band).feasible:
                gap = True
                chosen = best
    else:
        chosen = best
    res = verify_placement(chosen, S, gamma_th, space, grids, zone, band, method=method)
    res.relaxation_gap = gap
    res.globally_infeasible = len(feasible_set) == 0
    res.lp_index = lp_index
    res.feasible_count = int(len(feasible_set))
    res.e = e
    return res


def selection_tau(e, L: np.ndarray) -> np.ndarray:
    """``e^T L``; for a one-hot ``e`` this is the selected row of positions."""
    return np.asarray(e) @ L


def sinr_profile(e, S: np.ndarray) -> np.ndarray:
    """``e^T S``: per-user SINR delivered by selection vector ``e``."""
    return np.asarray(e) @ S
