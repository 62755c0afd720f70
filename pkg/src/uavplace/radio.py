"""Beamforming, power allocation and SINR evaluation.

SINR arithmetic is linear and powers are in milliwatts; decibels only appear
at the conversion helpers.  Every UAV serves its own users with maximum-ratio
transmission, so a beam depends only on its UAV's position.  That is what
lets the interference sums factor into per-candidate :class:`GainTables`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .channel import ArrayConfig, LinkParams, los_channel, los_channels
from .errors import ValidationError, ZeroChannel
from .geometry import CandidateGrid
from .selection import CombinationSpace


def db_to_linear(x):
    return (10.0 ** (np.asarray(x, dtype=float) / 10.0))[()]


def linear_to_db(x):
    return (10.0 * np.log10(np.asarray(x, dtype=float)))[()]


dbm_to_mw = db_to_linear
mw_to_dbm = linear_to_db


def mrt_beamformer(h: np.ndarray) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    nrm = np.linalg.norm(h)
    if nrm == 0:
        raise ZeroChannel("cannot steer a beam along a zero channel")
    return h / nrm


@dataclass(frozen=True)
class PowerAllocation:
    per_user: np.ndarray  # mW
    budget: float  # mW, per UAV


def equal_power(p_total: float, n_users: int) -> PowerAllocation:
    if n_users < 1:
        raise ValidationError("users_per_region", "must be >= 1")
    return PowerAllocation(np.full(n_users, p_total / n_users), p_total)


@dataclass
class Network:
    """Everything about the users and the radio link that stays fixed while
    UAV positions vary.

    ``serving[k]`` is the region (equivalently, UAV) index that serves
    global user ``k``; ``powers[k]`` is the transmit power spent on it.
    """

    users: np.ndarray
    serving: np.ndarray
    alphas: np.ndarray
    powers: np.ndarray
    n0_mw: float
    params: LinkParams
    cfg: ArrayConfig

    def __post_init__(self):
        self.users = np.asarray(self.users, dtype=float).reshape(-1, 3)
        self.serving = np.asarray(self.serving, dtype=np.int64)
        self.alphas = np.asarray(self.alphas, dtype=complex)
        self.powers = np.asarray(self.powers, dtype=float)
        if not self.n0_mw > 0:
            raise ValidationError("n0_dbm", "noise power must be > 0 mW")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_uavs(self) -> int:
        return int(self.serving.max()) + 1

    def served_by(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serving == j)


def sinr_direct(positions: Sequence[Sequence[float]], k: int, net: Network) -> float:
    """SINR of global user ``k`` with UAV ``l`` hovering at ``positions[l]``.

    Evaluated link by link from fresh channel vectors; this is the reference
    the table-based assembly is checked against.
    """
    j = int(net.serving[k])
    user_k = net.users[k]
    signal = 0.0
    interference = 0.0
    for l, pos in enumerate(positions):
        h_lk = los_channel(pos, user_k, net.alphas[k], net.params, net.cfg)
        for i in net.served_by(l):
            w = mrt_beamformer(los_channel(pos, net.users[i], net.alphas[i], net.params, net.cfg))
            g = net.powers[i] * abs(np.vdot(h_lk, w)) ** 2
            if l == j and i == k:
                signal = g
            else:
                interference += g
    return signal / (net.n0_mw + interference)


@dataclass(frozen=True)
class GainTables:
    """Per-candidate link gains, one ``(n_candidates, n_users)`` array per region.

    ``signal[j][q, k]`` is the raw beamforming gain ``|h^H w_k|^2`` of user
    ``k`` from UAV ``j`` at candidate ``q`` (zero when ``k`` is not served by
    ``j``).  ``intra`` and ``inter`` already carry the interferers' transmit
    powers, in mW: ``intra`` sums over the co-served users ``i != k`` and
    ``inter`` over every user of UAV ``j``, as received by ``k``.  So

        sinr = p_k * signal / (N0 + intra[j] + sum_{l != j} inter[l])
    """

    signal: tuple
    intra: tuple
    inter: tuple

    @property
    def counts(self) -> tuple:
        return tuple(len(s) for s in self.signal)


def precompute_gain_tables(grids: Sequence[CandidateGrid], net: Network) -> GainTables:
    signal, intra, inter = [], [], []
    for j, grid in enumerate(grids):
        own = net.served_by(j)
        H = los_channels(grid.points, net.users, net.alphas, net.params, net.cfg)
        norms = np.linalg.norm(H[:, own, :], axis=-1, keepdims=True)
        if np.any(norms == 0):
            raise ZeroChannel(f"region {j}: zero channel toward a served user")
        W = H[:, own, :] / norms
        # G[q, k, i] = |h_{q,k}^H w_{q,i}|^2
        G = np.abs(np.einsum("qkn,qin->qki", H.conj(), W)) ** 2
        p = net.powers[own]
        n_cand = len(grid)
        sig = np.zeros((n_cand, net.n_users))
        itr = np.zeros((n_cand, net.n_users))
        for pos, k in enumerate(own):
            sig[:, k] = G[:, k, pos]
            others = np.arange(len(own)) != pos
            itr[:, k] = G[:, k, others] @ p[others]
        signal.append(sig)
        intra.append(itr)
        inter.append(G @ p)
    return GainTables(tuple(signal), tuple(intra), tuple(inter))


def iter_sinr_rows(space: CombinationSpace, tables: GainTables, net: Network,
                   chunk: int = 65536) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(first_row, block)`` pieces of the SINR matrix in row order."""
    if tuple(space.counts) != tables.counts:
        raise ValidationError("tables", f"table counts {tables.counts} do not match space {space.counts}")
    D = len(space.counts)
    groups = [net.served_by(j) for j in range(D)]
    for start in range(0, space.size, chunk):
        stop = min(start + chunk, space.size)
        digits = space.digits(np.arange(start, stop))
        block = np.empty((stop - start, net.n_users))
        for j, own in enumerate(groups):
            qj = digits[:, j]
            sig = tables.signal[j][qj][:, own]
            noise = net.n0_mw + tables.intra[j][qj][:, own]
            for l in range(D):
                if l != j:
                    noise = noise + tables.inter[l][digits[:, l]][:, own]
            block[:, own] = net.powers[own] * sig / noise
        yield start, block


def build_sinr_matrix(space: CombinationSpace, tables: GainTables, net: Network) -> np.ndarray:
    """Materialize S: one row per combination, one column per global user."""
    S = np.empty((space.size, net.n_users))
    for start, block in iter_sinr_rows(space, tables, net):
        S[start:start + len(block)] = block
    return S


def write_matrix_csv(path, M: np.ndarray, **header) -> None:
    """Dump a 2-D array row-major with a ``#`` header recording its shape and any extra fields."""
    M = np.asarray(M)
    meta = {"rows": M.shape[0], "cols": M.shape[1], **header}
    lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]
    lines += [",".join(repr(float(v)) for v in row) for row in M]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_gain_tables(path, tables: GainTables, **header) -> None:
    """Dump all three tables as long-format CSV: table,region,candidate,user,value."""
    rows = []
    for name in ("signal", "intra", "inter"):
        for j, arr in enumerate(getattr(tables, name)):
            for q in range(arr.shape[0]):
                for k in range(arr.shape[1]):
                    rows.append(f"{name},{j},{q},{k},{float(arr[q, k])!r}")
    meta = {"regions": len(tables.signal), "counts": "x".join(map(str, tables.counts)), **header}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        fh.write("table,region,candidate,user,value\n")
        fh.write("\n".join(rows) + "\n")
