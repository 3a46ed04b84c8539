"""Maximal clique detection from conflicting knapsack constraints.

The serial routine works on one coefficient-sorted knapsack; the parallel
driver shuffle-partitions the knapsack list over k workers. Cliques other
than the first (original) one are kept in a compact suffix form because
materializing all of them can take quadratic memory.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field

from .literals import VarMap
from .parallel import map_blocks, shuffle_partition
from .presolve import TOL, PureBinaryConstraint

SRC_OSP = "osp"
SRC_ISP = "isp"
SRC_KNAPSACK_ORG = "knapsack_org"
SRC_KNAPSACK_OTHER = "knapsack_other"
SRC_TRIVIAL = "trivial_pair"


@dataclass(frozen=True, order=True)
class Clique:
    """Sorted conflict-graph node indices asserting pairwise conflict."""

    nodes: tuple[int, ...]
    source: str = ""

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass
class OtherCliqueBlock:
    """Compact storage for the non-original cliques of one knapsack.

    `nodes` is the knapsack's literal list in coefficient order; each entry
    (i, sigma) denotes the clique {nodes[i]} | {nodes[sigma:]}.
    """

    nodes: tuple[int, ...]
    entries: list[tuple[int, int]]

    def materialize(self):
        for i, sigma in self.entries:
            members = (self.nodes[i],) + self.nodes[sigma:]
            yield Clique(tuple(sorted(members)), source=SRC_KNAPSACK_OTHER)

    def count(self) -> int:
        return len(self.entries)


@dataclass
class CliqueHarvest:
    c_org: list[Clique]
    c_other_blocks: list[OtherCliqueBlock]

    def materialize_others(self) -> list[Clique]:
        out = []
        for block in self.c_other_blocks:
            out.extend(block.materialize())
        return out


def _detect_indices(coeffs, rhs: float):
    """Core search on sorted coefficients.

    Returns (phi, [(i, sigma), ...]) with 0-based indices, or (None, [])
    when the two largest coefficients do not conflict.
    """
    n = len(coeffs)
    if any(coeffs[t] > coeffs[t + 1] for t in range(n - 1)):
        raise ValueError("knapsack coefficients must be sorted non-decreasing")
    if n < 2 or coeffs[-2] + coeffs[-1] <= rhs + TOL:
        return None, []
    # smallest phi with a[phi] + a[phi+1] > rhs; the sum is monotone in phi
    lo, hi = 0, n - 2
    while lo < hi:
        mid = (lo + hi) // 2
        if coeffs[mid] + coeffs[mid + 1] > rhs + TOL:
            hi = mid
        else:
            lo = mid + 1
    phi = lo
    entries = []
    for i in range(phi - 1, -1, -1):
        sigma = bisect_right(coeffs, rhs + TOL - coeffs[i])
        if sigma <= i:
            sigma = i + 1
        if sigma >= n or coeffs[i] + coeffs[sigma] <= rhs + TOL:
            break
        entries.append((i, sigma))
    return phi, entries


def _pbc_nodes(pbc: PureBinaryConstraint, varmap: VarMap):
    nodes = tuple(varmap.node(lit) for lit, _ in pbc.terms)
    coeffs = tuple(a for _, a in pbc.terms)
    return nodes, coeffs


def detect_cliques(pbc: PureBinaryConstraint, varmap: VarMap):
    """Cliques of one conflicting knapsack: (original clique or None,
    list of other maximal cliques)."""
    nodes, coeffs = _pbc_nodes(pbc, varmap)
    phi, entries = _detect_indices(coeffs, pbc.rhs)
    if phi is None:
        return None, []
    org = Clique(tuple(sorted(nodes[phi:])), source=SRC_KNAPSACK_ORG)
    block = OtherCliqueBlock(nodes=nodes, entries=entries)
    return org, list(block.materialize())


def _detect_block(args):
    knapsacks = args
    out = []
    for nodes, coeffs, rhs in knapsacks:
        phi, entries = _detect_indices(coeffs, rhs)
        out.append((nodes, phi, entries))
    return out


def detect_cliques_parallel(
    s_ck: list[PureBinaryConstraint],
    varmap: VarMap,
    k: int,
    seed: int,
    mode: str = "thread",
) -> CliqueHarvest:
    """Shuffle-partition the knapsack list and run detection per block.

    The resulting clique set is identical for every k and seed; only the
    order of the harvest lists follows the shuffle.
    """
    flat = [(*_pbc_nodes(p, varmap), p.rhs) for p in s_ck]
    part = shuffle_partition(len(flat), k, seed)
    blocks = [[flat[i] for i in idx] for idx in part.blocks]
    results = map_blocks(_detect_block, blocks, k, mode=mode)
    harvest = CliqueHarvest(c_org=[], c_other_blocks=[])
    for block_result in results:
        for nodes, phi, entries in block_result:
            if phi is None:
                continue
            harvest.c_org.append(
                Clique(tuple(sorted(nodes[phi:])), source=SRC_KNAPSACK_ORG)
            )
            if entries:
                harvest.c_other_blocks.append(
                    OtherCliqueBlock(nodes=nodes, entries=entries)
                )
    return harvest
