"""Sum-product loopy belief propagation over the reviewer MRF.

Each reviewer is a binary variable over (benign, spammer) with a node
potential (1 - S, S) from its prior; each edge couples neighbors through
exp(+w) on agreeing labels and exp(-w) on disagreeing ones. Messages are
updated in asynchronous sweeps over nodes in ascending dense id, one
connected component at a time, in the linear domain with per-message
normalization. Isolated nodes skip inference and keep their potential as
belief. `exact_marginals` enumerates small components exactly for
verification.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ComponentTooLargeError, InferenceError
from .graph import ReviewerGraph

BENIGN_IDX = 0
SPAMMER_IDX = 1

EXACT_COMPONENT_LIMIT = 20


def edge_potential(x_i: int, x_j: int, w: float) -> float:
    """Coupling of labels x_i, x_j in {+1, -1} across an edge of weight w."""
    return math.exp(x_i * x_j * w)


def potentials_from_prior(prior_values) -> np.ndarray:
    """Node potential table (1 - S, S) per reviewer; rows sum to 1."""
    s = np.asarray(prior_values, dtype=np.float64)
    if ((s < 0) | (s > 1)).any():
        raise ValueError("prior values must lie in [0, 1]")
    return np.stack([1.0 - s, s], axis=1)


@dataclass
class ComponentStats:
    index: int
    nodes: int
    edges: int
    iterations: int
    converged: bool
    max_delta: float
    seconds: float


@dataclass
class LbpResult:
    """Beliefs plus per-component convergence bookkeeping.

    `beliefs[i]` = (b_benign, b_spammer), normalized; `participated[i]` is
    False for isolated nodes, whose belief is their node potential.
    `messages[s]` is the final message into the owner of adjacency slot s
    from its neighbor, normalized over labels.
    """

    beliefs: np.ndarray
    participated: np.ndarray
    components: list[ComponentStats]
    messages: np.ndarray = field(repr=False, default=None)

    @property
    def converged(self) -> bool:
        return all(c.converged for c in self.components)

    @property
    def spam_scores(self) -> np.ndarray:
        return self.beliefs[:, SPAMMER_IDX]


def connected_components(graph: ReviewerGraph) -> list[np.ndarray]:
    """Components as ascending node arrays, ordered by smallest member."""
    n = graph.node_count
    seen = np.zeros(n, dtype=bool)
    comps: list[np.ndarray] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        frontier = [start]
        members = [start]
        while frontier:
            nxt = []
            for u in frontier:
                for v in graph.neighbors[graph.indptr[u]:graph.indptr[u + 1]]:
                    v = int(v)
                    if not seen[v]:
                        seen[v] = True
                        members.append(v)
                        nxt.append(v)
            frontier = nxt
        members.sort()
        comps.append(np.array(members, dtype=np.int64))
    return comps


def _mirror_slots(graph: ReviewerGraph) -> np.ndarray:
    """mirror[s] = slot of the reverse directed edge of slot s."""
    owners = np.repeat(np.arange(graph.node_count, dtype=np.int64), np.diff(graph.indptr))
    q = np.lexsort((owners, graph.neighbors))
    mirror = np.empty(len(q), dtype=np.int64)
    mirror[q] = np.arange(len(q), dtype=np.int64)
    return mirror


def _validate_potentials(potentials: np.ndarray, n: int) -> np.ndarray:
    pot = np.asarray(potentials, dtype=np.float64)
    if pot.shape != (n, 2):
        raise ValueError(f"potentials must have shape ({n}, 2)")
    if ((pot < 0) | (pot > 1)).any() or not np.isfinite(pot).all():
        raise ValueError("potential entries must lie in [0, 1]")
    if np.abs(pot.sum(axis=1) - 1.0).max() > 1e-9:
        raise ValueError("potential rows must sum to 1")
    return pot


def lbp_run(
    graph: ReviewerGraph,
    potentials: np.ndarray,
    conv_tol: float = 1e-5,
    max_iters: int = 30,
    damping: float = 0.0,
) -> LbpResult:
    """Run sum-product belief propagation per connected component.

    Messages start at 1 and are swept in ascending node order until the max
    absolute message change over a full sweep drops below `conv_tol` or
    `max_iters` sweeps have run (the component is then flagged
    non-converged). `damping` blends each update with the previous message.
    """
    if conv_tol <= 0:
        raise ValueError("conv_tol must be positive")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not (0 <= damping < 1):
        raise ValueError("damping must lie in [0, 1)")

    n = graph.node_count
    pot = _validate_potentials(potentials, n)
    indptr, nbrs = graph.indptr, graph.neighbors
    mirror = _mirror_slots(graph)
    expw = np.exp(graph.weights)
    expnw = np.exp(-graph.weights)
    with np.errstate(divide="ignore"):
        logpot = np.log(pot)

    messages = np.ones((len(nbrs), 2), dtype=np.float64)
    beliefs = pot.copy()
    participated = np.zeros(n, dtype=bool)
    stats: list[ComponentStats] = []

    comp_id = 0
    for comp in connected_components(graph):
        if len(comp) == 1:
            continue  # isolated node: belief stays at its potential
        t0 = time.perf_counter()
        comp_edges = int(sum(indptr[i + 1] - indptr[i] for i in comp)) // 2
        iters = 0
        max_delta = math.inf
        converged = False
        while iters < max_iters:
            iters += 1
            max_delta = 0.0
            for i in comp:
                lo, hi = int(indptr[i]), int(indptr[i + 1])
                m = messages[lo:hi]
                logm = np.log(m)
                # leave-one-out products in log space; messages stay
                # bounded away from 0, so the subtraction is stable
                s_log = (logm.sum(axis=0) - logm) + logpot[i]
                s_log -= s_log.max(axis=1, keepdims=True)
                s = np.exp(s_log)
                up_b = s[:, 0] * expw[lo:hi] + s[:, 1] * expnw[lo:hi]
                up_s = s[:, 0] * expnw[lo:hi] + s[:, 1] * expw[lo:hi]
                z = up_b + up_s
                new = np.stack([up_b / z, up_s / z], axis=1)
                mir = mirror[lo:hi]
                old = messages[mir]
                if damping > 0.0:
                    new = (1.0 - damping) * new + damping * old
                if not np.isfinite(new).all() or (new <= 0).any():
                    raise InferenceError(f"messages degenerated in component {comp_id}")
                delta = np.abs(new - old).max()
                if delta > max_delta:
                    max_delta = float(delta)
                messages[mir] = new
            if max_delta < conv_tol:
                converged = True
                break
        for i in comp:
            lo, hi = int(indptr[i]), int(indptr[i + 1])
            b_log = np.log(messages[lo:hi]).sum(axis=0) + logpot[i]
            b_log -= b_log.max()
            b = np.exp(b_log)
            total = b.sum()
            if not np.isfinite(total) or total <= 0:
                raise InferenceError(f"beliefs degenerated in component {comp_id}")
            beliefs[i] = b / total
            participated[i] = True
        stats.append(ComponentStats(
            index=comp_id,
            nodes=len(comp),
            edges=comp_edges,
            iterations=iters,
            converged=converged,
            max_delta=max_delta,
            seconds=time.perf_counter() - t0,
        ))
        comp_id += 1

    return LbpResult(beliefs=beliefs, participated=participated, components=stats, messages=messages)


def exact_marginals(
    graph: ReviewerGraph,
    potentials: np.ndarray,
    max_component: int = EXACT_COMPONENT_LIMIT,
) -> np.ndarray:
    """Exact per-node marginals by enumerating every label configuration.

    Refuses components larger than `max_component` nodes (2^n enumeration).
    """
    n = graph.node_count
    pot = _validate_potentials(potentials, n)
    with np.errstate(divide="ignore"):
        logpot = np.log(pot)
    out = pot.copy()

    for comp in connected_components(graph):
        size = len(comp)
        if size > max_component:
            raise ComponentTooLargeError(
                f"component of {size} nodes exceeds the exact-enumeration limit {max_component}"
            )
        if size == 1:
            continue  # factorized: marginal equals the potential
        pos = {int(node): k for k, node in enumerate(comp)}
        edges = [
            (pos[i], pos[j], w)
            for i, j, w in _component_edges(graph, comp)
        ]
        states = (np.arange(1 << size)[:, None] >> np.arange(size)) & 1  # 0 benign, 1 spammer
        signs = 1 - 2 * states
        logw = logpot[comp, :][np.arange(size), states].sum(axis=1).astype(np.float64)
        for a, b, w in edges:
            logw = logw + w * signs[:, a] * signs[:, b]
        logw -= logw.max()
        p = np.exp(logw)
        z = p.sum()
        for k, node in enumerate(comp):
            spam_mass = p[states[:, k] == 1].sum()
            out[node] = ((z - spam_mass) / z, spam_mass / z)
    return out


def _component_edges(graph: ReviewerGraph, comp: np.ndarray):
    for i in comp:
        i = int(i)
        nbrs, w = graph.row(i)
        for t in range(len(nbrs)):
            j = int(nbrs[t])
            if j > i:
                yield i, j, float(w[t])
