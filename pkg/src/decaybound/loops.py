"""Continuous-time random loop model.

Each edge carries a Poisson process on ``[0, beta)`` of rate one whose
events are crosses (probability ``u``) or double bars (``1 - u``). A
traveller moves along the time axis of a site (periodic in ``beta``) and
jumps across an edge at every event it meets: after a cross it keeps its
time direction, after a double bar it reverses. Closed trajectories are
the loops; the equilibrium measure reweights the Poisson measure by
``theta ** (number of loops)``.

Sites with ``m`` events are split into ``m`` vertical segments; segment
``i`` of a site runs upward from its ``i``-th event to its ``(i+1)``-th
(cyclically). A site without events is a single closed segment.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import InputError
from .lattice import Graph

CROSS = "cross"
DOUBLE_BAR = "double_bar"
KINDS = (CROSS, DOUBLE_BAR)


@dataclass(frozen=True)
class LoopConfig:
    """Immutable event configuration: ``events[k]`` lists ``(time, kind)`` on edge ``k``."""

    beta: float
    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    events: tuple[tuple[tuple[float, str], ...], ...]

    def __post_init__(self):
        if not self.beta > 0:
            raise InputError(f"beta must be positive, got {self.beta}")
        if len(self.events) != len(self.edges):
            raise InputError("one event list per edge is required")
        per_site: dict[int, list[float]] = {}
        for (a, b), evs in zip(self.edges, self.events):
            last = -math.inf
            for t, kind in evs:
                if kind not in KINDS:
                    raise InputError(f"unknown event kind {kind!r} on edge {(a, b)}")
                if not 0 <= t < self.beta:
                    raise InputError(f"event time {t} on edge {(a, b)} outside [0, {self.beta})")
                if not t > last:
                    raise InputError(f"event times on edge {(a, b)} are not strictly increasing")
                last = t
                per_site.setdefault(a, []).append(t)
                per_site.setdefault(b, []).append(t)
        for v, times in per_site.items():
            if len(set(times)) != len(times):
                raise InputError(f"two events touch site {v} at the same time")

    @classmethod
    def empty(cls, g: Graph, beta: float) -> "LoopConfig":
        return cls(float(beta), g.n_vertices, g.edges, tuple(() for _ in g.edges))

    @classmethod
    def from_events(cls, g: Graph, beta: float, events: dict) -> "LoopConfig":
        """Build from ``{edge: [(time, kind), ...]}``; missing edges are empty."""
        index = {e: k for k, e in enumerate(g.edges)}
        lists = [[] for _ in g.edges]
        for edge, evs in events.items():
            key = tuple(sorted(edge))
            if key not in index:
                raise InputError(f"{edge} is not an edge of the graph")
            lists[index[key]] = sorted((float(t), k) for t, k in evs)
        return cls(float(beta), g.n_vertices, g.edges, tuple(tuple(lst) for lst in lists))

    @property
    def n_events(self) -> int:
        return sum(len(evs) for evs in self.events)

    def counts(self) -> np.ndarray:
        return np.array([len(evs) for evs in self.events])

    def dumps(self) -> str:
        """Edge-sorted text dump; floats are written with ``repr`` so it round-trips."""
        lines = [f"beta {self.beta!r}", f"n {self.n_vertices}"]
        for (a, b), evs in zip(self.edges, self.events):
            if not evs:
                lines.append(f"edge {a} {b}")
            for t, kind in evs:
                lines.append(f"{a} {b} {t!r} {kind}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str, g: Graph) -> "LoopConfig":
        beta = None
        events: dict = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            try:
                if parts[0] == "beta":
                    beta = float(parts[1])
                elif parts[0] == "n":
                    if int(parts[1]) != g.n_vertices:
                        raise InputError(f"line {lineno}: vertex count does not match the graph")
                elif parts[0] == "edge":
                    events.setdefault((int(parts[1]), int(parts[2])), [])
                else:
                    a, b, t, kind = int(parts[0]), int(parts[1]), float(parts[2]), parts[3]
                    events.setdefault((a, b), []).append((t, kind))
            except (IndexError, ValueError):
                raise InputError(f"line {lineno}: malformed entry {line!r}") from None
        if beta is None:
            raise InputError("configuration dump lacks a 'beta' line")
        return cls.from_events(g, beta, events)


@dataclass(frozen=True)
class Segment:
    site: int
    start: float
    length: float
    direction: int  # +1 traversed upward in time, -1 downward


@dataclass(frozen=True)
class LoopPartition:
    beta: float
    loops: tuple[tuple[Segment, ...], ...]
    _site_times: tuple = field(repr=False, default=())
    _labels: tuple = field(repr=False, default=())

    @property
    def count(self) -> int:
        return len(self.loops)

    def total_length(self) -> float:
        return sum(seg.length for loop in self.loops for seg in loop)

    def label(self, site: int, time: float = 0.0) -> int:
        """Index of the loop passing through ``(site, time)``."""
        times = self._site_times[site]
        if not times:
            return self._labels[site][0]
        if time in times:
            raise InputError(f"time {time} coincides with an event at site {site}")
        i = bisect_right(times, time) - 1  # -1 -> last segment, which wraps through 0
        return self._labels[site][i % len(times)]

    def connected(self, x: int, y: int, time: float = 0.0) -> bool:
        return self.label(x, time) == self.label(y, time)


class _SiteIndex:
    """Per-site sorted event times with event ids; shared by tracing and the chain."""

    def __init__(self, n_vertices):
        self.times = [[] for _ in range(n_vertices)]
        self.ids = [[] for _ in range(n_vertices)]

    def add(self, site, t, eid):
        times = self.times[site]
        i = bisect_left(times, t)
        times.insert(i, t)
        self.ids[site].insert(i, eid)

    def remove(self, site, t):
        times = self.times[site]
        i = bisect_left(times, t)
        del times[i]
        del self.ids[site][i]


def _index_config(config: LoopConfig):
    index = _SiteIndex(config.n_vertices)
    info = []
    for k, ((a, b), evs) in enumerate(zip(config.edges, config.events)):
        for t, kind in evs:
            eid = len(info)
            info.append((a, b, t, kind == CROSS))
            index.add(a, t, eid)
            index.add(b, t, eid)
    return index, info


def trace_loops(config: LoopConfig) -> LoopPartition:
    """Deterministic decomposition of a configuration into loops.

    Loops are discovered in order of their lowest (site, segment) and each
    is recorded as the cyclic sequence of vertical segments it traverses.
    """
    index, info = _index_config(config)
    beta = config.beta
    n = config.n_vertices
    labels = [[-1] * max(1, len(index.times[v])) for v in range(n)]
    loops = []
    for v0 in range(n):
        for i0 in range(len(labels[v0])):
            if labels[v0][i0] >= 0:
                continue
            loop_id = len(loops)
            segs = []
            v, i, up = v0, i0, True
            while True:
                times = index.times[v]
                m = len(times)
                labels[v][i] = loop_id
                if m == 0:
                    segs.append(Segment(v, 0.0, beta, 1))
                    break
                start = times[i]
                length = (times[(i + 1) % m] - start) % beta or beta
                segs.append(Segment(v, start, length, 1 if up else -1))
                # event at the end of the traversal
                j = (i + 1) % m if up else i
                eid = index.ids[v][j]
                a, b, t, cross = info[eid]
                w = b if v == a else a
                k = index.ids[w].index(eid)
                up = up if cross else not up
                i = k if up else (k - 1) % len(index.times[w])
                v = w
                if (v, i) == (v0, i0):
                    break
            loops.append(tuple(segs))
    return LoopPartition(
        beta,
        tuple(loops),
        tuple(tuple(t) for t in index.times),
        tuple(tuple(lbl) for lbl in labels),
    )


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))
        self.components = n

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry
            self.components -= 1


def _segment_union(n_vertices, site_times, site_ids, info):
    """Union-find over vertical segments; returns (uf, offsets)."""
    offsets = [0] * (n_vertices + 1)
    for v in range(n_vertices):
        offsets[v + 1] = offsets[v] + max(1, len(site_times[v]))
    uf = _UnionFind(offsets[-1])
    pos = {}
    for v in range(n_vertices):
        for j, eid in enumerate(site_ids[v]):
            pos[(eid, v)] = j
    for eid, (a, b, t, cross) in enumerate(info):
        if a < 0:
            continue
        ja, jb = pos[(eid, a)], pos[(eid, b)]
        ma, mb = len(site_times[a]), len(site_times[b])
        a_below, a_above = offsets[a] + (ja - 1) % ma, offsets[a] + ja
        b_below, b_above = offsets[b] + (jb - 1) % mb, offsets[b] + jb
        if cross:
            uf.union(a_below, b_above)
            uf.union(a_above, b_below)
        else:
            uf.union(a_below, b_below)
            uf.union(a_above, b_above)
    return uf, offsets


def count_loops(config: LoopConfig) -> int:
    """Number of loops via union-find over segments (independent of :func:`trace_loops`)."""
    index, info = _index_config(config)
    uf, _ = _segment_union(config.n_vertices, index.times, index.ids, info)
    return uf.components


def loop_weight(partition: LoopPartition | int, theta: float) -> float:
    if not theta > 0:
        raise InputError(f"theta must be positive, got {theta}")
    count = partition if isinstance(partition, int) else partition.count
    return float(theta) ** count


def _make_rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def direct_sample(g: Graph, beta: float, u: float, rng_seed=None) -> LoopConfig:
    """Sample from the Poisson measure: ``Poisson(beta)`` events per edge, uniform times."""
    if not 0 <= u <= 1:
        raise InputError(f"u must lie in [0, 1], got {u}")
    rng = _make_rng(rng_seed)
    events = []
    for _ in g.edges:
        n = rng.poisson(beta)
        times = np.sort(rng.random(n) * beta)
        kinds = rng.random(n) < u
        events.append(tuple((float(t), CROSS if k else DOUBLE_BAR) for t, k in zip(times, kinds)))
    return LoopConfig(float(beta), g.n_vertices, g.edges, tuple(events))


def spin_correlation_from_loops(P: float, theta: int) -> float:
    """``<S3_x S3_y> = (theta^2 - 1) / 12 * P(x <-> y)`` for integer ``theta >= 2``."""
    if theta != int(theta) or theta < 2:
        raise InputError(f"theta must be an integer >= 2, got {theta}")
    return (theta * theta - 1) / 12 * P


# ----------------------------------------------------------------- MCMC


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_samples: int
    tau_int: float = 0.5
    flags: tuple[str, ...] = ()

    def within(self, value: float, n_sigma: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_sigma * self.std_error


def batch_means(samples, n_batches: int = 50) -> McEstimate:
    """Mean with batch-means error bar and integrated autocorrelation time."""
    x = np.asarray(samples, dtype=float)
    n = len(x)
    if n == 0:
        raise InputError("no samples")
    mean = float(x.mean())
    nb = max(1, min(n_batches, n // 2 or 1))
    size = n // nb
    if nb < 2 or size < 1:
        return McEstimate(mean, float("nan"), n, float("nan"), ("too few samples for an error bar",))
    means = x[: nb * size].reshape(nb, size).mean(axis=1)
    var_batch = float(means.var(ddof=1))
    err = math.sqrt(var_batch / nb)
    var = float(x.var(ddof=1)) if n > 1 else 0.0
    tau = 0.5 * size * var_batch / var if var > 0 else 0.5
    flags = ()
    if tau > size / 5:
        flags = (f"integrated autocorrelation time {tau:.3g} is large compared to batch size {size}",)
    return McEstimate(mean, err, n, tau, flags)


class LoopChain:
    """Birth-death Metropolis chain targeting ``theta^{#loops} rho(d omega)``.

    One step picks an edge uniformly. With probability 1/2 it proposes a new
    event at a uniform time (a cross with probability ``u``), accepted with
    ``min(1, theta^dL beta / (n_e + 1))``; otherwise it proposes deleting a
    uniformly chosen event of that edge, accepted with
    ``min(1, theta^dL n_e / beta)``. The loop-count change ``dL`` comes from
    following a single loop, not from a global retrace.
    """

    def __init__(self, g: Graph, beta: float, theta: float, u: float, seed=None,
                 init: LoopConfig | str | None = "poisson", check: bool = False):
        if not theta > 0:
            raise InputError(f"theta must be positive, got {theta}")
        if not 0 <= u <= 1:
            raise InputError(f"u must lie in [0, 1], got {u}")
        if not beta > 0:
            raise InputError(f"beta must be positive, got {beta}")
        if g.n_edges == 0:
            raise InputError("the loop chain needs at least one edge")
        self.graph = g
        self.beta = float(beta)
        self.theta = float(theta)
        self.u = float(u)
        self.rng = _make_rng(seed)
        self.check = check
        self.edges = g.edges
        self.index = _SiteIndex(g.n_vertices)
        self.info: list = []  # eid -> (a, b, t, cross); a == -1 marks a free slot
        self.free: list[int] = []
        self.edge_events: list[list[int]] = [[] for _ in g.edges]
        self.n_steps = 0
        self.n_accepted = 0
        if isinstance(init, LoopConfig):
            config = init
        elif init == "poisson":
            config = direct_sample(g, beta, u, self.rng)
        elif init in (None, "empty"):
            config = LoopConfig.empty(g, beta)
        else:
            raise InputError(f"unknown initial state {init!r}")
        if config.edges != g.edges or config.beta != self.beta:
            raise InputError("initial configuration does not match graph and beta")
        for k, evs in enumerate(config.events):
            for t, kind in evs:
                self._insert(k, t, kind == CROSS)
        self.n_loops = self.full_count()

    # -- state bookkeeping
    def _insert(self, k, t, cross):
        a, b = self.edges[k]
        rec = (a, b, t, cross)
        if self.free:
            eid = self.free.pop()
            self.info[eid] = rec
        else:
            eid = len(self.info)
            self.info.append(rec)
        self.index.add(a, t, eid)
        self.index.add(b, t, eid)
        self.edge_events[k].append(eid)
        return eid

    def _remove(self, k, slot):
        lst = self.edge_events[k]
        eid = lst[slot]
        lst[slot] = lst[-1]
        lst.pop()
        a, b, t, cross = self.info[eid]
        self.index.remove(a, t)
        self.index.remove(b, t)
        self.info[eid] = (-1, -1, 0.0, False)
        self.free.append(eid)
        return a, b, t, cross

    def config(self) -> LoopConfig:
        events = []
        for k in range(len(self.edges)):
            evs = sorted((self.info[eid][2], CROSS if self.info[eid][3] else DOUBLE_BAR)
                         for eid in self.edge_events[k])
            events.append(tuple(evs))
        return LoopConfig(self.beta, self.graph.n_vertices, self.edges, tuple(events))

    def counts(self) -> np.ndarray:
        return np.array([len(lst) for lst in self.edge_events])

    def full_count(self) -> int:
        uf, _ = _segment_union(self.graph.n_vertices, self.index.times, self.index.ids, self.info)
        return uf.components

    # -- single-loop tracing
    def _follow(self, x, t, y):
        """Walk the loop through ``(x, t)`` upward until it meets ``(y, t)`` or closes.

        Returns ``None`` if the loop closes first, else the time direction
        (+1 / -1) in which it passes ``(y, t)``.
        """
        times_by_site = self.index.times
        ids_by_site = self.index.ids
        info = self.info
        if not times_by_site[x]:
            return None
        v, tau, up = x, t, True
        while True:
            times = times_by_site[v]
            m = len(times)
            if up:
                j = bisect_right(times, tau)
                if j == m:
                    j = 0
                nxt = times[j]
                inside = (tau < t < nxt) if nxt > tau else (t > tau or t < nxt)
            else:
                j = bisect_left(times, tau) - 1
                nxt = times[j]
                inside = (nxt < t < tau) if nxt < tau else (t < tau or t > nxt)
            if inside:
                if v == y:
                    return 1 if up else -1
                if v == x:
                    return None
            a, b, _, cross = info[ids_by_site[v][j]]
            v = b if v == a else a
            tau = nxt
            if not cross:
                up = not up

    def delta_insert(self, a, b, t, cross) -> int:
        """Change in loop count if an event at time ``t`` were added on edge ``{a, b}``."""
        direction = self._follow(a, t, b)
        if direction is None:
            return -1
        if cross:
            return 1 if direction == 1 else 0
        return 0 if direction == 1 else 1

    def _coincides(self, a, b, t):
        for v in (a, b):
            times = self.index.times[v]
            i = bisect_left(times, t)
            if i < len(times) and times[i] == t:
                return True
        return False

    # -- dynamics
    def step(self, r_edge=None, r_move=None, r_time=None, r_kind=None, r_acc=None) -> bool:
        rng = self.rng
        if r_edge is None:
            r_edge, r_move, r_time, r_kind, r_acc = rng.random(5)
        self.n_steps += 1
        k = min(int(r_edge * len(self.edges)), len(self.edges) - 1)
        lst = self.edge_events[k]
        n_e = len(lst)
        if r_move < 0.5:
            a, b = self.edges[k]
            t = r_time * self.beta
            if t == 0.0 or self._coincides(a, b, t):
                return False
            cross = r_kind < self.u
            dL = self.delta_insert(a, b, t, cross)
            ratio = self.theta**dL * self.beta / (n_e + 1)
            if r_acc < ratio:
                self._insert(k, t, cross)
                self._accepted(dL)
                return True
            return False
        if n_e == 0:
            return False
        slot = min(int(r_time * n_e), n_e - 1)
        a, b, t, cross = self._remove(k, slot)
        dL = -self.delta_insert(a, b, t, cross)
        ratio = self.theta**dL * n_e / self.beta
        if r_acc < ratio:
            self._accepted(dL)
            return True
        # restore; the removed id went to the back of the free list
        self._insert(k, t, cross)
        lst = self.edge_events[k]
        lst[slot], lst[-1] = lst[-1], lst[slot]
        return False

    def _accepted(self, dL):
        self.n_accepted += 1
        self.n_loops += dL
        if self.check:
            actual = self.full_count()
            if actual != self.n_loops:
                raise AssertionError(f"incremental loop count {self.n_loops} != retrace {actual}")

    @property
    def steps_per_sweep(self) -> int:
        return 2 * max(len(self.edges), math.ceil(len(self.edges) * self.beta))

    def sweep(self, n: int = 1):
        per = self.steps_per_sweep
        for _ in range(n):
            draws = self.rng.random((per, 5)).tolist()
            for r in draws:
                self.step(*r)

    def labels_at(self, time: float = 0.0) -> list[int]:
        """Loop label (union-find root) of every site at the given time."""
        uf, offsets = _segment_union(self.graph.n_vertices, self.index.times, self.index.ids, self.info)
        out = []
        for v in range(self.graph.n_vertices):
            times = self.index.times[v]
            if not times:
                out.append(uf.find(offsets[v]))
                continue
            i = (bisect_right(times, time) - 1) % len(times)
            out.append(uf.find(offsets[v] + i))
        return out

    def connected(self, x: int, y: int, time: float = 0.0) -> bool:
        if x == y:
            return True
        if self._coincides(x, x, time) or self._coincides(y, y, time):
            raise InputError("measurement time coincides with an event")
        return self._follow(x, time, y) is not None


def mcmc_step(state: LoopChain, theta: float | None = None, u: float | None = None, rng=None) -> LoopChain:
    """Functional form of :meth:`LoopChain.step`; ``theta``/``u`` must match the chain if given."""
    if theta is not None and float(theta) != state.theta:
        raise InputError("theta differs from the chain's target")
    if u is not None and float(u) != state.u:
        raise InputError("u differs from the chain's proposal")
    if rng is not None:
        state.step(*_make_rng(rng).random(5))
    else:
        state.step()
    return state


@dataclass
class ChainRun:
    """Per-sweep measurements of one chain: pair indicators, edge counts, loop counts."""

    pairs: list
    indicators: np.ndarray
    edge_counts: np.ndarray
    n_loops: np.ndarray
    chain: LoopChain


def run_chain(g: Graph, pairs, theta, u, beta, n_sweeps: int, seed=0, burn_in: float = 0.1,
              random_time: bool = False, check: bool = False) -> ChainRun:
    """Burn in for ``burn_in * n_sweeps`` sweeps, then measure after each of ``n_sweeps`` sweeps."""
    if n_sweeps < 1:
        raise InputError("n_sweeps must be at least 1")
    if not 0 <= burn_in:
        raise InputError("burn_in must be nonnegative")
    pairs = [tuple(p) for p in pairs]
    chain = LoopChain(g, beta, theta, u, seed=seed, check=check)
    chain.sweep(int(round(burn_in * n_sweeps)))
    out = np.zeros((n_sweeps, len(pairs)))
    counts = np.zeros((n_sweeps, len(g.edges)), dtype=np.int64)
    n_loops = np.zeros(n_sweeps, dtype=np.int64)
    for s in range(n_sweeps):
        chain.sweep()
        time = chain.rng.random() * beta if random_time else 0.0
        if len(pairs) == 1:
            x, y = pairs[0]
            out[s, 0] = chain.connected(x, y, time)
        elif pairs:
            labels = chain.labels_at(time)
            for p, (x, y) in enumerate(pairs):
                out[s, p] = labels[x] == labels[y]
        counts[s] = chain.counts()
        n_loops[s] = chain.n_loops
    return ChainRun(pairs, out, counts, n_loops, chain)


def estimate_connectivity(g: Graph, x: int, y: int, theta: float, u: float, beta: float,
                          n_sweeps: int, seed=0, burn_in: float = 0.1,
                          random_time: bool = False) -> McEstimate:
    """``P(x <-> y)`` under the equilibrium measure from one Markov chain.

    The indicator is measured after every sweep at time 0 (or at a fresh
    uniform time with ``random_time``); errors are batch means.
    """
    g._check(x)
    g._check(y)
    if x == y:
        return McEstimate(1.0, 0.0, n_sweeps, 0.5)
    if g.distance(x, y) is None:
        return McEstimate(0.0, 0.0, n_sweeps, 0.5)
    run = run_chain(g, [(x, y)], theta, u, beta, n_sweeps, seed, burn_in, random_time)
    return batch_means(run.indicators[:, 0])


def estimate_connectivity_pairs(g: Graph, pairs: Sequence[tuple[int, int]], theta, u, beta, n_sweeps,
                                seed=0, burn_in: float = 0.1, random_time: bool = False) -> dict:
    """Connectivity for several pairs from a single chain; ``{pair: McEstimate}``."""
    run = run_chain(g, pairs, theta, u, beta, n_sweeps, seed, burn_in, random_time)
    return {p: batch_means(run.indicators[:, i]) for i, p in enumerate(run.pairs)}


def direct_estimates(g: Graph, theta: float, u: float, beta: float, n_samples: int, seed=0,
                     pairs: Sequence[tuple[int, int]] = ()):
    """Independent Poisson samples: returns ``(weights, connectivity indicators)``.

    ``weights[i] = theta ** loops`` and ``conn[i, p]`` is the indicator that
    pair ``p`` shares a loop at time 0 in sample ``i``.
    """
    rng = _make_rng(seed)
    n_edges = len(g.edges)
    counts = rng.poisson(beta, size=(n_samples, n_edges))
    weights = np.empty(n_samples)
    conn = np.zeros((n_samples, len(pairs)))
    edges = g.edges
    n = g.n_vertices
    for s in range(n_samples):
        total = int(counts[s].sum())
        times = (rng.random(total) * beta).tolist()
        cross = (rng.random(total) < u).tolist()
        site_times = [[] for _ in range(n)]
        site_ids = [[] for _ in range(n)]
        info = []
        pos = 0
        for k in range(n_edges):
            a, b = edges[k]
            for _ in range(counts[s, k]):
                t = times[pos]
                info.append((a, b, t, cross[pos]))
                pos += 1
        order = sorted(range(len(info)), key=lambda e: info[e][2])
        for eid in order:
            a, b, t, _ = info[eid]
            site_times[a].append(t)
            site_ids[a].append(eid)
            site_times[b].append(t)
            site_ids[b].append(eid)
        uf, offsets = _segment_union(n, site_times, site_ids, info)
        weights[s] = theta ** uf.components
        if pairs:
            labels = []
            for v in range(n):
                m = len(site_times[v])
                labels.append(uf.find(offsets[v] + (m - 1 if m else 0)))
            for p, (x, y) in enumerate(pairs):
                conn[s, p] = labels[x] == labels[y]
    return weights, conn


def estimate_partition_function(g: Graph, theta: float, u: float, beta: float, n_samples: int,
                                seed=0, rel_threshold: float = 0.05) -> McEstimate:
    """``Z = E_rho[theta^{#loops}]`` by direct sampling from the Poisson measure."""
    if beta == 0:
        return McEstimate(float(theta) ** g.n_vertices, 0.0, n_samples)
    weights, _ = direct_estimates(g, theta, u, beta, n_samples, seed)
    mean = float(weights.mean())
    err = float(weights.std(ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else float("nan")
    flags = ()
    if mean > 0 and err / mean > rel_threshold:
        flags = (f"relative error {err / mean:.3g} exceeds {rel_threshold}",)
    return McEstimate(mean, err, n_samples, 0.5, flags)


def direct_connectivity(g: Graph, x: int, y: int, theta: float, u: float, beta: float,
                        n_samples: int, seed=0) -> McEstimate:
    """Reweighted direct-sampling estimate ``E[theta^L 1{x<->y}] / E[theta^L]`` (ratio estimator)."""
    weights, conn = direct_estimates(g, theta, u, beta, n_samples, seed, pairs=[(x, y)])
    num = weights * conn[:, 0]
    ratio = float(num.sum() / weights.sum())
    # delta-method error of a ratio of means
    resid = (num - ratio * weights) / weights.mean()
    err = float(resid.std(ddof=1) / math.sqrt(n_samples))
    return McEstimate(ratio, err, n_samples)
