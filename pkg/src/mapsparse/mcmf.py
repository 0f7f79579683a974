"""Integer minimum-cost maximum-flow on the layered graph, plus optimality certificates.

The solver runs successive shortest augmenting paths with vertex potentials:
each phase computes reduced-cost shortest distances with Dijkstra (all costs
are non-negative), lifts the potentials, and then saturates every remaining
shortest path at once with a level-restricted blocking flow. Augmentation
order is fixed (lowest edge index first), so results are reproducible.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .flow_graph import SINK, SOURCE, FlowEdge, FlowGraph, GraphError, pair_vertex, point_vertex

_INF = 1 << 62


@dataclass(frozen=True)
class FlowResult:
    """Per-edge flows aligned with ``graph.edges``, plus the solved totals."""

    edge_flows: tuple[int, ...]
    total_flow: int
    total_cost: int


def _residual_arrays(graph: FlowGraph):
    """Paired forward/reverse residual arrays; reverse of edge e is e^1."""
    n = graph.n_vertices
    m = graph.n_edges
    head = [0] * (2 * m)
    cap = [0] * (2 * m)
    cost = [0] * (2 * m)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, e in enumerate(graph.edges):
        f = 2 * i
        r = f + 1
        head[f] = e.head
        cap[f] = e.capacity
        cost[f] = e.cost
        head[r] = e.tail
        cap[r] = 0
        cost[r] = -e.cost
        adj[e.tail].append(f)
        adj[e.head].append(r)
    return head, cap, cost, adj


def solve(graph: FlowGraph) -> FlowResult:
    """Maximum s-t flow of minimum total cost, deterministic for fixed input."""
    n = graph.n_vertices
    s = graph.source_index
    t = graph.sink_index
    head, cap, cost, adj = _residual_arrays(graph)
    heappush = heapq.heappush
    heappop = heapq.heappop

    # Reduced costs are refreshed in one bulk pass after each potential lift;
    # numpy keeps that O(E) pass cheap while the scan loops index plain lists.
    head_np = np.array(head, dtype=np.int64)
    tail_np = np.empty_like(head_np)
    tail_np[0::2] = head_np[1::2]
    tail_np[1::2] = head_np[0::2]
    cost_np = np.array(cost, dtype=np.int64)
    pot_np = np.zeros(n, dtype=np.int64)
    rc = cost[:]  # equals the reduced cost while potentials are all zero

    while True:
        # Dijkstra on reduced costs, early exit once the sink is settled.
        dist = [_INF] * n
        dist[s] = 0
        done = bytearray(n)
        heap = [(0, s)]
        dist_t = _INF
        while heap:
            d, v = heappop(heap)
            if done[v]:
                continue
            done[v] = 1
            if v == t:
                dist_t = d
                break
            for e in adj[v]:
                if cap[e] > 0:
                    w = head[e]
                    if not done[w]:
                        nd = d + rc[e]
                        if nd < dist[w]:
                            dist[w] = nd
                            heappush(heap, (nd, w))
        if dist_t >= _INF:
            break
        lift = np.fromiter(dist, dtype=np.int64, count=n)
        np.minimum(lift, dist_t, out=lift)
        pot_np += lift
        rc_np = cost_np + pot_np[tail_np] - pot_np[head_np]
        rc = rc_np.tolist()

        # Hop levels over the tight (zero reduced cost) residual arcs, as
        # vectorized frontier rounds; expansion stops once the sink is leveled.
        cap_np = np.fromiter(cap, dtype=np.int64, count=len(cap))
        tight = (cap_np > 0) & (rc_np == 0)
        level_np = np.full(n, -1, dtype=np.int64)
        level_np[s] = 0
        frontier = np.zeros(n, dtype=bool)
        frontier[s] = True
        depth = 0
        while frontier.any() and level_np[t] < 0:
            depth += 1
            hit = np.zeros(n, dtype=bool)
            hit[head_np[tight & frontier[tail_np]]] = True
            frontier = hit & (level_np < 0)
            level_np[frontier] = depth
        if level_np[t] < 0:
            continue

        # Admissible = tight and level-monotone; prune arcs whose head cannot
        # reach the sink so the walk below never wanders into dead ends.
        adm = tight & (level_np[tail_np] >= 0) & (level_np[tail_np] + 1 == level_np[head_np])
        reach = np.zeros(n, dtype=bool)
        reach[t] = True
        while True:
            grow = adm & reach[head_np] & ~reach[tail_np]
            if not grow.any():
                break
            reach[tail_np[grow]] = True
        adm &= reach[head_np]
        adm_idx = np.flatnonzero(adm)
        order = np.argsort(tail_np[adm_idx], kind="stable")
        adm_sorted = adm_idx[order]
        arc_of = adm_sorted.tolist()
        start = np.searchsorted(tail_np[adm_sorted], np.arange(n + 1)).tolist()

        # Blocking flow on the admissible arc lists (current-arc discipline:
        # pointers only advance, on saturation or on retreat from a dead head).
        it = start[:-1]
        path: list[int] = []
        v = s
        while True:
            if v == t:
                push = min(cap[e] for e in path)
                sat = -1
                for j, e in enumerate(path):
                    cap[e] -= push
                    cap[e ^ 1] += push
                    if sat < 0 and cap[e] == 0:
                        sat = j
                first_saturated = path[sat]
                del path[sat:]
                v = head[first_saturated ^ 1]
                continue
            i = it[v]
            end = start[v + 1]
            chosen = -1
            while i < end:
                e = arc_of[i]
                if cap[e] > 0:
                    chosen = e
                    break
                i += 1
            it[v] = i
            if chosen >= 0:
                path.append(chosen)
                v = head[chosen]
            else:
                if v == s:
                    break
                e = path.pop()
                v = head[e ^ 1]
                it[v] += 1  # the arc into the dead vertex is done for this phase

    flows = tuple(cap[2 * i + 1] for i in range(graph.n_edges))
    total_flow = sum(flows[i] for i, e in enumerate(graph.edges) if e.tail == s)
    total_cost = sum(f * e.cost for f, e in zip(flows, graph.edges))
    assert abs(total_cost) < _INF and total_flow < _INF
    return FlowResult(flows, total_flow, total_cost)


def max_flow_oracle(graph: FlowGraph) -> int:
    """Classical shortest-augmenting-path max flow, used to cross-check totals."""
    n = graph.n_vertices
    s = graph.source_index
    t = graph.sink_index
    head, cap, _, adj = _residual_arrays(graph)
    total = 0
    while True:
        parent = [-1] * n
        parent[s] = -2
        queue = [s]
        qi = 0
        reached = False
        while qi < len(queue) and not reached:
            v = queue[qi]
            qi += 1
            for e in adj[v]:
                w = head[e]
                if cap[e] > 0 and parent[w] == -1:
                    parent[w] = e
                    if w == t:
                        reached = True
                        break
                    queue.append(w)
        if not reached:
            return total
        push = _INF
        v = t
        while v != s:
            e = parent[v]
            if cap[e] < push:
                push = cap[e]
            v = head[e ^ 1]
        v = t
        while v != s:
            e = parent[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = head[e ^ 1]
        total += push


def verify_optimality(graph: FlowGraph, result: FlowResult) -> bool:
    """Certify the solved flow: feasible, maximal, and of minimum cost.

    True iff the flow respects capacities and conservation, the residual
    graph admits no augmenting s-t path (maximality), and it contains no
    negative-cost cycle (minimality among maximum flows).
    """
    n = graph.n_vertices
    s = graph.source_index
    t = graph.sink_index
    flows = result.edge_flows
    if len(flows) != graph.n_edges:
        return False

    net = [0] * n
    for f, e in zip(flows, graph.edges):
        if not 0 <= f <= e.capacity:
            return False
        net[e.tail] -= f
        net[e.head] += f
    for v in range(n):
        if v not in (s, t) and net[v] != 0:
            return False

    arcs = []
    for f, e in zip(flows, graph.edges):
        if f < e.capacity:
            arcs.append((e.tail, e.head, e.cost))
        if f > 0:
            arcs.append((e.head, e.tail, -e.cost))

    # (a) maximality: sink unreachable in the residual graph
    reach = [False] * n
    reach[s] = True
    frontier = [s]
    out: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for u, v, c in arcs:
        out[u].append((v, c))
    while frontier:
        u = frontier.pop()
        for v, _ in out[u]:
            if not reach[v]:
                reach[v] = True
                frontier.append(v)
    if reach[t]:
        return False

    # (b) minimality: no negative cycle (Bellman-Ford from an all-zero start)
    dist = [0] * n
    for it in range(n):
        changed = False
        for u, v, c in arcs:
            nd = dist[u] + c
            if nd < dist[v]:
                dist[v] = nd
                changed = True
        if not changed:
            return True
    return not changed


def parse_dimacs(text: str) -> tuple[FlowGraph, int]:
    """Parse a DIMACS min-cost-flow file describing a layered graph.

    Layer membership is recovered from the arc pattern: heads of source arcs
    become point vertices, tails of sink arcs become pair vertices. Returns
    the graph and the declared supply.
    """
    n_decl = None
    supplies: dict[int, int] = {}
    raw_arcs: list[tuple[int, int, int, int, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "min":
                raise GraphError(f"line {lineno}: expected 'p min N M'")
            n_decl = int(parts[2])
        elif parts[0] == "n":
            supplies[int(parts[1])] = int(parts[2])
        elif parts[0] == "a":
            if len(parts) != 6:
                raise GraphError(f"line {lineno}: expected 'a from to low cap cost'")
            raw_arcs.append(tuple(int(x) for x in parts[1:]))
        else:
            raise GraphError(f"line {lineno}: unknown record '{parts[0]}'")
    if n_decl is None:
        raise GraphError("missing problem line")
    positives = [v for v, sup in supplies.items() if sup > 0]
    negatives = [v for v, sup in supplies.items() if sup < 0]
    if len(positives) != 1 or len(negatives) != 1:
        raise GraphError("expected exactly one supply and one demand node")
    src, snk = positives[0], negatives[0]
    supply = supplies[src]

    points = sorted({h for tl, h, *_ in raw_arcs if tl == src})
    pairs = sorted({tl for tl, h, *_ in raw_arcs if h == snk})
    vertex_of: dict[int, tuple] = {src: SOURCE, snk: SINK}
    for node in points:
        vertex_of[node] = point_vertex(node)
    for node in pairs:
        if node in vertex_of:
            raise GraphError(f"node {node} is on both the point and pair layers")
        vertex_of[node] = pair_vertex(node, node + 1)

    vertices = [SOURCE] + [vertex_of[p] for p in points] + [vertex_of[p] for p in pairs] + [SINK]
    index = {v: i for i, v in enumerate(vertices)}
    edges = []
    for tl, h, low, capacity, cost in raw_arcs:
        if low != 0:
            raise GraphError("only zero lower bounds are supported")
        if tl not in vertex_of or h not in vertex_of:
            raise GraphError(f"arc {tl}->{h} does not fit the layered structure")
        edges.append(FlowEdge(index[vertex_of[tl]], index[vertex_of[h]], capacity, cost))
    return FlowGraph(vertices, edges), supply
