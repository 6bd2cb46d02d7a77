"""Exact and heuristic solvers for the module placement problem.

``solve_exact`` runs a depth-first branch-and-bound over module-to-node
assignments in (app, chain-position) order.  The edge variables of the full
binary program are implied by consecutive assignments, so the search only
branches on module hosts and derives link cost and delay incrementally.

Pruning at a partial assignment:
  * capacity  - the chosen node cannot absorb the module's demands,
  * security  - the node's rating is below the app's requirement,
  * qos       - delay already accumulated (plus all execution delays, which
                are placement-independent) exceeds the app's threshold; an
                admissible test since future link delays are nonnegative,
  * bound     - prefix cost plus a lower bound on the cheapest completion
                reaches the incumbent.

The completion bound adds, for the current app's remaining modules, each
module's cheapest individually-feasible host cost (link costs ignored), and
for each untouched app its cheapest standalone full-chain cost including
link costs (capacity ignored).  Both parts only discard constraints, so the
bound never overestimates.

``solve_bruteforce`` enumerates every complete assignment and filters with
the declarative feasibility checker - the verification oracle for the
branch-and-bound.  ``solve_greedy`` places one app at a time against the
remaining capacities and never backtracks; it is the incumbent seed for the
exact search and a scalability baseline.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from enum import Enum

from .ilp import FEAS_TOL, CostBreakdown, Relaxations, check_feasibility, eval_cost, eval_delay
from .model import Instance, Placement, placement_from_assignment

BRUTEFORCE_MAX_MODULES = 12
BRUTEFORCE_MAX_NODES = 4


class SolveStatus(Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"  # heuristic success, optimality not claimed
    INFEASIBLE = "infeasible"
    TIME_LIMIT = "time_limit"
    HEURISTIC_FAILED = "heuristic_failed"  # greedy found nothing; not a proof


@dataclass(frozen=True)
class SolveOptions:
    time_limit: float | None = None  # seconds; None = run to completion
    node_order: str = "input-order"  # or "cheapest-first"
    tolerance: float = 0.0  # relative gap accepted when pruning

    def __post_init__(self) -> None:
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")
        if self.node_order not in ("input-order", "cheapest-first"):
            raise ValueError(f"unknown node_order {self.node_order!r}")
        if self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")


@dataclass
class SearchStats:
    nodes_explored: int = 0
    pruned_bound: int = 0
    pruned_capacity: int = 0
    pruned_qos: int = 0
    pruned_security: int = 0

    def to_dict(self) -> dict[str, int]:
        return {
            "nodes_explored": self.nodes_explored,
            "pruned_bound": self.pruned_bound,
            "pruned_capacity": self.pruned_capacity,
            "pruned_qos": self.pruned_qos,
            "pruned_security": self.pruned_security,
        }


@dataclass(frozen=True)
class SolveReport:
    status: SolveStatus
    relax: Relaxations
    placement: Placement | None = None
    cost: CostBreakdown | None = None
    per_app_delay: dict[str, tuple[float, float]] = field(default_factory=dict)
    search_stats: SearchStats = field(default_factory=SearchStats)


class _Position:
    """One module slot in the global (app, chain) branching order."""

    __slots__ = ("app_idx", "mod_idx", "is_first", "is_last", "proc", "mem", "stor",
                 "static_cost", "inbound", "candidates", "min_cost")

    def __init__(self, app_idx: int, mod_idx: int, is_first: bool, is_last: bool,
                 proc: float, mem: float, stor: float,
                 static_cost: list[float], inbound: float, candidates: list[int]):
        self.app_idx = app_idx
        self.mod_idx = mod_idx
        self.is_first = is_first
        self.is_last = is_last
        self.proc = proc
        self.mem = mem
        self.stor = stor
        self.static_cost = static_cost  # per node index, link costs excluded
        self.inbound = inbound  # Gb arriving from the predecessor module
        self.candidates = candidates  # node indices, search order
        self.min_cost = min((static_cost[k] for k in candidates), default=float("inf"))


class _Problem:
    """Dense arrays and bounds shared by the solvers."""

    def __init__(self, inst: Instance, relax: Relaxations, node_order: str = "input-order"):
        self.inst = inst
        self.relax = relax
        nodes = inst.nodes
        self.n_nodes = len(nodes)
        self.node_ids = [n.id for n in nodes]
        self.proc_cap = [n.proc_capacity for n in nodes]
        self.mem_cap = [n.mem_capacity for n in nodes]
        self.stor_cap = [n.stor_capacity for n in nodes]
        self.sensor_delay = [n.sensor_delay for n in nodes]
        self.user_delay = [n.user_delay for n in nodes]
        self.t = [[inst.links.delay[(u.id, v.id)] for v in nodes] for u in nodes]
        self.bw = [[inst.links.bw_cost[(u.id, v.id)] for v in nodes] for u in nodes]
        if not relax.drop_security:
            for n in nodes:
                if n.security_rating is None:
                    raise ValueError(f"node {n.id} has no security rating; rate the instance first")

        self.positions: list[_Position] = []
        self.app_first_pos: list[int] = []
        self.qos = [a.qos_threshold for a in inst.apps]
        self.exec_total = [a.exec_total for a in inst.apps]
        for i, app in enumerate(inst.apps):
            self.app_first_pos.append(len(self.positions))
            last = app.n_modules - 1
            if relax.drop_security:
                allowed = list(range(self.n_nodes))
            else:
                allowed = [k for k, n in enumerate(nodes)
                           if int(n.security_rating) >= int(app.security_req)]
            for j, mod in enumerate(app.modules):
                static = []
                for node in nodes:
                    c = mod.exec_delay * node.proc_cost + mod.stor_req * node.stor_cost
                    if j == 0:
                        c += app.input_traffic * node.sensor_bw_cost
                    if j == last:
                        c += app.output_traffic * node.user_bw_cost
                    static.append(c)
                fits = [k for k in allowed
                        if mod.proc_req <= self.proc_cap[k] + FEAS_TOL
                        and mod.mem_req <= self.mem_cap[k] + FEAS_TOL
                        and mod.stor_req <= self.stor_cap[k] + FEAS_TOL]
                if node_order == "cheapest-first":
                    fits.sort(key=lambda k: (static[k], k))
                self.positions.append(_Position(
                    app_idx=i, mod_idx=j, is_first=(j == 0), is_last=(j == last),
                    proc=mod.proc_req, mem=mod.mem_req, stor=mod.stor_req,
                    static_cost=static, inbound=(app.input_traffic if j == 0 else app.inter_traffic[j - 1]),
                    candidates=fits,
                ))
        self.n_positions = len(self.positions)

        # Standalone minima per app (capacity between apps ignored) feed the
        # cross-app part of the completion bound; ``None`` marks an app that
        # cannot be placed even alone, which proves the instance infeasible.
        self.app_min: list[float | None] = [
            self._standalone_min(i) for i in range(len(inst.apps))
        ]

        # tail_bound[m]: lower bound on the cost of placing positions m.. end,
        # combining the per-module minima of the current app's remaining
        # modules with the standalone minima of every later app.
        self.tail_bound = [0.0] * (self.n_positions + 1)
        if all(v is not None for v in self.app_min):
            app_tail = [0.0] * (len(inst.apps) + 1)
            for i in range(len(inst.apps) - 1, -1, -1):
                app_tail[i] = app_tail[i + 1] + self.app_min[i]
            intra = 0.0
            for m in range(self.n_positions - 1, -1, -1):
                pos = self.positions[m]
                app_end_here = (m + 1 == self.n_positions
                                or self.positions[m + 1].app_idx != pos.app_idx)
                intra = pos.min_cost if app_end_here else intra + pos.min_cost
                self.tail_bound[m] = intra + app_tail[pos.app_idx + 1]
                if pos.mod_idx == 0:
                    # At an app boundary the whole-chain standalone minimum
                    # (link costs included) is valid and at least as tight.
                    self.tail_bound[m] = max(self.tail_bound[m], app_tail[pos.app_idx])

    def _standalone_min(self, app_idx: int) -> float | None:
        best = None
        for cost, _delay, _combo in self.iter_app_assignments(app_idx):
            if best is None or cost < best:
                best = cost
        return best

    def iter_app_assignments(self, app_idx: int):
        """Yield (cost, delay, node tuple) for every standalone-feasible full
        assignment of one app, in lexicographic node order.

        Capacity is checked per node against the app's own demands only;
        security and QoS follow the active relaxations.
        """
        app = self.inst.apps[app_idx]
        base = self.app_first_pos[app_idx]
        n = app.n_modules
        positions = [self.positions[base + j] for j in range(n)]
        check_qos = not self.relax.drop_qos
        for combo in itertools.product(*(pos.candidates for pos in positions)):
            proc_use: dict[int, float] = {}
            mem_use: dict[int, float] = {}
            stor_use: dict[int, float] = {}
            ok = True
            for pos, k in zip(positions, combo):
                proc_use[k] = proc_use.get(k, 0.0) + pos.proc
                mem_use[k] = mem_use.get(k, 0.0) + pos.mem
                stor_use[k] = stor_use.get(k, 0.0) + pos.stor
            for k in proc_use:
                if (proc_use[k] > self.proc_cap[k] + FEAS_TOL
                        or mem_use[k] > self.mem_cap[k] + FEAS_TOL
                        or stor_use[k] > self.stor_cap[k] + FEAS_TOL):
                    ok = False
                    break
            if not ok:
                continue
            cost = 0.0
            delay = self.exec_total[app_idx] + self.sensor_delay[combo[0]] + self.user_delay[combo[-1]]
            prev = -1
            for pos, k in zip(positions, combo):
                cost += pos.static_cost[k]
                if prev >= 0:
                    cost += pos.inbound * self.bw[prev][k]
                    delay += self.t[prev][k]
                prev = k
            if check_qos and delay > self.qos[app_idx] + FEAS_TOL:
                continue
            yield cost, delay, combo

    def placement_of(self, assignment: list[int]) -> Placement:
        assign = {}
        for pos, k in zip(self.positions, assignment):
            assign[(self.inst.apps[pos.app_idx].id, pos.mod_idx)] = self.node_ids[k]
        return placement_from_assignment(assign)


def _finish_report(inst: Instance, relax: Relaxations, status: SolveStatus,
                   placement: Placement | None, stats: SearchStats) -> SolveReport:
    if placement is None:
        return SolveReport(status=status, relax=relax, search_stats=stats)
    cost = eval_cost(inst, placement)
    delays = {a.id: eval_delay(inst, placement, a) for a in inst.apps}
    return SolveReport(status=status, relax=relax, placement=placement,
                       cost=cost, per_app_delay=delays, search_stats=stats)


def solve_exact(inst: Instance, relax: Relaxations = Relaxations(),
                opts: SolveOptions = SolveOptions()) -> SolveReport:
    """Minimum-cost feasible placement via branch-and-bound, or Infeasible.

    Deterministic: modules are branched in (app, chain) order and nodes tried
    in the order given by ``opts.node_order``, so identical inputs produce
    identical reports.  Hitting the time limit returns the best incumbent
    found (if any) with status TIME_LIMIT.
    """
    prob = _Problem(inst, relax, opts.node_order)
    stats = SearchStats()

    if any(not pos.candidates for pos in prob.positions) or any(v is None for v in prob.app_min):
        return _finish_report(inst, relax, SolveStatus.INFEASIBLE, None, stats)
    if prob.n_positions == 0:
        return _finish_report(inst, relax, SolveStatus.OPTIMAL,
                              placement_from_assignment({}), stats)

    best_cost = float("inf")
    best_assignment: list[int] | None = None
    greedy = solve_greedy(inst, relax)
    if greedy.status is SolveStatus.FEASIBLE:
        best_cost = greedy.cost.total
        node_pos = {nid: k for k, nid in enumerate(prob.node_ids)}
        best_assignment = [node_pos[greedy.placement.assign[(inst.apps[p.app_idx].id, p.mod_idx)]]
                           for p in prob.positions]

    positions = prob.positions
    tail_bound = prob.tail_bound
    proc_cap, mem_cap, stor_cap = prob.proc_cap, prob.mem_cap, prob.stor_cap
    t, bw = prob.t, prob.bw
    sensor_delay, user_delay = prob.sensor_delay, prob.user_delay
    qos, exec_total = prob.qos, prob.exec_total
    check_qos = not relax.drop_qos
    n_pos = prob.n_positions

    used_proc = [0.0] * prob.n_nodes
    used_mem = [0.0] * prob.n_nodes
    used_stor = [0.0] * prob.n_nodes
    current = [0] * n_pos
    app_delay = [0.0] * len(inst.apps)

    deadline = None if opts.time_limit is None else time.monotonic() + opts.time_limit
    timed_out = False
    tol = opts.tolerance

    def dfs(m: int, prefix_cost: float) -> None:
        nonlocal best_cost, best_assignment, timed_out
        if timed_out:
            return
        if m == n_pos:
            if prefix_cost < best_cost:
                best_cost = prefix_cost
                best_assignment = current.copy()
            return
        if deadline is not None and stats.nodes_explored % 4096 == 0:
            if time.monotonic() > deadline:
                timed_out = True
                return
        pos = positions[m]
        a = pos.app_idx
        prev = current[m - 1] if not pos.is_first else -1
        saved_delay = app_delay[a]
        for k in pos.candidates:
            if (used_proc[k] + pos.proc > proc_cap[k] + FEAS_TOL
                    or used_mem[k] + pos.mem > mem_cap[k] + FEAS_TOL
                    or used_stor[k] + pos.stor > stor_cap[k] + FEAS_TOL):
                stats.pruned_capacity += 1
                continue
            if pos.is_first:
                delay = exec_total[a] + sensor_delay[k]
                step_cost = pos.static_cost[k]
            else:
                delay = saved_delay + t[prev][k]
                step_cost = pos.static_cost[k] + pos.inbound * bw[prev][k]
            if pos.is_last:
                delay += user_delay[k]
            if check_qos and delay > qos[a] + FEAS_TOL:
                stats.pruned_qos += 1
                continue
            child_cost = prefix_cost + step_cost
            # tol = 0 keeps the search exact; tol > 0 accepts a relative gap.
            if child_cost + tail_bound[m + 1] >= best_cost - tol * max(1.0, abs(best_cost)):
                stats.pruned_bound += 1
                continue
            stats.nodes_explored += 1
            used_proc[k] += pos.proc
            used_mem[k] += pos.mem
            used_stor[k] += pos.stor
            current[m] = k
            app_delay[a] = delay
            dfs(m + 1, child_cost)
            used_proc[k] -= pos.proc
            used_mem[k] -= pos.mem
            used_stor[k] -= pos.stor
            if timed_out:
                break
        app_delay[a] = saved_delay

    dfs(0, 0.0)

    if timed_out:
        placement = prob.placement_of(best_assignment) if best_assignment is not None else None
        return _finish_report(inst, relax, SolveStatus.TIME_LIMIT, placement, stats)
    if best_assignment is None:
        return _finish_report(inst, relax, SolveStatus.INFEASIBLE, None, stats)
    return _finish_report(inst, relax, SolveStatus.OPTIMAL,
                          prob.placement_of(best_assignment), stats)


def solve_bruteforce(inst: Instance, relax: Relaxations = Relaxations()) -> SolveReport:
    """Exhaustive oracle: enumerate every assignment, filter, keep the cheapest.

    Ties are broken by lexicographic assignment order (earlier node indices
    win).  Refuses instances beyond the enumeration bound of
    12 total modules / 4 nodes.
    """
    total_modules = inst.total_modules
    if total_modules > BRUTEFORCE_MAX_MODULES or len(inst.nodes) > BRUTEFORCE_MAX_NODES:
        raise ValueError(
            f"instance too large for brute force: {total_modules} modules on "
            f"{len(inst.nodes)} nodes (limit {BRUTEFORCE_MAX_MODULES} modules, "
            f"{BRUTEFORCE_MAX_NODES} nodes)")
    keys = [(a.id, j) for a in inst.apps for j in range(a.n_modules)]
    node_ids = [n.id for n in inst.nodes]
    stats = SearchStats()
    best_cost = float("inf")
    best_placement: Placement | None = None
    for combo in itertools.product(node_ids, repeat=total_modules):
        stats.nodes_explored += 1
        placement = placement_from_assignment(dict(zip(keys, combo)))
        if check_feasibility(inst, placement, relax):
            continue
        cost = eval_cost(inst, placement).total
        if cost < best_cost:
            best_cost = cost
            best_placement = placement
    if best_placement is None:
        return _finish_report(inst, relax, SolveStatus.INFEASIBLE, None, stats)
    return _finish_report(inst, relax, SolveStatus.OPTIMAL, best_placement, stats)


def solve_greedy(inst: Instance, relax: Relaxations = Relaxations()) -> SolveReport:
    """Place apps one at a time, each on its cheapest assignment that fits the
    capacity left by earlier apps; no backtracking across apps.

    Returns FEASIBLE on success (never claims optimality) and
    HEURISTIC_FAILED when some app cannot be placed - which, unlike
    INFEASIBLE from the exact solver, is not a proof.
    """
    prob = _Problem(inst, relax)
    stats = SearchStats()
    used_proc = [0.0] * prob.n_nodes
    used_mem = [0.0] * prob.n_nodes
    used_stor = [0.0] * prob.n_nodes
    assignment: list[int] = []
    for i, app in enumerate(inst.apps):
        base = prob.app_first_pos[i]
        pos_list = [prob.positions[base + j] for j in range(app.n_modules)]
        best: tuple[float, tuple[int, ...]] | None = None
        for cost, _delay, combo in prob.iter_app_assignments(i):
            stats.nodes_explored += 1
            fits = True
            add_proc: dict[int, float] = {}
            add_mem: dict[int, float] = {}
            add_stor: dict[int, float] = {}
            for pos, k in zip(pos_list, combo):
                add_proc[k] = add_proc.get(k, 0.0) + pos.proc
                add_mem[k] = add_mem.get(k, 0.0) + pos.mem
                add_stor[k] = add_stor.get(k, 0.0) + pos.stor
            for k in add_proc:
                if (used_proc[k] + add_proc[k] > prob.proc_cap[k] + FEAS_TOL
                        or used_mem[k] + add_mem[k] > prob.mem_cap[k] + FEAS_TOL
                        or used_stor[k] + add_stor[k] > prob.stor_cap[k] + FEAS_TOL):
                    fits = False
                    break
            if not fits:
                continue
            if best is None or cost < best[0]:
                best = (cost, combo)
        if best is None:
            return SolveReport(status=SolveStatus.HEURISTIC_FAILED, relax=relax,
                               search_stats=stats)
        for pos, k in zip(pos_list, best[1]):
            used_proc[k] += pos.proc
            used_mem[k] += pos.mem
            used_stor[k] += pos.stor
        assignment.extend(best[1])
    return _finish_report(inst, relax, SolveStatus.FEASIBLE, prob.placement_of(assignment), stats)
