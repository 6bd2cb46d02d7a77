"""Domain model: infrastructure, applications, placements, and their invariants.

All types are immutable after construction; every operation here is pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from functools import cached_property


class SecurityLevel(IntEnum):
    """Three-level protection scale; numeric values encode the ordering."""

    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @classmethod
    def from_name(cls, name: str) -> "SecurityLevel":
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown security level {name!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()


class Tier(Enum):
    CLOUD = "cloud"
    FOG = "fog"


@dataclass(frozen=True)
class FarmGeometry:
    """Axis-aligned deployment rectangle with origin at (0, 0), in meters."""

    width: float
    height: float

    def contains(self, position: tuple[float, float]) -> bool:
        x, y = position
        return 0.0 <= x <= self.width and 0.0 <= y <= self.height


@dataclass(frozen=True)
class ResourceNode:
    """A compute node, either the remote cloud or an on-farm fog box.

    Capacities are processing (MIPS), memory (Gb), storage (Gb).  Unit costs
    follow the infrastructure price list: processing per second, storage per
    Gb, sensor/user attach bandwidth per Gb.  ``sensor_delay``/``user_delay``
    are the attach latencies in seconds.  Fog nodes carry a position inside
    the farm and a radio transmission range; ``security_rating`` is filled
    in by the rating pass (see :mod:`fogplace.security`).
    """

    id: str
    tier: Tier
    proc_capacity: float
    mem_capacity: float
    stor_capacity: float
    proc_cost: float
    stor_cost: float
    sensor_bw_cost: float
    user_bw_cost: float
    sensor_delay: float
    user_delay: float
    position: tuple[float, float] | None = None
    tx_range: float | None = None
    security_rating: SecurityLevel | None = None


@dataclass(frozen=True)
class LinkTable:
    """Pairwise link delays (seconds) and bandwidth costs (per Gb) between nodes.

    Keyed by ordered (source id, destination id).  The self-loop entries are
    zero by convention: co-located adjacent modules exchange data on-node,
    incurring no communication delay or cost.
    """

    delay: dict[tuple[str, str], float]
    bw_cost: dict[tuple[str, str], float]

    def delay_between(self, u: str, v: str) -> float:
        return self.delay[(u, v)]

    def bw_cost_between(self, u: str, v: str) -> float:
        return self.bw_cost[(u, v)]


@dataclass(frozen=True)
class AppModule:
    """One stage of an application chain and its per-deployment demands."""

    proc_req: float  # MI
    mem_req: float  # Gb
    stor_req: float  # Gb
    exec_delay: float  # seconds, node-independent


@dataclass(frozen=True)
class Application:
    """A linear chain of modules with traffic sizes and service requirements.

    ``inter_traffic[j]`` is the volume (Gb) exchanged on the internal edge
    from module j to module j+1, so its length is ``len(modules) - 1``.
    ``qos_threshold`` bounds the end-to-end delay; ``security_req`` is the
    minimum rating a hosting node must have.
    """

    id: str
    modules: tuple[AppModule, ...]
    input_traffic: float  # Gb, sensor -> first module
    inter_traffic: tuple[float, ...]  # Gb per internal edge
    output_traffic: float  # Gb, last module -> end user
    qos_threshold: float  # seconds
    security_req: SecurityLevel

    @property
    def n_modules(self) -> int:
        return len(self.modules)

    @property
    def exec_total(self) -> float:
        return sum(m.exec_delay for m in self.modules)


@dataclass(frozen=True)
class Instance:
    """A complete problem instance: nodes, links, applications, farm."""

    nodes: tuple[ResourceNode, ...]
    links: LinkTable
    apps: tuple[Application, ...]
    farm: FarmGeometry

    @cached_property
    def node_by_id(self) -> dict[str, ResourceNode]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def app_by_id(self) -> dict[str, Application]:
        return {a.id: a for a in self.apps}

    @property
    def total_modules(self) -> int:
        return sum(a.n_modules for a in self.apps)

    def with_nodes(self, nodes: tuple[ResourceNode, ...]) -> "Instance":
        return replace(self, nodes=nodes)


@dataclass(frozen=True)
class Placement:
    """A full assignment of modules to nodes plus the induced edge mapping.

    ``assign[(app_id, j)]`` is the node hosting module j (0-based) of the
    app; ``edge_map[(app_id, j)]`` is the ordered physical node pair carrying
    the internal edge from module j to j+1.  A consistent placement maps
    every module exactly once and every edge to the pair of its endpoint
    hosts (including the self-pair (u, u) for co-located neighbours).
    """

    assign: dict[tuple[str, int], str]
    edge_map: dict[tuple[str, int], tuple[str, str]] = field(default_factory=dict)


def placement_from_assignment(assign: dict[tuple[str, int], str]) -> Placement:
    """Build a Placement whose edge_map mirrors consecutive assignments."""
    edge_map: dict[tuple[str, int], tuple[str, str]] = {}
    by_app: dict[str, list[int]] = {}
    for (app_id, j) in assign:
        by_app.setdefault(app_id, []).append(j)
    for app_id, idxs in by_app.items():
        for j in sorted(idxs):
            if (app_id, j + 1) in assign:
                edge_map[(app_id, j)] = (assign[(app_id, j)], assign[(app_id, j + 1)])
    return Placement(assign=dict(assign), edge_map=edge_map)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate_instance(inst: Instance) -> list[str]:
    """Return every invariant violation found in the instance (empty = valid).

    Checks node fields, link-table coverage and self-loop convention, app
    chain shapes and traffic sizes, and fog geometry against the farm
    rectangle.  Never raises and never mutates.
    """
    out: list[str] = []

    if inst.farm.width <= 0 or inst.farm.height <= 0:
        out.append(f"farm rectangle must have positive size, got {inst.farm.width}x{inst.farm.height}")

    seen_nodes: set[str] = set()
    for n in inst.nodes:
        if n.id in seen_nodes:
            out.append(f"duplicate node id {n.id!r}")
        seen_nodes.add(n.id)
        for name in ("proc_capacity", "mem_capacity", "stor_capacity",
                     "proc_cost", "stor_cost", "sensor_bw_cost", "user_bw_cost",
                     "sensor_delay", "user_delay"):
            v = getattr(n, name)
            if not _finite(v) or v < 0:
                out.append(f"node {n.id}: {name} must be finite and nonnegative, got {v!r}")
        if n.tier is Tier.FOG:
            if n.position is None:
                out.append(f"node {n.id}: fog node needs a position")
            elif not inst.farm.contains(n.position):
                out.append(f"node {n.id}: fog node outside farm rectangle at {n.position}")
            if n.tx_range is None:
                out.append(f"node {n.id}: fog node needs a transmission range")
            elif not _finite(n.tx_range) or n.tx_range <= 0:
                out.append(f"node {n.id}: tx_range must be finite and > 0, got {n.tx_range!r}")
        elif n.security_rating is not None and n.security_rating is not SecurityLevel.MEDIUM:
            out.append(f"node {n.id}: cloud node rated {n.security_rating.label}, expected medium")

    ids = [n.id for n in inst.nodes]
    for u in ids:
        for v in ids:
            for table, label in ((inst.links.delay, "delay"), (inst.links.bw_cost, "bw_cost")):
                if (u, v) not in table:
                    out.append(f"links.{label} missing entry ({u}, {v})")
                else:
                    val = table[(u, v)]
                    if not _finite(val) or val < 0:
                        out.append(f"links.{label}[{u}, {v}] must be finite and nonnegative, got {val!r}")
                    elif u == v and val != 0:
                        out.append(f"links.{label}[{u}, {u}] must be 0 (co-location), got {val!r}")
    known_pairs = {(u, v) for u in ids for v in ids}
    for table, label in ((inst.links.delay, "delay"), (inst.links.bw_cost, "bw_cost")):
        for pair in table:
            if pair not in known_pairs:
                out.append(f"links.{label} has entry for unknown node pair {pair}")

    seen_apps: set[str] = set()
    for a in inst.apps:
        if a.id in seen_apps:
            out.append(f"duplicate application id {a.id!r}")
        seen_apps.add(a.id)
        n = len(a.modules)
        if n == 0:
            out.append(f"app {a.id}: module chain must be nonempty")
        if len(a.inter_traffic) != max(n - 1, 0):
            out.append(f"app {a.id}: edge count must be n-1 = {n - 1}, got {len(a.inter_traffic)}")
        for j, m in enumerate(a.modules):
            for name in ("proc_req", "mem_req", "stor_req", "exec_delay"):
                v = getattr(m, name)
                if not _finite(v) or v < 0:
                    out.append(f"app {a.id} module {j}: {name} must be finite and nonnegative, got {v!r}")
        for label, v in (("input_traffic", a.input_traffic), ("output_traffic", a.output_traffic)):
            if not _finite(v) or v < 0:
                out.append(f"app {a.id}: {label} must be finite and nonnegative, got {v!r}")
        for j, v in enumerate(a.inter_traffic):
            if not _finite(v) or v < 0:
                out.append(f"app {a.id}: inter_traffic[{j}] must be finite and nonnegative, got {v!r}")
        if not _finite(a.qos_threshold) or a.qos_threshold <= 0:
            out.append(f"app {a.id}: qos_threshold must be finite and > 0, got {a.qos_threshold!r}")

    return out


def placement_is_consistent(inst: Instance, p: Placement) -> bool:
    """True iff p assigns every module exactly once and maps every internal
    edge to the pair of its endpoint hosts.

    Raises ValueError when p refers to app or node ids absent from inst.
    """
    for (app_id, j), node_id in p.assign.items():
        if app_id not in inst.app_by_id:
            raise ValueError(f"placement refers to unknown app {app_id!r}")
        if node_id not in inst.node_by_id:
            raise ValueError(f"placement refers to unknown node {node_id!r}")
    for (app_id, _), (u, v) in p.edge_map.items():
        if app_id not in inst.app_by_id:
            raise ValueError(f"edge map refers to unknown app {app_id!r}")
        if u not in inst.node_by_id or v not in inst.node_by_id:
            raise ValueError(f"edge map refers to unknown node pair ({u!r}, {v!r})")

    for a in inst.apps:
        for j in range(a.n_modules):
            if (a.id, j) not in p.assign:
                return False
        for j in range(a.n_modules - 1):
            if (a.id, j) not in p.edge_map:
                return False
            if p.edge_map[(a.id, j)] != (p.assign[(a.id, j)], p.assign[(a.id, j + 1)]):
                return False

    expected_assign = sum(a.n_modules for a in inst.apps)
    expected_edges = sum(a.n_modules - 1 for a in inst.apps)
    if len(p.assign) != expected_assign or len(p.edge_map) != expected_edges:
        return False  # stray keys beyond the instance's modules/edges
    for (app_id, j) in p.assign:
        if j < 0 or j >= inst.app_by_id[app_id].n_modules:
            return False
    return True
