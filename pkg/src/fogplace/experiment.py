"""Experiment harness: sweep a scenario grid over seeds, tabulate, check trends.

A grid is a list of cells (n_apps, max_qos, alpha, relaxations).  The sweep
solves every (cell, seed) combination exactly, records per-run rows plus one
mean row per cell, and renders a deterministic CSV.  ``check_trends``
evaluates the qualitative orderings the model guarantees (per seed) or is
expected to exhibit on seed means with the shipped default configuration.

The CSV deliberately omits wall-clock timing so that repeated runs are
byte-identical; timings stay available on the in-memory rows.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ilp import Relaxations
from .instance_io import save_report
from .metrics import count_deployed, unprotected_data
from .scenario import ScenarioConfig, generate_instance
from .solver import SolveOptions, SolveStatus, solve_exact

_REL_TOL = 1e-9


@dataclass(frozen=True)
class Cell:
    n_apps: int
    max_qos: float
    alpha: float | None
    relax: Relaxations


@dataclass(frozen=True)
class SweepGrid:
    name: str
    cells: tuple[Cell, ...]


def grid_from_lists(name: str, n_apps: list[int], max_qos: list[float],
                    alphas: list[float | None], relaxes: list[Relaxations]) -> SweepGrid:
    cells = tuple(
        Cell(n_apps=n, max_qos=q, alpha=a, relax=r)
        for n in n_apps for q in max_qos for a in alphas for r in relaxes
    )
    return SweepGrid(name=name, cells=cells)


def preset_grid(name: str) -> SweepGrid:
    """Named replication grids.

    fig4/fig6: cost and tier counts vs number of apps, two QoS scenarios.
    fig5: cost vs high-security fraction at 7 apps, two QoS scenarios.
    fig7: unprotected data vs number of apps with security relaxed, at
    alpha 0.25, against the fully relaxed baseline.
    """
    full = Relaxations()
    if name in ("fig4", "fig6"):
        return grid_from_lists(name, list(range(1, 8)), [1.5, 3.0], [None], [full])
    if name == "fig5":
        return grid_from_lists(name, [7], [1.5, 3.0], [0.0, 0.25, 0.5, 0.75, 1.0], [full])
    if name == "fig7":
        cells = []
        for n in range(1, 8):
            cells.append(Cell(n, 1.5, 0.25, Relaxations(drop_qos=True, drop_security=True)))
            cells.append(Cell(n, 1.5, 0.25, Relaxations(drop_security=True)))
            cells.append(Cell(n, 3.0, 0.25, Relaxations(drop_security=True)))
        return SweepGrid(name=name, cells=tuple(cells))
    raise ValueError(f"unknown preset grid {name!r}")


DEFAULT_SEEDS: tuple[int, ...] = tuple(range(20))

CSV_COLUMNS = [
    "n_apps", "max_qos", "alpha", "drop_qos", "drop_security", "seed", "status",
    "cost_processing", "cost_storage", "cost_sensor_comm", "cost_inter_comm",
    "cost_user_comm", "cost_total", "modules_on_cloud", "modules_on_fog",
    "unprotected_gb", "nodes_explored", "pruned_bound", "pruned_capacity",
    "pruned_qos", "pruned_security",
]


@dataclass
class SweepRow:
    n_apps: int
    max_qos: float
    alpha: float | None
    drop_qos: bool
    drop_security: bool
    seed: int | str  # seed number, or "mean" on aggregate rows
    status: str
    cost_processing: float | None = None
    cost_storage: float | None = None
    cost_sensor_comm: float | None = None
    cost_inter_comm: float | None = None
    cost_user_comm: float | None = None
    cost_total: float | None = None
    modules_on_cloud: float | None = None
    modules_on_fog: float | None = None
    unprotected_gb: float | None = None
    nodes_explored: float | None = None
    pruned_bound: float | None = None
    pruned_capacity: float | None = None
    pruned_qos: float | None = None
    pruned_security: float | None = None
    solve_ms: float | None = None  # not serialized: timing is run-dependent

    @property
    def is_aggregate(self) -> bool:
        return self.seed == "mean"

    def cell_key(self) -> tuple:
        return (self.n_apps, self.max_qos, self.alpha, self.drop_qos, self.drop_security)


_MEAN_FIELDS = [
    "cost_processing", "cost_storage", "cost_sensor_comm", "cost_inter_comm",
    "cost_user_comm", "cost_total", "modules_on_cloud", "modules_on_fog",
    "unprotected_gb", "nodes_explored", "pruned_bound", "pruned_capacity",
    "pruned_qos", "pruned_security",
]


def cell_label(cell: Cell, seed: int | str) -> str:
    alpha = "none" if cell.alpha is None else repr(cell.alpha)
    return f"n{cell.n_apps}_q{cell.max_qos!r}_a{alpha}_{cell.relax.tag}_s{seed}"


def run_sweep(grid: SweepGrid, seeds: list[int] | tuple[int, ...],
              base_cfg: ScenarioConfig | None = None,
              opts: SolveOptions = SolveOptions(),
              dump_dir: str | Path | None = None) -> list[SweepRow]:
    """Solve every (cell, seed) pair; returns seed rows then one mean row per cell.

    A failing run is recorded in its row (status "error:<type>") and never
    aborts the sweep.  Rows are ordered by grid cell then seed, so identical
    inputs produce identical tables.  With ``dump_dir`` set, every run that
    produced a placement also writes its full solve report there for audit,
    named by the cell label and seed.
    """
    if base_cfg is None:
        base_cfg = ScenarioConfig()
    if dump_dir is not None:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    for cell in grid.cells:
        for seed in seeds:
            row = SweepRow(
                n_apps=cell.n_apps, max_qos=cell.max_qos, alpha=cell.alpha,
                drop_qos=cell.relax.drop_qos, drop_security=cell.relax.drop_security,
                seed=seed, status="",
            )
            try:
                cfg = replace(base_cfg, n_apps=cell.n_apps, max_qos=cell.max_qos,
                              alpha=cell.alpha, seed=seed)
                inst = generate_instance(cfg)
                start = time.perf_counter()
                report = solve_exact(inst, cell.relax, opts)
                row.solve_ms = (time.perf_counter() - start) * 1000.0
                row.status = report.status.value
                stats = report.search_stats
                row.nodes_explored = stats.nodes_explored
                row.pruned_bound = stats.pruned_bound
                row.pruned_capacity = stats.pruned_capacity
                row.pruned_qos = stats.pruned_qos
                row.pruned_security = stats.pruned_security
                if report.placement is not None:
                    cost = report.cost
                    row.cost_processing = cost.processing
                    row.cost_storage = cost.storage
                    row.cost_sensor_comm = cost.sensor_comm
                    row.cost_inter_comm = cost.inter_comm
                    row.cost_user_comm = cost.user_comm
                    row.cost_total = cost.total
                    cloud, fog = count_deployed(inst, report.placement)
                    row.modules_on_cloud = cloud
                    row.modules_on_fog = fog
                    row.unprotected_gb = unprotected_data(inst, report.placement)
                    if dump_dir is not None:
                        save_report(inst, report, dump_dir / f"{cell_label(cell, seed)}.json")
            except Exception as exc:  # recorded, not raised: sweeps must finish
                row.status = f"error:{type(exc).__name__}"
            rows.append(row)
    rows.extend(aggregate_rows(rows))
    return rows


def aggregate_rows(rows: list[SweepRow]) -> list[SweepRow]:
    """One mean row per cell, averaging the optimal seed rows of that cell."""
    out: list[SweepRow] = []
    seen: list[tuple] = []
    for row in rows:
        if row.is_aggregate or row.cell_key() in seen:
            continue
        seen.append(row.cell_key())
        group = [r for r in rows if not r.is_aggregate and r.cell_key() == row.cell_key()]
        optimal = [r for r in group if r.status == SolveStatus.OPTIMAL.value]
        agg = SweepRow(
            n_apps=row.n_apps, max_qos=row.max_qos, alpha=row.alpha,
            drop_qos=row.drop_qos, drop_security=row.drop_security,
            seed="mean", status=f"mean_of_{len(optimal)}",
        )
        if optimal:
            for name in _MEAN_FIELDS:
                values = [getattr(r, name) for r in optimal]
                setattr(agg, name, sum(values) / len(values))
        out.append(agg)
    return out


def _render(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(rows: list[SweepRow], include_timing: bool = False) -> str:
    """Render rows in the fixed column order; byte-stable across runs unless
    timing is explicitly included."""
    columns = CSV_COLUMNS + (["solve_ms"] if include_timing else [])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_render(getattr(row, c)) for c in columns])
    return buf.getvalue()


@dataclass
class TrendCheck:
    name: str
    passed: bool
    applicable: bool
    details: str


@dataclass
class TrendReport:
    checks: list[TrendCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks if c.applicable)

    def format(self) -> str:
        lines = []
        for c in self.checks:
            mark = "n/a " if not c.applicable else ("PASS" if c.passed else "FAIL")
            lines.append(f"[{mark}] {c.name}: {c.details}")
        return "\n".join(lines)


def _optimal(rows: list[SweepRow]) -> list[SweepRow]:
    return [r for r in rows if not r.is_aggregate and r.status == SolveStatus.OPTIMAL.value]


def _seed_rows(rows: list[SweepRow]) -> list[SweepRow]:
    return [r for r in rows if not r.is_aggregate]


def check_trends(rows: list[SweepRow]) -> TrendReport:
    """Evaluate the qualitative orderings on a sweep table.

    Per-seed (these hold by construction whenever the solver is exact, so a
    single counterexample is a defect): cost nondecreasing in the number of
    apps; cost under a tighter max_qos at least the cost under a looser one;
    cost nondecreasing in alpha, with infeasibility persisting once entered.
    On seed means (config-sensitive, expected for the shipped defaults): fog
    hosts at least as many modules under the tighter QoS scenario, and the
    fully relaxed baseline leaks at most as much data as the QoS-constrained
    security-relaxed scenarios.
    """
    report = TrendReport()
    seed_rows = _seed_rows(rows)
    optimal = _optimal(rows)

    # (a) per seed: cost nondecreasing in n_apps.
    groups: dict[tuple, list[SweepRow]] = {}
    for r in optimal:
        groups.setdefault((r.max_qos, r.alpha, r.drop_qos, r.drop_security, r.seed), []).append(r)
    comparisons = violations = 0
    for group in groups.values():
        group.sort(key=lambda r: r.n_apps)
        for a, b in zip(group, group[1:]):
            if b.n_apps > a.n_apps:
                comparisons += 1
                if b.cost_total < a.cost_total - _REL_TOL * max(1.0, a.cost_total):
                    violations += 1
    report.checks.append(TrendCheck(
        name="cost_nondecreasing_in_n_apps", passed=(violations == 0),
        applicable=(comparisons > 0),
        details=f"{comparisons} per-seed comparisons, {violations} violations",
    ))

    # (b) per seed: tighter max_qos never costs less.
    groups = {}
    for r in optimal:
        groups.setdefault((r.n_apps, r.alpha, r.drop_qos, r.drop_security, r.seed), []).append(r)
    comparisons = violations = 0
    for group in groups.values():
        group.sort(key=lambda r: r.max_qos)
        for a, b in zip(group, group[1:]):
            if b.max_qos > a.max_qos:
                comparisons += 1
                if a.cost_total < b.cost_total - _REL_TOL * max(1.0, b.cost_total):
                    violations += 1
    report.checks.append(TrendCheck(
        name="cost_tighter_qos_not_cheaper", passed=(violations == 0),
        applicable=(comparisons > 0),
        details=f"{comparisons} per-seed comparisons, {violations} violations",
    ))

    # (c) per seed: cost nondecreasing in alpha; infeasibility persists.
    groups = {}
    for r in seed_rows:
        if r.alpha is not None:
            groups.setdefault((r.n_apps, r.max_qos, r.drop_qos, r.drop_security, r.seed), []).append(r)
    comparisons = violations = 0
    for group in groups.values():
        group.sort(key=lambda r: r.alpha)
        prev: SweepRow | None = None
        dead = False
        for r in group:
            if prev is not None and r.alpha > prev.alpha:
                comparisons += 1
                is_opt = r.status == SolveStatus.OPTIMAL.value
                if dead and is_opt:
                    violations += 1  # came back from infeasible
                elif is_opt and prev.status == SolveStatus.OPTIMAL.value:
                    if r.cost_total < prev.cost_total - _REL_TOL * max(1.0, prev.cost_total):
                        violations += 1
            if r.status == SolveStatus.INFEASIBLE.value:
                dead = True
            prev = r
    report.checks.append(TrendCheck(
        name="cost_nondecreasing_in_alpha", passed=(violations == 0),
        applicable=(comparisons > 0),
        details=f"{comparisons} per-seed comparisons, {violations} violations",
    ))

    # (d) seed means: tighter QoS pushes at least as many modules onto fog.
    full_rows = [r for r in optimal if not r.drop_qos and not r.drop_security]
    by_qos: dict[float, list[float]] = {}
    for r in full_rows:
        by_qos.setdefault(r.max_qos, []).append(r.modules_on_fog)
    qos_values = sorted(by_qos)
    comparisons = violations = 0
    means = {q: sum(v) / len(v) for q, v in by_qos.items()}
    for lo, hi in zip(qos_values, qos_values[1:]):
        comparisons += 1
        if means[lo] < means[hi] - _REL_TOL:
            violations += 1
    detail = ", ".join(f"mean_fog[max_qos={q}]={means[q]:.3f}" for q in qos_values)
    report.checks.append(TrendCheck(
        name="mean_fog_modules_higher_under_tight_qos", passed=(violations == 0),
        applicable=(comparisons > 0), details=detail or "no applicable cells",
    ))

    # (e) seed means: fully relaxed baseline leaks no more than the
    # QoS-constrained security-relaxed scenarios.
    relaxed = [r for r in optimal if r.drop_security]
    noqos = [r.unprotected_gb for r in relaxed if r.drop_qos]
    by_scenario: dict[float, list[float]] = {}
    for r in relaxed:
        if not r.drop_qos:
            by_scenario.setdefault(r.max_qos, []).append(r.unprotected_gb)
    comparisons = violations = 0
    details = []
    if noqos and by_scenario:
        base = sum(noqos) / len(noqos)
        details.append(f"mean_unprotected[noqos]={base:.4f}")
        for q in sorted(by_scenario):
            mean_q = sum(by_scenario[q]) / len(by_scenario[q])
            details.append(f"mean_unprotected[max_qos={q}]={mean_q:.4f}")
            comparisons += 1
            if base > mean_q + _REL_TOL:
                violations += 1
    report.checks.append(TrendCheck(
        name="mean_unprotected_noqos_is_smallest", passed=(violations == 0),
        applicable=(comparisons > 0), details=", ".join(details) or "no applicable cells",
    ))

    return report
