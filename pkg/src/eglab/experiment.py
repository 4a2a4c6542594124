"""Batch runs over (scheme entry, seed) pairs with CSV output.

Trace files hold one row per iteration; the summary holds the mean, min and
max relative FB residual across seeds at logarithmically spaced ``k``.  CSV
column order (format version 1)::

    trace:   k, residual, fb_residual, rel_fb_residual, [dist_to_star], [lyapunov], wall_nanos
    summary: experiment, scheme, k, mean_rel_fb_residual, min_rel_fb_residual, max_rel_fb_residual, n_runs

Bracketed columns appear only when the quantity is available.  Lines starting
with ``#`` carry ``key = value`` metadata.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .config import FORMAT_VERSION, ExperimentConfig
from .diagnostics import BoundReport, DescentReport, check_bounded, check_descent, monitor_for, verify_bound
from .operators import NumericalFailure, UsageError
from .problems import REFERENCE_TOL, solve_reference
from .schemes import run

SUMMARY_POINTS = 40
SUMMARY_COLUMNS = ["experiment", "scheme", "k", "mean_rel_fb_residual", "min_rel_fb_residual",
                   "max_rel_fb_residual", "n_runs"]


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def summary_ks(max_iter: int, points: int = SUMMARY_POINTS) -> list[int]:
    """``0`` plus roughly log-uniform iteration indices up to ``max_iter``."""
    if max_iter <= 0:
        return [0]
    grid = np.unique(np.round(np.logspace(0, math.log10(max_iter), points)).astype(int))
    return [0] + [int(k) for k in grid if 1 <= k <= max_iter] + ([max_iter] if grid[-1] != max_iter else [])


@dataclass
class RunOutcome:
    label: str
    seed: int
    path: str
    rel: dict  # k -> rel_fb_residual at the summary grid
    final_rel: float
    failure: Optional[tuple[int, str]] = None


@dataclass
class ExperimentResult:
    trace_files: list
    summary_file: str
    outcomes: list
    failures: list = field(default_factory=list)

    def final_rel(self, label: str) -> list[float]:
        return [o.final_rel for o in self.outcomes if o.label == label and o.failure is None]

    def mean_final(self, label: str) -> float:
        return float(np.mean(self.final_rel(label)))


def _trace_path(out_dir: Path, cfg: ExperimentConfig, label: str, seed: int) -> Path:
    return out_dir / f"{cfg.exp_id}_{label}_seed{seed}.csv"


def _run_one(cfg: ExperimentConfig, entry_index: int, seed: int, out_dir: str) -> RunOutcome:
    entry = cfg.entries[entry_index]
    problem = cfg.instance(seed)
    schedule = entry.schedule(problem)
    report_eta = schedule.eta if cfg.report_eta == "own" else float(cfg.report_eta)

    x_star, lyap_note = problem.x_star, ""
    monitor = None
    if cfg.lyapunov:
        if x_star is None:
            ref = solve_reference(problem)
            if ref.fb_residual <= REFERENCE_TOL:
                x_star = ref.x
            else:
                lyap_note = f"reference residual {ref.fb_residual:.3g} above {REFERENCE_TOL:g}"
        mon = monitor_for(entry.scheme, schedule, x_star, entry.rule.kind)
        monitor = mon.fn
        lyap_note = lyap_note or mon.reason

    failure = None
    try:
        trace = run(problem, entry.scheme, schedule, entry.rule, cfg.max_iter, x0=cfg.start(problem),
                    monitor=monitor, report_eta=report_eta)
    except NumericalFailure as exc:
        trace = exc.trace
        failure = (exc.iteration, str(exc))

    records = trace.records
    has_dist = problem.x_star is not None
    has_lyap = monitor is not None
    fb0 = records[0].fb_residual if records else 0.0

    def rel(fb, k):
        if k == 0:
            return 1.0
        return fb / fb0 if fb0 > 0 else 0.0

    header = dict(trace.header)
    header.update({"format_version": FORMAT_VERSION, "experiment": cfg.exp_id, "label": entry.label,
                   "seed": seed, "L": problem.lipschitz_L, "rho": problem.rho,
                   "max_iter": cfg.max_iter, "x0_fill": cfg.x0,
                   "status": "ok" if failure is None else f"failed at k={failure[0]}: {failure[1]}"})
    if cfg.lyapunov and not has_lyap:
        header["lyapunov_skipped"] = lyap_note
    cols = ["k", "residual", "fb_residual", "rel_fb_residual"]
    if has_dist:
        cols.append("dist_to_star")
    if has_lyap:
        cols.append("lyapunov")
    cols.append("wall_nanos")

    path = _trace_path(Path(out_dir), cfg, entry.label, seed)
    with open(path, "w", newline="") as fh:
        for key, val in header.items():
            fh.write(f"# {key} = {fmt(val) if isinstance(val, float) else val}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for r in records:
            row = [fmt(r.k), fmt(r.residual), fmt(r.fb_residual), fmt(rel(r.fb_residual, r.k))]
            if has_dist:
                row.append(fmt(r.dist_to_star))
            if has_lyap:
                row.append(fmt(r.lyapunov))
            row.append(str(int(r.wall_nanos)))
            w.writerow(row)

    grid = {k: rel(records[k].fb_residual, k) for k in summary_ks(cfg.max_iter) if k < len(records)}
    final = rel(records[-1].fb_residual, records[-1].k) if records else math.nan
    return RunOutcome(entry.label, seed, str(path), grid, final, failure)


def run_experiment(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None,
                   jobs: Optional[int] = None) -> ExperimentResult:
    """Run every (entry, seed) pair, write trace CSVs and the summary CSV."""
    out = Path(out_dir or cfg.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    jobs = jobs or cfg.jobs
    tasks = cfg.runs()
    args = ([cfg] * len(tasks), [i for i, _ in tasks], [s for _, s in tasks], [str(out)] * len(tasks))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            outcomes = list(pool.map(_run_one, *args))
    else:
        outcomes = list(map(_run_one, *args))

    failures = [o for o in outcomes if o.failure is not None]
    summary = out / f"{cfg.exp_id}_summary.csv"
    with open(summary, "w", newline="") as fh:
        fh.write(f"# format_version = {FORMAT_VERSION}\n# experiment = {cfg.exp_id}\n")
        fh.write(f"# runs = {len(outcomes)}\n# failed_runs = {len(failures)}\n")
        for o in failures:
            fh.write(f"# failed = {o.label} seed={o.seed} k={o.failure[0]}: {o.failure[1]}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for entry in cfg.entries:
            ok = [o for o in outcomes if o.label == entry.label and o.failure is None]
            if not ok:
                continue
            for k in summary_ks(cfg.max_iter):
                vals = [o.rel[k] for o in ok if k in o.rel]
                if vals:
                    w.writerow([cfg.exp_id, entry.label, k, fmt(np.mean(vals)), fmt(min(vals)),
                                fmt(max(vals)), len(vals)])
    return ExperimentResult([o.path for o in outcomes], str(summary), outcomes, failures)


# ---------------------------------------------------------------------------
# bound and potential suites


@dataclass
class VerifyOutcome:
    label: str
    seed: int
    bound: Optional[BoundReport]
    potential: Optional[DescentReport]
    note: str = ""

    @property
    def skipped(self) -> bool:
        return self.bound is None and self.potential is None and self.note.startswith("skipped")

    @property
    def passed(self) -> bool:
        ok_bound = self.bound is None or self.bound.passed
        ok_pot = self.potential is None or self.potential.passed
        return ok_bound and ok_pot and not self.note.startswith("failed")

    def text(self) -> str:
        verdict = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        parts = [f"{verdict} {self.label} seed={self.seed}"]
        if self.bound is not None:
            parts.append(f"bound ratio={self.bound.max_ratio:.6g}@k={self.bound.worst_k}")
        if self.potential is not None:
            parts.append(f"{self.potential.kind} excess={self.potential.max_excess:.3g}@k={self.potential.worst_k}")
        if self.note:
            parts.append(f"({self.note})")
        return " ".join(parts)


def _verify_one(cfg: ExperimentConfig, entry_index: int, seed: int) -> VerifyOutcome:
    entry = cfg.entries[entry_index]
    problem = cfg.instance(seed)
    schedule = entry.schedule(problem)
    x_star, note = problem.x_star, ""
    if x_star is None:
        ref = solve_reference(problem)
        if ref.fb_residual <= REFERENCE_TOL:
            x_star = ref.x
        else:
            return VerifyOutcome(entry.label, seed, None, None,
                                 f"skipped: reference residual {ref.fb_residual:.3g} above {REFERENCE_TOL:g}")
    mon = monitor_for(entry.scheme, schedule, x_star, entry.rule.kind)
    try:
        trace = run(problem, entry.scheme, schedule, entry.rule, cfg.max_iter, x0=cfg.start(problem),
                    monitor=mon.fn)
    except NumericalFailure as exc:
        return VerifyOutcome(entry.label, seed, None, None, f"failed at k={exc.iteration}: {exc}")
    bound = verify_bound(trace, entry.scheme, schedule, x_star)
    potential = None
    if mon.fn is None:
        note = f"potential skipped: {mon.reason}"
    else:
        values = trace.column("lyapunov")
        if mon.kind == "descent":
            potential = check_descent(values)
        elif mon.kind == "quasi-descent":
            potential = check_descent(values, [schedule.descent_factor(k) for k in range(len(values))])
        else:
            potential = check_bounded(values, schedule.Omega)
    return VerifyOutcome(entry.label, seed, bound, potential, note)


def verify_experiment(cfg: ExperimentConfig, out_dir: Union[str, Path, None] = None,
                      jobs: Optional[int] = None) -> list[VerifyOutcome]:
    """Closed-form bound and potential checks for every (entry, seed) pair."""
    out = Path(out_dir or cfg.out or "results")
    out.mkdir(parents=True, exist_ok=True)
    jobs = jobs or cfg.jobs
    tasks = cfg.runs()
    args = ([cfg] * len(tasks), [i for i, _ in tasks], [s for _, s in tasks])
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            outcomes = list(pool.map(_verify_one, *args))
    else:
        outcomes = list(map(_verify_one, *args))
    with open(out / f"{cfg.exp_id}_verify.csv", "w", newline="") as fh:
        fh.write(f"# format_version = {FORMAT_VERSION}\n# experiment = {cfg.exp_id}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["scheme", "seed", "passed", "bound_max_ratio", "bound_worst_k",
                    "potential_kind", "potential_max_excess", "note"])
        for o in outcomes:
            w.writerow([o.label, o.seed, int(o.passed),
                        "" if o.bound is None else fmt(o.bound.max_ratio),
                        "" if o.bound is None else o.bound.worst_k,
                        "" if o.potential is None else o.potential.kind,
                        "" if o.potential is None else fmt(o.potential.max_excess), o.note])
    return outcomes


# ---------------------------------------------------------------------------
# readers and plot data


def _read_csv_with_header(path: Union[str, Path]):
    meta, rows = {}, []
    with open(path, newline="") as fh:
        body = []
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].partition("=")
                meta.setdefault(key.strip(), []).append(val.strip())
            elif line.strip():
                body.append(line)
    reader = csv.reader(body)
    cols = next(reader, None)
    rows = list(reader)
    return {k: v[0] if len(v) == 1 else v for k, v in meta.items()}, cols or [], rows


def read_trace(path: Union[str, Path]):
    """Return ``(header, columns)`` where ``columns`` maps names to float arrays."""
    meta, cols, rows = _read_csv_with_header(path)
    data = {c: np.array([float(r[i]) for r in rows]) for i, c in enumerate(cols)}
    return meta, data


@dataclass(frozen=True)
class SummaryRow:
    experiment: str
    scheme: str
    k: int
    mean: float
    min: float
    max: float
    n_runs: int


def read_summary(path: Union[str, Path]) -> list[SummaryRow]:
    _, cols, rows = _read_csv_with_header(path)
    if cols and cols != SUMMARY_COLUMNS:
        raise UsageError(f"{path}: unexpected summary columns {cols}")
    return [SummaryRow(r[0], r[1], int(r[2]), float(r[3]), float(r[4]), float(r[5]), int(r[6])) for r in rows]


def emit_plotdata(summary_path: Union[str, Path], out_path: Union[str, Path, None] = None) -> str:
    """Write ``log10 k <TAB> log10 mean`` blocks, one per scheme, separated by blank lines.

    Rows with ``k = 0`` or a zero mean have no logarithm and are left out.
    """
    rows = read_summary(summary_path)
    if not rows:
        raise UsageError(f"{summary_path}: summary is empty")
    out_path = Path(out_path) if out_path else Path(summary_path).with_suffix(".plot.tsv")
    blocks: dict[str, list] = {}
    for r in rows:
        blocks.setdefault(r.scheme, [])
        if r.k > 0 and r.mean > 0:
            blocks[r.scheme].append((math.log10(r.k), math.log10(r.mean)))
    with open(out_path, "w") as fh:
        for i, (scheme, pts) in enumerate(blocks.items()):
            if i:
                fh.write("\n\n")
            fh.write(f"# scheme = {scheme}\n# log10_k\tlog10_mean_rel_fb_residual\n")
            for a, b in pts:
                fh.write(f"{a:.17g}\t{b:.17g}\n")
    return str(out_path)


def read_plotdata(path: Union[str, Path]) -> dict[str, list[tuple[float, float]]]:
    blocks: dict[str, list] = {}
    current = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# scheme ="):
                current = line.split("=", 1)[1].strip()
                blocks[current] = []
            elif line and not line.startswith("#"):
                a, b = line.split("\t")
                blocks[current].append((float(a), float(b)))
    return blocks
