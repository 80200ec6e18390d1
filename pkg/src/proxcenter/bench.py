"""Head-to-head benchmark of the proximal center method and the subgradient baseline.

Each grid cell ``(m, M, eps)`` draws a seeded :class:`RandomBallQP`, runs the
proximal center method to its certificate and the dual subgradient method
until it reaches ``eps`` or its iteration cap.  The comma-separated table
holds no timing data, so equal seeds give byte-identical files; wall times
go to a sibling ``*_timings.csv``.
"""

from __future__ import annotations

import csv
import io
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .dsm import StepRule, run_dsm
from .instances import RandomBallQP
from .pcm import run_pcm
from .runs import write_trace

DEFAULT_N1 = 10

GRIDS = {
    "acceptance": [(m, M, 0.01) for m in (50, 200) for M in (2, 10)],
    "paper": [(m, M, e) for e in (0.01, 0.001) for m in (50, 200, 1000) for M in (2, 10)],
    "small": [(m, M, 0.01) for m in (10, 50) for M in (2, 5)],
}

COLUMNS = ("m", "M", "eps", "n1", "seed", "k_bound",
           "pcm_iterations", "pcm_status", "pcm_accuracy", "pcm_gap", "pcm_violation",
           "dsm_iterations", "dsm_status", "dsm_accuracy_at_cap", "dsm_gap", "dsm_violation", "error")


def default_cap(m) -> int:
    """Subgradient iteration cap: 5000 up to ``m = 200``, 10000 beyond."""
    return 5000 if m <= 200 else 10000


def accuracy(cert) -> float:
    """Nonnegative accuracy ``max(|gap surrogate|, violation)`` of a certificate."""
    return max(abs(cert.gap_surrogate), cert.violation)


@dataclass
class BenchmarkRow:
    m: int
    M: int
    eps: float
    n1: int = DEFAULT_N1
    seed: int = 0
    k_bound: int | None = None
    pcm_iterations: int | None = None
    pcm_status: str = ""
    pcm_accuracy: float | None = None
    pcm_gap: float | None = None
    pcm_violation: float | None = None
    dsm_iterations: int | None = None
    dsm_status: str = ""
    dsm_accuracy_at_cap: float | None = None
    dsm_gap: float | None = None
    dsm_violation: float | None = None
    error: str = ""
    wall_times: dict = field(default_factory=dict)

    @property
    def key(self):
        return (self.m, self.M, self.eps)


def parse_grid(text: str) -> list[tuple]:
    """Parse a preset name or a comma list of ``m:M:eps`` cells (``x`` also separates)."""
    text = text.strip()
    if text in GRIDS:
        return list(GRIDS[text])
    cells = []
    for part in filter(None, (s.strip() for s in text.split(","))):
        bits = part.replace("x", ":").split(":")
        if len(bits) != 3:
            raise ValueError(f"grid cell {part!r} is not m:M:eps")
        cells.append((int(bits[0]), int(bits[1]), float(bits[2])))
    return cells


def run_cell(m, M, eps, seed=0, n1=DEFAULT_N1, cap=None, trace_dir=None) -> BenchmarkRow:
    """Run both methods on one grid cell.  Failures are recorded on the row, not raised."""
    row = BenchmarkRow(m, M, eps, n1, seed)
    cap = default_cap(m) if cap is None else cap
    try:
        p = RandomBallQP(m, M, n1, seed).generate().problem
        pcm = run_pcm(p, eps=eps)
        row.k_bound = pcm.k_bound
        row.pcm_iterations, row.pcm_status = pcm.iterations, pcm.status
        row.pcm_accuracy = accuracy(pcm.certificate)
        row.pcm_gap, row.pcm_violation = pcm.certificate.gap_surrogate, pcm.certificate.violation
        row.wall_times["pcm"] = pcm.wall_time
        dsm = run_dsm(p, rule=StepRule("diminishing"), max_iter=cap, eps=eps)
        row.dsm_iterations, row.dsm_status = dsm.iterations, dsm.status
        row.dsm_accuracy_at_cap = accuracy(dsm.certificate)
        row.dsm_gap, row.dsm_violation = dsm.certificate.gap_surrogate, dsm.certificate.violation
        row.wall_times["dsm"] = dsm.wall_time
        if trace_dir is not None:
            tag = f"m{m}_M{M}_eps{eps:g}"
            write_trace(pcm.trace, Path(trace_dir) / f"{tag}_pcm.jsonl")
            write_trace(dsm.trace, Path(trace_dir) / f"{tag}_dsm.jsonl")
    except Exception as exc:  # noqa: BLE001 - a failing cell must not stop the grid
        row.error = f"{type(exc).__name__}: {exc}"
        row.wall_times["traceback"] = traceback.format_exc()
    return row


def _run_cell_args(args):
    return run_cell(*args)


def run_benchmark(grid, caps=None, output_path=None, seed=0, jobs=1, n1=DEFAULT_N1) -> list[BenchmarkRow]:
    """Run every grid cell and return rows sorted by ``(m, M, eps)``.

    Parameters
    ----------
    grid : list of (m, M, eps)
    caps : dict or callable, optional
        Subgradient cap per ``m``; defaults to :func:`default_cap`.
    output_path : path, optional
        Where to write the table.  Traces go to ``<stem>_traces/`` and wall
        times to ``<stem>_timings.csv`` next to it.
    jobs : int
        Worker processes; rows are sorted regardless of completion order.
    """
    if caps is None:
        cap_of = default_cap
    elif callable(caps):
        cap_of = caps
    else:
        cap_of = lambda m: caps.get(m, default_cap(m))  # noqa: E731
    trace_dir = None
    if output_path is not None:
        output_path = Path(output_path)
        trace_dir = output_path.with_name(output_path.stem + "_traces")
        trace_dir.mkdir(parents=True, exist_ok=True)
    args = [(m, M, eps, seed, n1, cap_of(m), trace_dir) for m, M, eps in grid]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_run_cell_args, args))
    else:
        rows = [run_cell(*a) for a in args]
    rows.sort(key=lambda r: r.key)
    if output_path is not None:
        output_path.write_text(format_table(rows))
        output_path.with_name(output_path.stem + "_timings.csv").write_text(format_timings(rows))
    return rows


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def format_table(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(getattr(r, c)) for c in COLUMNS])
    return buf.getvalue()


def format_timings(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("m", "M", "eps", "pcm_seconds", "dsm_seconds"))
    for r in rows:
        w.writerow([r.m, r.M, _fmt(r.eps), _fmt(r.wall_times.get("pcm")), _fmt(r.wall_times.get("dsm"))])
    return buf.getvalue()


def read_table(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))
