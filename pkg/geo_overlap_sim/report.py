"""CSV tables and SVG figures for sweep results."""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union
import csv
import io
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .exceptions import MetricsError  # noqa: E402
from .metrics import DeltaRow, SweepRow, delta_eta  # noqa: E402
from .utils import load_text  # noqa: E402

logger = logging.getLogger(__name__)

SWEEP_HEADER = (
    "model", "gpu", "fiber", "total_gpus", "distance_m", "inter_bw_Bps",
    "bucket_bytes", "t_compute_s", "t_total_s", "eta", "multiplier",
)
DELTA_HEADER = (
    "model", "gpu", "total_gpus", "distance_m", "inter_bw_Bps", "bucket_bytes", "delta_eta",
)

GPU_COLORS = {"a100": "tab:blue", "h100": "tab:red"}
PLOT_FILES = ("eta_vs_distance.svg", "delta_eta_vs_distance.svg", "multiplier_vs_distance.svg")
SVG_HASH_SALT = "geo-overlap-sim"

Row = Union[SweepRow, DeltaRow]


def fmt(value: Optional[float]) -> str:
    """Nine significant digits; empty for a missing value."""
    if value is None:
        return ""
    return format(value, ".9g")


def _record(row: Row) -> List[str]:
    if isinstance(row, SweepRow):
        return [
            row.model, row.gpu, row.fiber, str(row.total_gpus), fmt(row.distance_m),
            fmt(row.inter_bw), str(row.bucket_bytes), fmt(row.t_compute_s),
            fmt(row.t_total_s), fmt(row.eta), fmt(row.multiplier),
        ]
    return [
        row.model, row.gpu, str(row.total_gpus), fmt(row.distance_m), fmt(row.inter_bw),
        str(row.bucket_bytes), fmt(row.delta_eta),
    ]


def emit_csv(rows: Sequence[Row], destination: TextIO, delta: Optional[bool] = None) -> int:
    """
    Write a header and one record per row, sorted by coordinates.

    Args:
        rows: sweep rows or delta rows (not mixed)
        destination: text stream
        delta: force the delta header for an empty list

    Returns:
        Number of UTF-8 bytes written
    """
    if delta is None:
        delta = bool(rows) and isinstance(rows[0], DeltaRow)
    expected = DeltaRow if delta else SweepRow
    if any(not isinstance(r, expected) for r in rows):
        raise MetricsError("cannot mix sweep rows and delta rows in one table")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(DELTA_HEADER if delta else SWEEP_HEADER)
    for row in sorted(rows, key=lambda r: r.sort_key()):
        writer.writerow(_record(row))
    text = buffer.getvalue()
    destination.write(text)
    return len(text.encode("utf-8"))


def write_csv(rows: Sequence[Row], path: Union[str, Path], delta: Optional[bool] = None) -> int:
    with open(path, "w", encoding="utf-8", newline="") as f:
        return emit_csv(rows, f, delta)


def read_csv(source: TextIO) -> List[SweepRow]:
    """Parse a sweep table written by emit_csv."""
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or tuple(header) != SWEEP_HEADER:
        raise MetricsError(f"not a sweep table, header was {header}")
    rows = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        try:
            (model, gpu, fiber, total_gpus, distance_m, inter_bw, bucket_bytes,
             t_compute, t_total, eta, multiplier) = record
            rows.append(
                SweepRow(
                    model, gpu, fiber, int(total_gpus), float(distance_m), float(inter_bw),
                    int(bucket_bytes), float(t_compute), float(t_total), float(eta),
                    float(multiplier) if multiplier else None,
                )
            )
        except ValueError as e:
            raise MetricsError(f"bad record on line {lineno}: {e}")
    return rows


def read_csv_file(path: Union[str, Path]) -> List[SweepRow]:
    return read_csv(io.StringIO(load_text(path)))


def _plot_scope(rows: Sequence[SweepRow]) -> List[SweepRow]:
    """Rows of the largest cluster at its lowest bandwidth and bucket size."""
    total = max(r.total_gpus for r in rows)
    scoped = [r for r in rows if r.total_gpus == total]
    bw = min(r.inter_bw for r in scoped)
    bucket = min(r.bucket_bytes for r in scoped)
    picked = [r for r in scoped if r.inter_bw == bw and r.bucket_bytes == bucket]
    if len(picked) < len(rows):
        logger.info(
            "plotting %d of %d rows (%d GPUs, %g B/s, %d-byte buckets)",
            len(picked), len(rows), total, bw, bucket,
        )
    return picked


def _series(rows, key, value) -> Dict[Tuple, Tuple[List[float], List[float]]]:
    grouped: Dict[Tuple, List[Tuple[float, float]]] = {}
    for row in rows:
        grouped.setdefault(key(row), []).append((row.distance_m / 1000.0, value(row)))
    return {k: tuple(map(list, zip(*sorted(points)))) for k, points in sorted(grouped.items())}


def _style(gpu: str, fiber: Optional[str]) -> Dict:
    color = GPU_COLORS.get(gpu, "tab:gray")
    style = {"color": color, "marker": "o", "markersize": 5, "linewidth": 1.2}
    if fiber == "hcf":
        style.update(markerfacecolor="none", linestyle="--")
    else:
        style.update(markerfacecolor=color, linestyle="-")
    return style


def _figure(models: List[str]):
    fig, axes = plt.subplots(1, len(models), figsize=(5.5 * len(models), 4.2), squeeze=False)
    return fig, dict(zip(models, axes[0]))


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    # fixed salt keeps SVG element ids stable between runs
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_plots(rows: Sequence[SweepRow], destination: Union[str, Path]) -> List[Path]:
    """
    Write up to three SVG figures: eta, delta eta and time multiplier vs distance.

    Hollow markers are HCF, filled markers SMF. The delta plot is skipped
    when only one fiber is present, the multiplier plot when rows carry no
    multipliers.

    Raises:
        MetricsError: fewer than two distinct distances
    """
    if len({r.distance_m for r in rows}) < 2:
        raise MetricsError("plots need rows at two or more distances")
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)

    scoped = _plot_scope(rows)
    models = sorted({r.model for r in scoped})
    written: List[Path] = []

    fig, axes = _figure(models)
    for (model, gpu, fiber), (xs, ys) in _series(
        scoped, lambda r: (r.model, r.gpu, r.fiber), lambda r: r.eta
    ).items():
        axes[model].plot(xs, ys, label=f"{gpu.upper()} {fiber.upper()}", **_style(gpu, fiber))
    for model, ax in axes.items():
        ax.set(xscale="log", xlabel="Inter-DC distance (km)", ylabel="Overlap η", title=model)
        ax.set_ylim(0, 1.05)
        ax.grid(alpha=0.3)
        ax.legend(fontsize=8)
    written.append(_save(fig, out / PLOT_FILES[0]))

    deltas, _ = delta_eta(scoped)
    if deltas:
        fig, axes = _figure(models)
        for (model, gpu), (xs, ys) in _series(
            deltas, lambda r: (r.model, r.gpu), lambda r: r.delta_eta
        ).items():
            axes[model].plot(xs, ys, label=gpu.upper(), **_style(gpu, None))
        for model, ax in axes.items():
            ax.set(xscale="log", xlabel="Inter-DC distance (km)", ylabel="Δη (HCF − SMF)", title=model)
            ax.grid(alpha=0.3)
            ax.legend(fontsize=8)
        written.append(_save(fig, out / PLOT_FILES[1]))
    else:
        logger.warning("no HCF/SMF pairs in the data, skipping the delta eta plot")

    with_multiplier = [r for r in scoped if r.multiplier is not None]
    if with_multiplier:
        fig, axes = _figure(models)
        for (model, gpu, fiber), (xs, ys) in _series(
            with_multiplier, lambda r: (r.model, r.gpu, r.fiber), lambda r: r.multiplier
        ).items():
            axes[model].plot(xs, ys, label=f"{gpu.upper()} {fiber.upper()}", **_style(gpu, fiber))
        for model, ax in axes.items():
            ax.set(
                xscale="log", xlabel="Inter-DC distance (km)",
                ylabel="Training time multiplier (vs 0.3 km)", title=model,
            )
            ax.grid(alpha=0.3)
            ax.legend(fontsize=8)
        written.append(_save(fig, out / PLOT_FILES[2]))
    else:
        logger.warning("rows carry no multipliers, skipping the multiplier plot")

    logger.info("wrote %d plot(s) to %s", len(written), out)
    return written
