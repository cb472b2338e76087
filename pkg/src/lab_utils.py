#!/usr/bin/env python3
"""
ABOUTME: Shared plumbing for seeding, ordered parallel fan-out and result formatting
ABOUTME: Handles SeedSequence streams, log-log fits, CSV tables with summary blocks and SVG plots
"""

import csv
import io
import json
import logging
import math
from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Any, TypeVar

import numpy as np

from lab_config import MC_CHUNK_SIZE, worker_count


logger = logging.getLogger(__name__)

T = TypeVar("T")

SeedLike = int | np.random.SeedSequence | None


def as_seed_sequence(seed: SeedLike) -> np.random.SeedSequence:
    """Wrap an integer (or None) seed as a SeedSequence; pass SeedSequences through."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn_seeds(seed: SeedLike, count: int) -> list[np.random.SeedSequence]:
    """Independent child streams of a seed, one per work unit."""
    return as_seed_sequence(seed).spawn(count)


def make_rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(as_seed_sequence(seed))


def chunk_sizes(total: int, chunk: int = MC_CHUNK_SIZE) -> list[int]:
    """Split a sample budget into fixed-size chunks (last one may be short)."""
    if total <= 0:
        return []
    full, rest = divmod(total, chunk)
    sizes = [chunk] * full
    if rest:
        sizes.append(rest)
    return sizes


def run_ordered(tasks: Sequence[Callable[[], T]], max_workers: int | None = None) -> list[T]:
    """
    Run zero-argument tasks on a thread pool and return results in submission order.

    Args:
        tasks: Callables to execute
        max_workers: Pool size (default: LOGCAVE_THREADS / worker_count())

    Returns:
        List of results, results[i] belonging to tasks[i]
    """
    if not tasks:
        return []
    workers = max_workers or worker_count()
    if workers == 1 or len(tasks) == 1:
        return [task() for task in tasks]

    results: list[Any] = [None] * len(tasks)
    with ThreadPoolExecutor(max_workers=min(workers, len(tasks))) as executor:
        futures = {}
        for index, task in enumerate(tasks):
            future = executor.submit(task)
            futures[future] = index

        for future in as_completed(futures):
            index = futures[future]
            # Re-raise worker exceptions in the caller
            results[index] = future.result()

    return results


def loglog_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """
    Least-squares line through (log x, log y).

    Returns:
        (slope, intercept); exp(intercept) is the fitted constant
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs at least two strictly positive points")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def format_csv(
    header: Sequence[str],
    rows: Sequence[Sequence[Any]],
    summary: dict[str, Any] | None = None,
) -> str:
    """
    Render a results table as CSV text.

    The header names carry units, e.g. "deficit [rel]". Aggregates go in a
    separate block after a blank line, introduced by a "# summary" marker row.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    if summary:
        buffer.write("\n# summary\n")
        writer.writerow(["key", "value"])
        for key in sorted(summary):
            writer.writerow([key, _cell(summary[key])])
    return buffer.getvalue()


def parse_csv_table(text: str) -> tuple[list[str], list[list[str]]]:
    """Header and rows of the main block of a format_csv payload."""
    main_block = text.split("\n# summary\n", 1)[0]
    reader = csv.reader(io.StringIO(main_block))
    lines = [line for line in reader if line]
    if not lines:
        return [], []
    return lines[0], lines[1:]


def _svg_scale(values: np.ndarray, log: bool) -> np.ndarray:
    return np.log10(values) if log else values


def render_svg(
    csv_text: str,
    x_column: str,
    y_columns: Sequence[str],
    title: str = "",
    log_x: bool = False,
    log_y: bool = False,
    width: int = 640,
    height: int = 420,
) -> str:
    """
    Minimal line + scatter plot of CSV columns.

    Pure function of the CSV payload: identical text in gives identical SVG out.
    Non-numeric or non-positive (for log axes) cells are skipped.
    """
    header, rows = parse_csv_table(csv_text)
    if x_column not in header:
        raise ValueError(f"column {x_column!r} not in CSV header")
    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    margin = 50
    series = []
    for y_column in y_columns:
        if y_column not in header:
            raise ValueError(f"column {y_column!r} not in CSV header")
        xi, yi = header.index(x_column), header.index(y_column)
        points = []
        for row in rows:
            try:
                x, y = float(row[xi]), float(row[yi])
            except (ValueError, IndexError):
                continue
            if not (math.isfinite(x) and math.isfinite(y)):
                continue
            if (log_x and x <= 0) or (log_y and y <= 0):
                continue
            points.append((x, y))
        series.append((y_column, sorted(points)))

    all_points = [p for _, pts in series for p in pts]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    if all_points:
        xs = _svg_scale(np.array([p[0] for p in all_points]), log_x)
        ys = _svg_scale(np.array([p[1] for p in all_points]), log_y)
        x_lo, x_hi = float(xs.min()), float(xs.max())
        y_lo, y_hi = float(ys.min()), float(ys.max())
        x_span = x_hi - x_lo or 1.0
        y_span = y_hi - y_lo or 1.0

        def to_px(x: float, y: float) -> tuple[float, float]:
            sx = _svg_scale(np.array([x]), log_x)[0]
            sy = _svg_scale(np.array([y]), log_y)[0]
            px = margin + (sx - x_lo) / x_span * (width - 2 * margin)
            py = height - margin - (sy - y_lo) / y_span * (height - 2 * margin)
            return float(px), float(py)

        parts.append(
            f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
            f'y2="{height - margin}" stroke="black"/>'
        )
        parts.append(
            f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
            f'font-size="12">{x_column}{" (log)" if log_x else ""}</text>'
        )
        for k, (name, points) in enumerate(series):
            colour = palette[k % len(palette)]
            pixels = [to_px(x, y) for x, y in points]
            if len(pixels) > 1:
                path = " ".join(f"{px:.2f},{py:.2f}" for px, py in pixels)
                parts.append(
                    f'<polyline points="{path}" fill="none" stroke="{colour}" stroke-width="1.5"/>'
                )
            for px, py in pixels:
                parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" fill="{colour}"/>')
            parts.append(
                f'<text x="{width - margin:.1f}" y="{margin + 14 * (k + 1)}" text-anchor="end" '
                f'font-size="12" fill="{colour}">{name}{" (log)" if log_y else ""}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.random.SeedSequence):
        return {"entropy": value.entropy, "spawn_key": list(value.spawn_key)}
    if hasattr(value, "to_dict"):
        return value.to_dict()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def to_json_text(payload: Any) -> str:
    """Deterministic JSON text (sorted keys, numpy-aware)."""
    return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.debug("wrote %s (%d bytes)", path, len(text))
    return path
