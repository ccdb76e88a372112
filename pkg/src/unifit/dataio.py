"""Loading real-world series, mapping them onto the unit domain, and
persisting fit results.

Input files are comma-separated "time,value" rows with optional '#'
comments, blank lines and a single optional header line.  Normalization
insets the time span by a configurable padding so the data occupy
[padding, 1 - padding]: the maximum entropy shapes vanish exactly at the
unit-interval endpoints while real series rarely do.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .fitting import FitResult
from .models import CurveModel, ModelKind, SampledSeries, ShapeParams, sample_series

__all__ = [
    "RawSeries",
    "DomainTransform",
    "SeriesFormatError",
    "FitDocument",
    "load_series",
    "normalize",
    "denormalize_series",
    "denormalize_fit",
    "write_fit",
    "read_fit",
    "bundled_dataset_path",
    "BUNDLED_DATASETS",
]

#: Names of the example datasets shipped with the package.
BUNDLED_DATASETS = ("universe25", "st_matthew")


class SeriesFormatError(ValueError):
    """Malformed input table (carries a 1-based line number when known)."""

    def __init__(self, message: str, line_number: int | None = None):
        super().__init__(message)
        self.line_number = line_number


@dataclass(frozen=True)
class RawSeries:
    """A time series in original units (times strictly increasing)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if not (np.isfinite(times).all() and np.isfinite(values).all()):
            raise ValueError("times and values must be finite")
        if times.size >= 2 and not (np.diff(times) > 0).all():
            raise ValueError("times must be strictly increasing")
        if (values < 0).any():
            raise ValueError("values must be nonnegative")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class DomainTransform:
    """Affine map between original units and the unit fitting domain."""

    t_min: float
    t_max: float
    y_scale: float

    def __post_init__(self) -> None:
        if not self.t_max > self.t_min:
            raise ValueError(f"t_max must exceed t_min, got [{self.t_min}, {self.t_max}]")
        if not self.y_scale > 0:
            raise ValueError(f"y_scale must be > 0, got {self.y_scale}")

    def to_unit_time(self, t):
        return (np.asarray(t, dtype=float) - self.t_min) / (self.t_max - self.t_min)

    def from_unit_time(self, x):
        return self.t_min + np.asarray(x, dtype=float) * (self.t_max - self.t_min)


def _parse_rows(text: str):
    rows = []
    header_allowed = True
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        parsed = None
        if len(parts) == 2:
            try:
                parsed = (float(parts[0]), float(parts[1]))
            except ValueError:
                parsed = None
        if parsed is None:
            if header_allowed:
                header_allowed = False  # tolerate one leading header line
                continue
            raise SeriesFormatError(
                f"line {lineno}: expected 'time,value', got {raw!r}", lineno
            )
        header_allowed = False
        t, v = parsed
        if not (math.isfinite(t) and math.isfinite(v)):
            raise SeriesFormatError(f"line {lineno}: non-finite entry {raw!r}", lineno)
        if v < 0:
            raise SeriesFormatError(f"line {lineno}: negative value {v!r}", lineno)
        rows.append((t, v))
    return rows


def load_series(source) -> RawSeries:
    """Read a 'time,value' table from a path, text or binary stream.

    Rows are sorted by time; duplicate times, unparseable rows and tables
    with fewer than 3 rows are rejected.
    """
    if hasattr(source, "read"):
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = Path(source).read_text(encoding="utf-8")

    rows = _parse_rows(text)
    if len(rows) < 3:
        raise SeriesFormatError(f"need at least 3 data rows, got {len(rows)}")
    rows.sort(key=lambda tv: tv[0])
    times = [t for t, _ in rows]
    for prev, cur in zip(times, times[1:]):
        if cur == prev:
            raise SeriesFormatError(f"duplicate time {prev!r}")
    return RawSeries(np.array(times), np.array([v for _, v in rows]))


def normalize(raw: RawSeries, padding: float = 0.02) -> tuple[SampledSeries, DomainTransform]:
    """Map the series onto the unit domain with max(ys) = 1.

    The observed time span is inset to [padding, 1 - padding]; values are
    divided by their maximum.
    """
    if not 0.0 <= padding < 0.5:
        raise ValueError(f"padding must lie in [0, 0.5), got {padding}")
    if len(raw) < 2:
        raise ValueError("need at least 2 points to normalize")
    y_scale = float(raw.values.max())
    if y_scale <= 0.0:
        raise ValueError("all values are zero; y scale is undefined")
    t_first = float(raw.times[0])
    t_last = float(raw.times[-1])
    pad_t = padding * (t_last - t_first) / (1.0 - 2.0 * padding)
    transform = DomainTransform(t_first - pad_t, t_last + pad_t, y_scale)
    xs = transform.to_unit_time(raw.times)
    return SampledSeries(np.clip(xs, 0.0, 1.0), raw.values / y_scale), transform


def denormalize_series(series: SampledSeries, transform: DomainTransform) -> RawSeries:
    """Map a unit-domain series back to original units."""
    return RawSeries(transform.from_unit_time(series.xs), series.ys * transform.y_scale)


def denormalize_fit(result: FitResult, transform: DomainTransform, grid_size: int) -> RawSeries:
    """Evaluate the fitted model on a uniform grid in original units."""
    return denormalize_series(sample_series(result.model, grid_size), transform)


@dataclass(frozen=True)
class FitDocument:
    """The persisted form of a fit: model, transform and diagnostics."""

    model: CurveModel
    transform: DomainTransform
    rms_normalized: float
    rms_original: float
    starts: int
    iterations_used: int
    converged: bool
    version: str


def write_fit(result: FitResult, transform: DomainTransform, path) -> None:
    """Write the fit as deterministic JSON.

    Keys appear in a fixed order (model, parameters, amplitude,
    rms_normalized, rms_original, transform, optimizer, version) with no
    timestamps, so identical fits produce byte-identical documents.
    """
    params = result.model.params
    doc = {
        "model": params.kind.value,
        "parameters": {name: val for name, val in params.named().items()},
        "amplitude": result.model.amplitude,
        "rms_normalized": result.rms,
        "rms_original": result.rms * transform.y_scale,
        "transform": {
            "t_min": transform.t_min,
            "t_max": transform.t_max,
            "y_scale": transform.y_scale,
        },
        "optimizer": {
            "starts": len(result.start_losses),
            "iterations_used": result.iterations_used,
            "converged": result.converged,
        },
        "version": __version__,
    }
    text = json.dumps(doc, indent=2) + "\n"
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write fit document to {path}: {exc}") from exc


def read_fit(path) -> FitDocument:
    """Read back a document produced by ``write_fit``."""
    if hasattr(path, "read"):
        doc = json.load(path)
    else:
        with io.open(Path(path), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    kind = ModelKind.from_string(doc["model"])
    values = tuple(doc["parameters"][name] for name in kind.param_names)
    model = CurveModel(ShapeParams(kind, values), doc["amplitude"])
    tr = doc["transform"]
    opt = doc["optimizer"]
    return FitDocument(
        model=model,
        transform=DomainTransform(tr["t_min"], tr["t_max"], tr["y_scale"]),
        rms_normalized=doc["rms_normalized"],
        rms_original=doc["rms_original"],
        starts=opt["starts"],
        iterations_used=opt["iterations_used"],
        converged=opt["converged"],
        version=doc["version"],
    )


def bundled_dataset_path(name: str) -> Path:
    """Filesystem path of a bundled example dataset (.csv)."""
    if name not in BUNDLED_DATASETS:
        raise ValueError(f"unknown dataset {name!r} (available: {BUNDLED_DATASETS})")
    return Path(str(resources.files(__package__) / "data" / f"{name}.csv"))
