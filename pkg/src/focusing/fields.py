"""Beamforming-gain field maps on arcs and horizontal-plane grids, with
CSV/JSON export."""

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .acoustics import direction, transfer_matrix

DB_FLOOR = -120.0
SOURCE_CLEARANCE = 1e-6
CSV_COLUMNS = ("x", "y", "z", "gain_linear", "gain_db")


@dataclass(frozen=True)
class FieldMap:
    kind: str
    points: np.ndarray
    values: np.ndarray
    focus: np.ndarray
    frequency: float
    k: float
    mu: float | None = None
    grid: dict = field(default_factory=dict)

    @property
    def skipped(self):
        return np.isnan(self.values)

    @property
    def values_db(self):
        with np.errstate(divide="ignore"):
            db = 20 * np.log10(self.values)
        return np.where(np.isnan(self.values), np.nan, np.maximum(db, DB_FLOOR))

    def __len__(self):
        return len(self.values)


def _gains(model, sources, x0, points, workers=1, chunk=4096):
    sources = np.atleast_2d(np.asarray(sources, float))
    g0 = transfer_matrix(model, sources, [x0])[0]
    n0 = np.linalg.norm(g0)
    if n0 == 0:
        raise ValueError("transfer-function vector at the focus point is zero")
    out = np.full(len(points), np.nan)
    if model.kind == "monopole" and len(points):
        dist = np.linalg.norm(points[:, None, :] - sources[None, :, :], axis=-1)
        valid = np.all(dist > SOURCE_CLEARANCE, axis=1)
    else:
        valid = np.ones(len(points), dtype=bool)
    idx = np.flatnonzero(valid)

    def work(sl):
        sel = idx[sl]
        g = transfer_matrix(model, sources, points[sel])
        num = np.abs(g @ g0.conj())
        out[sel] = np.minimum(num / (np.linalg.norm(g, axis=1) * n0), 1.0)

    slices = [slice(i, i + chunk) for i in range(0, len(idx), chunk)]
    if workers > 1 and len(slices) > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(work, slices))
    else:
        for sl in slices:
            work(sl)
    return out


def _meta(model, a):
    k = model.k.k
    return dict(frequency=model.k.frequency, k=k, mu=None if a is None else k * a)


def sample_arc(sources, model, x0, radius, angles, a=None, workers=1):
    """Gain on a horizontal arc of ``radius`` at the given angles (radians
    from +x), in input order."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    angles = np.atleast_1d(np.asarray(angles, float))
    pts = radius * direction(angles).reshape(-1, 3)
    vals = _gains(model, sources, x0, pts, workers)
    return FieldMap("arc", pts, vals, np.asarray(x0, float), grid={"radius": radius, "angles": angles.tolist()},
                    **_meta(model, a))


def sample_plane(sources, model, x0, extent, resolution, a=None, workers=1):
    """Gain on a resolution x resolution grid over [-extent, extent]^2 at z = 0.

    Rows run along y (outer index), columns along x. Points within 1e-6 m of
    a monopole source are skipped and carry NaN.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2, got {resolution}")
    ax = np.linspace(-extent, extent, int(resolution))
    X, Y = np.meshgrid(ax, ax)
    pts = np.column_stack([X.ravel(), Y.ravel(), np.zeros(X.size)])
    vals = _gains(model, sources, x0, pts, workers)
    return FieldMap("plane", pts, vals, np.asarray(x0, float),
                    grid={"extent": extent, "resolution": int(resolution)}, **_meta(model, a))


def _fmt(v):
    v = float(v)
    return "nan" if math.isnan(v) else format(v, ".17g")


def to_csv(fmap):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p, g, db in zip(fmap.points, fmap.values, fmap.values_db):
        w.writerow([_fmt(p[0]), _fmt(p[1]), _fmt(p[2]), _fmt(g), _fmt(db)])
    return buf.getvalue()


def _num(v):
    v = float(v)
    return None if math.isnan(v) else v


def to_json(fmap):
    doc = {
        "kind": fmap.kind,
        "focus": [float(v) for v in fmap.focus],
        "frequency": fmap.frequency,
        "k": fmap.k,
        "mu": fmap.mu,
        "grid": fmap.grid,
        "points": [[float(v) for v in p] for p in fmap.points],
        "gain_linear": [_num(v) for v in fmap.values],
        "gain_db": [_num(v) for v in fmap.values_db],
        "skipped": np.flatnonzero(fmap.skipped).tolist(),
    }
    # repr() of a float is the shortest string that round-trips exactly
    return json.dumps(doc, indent=1, allow_nan=False)


def export(fmap, fmt="csv"):
    """Serialise a field map as UTF-8 bytes in ``csv`` or ``json``."""
    fmt = fmt.lower()
    if fmt == "csv":
        return to_csv(fmap).encode()
    if fmt == "json":
        return to_json(fmap).encode()
    raise ValueError(f"unknown export format {fmt!r}")


def read_csv(data):
    """Parse exported CSV back into (points, gain_linear, gain_db) arrays."""
    if isinstance(data, bytes):
        data = data.decode()
    rows = list(csv.reader(io.StringIO(data)))
    if tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"unexpected header {rows[0]}")
    arr = np.array([[float(v) for v in r] for r in rows[1:]], float).reshape(-1, 5)
    return arr[:, :3], arr[:, 3], arr[:, 4]
