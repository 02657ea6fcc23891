"""Multi-task series containers, CSV ingestion and a synthetic generator."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import InvalidInputError, ParseError
from ..feature_maps import DEFAULT_LAG


@dataclass(frozen=True)
class MultiTaskDataset:
    """``T`` aligned univariate series stored as a ``(T, n)`` array.

    ``provenance`` is ``"raw"`` or ``"differenced"``; ``source`` carries the
    file path or generator parameters needed to rebuild the data.
    """

    series: np.ndarray
    names: tuple = ()
    provenance: str = "raw"
    subset_id: int = 0
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.series, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1 or s.shape[1] < 2:
            raise InvalidInputError(f"series must be a (T, n) array, got shape {s.shape}")
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("series contain missing or non-finite values")
        s.setflags(write=False)
        object.__setattr__(self, "series", s)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"task{t + 1}" for t in range(s.shape[0])))
        if len(self.names) != s.shape[0]:
            raise InvalidInputError("one name per task is required")

    @property
    def T(self) -> int:
        return self.series.shape[0]

    @property
    def n(self) -> int:
        return self.series.shape[1]

    def differenced(self) -> "MultiTaskDataset":
        if self.provenance == "differenced":
            return self
        return replace(self, series=np.diff(self.series, axis=1), provenance="differenced")

    def window(self, start: int, length: int, subset_id: int) -> "MultiTaskDataset":
        if start < 0 or start + length > self.n:
            raise InvalidInputError("window falls outside the series")
        src = dict(self.source, window_start=int(start), window_length=int(length))
        return replace(self, series=self.series[:, start:start + length].copy(),
                       subset_id=subset_id, source=src)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv_tasks(path, header="auto", delimiter=",", min_rows=DEFAULT_LAG + 2) -> MultiTaskDataset:
    """Read one column per task.

    ``header="auto"`` treats the first row as names when any of its cells is
    non-numeric.  Errors report 1-based file rows and columns.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    if not rows:
        raise ParseError(f"{path}: empty file")
    names = ()
    first = 0
    has_header = header is True or (header == "auto" and not all(_is_number(c) for c in rows[0]))
    if has_header:
        names = tuple(c.strip() for c in rows[0])
        first = 1
    width = len(rows[first]) if first < len(rows) else len(names)
    values = []
    for r in range(first, len(rows)):
        row = rows[r]
        if len(row) != width:
            raise ParseError(f"{path}: expected {width} fields, found {len(row)}", row=r + 1)
        vals = []
        for c, cell in enumerate(row):
            cell = cell.strip()
            if not cell:
                raise ParseError(f"{path}: missing value", row=r + 1, col=c + 1)
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric value {cell!r}", row=r + 1, col=c + 1) from None
            if not np.isfinite(v):
                raise ParseError(f"{path}: non-finite value {cell!r}", row=r + 1, col=c + 1)
            vals.append(v)
        values.append(vals)
    if len(values) < min_rows:
        raise ParseError(f"{path}: need at least {min_rows} data rows, found {len(values)}")
    if names and len(names) != width:
        raise ParseError(f"{path}: header has {len(names)} names for {width} columns", row=1)
    return MultiTaskDataset(np.array(values).T, names, "raw", 0, {"file": str(path)})


def save_csv_tasks(dataset: MultiTaskDataset, path, header: bool = False) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            writer.writerow(dataset.names)
        for row in dataset.series.T:
            writer.writerow([repr(float(v)) for v in row])


# AR(2) coefficients of the shared latent process; task-specific components
# jitter around them.
_BASE_AR = (0.3, 0.1)
_AR_JITTER = 0.05
_NOISE_SD = 0.3
_BURN_IN = 200


def _ar2(rng, phi, n):
    e = rng.standard_normal(n + _BURN_IN)
    out = np.zeros(n + _BURN_IN)
    for i in range(2, n + _BURN_IN):
        out[i] = phi[0] * out[i - 1] + phi[1] * out[i - 2] + e[i]
    return out[_BURN_IN:]


def synth_generate(T: int, n: int, coupling: float, seed: int, level: float = 8.0) -> MultiTaskDataset:
    """Synthetic multi-task series with a tunable shared component.

    ``y_t = level + coupling * s + (1 - coupling) * u_t + noise`` where ``s`` is a
    shared AR(2) process, ``u_t`` independent AR(2) processes with jittered
    coefficients, and the noise is white.  Deterministic in ``seed``.
    """
    if int(T) != T or T < 2:
        raise InvalidInputError(f"need at least 2 tasks, got {T}")
    if int(n) != n or n < 50:
        raise InvalidInputError(f"need at least 50 points, got {n}")
    if not 0.0 <= coupling <= 1.0:
        raise InvalidInputError(f"coupling must be in [0, 1], got {coupling}")
    rng = np.random.Generator(np.random.PCG64(seed))
    shared = _ar2(rng, _BASE_AR, n)
    series = np.empty((T, n))
    for t in range(T):
        phi = np.array(_BASE_AR) + rng.uniform(-_AR_JITTER, _AR_JITTER, 2)
        own = _ar2(rng, phi, n)
        noise = _NOISE_SD * rng.standard_normal(n)
        series[t] = level + coupling * shared + (1.0 - coupling) * own + noise
    source = {"synthetic": True, "T": int(T), "n": int(n), "coupling": float(coupling), "seed": int(seed)}
    return MultiTaskDataset(series, (), "raw", int(seed), source)


def sample_windows(dataset: MultiTaskDataset, n_subsets: int = 30, length: int = 400, seed: int = 0):
    """Contiguous windows with uniformly drawn start points (seeded)."""
    if length > dataset.n:
        raise InvalidInputError(f"window length {length} exceeds series length {dataset.n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    starts = rng.integers(0, dataset.n - length + 1, size=n_subsets)
    return [dataset.window(int(s), length, k + 1) for k, s in enumerate(starts)]
